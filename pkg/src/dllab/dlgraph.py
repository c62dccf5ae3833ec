"""Vertex model and combinatorics of Diestel-Leader graphs.

T is the (q+1)-regular tree with a fixed end, drawn so every vertex has one
upward (parent) edge and q downward (child) edges. A vertex at height n is
addressed by its branching digits: a finitely supported map from height
indices <= n to {0, ..., q-1}, with zeros omitted. Heights may be negative;
the all-zero address at any height is a valid vertex.

DL_d(q) is the set of d-tuples of tree vertices whose heights sum to zero;
an edge moves one coordinate down to a child and another up to its parent.
The index-k variant DL_d^k(q) constrains the first height to multiples of k
and has two kinds of edges: ordinary moves among coordinates 2..d, and
moves of the first coordinate by a full k step compensated by a monotone
distribution of k single steps over the remaining coordinates.

Boxes are the connected components of preimages of height cubes under the
height map; each fiber over a cube point is a product of descendant sets,
so all counting here is exact. Aligned boxes of a common side tile a box,
which is the geometric input for the index-k comparison map.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Iterator, Optional, Sequence


class BudgetError(RuntimeError):
    """An enumeration exceeded its configured size or depth budget."""


class RegionAlignmentError(ValueError):
    """A region is not aligned to the requested tiling grid."""


DEFAULT_VERTEX_BUDGET = 500_000
DEFAULT_DISTANCE_CAP = 64


@dataclass(frozen=True, slots=True)
class GraphParams:
    d: int
    q: int
    k: int = 1


def graph_params(d: int, q: int, k: int = 1) -> GraphParams:
    if not isinstance(d, int) or d < 2:
        raise ValueError(f"d must be an integer >= 2, got {d!r}")
    if not isinstance(q, int) or q < 2:
        raise ValueError(f"q must be an integer >= 2, got {q!r}")
    if not isinstance(k, int) or k < 1:
        raise ValueError(f"k must be an integer >= 1, got {k!r}")
    return GraphParams(d=d, q=q, k=k)


def expected_degree(params: GraphParams) -> int:
    """Vertex degree: (d-1)(d-2)q + 2 q^k C(k+d-2, d-2); d(d-1)q when k=1."""
    d, q, k = params.d, params.q, params.k
    return (d - 1) * (d - 2) * q + 2 * q**k * math.comb(k + d - 2, d - 2)


# ---------------------------------------------------------------------------
# tree vertices


@dataclass(frozen=True, slots=True)
class TreeVertex:
    """Height plus sparse branching digits (index, value), value nonzero."""

    level: int
    digits: tuple


def tree_vertex(level: int, digits: Iterable = (), q: Optional[int] = None) -> TreeVertex:
    items = sorted((int(i), int(v)) for i, v in digits)
    seen = set()
    for i, v in items:
        if i in seen:
            raise ValueError(f"duplicate digit index {i}")
        seen.add(i)
        if i > level:
            raise ValueError(f"digit index {i} above vertex height {level}")
        if v == 0:
            raise ValueError("zero digits must be omitted")
        if v < 0 or (q is not None and v >= q):
            raise ValueError(f"digit value {v} out of range")
    return TreeVertex(level=level, digits=tuple(items))


def tree_root(level: int = 0) -> TreeVertex:
    return TreeVertex(level=level, digits=())


def tree_digit(v: TreeVertex, index: int) -> int:
    for i, val in v.digits:
        if i == index:
            return val
    return 0


def tree_parent(v: TreeVertex) -> TreeVertex:
    n = v.level
    return TreeVertex(n - 1, tuple((i, val) for i, val in v.digits if i != n))


def tree_children(v: TreeVertex, q: int) -> "tuple[TreeVertex, ...]":
    n = v.level + 1
    out = [TreeVertex(n, v.digits)]
    for b in range(1, q):
        out.append(TreeVertex(n, v.digits + ((n, b),)))
    return tuple(out)


def tree_ancestor(v: TreeVertex, level: int) -> TreeVertex:
    if level > v.level:
        raise ValueError(f"no ancestor above height {v.level} at height {level}")
    return TreeVertex(level, tuple((i, val) for i, val in v.digits if i <= level))


def is_tree_ancestor(a: TreeVertex, v: TreeVertex) -> bool:
    return a.level <= v.level and tree_ancestor(v, a.level) == a


def tree_descendants(v: TreeVertex, depth: int, q: int) -> Iterator[TreeVertex]:
    """All q^depth descendants exactly depth levels below v, in digit order."""
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    base = v.level
    indices = range(base + 1, base + depth + 1)
    for combo in product(range(q), repeat=depth):
        extra = tuple((i, b) for i, b in zip(indices, combo) if b)
        yield TreeVertex(base + depth, v.digits + extra)


def dense_digits(v: TreeVertex, lo: int, hi: int) -> "tuple[int, ...]":
    out = [0] * (hi - lo + 1)
    for i, val in v.digits:
        if lo <= i <= hi:
            out[i - lo] = val
    return tuple(out)


def meet_level(u: TreeVertex, v: TreeVertex) -> int:
    """Height of the deepest common ancestor."""
    du, dv = dict(u.digits), dict(v.digits)
    top = min(u.level, v.level)
    for i in sorted(set(du) | set(dv)):
        if du.get(i, 0) != dv.get(i, 0):
            return min(top, i - 1)
    return top


def tree_key(v: TreeVertex) -> str:
    body = ",".join(f"{i}={val}" for i, val in v.digits)
    return f"{v.level}:{body}"


# ---------------------------------------------------------------------------
# graph vertices


@dataclass(frozen=True, slots=True)
class DLVertex:
    params: GraphParams
    coords: tuple


def dl_vertex(params: GraphParams, coords: Sequence[TreeVertex]) -> DLVertex:
    coords = tuple(coords)
    if len(coords) != params.d:
        raise ValueError(f"need {params.d} tree coordinates, got {len(coords)}")
    if sum(c.level for c in coords) != 0:
        raise ValueError("coordinate heights must sum to zero")
    if coords[0].level % params.k != 0:
        raise ValueError(f"first height must be a multiple of k={params.k}")
    for c in coords:
        for _, val in c.digits:
            if not 0 < val < params.q:
                raise ValueError(f"digit value {val} out of range for q={params.q}")
    return DLVertex(params=params, coords=coords)


def base_vertex(params: GraphParams) -> DLVertex:
    return DLVertex(params, tuple(tree_root(0) for _ in range(params.d)))


def heights(v: DLVertex) -> "tuple[int, ...]":
    return tuple(c.level for c in v.coords)


def rho(v: DLVertex) -> "tuple[int, ...]":
    """Tracked heights: all but the last, which they determine."""
    return tuple(c.level for c in v.coords[:-1])


def dl_key(v: DLVertex) -> str:
    return "|".join(tree_key(c) for c in v.coords)


def with_index(v: DLVertex, k: int) -> DLVertex:
    """Reinterpret the same tuple of tree vertices under index parameter k."""
    return dl_vertex(graph_params(v.params.d, v.params.q, k), v.coords)


def _compositions(total: int, parts: int) -> Iterator[tuple]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def dl_neighbors(v: DLVertex) -> "list[DLVertex]":
    params = v.params
    d, q, k = params.d, params.q, params.k
    out = []
    if k == 1:
        for i in range(d):
            for j in range(d):
                if i == j:
                    continue
                up = tree_parent(v.coords[j])
                for child in tree_children(v.coords[i], q):
                    coords = list(v.coords)
                    coords[i] = child
                    coords[j] = up
                    out.append(DLVertex(params, tuple(coords)))
        return out
    # ordinary edges among coordinates 2..d
    for i in range(1, d):
        for j in range(1, d):
            if i == j:
                continue
            up = tree_parent(v.coords[j])
            for child in tree_children(v.coords[i], q):
                coords = list(v.coords)
                coords[i] = child
                coords[j] = up
                out.append(DLVertex(params, tuple(coords)))
    # first coordinate climbs k, the rest descend a total of k
    up_first = tree_ancestor(v.coords[0], v.coords[0].level - k)
    for combo in _compositions(k, d - 1):
        pools = [list(tree_descendants(v.coords[1 + t], combo[t], q)) for t in range(d - 1)]
        for choice in product(*pools):
            out.append(DLVertex(params, (up_first,) + tuple(choice)))
    # first coordinate descends k, the rest climb a total of k
    for combo in _compositions(k, d - 1):
        ups = tuple(
            tree_ancestor(v.coords[1 + t], v.coords[1 + t].level - combo[t])
            for t in range(d - 1)
        )
        for down in tree_descendants(v.coords[0], k, q):
            out.append(DLVertex(params, (down,) + ups))
    return out


def dl_adjacent(u: DLVertex, v: DLVertex) -> bool:
    if u.params != v.params or u == v:
        return False
    params = u.params
    d, k = params.d, params.k
    deltas = tuple(v.coords[i].level - u.coords[i].level for i in range(d))
    if sum(deltas) != 0:
        return False

    def plain_move(lo_idx: int) -> bool:
        # one coordinate down a step, one up a step, the rest fixed
        downs = [i for i in range(lo_idx, d) if deltas[i] == 1]
        ups = [i for i in range(lo_idx, d) if deltas[i] == -1]
        if len(downs) != 1 or len(ups) != 1:
            return False
        for i in range(d):
            if i == downs[0]:
                if tree_parent(v.coords[i]) != u.coords[i]:
                    return False
            elif i == ups[0]:
                if tree_parent(u.coords[i]) != v.coords[i]:
                    return False
            elif u.coords[i] != v.coords[i]:
                return False
        return True

    if k == 1:
        return plain_move(0)
    if deltas[0] == 0:
        return u.coords[0] == v.coords[0] and plain_move(1)
    if deltas[0] == -k:
        if any(x < 0 for x in deltas[1:]) or sum(deltas[1:]) != k:
            return False
        if tree_ancestor(u.coords[0], u.coords[0].level - k) != v.coords[0]:
            return False
        return all(is_tree_ancestor(u.coords[i], v.coords[i]) for i in range(1, d))
    if deltas[0] == k:
        if any(x > 0 for x in deltas[1:]) or -sum(deltas[1:]) != k:
            return False
        if tree_ancestor(v.coords[0], v.coords[0].level - k) != u.coords[0]:
            return False
        return all(is_tree_ancestor(v.coords[i], u.coords[i]) for i in range(1, d))
    return False


# ---------------------------------------------------------------------------
# height cubes


@dataclass(frozen=True, slots=True)
class HeightCube:
    """Product of integer intervals on the tracked heights, common side."""

    intervals: tuple
    k: int = 1


def height_cube(intervals: Sequence, k: int = 1) -> HeightCube:
    iv = tuple((int(a), int(b)) for a, b in intervals)
    if not iv:
        raise ValueError("a cube needs at least one axis")
    sides = {b - a for a, b in iv}
    if len(sides) != 1 or min(b - a for a, b in iv) < 0:
        raise ValueError(f"intervals must share a nonnegative side, got {iv}")
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > 1:
        a1, b1 = iv[0]
        if a1 % k or b1 % k:
            raise ValueError(f"first axis [{a1}, {b1}] must be aligned to {k}Z")
    return HeightCube(intervals=iv, k=k)


def cube_side(cube: HeightCube) -> int:
    a, b = cube.intervals[0]
    return b - a


def cube_points(cube: HeightCube) -> "list[tuple[int, ...]]":
    axes = []
    for idx, (a, b) in enumerate(cube.intervals):
        step = cube.k if idx == 0 else 1
        axes.append(range(a, b + 1, step))
    return [tuple(p) for p in product(*axes)]


def cube_size(cube: HeightCube) -> int:
    n = 1
    for idx, (a, b) in enumerate(cube.intervals):
        step = cube.k if idx == 0 else 1
        n *= (b - a) // step + 1
    return n


def cube_contains(cube: HeightCube, point: Sequence[int]) -> bool:
    if len(point) != len(cube.intervals):
        return False
    for idx, ((a, b), x) in enumerate(zip(cube.intervals, point)):
        if not a <= x <= b:
            return False
        if idx == 0 and (x - a) % cube.k:
            return False
    return True


def height_steps(params: GraphParams) -> "tuple[tuple[int, ...], ...]":
    """Height changes realizable by one edge, on the tracked coordinates."""
    d, k = params.d, params.k
    n = d - 1
    steps = set()

    def unit(i: int, s: int) -> "tuple[int, ...]":
        return tuple(s if t == i else 0 for t in range(n))

    if k == 1:
        lo = 0
    else:
        lo = 1
        for combo in _compositions(k, d - 1):
            delta = [0] * n
            delta[0] = k
            for t in range(1, d - 1):
                delta[t] = -combo[t - 1]
            steps.add(tuple(delta))
            steps.add(tuple(-x for x in delta))
    for i in range(lo, d):
        for j in range(lo, d):
            if i == j:
                continue
            delta = [0] * n
            if i < n:
                delta[i] += 1
            if j < n:
                delta[j] -= 1
            if any(delta):
                steps.add(tuple(delta))
    return tuple(sorted(steps))


def cube_boundary(params: GraphParams, cube: HeightCube, r: int) -> "list[tuple[int, ...]]":
    """Points of the cube within r lattice steps of its complement."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    steps = height_steps(params)
    inside = set(cube_points(cube))
    out = []
    for p in sorted(inside):
        frontier = {p}
        seen = {p}
        hit = False
        for _ in range(r):
            nxt = set()
            for x in frontier:
                for s in steps:
                    y = tuple(a + b for a, b in zip(x, s))
                    if y not in seen:
                        seen.add(y)
                        nxt.add(y)
            if any(y not in inside for y in nxt):
                hit = True
                break
            frontier = nxt
        if hit:
            out.append(p)
    return out


# ---------------------------------------------------------------------------
# boxes


@dataclass(frozen=True, slots=True)
class Box:
    """One connected component of the preimage of a height cube."""

    cube: HeightCube
    roots: tuple


def canonical_box(params: GraphParams, cube: HeightCube) -> Box:
    _check_cube(params, cube)
    roots = [tree_root(a) for a, _ in cube.intervals]
    roots.append(tree_root(-sum(b for _, b in cube.intervals)))
    return Box(cube=cube, roots=tuple(roots))


def box_containing(params: GraphParams, cube: HeightCube, x: DLVertex) -> Box:
    _check_cube(params, cube)
    if not cube_contains(cube, rho(x)):
        raise ValueError("vertex heights are outside the cube")
    roots = [tree_ancestor(x.coords[i], a) for i, (a, _) in enumerate(cube.intervals)]
    roots.append(tree_ancestor(x.coords[-1], -sum(b for _, b in cube.intervals)))
    return Box(cube=cube, roots=tuple(roots))


def _check_cube(params: GraphParams, cube: HeightCube) -> None:
    if len(cube.intervals) != params.d - 1:
        raise ValueError(f"cube has {len(cube.intervals)} axes, need {params.d - 1}")
    if cube.k != params.k:
        raise ValueError(f"cube alignment {cube.k} does not match graph k={params.k}")


def box_fiber_lists(params: GraphParams, box: Box, point: Sequence[int]) -> "list[list[TreeVertex]]":
    """Per-coordinate candidate vertices over one cube point."""
    if not cube_contains(box.cube, point):
        raise ValueError(f"point {tuple(point)} is outside the cube")
    q = params.q
    lists = []
    for i, (a, _) in enumerate(box.cube.intervals):
        lists.append(list(tree_descendants(box.roots[i], point[i] - a, q)))
    last_level = -sum(point)
    depth = last_level - box.roots[-1].level
    lists.append(list(tree_descendants(box.roots[-1], depth, q)))
    return lists


def box_fiber(params: GraphParams, box: Box, point: Sequence[int]) -> Iterator[DLVertex]:
    for coords in product(*box_fiber_lists(params, box, point)):
        yield DLVertex(params, coords)


def box_fiber_size(params: GraphParams, box: Box, point: Sequence[int]) -> int:
    n = 1
    for lst in box_fiber_lists(params, box, point):
        n *= len(lst)
    return n


def box_members(params: GraphParams, box: Box) -> Iterator[DLVertex]:
    for point in cube_points(box.cube):
        yield from box_fiber(params, box, point)


def box_size(params: GraphParams, box: Box) -> int:
    return sum(box_fiber_size(params, box, p) for p in cube_points(box.cube))


def box_contains(params: GraphParams, box: Box, x: DLVertex) -> bool:
    if x.params != params or not cube_contains(box.cube, rho(x)):
        return False
    return all(is_tree_ancestor(root, c) for root, c in zip(box.roots, x.coords))


def box_boundary(params: GraphParams, box: Box, r: int) -> Iterator[DLVertex]:
    """Members within graph distance r of the box complement.

    Membership is decided by the height criterion: a member is r-close to
    the complement exactly when its tracked heights are r-close to the cube
    complement, because every path leaving the box must move heights and
    paths inside the preimage of the cube stay inside the component.
    """
    for point in cube_boundary(params, box.cube, r):
        yield from box_fiber(params, box, point)


def box_boundary_size(params: GraphParams, box: Box, r: int) -> int:
    return sum(
        box_fiber_size(params, box, p) for p in cube_boundary(params, box.cube, r)
    )


def tile(params: GraphParams, region: HeightCube, h: int, ambient: Optional[Box] = None) -> "list[Box]":
    """Partition an ambient box over the region into aligned boxes of h points per axis."""
    if params.k != 1:
        raise ValueError("tiling is defined on the k=1 graph")
    _check_cube(params, region)
    if h < 1:
        raise ValueError("tile side must be >= 1")
    for a, b in region.intervals:
        if a % h or (b - a + 1) % h:
            raise RegionAlignmentError(
                f"axis [{a}, {b}] is not aligned to side-{h} tiles"
            )
    if ambient is None:
        ambient = canonical_box(params, region)
    elif ambient.cube != region:
        raise ValueError("ambient box must sit over the region")
    q = params.q
    top_sum = sum(b for _, b in region.intervals)
    tiles = []
    corners = [range(a, b + 1, h) for a, b in region.intervals]
    for corner in product(*corners):
        cube = height_cube([(c, c + h - 1) for c in corner], k=1)
        root_pools = []
        for i, c in enumerate(corner):
            a_i = region.intervals[i][0]
            root_pools.append(list(tree_descendants(ambient.roots[i], c - a_i, q)))
        # the last root sits at height -(tile top sum); it descends from the
        # ambient last root at height -(region top sum)
        tile_top = sum(c + h - 1 for c in corner)
        depth_last = top_sum - tile_top
        root_pools.append(list(tree_descendants(ambient.roots[-1], depth_last, q)))
        for roots in product(*root_pools):
            tiles.append(Box(cube=cube, roots=tuple(roots)))
    return tiles


# ---------------------------------------------------------------------------
# balls and exports


@dataclass(frozen=True)
class BallGraph:
    """A finite vertex set with its induced edges.

    Balls carry center, radius, and BFS depths; box slices carry their cube
    instead. Vertices are sorted by canonical key, so equal inputs always
    produce byte-identical exports.
    """

    params: GraphParams
    vertices: tuple
    keys: tuple
    edges: tuple
    center: Optional[DLVertex] = None
    radius: Optional[int] = None
    depths: Optional[tuple] = None
    cube: Optional[HeightCube] = None

    def index_of(self, key: str) -> int:
        import bisect

        i = bisect.bisect_left(self.keys, key)
        if i < len(self.keys) and self.keys[i] == key:
            return i
        raise KeyError(key)


def _induced_edges(vertices, index) -> "tuple[tuple[int, int], ...]":
    edge_set = set()
    for i, v in enumerate(vertices):
        for w in dl_neighbors(v):
            j = index.get(dl_key(w))
            if j is not None and i < j:
                edge_set.add((i, j))
    return tuple(sorted(edge_set))


def ball(center: DLVertex, radius: int, budget: int = DEFAULT_VERTEX_BUDGET) -> BallGraph:
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    params = center.params
    depth_by_key = {dl_key(center): 0}
    by_key = {dl_key(center): center}
    frontier = [center]
    for depth in range(1, radius + 1):
        nxt = []
        for v in frontier:
            for w in dl_neighbors(v):
                kw = dl_key(w)
                if kw not in depth_by_key:
                    depth_by_key[kw] = depth
                    by_key[kw] = w
                    nxt.append(w)
                    if len(by_key) > budget:
                        raise BudgetError(
                            f"ball of radius {radius} exceeds budget {budget}"
                        )
        frontier = nxt
    keys = tuple(sorted(by_key))
    vertices = tuple(by_key[k] for k in keys)
    index = {k: i for i, k in enumerate(keys)}
    return BallGraph(
        params=params,
        vertices=vertices,
        keys=keys,
        edges=_induced_edges(vertices, index),
        center=center,
        radius=radius,
        depths=tuple(depth_by_key[k] for k in keys),
    )


def box_graph(params: GraphParams, box: Box, budget: int = DEFAULT_VERTEX_BUDGET) -> BallGraph:
    """Induced subgraph on the members of a box."""
    if box_size(params, box) > budget:
        raise BudgetError(f"box has {box_size(params, box)} members, budget {budget}")
    by_key = {dl_key(v): v for v in box_members(params, box)}
    keys = tuple(sorted(by_key))
    vertices = tuple(by_key[k] for k in keys)
    index = {k: i for i, k in enumerate(keys)}
    return BallGraph(
        params=params,
        vertices=vertices,
        keys=keys,
        edges=_induced_edges(vertices, index),
        cube=box.cube,
    )


def sphere_sizes(g: BallGraph) -> "tuple[int, ...]":
    if g.depths is None or g.radius is None:
        raise ValueError("graph carries no BFS depth data")
    out = [0] * (g.radius + 1)
    for dep in g.depths:
        out[dep] += 1
    return tuple(out)


def export_dot(g: BallGraph) -> str:
    lines = ["graph dl {"]
    for key, v in zip(g.keys, g.vertices):
        hs = ",".join(str(h) for h in heights(v))
        lines.append(f'  "{key}" [heights="{hs}"];')
    for i, j in g.edges:
        lines.append(f'  "{g.keys[i]}" -- "{g.keys[j]}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_json(g: BallGraph) -> str:
    payload = {
        "params": {"d": g.params.d, "q": g.params.q, "k": g.params.k},
        "vertices": [
            {"key": key, "heights": list(heights(v))}
            for key, v in zip(g.keys, g.vertices)
        ],
        "edges": [list(e) for e in g.edges],
    }
    if g.center is not None:
        payload["center"] = dl_key(g.center)
        payload["radius"] = g.radius
    if g.cube is not None:
        payload["cube"] = {
            "intervals": [list(iv) for iv in g.cube.intervals],
            "k": g.cube.k,
        }
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


# ---------------------------------------------------------------------------
# exact distances

_DIST_CACHE: dict = {}


def _pair_signature(u: DLVertex, v: DLVertex) -> tuple:
    """Complete invariant of a vertex pair under graph automorphisms.

    Per coordinate, record both heights relative to the meet; tree
    automorphisms with height shifts summing to zero realize any two pairs
    with equal signatures, so distances only depend on this tuple.
    """
    sig = []
    for a, b in zip(u.coords, v.coords):
        m = meet_level(a, b)
        sig.append((a.level - m, b.level - m))
    return tuple(sig)


def dl_distance(u: DLVertex, v: DLVertex, cap: int = DEFAULT_DISTANCE_CAP) -> int:
    """Exact graph distance, memoized on the pair's automorphism signature."""
    if u.params != v.params:
        raise ValueError("vertices live in different graphs")
    if u == v:
        return 0
    sig = (u.params, _pair_signature(u, v))
    hit = _DIST_CACHE.get(sig)
    if hit is not None:
        return hit
    dist = _bfs_simple(u, v, cap)
    _DIST_CACHE[sig] = dist
    return dist


def _bfs_simple(u: DLVertex, v: DLVertex, cap: int) -> int:
    """Bidirectional BFS; exact and budgeted."""
    ku, kv = dl_key(u), dl_key(v)
    if ku == kv:
        return 0
    dist_a = {ku: 0}
    dist_b = {kv: 0}
    front_a = [u]
    front_b = [v]
    depth_a = depth_b = 0
    while depth_a + depth_b < cap and front_a and front_b:
        if len(front_a) <= len(front_b):
            depth_a += 1
            nxt = []
            for x in front_a:
                for w in dl_neighbors(x):
                    kw = dl_key(w)
                    if kw in dist_b:
                        return depth_a + dist_b[kw]
                    if kw not in dist_a:
                        dist_a[kw] = depth_a
                        nxt.append(w)
            front_a = nxt
        else:
            depth_b += 1
            nxt = []
            for x in front_b:
                for w in dl_neighbors(x):
                    kw = dl_key(w)
                    if kw in dist_a:
                        return depth_b + dist_a[kw]
                    if kw not in dist_b:
                        dist_b[kw] = depth_b
                        nxt.append(w)
            front_b = nxt
    raise BudgetError(f"no path within distance cap {cap}")
