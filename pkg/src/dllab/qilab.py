"""Quasi-isometry laboratory for Diestel-Leader graphs.

This module builds the comparison maps studied at desk scale and checks
their metric and measure behavior by exact enumeration:

* boundary transducers: finitely supported rewriting maps on one-sided
  digit streams, composed from three primitives (index shifts, per-level
  digit permutations, and windowed prefix rewrites).  Every primitive is a
  bijection of stream space and maps each clone (cylinder set) to an exact
  finite union of clones, so measure ratios and preimage counts come out
  as exact rationals, never floats;
* interior maps: one boundary transducer per tree coordinate, applied to a
  lattice vertex through the zero-fill section and truncation collapse.
  Fibers over a vertex are counted exactly, coordinate by coordinate;
* fiber-count audits: two-sided bounds on the total preimage mass over a
  box in terms of the box size, its r-boundary, and the transducers'
  measure scalars;
* chain scans: the additive obstruction sums (fiber count minus a target
  integer, summed over a box) that separate maps admitting a bounded
  correction from maps forcing boundary-rate divergence;
* tile maps: the exactly k-to-1 map from the ordinary lattice onto the
  index-k sublattice built from a cube tiling, plus displacement and
  distortion estimates.

Streams are represented sparsely as dicts from index to nonzero digit;
clones are (level, digits) pairs meaning "all streams agreeing with these
digits at every index up to level".  A clone at level n has measure
q**(-n) in the standard ultrametric measure normalized so the level-0
clone over the empty digit assignment has measure 1.
"""

from __future__ import annotations

import itertools
import json
import multiprocessing
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .dlgraph import (
    Box,
    DLVertex,
    GraphParams,
    HeightCube,
    TreeVertex,
    box_boundary,
    box_boundary_size,
    box_containing,
    box_members,
    box_size,
    canonical_box,
    cube_side,
    dl_distance,
    dl_key,
    dl_vertex,
    graph_params,
    height_cube,
    heights,
    rho,
    tree_descendants,
    tree_vertex,
)

DEFAULT_FIBER_BUDGET = 2_000_000
DEFAULT_PROBE_BUDGET = 200_000


# ---------------------------------------------------------------------------
# clones: cylinder sets of digit streams

Clone = tuple  # (level: int, digits: tuple of (index, digit) pairs)


def clone(level: int, digits=()) -> Clone:
    """Normalize a clone: sorted nonzero digits at indices <= level."""
    items = []
    seen = set()
    for i, v in digits:
        if i in seen:
            raise ValueError(f"duplicate digit index {i}")
        seen.add(i)
        if i > level:
            raise ValueError(f"digit index {i} above clone level {level}")
        if v:
            items.append((int(i), int(v)))
    return (int(level), tuple(sorted(items)))


def clone_measure(c: Clone, q: int) -> Fraction:
    return Fraction(q) ** (-c[0])


def vertex_clone(v: TreeVertex) -> Clone:
    """The clone of streams whose truncation at v.level equals v."""
    return (v.level, v.digits)


def count_vertices_in_clone(c: Clone, level: int, q: int) -> int:
    """How many level-`level` tree vertices have their zero-fill stream in c.

    The zero-fill stream of a vertex at level v carries the vertex digits
    at indices <= v and zeros above.  If the clone level u is <= v the
    clone pins the first u digits and leaves q choices for each of the
    remaining v - u, giving q**(v-u) vertices.  If u > v, membership
    forces the clone digits at indices in (v, u] to vanish; when they do,
    exactly one vertex (the truncation of the clone digits) qualifies.
    """
    u, digits = c
    if u <= level:
        return q ** (level - u)
    if any(i > level for i, _ in digits):
        return 0
    return 1


def vertices_in_clone(c: Clone, level: int, q: int) -> "list[TreeVertex]":
    """Materialize the vertices counted by count_vertices_in_clone."""
    u, digits = c
    if u > level:
        if any(i > level for i, _ in digits):
            return []
        return [tree_vertex(level, digits, q)]
    base = tuple((i, v) for i, v in digits)
    free = list(range(u + 1, level + 1))
    out = []
    for combo in itertools.product(range(q), repeat=len(free)):
        extra = tuple((i, dv) for i, dv in zip(free, combo) if dv)
        out.append(tree_vertex(level, base + extra, q))
    return out


# ---------------------------------------------------------------------------
# transducer primitives

def _apply_window(stream: dict, lo: int, hi: int, table: dict) -> dict:
    word = tuple(stream.get(i, 0) for i in range(lo, hi + 1))
    image = table[word]
    out = {i: v for i, v in stream.items() if not lo <= i <= hi}
    for off, dv in enumerate(image):
        if dv:
            out[lo + off] = dv
    return out


@dataclass(frozen=True)
class Shift:
    """Translate every digit index by m (stream index i reads input i - m).

    Scales the clone measure by q**(-m) and stream distances by the same
    factor, hence contributes q**(-m) to the measure scalar and q**|m| to
    the bilipschitz constant.
    """

    m: int

    def lam(self, q: int) -> Fraction:
        return Fraction(q) ** (-self.m)

    def bilip(self, q: int) -> int:
        return q ** abs(self.m)

    def inverse(self) -> "Shift":
        return Shift(-self.m)

    def apply_stream(self, stream: dict) -> dict:
        return {i + self.m: v for i, v in stream.items()}

    def clone_images(self, c: Clone) -> "list[Clone]":
        level, digits = c
        return [(level + self.m, tuple(sorted((i + self.m, v) for i, v in digits)))]

    def clone_preimages(self, c: Clone) -> "list[Clone]":
        return self.inverse().clone_images(c)

    def source_span(self):
        return None

    def describe(self) -> dict:
        return {"kind": "shift", "m": self.m}


@dataclass(frozen=True)
class LevelPerm:
    """Permute the digit alphabet independently at finitely many indices.

    perms is a sorted tuple of (index, table) pairs where table is a
    tuple of length q listing the image of each digit.  Measure scalar 1,
    bilipschitz constant 1.
    """

    perms: tuple

    def __post_init__(self):
        seen = set()
        for lvl, table in self.perms:
            if lvl in seen:
                raise ValueError(f"duplicate permuted index {lvl}")
            seen.add(lvl)
            if sorted(table) != list(range(len(table))):
                raise ValueError(f"table at index {lvl} is not a permutation")
        if tuple(sorted(self.perms)) != self.perms:
            raise ValueError("perms must be sorted by index")

    def lam(self, q: int) -> Fraction:
        return Fraction(1)

    def bilip(self, q: int) -> int:
        return 1

    def inverse(self) -> "LevelPerm":
        inv = []
        for lvl, table in self.perms:
            itab = [0] * len(table)
            for a, b in enumerate(table):
                itab[b] = a
            inv.append((lvl, tuple(itab)))
        return LevelPerm(tuple(inv))

    def apply_stream(self, stream: dict) -> dict:
        out = dict(stream)
        for lvl, table in self.perms:
            nv = table[out.get(lvl, 0)]
            if nv:
                out[lvl] = nv
            else:
                out.pop(lvl, None)
        return out

    def clone_images(self, c: Clone) -> "list[Clone]":
        level, digits = c
        dmap = dict(digits)
        for lvl, table in self.perms:
            if lvl <= level:
                nv = table[dmap.get(lvl, 0)]
                if nv:
                    dmap[lvl] = nv
                else:
                    dmap.pop(lvl, None)
        return [(level, tuple(sorted(dmap.items())))]

    def clone_preimages(self, c: Clone) -> "list[Clone]":
        return self.inverse().clone_images(c)

    def source_span(self):
        levels = [lvl for lvl, _ in self.perms]
        return (min(levels), max(levels))

    def describe(self) -> dict:
        return {
            "kind": "perm",
            "perms": [{"index": lvl, "table": list(t)} for lvl, t in self.perms],
        }


@dataclass(frozen=True)
class PrefixRewrite:
    """Rewrite the digit window [lo, hi] through a bijection of words.

    table maps every length-(hi - lo + 1) digit word to an image word of
    the same length; digits outside the window pass through unchanged.
    Measure scalar 1; bilipschitz constant q**(hi - lo) since a first
    difference inside the window can move anywhere else inside it.
    """

    lo: int
    hi: int
    table: tuple  # sorted tuple of (word, image) pairs covering all words

    def __post_init__(self):
        if self.hi < self.lo:
            raise ValueError("empty rewrite window")
        width = self.hi - self.lo + 1
        ins = [w for w, _ in self.table]
        outs = [w for _, w in self.table]
        if len(set(ins)) != len(ins) or sorted(set(outs)) != sorted(ins):
            raise ValueError("table is not a bijection of window words")
        for w in ins + outs:
            if len(w) != width:
                raise ValueError("table word of wrong length")
        if tuple(sorted(self.table)) != self.table:
            raise ValueError("table must be sorted by input word")

    def _q(self) -> int:
        # alphabet size is implicit: the table covers all q**width words
        width = self.hi - self.lo + 1
        n = len(self.table)
        q = round(n ** (1.0 / width))
        while q ** width < n:
            q += 1
        if q ** width != n:
            raise ValueError("table does not cover a full power alphabet")
        return q

    def lam(self, q: int) -> Fraction:
        return Fraction(1)

    def bilip(self, q: int) -> int:
        return q ** (self.hi - self.lo)

    def inverse(self) -> "PrefixRewrite":
        return PrefixRewrite(
            self.lo, self.hi, tuple(sorted((img, w) for w, img in self.table))
        )

    def apply_stream(self, stream: dict) -> dict:
        return _apply_window(stream, self.lo, self.hi, dict(self.table))

    def clone_images(self, c: Clone) -> "list[Clone]":
        level, digits = c
        q = self._q()
        lookup = dict(self.table)
        if level >= self.hi:
            dmap = dict(digits)
            word = tuple(dmap.get(i, 0) for i in range(self.lo, self.hi + 1))
            image = lookup[word]
            for off in range(self.hi - self.lo + 1):
                dmap.pop(self.lo + off, None)
            for off, dv in enumerate(image):
                if dv:
                    dmap[self.lo + off] = dv
            return [(level, tuple(sorted(dmap.items())))]
        # split into subclones at level hi, one per completion of the
        # missing digits; each rewrites to a single exact clone
        out = []
        free = list(range(level + 1, self.hi + 1))
        base = dict(digits)
        for combo in itertools.product(range(q), repeat=len(free)):
            dmap = dict(base)
            for i, dv in zip(free, combo):
                if dv:
                    dmap[i] = dv
            word = tuple(dmap.get(i, 0) for i in range(self.lo, self.hi + 1))
            image = lookup[word]
            for off in range(self.hi - self.lo + 1):
                dmap.pop(self.lo + off, None)
            for off, dv in enumerate(image):
                if dv:
                    dmap[self.lo + off] = dv
            out.append((self.hi, tuple(sorted(dmap.items()))))
        return out

    def clone_preimages(self, c: Clone) -> "list[Clone]":
        return self.inverse().clone_images(c)

    def source_span(self):
        return (self.lo, self.hi)

    def describe(self) -> dict:
        return {
            "kind": "prefix",
            "lo": self.lo,
            "hi": self.hi,
            "table": [[list(w), list(img)] for w, img in self.table],
        }


def prefix_rewrite(lo: int, hi: int, pairs) -> PrefixRewrite:
    """Build a PrefixRewrite from any iterable of (word, image) pairs."""
    table = tuple(sorted((tuple(w), tuple(img)) for w, img in pairs))
    return PrefixRewrite(lo, hi, table)


def level_perm(perms) -> LevelPerm:
    return LevelPerm(tuple(sorted((int(lvl), tuple(t)) for lvl, t in perms)))


# ---------------------------------------------------------------------------
# boundary maps: composed transducers

@dataclass(frozen=True)
class BoundaryMap:
    """A finite composition of primitives, applied left to right."""

    q: int
    prims: tuple

    def lam(self) -> Fraction:
        """Exact measure scalar: images of clones shrink by this factor."""
        out = Fraction(1)
        for p in self.prims:
            out *= p.lam(self.q)
        return out

    def bilip(self) -> int:
        """A bilipschitz constant for the stream ultrametric (not sharp)."""
        out = 1
        for p in self.prims:
            out *= p.bilip(self.q)
        return out

    def net_shift(self) -> int:
        return sum(p.m for p in self.prims if isinstance(p, Shift))

    def inverse(self) -> "BoundaryMap":
        return BoundaryMap(self.q, tuple(p.inverse() for p in reversed(self.prims)))

    def apply_stream(self, stream: dict) -> dict:
        out = dict(stream)
        for p in self.prims:
            out = p.apply_stream(out)
        return out

    def clone_images(self, c: Clone) -> "list[Clone]":
        clones = [c]
        for p in self.prims:
            clones = [c2 for c1 in clones for c2 in p.clone_images(c1)]
        return clones

    def clone_preimages(self, c: Clone) -> "list[Clone]":
        clones = [c]
        for p in reversed(self.prims):
            clones = [c2 for c1 in clones for c2 in p.clone_preimages(c1)]
        return clones

    def source_span(self):
        """Index range of the input digits that structural stages read.

        Shifts are pure translations and contribute no structure; for the
        other primitives the touched input indices are their levels pulled
        back through the shifts applied so far.  Returns None for maps
        whose behavior is index-uniform (compositions of shifts only).
        """
        lo = hi = None
        s = 0
        for p in self.prims:
            if isinstance(p, Shift):
                s += p.m
                continue
            span = p.source_span()
            a, b = span[0] - s, span[1] - s
            lo = a if lo is None else min(lo, a)
            hi = b if hi is None else max(hi, b)
        return None if lo is None else (lo, hi)

    def describe(self) -> "list[dict]":
        return [p.describe() for p in self.prims]


def boundary_map(q: int, prims=()) -> BoundaryMap:
    return BoundaryMap(q, tuple(prims))


def identity_map(q: int) -> BoundaryMap:
    return BoundaryMap(q, ())


def shift_map(q: int, m: int) -> BoundaryMap:
    """The m-fold forward shift; m=1 is the basic contraction with lam 1/q."""
    if m == 0:
        return identity_map(q)
    return BoundaryMap(q, (Shift(m),))


def compose(first: BoundaryMap, then: BoundaryMap) -> BoundaryMap:
    if first.q != then.q:
        raise ValueError("maps over different alphabets")
    return BoundaryMap(first.q, first.prims + then.prims)


def map_from_description(q: int, desc) -> BoundaryMap:
    prims = []
    for item in desc:
        kind = item["kind"]
        if kind == "shift":
            prims.append(Shift(int(item["m"])))
        elif kind == "perm":
            prims.append(
                level_perm((p["index"], tuple(p["table"])) for p in item["perms"])
            )
        elif kind == "prefix":
            prims.append(
                prefix_rewrite(
                    int(item["lo"]),
                    int(item["hi"]),
                    ((tuple(w), tuple(img)) for w, img in item["table"]),
                )
            )
        else:
            raise ValueError(f"unknown primitive kind {kind!r}")
    return BoundaryMap(q, tuple(prims))


def map_to_json(m: BoundaryMap) -> str:
    return json.dumps(m.describe(), sort_keys=True, separators=(",", ":"))


# ---------------------------------------------------------------------------
# measure linearity by exhaustive clone enumeration

@dataclass(frozen=True)
class MeasureCheck:
    constant: bool
    ratio: Optional[Fraction]
    witness: Optional[tuple]
    samples: int


def measure_linear_constant(
    m: BoundaryMap,
    depth: int,
    probe_lo: Optional[int] = None,
    budget: int = DEFAULT_PROBE_BUDGET,
) -> MeasureCheck:
    """Check that image measure / clone measure is one constant.

    Enumerates every clone at the given depth whose digits are supported
    on the probe window [probe_lo, depth] and compares the exact measure
    of its image (a finite disjoint union of clones) to its own measure.
    The window defaults to one index below the structural span of the
    map, which suffices: digits strictly below every structural read pass
    through a pure translation and cannot influence the ratio.
    """
    span = m.source_span()
    if span is not None and depth < span[1]:
        raise ValueError(f"depth {depth} below structural span {span}")
    if probe_lo is None:
        probe_lo = min(-1, span[0] - 1) if span is not None else -1
    if probe_lo > depth:
        raise ValueError("probe window is empty")
    width = depth - probe_lo + 1
    q = m.q
    if q ** width > budget:
        raise ValueError(
            f"probe window enumerates {q ** width} clones, budget {budget}"
        )
    window = list(range(probe_lo, depth + 1))
    ratio = None
    witness_clone = None
    samples = 0
    for combo in itertools.product(range(q), repeat=width):
        digits = tuple((i, dv) for i, dv in zip(window, combo) if dv)
        c = (depth, digits)
        images = m.clone_images(c)
        total = sum(clone_measure(ci, q) for ci in images)
        r = total / clone_measure(c, q)
        samples += 1
        if ratio is None:
            ratio = r
            witness_clone = c
        elif r != ratio:
            return MeasureCheck(False, None, (witness_clone, ratio, c, r), samples)
    return MeasureCheck(True, ratio, None, samples)


# ---------------------------------------------------------------------------
# section and collapse between lattice vertices and digit streams

def section(x: DLVertex) -> tuple:
    """Zero-fill section: each coordinate becomes its digit stream."""
    return tuple(dict(c.digits) for c in x.coords)


def collapse(params: GraphParams, levels: Sequence[int], streams: Sequence[dict]) -> DLVertex:
    """Truncate each stream at its level and assemble a lattice vertex."""
    if len(levels) != params.d or len(streams) != params.d:
        raise ValueError(f"need {params.d} levels and streams")
    coords = []
    for lvl, st in zip(levels, streams):
        digits = tuple(sorted((i, v) for i, v in st.items() if i <= lvl and v))
        coords.append(tree_vertex(lvl, digits, params.q))
    return dl_vertex(params, coords)


# ---------------------------------------------------------------------------
# interior maps

@dataclass(frozen=True)
class InteriorMap:
    """One boundary transducer per coordinate, acting through the section.

    Heights are preserved: coordinate i of the image is the truncation at
    the original level of the transducer applied to the zero-fill stream.
    The map need not be injective or surjective on the lattice; fibers
    are counted exactly via clone preimages.
    """

    params: GraphParams
    maps: tuple

    def __post_init__(self):
        if len(self.maps) != self.params.d:
            raise ValueError(f"need {self.params.d} coordinate maps")
        for m in self.maps:
            if m.q != self.params.q:
                raise ValueError("coordinate map alphabet differs from q")

    def lam_product(self) -> Fraction:
        out = Fraction(1)
        for m in self.maps:
            out *= m.lam()
        return out

    def bilip_max(self) -> int:
        return max(m.bilip() for m in self.maps)


def interior_map(params: GraphParams, maps) -> InteriorMap:
    return InteriorMap(params, tuple(maps))


def psi_apply(imap: InteriorMap, x: DLVertex) -> DLVertex:
    levels = heights(x)
    streams = [m.apply_stream(st) for m, st in zip(imap.maps, section(x))]
    return collapse(imap.params, levels, streams)


def preimage_count(imap: InteriorMap, x: DLVertex) -> int:
    """Exact number of lattice vertices mapping to x under psi_apply.

    The map preserves heights and acts coordinatewise, so the fiber is a
    product over coordinates: vertices y_i at level h_i whose zero-fill
    stream lands in the clone of x_i.  Those are counted clone by clone
    over the exact preimage decomposition.
    """
    total = 1
    q = imap.params.q
    for m, coord in zip(imap.maps, x.coords):
        pre = m.clone_preimages(vertex_clone(coord))
        total *= sum(count_vertices_in_clone(c, coord.level, q) for c in pre)
        if total == 0:
            return 0
    return total


def preimage_vertices(imap: InteriorMap, x: DLVertex) -> "list[DLVertex]":
    """Materialize the fiber over x (products of per-coordinate lists)."""
    q = imap.params.q
    per_coord = []
    for m, coord in zip(imap.maps, x.coords):
        pre = m.clone_preimages(vertex_clone(coord))
        found = []
        for c in pre:
            found.extend(vertices_in_clone(c, coord.level, q))
        per_coord.append(sorted(set(found), key=lambda t: (t.level, t.digits)))
    out = []
    for combo in itertools.product(*per_coord):
        out.append(dl_vertex(imap.params, combo))
    return out


def psi_eval(imap: InteriorMap, vertices) -> dict:
    """Evaluation table x -> psi(x), in input order."""
    return {x: psi_apply(imap, x) for x in vertices}


# ---------------------------------------------------------------------------
# fiber-count audit over a box

def _preimage_count_task(args):
    imap, x = args
    return preimage_count(imap, x)


def _pmap_counts(imap: InteriorMap, members, workers: int):
    if workers <= 1:
        return [preimage_count(imap, x) for x in members]
    items = [(imap, x) for x in members]
    chunk = max(1, len(items) // (workers * 4))
    with multiprocessing.Pool(workers) as pool:
        return pool.map(_preimage_count_task, items, chunksize=chunk)


@dataclass(frozen=True)
class FiberAudit:
    h: int
    box_size: int
    boundary_size: int
    r: int
    bilip: int
    lam_product: Fraction
    total_preimages: int
    lower_bound: Fraction
    upper_bound: Fraction
    bounds_ok: bool
    interior_size: int
    interior_total: int
    interior_constant: bool
    interior_value: Optional[int]


def fiber_count_audit(
    imap: InteriorMap,
    box: Box,
    r: Optional[int] = None,
    bilip: Optional[int] = None,
    workers: int = 1,
    budget: int = DEFAULT_FIBER_BUDGET,
) -> FiberAudit:
    """Two-sided test of total fiber mass over a box.

    With lam the product of the coordinate measure scalars, K a
    bilipschitz constant for the map, and r >= log_q K, the exact total
    T = sum of fiber sizes over the box S must satisfy

        (|S| - |boundary_r S|) / lam  <=  T  <=  |S| / lam + K**d |boundary_r S|

    because the map moves interior mass at most distance-r and scales
    measure by exactly lam.  All quantities here are exact integers or
    Fractions; bounds_ok records whether T landed inside.
    """
    params = imap.params
    if bilip is None:
        bilip = imap.bilip_max()
    if r is None:
        r = 0
        while params.q ** r < bilip:
            r += 1
        r = max(r, 1)
    n = box_size(params, box)
    if n > budget:
        raise ValueError(f"box has {n} members, budget {budget}")
    boundary_keys = {dl_key(v) for v in box_boundary(params, box, r)}
    members = list(box_members(params, box))
    counts = _pmap_counts(imap, members, workers)
    total = sum(counts)
    lam = imap.lam_product()
    lower = (Fraction(n) - len(boundary_keys)) / lam
    upper = Fraction(n) / lam + (bilip ** params.d) * len(boundary_keys)
    interior_counts = [
        c for v, c in zip(members, counts) if dl_key(v) not in boundary_keys
    ]
    interior_total = sum(interior_counts)
    distinct = set(interior_counts)
    return FiberAudit(
        h=cube_side(box.cube),
        box_size=n,
        boundary_size=len(boundary_keys),
        r=r,
        bilip=bilip,
        lam_product=lam,
        total_preimages=total,
        lower_bound=lower,
        upper_bound=upper,
        bounds_ok=lower <= total <= upper,
        interior_size=len(interior_counts),
        interior_total=interior_total,
        interior_constant=len(distinct) <= 1,
        interior_value=distinct.pop() if len(distinct) == 1 else None,
    )


# ---------------------------------------------------------------------------
# chain scans: additive obstruction sums over growing boxes

@dataclass(frozen=True)
class ChainRecord:
    h: int
    box_size: int
    boundary_size: int
    chain_sum: int
    ratio_boundary: Fraction
    ratio_box: Fraction


def uf_chain_scan(
    imap: InteriorMap,
    k: int,
    h_values: Sequence[int],
    r: int = 1,
    workers: int = 1,
) -> "tuple[ChainRecord, ...]":
    """Scan the deficiency sum of fibers against a target count k.

    For each side h, take the canonical box over the cube [0, h]**(d-1)
    and sum a_x = |fiber over x| - k across its members.  A map that is
    boundedly k-to-1 after a finite correction keeps |sum| / |boundary|
    bounded; a map with a genuine index obstruction shows this ratio
    growing linearly in h.  Ratios are exact Fractions.
    """
    if k < 1:
        raise ValueError("target fiber count k must be positive")
    params = imap.params
    out = []
    for h in h_values:
        cube = height_cube([(0, h)] * (params.d - 1), params.k)
        box = canonical_box(params, cube)
        members = list(box_members(params, box))
        counts = _pmap_counts(imap, members, workers)
        chain = sum(counts) - k * len(members)
        bsize = box_boundary_size(params, box, r)
        out.append(
            ChainRecord(
                h=h,
                box_size=len(members),
                boundary_size=bsize,
                chain_sum=chain,
                ratio_boundary=Fraction(chain, bsize),
                ratio_box=Fraction(chain, len(members)),
            )
        )
    return tuple(out)


# ---------------------------------------------------------------------------
# the k-to-1 tile map onto the index-k lattice

@dataclass(frozen=True)
class Tiling:
    """A cube tiling of an ambient box, kept implicit.

    region is the ambient height cube (side a multiple of h, corners
    aligned to h); each lattice point belongs to the unique tile cube
    containing it, and the tile box is reconstructed from ancestors.
    """

    params: GraphParams
    region: HeightCube
    h: int
    ambient: Box

    def tile_box(self, x: DLVertex) -> Box:
        v = rho(x)
        corners = []
        for a in v[: self.params.d - 1]:
            c = (a // self.h) * self.h
            corners.append((c, c + self.h - 1))
        cube = HeightCube(tuple(corners), 1)
        return box_containing(self.params, cube, x)


def make_tiling(params: GraphParams, region: HeightCube, h: int) -> Tiling:
    if params.k != 1:
        raise ValueError("tilings are built on the ordinary lattice (k = 1)")
    if h < 1:
        raise ValueError("tile side must be positive")
    for a, b in region.intervals:
        if a % h or (b - a + 1) % h:
            raise ValueError(
                f"region interval ({a},{b}) is not aligned to tile side {h}"
            )
    return Tiling(params, region, h, canonical_box(params, region))


def umap(tiling: Tiling, k: int, x: DLVertex) -> DLVertex:
    """Map a lattice vertex into the index-k lattice via its tile.

    Within the tile over x, the first and last coordinates are retracted
    to the tile's corner height: the q**j many (first, last) coordinate
    pairs at offset j above the corner are matched, in lexicographic
    digit order, with the q**j pairs at the corner whose last coordinate
    absorbs the offset.  Middle coordinates pass through unchanged.  With
    tile side equal to k this lands exactly k-to-1 on vertices whose
    first height is a multiple of k.
    """
    if k != tiling.h:
        raise ValueError("tile side must equal the index k")
    params = tiling.params
    box = tiling.tile_box(x)
    v = rho(x)
    corner = box.cube.intervals[0][0]
    root_first = box.roots[0]
    root_last = box.roots[-1]
    offset = v[0] - corner

    src_first = list(tree_descendants(root_first, offset, params.q))
    depth_src_last = (-sum(v)) - root_last.level
    src_last = list(tree_descendants(root_last, depth_src_last, params.q))
    tgt_last = list(tree_descendants(root_last, depth_src_last + offset, params.q))

    # lex-ordered pair lists have equal length q**(offset + depth_src_last)
    pair_index = src_first.index(x.coords[0]) * len(src_last) + src_last.index(
        x.coords[-1]
    )
    image_first = root_first
    image_last = tgt_last[pair_index]

    coords = (image_first,) + x.coords[1:-1] + (image_last,)
    return dl_vertex(graph_params(params.d, params.q, k), coords)


def umap_eval(tiling: Tiling, k: int) -> dict:
    """Evaluate the tile map over every member of the ambient box."""
    members = sorted(box_members(tiling.params, tiling.ambient), key=dl_key)
    return {x: umap(tiling, k, x) for x in members}


def umap_displacement(tiling: Tiling, k: int) -> int:
    """Max graph distance between x and its image, read in the ordinary graph."""
    params = tiling.params
    worst = 0
    for x, y in umap_eval(tiling, k).items():
        y1 = dl_vertex(params, y.coords)
        worst = max(worst, dl_distance(x, y1))
    return worst


# ---------------------------------------------------------------------------
# distortion estimates from evaluation tables

@dataclass(frozen=True)
class DistortionReport:
    pairs: int
    k_est: Fraction
    c_est: Fraction
    max_displacement: Optional[int]


def distortion(
    table: dict,
    n_pairs: int = 30,
    seed: int = 0,
    measure_displacement: bool = True,
) -> DistortionReport:
    """Estimate multiplicative and additive distortion from sampled pairs.

    Samples vertex pairs from the table domain, compares source and image
    distances, and reports the smallest K with d' <= K d and d <= K d' on
    every sampled pair with both distances positive, plus the additive
    slack C absorbing degenerate pairs.  When domain and image share
    parameters, also reports the max displacement over the whole table.
    """
    import random

    items = sorted(table.items(), key=lambda kv: dl_key(kv[0]))
    if len(items) < 2:
        raise ValueError("need at least two table entries")
    rng = random.Random(seed)
    ratios = []
    degenerate = []
    for _ in range(n_pairs):
        i, j = rng.sample(range(len(items)), 2)
        (u, fu), (v, fv) = items[i], items[j]
        ds = dl_distance(u, v)
        dt = dl_distance(fu, fv)
        if ds > 0 and dt > 0:
            ratios.append(Fraction(dt, ds))
            ratios.append(Fraction(ds, dt))
        else:
            degenerate.append((ds, dt))
    k_est = max(ratios) if ratios else Fraction(1)
    c_est = Fraction(0)
    for ds, dt in degenerate:
        c_est = max(c_est, Fraction(dt) - k_est * ds, Fraction(ds) / k_est - dt)
    max_disp = None
    if measure_displacement:
        u0, f0 = items[0]
        if u0.params == f0.params:
            max_disp = max(dl_distance(x, y) for x, y in items)
    return DistortionReport(
        pairs=n_pairs, k_est=k_est, c_est=max(c_est, Fraction(0)), max_displacement=max_disp
    )
