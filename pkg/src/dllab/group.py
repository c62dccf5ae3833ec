"""Higher-rank lamplighter groups acting on Diestel-Leader graphs.

Elements are affine maps x -> A x + P where A is a monomial in the units
(t + l_1), ..., (t + l_{d-1}) of the localized ring and P is a ring element;
the pair (exponent vector of A, P) is a complete normal form. The group is
generated by the d(d-1)q affine generators whose images under the height
correspondence are exactly the neighbors of the base vertex, making the
Cayley graph isomorphic to DL_d(q).

The correspondence sends an element to one tree vertex per place: place
i < d tracks the expansion digits of P in s = t + l_i strictly below the
cutoff exponent exps_i, and the place at infinity tracks digits of P in
u = 1/t up to exponent -sum(exps). The cutoff offsets are fixed module
constants chosen so that every generator move is a single graph edge.

The index-k subgroup is the kernel of the first exponent mod k. Its
generating set mirrors the ambient one: k-step products along the first
place, mixed products trading first-place steps against the other places,
and all generators that avoid the first place.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Optional, Sequence

from .algebra import (
    RationalElement,
    RingParams,
    expand_local,
    rat_add,
    rat_const,
    rat_neg,
    rat_scale_unit,
    rat_zero,
    rational,
    valuation,
)
from .dlgraph import (
    BudgetError,
    DLVertex,
    ball,
    base_vertex,
    dl_adjacent,
    dl_key,
    dl_neighbors,
    dl_vertex,
    graph_params,
    tree_vertex,
)

DEFAULT_ELEMENT_BUDGET = 200_000

# Per-place offset between tree digit indices and expansion exponents: the
# digit at tree index j is the expansion digit at exponent j + offset. The
# finite places store exponents strictly below the height (offset -1); the
# place at infinity stores them up to the height (offset 0). These values
# make each generator move a single edge; the validation harness checks
# that on whole balls.
def correspondence_cutoffs(d: int) -> "tuple[int, ...]":
    return (-1,) * (d - 1) + (0,)


@dataclass(frozen=True, slots=True)
class GroupElement:
    """Normal form (exps, P) for the affine map x -> (prod units^exps) x + P."""

    params: RingParams
    exps: tuple
    P: RationalElement


def identity(params: RingParams) -> GroupElement:
    return GroupElement(params, (0,) * (params.d - 1), rat_zero(params))


def element_key(g: GroupElement) -> str:
    return f"{g.exps}|{g.P.num}|{g.P.den}"


def _scale_by_monomial(P: RationalElement, exps: Sequence[int]) -> RationalElement:
    for place, e in enumerate(exps, start=1):
        if e:
            P = rat_scale_unit(P, place, e)
    return P


def multiply(g: GroupElement, h: GroupElement) -> GroupElement:
    if g.params != h.params:
        raise ValueError("elements live in different groups")
    exps = tuple(a + b for a, b in zip(g.exps, h.exps))
    return GroupElement(g.params, exps, rat_add(g.P, _scale_by_monomial(h.P, g.exps)))


def invert(g: GroupElement) -> GroupElement:
    exps = tuple(-a for a in g.exps)
    return GroupElement(g.params, exps, rat_neg(_scale_by_monomial(g.P, exps)))


def gen_first(params: RingParams, place: int, b: int) -> GroupElement:
    """Affine generator (t + l_place, b)."""
    if not 1 <= place <= params.d - 1:
        raise ValueError(f"place must be in 1..{params.d - 1}")
    exps = tuple(1 if t == place - 1 else 0 for t in range(params.d - 1))
    return GroupElement(params, exps, rat_const(params, b))


def gen_ratio(params: RingParams, i: int, j: int, b: int) -> GroupElement:
    """Affine generator ((t + l_i)/(t + l_j), -b/(t + l_j)); i != j."""
    if i == j or not (1 <= i <= params.d - 1 and 1 <= j <= params.d - 1):
        raise ValueError("need two distinct places")
    exps = tuple(
        1 if t == i - 1 else (-1 if t == j - 1 else 0) for t in range(params.d - 1)
    )
    den = tuple(1 if t == j - 1 else 0 for t in range(params.d - 1))
    return GroupElement(params, exps, rational(params, ((-b) % params.q,), den))


def generators(params: RingParams) -> "tuple[GroupElement, ...]":
    """The standard generating set; size d(d-1)q, closed under inversion."""
    out = {}

    def add(el: GroupElement) -> None:
        out.setdefault(element_key(el), el)

    for place in range(1, params.d):
        for b in range(params.q):
            g = gen_first(params, place, b)
            add(g)
            add(invert(g))
    for i in range(1, params.d):
        for j in range(1, params.d):
            if i != j:
                for b in range(params.q):
                    add(gen_ratio(params, i, j, b))
    gens = tuple(out[k] for k in sorted(out))
    expected = params.d * (params.d - 1) * params.q
    if len(gens) != expected:
        raise AssertionError(f"generator count {len(gens)} != {expected}")
    return gens


# ---------------------------------------------------------------------------
# balls in the word metric


@dataclass(frozen=True)
class CayleyBall:
    params: RingParams
    radius: int
    gens: tuple
    elements: tuple
    keys: tuple
    depths: tuple

    def index_of(self, key: str) -> int:
        import bisect

        i = bisect.bisect_left(self.keys, key)
        if i < len(self.keys) and self.keys[i] == key:
            return i
        raise KeyError(key)


def cayley_ball(
    params: RingParams,
    radius: int,
    gens: Optional[Sequence[GroupElement]] = None,
    budget: int = DEFAULT_ELEMENT_BUDGET,
) -> CayleyBall:
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    gens = tuple(gens) if gens is not None else generators(params)
    start = identity(params)
    depth_by_key = {element_key(start): 0}
    by_key = {element_key(start): start}
    frontier = [start]
    for depth in range(1, radius + 1):
        nxt = []
        for g in frontier:
            for s in gens:
                h = multiply(g, s)
                kh = element_key(h)
                if kh not in depth_by_key:
                    depth_by_key[kh] = depth
                    by_key[kh] = h
                    nxt.append(h)
                    if len(by_key) > budget:
                        raise BudgetError(
                            f"ball of radius {radius} exceeds budget {budget}"
                        )
        frontier = nxt
    keys = tuple(sorted(by_key))
    return CayleyBall(
        params=params,
        radius=radius,
        gens=gens,
        elements=tuple(by_key[k] for k in keys),
        keys=keys,
        depths=tuple(depth_by_key[k] for k in keys),
    )


def cayley_sphere_sizes(cb: CayleyBall) -> "tuple[int, ...]":
    out = [0] * (cb.radius + 1)
    for dep in cb.depths:
        out[dep] += 1
    return tuple(out)


# ---------------------------------------------------------------------------
# correspondence with the graph


def correspond(params: RingParams, g: GroupElement) -> DLVertex:
    """Image of a group element in DL_d(q) under the digit correspondence."""
    gp = graph_params(params.d, params.q, 1)
    cut = correspondence_cutoffs(params.d)
    levels = g.exps + (-sum(g.exps),)
    coords = []
    for place in range(1, params.d + 1):
        lvl = levels[place - 1]
        hi = lvl + cut[place - 1]
        digits = []
        if not g.P.is_zero():
            lo = valuation(g.P, place)
            if lo <= hi:
                w = expand_local(g.P, place, lo, hi)
                digits = [
                    (e - cut[place - 1], val)
                    for e, val in zip(range(lo, hi + 1), w.digits)
                    if val
                ]
        coords.append(tree_vertex(lvl, digits, q=params.q))
    return dl_vertex(gp, coords)


@dataclass(frozen=True)
class CorrespondenceReport:
    params: RingParams
    radius: int
    ok: bool
    sphere_group: tuple
    sphere_graph: tuple
    interior_degree: int
    failures: tuple


def validate_correspondence(
    params: RingParams, radius: int, budget: int = DEFAULT_ELEMENT_BUDGET
) -> CorrespondenceReport:
    """Check the ball of the given radius maps isomorphically onto the graph ball.

    Verifies injectivity, containment with matching word length, that every
    generator move lands on a graph edge, and that interior elements realize
    the full graph degree d(d-1)q bijectively.
    """
    cb = cayley_ball(params, radius, budget=budget)
    gp = graph_params(params.d, params.q, 1)
    gb = ball(base_vertex(gp), radius, budget=budget)
    failures = []

    images = {}
    image_keys = {}
    for key, el, dep in zip(cb.keys, cb.elements, cb.depths):
        v = correspond(params, el)
        kv = dl_key(v)
        if kv in image_keys:
            failures.append(f"not injective: {key} and {image_keys[kv]} map to {kv}")
            continue
        image_keys[kv] = key
        images[key] = v
        try:
            idx = gb.index_of(kv)
        except KeyError:
            failures.append(f"image of {key} outside the radius-{radius} ball: {kv}")
            continue
        if gb.depths[idx] != dep:
            failures.append(
                f"word length {dep} versus graph distance {gb.depths[idx]} for {key}"
            )

    for key, el, dep in zip(cb.keys, cb.elements, cb.depths):
        if key not in images:
            continue
        img = images[key]
        moved = {}
        for s in cb.gens:
            h = multiply(el, s)
            kh = element_key(h)
            try:
                cb.index_of(kh)
            except KeyError:
                continue  # product leaves the ball; nothing to compare
            if kh not in images:
                continue
            target = images[kh]
            if not dl_adjacent(img, target):
                failures.append(f"edge {key} -> {kh} not preserved")
            moved[dl_key(target)] = kh
        if dep <= radius - 1:
            nbr_keys = {dl_key(w) for w in dl_neighbors(img)}
            if set(moved) != nbr_keys:
                failures.append(f"interior element {key} misses graph neighbors")

    return CorrespondenceReport(
        params=params,
        radius=radius,
        ok=not failures,
        sphere_group=cayley_sphere_sizes(cb),
        sphere_graph=tuple(
            sum(1 for dep in gb.depths if dep == r) for r in range(radius + 1)
        ),
        interior_degree=params.d * (params.d - 1) * params.q,
        failures=tuple(failures[:20]),
    )


# ---------------------------------------------------------------------------
# the index-k subgroup


def subgroup_membership(g: GroupElement, k: int) -> bool:
    """Whether the first exponent is divisible by k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return g.exps[0] % k == 0


def coset_index(g: GroupElement, k: int) -> int:
    if k < 1:
        raise ValueError("k must be >= 1")
    return g.exps[0] % k


def subgroup_generators(params: RingParams, k: int) -> "tuple[GroupElement, ...]":
    """Generators of the index-k subgroup, closed under inversion.

    Three families: k-fold products of first-place generators; products of
    k1 ratio generators (first place against a later one) followed by k - k1
    first-place generators; and every generator not involving the first
    place at all.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == 1:
        return generators(params)
    d, q = params.d, params.q
    out = {}

    def add(el: GroupElement) -> None:
        out.setdefault(element_key(el), el)
        inv = invert(el)
        out.setdefault(element_key(inv), inv)

    for bs in product(range(q), repeat=k):
        el = identity(params)
        for b in bs:
            el = multiply(el, gen_first(params, 1, b))
        add(el)
    for k1 in range(1, k + 1):
        k2 = k - k1
        for js in product(range(2, d), repeat=k1):
            for bs1 in product(range(q), repeat=k1):
                for bs2 in product(range(q), repeat=k2):
                    el = identity(params)
                    for j, b in zip(js, bs1):
                        el = multiply(el, gen_ratio(params, 1, j, b))
                    for b in bs2:
                        el = multiply(el, gen_first(params, 1, b))
                    add(el)
    for i in range(2, d):
        for b in range(q):
            add(gen_first(params, i, b))
    for i in range(2, d):
        for j in range(2, d):
            if i != j:
                for b in range(q):
                    add(gen_ratio(params, i, j, b))
    gens = tuple(out[kk] for kk in sorted(out))
    for el in gens:
        if not subgroup_membership(el, k):
            raise AssertionError("subgroup generator fails membership")
    return gens


def subgroup_ball(
    params: RingParams, k: int, depth: int, budget: int = DEFAULT_ELEMENT_BUDGET
) -> CayleyBall:
    """Ball in the subgroup word metric (each letter is an ambient k-step)."""
    return cayley_ball(params, depth, gens=subgroup_generators(params, k), budget=budget)
