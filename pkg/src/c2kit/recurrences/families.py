"""Families of decompleted circulants and their c2 sequences."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import networkx as nx

from c2kit.algebra.fp import check_prime
from c2kit.engine import c2_coeff_graph, c2_direct, c2_dodgson, default_edge_order, denom_reduce, eligible
from c2kit.graph_polys import DodgsonSpec, dodgson_raw
from c2kit.graphs import Graph, decompleted_circulant, to_networkx

KINDS = ("1,2", "1,3", "1,4", "1,5", "1,6", "2,3", "2,4", "2,5", "3,4", "2k2")
ALIASES = {"zigzag": "1,2", "two_k_plus_2": "2k2", "2k+2": "2k2"}
ROUTES = ("direct", "dodgson", "coeff", "denom", "transfer", "table")


class UnsupportedRoute(ValueError):
    pass


@dataclass(frozen=True)
class FamilySpec:
    """A family and a parameter range; the parameter is n, or k for 2k2."""

    kind: str
    p: int
    lo: int
    hi: int

    def __post_init__(self) -> None:
        kind = ALIASES.get(self.kind, self.kind)
        if kind not in KINDS:
            raise ValueError(f"unknown family {self.kind!r}; choose from {', '.join(KINDS)}")
        object.__setattr__(self, "kind", kind)
        check_prime(self.p)
        if self.lo > self.hi:
            raise ValueError(f"empty range {self.lo}:{self.hi}")
        if self.lo < self.minimum:
            raise ValueError(f"{kind} starts at {self.minimum}, got {self.lo}")

    @property
    def minimum(self) -> int:
        if self.kind == "2k2":
            return 3
        j, k = self.gaps
        # smallest n giving a 4-regular circulant before decompletion
        return 2 * k + 1

    @property
    def gaps(self) -> tuple[int, int]:
        if self.kind == "2k2":
            raise ValueError("2k2 has no fixed gaps")
        j, k = self.kind.split(",")
        return int(j), int(k)

    @property
    def params(self) -> range:
        return range(self.lo, self.hi + 1)

    def graph(self, x: int) -> Graph:
        if self.kind == "2k2":
            return decompleted_circulant(2 * x + 2, 1, x)
        return decompleted_circulant(x, *self.gaps)

    def label(self) -> str:
        return "C_{2k+2}(1,k)" if self.kind == "2k2" else f"C_n({self.kind})"


# Edges "1", "2", ... of the figures, as endpoint pairs in the decompleted graph
# (vertex 0 and vertex n-2 are the two top vertices next to the removed one).
# They were pinned down by the forest expansions they must produce:
#   1,2: Psi^{1,3}_2 has parts of sizes 2,1,1 and Psi^{12,32} is a single monomial
#   1,3: Psi^{12,34} is a single forest polynomial on three pairs
#   2,3: Psi^{1,3}_2 has parts 2,1,1 and Psi^{12,32} two opposite-signed 2+2 terms
FIGURE_EDGES: dict[str, Callable[[int], list[tuple[int, int]]]] = {
    "1,2": lambda n: [(0, 1), (0, n - 2), (n - 3, n - 2)],
    "1,3": lambda n: [(0, 3), (0, n - 3), (n - 5, n - 2), (1, n - 2)],
    "2,3": lambda n: [(0, 2), (0, n - 2), (n - 4, n - 2)],
}


def figure_edges(kind: str, n: int, count: int | None = None) -> list[int]:
    """Edge ids of the figure labels 1, 2, ..., padded by the default order up to ``count``."""
    kind = ALIASES.get(kind, kind)
    g = FamilySpec(kind, 2, n, n).graph(n)
    index = {frozenset(e): i for i, e in enumerate(g.edges)}
    labelled = [index[frozenset(e)] for e in FIGURE_EDGES[kind](n)] if kind in FIGURE_EDGES else []
    if count is None:
        return labelled
    rest = [e for e in default_edge_order(g) if e not in labelled]
    return (labelled + rest)[:count]


def parse_range(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition(":")
    return int(lo), int(hi or lo)


# routes


def check_route(fam: FamilySpec, route: str) -> None:
    if route not in ROUTES:
        raise UnsupportedRoute(f"unknown route {route!r}")
    if route in ("transfer", "table", "coeff") and fam.p != 2:
        raise UnsupportedRoute(f"route {route} is implemented for p=2 only, not (family {fam.kind}, p={fam.p})")
    if route == "transfer" and fam.kind not in ("1,3", "2,3"):
        raise UnsupportedRoute(f"no transfer system for (family {fam.kind}, route transfer)")
    if route == "table" and fam.kind != "2,3":
        raise UnsupportedRoute(f"the reduction table exists only for 2,3, not (family {fam.kind}, route table)")


def _graph_route(fam: FamilySpec, route: str) -> Callable[[int], int]:
    p = fam.p

    def edges(x: int, count: int) -> list[int] | None:
        return figure_edges(fam.kind, x, count) if fam.kind in FIGURE_EDGES else None

    if route == "direct":
        return lambda x: c2_direct(fam.graph(x), p).value
    if route == "dodgson":
        return lambda x: c2_dodgson(fam.graph(x), p, 1, edges(x, 3)).value
    if route == "coeff":
        return lambda x: c2_coeff_graph(fam.graph(x), edges(x, 3)).value

    def denom(x: int) -> int:
        res = denom_reduce(fam.graph(x), p=p).c2
        if res is None:
            raise UnsupportedRoute("denominator reduction needs an eligible graph")
        return res.value

    return denom


def c2_sequence(fam: FamilySpec, route: str = "direct") -> list[tuple[int, int]]:
    """(parameter, c2) over the family's range."""
    check_route(fam, route)
    xs = list(fam.params)
    if route == "transfer":
        from c2kit.recurrences.transfer import transfer_sequence

        return transfer_sequence(fam.kind, xs)
    if route == "table":
        from c2kit.recurrences.table23 import table23_sequence

        return table23_sequence(xs)
    fn = _graph_route(fam, route)
    out = []
    for x in xs:
        if route != "direct" and not eligible(fam.graph(x)):
            raise UnsupportedRoute(f"{fam.label()} at {x} is not eligible for route {route}")
        out.append((x, fn(x)))
    return out


# closed forms


def closed_form(fam: FamilySpec) -> Callable[[int], int] | None:
    """Known value of c2 at each parameter, where one is known."""
    p = fam.p
    if fam.kind == "1,2":
        return lambda n: p - 1 if n >= 5 else None
    if fam.kind == "1,3" and p == 2:
        return lambda n: n % 2 if n >= 7 else None
    if fam.kind == "2k2" and p == 2:
        return lambda k: 0 if k >= 3 else None
    return None


def verify_closed_form(fam: FamilySpec, rows: list[tuple[int, int]]) -> list[tuple[int, int, int]]:
    """Mismatches (parameter, got, expected); raises when no closed form is known."""
    form = closed_form(fam)
    if form is None:
        raise UnsupportedRoute(f"no closed form for (family {fam.kind}, p={fam.p})")
    return [(x, v, form(x)) for x, v in rows if form(x) is not None and form(x) != v]


# mirror cancellation for C_{2k+2}(1,k)


@dataclass
class MirrorReport:
    k: int
    edges: tuple[int, int, int, int]
    mirror: dict[int, int]
    pairs: int
    fixed: int

    @property
    def c2(self) -> int:
        return self.pairs % 2


def _edge_permutation(g: Graph, vmap: dict[int, int]) -> list[int] | None:
    index = {frozenset(e): i for i, e in enumerate(g.edges)}
    perm = []
    for u, v in g.edges:
        image = index.get(frozenset((vmap[u], vmap[v])))
        if image is None:
            return None
        perm.append(image)
    return perm


def _pair_preserved(perm: list[int], edges: tuple[int, int, int, int]) -> bool:
    i, j, k, l = edges
    img = {e: perm[e] for e in edges}
    if set(img.values()) != set(edges):
        return False
    for a, b in (({i, j}, {k, l}), ({i, k}, {j, l})):
        sa, sb = {img[e] for e in a}, {img[e] for e in b}
        if {frozenset(sa), frozenset(sb)} != {frozenset(a), frozenset(b)}:
            return False
    return True


def mirror_involutions(g: Graph):
    """Edge permutations of the graph's automorphisms of order two."""
    h = to_networkx(g)
    matcher = nx.algorithms.isomorphism.GraphMatcher(h, h)
    for vmap in matcher.isomorphisms_iter():
        if all(vmap[vmap[v]] == v for v in vmap) and any(vmap[v] != v for v in vmap):
            perm = _edge_permutation(g, vmap)
            if perm is not None:
                yield vmap, perm


def mirror_cancellation(k: int) -> MirrorReport:
    """Count the complementary monomial pairs of Psi^{ij,kl} Psi^{ik,jl} on the
    decompleted C_{2k+2}(1,k) and the pairs fixed by a mirror symmetry.

    The symmetry preserves both Dodgson polynomials, so non-fixed pairs come in twos
    and c2 at p=2 has the parity of the fixed pairs.
    """
    g = decompleted_circulant(2 * k + 2, 1, k)
    order = default_edge_order(g)
    for vmap, perm in mirror_involutions(g):
        for edges in itertools.permutations(order[:8], 4):
            if _pair_preserved(perm, edges):
                return _count_mirror_pairs(g, k, edges, vmap, perm)
    raise ValueError(f"no mirror symmetry preserves a Dodgson pair for k={k}")


def _count_mirror_pairs(g: Graph, k: int, edges, vmap, perm) -> MirrorReport:
    i, j, kk, l = edges
    f = dodgson_raw(g, DodgsonSpec({i, j}, {kk, l}))
    h = dodgson_raw(g, DodgsonSpec({i, kk}, {j, l}))
    universe = 0
    for e in range(g.edge_count):
        if e not in edges:
            universe |= 1 << e
    second = {m for m, c in h.terms.items() if c % 2}

    def image(mask: int) -> int:
        out = 0
        while mask:
            low = mask & -mask
            out |= 1 << perm[low.bit_length() - 1]
            mask ^= low
        return out

    pairs = fixed = 0
    for m, c in f.terms.items():
        if c % 2 and universe ^ m in second:
            pairs += 1
            if image(m) == m:
                fixed += 1
    return MirrorReport(k, tuple(edges), dict(vmap), pairs, fixed)


__all__ = [
    "FamilySpec",
    "KINDS",
    "MirrorReport",
    "ROUTES",
    "UnsupportedRoute",
    "c2_sequence",
    "check_route",
    "FIGURE_EDGES",
    "closed_form",
    "figure_edges",
    "mirror_cancellation",
    "parse_range",
    "verify_closed_form",
]
