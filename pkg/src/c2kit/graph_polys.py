"""Kirchhoff, Dodgson and spanning-forest polynomials, the 5-invariant and denominator reduction.

Layout of the matrix M: rows/columns 0..E-1 belong to the edges (variable a_e on the
diagonal), rows/columns E.. to the vertices except the highest-numbered one, which
is the dropped incidence row.  M = [[diag(a), I^T], [-I, 0]] with I the signed
incidence matrix, so det M is the Kirchhoff polynomial.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import flint
from flint.utils.flint_exceptions import DomainError
import numpy as np

from c2kit.algebra.poly import MultilinearPoly, Poly, poly_mul
from c2kit.graphs import Graph, GraphError, SetPartition, incidence_matrix, is_connected, iter_forest_masks
from c2kit.kernels import boolean_cube_dets

MAX_SYMBOLIC_VARS = 26


@dataclass(frozen=True)
class DodgsonSpec:
    I: frozenset[int]
    J: frozenset[int]
    K: frozenset[int] = frozenset()

    def __init__(self, I: Iterable[int], J: Iterable[int], K: Iterable[int] = ()):
        object.__setattr__(self, "I", frozenset(I))
        object.__setattr__(self, "J", frozenset(J))
        object.__setattr__(self, "K", frozenset(K))
        if len(self.I) != len(self.J):
            raise GraphError(f"|I| = {len(self.I)} differs from |J| = {len(self.J)}")

    def check(self, g: Graph) -> None:
        for e in self.I | self.J | self.K:
            if not 0 <= e < g.edge_count:
                raise GraphError(f"edge {e} not in graph with {g.edge_count} edges")

    def variables(self, g: Graph) -> list[int]:
        gone = self.I | self.J | self.K
        return [e for e in range(g.edge_count) if e not in gone]


@dataclass(frozen=True)
class SignedPoly:
    """A sign-normalised polynomial with the sign that was divided out."""

    poly: MultilinearPoly
    sign: int

    @property
    def raw(self) -> MultilinearPoly:
        return self.poly if self.sign > 0 else -self.poly


def m_matrix(g: Graph) -> np.ndarray:
    """M with every edge variable set to zero."""
    E, V = g.edge_count, g.vertex_count
    inc = incidence_matrix(g, V - 1)
    size = E + V - 1
    m = np.zeros((size, size), dtype=np.int64)
    m[:E, E:] = inc.T
    m[E:, :E] = -inc
    return m


def dodgson_minor(g: Graph, spec: DodgsonSpec) -> tuple[np.ndarray, list[int], np.ndarray]:
    """Zero-variable minor M(I, J), its variable list and their (row, col) positions."""
    spec.check(g)
    m = m_matrix(g)
    rows = [r for r in range(m.shape[0]) if r not in spec.I]
    cols = [c for c in range(m.shape[1]) if c not in spec.J]
    minor = np.ascontiguousarray(m[np.ix_(rows, cols)])
    variables = spec.variables(g)
    row_of = {r: i for i, r in enumerate(rows)}
    col_of = {c: i for i, c in enumerate(cols)}
    pos = np.array([[row_of[e], col_of[e]] for e in variables], dtype=np.int64).reshape(len(variables), 2)
    return minor, variables, pos


def mobius_to_poly(values: np.ndarray, variables: Sequence[int]) -> MultilinearPoly:
    """Multilinear polynomial with the given values on the Boolean cube.

    ``values[mask]`` is the value at the 0/1 point whose set bits select variables.
    """
    n = len(variables)
    a = values.astype(np.int64).copy()
    for i in range(n):
        view = a.reshape(-1, 2, 1 << i)
        view[:, 1, :] -= view[:, 0, :]
    nz = np.nonzero(a)[0]
    terms = {}
    for idx in nz.tolist():
        mask = 0
        for i, v in enumerate(variables):
            if idx >> i & 1:
                mask |= 1 << v
        terms[mask] = int(a[idx])
    return MultilinearPoly(terms, variables)


def dodgson_raw(g: Graph, spec: DodgsonSpec) -> MultilinearPoly:
    """det M(I, J) with a_e = 0 for e in K, by interpolation on the Boolean cube."""
    minor, variables, pos = dodgson_minor(g, spec)
    if len(variables) > MAX_SYMBOLIC_VARS:
        raise GraphError(f"symbolic Dodgson polynomial in {len(variables)} variables is beyond the desk-scale limit")
    if minor.shape[0] == 0:
        return MultilinearPoly.constant(1, variables)
    vals = boolean_cube_dets(minor, pos, 0, 1 << len(variables))
    return mobius_to_poly(vals, variables)


def dodgson(g: Graph, spec: DodgsonSpec) -> SignedPoly:
    poly, sign = dodgson_raw(g, spec).normalized()
    return SignedPoly(poly, sign)


def kirchhoff(g: Graph) -> MultilinearPoly:
    """Sum over spanning trees of the product of the edge variables not in the tree."""
    if not is_connected(g):
        raise GraphError("Kirchhoff polynomial of a disconnected graph")
    if g.vertex_count == 0:
        return MultilinearPoly.constant(1)
    return forest_poly(g, SetPartition([[0]]))


def kirchhoff_det(g: Graph) -> MultilinearPoly:
    """det M by symbolic cofactor expansion (small graphs)."""
    return symbolic_det(symbolic_m_matrix(g))


def forest_poly(g: Graph, partition: SetPartition | Iterable[Iterable[int]], edge_ids: Sequence[int] | None = None) -> MultilinearPoly:
    """Spanning-forest polynomial; ``edge_ids`` renames the variables of g's edges."""
    ids = list(edge_ids) if edge_ids is not None else list(range(g.edge_count))
    full = (1 << g.edge_count) - 1
    terms: dict[int, int] = {}
    if edge_ids is None:
        for f in iter_forest_masks(g, partition):
            terms[full ^ f] = 1
    else:
        for f in iter_forest_masks(g, partition):
            comp = full ^ f
            mask = 0
            while comp:
                low = comp & -comp
                mask |= 1 << ids[low.bit_length() - 1]
                comp ^= low
            terms[mask] = 1
    return MultilinearPoly(terms, ids)


# ---------------------------------------------------------------- symbolic determinants


def symbolic_m_matrix(g: Graph) -> list[list[MultilinearPoly | int]]:
    m = m_matrix(g).tolist()
    out: list[list[MultilinearPoly | int]] = [list(row) for row in m]
    for e in range(g.edge_count):
        out[e][e] = MultilinearPoly.var(e)
    return out


def symbolic_det(mat: Sequence[Sequence[MultilinearPoly | int]]) -> MultilinearPoly:
    """Laplace expansion along the sparsest remaining row, memoised on the column set.

    Entries are integers or polynomials; every product formed multiplies polynomials
    on disjoint variables, which holds for M and its minors since each variable sits
    on a single diagonal entry.
    """
    n = len(mat)
    if n == 0:
        return MultilinearPoly.constant(1)
    nz_rows = [[c for c in range(n) if _nonzero(mat[r][c])] for r in range(n)]
    order = sorted(range(n), key=lambda r: len(nz_rows[r]))
    memo: dict[tuple[int, int], MultilinearPoly] = {}

    def rec(depth: int, cols: int) -> MultilinearPoly:
        if depth == n:
            return MultilinearPoly.constant(1)
        key = (depth, cols)
        if key in memo:
            return memo[key]
        r = order[depth]
        acc = MultilinearPoly()
        for c in nz_rows[r]:
            if not cols >> c & 1:
                continue
            # sign of the permutation: position of c among remaining columns, and of r among remaining rows
            col_pos = bin(cols & ((1 << c) - 1)).count("1")
            row_pos = sum(1 for rr in order[depth + 1:] if rr < r)
            sub = rec(depth + 1, cols & ~(1 << c))
            if not sub:
                continue
            sign = -1 if (col_pos + row_pos) % 2 else 1
            entry = mat[r][c]
            term = sub.scale(sign * entry) if isinstance(entry, int) else poly_mul(entry, sub).scale(sign)
            acc = acc + term
        memo[key] = acc
        return acc

    return rec(0, (1 << n) - 1)


def _nonzero(x: MultilinearPoly | int) -> bool:
    return bool(x)


# ---------------------------------------------------------------- Dodgson polynomials and forests


def set_partitions(items: Sequence[int]) -> Iterable[list[list[int]]]:
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for sub in set_partitions(rest):
        yield [[first]] + sub
        for i in range(len(sub)):
            yield sub[:i] + [[first] + sub[i]] + sub[i + 1:]


def _contracts_to_tree(g: Graph, partition: SetPartition, edges: Iterable[int]) -> bool:
    """Do these edges join the parts of ``partition`` into a single tree (no cycles)?"""
    where = {v: i for i, part in enumerate(partition) for v in part}
    parent = list(range(len(partition)))

    def find(x: int) -> int:
        while parent[x] != x:
            x = parent[x]
        return x

    joins = 0
    for e in edges:
        u, v = g.edges[e]
        if u not in where or v not in where:
            return False
        a, b = find(where[u]), find(where[v])
        if a == b:
            return False
        parent[a] = b
        joins += 1
    return joins == len(partition) - 1


@dataclass(frozen=True)
class ForestExpansion:
    """dodgson(spec) = sum(sign * forest_poly(G \\ (I u J u K), partition))."""

    terms: tuple[tuple[int, SetPartition], ...]
    endpoints: tuple[int, ...]
    admissible: tuple[SetPartition, ...] = field(default=())

    def partitions(self) -> list[SetPartition]:
        return [p for _, p in self.terms]


def dodgson_vs_forests(g: Graph, spec: DodgsonSpec, raw: MultilinearPoly | None = None) -> ForestExpansion:
    """Express a Dodgson polynomial through spanning-forest polynomials.

    Forests of different partitions have disjoint monomial sets, so the signs are read
    off coefficient blocks and the full reconstruction is then checked exactly.
    """
    spec.check(g)
    if raw is None:
        raw = dodgson_raw(g, spec)
    removed = spec.I | spec.J | spec.K
    active = removed - (spec.I & spec.J)
    endpoints = sorted({v for e in active for v in g.edges[e]})
    rest, kept_ids = g.delete_edges(removed)
    terms: list[tuple[int, SetPartition]] = []
    recon = MultilinearPoly()
    used: set[int] = set()
    for parts in set_partitions(endpoints):
        part = SetPartition(parts)
        phi = forest_poly(rest, part, kept_ids)
        if not phi:
            continue
        coeffs = {raw.terms.get(m, 0) for m in phi.terms}
        if len(coeffs) != 1 or next(iter(coeffs)) not in (-1, 0, 1):
            raise GraphError(f"no consistent sign for partition {part}: coefficients {sorted(coeffs)}")
        sign = coeffs.pop()
        used.update(phi.terms)
        if sign:
            terms.append((sign, part))
            recon = recon + phi.scale(sign)
    if recon.terms != raw.terms:
        raise GraphError("forest expansion does not reconstruct the Dodgson polynomial")
    admissible = tuple(
        SetPartition(parts)
        for parts in set_partitions(endpoints)
        if _contracts_to_tree(g, SetPartition(parts), (spec.J | spec.K) - spec.I)
        and _contracts_to_tree(g, SetPartition(parts), (spec.I | spec.K) - spec.J)
    )
    return ForestExpansion(tuple(terms), tuple(endpoints), admissible)


# ---------------------------------------------------------------- large polynomial arithmetic
#
# The 5-invariant and its reductions reach millions of terms on 20-edge graphs, so
# they are held as FLINT multivariate polynomials with one generator per edge.


def mpoly_context(nvars: int) -> flint.fmpz_mpoly_ctx:
    return flint.fmpz_mpoly_ctx.get(("a", max(nvars, 1)))


def to_mpoly(f: MultilinearPoly | Poly, ctx: flint.fmpz_mpoly_ctx) -> flint.fmpz_mpoly:
    n = ctx.nvars()
    if isinstance(f, MultilinearPoly):
        data = {tuple((m >> i) & 1 for i in range(n)): c for m, c in f.terms.items()}
    else:
        data = {}
        for m, c in f.terms.items():
            exps = f.exponents(m)
            data[tuple(exps.get(i, 0) for i in range(n))] = c
    return ctx.from_dict(data)


def from_mpoly(f: flint.fmpz_mpoly) -> Poly:
    return Poly.from_exponents(({i: e for i, e in enumerate(exps) if e}, int(c)) for exps, c in f.to_dict().items())


def coefficients_in(f: flint.fmpz_mpoly, v: int) -> list[flint.fmpz_mpoly]:
    """[f_0, f_1, ...] with f = sum f_k a_v^k, found by repeated differentiation."""
    out = []
    d = f
    for k in range(f.degrees()[v] + 1):
        out.append(d.subs({v: 0}) / math.factorial(k) if k > 1 else d.subs({v: 0}))
        d = d.derivative(v)
    return out


def _normalize_mpoly(f: flint.fmpz_mpoly) -> flint.fmpz_mpoly:
    if f.is_zero():
        return f
    lead = max(f.to_dict().items())[1]
    return -f if lead < 0 else f


# ---------------------------------------------------------------- 5-invariant


def five_invariant_parts(edges: Sequence[int]) -> list[tuple[int, DodgsonSpec, DodgsonSpec]]:
    """The two signed products defining the 5-invariant on edges (i, j, k, l, m)."""
    i, j, k, l, m = edges
    return [
        (1, DodgsonSpec({i, j}, {k, l}, {m}), DodgsonSpec({i, k, m}, {j, l, m})),
        (-1, DodgsonSpec({i, k}, {j, l}, {m}), DodgsonSpec({i, j, m}, {k, l, m})),
    ]


def _check_five(g: Graph, edges: Sequence[int]) -> None:
    if len(edges) != 5 or len(set(edges)) != 5:
        raise GraphError("the 5-invariant needs five distinct edges")
    for e in edges:
        if not 0 <= e < g.edge_count:
            raise GraphError(f"edge {e} not in graph with {g.edge_count} edges")


def five_invariant_mpoly(g: Graph, edges: Sequence[int]) -> flint.fmpz_mpoly:
    _check_five(g, edges)
    ctx = mpoly_context(g.edge_count)
    total = ctx.from_dict({})
    for sign, s1, s2 in five_invariant_parts(edges):
        f1 = dodgson_raw(g, s1)
        if not f1:
            continue
        f2 = dodgson_raw(g, s2)
        if f2:
            total += sign * to_mpoly(f1, ctx) * to_mpoly(f2, ctx)
    return total


def five_invariant(g: Graph, edges: Sequence[int]) -> Poly:
    """The 5-invariant with its global sign normalised (leading coefficient positive)."""
    return from_mpoly(_normalize_mpoly(five_invariant_mpoly(g, edges)))


# ---------------------------------------------------------------- denominator reduction


class ReductionLimit(RuntimeError):
    """A discriminant would exceed the configured size."""


@dataclass(frozen=True)
class ReductionState:
    """D^step with the edges still to be reduced.

    ``kind`` says how this polynomial arose: "start", "absent", "linear" or
    "quadratic".
    """

    step: int
    poly: flint.fmpz_mpoly
    remaining: tuple[int, ...]
    history: tuple[int, ...] = ()
    kind: str = "start"

    def __post_init__(self) -> None:
        degs = self.poly.degrees()
        stray = [v for v, d in enumerate(degs) if d > 0 and v not in self.remaining]
        if stray:
            raise GraphError(f"D^{self.step} depends on reduced edges {stray}")

    @classmethod
    def start(cls, g: Graph, edges: Sequence[int]) -> "ReductionState":
        D = _normalize_mpoly(five_invariant_mpoly(g, edges))
        rest = tuple(e for e in range(g.edge_count) if e not in edges)
        return cls(5, D, rest, tuple(edges))

    def as_poly(self) -> Poly:
        return from_mpoly(self.poly)

    def term_count(self) -> int:
        return len(self.poly)

    def degree_in(self, edge: int) -> int:
        return self.poly.degrees()[edge]


def probably_square(a2: flint.fmpz_mpoly, a1: flint.fmpz_mpoly, a0: flint.fmpz_mpoly, rng: random.Random) -> bool:
    """Evaluate the discriminant at random integer points; a square polynomial gives squares."""
    n = a2.context().nvars()
    for _ in range(3):
        point = [flint.fmpz(rng.randint(-(10**6), 10**6)) for _ in range(n)]
        d = int(a1(*point)) ** 2 - 4 * int(a2(*point)) * int(a0(*point))
        if d < 0 or math.isqrt(d) ** 2 != d:
            return False
    return True


def reduce_step(state: ReductionState, edge: int, *, max_disc_terms: int | None = None, seed: int = 0) -> ReductionState | None:
    """Reduce ``edge`` in D^j; None when D^j is not a product of linear factors in it.

    Writing D^j = A2 x^2 + A1 x + A0: a missing variable gives 0, the linear case
    gives A1, and the quadratic case gives the root of A1^2 - 4 A2 A0, which equals
    AD - BC up to sign once D^j = (Ax + B)(Cx + D) has been confirmed by expansion.
    """
    if edge not in state.remaining:
        raise GraphError(f"edge {edge} is not among the remaining edges")
    rest = tuple(e for e in state.remaining if e != edge)
    history = state.history + (edge,)
    coeffs = coefficients_in(state.poly, edge)
    if len(coeffs) > 3:
        return None
    if len(coeffs) == 1:
        zero = state.poly.context().from_dict({})
        return ReductionState(state.step + 1, zero, rest, history, "absent")
    if len(coeffs) == 2:
        return ReductionState(state.step + 1, _normalize_mpoly(coeffs[1]), rest, history, "linear")
    a0, a1, a2 = coeffs
    if not probably_square(a2, a1, a0, random.Random(seed)):
        return None
    if max_disc_terms is not None and max(len(a1) ** 2, len(a2) * len(a0)) > max_disc_terms:
        raise ReductionLimit(f"discriminant for edge {edge} could reach {max(len(a1) ** 2, len(a2) * len(a0))} terms")
    disc = a1 * a1 - 4 * a2 * a0
    try:
        root = disc.sqrt()
    except DomainError:
        return None
    A, B, C, D = _split_quadratic(state.poly, edge, a2, a1, root)
    if A * D - B * C not in (root, -root):
        raise AssertionError("AD - BC differs from the discriminant root")
    return ReductionState(state.step + 1, _normalize_mpoly(root), rest, history, "quadratic")


def _split_quadratic(f: flint.fmpz_mpoly, edge: int, a2: flint.fmpz_mpoly, a1: flint.fmpz_mpoly, root: flint.fmpz_mpoly):
    """(A, B, C, D) with f == (A x + B)(C x + D), checked by expansion.

    4 a2 f = (2 a2 x + a1 - s)(2 a2 x + a1 + s), so gcd(f, 2 a2 x + a1 - s) is a
    linear factor of f.
    """
    ctx = f.context()
    x = ctx.gens()[edge]
    lin = 2 * a2 * x + a1 - root
    first = f.gcd(lin)
    second, rem = divmod(f, first)
    if not rem.is_zero() or first * second != f:
        raise AssertionError("linear factor does not divide D^j")
    p1, p2 = coefficients_in(first, edge), coefficients_in(second, edge)
    if len(p1) != 2 or len(p2) != 2:
        raise AssertionError("factorisation of D^j is not into two linear factors")
    (B, A), (D, C) = p1, p2
    return A, B, C, D
