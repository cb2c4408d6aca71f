"""Point counting over F_p^N and the c2 routes built on it."""

from __future__ import annotations

import os
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import numpy as np

from c2kit.algebra.fp import check_prime, pack_rows_gf2
from c2kit.algebra.poly import MultilinearPoly, Poly
from c2kit.evaluate import mpoly_table, value_table
from c2kit.graph_polys import (
    DodgsonSpec,
    ReductionLimit,
    ReductionState,
    coefficients_in,
    probably_square,
    dodgson_minor,
    dodgson_raw,
    five_invariant_parts,
    from_mpoly,
    reduce_step,
)
from c2kit.graphs import Graph, GraphError, is_connected
from c2kit.kernels import count_zeros_detcombo, count_zeros_detcombo_gf2, count_zeros_gram_gf2, count_zeros_gram_mod_p

DEFAULT_BUDGET = 2**32
MAX_TABLE = 2**28
METHODS = ("direct", "dodgson1", "dodgson2", "five", "coeff", "denom")


class BudgetExceeded(RuntimeError):
    pass


class C2Error(RuntimeError):
    """A computation produced something the theory rules out, or was asked the impossible."""


def point_budget() -> int:
    raw = os.environ.get("C2KIT_POINT_BUDGET")
    return int(raw) if raw else DEFAULT_BUDGET


def default_workers() -> int:
    raw = os.environ.get("C2KIT_WORKERS")
    return max(1, int(raw)) if raw else max(1, os.cpu_count() or 1)


def check_budget(p: int, nvars: int, budget: int | None = None) -> None:
    budget = point_budget() if budget is None else budget
    if p**nvars > budget:
        raise BudgetExceeded(f"refusing to enumerate {p}^{nvars} = {p**nvars} points (budget {budget})")


# ---------------------------------------------------------------- evaluators


class Evaluator(Protocol):
    p: int
    nvars: int

    def count_block(self, lo: int, hi: int) -> int:
        """Zeros among the points with index in [lo, hi)."""


@dataclass
class TableEvaluator:
    """Zeros of a value table computed up front (one entry per point)."""

    p: int
    nvars: int
    values: np.ndarray

    def count_block(self, lo: int, hi: int) -> int:
        return int(np.count_nonzero(self.values[lo:hi] == 0))


@dataclass
class FunctionEvaluator:
    """Python callable on a point (tuple of residues); for small tests and oracles."""

    p: int
    nvars: int
    fn: Callable[[tuple[int, ...]], int]

    def count_block(self, lo: int, hi: int) -> int:
        count = 0
        for idx in range(lo, hi):
            point = tuple((idx // self.p**i) % self.p for i in range(self.nvars))
            if self.fn(point) % self.p == 0:
                count += 1
        return count


@dataclass
class GramEvaluator:
    """det(C diag(a) C^T) for an integer cycle matrix C; equals the Kirchhoff polynomial."""

    p: int
    cycles: np.ndarray  # (h, N)

    @property
    def nvars(self) -> int:
        return self.cycles.shape[1]

    def count_block(self, lo: int, hi: int) -> int:
        h = self.cycles.shape[0]
        if self.p == 2 and h <= 64:
            masks = np.zeros(self.nvars, dtype=np.uint64)
            for e in range(self.nvars):
                m = 0
                for r in range(h):
                    if self.cycles[r, e] % 2:
                        m |= 1 << r
                masks[e] = np.uint64(m)
            return int(count_zeros_gram_gf2(masks, h, lo, hi))
        return int(count_zeros_gram_mod_p(self.cycles.astype(np.int64), self.p, lo, hi))


@dataclass
class DetComboEvaluator:
    """sum_t sign_t * prod_k det(M_k)^terms[t, k] with the variables on matrix diagonals.

    Matrices of different sizes are padded with an identity block.
    """

    p: int
    base: np.ndarray  # (K, S, S)
    vpos: np.ndarray  # (K, N, 2), -1 where the variable is absent
    terms: np.ndarray  # (T, K)
    signs: np.ndarray  # (T,)

    @property
    def nvars(self) -> int:
        return self.vpos.shape[1]

    @classmethod
    def build(cls, p: int, minors: list[tuple[np.ndarray, list[int], np.ndarray]], variables: Sequence[int], terms, signs) -> "DetComboEvaluator":
        size = max(1, max(m.shape[0] for m, _, _ in minors))
        K, N = len(minors), len(variables)
        base = np.zeros((K, size, size), dtype=np.int64)
        vpos = np.full((K, N, 2), -1, dtype=np.int64)
        index = {v: i for i, v in enumerate(variables)}
        for k, (m, vs, pos) in enumerate(minors):
            s = m.shape[0]
            base[k, :s, :s] = m
            for r in range(s, size):
                base[k, r, r] = 1
            for v, (r, c) in zip(vs, pos):
                vpos[k, index[v]] = (r, c)
        return cls(p, base, vpos, np.asarray(terms, dtype=np.int64), np.asarray(signs, dtype=np.int64))

    def count_block(self, lo: int, hi: int) -> int:
        if self.p == 2 and self.base.shape[1] <= 64:
            rows = np.stack([pack_rows_gf2(b % 2) for b in self.base])
            return int(count_zeros_detcombo_gf2(rows, self.vpos, self.terms, self.signs, lo, hi))
        return int(count_zeros_detcombo(self.base % self.p, self.vpos, self.terms, self.signs, self.p, lo, hi))


def polynomial_evaluator(f: MultilinearPoly | Poly, p: int, variables: Sequence[int] | None = None) -> TableEvaluator:
    if variables is None:
        variables = sorted(f.universe) if isinstance(f, MultilinearPoly) else f.variables()
    variables = list(variables)
    _check_table(p, len(variables))
    return TableEvaluator(p, len(variables), value_table(f, variables, p))


def _check_table(p: int, nvars: int) -> None:
    check_budget(p, nvars)
    if p**nvars > MAX_TABLE:
        raise BudgetExceeded(f"value table of {p}^{nvars} points exceeds the in-memory limit {MAX_TABLE}")


def count_points(
    f: Evaluator | MultilinearPoly | Poly,
    p: int | None = None,
    *,
    workers: int | None = None,
    budget: int | None = None,
) -> int:
    """Exact number of zeros over F_p^N.

    The index space is split into p^t aligned blocks (p^t >= workers) by fixing the
    t most significant variables; block counts are summed exactly, so the total never
    depends on the worker count.
    """
    if isinstance(f, (MultilinearPoly, Poly)):
        if p is None:
            raise ValueError("a prime is needed to count zeros of a polynomial")
        f = polynomial_evaluator(f, check_prime(p))
    elif p is not None and p != f.p:
        raise ValueError(f"evaluator works over F_{f.p}, not F_{p}")
    p, n = f.p, f.nvars
    check_budget(p, n, budget)
    workers = default_workers() if workers is None else max(1, int(workers))
    t = 0
    while p**t < workers and t < n:
        t += 1
    size = p ** (n - t)
    blocks = [(b * size, (b + 1) * size) for b in range(p**t)]
    if workers == 1 or len(blocks) == 1:
        counts = [f.count_block(lo, hi) for lo, hi in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(lambda b: f.count_block(*b), blocks))
    return sum(counts)


# ---------------------------------------------------------------- results


@dataclass
class C2Result:
    value: int
    p: int
    method: str
    graph: str
    edges: tuple[int, ...] | None = None
    elapsed: float = 0.0
    count: int | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if not 0 <= self.value < self.p:
            raise ValueError("c2 residue out of range")

    def to_record(self, meta: bool = True) -> dict:
        rec = {
            "graph": self.graph,
            "p": self.p,
            "method": self.method,
            "value": self.value,
            "edges": list(self.edges) if self.edges is not None else None,
        }
        rec.update(self.extra)
        if meta:
            rec["elapsed_ms"] = round(self.elapsed * 1000, 3)
            rec["count"] = self.count
        return rec


def describe(g: Graph) -> str:
    return f"graph:V={g.vertex_count},E={g.edge_count}"


# ---------------------------------------------------------------- direct route


def cycle_matrix(g: Graph) -> np.ndarray:
    """Signed fundamental cycles of a BFS spanning tree, one row per non-tree edge."""
    adj: dict[int, list[tuple[int, int]]] = {v: [] for v in range(g.vertex_count)}
    for e, (u, v) in enumerate(g.edges):
        adj[u].append((e, v))
        adj[v].append((e, u))
    parent: dict[int, tuple[int, int] | None] = {0: None}  # vertex -> (edge, parent vertex)
    depth = {0: 0}
    queue = [0]
    for v in queue:
        for e, w in adj[v]:
            if w not in parent:
                parent[w] = (e, v)
                depth[w] = depth[v] + 1
                queue.append(w)
    tree = {pe[0] for pe in parent.values() if pe is not None}
    rows = []
    for e, (u, v) in enumerate(g.edges):
        if e in tree:
            continue
        row = np.zeros(g.edge_count, dtype=np.int64)
        row[e] = 1
        # walk u -> v through the tree; traversing edge (a, b) from a to b counts +1
        a, b = v, u
        path_a, path_b = [], []
        while a != b:
            if depth[a] >= depth[b]:
                pe, pa = parent[a]  # type: ignore[misc]
                path_a.append((pe, a, pa))
                a = pa
            else:
                pe, pb = parent[b]  # type: ignore[misc]
                path_b.append((pe, pb, b))
                b = pb
        # cycle: tail u -> head v along e, then v back up to the meeting point, then down to u
        for pe, x, y in path_a + path_b[::-1]:
            tail, head = g.edges[pe]
            row[pe] += 1 if (tail, head) == (x, y) else -1
        rows.append(row)
    return np.array(rows, dtype=np.int64).reshape(len(rows), g.edge_count)


def kirchhoff_count(g: Graph, p: int, *, workers: int | None = None, budget: int | None = None) -> int:
    """[Psi_G]_p by evaluating the Kirchhoff determinant at every point."""
    p = check_prime(p)
    if not is_connected(g):
        raise GraphError("point count of a disconnected graph's Kirchhoff polynomial")
    check_budget(p, g.edge_count, budget)
    cycles = cycle_matrix(g)
    if cycles.shape[0] == 0:
        return 0  # Psi = 1 has no zeros
    return count_points(GramEvaluator(p, cycles), workers=workers, budget=budget)


def c2_direct(g: Graph, p: int, *, workers: int | None = None, budget: int | None = None) -> C2Result:
    t0 = time.perf_counter()
    p = check_prime(p)
    if g.vertex_count < 3:
        raise C2Error("c2 needs at least three vertices")
    count = kirchhoff_count(g, p, workers=workers, budget=budget)
    if count % (p * p):
        raise C2Error(f"[Psi]_{p} = {count} is not divisible by {p * p}")
    return C2Result((count // (p * p)) % p, p, "direct", describe(g), None, time.perf_counter() - t0, count)


# ---------------------------------------------------------------- Dodgson routes


def eligible(g: Graph) -> bool:
    return 2 + g.edge_count <= 2 * g.vertex_count


def default_edge_order(g: Graph) -> list[int]:
    """Edges sorted by their larger, then smaller endpoint (sweeping the vertex order)."""
    return sorted(range(g.edge_count), key=lambda e: (max(g.edges[e]), min(g.edges[e]), e))


VARIANT_EDGES = {1: 3, 2: 4, 3: 5}


def dodgson_factors(variant: int, edges: Sequence[int]) -> list[tuple[int, list[DodgsonSpec]]]:
    """Signed products whose sum is the polynomial counted by each variant."""
    if variant == 1:
        i, j, k = edges
        return [(1, [DodgsonSpec({i}, {j}, {k}), DodgsonSpec({i, k}, {j, k})])]
    if variant == 2:
        i, j, k, l = edges
        return [(1, [DodgsonSpec({i, j}, {k, l}), DodgsonSpec({i, k}, {j, l})])]
    if variant == 3:
        return [(s, [a, b]) for s, a, b in five_invariant_parts(edges)]
    raise ValueError(f"variant must be 1, 2 or 3 (got {variant})")


def _check_edges(g: Graph, edges: Sequence[int], count: int) -> tuple[int, ...]:
    edges = tuple(int(e) for e in edges)
    if len(edges) != count or len(set(edges)) != count:
        raise GraphError(f"need {count} distinct edges, got {edges}")
    for e in edges:
        if not 0 <= e < g.edge_count:
            raise GraphError(f"edge {e} not in graph with {g.edge_count} edges")
    return edges


def c2_dodgson(
    g: Graph,
    p: int,
    variant: int,
    edges: Sequence[int] | None = None,
    *,
    workers: int | None = None,
    budget: int | None = None,
) -> C2Result:
    t0 = time.perf_counter()
    p = check_prime(p)
    if variant not in VARIANT_EDGES:
        raise ValueError(f"variant must be 1, 2 or 3 (got {variant})")
    if not eligible(g):
        raise C2Error(f"2 + E = {2 + g.edge_count} exceeds 2V = {2 * g.vertex_count}")
    k = VARIANT_EDGES[variant]
    edges = _check_edges(g, default_edge_order(g)[:k] if edges is None else edges, k)
    variables = [e for e in range(g.edge_count) if e not in edges]
    check_budget(p, len(variables), budget)
    products = dodgson_factors(variant, edges)
    width = sum(len(specs) for _, specs in products)
    minors, terms, signs = [], [], []
    for sign, specs in products:
        row = [0] * width
        for spec in specs:
            row[len(minors)] = 1
            minors.append(dodgson_minor(g, spec))
        terms.append(row)
        signs.append(sign)
    evaluator = DetComboEvaluator.build(p, minors, variables, terms, signs)
    count = count_points(evaluator, workers=workers, budget=budget)
    value = count % p if variant == 2 else (-count) % p
    method = {1: "dodgson1", 2: "dodgson2", 3: "five"}[variant]
    return C2Result(value, p, method, describe(g), edges, time.perf_counter() - t0, count)


# ---------------------------------------------------------------- coefficient lemma


def c2_coeff_p2(f: MultilinearPoly, g: MultilinearPoly) -> int:
    """Parity of the coefficient of the full monomial in f*g.

    The universe is the union of both universes; the lemma needs the total degree
    of f*g to equal its size.
    """
    universe = f.universe | g.universe
    full = 0
    for v in universe:
        full |= 1 << v
    if not f or not g:
        return 0
    degree = f.degree() + g.degree()
    if degree != len(universe):
        raise C2Error(f"degree {degree} differs from the number of variables {len(universe)}")
    gterms = g.terms
    count = 0
    for m, c in f.terms.items():
        if m & ~full:
            continue
        other = gterms.get(full ^ m)
        if other:
            count += c * other
    return count % 2


def coefficient_lemma_oracle(f: Poly, variables: Sequence[int], p: int) -> int:
    """Coefficient of prod x_i^(p-1) in f^(p-1), mod p, by exact expansion (tiny inputs only)."""
    p = check_prime(p)
    power = Poly.constant(1)
    for _ in range(p - 1):
        power = power * f
    target = Poly.from_exponents([({v: p - 1 for v in variables}, 1)])
    (mono,) = target.terms
    return power.terms.get(mono, 0) % p


def c2_coeff_graph(g: Graph, edges: Sequence[int] | None = None) -> C2Result:
    """c2 at p = 2 from the full-monomial coefficient of the variant (1) product."""
    t0 = time.perf_counter()
    if not eligible(g):
        raise C2Error(f"2 + E = {2 + g.edge_count} exceeds 2V = {2 * g.vertex_count}")
    edges = _check_edges(g, default_edge_order(g)[:3] if edges is None else edges, 3)
    (_, (s1, s2)), = dodgson_factors(1, edges)
    value = c2_coeff_p2(dodgson_raw(g, s1), dodgson_raw(g, s2))
    return C2Result(value, 2, "coeff", describe(g), edges, time.perf_counter() - t0)


# ---------------------------------------------------------------- denominator reduction


@dataclass
class DenomResult:
    state: ReductionState
    stop: str  # "factored to end" | "cannot be factored" | "zero" | "size limit"
    trace: list[tuple[int, int | None, str, int]]  # (j, edge reduced to reach D^j, kind, terms)
    c2: C2Result | None

    @property
    def index(self) -> int:
        return self.state.step

    @property
    def final(self) -> Poly:
        return from_mpoly(self.state.poly)


# In automatic mode a quadratic step whose discriminant could exceed this many terms
# ends the chain instead; counting the current D^j is far cheaper than squaring it.
AUTO_DISC_LIMIT = 10**7


def _auto_next(state: ReductionState, order: Sequence[int], max_disc_terms: int | None) -> ReductionState | None:
    """Next reduction in an automatic order: a vanishing variable, else a linear one,
    else the factorable quadratic one with the smallest linear coefficient."""
    degs = state.poly.degrees()
    rank = {e: i for i, e in enumerate(order)}
    remaining = sorted(state.remaining, key=rank.__getitem__)
    for e in remaining:
        if degs[e] == 0:
            return reduce_step(state, e)
    for e in remaining:
        if degs[e] == 1:
            return reduce_step(state, e)
    scored = []
    for e in remaining:
        if degs[e] == 2:
            a0, a1, a2 = coefficients_in(state.poly, e)
            if probably_square(a2, a1, a0, random.Random(e)):
                scored.append((len(a1), rank[e], e))
    for _, _, e in sorted(scored):
        nxt = reduce_step(state, e, max_disc_terms=max_disc_terms)
        if nxt is not None:
            return nxt
    return None


def denom_reduce(
    g: Graph,
    edge_order: Sequence[int] | None = None,
    p: int = 2,
    *,
    max_disc_terms: int | None = None,
    workers: int | None = None,
    budget: int | None = None,
) -> DenomResult:
    """Reduce from the 5-invariant of the first five edges.

    With an explicit ``edge_order`` the edges are reduced strictly in that order;
    otherwise the first five edges of ``default_edge_order`` start the chain and
    later edges are picked automatically.  Reduction stops with one variable left,
    since the count identity needs at least one free variable after each step.
    """
    t0 = time.perf_counter()
    p = check_prime(p)
    auto = edge_order is None
    order = default_edge_order(g) if auto else [int(e) for e in edge_order]  # type: ignore[union-attr]
    if len(order) < 5:
        raise GraphError("denominator reduction needs at least five edges")
    if len(set(order)) != len(order) or any(not 0 <= e < g.edge_count for e in order):
        raise GraphError(f"edge order {order} is not a list of distinct edges")
    first = order[:5]
    state = ReductionState.start(g, first)
    trace: list[tuple[int, int | None, str, int]] = [(5, None, "start", state.term_count())]
    queue = list(order[5:])
    stop = "factored to end"
    while True:
        if state.poly.is_zero():
            stop = "zero"
            break
        if len(state.remaining) <= 1:
            break
        try:
            if auto:
                nxt = _auto_next(state, order, AUTO_DISC_LIMIT if max_disc_terms is None else max_disc_terms)
            else:
                if not queue:
                    stop = "order exhausted"
                    break
                nxt = reduce_step(state, queue.pop(0), max_disc_terms=max_disc_terms)
        except ReductionLimit:
            stop = "size limit"
            break
        if nxt is None:
            stop = "cannot be factored"
            break
        state = nxt
        trace.append((state.step, state.history[-1], state.kind, state.term_count()))
    c2 = None
    if eligible(g):
        variables = list(state.remaining)
        _check_table(p, len(variables))
        count = count_points(TableEvaluator(p, len(variables), mpoly_table(state.poly, variables, p)), workers=workers, budget=budget)
        value = (-count if state.step % 2 else count) % p
        c2 = C2Result(value, p, "denom", describe(g), tuple(state.history), time.perf_counter() - t0, count, {"index": state.step, "stop": stop})
    return DenomResult(state, stop, trace, c2)


def c2_all(g: Graph, p: int, **kw) -> list[C2Result]:
    """Every route that applies to g at p."""
    out = [c2_direct(g, p, **kw)]
    if eligible(g) and g.edge_count >= 5:
        for variant in (1, 2, 3):
            out.append(c2_dodgson(g, p, variant, **kw))
        if p == 2:
            out.append(c2_coeff_graph(g))
        res = denom_reduce(g, p=p, **kw).c2
        if res is not None:
            out.append(res)
    return out


__all__ = [
    "BudgetExceeded",
    "C2Error",
    "C2Result",
    "DenomResult",
    "FunctionEvaluator",
    "GramEvaluator",
    "TableEvaluator",
    "c2_all",
    "c2_coeff_graph",
    "c2_coeff_p2",
    "c2_direct",
    "c2_dodgson",
    "coefficient_lemma_oracle",
    "count_points",
    "cycle_matrix",
    "default_edge_order",
    "denom_reduce",
    "eligible",
    "kirchhoff_count",
    "polynomial_evaluator",
]
