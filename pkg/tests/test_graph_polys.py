import itertools
import random

import pytest
from conftest import FOREST_EXAMPLE, FOREST_EXAMPLE_PARTS, K4, SQUARE, TRIANGLE, letters, random_connected_graph, small_circulants

from c2kit.algebra import MultilinearPoly, Poly
from c2kit.engine import c2_direct, count_points, default_edge_order, dodgson_factors, polynomial_evaluator
from c2kit.graph_polys import (
    DodgsonSpec,
    ReductionState,
    dodgson,
    dodgson_raw,
    dodgson_vs_forests,
    five_invariant,
    five_invariant_parts,
    forest_poly,
    kirchhoff,
    kirchhoff_det,
    mpoly_context,
    reduce_step,
    to_mpoly,
)
from c2kit.graphs import Graph, GraphError, decompleted_circulant, is_connected


def contract(g: Graph, e: int) -> tuple[Graph, list[int], int]:
    """G/e with loops dropped, the old id of each surviving edge, and the loop mask.

    A loop lies in no spanning tree, so its variable multiplies every monomial.
    """
    u, v = sorted(g.edges[e])

    def image(x: int) -> int:
        x = u if x == v else x
        return x - 1 if x > v else x

    kept, edges, loops = [], [], 0
    for i, (a, b) in enumerate(g.edges):
        a, b = image(a), image(b)
        if i == e:
            continue
        if a == b:
            loops |= 1 << i
        else:
            kept.append(i)
            edges.append((a, b))
    return Graph(g.vertex_count - 1, tuple(edges)), kept, loops


def renamed(poly: MultilinearPoly, ids: list[int], universe) -> MultilinearPoly:
    terms = {}
    for mask, c in poly.terms.items():
        out = 0
        for i, old in enumerate(ids):
            if mask >> i & 1:
                out |= 1 << old
        terms[out] = c
    return MultilinearPoly(terms, universe)


# the first product of the 5-invariant vanishes on these edges
DEGENERATE = (Graph(5, ((2, 3), (1, 2), (2, 4), (0, 4), (0, 2), (4, 1), (0, 1))), (1, 2, 3, 4, 5))


def cd_graphs():
    rnd = random.Random(7)
    out = [TRIANGLE, SQUARE, K4] + [g for _, g in small_circulants(12)]
    for _ in range(8):
        out.append(random_connected_graph(rnd, rnd.randint(4, 7), rnd.randint(6, 12)))
    return out


# Kirchhoff


def test_kirchhoff_examples():
    assert letters(kirchhoff(TRIANGLE)) == {"a", "b", "c"}
    assert letters(kirchhoff(SQUARE)) == {"a", "b", "c", "d"}
    psi = kirchhoff(K4)
    assert len(psi) == 16 and psi.degrees() == {3}
    assert set(psi.terms.values()) == {1}


def test_kirchhoff_disconnected():
    with pytest.raises(GraphError):
        kirchhoff(Graph(4, ((0, 1), (2, 3))))


def test_kirchhoff_matches_determinant(rng):
    graphs = [TRIANGLE, SQUARE, K4, decompleted_circulant(7, 1, 2)]
    graphs += [random_connected_graph(rng, rng.randint(3, 6), rng.randint(4, 10)) for _ in range(12)]
    for g in graphs:
        assert g.edge_count <= 10
        assert kirchhoff_det(g) == kirchhoff(g)


# Dodgson and forest polynomials


def test_dodgson_triangle():
    assert dodgson(TRIANGLE, DodgsonSpec({0}, {0})).poly == MultilinearPoly.constant(1, [1, 2])
    assert letters(dodgson(TRIANGLE, DodgsonSpec((), (), {0})).poly) == {"b", "c"}


def test_dodgson_spec_validation():
    with pytest.raises(GraphError):
        DodgsonSpec({0, 1}, {2})
    with pytest.raises(GraphError):
        dodgson(TRIANGLE, DodgsonSpec({5}, {0}))


def test_dodgson_sign_metadata():
    g = decompleted_circulant(7, 1, 3)
    for spec in (DodgsonSpec({0}, {1}, {2}), DodgsonSpec({0, 1}, {2, 3})):
        sp = dodgson(g, spec)
        assert sp.sign in (1, -1)
        assert sp.raw == dodgson_raw(g, spec)
        assert sp.poly.normalized() == (sp.poly, 1)


def test_forest_example():
    phi = forest_poly(FOREST_EXAMPLE, FOREST_EXAMPLE_PARTS)
    # b(de+df+ef) + e(ab+ac+bc)
    assert letters(phi) == {"bde", "bdf", "bef", "abe", "ace", "bce"}


def test_forest_single_part_is_kirchhoff(rng):
    for _ in range(10):
        g = random_connected_graph(rng, 5, 8)
        for v in range(5):
            assert forest_poly(g, [[v]]) == kirchhoff(g)


def test_forest_all_singletons():
    assert letters(forest_poly(TRIANGLE, [[0], [1], [2]])) == {"abc"}


@pytest.mark.parametrize("g", cd_graphs(), ids=lambda g: f"V{g.vertex_count}E{g.edge_count}")
def test_contraction_deletion(g):
    assert g.edge_count <= 12
    psi = kirchhoff(g)
    universe = range(g.edge_count)
    for e in range(g.edge_count):
        deleted = dodgson_raw(g, DodgsonSpec({e}, {e}))
        contracted = dodgson_raw(g, DodgsonSpec((), (), {e}))
        x = MultilinearPoly.var(e)
        lhs = MultilinearPoly((x * deleted).terms, universe)
        plus = MultilinearPoly((lhs + contracted).terms, universe)
        minus = MultilinearPoly((lhs - contracted).terms, universe)
        assert psi in (plus, minus)
        # and each piece against an independent graph operation
        rest, ids = g.delete_edges([e])
        if is_connected(rest):
            assert deleted in (renamed(kirchhoff(rest), ids, deleted.universe), -renamed(kirchhoff(rest), ids, deleted.universe))
        small, kept, loops = contract(g, e)
        expect = renamed(kirchhoff(small), kept, contracted.universe)
        assert set(contracted.terms) == {m | loops for m in expect.terms}


def driver_specs(g: Graph) -> list[DodgsonSpec]:
    order = default_edge_order(g)
    specs = []
    for variant, k in ((1, 3), (2, 4), (3, 5)):
        for _, factors in dodgson_factors(variant, order[:k]):
            specs.extend(factors)
    return specs


@pytest.mark.parametrize("key,g", [(k, g) for k, g in small_circulants(14)], ids=lambda x: str(x) if isinstance(x, tuple) else "")
def test_forest_reconstruction_for_driver_specs(key, g):
    for spec in driver_specs(g):
        raw = dodgson_raw(g, spec)
        fe = dodgson_vs_forests(g, spec, raw)
        rest, ids = g.delete_edges(spec.I | spec.J | spec.K)
        total = MultilinearPoly({}, raw.universe)
        for sign, part in fe.terms:
            total = total + forest_poly(rest, part, ids).scale(sign)
        assert MultilinearPoly(total.terms, raw.universe) == raw
        assert set(fe.partitions()) <= set(fe.admissible)


def test_psi_12_32_on_c23_has_two_partitions():
    g = decompleted_circulant(11, 2, 3)
    i, j, k = default_edge_order(g)[:3]
    fe = dodgson_vs_forests(g, DodgsonSpec({i, j}, {k, j}))
    assert len(fe.terms) == 2
    (s1, p1), (s2, p2) = fe.terms
    assert s1 == -s2
    assert [len(p) for p in p1] == [2, 2] and [len(p) for p in p2] == [2, 2]


# 5-invariant


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_five_invariant_permutation_invariance(seed):
    rnd = random.Random(seed)
    g = random_connected_graph(rnd, 6, 10)
    edges = rnd.sample(range(g.edge_count), 5)
    base = five_invariant(g, edges)
    count = 0
    for perm in itertools.permutations(edges):
        f = five_invariant(g, perm)
        assert f == base
        count += 1
    assert count == 120


def test_five_invariant_rejects_repeats():
    with pytest.raises(GraphError):
        five_invariant(K4, [0, 0, 1, 2, 3])


def test_five_invariant_degenerate_factor():
    g, edges = DEGENERATE
    products = []
    for _, s1, s2 in five_invariant_parts(edges):
        products.append(dodgson_raw(g, s1).to_poly() * dodgson_raw(g, s2).to_poly())
    assert [bool(p) for p in products] == [False, True]
    f = five_invariant(g, edges)
    assert f in (products[1], -products[1])


def test_five_invariant_count_matches_c2():
    g = decompleted_circulant(8, 1, 3)
    edges = default_edge_order(g)[:5]
    f = five_invariant(g, edges)
    rest = [e for e in range(g.edge_count) if e not in edges]
    count = count_points(polynomial_evaluator(f, 2, rest))
    assert (-count) % 2 == c2_direct(g, 2).value == 0


# denominator reduction steps


def _state(poly: Poly, nvars: int, remaining) -> ReductionState:
    ctx = mpoly_context(nvars)
    return ReductionState(5, to_mpoly(poly, ctx), tuple(remaining))


def test_reduce_linear():
    x, b, c = Poly.var(0), Poly.var(1), Poly.var(2)
    nxt = reduce_step(_state(x * (b + c) + b * c, 3, (0, 1, 2)), 0)
    assert nxt is not None and nxt.kind == "linear"
    assert nxt.as_poly() == b + c


def test_reduce_quadratic_product():
    x, b, c = Poly.var(0), Poly.var(1), Poly.var(2)
    nxt = reduce_step(_state((x + b) * (x + c), 3, (0, 1, 2)), 0)
    assert nxt is not None and nxt.kind == "quadratic"
    assert nxt.as_poly() in (c - b, b - c)


def test_reduce_irreducible():
    x, b, c = Poly.var(0), Poly.var(1), Poly.var(2)
    assert reduce_step(_state(x * x + b * c, 3, (0, 1, 2)), 0) is None


def test_reduce_absent_variable_gives_zero():
    b, c = Poly.var(1), Poly.var(2)
    nxt = reduce_step(_state(b * c, 3, (0, 1, 2)), 0)
    assert nxt is not None and nxt.poly.is_zero()


def test_reduce_rejects_unknown_edge():
    b = Poly.var(1)
    with pytest.raises(GraphError):
        reduce_step(_state(b, 3, (1,)), 0)
