import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from c2kit.algebra import MultilinearPoly
from c2kit.engine import (
    BudgetExceeded,
    C2Error,
    C2Result,
    FunctionEvaluator,
    c2_coeff_graph,
    c2_coeff_p2,
    c2_direct,
    c2_dodgson,
    coefficient_lemma_oracle,
    count_points,
    default_edge_order,
    denom_reduce,
    eligible,
    kirchhoff_count,
    polynomial_evaluator,
)
from c2kit.graph_polys import DodgsonSpec, ReductionState, dodgson_raw, kirchhoff, reduce_step
from c2kit.graphs import Graph, GraphError, decompleted_circulant
from c2kit.recurrences.families import figure_edges
from conftest import K4, SQUARE, TRIANGLE, random_connected_graph, small_circulants

# zeros of the K4 Kirchhoff polynomial, frozen from a plain loop over all 64 points
K4_ZEROS_P2 = 36
K4_ZEROS_P3 = 261

X1, X2, X3 = (MultilinearPoly.var(i) for i in range(3))


def test_count_linear_form():
    assert count_points(X1 + X2 + X3, 2) == 4


def test_count_product():
    assert count_points(X1 * X2, 3) == 5


def test_count_k4_frozen():
    psi = kirchhoff(K4)
    assert count_points(psi, 2) == K4_ZEROS_P2
    assert count_points(psi, 3) == K4_ZEROS_P3


def test_budget_refusal_names_size():
    with pytest.raises(BudgetExceeded, match=r"2\^52"):
        c2_direct(decompleted_circulant(28, 1, 3), 2)
    with pytest.raises(BudgetExceeded):
        count_points(X1 + X2, 2, budget=2)


def test_budget_env(monkeypatch):
    monkeypatch.setenv("C2KIT_POINT_BUDGET", "16")
    with pytest.raises(BudgetExceeded):
        c2_direct(K4, 2)
    monkeypatch.setenv("C2KIT_POINT_BUDGET", "64")
    assert c2_direct(K4, 2).value == 1


@pytest.mark.parametrize("workers", [1, 4, 16])
def test_count_partition_invariance(workers):
    g = decompleted_circulant(9, 2, 3)
    assert kirchhoff_count(g, 2, workers=workers) == kirchhoff_count(g, 2, workers=1)
    assert kirchhoff_count(K4, 3, workers=workers) == K4_ZEROS_P3
    f = polynomial_evaluator(dodgson_raw(g, DodgsonSpec({0}, {1}, {2})), 3)
    assert count_points(f, workers=workers) == count_points(f, workers=1)


def test_function_evaluator_blocks():
    ev = FunctionEvaluator(3, 4, lambda x: (x[0] * x[1] + x[2] - x[3]) % 3)
    for w in (1, 4, 16):
        assert count_points(ev, workers=w) == 27


def test_direct_examples():
    for p in (2, 3, 5):
        assert c2_direct(TRIANGLE, p).value == 1
    assert c2_direct(K4, 2).value == 1
    assert c2_direct(decompleted_circulant(7, 1, 3), 2).value == 1
    assert c2_direct(decompleted_circulant(8, 1, 3), 2).value == 0


def test_direct_needs_three_vertices():
    with pytest.raises(C2Error):
        c2_direct(Graph(2, ((0, 1), (0, 1))), 2)


def test_result_record():
    r = c2_direct(K4, 3)
    assert r.value == 2 and r.method == "direct"
    rec = r.to_record(meta=False)
    assert set(rec) == {"graph", "p", "method", "value", "edges"}
    with pytest.raises(ValueError):
        C2Result(3, 3, "direct", "g")


def _divisibility_graphs():
    rnd = random.Random(11)
    graphs = [TRIANGLE, SQUARE, K4]
    graphs += [g for _, g in small_circulants(22)][::3]
    graphs.append(decompleted_circulant(14, 2, 3))
    graphs += [random_connected_graph(rnd, rnd.randint(3, 9), rnd.randint(4, 16)) for _ in range(10)]
    return graphs


@pytest.mark.parametrize("g", _divisibility_graphs(), ids=lambda g: f"V{g.vertex_count}E{g.edge_count}")
def test_p_squared_divides_count(g):
    assert kirchhoff_count(g, 2) % 4 == 0
    if g.edge_count <= 14:
        assert kirchhoff_count(g, 3) % 9 == 0


def test_p3_divisibility_at_sixteen_edges():
    g = decompleted_circulant(10, 1, 4)
    assert g.edge_count == 16
    assert kirchhoff_count(g, 3) % 9 == 0


# Dodgson routes


def test_zigzag_variant1_figure_edges():
    g = decompleted_circulant(5, 1, 2)
    assert c2_dodgson(g, 2, 1, figure_edges("1,2", 5)).value == 1


def test_c8_13_variant2_figure_edges():
    g = decompleted_circulant(8, 1, 3)
    assert c2_dodgson(g, 2, 2, figure_edges("1,3", 8)).value == c2_direct(g, 2).value == 0


@pytest.mark.parametrize("key", [(7, 1, 3), (8, 2, 3), (9, 1, 4), (10, 3, 4)])
def test_variants_agree_on_random_edges(key):
    g = decompleted_circulant(*key)
    assert eligible(g)
    rnd = random.Random(hash(key) & 0xFFFF)
    expect = {p: c2_direct(g, p).value for p in (2, 3)}
    for _ in range(3):
        edges = rnd.sample(range(g.edge_count), 5)
        for p in (2, 3) if g.edge_count <= 12 else (2,):
            for variant, k in ((1, 3), (2, 4), (3, 5)):
                assert c2_dodgson(g, p, variant, edges[:k]).value == expect[p]


def test_dodgson_rejects_ineligible_and_bad_edges():
    dense = Graph(4, K4.edges + ((0, 1), (2, 3)))
    with pytest.raises(C2Error, match="2V"):
        c2_dodgson(dense, 2, 1)
    with pytest.raises(GraphError):
        c2_dodgson(K4, 2, 1, [0, 0, 1])
    with pytest.raises(ValueError):
        c2_dodgson(K4, 2, 4)


# coefficient route


def test_coeff_small_example():
    f = X1 * X2 + X1 + X2
    assert c2_coeff_p2(f, MultilinearPoly.constant(1)) == 1
    assert count_points(f, 2) % 2 == 1


@pytest.mark.parametrize("n", [5, 7, 9])
def test_coeff_zigzag_single_pair(n):
    g = decompleted_circulant(n, 1, 2)
    i, j, k = figure_edges("1,2", n)
    f = dodgson_raw(g, DodgsonSpec({i}, {k}, {j}))
    h = dodgson_raw(g, DodgsonSpec({i, j}, {k, j}))
    universe = f.universe | h.universe
    full = sum(1 << v for v in universe)
    pairs = sum(1 for m in f.terms if full ^ m in h.terms)
    assert len(h.terms) == 1 and pairs == 1
    assert c2_coeff_p2(f, h) == 1


def test_coeff_empty_and_degree_check():
    assert c2_coeff_p2(MultilinearPoly({}, [0, 1]), X1) == 0
    with pytest.raises(C2Error, match="degree"):
        c2_coeff_p2(X1 * X2, X1 * X3)


def test_coeff_graph_route():
    for key in ((7, 1, 3), (8, 1, 3), (9, 2, 3)):
        g = decompleted_circulant(*key)
        assert c2_coeff_graph(g).value == c2_direct(g, 2).value


@st.composite
def lemma_instances(draw):
    n = draw(st.integers(1, 4))
    p = draw(st.sampled_from([2, 3, 5]))
    terms = draw(st.dictionaries(st.integers(0, (1 << n) - 2), st.integers(-4, 4), max_size=6))
    terms = {m: c for m, c in terms.items() if c}
    terms[(1 << n) - 1] = draw(st.integers(1, 4))
    return MultilinearPoly(terms, range(n)), n, p


@settings(max_examples=100, deadline=None)
@given(lemma_instances())
def test_coefficient_lemma(inst):
    # summing F^(p-1) over all points leaves (-1)^n times the top coefficient
    f, n, p = inst
    assert f.degree() == n
    sign = -1 if n % 2 == 0 else 1
    assert coefficient_lemma_oracle(f.to_poly(), list(range(n)), p) == sign * count_points(f, p) % p


# denominator reduction


def test_denom_zigzag():
    g = decompleted_circulant(5, 1, 2)
    res = denom_reduce(g, list(range(6)), 2)
    assert res.c2 is not None and res.c2.value == 1
    assert denom_reduce(g, p=3).c2.value == 2


def test_denom_two_orders_agree():
    g = decompleted_circulant(7, 1, 3)
    first = denom_reduce(g, p=2)
    order = default_edge_order(g)
    other = denom_reduce(g, order[1:6] + [order[0]] + order[6:], 2)
    assert first.c2.value == other.c2.value == c2_direct(g, 2).value


def test_denom_zero_stop():
    # on this order the reduced polynomial vanishes after eight edges
    g = decompleted_circulant(8, 1, 3)
    res = denom_reduce(g, [0, 10, 1, 9, 6, 4, 11, 8, 5, 7, 3, 2], 2)
    assert res.stop == "zero"
    assert res.index == 8 and res.c2.value == 0 == c2_direct(g, 2).value


def test_denom_cannot_factor_stop():
    g = decompleted_circulant(9, 1, 3)
    base = default_edge_order(g)
    for e in base[5:]:
        state = ReductionState.start(g, base[:5])
        if reduce_step(state, e) is None:
            res = denom_reduce(g, base[:5] + [e] + [x for x in base[5:] if x != e], 2)
            assert res.stop == "cannot be factored" and res.index == 5
            return
    pytest.skip("every first step factors on this graph")


@pytest.mark.parametrize("key", [(7, 1, 3), (8, 2, 3)])
def test_denom_chain_counts_are_constant(key):
    g = decompleted_circulant(*key)
    assert 2 + g.edge_count == 2 * g.vertex_count
    for order in (default_edge_order(g), list(reversed(default_edge_order(g)))):
        state = ReductionState.start(g, order[:5])
        values = []
        for e in order[5:]:
            if len(state.remaining) <= 1 or state.poly.is_zero():
                break
            count = count_points(polynomial_evaluator(state.as_poly(), 2, list(state.remaining)))
            values.append((-count if state.step % 2 else count) % 2)
            nxt = reduce_step(state, e)
            if nxt is None:
                break
            state = nxt
        assert values and set(values) == {c2_direct(g, 2).value}


def test_denom_needs_five_edges():
    with pytest.raises(GraphError):
        denom_reduce(SQUARE)
