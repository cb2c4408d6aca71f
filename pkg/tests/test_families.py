import pytest

from c2kit.engine import c2_direct
from c2kit.graph_polys import DodgsonSpec, dodgson_raw, dodgson_vs_forests
from c2kit.recurrences.families import (
    FamilySpec,
    UnsupportedRoute,
    c2_sequence,
    closed_form,
    figure_edges,
    mirror_cancellation,
    verify_closed_form,
)


def part_sizes(fe):
    return [sorted(len(p) for p in part) for _, part in fe.terms]


@pytest.mark.parametrize("n", [9, 10, 11])
def test_zigzag_figure_shapes(n):
    g = FamilySpec("1,2", 2, n, n).graph(n)
    i, j, k = figure_edges("1,2", n)
    assert part_sizes(dodgson_vs_forests(g, DodgsonSpec({i}, {k}, {j}))) == [[1, 1, 2]]
    assert len(dodgson_raw(g, DodgsonSpec({i, j}, {k, j})).terms) == 1


@pytest.mark.parametrize("n", [9, 10, 11])
def test_c13_figure_shape(n):
    g = FamilySpec("1,3", 2, n, n).graph(n)
    i, j, k, l = figure_edges("1,3", n)
    assert part_sizes(dodgson_vs_forests(g, DodgsonSpec({i, j}, {k, l}))) == [[2, 2, 2]]


@pytest.mark.parametrize("n", [9, 10, 11])
def test_c23_figure_shapes(n):
    g = FamilySpec("2,3", 2, n, n).graph(n)
    i, j, k = figure_edges("2,3", n)
    assert part_sizes(dodgson_vs_forests(g, DodgsonSpec({i}, {k}, {j}))) == [[1, 1, 2]]
    fe = dodgson_vs_forests(g, DodgsonSpec({i, j}, {k, j}))
    assert part_sizes(fe) == [[2, 2], [2, 2]]
    assert fe.terms[0][0] == -fe.terms[1][0]


def test_figure_edges_padding():
    edges = figure_edges("zigzag", 8, 5)
    assert len(set(edges)) == 5 and edges[:3] == figure_edges("1,2", 8)
    assert len(figure_edges("1,4", 10, 3)) == 3


def test_family_validation():
    with pytest.raises(ValueError, match="unknown family"):
        FamilySpec("1,9", 2, 20, 21)
    with pytest.raises(ValueError, match="starts at 7"):
        FamilySpec("1,3", 2, 6, 8)
    with pytest.raises(ValueError):
        FamilySpec("1,3", 4, 7, 8)
    assert FamilySpec("2k+2", 2, 3, 4).graph(3).vertex_count == 7


def test_closed_forms():
    assert closed_form(FamilySpec("1,2", 5, 5, 6))(9) == 4
    assert closed_form(FamilySpec("1,3", 2, 7, 8))(12) == 0
    assert closed_form(FamilySpec("1,3", 3, 7, 8)) is None
    with pytest.raises(UnsupportedRoute):
        verify_closed_form(FamilySpec("2,3", 2, 7, 8), [])


def test_zigzag_sequences():
    assert c2_sequence(FamilySpec("1,2", 2, 5, 9)) == [(n, 1) for n in range(5, 10)]
    rows = c2_sequence(FamilySpec("zigzag", 3, 5, 7), "dodgson")
    assert rows == [(5, 2), (6, 2), (7, 2)]
    assert verify_closed_form(FamilySpec("1,2", 3, 5, 7), rows) == []


@pytest.mark.parametrize("route", ["direct", "dodgson", "coeff", "denom"])
def test_c13_routes_follow_parity(route):
    fam = FamilySpec("1,3", 2, 7, 10)
    rows = c2_sequence(fam, route)
    assert [v for _, v in rows] == [1, 0, 1, 0]
    assert verify_closed_form(fam, rows) == []


def test_c23_small_values():
    rows = c2_sequence(FamilySpec("2,3", 2, 7, 12), "dodgson")
    assert rows == [(n, c2_direct(FamilySpec("2,3", 2, n, n).graph(n), 2).value) for n in range(7, 13)]


def test_unsupported_routes():
    with pytest.raises(UnsupportedRoute, match="p=3"):
        c2_sequence(FamilySpec("1,3", 3, 7, 8), "transfer")
    with pytest.raises(UnsupportedRoute, match="1,4"):
        c2_sequence(FamilySpec("1,4", 2, 9, 10), "transfer")
    with pytest.raises(UnsupportedRoute, match="table"):
        c2_sequence(FamilySpec("1,3", 2, 7, 8), "table")
    with pytest.raises(UnsupportedRoute):
        c2_sequence(FamilySpec("1,3", 2, 7, 8), "magic")


@pytest.mark.parametrize("k,pairs", [(3, 6), (4, 16), (5, 132)])
def test_mirror_cancellation(k, pairs):
    rep = mirror_cancellation(k)
    assert rep.fixed == 0
    assert rep.pairs == pairs and rep.c2 == 0
    assert all(rep.mirror[rep.mirror[v]] == v for v in rep.mirror)


def test_mirror_agrees_with_direct():
    g = FamilySpec("2k2", 2, 3, 3).graph(3)
    assert c2_direct(g, 2).value == mirror_cancellation(3).c2
