import random

import pytest

from c2kit.graphs import Graph, GraphError, decompleted_circulant

TRIANGLE = Graph(3, ((0, 1), (1, 2), (0, 2)))
SQUARE = Graph(4, ((0, 1), (1, 2), (2, 3), (3, 0)))
K4 = Graph(4, ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)))

# three two-edge paths from 0 to 4, edges named a..f in order
FOREST_EXAMPLE = Graph(5, ((0, 1), (0, 3), (0, 2), (1, 4), (3, 4), (2, 4)))
FOREST_EXAMPLE_PARTS = [[1, 2], [3]]


def letters(poly, names="abcdefghijklmnopqrstuvwxyz") -> set[str]:
    """Monomials of a multilinear polynomial spelled with edge letters."""
    out = set()
    for mask in poly.terms:
        out.add("".join(names[i] for i in range(mask.bit_length()) if mask >> i & 1))
    return out


def random_connected_graph(rng: random.Random, vertices: int, edges: int) -> Graph:
    """A random spanning tree plus extra (possibly parallel) edges."""
    es = []
    for v in range(1, vertices):
        es.append((rng.randrange(v), v))
    while len(es) < edges:
        u, v = rng.sample(range(vertices), 2)
        es.append((u, v))
    rng.shuffle(es)
    return Graph(vertices, tuple(es))


def small_circulants(max_edges: int = 22):
    """Decompleted circulants C_n(j,k) with at most max_edges edges."""
    out = []
    for n in range(5, max_edges // 2 + 3):
        for j in range(1, n // 2 + 1):
            for k in range(j + 1, n // 2 + 1):
                try:
                    g = decompleted_circulant(n, j, k)
                except GraphError:
                    continue
                if g.edge_count <= max_edges:
                    out.append(((n, j, k), g))
    return out


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20260916)
