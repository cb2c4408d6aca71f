"""Graphs with stable edge ids, circulant constructors and spanning-forest enumeration.

Edges are stored as an ordered tuple of ``(tail, head)`` pairs; the position of an
edge in that tuple is its id and every polynomial in the package uses those ids as
variable names.  Orientation only matters for the sign pattern of the incidence
matrix.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np


class GraphError(ValueError):
    """Raised for malformed graphs or inputs violating an operation's precondition."""


@dataclass(frozen=True)
class Graph:
    vertex_count: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if self.vertex_count < 0:
            raise GraphError("vertex_count must be non-negative")
        edges = tuple((int(u), int(v)) for u, v in self.edges)
        for u, v in edges:
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise GraphError(f"edge ({u},{v}) has an endpoint outside 0..{self.vertex_count - 1}")
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
        object.__setattr__(self, "edges", edges)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degrees(self) -> list[int]:
        deg = [0] * self.vertex_count
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def neighbours(self, v: int) -> list[int]:
        out = []
        for a, b in self.edges:
            if a == v:
                out.append(b)
            elif b == v:
                out.append(a)
        return out

    def incident_edges(self, v: int) -> list[int]:
        return [i for i, (a, b) in enumerate(self.edges) if v in (a, b)]

    def loop_number(self) -> int:
        """First Betti number E - V + (number of components)."""
        return self.edge_count - self.vertex_count + component_count(self)

    def delete_edges(self, ids: Iterable[int]) -> tuple["Graph", list[int]]:
        """Remove edges; returns the new graph and the old id of each surviving edge."""
        drop = set(ids)
        keep = [i for i in range(self.edge_count) if i not in drop]
        return Graph(self.vertex_count, tuple(self.edges[i] for i in keep)), keep

    def to_json(self) -> str:
        return json.dumps({"vertex_count": self.vertex_count, "edges": [list(e) for e in self.edges]})

    @classmethod
    def from_json(cls, text: str) -> "Graph":
        data = json.loads(text)
        return cls(int(data["vertex_count"]), tuple(tuple(e) for e in data["edges"]))


@dataclass(frozen=True)
class CirculantSpec:
    n: int
    gaps: tuple[int, int]

    def __post_init__(self) -> None:
        n = self.n
        j, k = self.gaps
        if n < 5:
            raise GraphError(f"circulant needs n >= 5 (got n={n})")
        if not (1 <= j < k):
            raise GraphError(f"gaps must satisfy 1 <= j < k (got j={j}, k={k})")
        if 2 * k == n or 2 * j == n:
            raise GraphError(f"gap equal to n/2 (n={n}, gaps=({j},{k})): graph would not be 4-regular")
        if k > n // 2:
            raise GraphError(f"gap k={k} exceeds floor(n/2)={n // 2}")
        if j == n - k:
            raise GraphError(f"j = n - k (n={n}, gaps=({j},{k})): the two gaps coincide")


def make_circulant(spec: CirculantSpec) -> Graph:
    """C_n(j, k): the gap-j edges (i, i+j) for ascending i, then the gap-k edges."""
    n = spec.n
    edges = [(i, (i + gap) % n) for gap in spec.gaps for i in range(n)]
    return Graph(n, tuple(edges))


def circulant(n: int, j: int, k: int) -> Graph:
    return make_circulant(CirculantSpec(n, (j, k)))


def decompleted_circulant(n: int, j: int, k: int) -> Graph:
    return decomplete(circulant(n, j, k), 0)


def is_connected(g: Graph) -> bool:
    return g.vertex_count <= 1 or component_count(g) == 1


def component_count(g: Graph) -> int:
    parent = list(range(g.vertex_count))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    comps = g.vertex_count
    for u, v in g.edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            comps -= 1
    return comps


def decomplete(g: Graph, v: int = 0) -> Graph:
    """Delete vertex ``v`` and its four edges; later vertex ids shift down by one."""
    if not 0 <= v < g.vertex_count:
        raise GraphError(f"vertex {v} not in graph")
    if any(d != 4 for d in g.degrees()):
        raise GraphError("decompletion needs a 4-regular graph")
    if not is_connected(g):
        raise GraphError("decompletion needs a connected graph")

    def shift(x: int) -> int:
        return x - 1 if x > v else x

    edges = tuple((shift(a), shift(b)) for a, b in g.edges if v not in (a, b))
    out = Graph(g.vertex_count - 1, edges)
    if not is_connected(out):
        raise GraphError(f"removing vertex {v} disconnects the graph")
    return out


def complete(g: Graph) -> Graph:
    """Add one vertex joined to every degree-3 vertex."""
    if not is_connected(g):
        raise GraphError("completion needs a connected graph")
    deg = g.degrees()
    bad = [d for d in deg if d not in (3, 4)]
    if bad:
        raise GraphError(f"degrees must be 3 or 4 to complete with one vertex (found {sorted(set(bad))})")
    threes = [i for i, d in enumerate(deg) if d == 3]
    if not threes:
        raise GraphError("graph is already 4-regular: the new vertex would be isolated")
    if len(threes) != 4:
        raise GraphError(f"need exactly four degree-3 vertices for a 4-regular completion (found {len(threes)})")
    w = g.vertex_count
    return Graph(w + 1, g.edges + tuple((t, w) for t in threes))


def incidence_matrix(g: Graph, removed_vertex: int) -> np.ndarray:
    """Signed incidence matrix (rows: vertices except ``removed_vertex``; columns: edges)."""
    if not 0 <= removed_vertex < g.vertex_count:
        raise GraphError(f"vertex {removed_vertex} not in graph")
    rows = [v for v in range(g.vertex_count) if v != removed_vertex]
    index = {v: r for r, v in enumerate(rows)}
    mat = np.zeros((len(rows), g.edge_count), dtype=np.int64)
    for e, (u, v) in enumerate(g.edges):
        if u in index:
            mat[index[u], e] = 1
        if v in index:
            mat[index[v], e] = -1
    return mat


def full_incidence_matrix(g: Graph) -> np.ndarray:
    mat = np.zeros((g.vertex_count, g.edge_count), dtype=np.int64)
    for e, (u, v) in enumerate(g.edges):
        mat[u, e] = 1
        mat[v, e] = -1
    return mat


def integer_det(rows: Sequence[Sequence[int]]) -> int:
    """Exact determinant by Gaussian elimination over the rationals."""
    m = [[Fraction(x) for x in row] for row in rows]
    size = len(m)
    det = Fraction(1)
    for c in range(size):
        piv = next((r for r in range(c, size) if m[r][c] != 0), None)
        if piv is None:
            return 0
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det *= m[c][c]
        inv = 1 / m[c][c]
        for r in range(c + 1, size):
            f = m[r][c] * inv
            if f:
                for cc in range(c, size):
                    m[r][cc] -= f * m[c][cc]
    return int(det)


def spanning_tree_count(g: Graph) -> int:
    """Matrix-tree theorem: any cofactor of the Laplacian."""
    if g.vertex_count <= 1:
        return 1
    lap = [[0] * g.vertex_count for _ in range(g.vertex_count)]
    for u, v in g.edges:
        lap[u][u] += 1
        lap[v][v] += 1
        lap[u][v] -= 1
        lap[v][u] -= 1
    return integer_det([row[1:] for row in lap[1:]])


class SetPartition:
    """A partition of a subset of vertices, kept in canonical form.

    Parts are sorted by their minimum element and elements ascend within a part, so
    equal partitions compare and hash equal.
    """

    __slots__ = ("parts",)

    def __init__(self, parts: Iterable[Iterable[int]]):
        canon = [tuple(sorted(set(p))) for p in parts]
        if any(not p for p in canon):
            raise GraphError("empty part in set partition")
        seen: set[int] = set()
        for p in canon:
            if seen.intersection(p):
                raise GraphError("parts of a set partition must be disjoint")
            seen.update(p)
        canon.sort()
        self.parts: tuple[tuple[int, ...], ...] = tuple(canon)

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        return iter(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SetPartition) and self.parts == other.parts

    def __lt__(self, other: "SetPartition") -> bool:
        return (len(self.parts), self.parts) < (len(other.parts), other.parts)

    def __hash__(self) -> int:
        return hash(self.parts)

    def __repr__(self) -> str:
        return "SetPartition(" + "|".join(",".join(map(str, p)) for p in self.parts) + ")"

    def vertices(self) -> set[int]:
        return {v for p in self.parts for v in p}

    def relabel(self, mapping: dict[int, int]) -> "SetPartition":
        return SetPartition([mapping[v] for v in p] for p in self.parts)


def iter_forest_masks(g: Graph, partition: SetPartition | Iterable[Iterable[int]]) -> Iterator[int]:
    """Yield edge bitmasks of the spanning forests compatible with ``partition``.

    A compatible forest spans every vertex, has one tree per part, and each part's
    vertices lie in its own tree.  Backtracking over edges with a rollback
    union-find; two components carrying different parts are never merged.
    """
    part = partition if isinstance(partition, SetPartition) else SetPartition(partition)
    nv, ne = g.vertex_count, g.edge_count
    if not part.parts:
        if nv == 0:
            yield 0
        return
    label = [-1] * nv
    for idx, p in enumerate(part.parts):
        for v in p:
            if not 0 <= v < nv:
                raise GraphError(f"partition vertex {v} not in graph")
            label[v] = idx
    target = nv - len(part.parts)
    if target < 0:
        return
    parent = list(range(nv))
    size = [1] * nv
    tag = label[:]  # part carried by each root
    # per part: how many components still hold a piece of it
    pieces = [len(p) for p in part.parts]
    edges = g.edges

    def find(x: int) -> int:
        while parent[x] != x:
            x = parent[x]
        return x

    def rec(i: int, chosen: int, mask: int) -> Iterator[int]:
        if chosen == target:
            if all(c == 1 for c in pieces):
                yield mask
            return
        if ne - i < target - chosen:
            return
        u, v = edges[i]
        ru, rv = find(u), find(v)
        if ru != rv and (tag[ru] < 0 or tag[rv] < 0 or tag[ru] == tag[rv]):
            if size[ru] < size[rv]:
                ru, rv = rv, ru
            old_tag = tag[ru]
            parent[rv] = ru
            size[ru] += size[rv]
            merged_same = tag[ru] >= 0 and tag[ru] == tag[rv]
            if tag[ru] < 0:
                tag[ru] = tag[rv]
            if merged_same:
                pieces[tag[ru]] -= 1
            yield from rec(i + 1, chosen + 1, mask | (1 << i))
            if merged_same:
                pieces[tag[ru]] += 1
            tag[ru] = old_tag
            size[ru] -= size[rv]
            parent[rv] = rv
        yield from rec(i + 1, chosen, mask)

    yield from rec(0, 0, 0)


def enumerate_forests(g: Graph, partition: SetPartition | Iterable[Iterable[int]]) -> list[frozenset[int]]:
    return [frozenset(i for i in range(g.edge_count) if m >> i & 1) for m in iter_forest_masks(g, partition)]


def to_networkx(g: Graph):
    import networkx as nx

    h = nx.MultiGraph()
    h.add_nodes_from(range(g.vertex_count))
    h.add_edges_from(g.edges)
    return h


def is_isomorphic(g: Graph, h: Graph) -> bool:
    import networkx as nx

    if g.vertex_count != h.vertex_count or g.edge_count != h.edge_count:
        return False
    if sorted(g.degrees()) != sorted(h.degrees()):
        return False
    return nx.is_isomorphic(to_networkx(g), to_networkx(h))


def parse_graph(text: str) -> Graph:
    """Graph from JSON text, a JSON file path, or ``circulant[-decompleted]:n:j,k``."""
    text = text.strip()
    for prefix, dec in (("circulant-decompleted:", True), ("circulant:", False)):
        if text.startswith(prefix):
            try:
                n_str, gaps = text[len(prefix):].split(":")
                j, k = (int(x) for x in gaps.split(","))
                n = int(n_str)
            except ValueError as exc:
                raise GraphError(f"bad circulant shorthand {text!r}") from exc
            return decompleted_circulant(n, j, k) if dec else circulant(n, j, k)
    if text.startswith("{"):
        return Graph.from_json(text)
    try:
        with open(text) as fh:
            return Graph.from_json(fh.read())
    except OSError as exc:
        raise GraphError(f"cannot read graph {text!r}: {exc}") from exc
