"""The 22-sequence system for c2 at p=2 of the decompleted C_n(2,3).

Twenty-two combinations of spanning forest polynomials on the (2,3) layer graph are
reduced one layer pair at a time.  For each, the four symmetric ways to put the end
edges into its forests are

    alpha  the gap-2 edges out of both ends
    beta   the gap-3 edges out of both ends
    gamma  all four
    delta  none

and the reduction table records what is left on the layer graph two sizes down.
Products of pairs of these, with complementary assignments, give the equations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from c2kit.graphs import iter_forest_masks
from c2kit.recurrences.layers import C23, LabelPartition, LayerFamily
from c2kit.recurrences.transfer import make_state, pair_count

COLUMNS = ("alpha", "beta", "gamma", "delta")
COMPLEMENT = {"alpha": "beta", "beta": "alpha", "gamma": "delta", "delta": "gamma"}
# end-edge gaps kept in the forest for each assignment
KEPT_GAPS = {"alpha": (2,), "beta": (3,), "gamma": (2, 3), "delta": ()}

# The equations: sequence -> terms (sequence, lag)
EQUATIONS: dict[str, tuple[tuple[str, int], ...]] = {
    "A": (("B", 2), ("C", 4), ("D", 2)),
    "B": (("E", 2), ("F", 4), ("V", 4)),
    "C": (("A", 2), ("G", 2)),
    "D": (("H", 2), ("I", 2)),
    "E": (("J", 2), ("C", 4), ("D", 2)),
    "F": (("K", 2), ("L", 2)),
    "G": (("M", 2), ("N", 4)),
    "H": (("H", 2), ("F", 2), ("N", 2)),
    "I": (("H", 2), ("P", 2), ("C", 2), ("Q", 2)),
    "J": (("G", 2), ("Q", 4)),
    "K": (("R", 2),),
    "L": (("S", 2), ("F", 4), ("V", 4)),
    "M": (("A", 2), ("Q", 4)),
    "N": (("S", 2), ("T", 2)),
    "P": (("D", 2), ("C", 2), ("Q", 2)),
    "Q": (("B", 2), ("J", 2)),
    "R": (("L", 2), ("N", 4)),
    "S": (("U", 2), ("V", 2)),
    "T": (("K", 2), ("N", 4)),
    "U": (("T", 2), ("F", 4), ("V", 4)),
    "V": (("W", 2), ("H", 2)),
    "W": (("V", 4), ("H", 2), ("C", 2), ("Q", 2)),
}

SEQUENCE_NAMES = tuple(EQUATIONS)
MAX_LAG = 4
# both reductions must see distinct boundary labels: n - 2 >= 9
FIRST_VALID = 11


class UnneededEntry(LookupError):
    """A '*' entry of the table was needed."""


@dataclass(frozen=True)
class Table1:
    polynomials: dict[str, tuple[tuple[int, str], ...]]
    rows: dict[str, dict[str, str]]
    sequences: dict[str, tuple[str, str]]
    vanishing: frozenset[frozenset[str]]
    second_reduction: frozenset[str]

    def entry(self, poly: str, column: str) -> dict[str, int]:
        """Signed combination of polynomials; {} for 0; '*' raises."""
        text = self.rows[poly][column]
        if text == "*":
            raise UnneededEntry(f"table entry ({poly}, {column}) is marked as not needed")
        return parse_combination(text)

    def sequence_of(self, x: str, y: str) -> str | None:
        for name, pair in self.sequences.items():
            if sorted((x, y)) == sorted(pair):
                return name
        return None

    def partitions(self, poly: str, fam: LayerFamily = C23) -> list[tuple[int, LabelPartition]]:
        return [(sign, LabelPartition.from_text(fam, text)) for sign, text in self.polynomials[poly]]


def parse_combination(text: str) -> dict[str, int]:
    if text == "0":
        return {}
    out: dict[str, int] = {}
    for piece in text.replace("-", "+-").split("+"):
        piece = piece.strip()
        if not piece:
            continue
        sign = -1 if piece.startswith("-") else 1
        name = piece.lstrip("-")
        out[name] = out.get(name, 0) + sign
    return out


def _parse_signed(text: str) -> tuple[int, str]:
    return (-1 if text[0] == "-" else 1, text[1:])


@lru_cache(maxsize=1)
def load_table() -> Table1:
    raw = json.loads(resources.files("c2kit.recurrences").joinpath("data/table1.json").read_text())
    if raw.get("schema") != "c2kit.table1/1":
        raise ValueError("unknown table schema")
    if tuple(raw["columns"]) != COLUMNS:
        raise ValueError("unexpected table columns")
    return Table1(
        {k: tuple(_parse_signed(t) for t in v) for k, v in raw["polynomials"].items()},
        {k: dict(zip(COLUMNS, v)) for k, v in raw["rows"].items()},
        {k: tuple(v) for k, v in raw["sequences"].items()},
        frozenset(frozenset(v) for v in raw["vanishing"]),
        frozenset(raw["second_reduction"]),
    )


# mechanical derivation of the equations


def _reduce_pair(table: Table1, x: str, y: str) -> dict[tuple[str, str], int]:
    """[x y] at n as a combination of pairs at n - 2 (signs dropped)."""
    out: dict[tuple[str, str], int] = {}
    for col in COLUMNS:
        first = table.rows[x][col]
        second = table.rows[y][COMPLEMENT[col]]
        if first == "0" or second == "0":
            continue
        for u in table.entry(x, col):
            for v in table.entry(y, COMPLEMENT[col]):
                key = tuple(sorted((u, v)))
                out[key] = (out.get(key, 0) + 1) % 2
    return {k: c for k, c in out.items() if c}


def derive_equation(table: Table1, name: str) -> tuple[tuple[str, int], ...]:
    """Rebuild the equation for one sequence from the table alone."""
    x, y = table.sequences[name]
    terms: dict[tuple[str, int], int] = {}

    def emit(pair: tuple[str, str], lag: int, depth: int) -> None:
        if frozenset(pair) in table.vanishing:
            return
        seq = table.sequence_of(*pair)
        if seq is not None and depth > 0:
            terms[(seq, lag)] = (terms.get((seq, lag), 0) + 1) % 2
            return
        if depth >= 2:
            raise ValueError(f"pair {pair} is neither a named sequence nor reducible")
        for sub in _reduce_pair(table, *pair):
            emit(sub, lag + 2, depth + 1)

    emit((x, y), 0, 0)
    return tuple(sorted((k for k, c in terms.items() if c), key=lambda t: (SEQUENCE_NAMES.index(t[0]), t[1])))


def derived_equations(table: Table1 | None = None) -> dict[str, tuple[tuple[str, int], ...]]:
    table = table or load_table()
    return {name: derive_equation(table, name) for name in SEQUENCE_NAMES}


def normalized(eqs: dict[str, tuple[tuple[str, int], ...]]) -> dict[str, frozenset[tuple[str, int]]]:
    return {k: frozenset(v) for k, v in eqs.items()}


# brute-force checks and seeds


def forest_set(poly: str, n: int, table: Table1 | None = None, fam: LayerFamily = C23) -> set[int]:
    """Forests (edge masks) of a combination mod 2: the symmetric difference of its terms."""
    table = table or load_table()
    g = fam.graph(n)
    out: set[int] = set()
    for _, part in table.partitions(poly, fam):
        resolved = part.resolve(fam, n)
        if resolved is None:
            continue
        out ^= set(iter_forest_masks(g, resolved))
    return out


def reduced_forest_set(poly: str, column: str, n: int, table: Table1 | None = None, fam: LayerFamily = C23) -> set[int]:
    """Forests of ``poly`` at n whose end edges are exactly the column's, with the ends
    removed and re-indexed onto the layer graph at n - 2."""
    table = table or load_table()
    g, small = fam.graph(n), fam.graph(n - 2)
    m = fam.size(n)
    ends = {0, m - 1}
    end_edges = {i for i, (u, v) in enumerate(g.edges) if u in ends or v in ends}
    want = 0
    for i in end_edges:
        u, v = g.edges[i]
        if v - u in KEPT_GAPS[column]:
            want |= 1 << i
    small_index = {e: i for i, e in enumerate(small.edges)}
    remap = {}
    for i, (u, v) in enumerate(g.edges):
        if i not in end_edges:
            remap[i] = small_index[(u - 1, v - 1)]
    end_mask = sum(1 << i for i in end_edges)
    out: set[int] = set()
    for mask in forest_set(poly, n, table, fam):
        if mask & end_mask != want:
            continue
        small_mask = 0
        rest = mask & ~end_mask
        while rest:
            low = rest & -rest
            small_mask |= 1 << remap[low.bit_length() - 1]
            rest ^= low
        out ^= {small_mask}
    return out


def flip_mask(mask: int, n: int, fam: LayerFamily = C23) -> int:
    """Image of an edge set under the layer graph's left-right reflection."""
    g = fam.graph(n)
    last = fam.size(n) - 1
    index = {e: i for i, e in enumerate(g.edges)}
    out = 0
    for i, (u, v) in enumerate(g.edges):
        if mask >> i & 1:
            out |= 1 << index[(last - v, last - u)]
    return out


def entry_difference(poly: str, column: str, n: int, table: Table1 | None = None) -> set[int]:
    """Forests where the table entry and contraction-deletion at size n disagree mod 2."""
    table = table or load_table()
    got = reduced_forest_set(poly, column, n, table)
    for name, coeff in table.entry(poly, column).items():
        if coeff % 2:
            got ^= forest_set(name, n - 2, table)
    return got


def check_entry(poly: str, column: str, n: int, table: Table1 | None = None, literal: bool = False) -> bool:
    """Does the table entry agree mod 2 with contracting and deleting at size n?

    Every polynomial in the table is mirror symmetric, so a difference made of mirror
    pairs Z + flip(Z) drops out of every product it meets.  Unless ``literal`` is set
    such differences are accepted.
    """
    diff = entry_difference(poly, column, n, table)
    if literal:
        return not diff
    images = {m: flip_mask(m, n - 2) for m in diff}
    return all(images[m] != m and images[m] in diff for m in diff)


def sequence_value(name: str, n: int, table: Table1 | None = None, fam: LayerFamily = C23) -> int:
    """[x y]_2 for the sequence's pair, by counting complementary forest pairs."""
    table = table or load_table()
    x, y = table.sequences[name]
    total = 0
    for _, p in table.partitions(x, fam):
        for _, q in table.partitions(y, fam):
            total += pair_count(fam, make_state(p, q), n)
    return total % 2


def table23_seeds(ns: range = range(7, 11)) -> dict[int, dict[str, int]]:
    table = load_table()
    return {n: {name: sequence_value(name, n, table) for name in SEQUENCE_NAMES} for n in ns}


def table23_system(
    seeds: dict[int, dict[str, int]] | None = None,
    n_max: int = 13,
    equations: dict[str, tuple[tuple[str, int], ...]] | None = None,
) -> dict[int, dict[str, int]]:
    """Iterate the equations up to n_max; A at n is c2 at p=2 of the decompleted C_n(2,3).

    Equations are used from n = 11 on; every size below that must be seeded.
    ``equations`` defaults to the printed system.
    """
    equations = equations or EQUATIONS
    values = {n: dict(v) for n, v in (table23_seeds() if seeds is None else seeds).items()}
    if not values:
        raise ValueError("missing seeds")
    top = max(values)
    need = range(max(min(values), FIRST_VALID - MAX_LAG), top + 1)
    for n in need:
        if n not in values or any(s not in values[n] for s in SEQUENCE_NAMES):
            raise ValueError(f"missing seed values at n={n}")
    if top + 1 < FIRST_VALID:
        raise ValueError(f"seeds must reach n={FIRST_VALID - 1}")
    for n in range(top + 1, n_max + 1):
        values[n] = {
            name: sum(values[n - lag][ref] for ref, lag in equations[name]) % 2 for name in SEQUENCE_NAMES
        }
    return values


def table23_sequence(ns, seeds: dict[int, dict[str, int]] | None = None, equations=None) -> list[tuple[int, int]]:
    ns = list(ns)
    values = table23_system(seeds, max(ns), equations)
    out = []
    for n in ns:
        if n not in values:
            values[n] = {"A": sequence_value("A", n)}
        out.append((n, values[n]["A"]))
    return out


__all__ = [
    "COLUMNS",
    "EQUATIONS",
    "Table1",
    "UnneededEntry",
    "check_entry",
    "derive_equation",
    "derived_equations",
    "entry_difference",
    "flip_mask",
    "load_table",
    "sequence_value",
    "table23_seeds",
    "table23_sequence",
    "table23_system",
]
