"""Layer graphs and their boundary labels.

After the starting edges are dealt with, each recursive family leaves a "line" graph
on positions 0..m-1 with edges (i, i+d) for d in the family's gaps.  Peeling the two
end vertices turns it into the same graph for n-2.  Boundary vertices are named by
their distance from an end: ("L", i) is position i, ("R", i) is position m-1-i.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from c2kit.graphs import Graph, SetPartition

Label = tuple[str, int]


@dataclass(frozen=True)
class LayerFamily:
    name: str
    gaps: tuple[int, int]
    offset: int  # m = n - offset
    depth: int  # boundary labels L0..L(depth-1) and R0..R(depth-1)
    letters: dict[Label, str]
    min_layers: int  # smallest m whose two end peels see distinct boundary labels

    def size(self, n: int) -> int:
        return n - self.offset

    def graph(self, n: int) -> Graph:
        m = self.size(n)
        if m < 2:
            raise ValueError(f"layer graph for n={n} is empty")
        edges = [(i, i + d) for d in self.gaps for i in range(m - d)]
        return Graph(m, tuple(edges))

    def position(self, label: Label, n: int) -> int:
        side, i = label
        return i if side == "L" else self.size(n) - 1 - i

    def letter(self, label: Label) -> str:
        return self.letters.get(label, f"{label[0]}{label[1]}")

    def label(self, letter: str) -> Label:
        for lab, name in self.letters.items():
            if name == letter:
                return lab
        raise KeyError(f"{self.name} has no boundary vertex {letter!r}")

    def parse(self, parts: Iterable[Iterable[str]]) -> "LabelPartition":
        return LabelPartition.of([[self.label(x) for x in part] for part in parts])

    def end_neighbours(self, side: str) -> list[Label]:
        return [(side, d) for d in self.gaps]


# (1,3): vertices 2..n-2 of the decompleted circulant; b, h, a at one end, e, i, f at the other
C13 = LayerFamily(
    "1,3",
    (1, 3),
    3,
    3,
    {("L", 0): "b", ("L", 1): "h", ("L", 2): "a", ("R", 0): "e", ("R", 1): "i", ("R", 2): "f"},
    8,
)

# (2,3): vertices 1..n-1; c, e, a at one end, d, b, f at the other
C23 = LayerFamily(
    "2,3",
    (2, 3),
    1,
    3,
    {("L", 0): "c", ("L", 1): "e", ("L", 2): "a", ("R", 0): "d", ("R", 1): "b", ("R", 2): "f"},
    8,
)

LAYER_FAMILIES = {"1,3": C13, "2,3": C23}


class LabelPartition:
    """Partition of boundary labels; a single part of any content is stored as Psi = (()).

    Every spanning forest polynomial with one part is the Kirchhoff polynomial, so
    all of them share that canonical form.
    """

    __slots__ = ("parts",)

    def __init__(self, parts: tuple[tuple[Label, ...], ...]):
        self.parts = parts

    @classmethod
    def of(cls, parts: Iterable[Iterable[Label]]) -> "LabelPartition":
        clean = [tuple(sorted(set(p))) for p in parts]
        if len(clean) == 1:
            return cls(((),))
        seen: set[Label] = set()
        for p in clean:
            if not p:
                raise ValueError("empty part in a partition with several parts")
            if seen & set(p):
                raise ValueError("parts overlap")
            seen |= set(p)
        return cls(tuple(sorted(clean)))

    @classmethod
    def psi(cls) -> "LabelPartition":
        return cls(((),))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, LabelPartition) and self.parts == other.parts

    def __lt__(self, other: "LabelPartition") -> bool:
        return self.parts < other.parts

    def __hash__(self) -> int:
        return hash(self.parts)

    def __repr__(self) -> str:
        return f"LabelPartition({self.parts})"

    def is_psi(self) -> bool:
        return self.parts == ((),)

    def part_of(self, label: Label) -> int | None:
        for i, p in enumerate(self.parts):
            if label in p:
                return i
        return None

    def resolve(self, fam: LayerFamily, n: int) -> SetPartition | None:
        """Vertex partition at size n; None when two parts land on one vertex.

        On layer graphs too short for distinct labels, labels sharing a vertex merge;
        a vertex claimed by two parts admits no forest at all.
        """
        if self.is_psi():
            return SetPartition([[0]])
        parts = [{fam.position(l, n) for l in p} for p in self.parts]
        seen: set[int] = set()
        for q in parts:
            if seen & q:
                return None
            seen |= q
        return SetPartition(parts)

    def reflect(self) -> "LabelPartition":
        flip = {"L": "R", "R": "L"}
        return LabelPartition.of([[(flip[s], i) for s, i in p] for p in self.parts]) if not self.is_psi() else self

    def text(self, fam: LayerFamily) -> str:
        if self.is_psi():
            return "Psi"
        return "|".join("".join(sorted(fam.letter(l) for l in p)) for p in self.parts)

    @classmethod
    def from_text(cls, fam: LayerFamily, text: str) -> "LabelPartition":
        if text == "Psi":
            return cls.psi()
        return fam.parse([list(part) for part in text.split("|")])
