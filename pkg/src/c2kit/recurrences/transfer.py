"""Transfer systems over F_2 for the (1,3) and (2,3) families.

A state is an unordered pair of boundary partitions (P1, P2).  Its value at n is the
number, mod 2, of ordered pairs of spanning forests (F1, F2) of the layer graph with
F1 compatible with P1, F2 compatible with P2 and F1, F2 partitioning the edge set.
That is the coefficient of the product of all edge variables in Phi^P1 * Phi^P2, and
it equals the point count [Phi^P1 Phi^P2]_2 whenever the degrees add up to the edge
count, which every reachable state satisfies.

Removing the two end vertices assigns each of their four edges to one of the
factors; each assignment rewrites the partitions onto the smaller layer graph.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from c2kit.graphs import iter_forest_masks
from c2kit.recurrences.layers import LAYER_FAMILIES, Label, LabelPartition, LayerFamily

MAX_STATES = 10_000

TransferState = tuple[LabelPartition, LabelPartition]


def make_state(p1: LabelPartition, p2: LabelPartition) -> TransferState:
    return (p1, p2) if not p2 < p1 else (p2, p1)


def state_text(fam: LayerFamily, s: TransferState) -> str:
    return f"{s[0].text(fam)};{s[1].text(fam)}"


def state_from_text(fam: LayerFamily, text: str) -> TransferState:
    a, b = text.split(";")
    return make_state(LabelPartition.from_text(fam, a), LabelPartition.from_text(fam, b))


def reflect_state(s: TransferState) -> TransferState:
    return make_state(s[0].reflect(), s[1].reflect())


# seed combinations: c2 at p=2 is the sum of these state values
SEEDS: dict[str, list[tuple[tuple[str, ...], tuple[str, ...]]]] = {
    "1,3": [(("af", "b", "e"), ())],
    "2,3": [(("be", "c", "d"), ("be", "cd")), (("be", "c", "d"), ("bc", "de"))],
}


def seed_combination(fam: LayerFamily) -> list[TransferState]:
    out = []
    for a, b in SEEDS[fam.name]:
        pa = fam.parse(a) if a else LabelPartition.psi()
        pb = fam.parse(b) if b else LabelPartition.psi()
        out.append(make_state(pa, pb))
    return out


def peel_partition(p: LabelPartition, x: Label, kept: list[Label]) -> list[LabelPartition]:
    """Partitions of the graph without ``x`` whose forests extend, via the edges from
    ``x`` to ``kept``, to exactly the forests compatible with ``p``.  Each result has
    multiplicity one; an empty list means no forest survives.
    """
    if p.is_psi():
        if not kept:
            return []
        if len(kept) == 1:
            return [p]
        return [LabelPartition.of([[kept[0]], [kept[1]]])]
    parts = [set(q) for q in p.parts]
    home = p.part_of(x)
    if not kept:
        if home is None or parts[home] != {x}:
            return []
        return [LabelPartition.of(q for i, q in enumerate(parts) if i != home)]
    owner = {lab: i for i, q in enumerate(parts) for lab in q}
    if len(kept) == 1:
        u = kept[0]
        if home is None:
            return [p]
        if owner.get(u, home) != home:
            return []
        new = [set(q) for q in parts]
        new[home] = (new[home] - {x}) | {u}
        return [LabelPartition.of(new)]
    u, v = kept
    candidates = [home] if home is not None else list(range(len(parts)))
    out = []
    for qi in candidates:
        if owner.get(u, qi) != qi or owner.get(v, qi) != qi:
            continue
        rest = sorted(parts[qi] - {x})
        others = [q for i, q in enumerate(parts) if i != qi]
        for bits in range(1 << len(rest)):
            q1 = {lab for i, lab in enumerate(rest) if bits >> i & 1}
            q2 = set(rest) - q1
            if u in q2 or v in q1:
                continue
            out.append(LabelPartition.of(others + [q1 | {u}, q2 | {v}]))
    return out


def _shift(p: LabelPartition) -> LabelPartition:
    if p.is_psi():
        return p
    parts = []
    for q in p.parts:
        moved = []
        for side, i in q:
            if i == 0:
                raise AssertionError("peeled vertex left in a partition")
            moved.append((side, i - 1))
        parts.append(moved)
    return LabelPartition.of(parts)


def _peel_both(p: LabelPartition, left: list[Label], right: list[Label]) -> list[LabelPartition]:
    # Dropping an isolated end can collapse the partition to Psi, which forgets labels.
    # Doing those drops last keeps the result independent of which end comes first,
    # so mirrored states get mirrored rows.
    ends = [(("L", 0), left), (("R", 0), right)]
    if len(right) > len(left):
        ends.reverse()
    (x1, k1), (x2, k2) = ends
    out = []
    for q in peel_partition(p, x1, k1):
        for r in peel_partition(q, x2, k2):
            out.append(_shift(r))
    return out


def transitions(fam: LayerFamily, s: TransferState) -> Counter:
    """Targets one layer pair down, with multiplicity mod 2."""
    ln, rn = fam.end_neighbours("L"), fam.end_neighbours("R")
    counts: Counter = Counter()
    for bits in range(16):
        side = [bits >> i & 1 for i in range(4)]
        l1 = [u for u, b in zip(ln, side[:2]) if b == 0]
        l2 = [u for u, b in zip(ln, side[:2]) if b == 1]
        r1 = [u for u, b in zip(rn, side[2:]) if b == 0]
        r2 = [u for u, b in zip(rn, side[2:]) if b == 1]
        firsts = _peel_both(s[0], l1, r1)
        if not firsts:
            continue
        for a in firsts:
            for b in _peel_both(s[1], l2, r2):
                counts[make_state(a, b)] += 1
    return Counter({t: 1 for t, c in counts.items() if c % 2})


@dataclass
class RecurrenceSystem:
    family: str
    states: list[TransferState]
    transitions: np.ndarray  # row i: value of state i at n from the values at n - 2
    seed: list[TransferState]
    step: int = 2
    index: dict = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.index = {s: i for i, s in enumerate(self.states)}
        if any(s not in self.index for s in self.seed):
            raise ValueError("seed state missing from the state list")
        t = np.asarray(self.transitions, dtype=np.uint8)
        if t.shape != (len(self.states),) * 2 or t.max(initial=0) > 1:
            raise ValueError("transition matrix must be square with 0/1 entries")
        self.transitions = t

    @property
    def layer_family(self) -> LayerFamily:
        return LAYER_FAMILIES[self.family]

    def base(self, n: int) -> int:
        """Smallest n' = n mod 2 whose values seed the iteration."""
        m0 = self.layer_family.min_layers - 2
        b = m0 + self.layer_family.offset
        return b if (n - b) % 2 == 0 else b + 1

    def flip_permutation(self) -> list[int]:
        return [self.index[reflect_state(s)] for s in self.states]

    def seed_vector(self) -> np.ndarray:
        v = np.zeros(len(self.states), dtype=np.uint8)
        for s in self.seed:
            v[self.index[s]] ^= 1
        return v

    def to_json(self) -> str:
        fam = self.layer_family
        return json.dumps(
            {
                "family": self.family,
                "step": self.step,
                "states": [state_text(fam, s) for s in self.states],
                "seed": [state_text(fam, s) for s in self.seed],
                "transitions": [[int(x) for x in row] for row in self.transitions],
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "RecurrenceSystem":
        d = json.loads(text)
        fam = LAYER_FAMILIES[d["family"]]
        return cls(
            d["family"],
            [state_from_text(fam, s) for s in d["states"]],
            np.array(d["transitions"], dtype=np.uint8).reshape(len(d["states"]), len(d["states"])),
            [state_from_text(fam, s) for s in d["seed"]],
            d["step"],
        )


def build_transfer(family: str, cap: int = MAX_STATES) -> RecurrenceSystem:
    fam = LAYER_FAMILIES[family]
    seed = seed_combination(fam)
    states: list[TransferState] = []
    index: dict[TransferState, int] = {}
    rows: list[Counter] = []
    queue = list(dict.fromkeys(seed))
    for s in queue:
        index[s] = len(states)
        states.append(s)
    head = 0
    while head < len(states):
        row = transitions(fam, states[head])
        rows.append(row)
        for t in row:
            if t not in index:
                if len(states) >= cap:
                    raise RuntimeError(f"transfer state space exceeds {cap} states")
                index[t] = len(states)
                states.append(t)
        head += 1
    mat = np.zeros((len(states), len(states)), dtype=np.uint8)
    for i, row in enumerate(rows):
        for t in row:
            mat[i, index[t]] = 1
    return RecurrenceSystem(family, states, mat, seed)


def pair_count(fam: LayerFamily, s: TransferState, n: int) -> int:
    """Exact number of ordered forest pairs splitting the layer graph's edges."""
    g = fam.graph(n)
    first, second = s[0].resolve(fam, n), s[1].resolve(fam, n)
    if first is None or second is None:
        return 0
    full = (1 << g.edge_count) - 1
    others = set(iter_forest_masks(g, second))
    return sum(1 for mask in iter_forest_masks(g, first) if full ^ mask in others)


def seed_states(family: str, n: int, states: list[TransferState] | None = None) -> dict[TransferState, int]:
    """Values mod 2 of the given states (default: the seed combination) at size n."""
    fam = LAYER_FAMILIES[family]
    chosen = seed_combination(fam) if states is None else states
    return {s: pair_count(fam, s, n) % 2 for s in chosen}


def run_transfer(sys: RecurrenceSystem, seeds: dict[int, dict[TransferState, int]], n_target: int) -> int:
    """c2 at p=2 for size n_target.

    ``seeds[b]`` must cover every state at the base b of n_target's parity.  Below
    the base the seed combination is read off ``seeds[n_target]`` directly.
    """
    b = sys.base(n_target)
    if n_target < b:
        vals = _seed_values(seeds, n_target, seed_combination(sys.layer_family))
        return sum(vals[s] for s in seed_combination(sys.layer_family)) % 2
    vals = _seed_values(seeds, b, sys.states)
    v = np.array([vals[s] for s in sys.states], dtype=np.int64)
    t = sys.transitions.astype(np.int64)
    for _ in range((n_target - b) // sys.step):
        v = (t @ v) % 2
    return int(sys.seed_vector().astype(np.int64) @ v % 2)


def _seed_values(seeds: dict[int, dict[TransferState, int]], n: int, need: list[TransferState]) -> dict:
    if n not in seeds:
        raise KeyError(f"no seed values at n={n}")
    missing = [s for s in need if s not in seeds[n]]
    if missing:
        raise KeyError(f"seed values at n={n} miss {len(missing)} states")
    return seeds[n]


def base_seeds(sys: RecurrenceSystem, below: list[int] = ()) -> dict[int, dict[TransferState, int]]:
    """Brute-force values of every state at both base sizes, and of the seed
    combination at each size in ``below``."""
    out = {n: seed_states(sys.family, n, sys.states) for n in (sys.base(0), sys.base(1))}
    for n in below:
        if n < sys.base(n):
            out[n] = seed_states(sys.family, n)
    return out


def _in_span(basis: dict[int, int], v: int) -> tuple[bool, dict[int, int]]:
    # basis: leading bit -> reduced row, rows as python ints over GF(2)
    while v:
        top = v.bit_length() - 1
        if top not in basis:
            basis[top] = v
            return False, basis
        v ^= basis[top]
    return True, basis


def minimize(sys: RecurrenceSystem, base_values: dict[int, dict[TransferState, int]] | None = None) -> RecurrenceSystem:
    """Merge states whose values agree at every size from the bases on.

    Values from a base b evolve as T^k v_b; once T^k v_b lies in the span of the
    earlier vectors every later one does too, so comparing states on those columns
    decides equality for all k.  Rows of a merged class are summed mod 2.
    """
    values = base_values or base_seeds(sys)
    t = sys.transitions.astype(np.int64)
    columns = []
    for b in (sys.base(0), sys.base(1)):
        v = np.array([values[b][s] for s in sys.states], dtype=np.int64) % 2
        basis: dict[int, int] = {}
        while True:
            columns.append(v)
            done, basis = _in_span(basis, int("".join(map(str, v[::-1])) or "0", 2))
            if done:
                break
            v = (t @ v) % 2
    sig = np.array(columns, dtype=np.uint8).T
    rep_of: dict[bytes, int] = {}
    cls = []
    for row in sig:
        cls.append(rep_of.setdefault(row.tobytes(), len(rep_of)))
    reps = [0] * len(rep_of)
    for i in reversed(range(len(sys.states))):
        reps[cls[i]] = i
    mat = np.zeros((len(reps), len(reps)), dtype=np.int64)
    for new, old in enumerate(reps):
        np.add.at(mat[new], np.array(cls), t[old])
    seed = []
    for s in sys.seed:
        seed.append(sys.states[reps[cls[sys.index[s]]]])
    return RecurrenceSystem(sys.family, [sys.states[i] for i in reps], mat % 2, seed, sys.step)


def transfer_sequence(family: str, ns: list[int], reduce: bool = True) -> list[tuple[int, int]]:
    sys = build_transfer(family)
    seeds = base_seeds(sys, ns)
    if reduce:
        sys = minimize(sys, seeds)
    return [(n, run_transfer(sys, seeds, n)) for n in ns]


def flip_commutes(sys: RecurrenceSystem) -> bool:
    perm = sys.flip_permutation()
    t = sys.transitions
    return bool(np.array_equal(t[np.ix_(perm, perm)], t))


__all__ = [
    "MAX_STATES",
    "RecurrenceSystem",
    "TransferState",
    "base_seeds",
    "build_transfer",
    "flip_commutes",
    "make_state",
    "minimize",
    "pair_count",
    "peel_partition",
    "reflect_state",
    "run_transfer",
    "seed_combination",
    "seed_states",
    "transfer_sequence",
    "transitions",
]
