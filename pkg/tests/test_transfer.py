import random

import numpy as np
import pytest

from c2kit.algebra import LinearRecurrence, MultilinearPoly, divides
from c2kit.engine import c2_coeff_p2, c2_direct
from c2kit.graph_polys import forest_poly
from c2kit.recurrences.families import FamilySpec
from c2kit.recurrences.fit import fit_values
from c2kit.recurrences.layers import C13, C23, LabelPartition
from c2kit.recurrences.transfer import (
    MAX_STATES,
    RecurrenceSystem,
    base_seeds,
    build_transfer,
    flip_commutes,
    make_state,
    minimize,
    pair_count,
    reflect_state,
    run_transfer,
    seed_combination,
    seed_states,
    transfer_sequence,
    transitions,
)


@pytest.fixture(scope="module")
def sys13():
    return build_transfer("1,3")


@pytest.fixture(scope="module")
def sys23():
    return build_transfer("2,3")


def forest_pair_parity(fam, s, n):
    """Independent value of a state: full-monomial parity of the two forest polynomials."""
    g = fam.graph(n)
    polys = []
    for part in s:
        resolved = part.resolve(fam, n)
        if resolved is None:
            return 0
        try:
            polys.append(forest_poly(g, resolved))
        except ValueError:
            return 0
    f, h = polys
    universe = range(g.edge_count)
    f, h = MultilinearPoly(f.terms, universe), MultilinearPoly(h.terms, universe)
    if not f or not h or f.degree() + h.degree() != g.edge_count:
        return pair_count(fam, s, n) % 2
    return c2_coeff_p2(f, h)


def test_state_spaces_are_closed(sys13, sys23):
    assert len(sys13.states) < MAX_STATES and len(sys23.states) < MAX_STATES
    for sys in (sys13, sys23):
        assert set(np.unique(sys.transitions)) <= {0, 1}
        assert all(s in sys.index for s in sys.seed)


def test_state_cap_is_enforced():
    with pytest.raises(RuntimeError, match="exceeds 5"):
        build_transfer("1,3", cap=5)


def test_flip_commutes(sys13, sys23):
    assert flip_commutes(sys13)
    assert flip_commutes(sys23)


def test_minimised_13_is_small(sys13):
    small = minimize(sys13)
    assert len(small.states) <= 64 < len(sys13.states)


def test_json_round_trip(sys13, tmp_path):
    small = minimize(sys13)
    text = small.to_json()
    back = RecurrenceSystem.from_json(text)
    assert back.states == small.states and back.seed == small.seed
    assert np.array_equal(back.transitions, small.transitions)
    assert back.to_json() == text


def test_system_validation():
    psi = LabelPartition.psi()
    s = make_state(psi, psi)
    with pytest.raises(ValueError, match="seed"):
        RecurrenceSystem("1,3", [s], np.eye(1, dtype=np.uint8), [make_state(C13.parse(["b", "e"]), psi)])
    with pytest.raises(ValueError, match="square"):
        RecurrenceSystem("1,3", [s], np.ones((1, 2), dtype=np.uint8), [s])


def _toy(mat):
    psi = LabelPartition.psi()
    states = [make_state(C13.parse(["b", "e"]), psi), make_state(C13.parse(["a", "f"]), psi)]
    return RecurrenceSystem("1,3", states, np.array(mat, dtype=np.uint8), states[:1]), states


def test_identity_system_is_constant():
    sys, states = _toy([[1, 0], [0, 1]])
    seeds = {b: {states[0]: 1, states[1]: 0} for b in (sys.base(0), sys.base(1))}
    assert {run_transfer(sys, seeds, n) for n in range(10, 40)} == {1}


def test_nilpotent_system_dies():
    sys, states = _toy([[0, 1], [0, 0]])
    seeds = {b: {states[0]: 1, states[1]: 1} for b in (sys.base(0), sys.base(1))}
    values = [run_transfer(sys, seeds, n) for n in range(10, 30)]
    assert values[-10:] == [0] * 10


def test_missing_seeds():
    sys, states = _toy([[1, 0], [0, 1]])
    with pytest.raises(KeyError, match="no seed"):
        run_transfer(sys, {}, 20)
    with pytest.raises(KeyError, match="miss"):
        run_transfer(sys, {b: {states[0]: 1} for b in (sys.base(0), sys.base(1))}, 20)


def test_seed_state_values_13():
    values = [sum(seed_states("1,3", n).values()) % 2 for n in range(7, 13)]
    assert values == [1, 0, 1, 0, 1, 0]


def test_one_part_is_psi():
    assert C13.parse(["bhe"]) == LabelPartition.psi()


def test_wrong_size_state_is_zero():
    # two spanning trees have 2m - 2 edges but the layer graph has only 2m - 4
    psi = LabelPartition.psi()
    for n in (9, 10, 11):
        assert pair_count(C13, make_state(psi, psi), n) == 0


@pytest.mark.parametrize("fam", [C13, C23], ids=["13", "23"])
def test_mirrored_states_have_equal_values(fam, sys13, sys23):
    sys = sys13 if fam is C13 else sys23
    rnd = random.Random(5)
    for s in rnd.sample(sys.states, 25):
        for n in (11, 12):
            assert pair_count(fam, s, n) == pair_count(fam, reflect_state(s), n)


@pytest.mark.parametrize("fam", [C13, C23], ids=["13", "23"])
def test_transitions_match_brute_force(fam, sys13, sys23):
    sys = sys13 if fam is C13 else sys23
    rnd = random.Random(17)
    for s in rnd.sample(sys.states, 30):
        for n in (12, 13):
            below = sum(pair_count(fam, t, n - 2) for t in transitions(fam, s)) % 2
            assert pair_count(fam, s, n) % 2 == below


def test_pair_count_matches_forest_polynomials(sys13):
    rnd = random.Random(23)
    for s in rnd.sample(sys13.states, 20):
        assert pair_count(C13, s, 11) % 2 == forest_pair_parity(C13, s, 11)


def test_13_matches_direct():
    ns = list(range(7, 15))
    got = transfer_sequence("1,3", ns)
    assert got == [(n, c2_direct(FamilySpec("1,3", 2, n, n).graph(n), 2).value) for n in ns]


def test_13_far_out(sys13):
    small = minimize(sys13)
    seeds = base_seeds(sys13)
    assert run_transfer(small, seeds, 51) == 1
    assert run_transfer(small, seeds, 50) == 0


def test_13_minimal_recurrence_divides_sextic():
    values = [v for _, v in transfer_sequence("1,3", list(range(7, 31)))]
    rec = fit_values(values, 2)
    assert divides(rec, LinearRecurrence(2, (1, 1, 1), step=2))


def test_23_matches_direct():
    ns = list(range(7, 15))
    got = transfer_sequence("2,3", ns)
    assert got == [(n, c2_direct(FamilySpec("2,3", 2, n, n).graph(n), 2).value) for n in ns]


def test_seed_combinations():
    assert len(seed_combination(C13)) == 1
    assert len(seed_combination(C23)) == 2
