import json
from importlib import resources

import pytest

from c2kit.engine import c2_direct
from c2kit.recurrences.families import FamilySpec
from c2kit.recurrences.table23 import (
    COLUMNS,
    EQUATIONS,
    UnneededEntry,
    check_entry,
    derived_equations,
    load_table,
    sequence_value,
    table23_seeds,
    table23_sequence,
    table23_system,
)
from c2kit.recurrences.transfer import transfer_sequence

NAMES = tuple(EQUATIONS)


@pytest.fixture(scope="module")
def table():
    return load_table()


@pytest.fixture(scope="module")
def brute():
    table = load_table()
    return {n: {k: sequence_value(k, n, table) for k in NAMES} for n in range(7, 14)}


def test_loader_matches_file(table):
    raw = json.loads(resources.files("c2kit.recurrences").joinpath("data/table1.json").read_text())
    assert tuple(raw["columns"]) == COLUMNS
    assert {k: [table.rows[k][c] for c in COLUMNS] for k in table.rows} == raw["rows"]
    assert {k: list(v) for k, v in table.sequences.items()} == raw["sequences"]
    assert len(NAMES) == 22 and set(table.sequences) == set(NAMES)


def test_combination_parsing(table):
    assert table.entry("h2", "alpha") == {"f1": 1}
    assert all(table.entry(k, c) == {} for k in table.rows for c in COLUMNS if table.rows[k][c] == "0")


def test_star_entries_fail_loudly(table):
    stars = [k for k in table.rows if table.rows[k]["gamma"] == "*"]
    assert "h2" in stars
    with pytest.raises(UnneededEntry):
        table.entry("h2", "gamma")


def test_derived_differs_only_in_j_and_m(table):
    derived = derived_equations(table)
    diff = {k: set(derived[k]) ^ set(EQUATIONS[k]) for k in NAMES if set(derived[k]) != set(EQUATIONS[k])}
    assert diff == {"J": {("D", 4)}, "M": {("D", 4)}}


def test_brute_force_prefers_derived_j_and_m(table, brute):
    derived = derived_equations(table)
    for n in (11, 13):
        for name in ("J", "M"):
            assert brute[n][name] == sum(brute[n - lag][ref] for ref, lag in derived[name]) % 2
        assert brute[11]["J"] != sum(brute[11 - lag][ref] for ref, lag in EQUATIONS["J"]) % 2


def test_other_equations_hold_at_odd_sizes(brute):
    for n in (11, 13):
        for name in NAMES:
            if name in ("J", "M"):
                continue
            assert brute[n][name] == sum(brute[n - lag][ref] for ref, lag in EQUATIONS[name]) % 2


def test_w_breaks_at_twelve(brute):
    # W = [g h2] and the h2 delta entry is off at even sizes
    assert brute[12]["W"] != sum(brute[12 - lag][ref] for ref, lag in EQUATIONS["W"]) % 2


def test_entries_at_even_size(table):
    bad = [(k, c) for k in table.rows for c in COLUMNS if table.rows[k][c] != "*" and not check_entry(k, c, 12, table)]
    assert bad == [("h2", "delta")]


def test_entries_at_odd_size(table):
    # at odd sizes mirror-fixed forests survive in these entries
    bad = {(k, c) for k in table.rows for c in COLUMNS if table.rows[k][c] != "*" and not check_entry(k, c, 11, table)}
    assert bad == {
        ("b1", "beta"), ("b1", "gamma"), ("b2", "beta"), ("b3", "gamma"),
        ("d1", "beta"), ("d2", "beta"), ("d3", "beta"), ("h2", "delta"), ("h3", "delta"),
    }


def test_trivial_step_examples():
    ones = {n: {k: 1 for k in NAMES} for n in range(7, 11)}
    assert table23_system(ones, 11)[11]["A"] == 1
    seeds = {n: {k: 0 for k in NAMES} for n in range(7, 11)}
    seeds[9]["E"] = 1
    assert table23_system(seeds, 11)[11]["B"] == 1


def test_missing_seeds():
    with pytest.raises(ValueError, match="missing"):
        table23_system({})
    partial = {n: {k: 0 for k in NAMES} for n in range(7, 11)}
    del partial[9]["Q"]
    with pytest.raises(ValueError, match="n=9"):
        table23_system(partial)


def test_system_matches_direct():
    ns = range(7, 14)
    assert table23_sequence(ns, table23_seeds()) == [
        (n, c2_direct(FamilySpec("2,3", 2, n, n).graph(n), 2).value) for n in ns
    ]


def test_printed_system_diverges_at_seventeen():
    ns = list(range(7, 21))
    printed = dict(table23_sequence(ns))
    derived = dict(table23_sequence(ns, equations=derived_equations()))
    transfer = dict(transfer_sequence("2,3", ns))
    assert all(printed[n] == transfer[n] for n in range(7, 17))
    assert printed[17] != transfer[17] == 0
    assert all(derived[n] == transfer[n] for n in range(7, 20))
    assert derived[20] != transfer[20]
