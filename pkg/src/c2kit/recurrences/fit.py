"""Fitting step-2 recurrences to c2 sequences."""

from __future__ import annotations

from typing import Sequence

from c2kit.algebra.recurrence import (
    LinearRecurrence,
    berlekamp_massey,
    fp_poly_lcm,
    recurrence_from_charpoly,
    run_recurrence,
    split_transient,
)
from c2kit.recurrences.families import FamilySpec, c2_sequence


class InsufficientTerms(ValueError):
    pass


def fit_values(values: Sequence[int], p: int, min_terms: int = 4) -> LinearRecurrence:
    """Step-2 recurrence for a sequence listed at consecutive n.

    Each parity class gets its own Berlekamp-Massey fit; the result uses the lcm of
    the two characteristic polynomials, which annihilates both classes.
    """
    if len(values) < 2 * min_terms:
        raise InsufficientTerms(f"need at least {2 * min_terms} terms, got {len(values)}")
    polys, starts = [], []
    for parity in (0, 1):
        sub = [int(v) % p for v in values[parity::2]]
        rec = berlekamp_massey(sub, p)
        if 2 * rec.order > len(sub):
            raise InsufficientTerms(f"parity {parity}: order {rec.order} from only {len(sub)} terms")
        poly, start = split_transient(rec)
        polys.append(poly)
        starts.append(2 * start + parity - 1 if start else 0)
    lcm = fp_poly_lcm(polys[0], polys[1], p)
    order = len(lcm) - 1
    start = max(starts + [2 * order])
    return recurrence_from_charpoly(lcm, p, 2, start)


def fit_recurrence(fam: FamilySpec, route: str = "direct", min_terms: int = 4) -> LinearRecurrence:
    """Fit the family's c2 values over its whole range, computed by ``route``."""
    return fit_values([v for _, v in c2_sequence(fam, route)], fam.p, min_terms)


def extend(rec: LinearRecurrence, values: Sequence[int], total: int) -> list[int]:
    """The sequence continued by ``rec`` to ``total`` terms."""
    seeds = list(values[: max(rec.start or 0, 1)])
    return run_recurrence(rec, seeds, max(0, total - len(seeds)))[:total]


__all__ = ["InsufficientTerms", "extend", "fit_recurrence", "fit_values"]
