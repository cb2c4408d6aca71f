"""Value tables of polynomials over all of F_p^N.

A table is a flat int64 array of length p^N indexed like the point counter: digit
``i`` of the index (base p, least significant first) is the value of the i-th
counted variable.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from c2kit.algebra.poly import MultilinearPoly, Poly

TermList = Iterable[tuple[Sequence[int], int]]


def _reduce_exponent(e: int, p: int) -> int:
    # x^e = x^(((e - 1) mod (p - 1)) + 1) on F_p for e >= 1
    return 0 if e == 0 else (e - 1) % (p - 1) + 1


def table_from_terms(terms: TermList, nvars: int, p: int) -> np.ndarray:
    """Values at every point of F_p^nvars; ``terms`` holds (exponent vector, coefficient)."""
    if p == 2:
        return _table_gf2(terms, nvars)
    coeffs = np.zeros(p**nvars, dtype=np.int64)
    weights = [p**i for i in range(nvars)]
    for exps, c in terms:
        idx = 0
        for i, e in enumerate(exps):
            if e:
                idx += _reduce_exponent(e, p) * weights[i]
        coeffs[idx] = (coeffs[idx] + c) % p
    vander = np.array([[pow(x, e, p) if e else 1 for e in range(p)] for x in range(p)], dtype=np.int64)
    t = coeffs.reshape((p,) * nvars) if nvars else coeffs.reshape(())
    # numpy axis k holds variable nvars - 1 - k
    for axis in range(nvars):
        t = np.moveaxis(np.tensordot(vander, t, axes=([1], [axis])), 0, axis) % p
    return np.ascontiguousarray(t).reshape(-1)


def _table_gf2(terms: TermList, nvars: int) -> np.ndarray:
    a = np.zeros(1 << nvars, dtype=np.uint8)
    for exps, c in terms:
        if c & 1:
            mask = 0
            for i, e in enumerate(exps):
                if e:
                    mask |= 1 << i
            a[mask] ^= 1
    # subset-sum transform mod 2: value at x = sum of coefficients of monomials inside supp(x)
    for i in range(nvars):
        view = a.reshape(-1, 2, 1 << i)
        view[:, 1, :] ^= view[:, 0, :]
    return a.astype(np.int64)


def poly_terms(f: MultilinearPoly | Poly, variables: Sequence[int]) -> list[tuple[list[int], int]]:
    """Exponent vectors of ``f`` positioned along ``variables``; other variables are an error."""
    pos = {v: i for i, v in enumerate(variables)}
    out = []
    if isinstance(f, MultilinearPoly):
        for m, c in f.terms.items():
            exps = [0] * len(variables)
            while m:
                low = m & -m
                v = low.bit_length() - 1
                if v not in pos:
                    raise ValueError(f"variable {v} is not among the counted variables")
                exps[pos[v]] = 1
                m ^= low
            out.append((exps, c))
    else:
        for m, c in f.terms.items():
            exps = [0] * len(variables)
            for v, e in f.exponents(m).items():
                if v not in pos:
                    raise ValueError(f"variable {v} is not among the counted variables")
                exps[pos[v]] = e
            out.append((exps, c))
    return out


def value_table(f: MultilinearPoly | Poly, variables: Sequence[int], p: int) -> np.ndarray:
    return table_from_terms(poly_terms(f, variables), len(variables), p)


def mpoly_table(f, variables: Sequence[int], p: int) -> np.ndarray:
    """Value table of a FLINT polynomial whose generators are indexed by edge id."""
    others = set(range(f.context().nvars())) - set(variables)
    degs = f.degrees()
    if any(degs[v] > 0 for v in others):
        raise ValueError("polynomial depends on variables outside the counted set")
    terms = (([exps[v] for v in variables], int(c)) for exps, c in f.to_dict().items())
    return table_from_terms(terms, len(variables), p)
