"""Compiled inner loops: determinants over F_p and Z, and point-counting sweeps.

Everything here works on plain numpy arrays so the callers own all bookkeeping.
A point of F_p^N is addressed by its mixed-radix index; digit ``i`` is the value of
variable ``i``.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# ---------------------------------------------------------------- determinants


@njit(cache=True, nogil=True)
def _inv_mod(a, p):
    # extended Euclid; a is nonzero mod p
    t, newt = 0, 1
    r, newr = p, a % p
    while newr != 0:
        q = r // newr
        t, newt = newt, t - q * newt
        r, newr = newr, r - q * newr
    if t < 0:
        t += p
    return t


@njit(cache=True, nogil=True)
def det_mod_p_inplace(m, p):
    """Determinant of the square int64 matrix ``m`` modulo ``p``; destroys ``m``."""
    n = m.shape[0]
    det = 1
    for c in range(n):
        piv = -1
        for r in range(c, n):
            if m[r, c] % p != 0:
                piv = r
                break
        if piv < 0:
            return 0
        if piv != c:
            for k in range(c, n):
                tmp = m[c, k]
                m[c, k] = m[piv, k]
                m[piv, k] = tmp
            det = -det
        pv = m[c, c] % p
        det = (det * pv) % p
        inv = _inv_mod(pv, p)
        for r in range(c + 1, n):
            f = (m[r, c] % p) * inv % p
            if f != 0:
                for k in range(c, n):
                    m[r, k] = (m[r, k] - f * m[c, k]) % p
    return det % p


@njit(cache=True, nogil=True)
def det_gf2_rows(rows, n):
    """Determinant over F_2 of an n x n matrix packed one uint64 row per entry (n <= 64).

    ``rows`` is modified.
    """
    one = np.uint64(1)
    for c in range(n):
        bit = one << np.uint64(c)
        piv = -1
        for r in range(c, n):
            if rows[r] & bit:
                piv = r
                break
        if piv < 0:
            return 0
        if piv != c:
            tmp = rows[c]
            rows[c] = rows[piv]
            rows[piv] = tmp
        pr = rows[c]
        for r in range(c + 1, n):
            if rows[r] & bit:
                rows[r] ^= pr
    return 1


@njit(cache=True, nogil=True)
def det_bareiss_inplace(m):
    """Exact integer determinant (fraction-free Bareiss); entries must stay within int64."""
    n = m.shape[0]
    sign = 1
    prev = 1
    for c in range(n - 1):
        if m[c, c] == 0:
            piv = -1
            for r in range(c + 1, n):
                if m[r, c] != 0:
                    piv = r
                    break
            if piv < 0:
                return 0
            for k in range(n):
                tmp = m[c, k]
                m[c, k] = m[piv, k]
                m[piv, k] = tmp
            sign = -sign
        for r in range(c + 1, n):
            for k in range(c + 1, n):
                m[r, k] = (m[r, k] * m[c, c] - m[r, c] * m[c, k]) // prev
        prev = m[c, c]
    if n == 0:
        return 1
    return sign * m[n - 1, n - 1]


# ---------------------------------------------------------------- evaluation sweeps
#
# A "determinant combination" is described by
#   base:   (K, S, S) int64, the K matrices with all variables set to zero
#   vpos:   (K, N, 2) int64, row/col of variable v inside matrix k (-1 if absent)
#   terms:  (T, K) int64 exponent table; value = sum_t sign_t * prod_k det_k ** terms[t, k]
#   signs:  (T,) int64
# Variables only ever sit on diagonals of M, so each appears at most once per matrix.


@njit(cache=True, nogil=True)
def _combo_value_mod_p(dets, terms, signs, p):
    total = 0
    for t in range(terms.shape[0]):
        v = signs[t] % p
        for k in range(terms.shape[1]):
            for _ in range(terms[t, k]):
                v = v * dets[k] % p
        total = (total + v) % p
    return total


@njit(cache=True, nogil=True)
def count_zeros_detcombo(base, vpos, terms, signs, p, lo, hi):
    """Number of points with index in [lo, hi) where the combination vanishes mod p."""
    K, S = base.shape[0], base.shape[1]
    N = vpos.shape[1]
    digits = np.zeros(N, dtype=np.int64)
    work = np.empty((S, S), dtype=np.int64)
    dets = np.zeros(K, dtype=np.int64)
    idx = lo
    for i in range(N):
        digits[i] = idx % p
        idx //= p
    count = 0
    for _ in range(lo, hi):
        for k in range(K):
            for a in range(S):
                for b in range(S):
                    work[a, b] = base[k, a, b]
            for v in range(N):
                r = vpos[k, v, 0]
                if r >= 0:
                    work[r, vpos[k, v, 1]] = digits[v]
            dets[k] = det_mod_p_inplace(work, p)
        if _combo_value_mod_p(dets, terms, signs, p) == 0:
            count += 1
        # increment mixed-radix counter
        i = 0
        while i < N:
            digits[i] += 1
            if digits[i] < p:
                break
            digits[i] = 0
            i += 1
    return count


@njit(cache=True, nogil=True)
def count_zeros_detcombo_gf2(base_rows, vbits, terms, signs, lo, hi):
    """F_2 specialisation: matrices packed as uint64 rows, points enumerated in Gray order.

    ``base_rows``: (K, S) uint64; ``vbits``: (K, N, 2) int64 row index and column bit.
    Over F_2 the signs drop out and only the parity of each term matters.
    """
    K, S = base_rows.shape[0], base_rows.shape[1]
    N = vbits.shape[1]
    cur = base_rows.copy()
    work = np.empty(S, dtype=np.uint64)
    dets = np.zeros(K, dtype=np.int64)
    one = np.uint64(1)
    # point with index lo, then Gray-code walk; the set of visited points is the same
    # range only when [lo, hi) is a whole aligned block, which the caller guarantees.
    gray0 = lo ^ (lo >> 1)
    for v in range(N):
        if (gray0 >> v) & 1:
            for k in range(K):
                r = vbits[k, v, 0]
                if r >= 0:
                    cur[k, r] ^= one << np.uint64(vbits[k, v, 1])
    count = 0
    for idx in range(lo, hi):
        for k in range(K):
            for a in range(S):
                work[a] = cur[k, a]
            dets[k] = det_gf2_rows(work, S)
        total = 0
        for t in range(terms.shape[0]):
            v = signs[t] & 1
            for k in range(K):
                if terms[t, k] > 0:
                    v &= dets[k]
            total ^= v
        if total == 0:
            count += 1
        if idx + 1 < hi:
            nxt = idx + 1
            flip = nxt ^ (nxt >> 1) ^ idx ^ (idx >> 1)
            v = 0
            while (flip >> v) != 1:
                v += 1
            for k in range(K):
                r = vbits[k, v, 0]
                if r >= 0:
                    cur[k, r] ^= one << np.uint64(vbits[k, v, 1])
    return count


@njit(cache=True, nogil=True)
def count_zeros_gram_gf2(cycle_masks, h, lo, hi):
    """Zeros over F_2 of det(sum_e a_e c_e c_e^T), Gray-code walk over [lo, hi).

    ``cycle_masks[e]`` is the bitmask of the fundamental cycles through edge e; each
    toggle of a_e is the rank-one update "rows in c_e ^= c_e".
    """
    N = cycle_masks.shape[0]
    mat = np.zeros(h, dtype=np.uint64)
    work = np.empty(h, dtype=np.uint64)
    one = np.uint64(1)

    gray0 = lo ^ (lo >> 1)
    for e in range(N):
        if (gray0 >> e) & 1:
            c = cycle_masks[e]
            for r in range(h):
                if (c >> np.uint64(r)) & one:
                    mat[r] ^= c
    count = 0
    for idx in range(lo, hi):
        for r in range(h):
            work[r] = mat[r]
        if det_gf2_rows(work, h) == 0:
            count += 1
        if idx + 1 < hi:
            nxt = idx + 1
            flip = nxt ^ (nxt >> 1) ^ idx ^ (idx >> 1)
            e = 0
            while (flip >> e) != 1:
                e += 1
            c = cycle_masks[e]
            for r in range(h):
                if (c >> np.uint64(r)) & one:
                    mat[r] ^= c
    return count


@njit(cache=True, nogil=True)
def count_zeros_gram_mod_p(cycles, p, lo, hi):
    """Zeros mod p of det(C diag(a) C^T) for the (h, N) cycle matrix ``cycles``."""
    h, N = cycles.shape[0], cycles.shape[1]
    digits = np.zeros(N, dtype=np.int64)
    mat = np.zeros((h, h), dtype=np.int64)
    work = np.empty((h, h), dtype=np.int64)
    idx = lo
    for i in range(N):
        digits[i] = idx % p
        idx //= p
    for e in range(N):
        if digits[e] != 0:
            for r in range(h):
                for s in range(h):
                    mat[r, s] += digits[e] * cycles[r, e] * cycles[s, e]
    count = 0
    for _ in range(lo, hi):
        for r in range(h):
            for s in range(h):
                work[r, s] = mat[r, s] % p
        if det_mod_p_inplace(work, p) == 0:
            count += 1
        i = 0
        while i < N:
            old = digits[i]
            digits[i] += 1
            if digits[i] == p:
                digits[i] = 0
            delta = digits[i] - old
            for r in range(h):
                if cycles[r, i] != 0:
                    for s in range(h):
                        mat[r, s] += delta * cycles[r, i] * cycles[s, i]
            if digits[i] != 0:
                break
            i += 1
    return count


@njit(cache=True, nogil=True)
def boolean_cube_dets(base, vpos, lo, hi):
    """Exact integer determinants at the 0/1 points with index in [lo, hi)."""
    S = base.shape[0]
    N = vpos.shape[0]
    out = np.empty(hi - lo, dtype=np.int64)
    work = np.empty((S, S), dtype=np.int64)
    for idx in range(lo, hi):
        for a in range(S):
            for b in range(S):
                work[a, b] = base[a, b]
        for v in range(N):
            if (idx >> v) & 1:
                work[vpos[v, 0], vpos[v, 1]] = 1
        out[idx - lo] = det_bareiss_inplace(work)
    return out
