"""Dense matrices over F_p."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from c2kit.kernels import det_gf2_rows, det_mod_p_inplace


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


def check_prime(p: int) -> int:
    p = int(p)
    if not is_prime(p) or p > 2**31:
        raise ValueError(f"modulus must be a prime <= 2^31 (got {p})")
    return p


@dataclass(frozen=True)
class FpMatrix:
    p: int
    entries: np.ndarray

    def __post_init__(self) -> None:
        check_prime(self.p)
        arr = np.asarray(self.entries, dtype=np.int64) % self.p
        if arr.ndim != 2:
            raise ValueError("FpMatrix needs a 2-d array")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


def pack_rows_gf2(entries: np.ndarray) -> np.ndarray:
    """Pack a 0/1 matrix with at most 64 columns into one uint64 per row."""
    rows, cols = entries.shape
    if cols > 64:
        raise ValueError("bit-packed F_2 rows hold at most 64 columns")
    weights = np.left_shift(np.uint64(1), np.arange(cols, dtype=np.uint64))
    return ((entries.astype(np.uint64) & np.uint64(1)) * weights).sum(axis=1, dtype=np.uint64) if cols else np.zeros(rows, np.uint64)


def det_fp(m: FpMatrix, *, packed: bool | None = None) -> int:
    """Determinant mod p.  For p = 2 the bit-packed XOR elimination is used by default."""
    rows, cols = m.shape
    if rows != cols:
        raise ValueError(f"determinant of a non-square {rows}x{cols} matrix")
    if rows == 0:
        return 1 % m.p
    if packed is None:
        packed = m.p == 2 and rows <= 64
    if packed:
        if m.p != 2:
            raise ValueError("the packed path is F_2 only")
        return int(det_gf2_rows(pack_rows_gf2(m.entries), rows))
    return int(det_mod_p_inplace(m.entries.copy(), m.p))
