"""Linear recurrences over F_p: Berlekamp-Massey fitting, extension, divisibility."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from c2kit.algebra.fp import check_prime

# Polynomials over F_p as coefficient lists, lowest degree first, no trailing zeros.
FpPoly = list[int]


def _trim(a: FpPoly) -> FpPoly:
    while a and a[-1] == 0:
        a.pop()
    return a


def fp_poly_divmod(a: FpPoly, b: FpPoly, p: int) -> tuple[FpPoly, FpPoly]:
    a = _trim([x % p for x in a])
    b = _trim([x % p for x in b])
    if not b:
        raise ZeroDivisionError("division by the zero polynomial")
    inv = pow(b[-1], p - 2, p)
    q = [0] * max(len(a) - len(b) + 1, 0)
    r = a[:]
    while len(r) >= len(b):
        shift = len(r) - len(b)
        f = r[-1] * inv % p
        q[shift] = f
        for i, c in enumerate(b):
            r[shift + i] = (r[shift + i] - f * c) % p
        _trim(r)
    return _trim(q), r


def fp_poly_gcd(a: FpPoly, b: FpPoly, p: int) -> FpPoly:
    a, b = _trim([x % p for x in a]), _trim([x % p for x in b])
    while b:
        a, b = b, fp_poly_divmod(a, b, p)[1]
    if a:
        inv = pow(a[-1], p - 2, p)
        a = [x * inv % p for x in a]
    return a


def fp_poly_mul(a: FpPoly, b: FpPoly, p: int) -> FpPoly:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = (out[i + j] + x * y) % p
    return _trim(out)


def fp_poly_lcm(a: FpPoly, b: FpPoly, p: int) -> FpPoly:
    g = fp_poly_gcd(a, b, p)
    q, r = fp_poly_divmod(fp_poly_mul(a, b, p), g, p)
    assert not r
    inv = pow(q[-1], p - 2, p)
    return [x * inv % p for x in q]


@dataclass(frozen=True)
class LinearRecurrence:
    """s_n = sum_{i=1..r} c_i s_{n - step*i} for list positions n >= start.

    ``start`` defaults to step*r; Berlekamp-Massey can report a longer seed run
    when the sequence has a transient head.
    """

    p: int
    coeffs: tuple[int, ...]
    step: int = 1
    start: int | None = None

    def __post_init__(self) -> None:
        check_prime(self.p)
        if self.step not in (1, 2):
            raise ValueError("step must be 1 or 2")
        coeffs = tuple(int(c) % self.p for c in self.coeffs)
        if coeffs and coeffs[-1] == 0:
            raise ValueError("last coefficient must be nonzero (trim the order instead)")
        object.__setattr__(self, "coeffs", coeffs)
        if self.start is None:
            object.__setattr__(self, "start", self.step * len(coeffs))
        elif self.start < self.step * len(coeffs):
            raise ValueError("start cannot precede the first full window")

    @property
    def order(self) -> int:
        return len(self.coeffs)

    def charpoly(self) -> FpPoly:
        """x^(step*r) - sum c_i x^(step*(r-i)), lowest degree first."""
        r, s = self.order, self.step
        out = [0] * (s * r + 1)
        out[s * r] = 1
        for i, c in enumerate(self.coeffs, start=1):
            out[s * (r - i)] = (out[s * (r - i)] - c) % self.p
        return _trim(out)

    def describe(self) -> str:
        if not self.coeffs:
            return "s_n = 0"
        parts = []
        for i, c in enumerate(self.coeffs, start=1):
            if c:
                lag = f"s_(n-{self.step * i})"
                parts.append(lag if c == 1 else f"{c}*{lag}")
        return "s_n = " + " + ".join(parts) + f" (mod {self.p})"


def berlekamp_massey(seq: Sequence[int], p: int) -> LinearRecurrence:
    """Shortest linear feedback shift register over F_p generating ``seq``."""
    check_prime(p)
    s = [int(x) % p for x in seq]
    if len(s) < 2:
        raise ValueError("Berlekamp-Massey needs at least two terms")
    c = [1]  # connection polynomial, c[0] = 1
    b = [1]
    length, m, last = 0, 1, 1
    for n in range(len(s)):
        d = s[n]
        for i in range(1, length + 1):
            if i < len(c):
                d = (d + c[i] * s[n - i]) % p
        if d == 0:
            m += 1
            continue
        coef = d * pow(last, p - 2, p) % p
        t = c[:]
        if len(c) < len(b) + m:
            c = c + [0] * (len(b) + m - len(c))
        for i, x in enumerate(b):
            c[i + m] = (c[i + m] - coef * x) % p
        if 2 * length <= n:
            length, b, last, m = n + 1 - length, t, d, 1
        else:
            m += 1
    c = _trim(c)
    coeffs = tuple((-x) % p for x in c[1:])
    return LinearRecurrence(p, coeffs, 1, start=length)


def run_recurrence(rec: LinearRecurrence, seeds: Sequence[int], count: int) -> list[int]:
    """Seeds followed by ``count`` further terms."""
    assert rec.start is not None
    if len(seeds) < rec.start:
        raise ValueError(f"need at least {rec.start} seeds, got {len(seeds)}")
    out = [int(x) % rec.p for x in seeds]
    for _ in range(count):
        n = len(out)
        out.append(sum(c * out[n - rec.step * i] for i, c in enumerate(rec.coeffs, start=1)) % rec.p)
    return out


def divides(small: LinearRecurrence, big: LinearRecurrence) -> bool:
    """True when small's characteristic polynomial divides big's over F_p."""
    if small.p != big.p:
        raise ValueError("recurrences over different fields")
    return not fp_poly_divmod(big.charpoly(), small.charpoly(), small.p)[1]


def recurrence_from_charpoly(poly: FpPoly, p: int, step: int, start: int | None = None) -> LinearRecurrence:
    """Inverse of ``charpoly`` for a monic polynomial in y = x^step with nonzero constant term."""
    poly = _trim([x % p for x in poly])
    r = len(poly) - 1
    coeffs = tuple((-poly[r - i]) % p for i in range(1, r + 1))
    return LinearRecurrence(p, coeffs, step, start)


def split_transient(rec: LinearRecurrence) -> tuple[FpPoly, int]:
    """Characteristic polynomial in the lag variable (step ignored) and the seed length."""
    r = rec.order
    out = [0] * (r + 1)
    out[r] = 1
    for i, c in enumerate(rec.coeffs, start=1):
        out[r - i] = (-c) % rec.p
    assert rec.start is not None
    return _trim(out), rec.start // rec.step if rec.step > 1 else rec.start
