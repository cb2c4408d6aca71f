"""Exact sparse polynomials over the integers.

Two representations:

``MultilinearPoly``
    terms keyed by an edge-id bitmask.  Graph polynomials (Kirchhoff, Dodgson,
    spanning-forest) live here.  Symbolic products are only allowed between
    polynomials on disjoint variable sets; anything else goes through point-wise
    evaluation.

``Poly``
    general exponents, used for the denominator-reduction chain where squares of
    variables do occur.  A monomial is a single Python int holding one byte of
    exponent per variable, variable 0 in the most significant byte, so monomial
    products are integer additions and integer order is lexicographic order with
    x_0 > x_1 > ... .

Term order everywhere: lexicographic, variables by ascending id.  Sign
normalisation makes the leading coefficient positive.
"""

from __future__ import annotations

import heapq
import math
import re
from typing import Iterable, Mapping

MAX_VARS = 128
_BITS = 8
_EXP_MASK = (1 << _BITS) - 1


class PolyError(ValueError):
    pass


def _shift(v: int) -> int:
    if not 0 <= v < MAX_VARS:
        raise PolyError(f"variable id {v} outside 0..{MAX_VARS - 1}")
    return _BITS * (MAX_VARS - 1 - v)


def mask_vars(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _mask_lex_key(mask: int) -> int:
    # x_0 most significant: reverse the bit order within MAX_VARS bits
    key = 0
    for v in mask_vars(mask):
        key |= 1 << (MAX_VARS - 1 - v)
    return key


def _fmt_term(coeff: int, vars_exps: list[tuple[int, int]]) -> str:
    sign = "-" if coeff < 0 else "+"
    mono = "".join(f"x_{{{v}}}" + (f"^{e}" if e > 1 else "") for v, e in vars_exps)
    if not mono:
        return f"{sign} {abs(coeff)}"
    return f"{sign} {abs(coeff)}·{mono}"


_TERM_RE = re.compile(r"([+-])\s*(\d+)(?:·((?:x_\{\d+\}(?:\^\d+)?)+))?")
_VAR_RE = re.compile(r"x_\{(\d+)\}(?:\^(\d+))?")


def _parse_terms(text: str) -> list[tuple[int, list[tuple[int, int]]]]:
    text = text.strip()
    if text == "0":
        return []
    out = []
    pos = 0
    for m in _TERM_RE.finditer(text):
        if text[pos:m.start()].strip():
            raise PolyError(f"cannot parse polynomial near {text[pos:m.start()]!r}")
        coeff = int(m.group(2)) * (-1 if m.group(1) == "-" else 1)
        mono = [(int(v), int(e) if e else 1) for v, e in _VAR_RE.findall(m.group(3) or "")]
        out.append((coeff, mono))
        pos = m.end()
    if text[pos:].strip():
        raise PolyError(f"cannot parse polynomial tail {text[pos:]!r}")
    return out


class MultilinearPoly:
    """Multilinear polynomial with integer coefficients over edge variables."""

    __slots__ = ("terms", "universe")

    def __init__(self, terms: Mapping[int, int] | None = None, universe: Iterable[int] | None = None):
        clean = {m: int(c) for m, c in (terms or {}).items() if c}
        support = 0
        for m in clean:
            support |= m
        uni = frozenset(universe) if universe is not None else frozenset(mask_vars(support))
        uni_mask = sum(1 << v for v in uni)
        if support & ~uni_mask:
            raise PolyError("term support outside the declared universe")
        self.terms: dict[int, int] = clean
        self.universe: frozenset[int] = uni

    # -- constructors
    @classmethod
    def constant(cls, c: int, universe: Iterable[int] = ()) -> "MultilinearPoly":
        return cls({0: c} if c else {}, universe)

    @classmethod
    def var(cls, v: int) -> "MultilinearPoly":
        return cls({1 << v: 1}, [v])

    # -- basic queries
    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            return self.terms == ({0: other} if other else {})
        return isinstance(other, MultilinearPoly) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __repr__(self) -> str:
        return f"MultilinearPoly({self.to_text()})"

    @property
    def support(self) -> int:
        s = 0
        for m in self.terms:
            s |= m
        return s

    def degrees(self) -> set[int]:
        return {m.bit_count() for m in self.terms}

    def degree(self) -> int:
        return max((m.bit_count() for m in self.terms), default=-1)

    # -- arithmetic
    def _combine(self, other: "MultilinearPoly", sign: int) -> "MultilinearPoly":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + sign * c
        return MultilinearPoly(out, self.universe | other.universe)

    def __add__(self, other: "MultilinearPoly") -> "MultilinearPoly":
        return self._combine(other, 1)

    def __sub__(self, other: "MultilinearPoly") -> "MultilinearPoly":
        return self._combine(other, -1)

    def __neg__(self) -> "MultilinearPoly":
        return MultilinearPoly({m: -c for m, c in self.terms.items()}, self.universe)

    def scale(self, k: int) -> "MultilinearPoly":
        return MultilinearPoly({m: k * c for m, c in self.terms.items()}, self.universe)

    def __mul__(self, other: "MultilinearPoly | int") -> "MultilinearPoly":
        if isinstance(other, int):
            return self.scale(other)
        return poly_mul(self, other)

    __rmul__ = __mul__

    # -- variable operations
    def coefficient(self, v: int) -> "MultilinearPoly":
        """Coefficient of x_v (terms containing x_v, with x_v removed)."""
        bit = 1 << v
        return MultilinearPoly({m ^ bit: c for m, c in self.terms.items() if m & bit}, self.universe - {v})

    def set_zero(self, v: int) -> "MultilinearPoly":
        bit = 1 << v
        return MultilinearPoly({m: c for m, c in self.terms.items() if not m & bit}, self.universe - {v})

    def eval(self, point: Mapping[int, int], p: int) -> int:
        return poly_eval(self, point, p)

    # -- normal form and text
    def leading_mask(self) -> int | None:
        if not self.terms:
            return None
        return max(self.terms, key=_mask_lex_key)

    def normalized(self) -> tuple["MultilinearPoly", int]:
        """(sign-normalised polynomial, discarded sign)."""
        lead = self.leading_mask()
        if lead is None or self.terms[lead] > 0:
            return self, 1
        return -self, -1

    def to_poly(self) -> "Poly":
        out = {}
        for m, c in self.terms.items():
            key = 0
            for v in mask_vars(m):
                key += 1 << _shift(v)
            out[key] = c
        return Poly(out)

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        items = sorted(self.terms.items(), key=lambda mc: _mask_lex_key(mc[0]), reverse=True)
        return " ".join(_fmt_term(c, [(v, 1) for v in mask_vars(m)]) for m, c in items)

    @classmethod
    def from_text(cls, text: str, universe: Iterable[int] | None = None) -> "MultilinearPoly":
        terms: dict[int, int] = {}
        for c, mono in _parse_terms(text):
            if any(e != 1 for _, e in mono):
                raise PolyError("exponent > 1 in a multilinear polynomial")
            m = 0
            for v, _ in mono:
                m |= 1 << v
            terms[m] = terms.get(m, 0) + c
        return cls(terms, universe)


def poly_mul(f: MultilinearPoly, g: MultilinearPoly) -> MultilinearPoly:
    """Symbolic product of polynomials on disjoint variable sets."""
    if f.universe & g.universe:
        shared = sorted(f.universe & g.universe)
        raise PolyError(f"symbolic product of overlapping supports (shared variables {shared}); evaluate point-wise instead")
    out: dict[int, int] = {}
    for m1, c1 in f.terms.items():
        for m2, c2 in g.terms.items():
            out[m1 | m2] = out.get(m1 | m2, 0) + c1 * c2
    return MultilinearPoly(out, f.universe | g.universe)


def poly_eval(f: MultilinearPoly | "Poly", point: Mapping[int, int], p: int) -> int:
    """Value of ``f`` at ``point`` (edge id -> residue) modulo p."""
    if isinstance(f, Poly):
        return f.eval(point, p)
    missing = [v for v in f.universe if v not in point]
    if missing:
        raise PolyError(f"no value assigned to variables {sorted(missing)}")
    zero_mask = 0
    for v in f.universe:
        if point[v] % p == 0:
            zero_mask |= 1 << v
    total = 0
    for m, c in f.terms.items():
        if m & zero_mask:
            continue
        val = c
        for v in mask_vars(m):
            val = val * point[v] % p
        total += val
    return total % p


class Poly:
    """Sparse polynomial with arbitrary (< 256) exponents and integer coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[int, int] | None = None):
        self.terms: dict[int, int] = {m: int(c) for m, c in (terms or {}).items() if c}

    @classmethod
    def constant(cls, c: int) -> "Poly":
        return cls({0: c})

    @classmethod
    def var(cls, v: int, e: int = 1) -> "Poly":
        return cls({e << _shift(v): 1})

    @classmethod
    def from_exponents(cls, items: Iterable[tuple[Mapping[int, int], int]]) -> "Poly":
        out: dict[int, int] = {}
        for exps, c in items:
            key = 0
            for v, e in exps.items():
                if e:
                    key += e << _shift(v)
            out[key] = out.get(key, 0) + c
        return cls(out)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            return self.terms == ({0: other} if other else {})
        if isinstance(other, MultilinearPoly):
            other = other.to_poly()
        return isinstance(other, Poly) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __repr__(self) -> str:
        return f"Poly({self.to_text()})"

    def __add__(self, other: "Poly") -> "Poly":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Poly(out)

    def __sub__(self, other: "Poly") -> "Poly":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) - c
        return Poly(out)

    def __neg__(self) -> "Poly":
        return Poly({m: -c for m, c in self.terms.items()})

    def __mul__(self, other: "Poly | int") -> "Poly":
        if isinstance(other, int):
            return Poly({m: c * other for m, c in self.terms.items()})
        a, b = (self.terms, other.terms) if len(self.terms) <= len(other.terms) else (other.terms, self.terms)
        out: dict[int, int] = {}
        get = out.get
        for m1, c1 in a.items():
            for m2, c2 in b.items():
                k = m1 + m2
                out[k] = get(k, 0) + c1 * c2
        return Poly(out)

    __rmul__ = __mul__

    def square(self) -> "Poly":
        items = list(self.terms.items())
        out: dict[int, int] = {}
        get = out.get
        for i, (m1, c1) in enumerate(items):
            out[m1 + m1] = get(m1 + m1, 0) + c1 * c1
            d = 2 * c1
            for m2, c2 in items[i + 1:]:
                k = m1 + m2
                out[k] = get(k, 0) + d * c2
        return Poly(out)

    # -- structure
    def variables(self) -> list[int]:
        acc = 0
        for m in self.terms:
            acc |= m
        out = []
        for v in range(MAX_VARS):
            if (acc >> _shift(v)) & _EXP_MASK:
                out.append(v)
        return out

    def exponents(self, m: int) -> dict[int, int]:
        out = {}
        for v in range(MAX_VARS):
            e = (m >> _shift(v)) & _EXP_MASK
            if e:
                out[v] = e
        return out

    def degree_in(self, v: int) -> int:
        s = _shift(v)
        return max(((m >> s) & _EXP_MASK for m in self.terms), default=0)

    def coefficients_in(self, v: int) -> list["Poly"]:
        """[f_0, f_1, ..., f_d] with f = sum_k f_k x_v^k."""
        s = _shift(v)
        buckets: dict[int, dict[int, int]] = {}
        for m, c in self.terms.items():
            e = (m >> s) & _EXP_MASK
            buckets.setdefault(e, {})[m - (e << s)] = c
        d = max(buckets, default=0)
        return [Poly(buckets.get(k, {})) for k in range(d + 1)]

    @classmethod
    def from_coefficients(cls, coeffs: list["Poly"], v: int) -> "Poly":
        s = _shift(v)
        out: dict[int, int] = {}
        for k, f in enumerate(coeffs):
            for m, c in f.terms.items():
                out[m + (k << s)] = c
        return cls(out)

    def leading(self) -> tuple[int, int] | None:
        if not self.terms:
            return None
        m = max(self.terms)
        return m, self.terms[m]

    def normalized(self) -> tuple["Poly", int]:
        lead = self.leading()
        if lead is None or lead[1] > 0:
            return self, 1
        return -self, -1

    def content(self) -> int:
        g = 0
        for c in self.terms.values():
            g = math.gcd(g, c)
        return g

    def is_multilinear(self) -> bool:
        return all(e <= 1 for m in self.terms for e in self.exponents(m).values())

    def to_multilinear(self) -> MultilinearPoly:
        out = {}
        for m, c in self.terms.items():
            mask = 0
            for v, e in self.exponents(m).items():
                if e != 1:
                    raise PolyError("polynomial is not multilinear")
                mask |= 1 << v
            out[mask] = c
        return MultilinearPoly(out)

    def eval(self, point: Mapping[int, int], p: int) -> int:
        total = 0
        for m, c in self.terms.items():
            val = c
            for v, e in self.exponents(m).items():
                if v not in point:
                    raise PolyError(f"no value assigned to variable {v}")
                val = val * pow(point[v], e, p) % p
            total += val
        return total % p

    def divide_exact(self, d: "Poly") -> "Poly | None":
        """Quotient q with q*d == self, or None when d does not divide self."""
        if not d.terms:
            raise ZeroDivisionError("division by the zero polynomial")
        dm, dc = d.leading()
        dexp = self.exponents(dm)
        dterms = list(d.terms.items())
        r = dict(self.terms)
        heap = [-m for m in r]
        heapq.heapify(heap)
        q: dict[int, int] = {}
        while heap:
            rm = -heapq.heappop(heap)
            rc = r.get(rm, 0)
            if not rc:
                continue
            while heap and heap[0] == -rm:
                heapq.heappop(heap)
            if rc % dc:
                return None
            rexp = self.exponents(rm)
            if any(rexp.get(v, 0) < e for v, e in dexp.items()):
                return None
            qm, qc = rm - dm, rc // dc
            q[qm] = qc
            for m, c in dterms:
                k = qm + m
                old = r.get(k, 0)
                if not old:
                    heapq.heappush(heap, -k)
                r[k] = old - qc * c
        return Poly(q)

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        return " ".join(
            _fmt_term(self.terms[m], sorted(self.exponents(m).items())) for m in sorted(self.terms, reverse=True)
        )

    @classmethod
    def from_text(cls, text: str) -> "Poly":
        return cls.from_exponents((dict(mono), c) for c, mono in _parse_terms(text))


def _isqrt_exact(n: int) -> int | None:
    if n < 0:
        return None
    r = math.isqrt(n)
    return r if r * r == n else None


def discriminant_sqrt(f: Poly | MultilinearPoly) -> Poly | None:
    """g with g*g == f (leading coefficient positive), or None if f is not a square.

    Peels the lowest-id variable x: f = sum f_k x^k, the root's top coefficient is
    the root of f_{2m}, the others come from exact divisions by 2*g_m.  The final
    squaring check is always performed.
    """
    if isinstance(f, MultilinearPoly):
        f = f.to_poly()
    g = _sqrt_rec(f)
    if g is None:
        return None
    if g.square() != f:
        return None
    return g.normalized()[0]


def _sqrt_rec(f: Poly) -> Poly | None:
    if not f.terms:
        return Poly()
    vs = f.variables()
    if not vs:
        r = _isqrt_exact(f.terms.get(0, 0))
        return None if r is None else Poly.constant(r)
    x = vs[0]
    coeffs = f.coefficients_in(x)
    d = len(coeffs) - 1
    if d % 2:
        return None
    m = d // 2
    top = _sqrt_rec(coeffs[d])
    if top is None or not top.terms:
        return None
    two_top = top * 2
    g: list[Poly | None] = [None] * (m + 1)
    g[m] = top
    for j in range(1, m + 1):
        # coefficient of x^(2m-j): 2 g_m g_{m-j} + sum over the already-known g's
        rest = coeffs[d - j]
        for a in range(m - j + 1, m + 1):
            b = 2 * m - j - a
            if m - j < b <= m and a <= b:
                term = g[a] * g[b]
                rest = rest - (term if a == b else term * 2)
        q = rest.divide_exact(two_top)
        if q is None:
            return None
        g[m - j] = q
    return Poly.from_coefficients(g, x)  # type: ignore[arg-type]
