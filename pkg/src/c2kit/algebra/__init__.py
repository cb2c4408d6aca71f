"""Exact arithmetic: F_p matrices, sparse integer polynomials, linear recurrences."""

from c2kit.algebra.fp import FpMatrix, check_prime, det_fp, is_prime
from c2kit.algebra.poly import MultilinearPoly, Poly, PolyError, discriminant_sqrt, poly_eval, poly_mul
from c2kit.algebra.recurrence import LinearRecurrence, berlekamp_massey, divides, run_recurrence

__all__ = [
    "FpMatrix",
    "LinearRecurrence",
    "MultilinearPoly",
    "Poly",
    "PolyError",
    "berlekamp_massey",
    "check_prime",
    "det_fp",
    "discriminant_sqrt",
    "divides",
    "is_prime",
    "poly_eval",
    "poly_mul",
    "run_recurrence",
]
