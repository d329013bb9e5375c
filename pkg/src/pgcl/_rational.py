"""Exact rational backend for the evaluation kernels.

``gmpy2.mpq`` is used when importable; ``fractions.Fraction`` otherwise.
Set ``PGCL_PURE_PYTHON=1`` to force the fallback.  Public values crossing
the package API are always ``Fraction``.
"""
import os
from fractions import Fraction

BACKEND = "fractions"
Q = Fraction

if not os.environ.get("PGCL_PURE_PYTHON"):
    try:
        from gmpy2 import mpq as Q  # noqa: F811

        BACKEND = "gmpy2"
    except ImportError:  # pragma: no cover - depends on environment
        pass

ZERO = Q(0)
ONE = Q(1)


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    return Fraction(int(x.numerator), int(x.denominator))


def to_q(x):
    if BACKEND == "fractions":
        return Fraction(x)
    if isinstance(x, Fraction):
        return Q(x.numerator, x.denominator)
    return Q(x)
