"""Orthoplex bound for antipodal codes.

The map ``phi(x) = (x x^T - I/n) / sqrt(1 - 1/n)`` sends unit vectors of
``R^n`` to unit vectors in the traceless symmetric matrices, with
``<phi(x), phi(y)> = P_2^n(<x, y>)``.  Applying the orthoplex (Rankin)
bound there shows that an antipodal code of ``N`` points with
``n(n+1)/2 < N/2 <= n(n+1) - 2`` has some inner product at least
``1/sqrt(n)`` in absolute value.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .codes import Code, verify_code
from .exact_arith import QuadNumber, Scalar, sign, sqrt_exact, to_exact
from .polynomials import UniPoly, gegenbauer, gegenbauer_coefficients

__all__ = [
    "OrthoplexVerdict",
    "applicable_bound",
    "transform_code",
    "check_code",
    "phi",
    "phi_inner",
]


@dataclass(frozen=True)
class OrthoplexVerdict:
    applicable: bool
    bound_cos: Scalar
    code_max_cos: Scalar | None
    status: str  # meets | sharp | violates | not_applicable
    n: int = 0
    lines: int = 0
    inner_products: tuple = ()
    squared: bool = False

    def to_text(self) -> str:
        if self.status == "not_applicable":
            return f"orthoplex bound not applicable (n={self.n}, N/2={self.lines})"
        best = "outside the field" if self.code_max_cos is None else self.code_max_cos
        head = f"{self.status} at {best}" if self.status == "sharp" else \
            f"{self.status}: max cos {best}, bound {self.bound_cos}"
        ips = ", ".join(str(x) for x in self.inner_products)
        label = "squared inner products" if self.squared else "inner products"
        return f"{head}\n  n={self.n}, N/2={self.lines}\n  {label}: {ips}"


def _bound(n: int) -> Scalar:
    r = sqrt_exact(Fraction(1, n))
    return r if r is not None else QuadNumber.sqrt(Fraction(1, n))


def applicable_bound(n: int, N_antipodal: int) -> tuple[bool, Scalar]:
    """Whether the bound applies to ``N_antipodal`` points in ``R^n``, and ``1/sqrt(n)``."""
    if n < 2:
        raise ValueError("need n >= 2")
    if N_antipodal % 2:
        raise ValueError("an antipodal code has an even number of points")
    half = N_antipodal // 2
    ok = n * (n + 1) // 2 < half <= n * (n + 1) - 2
    return ok, _bound(n)


def _check_positive_definite(f: UniPoly, n: int) -> None:
    if f(Fraction(1)) != 1:
        raise ValueError("f(1) must equal 1")
    coeffs = gegenbauer_coefficients(f, n)
    if any(sign(a) < 0 for a in coeffs):
        raise ValueError("f has a negative Gegenbauer coefficient")


def transform_code(c: Code, f: UniPoly | None = None) -> list[list[Scalar]]:
    """Gram matrix ``f(<x, y>)`` over one representative per line.

    The default ``f = P_2^n`` gives the Gram matrix of the images ``phi(x)``.
    """
    if c.space == "sphere" and not c.antipodal:
        raise ValueError("transform_code needs an antipodal code")
    n = c.n
    f = gegenbauer(n, 2) if f is None else f
    _check_positive_definite(f, n)
    m = len(c.points)
    if c.space == "projective" and all(a == 0 for a in f.coeffs[1::2]):
        # even f depends on cos^2 only, which is exact for any lifts
        g = UniPoly(f.coeffs[0::2])
        cs = c.cos_squared
        return [[g(cs[i][j]) for j in range(m)] for i in range(m)]
    cos = c.as_antipodal().cosines
    return [[f(cos[i][j]) for j in range(m)] for i in range(m)]


def phi(x: Sequence) -> list[list[Scalar]]:
    """``(x x^T - I/n) / sqrt(1 - 1/n)`` for an exact unit vector ``x``."""
    v = [to_exact(a) for a in x]
    n = len(v)
    if n < 2:
        raise ValueError("need n >= 2")
    if sum((a * a for a in v), Fraction(0)) != 1:
        raise ValueError("x must be a unit vector")
    scale2 = Fraction(n, n - 1)
    s = sqrt_exact(scale2)
    if s is None:
        s = QuadNumber.sqrt(scale2)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            e = v[i] * v[j] - (Fraction(1, n) if i == j else 0)
            row.append(e * s)
        out.append(row)
    return out


def phi_inner(a: Sequence[Sequence], b: Sequence[Sequence]) -> Scalar:
    """Frobenius inner product of two matrices."""
    total: Scalar = Fraction(0)
    for ra, rb in zip(a, b):
        for x, y in zip(ra, rb):
            total = total + x * y
    return total


def check_code(c: Code) -> OrthoplexVerdict:
    """Compare an antipodal code (or a line set) with the orthoplex bound."""
    if c.space == "sphere" and not c.antipodal:
        raise ValueError("check_code needs an antipodal code or a set of lines")
    lines = len(c.points)
    applicable, bound = applicable_bound(c.n, 2 * lines)
    report = verify_code(c, bound)
    best = report.max_cos
    if c.space == "projective":
        # squared cosines are exact for any lifts; signs are lift dependent
        ips = tuple(sorted(c.squared_inner_products(), key=float))
    else:
        ips = tuple(sorted(c.inner_products(), key=float))
    if not applicable:
        return OrthoplexVerdict(False, bound, best, "not_applicable", c.n, lines, ips, c.space == "projective")
    st = sign(report.max_cos_squared - bound * bound)
    status = "sharp" if st == 0 else ("meets" if st > 0 else "violates")
    return OrthoplexVerdict(True, bound, best, status, c.n, lines, ips, c.space == "projective")
