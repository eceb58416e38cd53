"""Exact scalars and dense linear algebra over Q and Q(sqrt(q)).

Scalars are either :class:`fractions.Fraction` (or ``int``) or
:class:`QuadNumber`, an element ``a + b*sqrt(q)`` of a single quadratic
extension.  Arithmetic between a ``QuadNumber`` and a rational yields a
``QuadNumber`` unless the irrational part cancels, in which case a plain
``Fraction`` comes back.  Mixing two different radicals raises
:class:`ContextError`.

Matrices are tuples of row tuples.  Heavy rational work (row reduction of
the large constraint systems, characteristic polynomials of big blocks) is
delegated to FLINT through ``python-flint``; the division-free Berkowitz
routine and the pivoted elimination below stay pure Python so they work over
the quadratic extension and give an independent route for PSD decisions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, Sequence, Union

import flint

__all__ = [
    "QuadNumber",
    "ContextError",
    "AsymmetricMatrixError",
    "InconsistentSystemError",
    "Scalar",
    "to_exact",
    "sign",
    "sqrt_exact",
    "rational_parts",
    "common_q",
    "conjugate",
    "scalar_to_json",
    "scalar_from_json",
    "to_float",
    "matrix",
    "identity",
    "ones",
    "is_square",
    "is_symmetric",
    "matmul",
    "transpose",
    "charpoly",
    "psd_check",
    "mat_inner",
    "LinearEquation",
    "AffineSolution",
    "solve_affine",
    "rref",
    "nullspace",
    "to_fmpq_mat",
    "from_fmpq",
]


class ContextError(ValueError):
    """Operands live in different quadratic extensions."""


class AsymmetricMatrixError(ValueError):
    """A matrix that must be symmetric is not."""


class InconsistentSystemError(ValueError):
    """A linear system has no solution.

    ``certificate`` maps equation positions to multipliers whose combination
    of the left-hand sides vanishes identically while the combination of the
    right-hand sides equals ``residual`` (nonzero).
    """

    def __init__(self, message: str, certificate: dict, residual: Fraction):
        super().__init__(message)
        self.certificate = certificate
        self.residual = residual


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, flint.fmpq):
        return Fraction(int(x.p), int(x.q))
    if isinstance(x, flint.fmpz):
        return Fraction(int(x))
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def _is_rational_square(x: Fraction) -> bool:
    if x < 0:
        return False
    return math.isqrt(x.numerator) ** 2 == x.numerator and math.isqrt(x.denominator) ** 2 == x.denominator


def _rational_sqrt(x: Fraction) -> Fraction:
    return Fraction(math.isqrt(x.numerator), math.isqrt(x.denominator))


class QuadNumber:
    """The number ``a + b*sqrt(q)`` with rational ``a, b`` and ``q``.

    ``q`` must be positive and not the square of a rational.  Instances are
    immutable and hashable; equality is exact.
    """

    __slots__ = ("a", "b", "q")

    def __init__(self, a, b, q):
        a, b, q = _frac(a), _frac(b), _frac(q)
        if q <= 0 or _is_rational_square(q):
            raise ValueError(f"q={q} must be a positive non-square rational")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "q", q)

    def __setattr__(self, name, value):
        raise AttributeError("QuadNumber is immutable")

    def __reduce__(self):
        return (QuadNumber, (self.a, self.b, self.q))

    @staticmethod
    def sqrt(q) -> "Scalar":
        """Exact ``sqrt(q)``; a Fraction when ``q`` is a rational square."""
        q = _frac(q)
        if _is_rational_square(q):
            return _rational_sqrt(q)
        return QuadNumber(0, 1, q)

    # -- helpers -------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, QuadNumber):
            if other.q != self.q:
                raise ContextError(f"sqrt({self.q}) and sqrt({other.q}) cannot be mixed")
            return other.a, other.b
        if isinstance(other, (int, Fraction, Rational)):
            return Fraction(other), Fraction(0)
        return None

    def _make(self, a, b):
        if b == 0:
            return a
        return QuadNumber(a, b, self.q)

    # -- arithmetic ----------------------------------------------------
    def __add__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        return self._make(self.a + c[0], self.b + c[1])

    __radd__ = __add__

    def __sub__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        return self._make(self.a - c[0], self.b - c[1])

    def __rsub__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        return self._make(c[0] - self.a, c[1] - self.b)

    def __mul__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        a, b = c
        return self._make(self.a * a + self.b * b * self.q, self.a * b + self.b * a)

    __rmul__ = __mul__

    def norm(self) -> Fraction:
        """Field norm ``a^2 - q b^2``."""
        return self.a * self.a - self.q * self.b * self.b

    def __truediv__(self, other):
        if isinstance(other, QuadNumber):
            return self * other.inverse()
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        return self._make(self.a / c[0], self.b / c[0])

    def __rtruediv__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        return self.inverse() * c[0]

    def inverse(self):
        n = self.norm()
        return self._make(self.a / n, -self.b / n)

    def __pow__(self, e: int):
        if not isinstance(e, int):
            return NotImplemented
        if e < 0:
            return self.inverse() ** (-e)
        result: Scalar = Fraction(1)
        base: Scalar = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __neg__(self):
        return QuadNumber(-self.a, -self.b, self.q)

    def __pos__(self):
        return self

    def __abs__(self):
        return -self if sign(self) < 0 else self

    # -- comparison ----------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, QuadNumber):
            return (self.a, self.b, self.q) == (other.a, other.b, other.q)
        if isinstance(other, (int, Fraction, Rational)):
            return self.b == 0 and self.a == other
        return NotImplemented

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash(("quad", self.a, self.b, self.q))

    def _cmp(self, other) -> int:
        if self._coerce(other) is None:
            raise TypeError(f"cannot compare QuadNumber with {type(other).__name__}")
        return sign(self - other)

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(float(self.q))

    def __repr__(self):
        return f"QuadNumber({self.a}, {self.b}, {self.q})"

    def __str__(self):
        rad = f"sqrt({self.q})"
        b = self.b
        irr = rad if b == 1 else (f"-{rad}" if b == -1 else f"{b}*{rad}")
        if not self.a:
            return irr
        if b > 0:
            return f"{self.a} + {irr}"
        return f"{self.a} - {QuadNumber(0, -b, self.q)}"


Scalar = Union[Fraction, int, QuadNumber]


def to_exact(x) -> Scalar:
    """Coerce ints, strings, flint numbers and JSON dicts to an exact scalar."""
    if isinstance(x, QuadNumber):
        return x
    if isinstance(x, Mapping):
        return scalar_from_json(x)
    return _frac(x)


def sign(x: Scalar) -> int:
    """Exact sign of a rational or quadratic scalar."""
    if isinstance(x, QuadNumber):
        sa = (x.a > 0) - (x.a < 0)
        sb = (x.b > 0) - (x.b < 0)
        if sa == sb or sa == 0:
            return sb
        if sb == 0:
            return sa
        # opposite signs: compare a^2 with q b^2
        d = x.a * x.a - x.q * x.b * x.b
        return sa if d > 0 else (sb if d < 0 else 0)
    return (x > 0) - (x < 0)


def rational_parts(x: Scalar) -> tuple[Fraction, Fraction]:
    """``(a, b)`` with ``x = a + b*sqrt(q)``; ``b = 0`` for rationals."""
    if isinstance(x, QuadNumber):
        return x.a, x.b
    return Fraction(x), Fraction(0)


def conjugate(x: Scalar) -> Scalar:
    if isinstance(x, QuadNumber):
        return QuadNumber(x.a, -x.b, x.q)
    return x


def common_q(values: Iterable) -> Fraction | None:
    """The radicand shared by all quadratic values, or None if all rational."""
    q = None
    for v in values:
        if isinstance(v, QuadNumber):
            if q is None:
                q = v.q
            elif v.q != q:
                raise ContextError(f"values mix sqrt({q}) and sqrt({v.q})")
    return q


def sqrt_exact(x: Scalar, q: Fraction | None = None) -> Scalar | None:
    """Exact nonnegative square root of ``x`` inside Q or Q(sqrt(q)).

    Returns None when the root does not lie in the field.  For a rational
    ``x`` the candidates are rationals and rational multiples of ``sqrt(q)``.
    """
    if sign(x) < 0:
        return None
    if isinstance(x, QuadNumber):
        q = x.q
        # (c + d s)^2 = c^2 + q d^2 + 2cd s ; solve c^2 + q d^2 = a, 2cd = b.
        # c^2 satisfies c^4 - a c^2 + q b^2/4 = 0.
        a, b = x.a, x.b
        disc = a * a - q * b * b
        if not _is_rational_square(disc):
            return None
        r = _rational_sqrt(disc)
        for c2 in ((a + r) / 2, (a - r) / 2):
            if c2 > 0 and _is_rational_square(c2):
                c = _rational_sqrt(c2)
                d = b / (2 * c)
                cand = QuadNumber(c, d, q) if d else c
                if sign(cand) < 0:
                    cand = -cand
                if cand * cand == x:
                    return cand
        return None
    x = Fraction(x)
    if _is_rational_square(x):
        return _rational_sqrt(x)
    if q is not None:
        ratio = x / q
        if _is_rational_square(ratio):
            return QuadNumber(0, _rational_sqrt(ratio), q)
    return None


def to_float(x: Scalar) -> float:
    return float(x)


def scalar_to_json(x: Scalar):
    """Rationals become ``"p/q"`` strings; quadratic scalars become dicts."""
    if isinstance(x, QuadNumber):
        return {"a": _fstr(x.a), "b": _fstr(x.b), "q": _fstr(x.q)}
    return _fstr(Fraction(x))


def _fstr(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def scalar_from_json(obj) -> Scalar:
    if isinstance(obj, Mapping):
        a, b, q = _frac(obj["a"]), _frac(obj["b"]), _frac(obj["q"])
        return QuadNumber(a, b, q) if b else a
    return _frac(obj)


# ----------------------------------------------------------------------
# matrices

Matrix = tuple  # tuple of row tuples


def matrix(rows: Iterable[Iterable]) -> Matrix:
    """Coerce nested iterables to an immutable exact matrix."""
    return tuple(tuple(to_exact(x) for x in row) for row in rows)


def identity(d: int) -> Matrix:
    return tuple(tuple(Fraction(int(i == j)) for j in range(d)) for i in range(d))


def ones(d: int) -> Matrix:
    return tuple(tuple(Fraction(1) for _ in range(d)) for _ in range(d))


def is_square(m: Sequence[Sequence]) -> bool:
    return all(len(row) == len(m) for row in m)


def is_symmetric(m: Sequence[Sequence]) -> bool:
    d = len(m)
    return is_square(m) and all(m[i][j] == m[j][i] for i in range(d) for j in range(i + 1, d))


def transpose(m: Sequence[Sequence]) -> Matrix:
    return tuple(zip(*m)) if m else ()


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> Matrix:
    bt = transpose(b)
    return tuple(tuple(sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt) for row in a)


def _all_rational(m) -> bool:
    return not any(isinstance(x, QuadNumber) for row in m for x in row)


def to_fmpq_mat(rows: Sequence[Sequence], ncols: int | None = None) -> flint.fmpq_mat:
    nrows = len(rows)
    if ncols is None:
        ncols = len(rows[0]) if nrows else 0
    flat = []
    for row in rows:
        for x in row:
            x = Fraction(x)
            flat.append(flint.fmpq(x.numerator, x.denominator))
    return flint.fmpq_mat(nrows, ncols, flat)


def from_fmpq(x) -> Fraction:
    return Fraction(int(x.p), int(x.q))


def _berkowitz(m: Sequence[Sequence]) -> list:
    """Coefficients of det(xI - m), highest degree first (division free)."""
    d = len(m)
    if d == 0:
        return [Fraction(1)]
    coeffs = [Fraction(1), -m[0][0]]
    for r in range(1, d):
        a = m[r][r]
        row = [m[r][j] for j in range(r)]
        col = [m[i][r] for i in range(r)]
        toeplitz = [Fraction(1), -a]
        vec = col
        for _ in range(r):
            toeplitz.append(-sum((x * y for x, y in zip(row, vec)), Fraction(0)))
            vec = [sum((m[i][j] * vec[j] for j in range(r)), Fraction(0)) for i in range(r)]
        # new = T @ coeffs with T lower-triangular Toeplitz of shape (r+2, r+1)
        new = []
        for i in range(r + 2):
            s = Fraction(0)
            for j in range(min(i, r) + 1):
                s = s + toeplitz[i - j] * coeffs[j]
            new.append(s)
        coeffs = new
    return coeffs


_FLINT_CHARPOLY_MIN = 9


def charpoly(m: Sequence[Sequence]) -> list:
    """Characteristic polynomial ``det(xI - m)`` as ascending coefficients.

    Uses the division-free Berkowitz recurrence, so it is exact over the
    quadratic extension as well.  Rational matrices of size at least 9 go
    through FLINT for speed.
    """
    if not is_square(m):
        raise ValueError("charpoly needs a square matrix")
    d = len(m)
    if d >= _FLINT_CHARPOLY_MIN and _all_rational(m):
        p = to_fmpq_mat(m, d).charpoly()
        return [from_fmpq(c) for c in p.coeffs()]
    return list(reversed(_berkowitz(m)))


def _components(m: Sequence[Sequence]) -> list[list[int]]:
    """Connected components of the nonzero pattern (symmetric matrices)."""
    d = len(m)
    seen = [False] * d
    comps = []
    for s in range(d):
        if seen[s]:
            continue
        stack, comp = [s], []
        seen[s] = True
        while stack:
            i = stack.pop()
            comp.append(i)
            for j in range(d):
                if not seen[j] and m[i][j] != 0:
                    seen[j] = True
                    stack.append(j)
        comps.append(sorted(comp))
    return comps


def _psd_by_charpoly(m) -> bool:
    coeffs = charpoly(m)
    d = len(m)
    return all(sign(c) * (-1) ** (d + i) >= 0 for i, c in enumerate(coeffs))


def _psd_by_elimination(m) -> bool:
    """Symmetric Gaussian elimination with diagonal pivoting."""
    a = [list(row) for row in m]
    active = list(range(len(a)))
    while active:
        pivot = None
        for i in active:
            s = sign(a[i][i])
            if s < 0:
                return False
            if s == 0:
                if any(a[i][j] != 0 for j in active):
                    return False
            elif pivot is None:
                pivot = i
        if pivot is None:
            return True
        active.remove(pivot)
        p = a[pivot][pivot]
        prow = a[pivot]
        for j in active:
            f = prow[j]
            if f == 0:
                continue
            f = f / p
            rj = a[j]
            for k in active:
                if prow[k] != 0:
                    rj[k] = rj[k] - f * prow[k]
    return True


def psd_check(m: Sequence[Sequence]) -> bool:
    """Exact positive-semidefiniteness test for a symmetric matrix.

    Each connected block of the sparsity pattern is decided by the sign
    pattern of ``det(xI + m)`` (all coefficients nonnegative) and
    independently by pivoted elimination; a disagreement raises
    ``RuntimeError``.  Zero eigenvalues count as PSD.
    """
    if not is_square(m):
        raise ValueError("psd_check needs a square matrix")
    if not is_symmetric(m):
        raise AsymmetricMatrixError("matrix is not symmetric")
    for comp in _components(m):
        sub = [[m[i][j] for j in comp] for i in comp]
        by_poly = _psd_by_charpoly(sub)
        by_elim = _psd_by_elimination(sub)
        if by_poly != by_elim:
            raise RuntimeError("charpoly and elimination disagree on PSD status")
        if not by_poly:
            return False
    return True


def mat_inner(a: Sequence[Sequence], b: Sequence[Sequence]) -> Scalar:
    """Trace inner product ``tr(a b)`` of symmetric matrices, entrywise."""
    if len(a) != len(b) or any(len(ra) != len(rb) for ra, rb in zip(a, b)):
        raise ValueError("dimension mismatch in mat_inner")
    total: Scalar = Fraction(0)
    for ra, rb in zip(a, b):
        for x, y in zip(ra, rb):
            if x != 0 and y != 0:
                total = total + x * y
    return total


# ----------------------------------------------------------------------
# affine systems


@dataclass(frozen=True)
class LinearEquation:
    """``sum(coeffs[name] * name) == rhs`` over rational unknowns."""

    coeffs: Mapping
    rhs: Scalar = Fraction(0)
    label: str = ""


@dataclass(frozen=True)
class AffineSolution:
    """Solution set ``particular + span(basis)`` of a linear system."""

    unknowns: tuple
    particular: tuple
    basis: tuple

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def point(self, lams: Sequence = ()) -> tuple:
        """Exact point ``particular + sum(lams[i] * basis[i])``."""
        if len(lams) != len(self.basis):
            raise ValueError("wrong number of coordinates")
        x = list(self.particular)
        for lam, vec in zip(lams, self.basis):
            lam = _frac(lam)
            if lam == 0:
                continue
            for i, v in enumerate(vec):
                if v:
                    x[i] += lam * v
        return tuple(x)

    def as_dict(self, lams: Sequence = ()) -> dict:
        return dict(zip(self.unknowns, self.point(lams)))


def rref(rows: Sequence[Sequence], ncols: int) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form (nonzero rows) and pivot columns."""
    if not rows:
        return [], []
    mat, rank = to_fmpq_mat(rows, ncols).rref()
    out, pivots = [], []
    for i in range(rank):
        row = [from_fmpq(mat[i, j]) for j in range(ncols)]
        out.append(row)
        pivots.append(next(j for j, v in enumerate(row) if v))
    return out, pivots


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[list[Fraction]]:
    """Rational basis of ``{x : rows @ x = 0}`` (one vector per free column)."""
    red, pivots = rref(rows, ncols)
    pivset = set(pivots)
    basis = []
    for f in range(ncols):
        if f in pivset:
            continue
        vec = [Fraction(0)] * ncols
        vec[f] = Fraction(1)
        for r, p in enumerate(pivots):
            vec[p] = -red[r][f]
        basis.append(vec)
    return basis


def _split_equations(equations: Sequence[LinearEquation]) -> list[tuple[dict, Fraction, int]]:
    """Split quadratic-coefficient equations into rational ones."""
    out = []
    for pos, eq in enumerate(equations):
        parts = [dict(), dict()]
        irr = False
        for name, c in eq.coeffs.items():
            a, b = rational_parts(c)
            if a:
                parts[0][name] = a
            if b:
                parts[1][name] = b
                irr = True
        ra, rb = rational_parts(eq.rhs)
        out.append((parts[0], ra, pos))
        if irr or rb:
            out.append((parts[1], rb, pos))
    return out


def solve_affine(equations: Sequence[LinearEquation], unknowns: Sequence | None = None) -> AffineSolution:
    """Exact particular solution and homogeneous basis of a linear system.

    Unknowns are rational; equations with coefficients in Q(sqrt(q)) are
    split into their rational and irrational parts.  Elimination is the
    fraction-free reduced echelon form from FLINT.  Raises
    :class:`InconsistentSystemError` carrying multipliers of the original
    equations that expose the contradiction.
    """
    if unknowns is None:
        seen: dict = {}
        for eq in equations:
            for name in eq.coeffs:
                seen.setdefault(name, None)
        unknowns = list(seen)
    unknowns = tuple(unknowns)
    index = {name: i for i, name in enumerate(unknowns)}
    n = len(unknowns)
    split = _split_equations(equations)
    rows = []
    for coeffs, rhs, _ in split:
        row = [Fraction(0)] * (n + 1)
        for name, c in coeffs.items():
            if name not in index:
                raise KeyError(f"unknown {name!r} not declared")
            row[index[name]] += c
        row[n] = rhs
        rows.append(row)
    red, pivots = rref(rows, n + 1)
    if pivots and pivots[-1] == n:
        cert, residual = _inconsistency_certificate(rows, n, [pos for _, _, pos in split])
        raise InconsistentSystemError("linear system is inconsistent", cert, residual)
    particular = [Fraction(0)] * n
    for r, p in enumerate(pivots):
        particular[p] = red[r][n]
    pivset = set(pivots)
    basis = []
    for f in range(n):
        if f in pivset:
            continue
        vec = [Fraction(0)] * n
        vec[f] = Fraction(1)
        for r, p in enumerate(pivots):
            vec[p] = -red[r][f]
        basis.append(tuple(vec))
    return AffineSolution(unknowns, tuple(particular), tuple(basis))


def _inconsistency_certificate(rows, n, positions) -> tuple[dict, Fraction]:
    # find y with y^T A = 0 and y^T b = 1
    m = len(rows)
    system = [[rows[i][j] for i in range(m)] + [Fraction(0)] for j in range(n)]
    system.append([rows[i][n] for i in range(m)] + [Fraction(1)])
    red, pivots = rref(system, m + 1)
    y = [Fraction(0)] * m
    for r, p in enumerate(pivots):
        if p < m:
            y[p] = red[r][m]
    cert: dict = {}
    seen: set[int] = set()
    for yi, pos in zip(y, positions):
        # the irrational half of a split equation is keyed (pos, "sqrt")
        key = (pos, "sqrt") if pos in seen else pos
        seen.add(pos)
        if yi:
            cert[key] = yi
    residual = sum((yi * rows[i][n] for i, yi in enumerate(y)), Fraction(0))
    return cert, residual
