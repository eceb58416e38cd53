"""Univariate and trivariate exact polynomials, Gegenbauer polynomials and
Hermite interpolation on multisets of nodes."""

from __future__ import annotations

import ast
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .exact_arith import QuadNumber, Scalar, scalar_from_json, scalar_to_json, sign, to_exact

__all__ = [
    "UniPoly",
    "TriPoly",
    "Multiset",
    "gegenbauer",
    "gegenbauer_coefficients",
    "divided_differences",
    "hermite_interpolate",
    "partial_products",
    "reduction_multiset",
    "sphere_reduction_multiset",
    "symmetrize",
    "parse_potential",
    "is_nonnegative_on",
]

_ZERO = Fraction(0)
_ONE = Fraction(1)


def _trim(coeffs: list) -> tuple:
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


class UniPoly:
    """Dense univariate polynomial, coefficients in ascending degree.

    Coefficients are exact scalars (rationals or elements of one quadratic
    extension).  The zero polynomial has an empty coefficient tuple and
    degree -1.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        object.__setattr__(self, "coeffs", _trim([to_exact(c) for c in coeffs]))

    def __setattr__(self, name, value):
        raise AttributeError("UniPoly is immutable")

    def __reduce__(self):
        return (UniPoly, (self.coeffs,))

    @classmethod
    def constant(cls, c) -> "UniPoly":
        return cls([c])

    @classmethod
    def monomial(cls, k: int, c=1) -> "UniPoly":
        return cls([0] * k + [c])

    @classmethod
    def from_roots(cls, roots: Iterable) -> "UniPoly":
        p = cls([1])
        for r in roots:
            p = p * cls([-r, 1])
        return p

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, k: int) -> Scalar:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else _ZERO

    def __call__(self, x):
        acc = _ZERO
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __add__(self, other):
        other = _as_unipoly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return UniPoly([self.coeff(i) + other.coeff(i) for i in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return UniPoly([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-_as_unipoly(other))

    def __rsub__(self, other):
        return _as_unipoly(other) - self

    def __mul__(self, other):
        if not isinstance(other, UniPoly):
            other = to_exact(other)
            return UniPoly([c * other for c in self.coeffs])
        if not self.coeffs or not other.coeffs:
            return UniPoly()
        out = [_ZERO] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return UniPoly(out)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        scalar = to_exact(scalar)
        return UniPoly([c / scalar for c in self.coeffs])

    def __pow__(self, e: int):
        result = UniPoly([1])
        for _ in range(e):
            result = result * self
        return result

    def __eq__(self, other):
        if isinstance(other, UniPoly):
            return self.coeffs == other.coeffs
        try:
            return self == _as_unipoly(other)
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def derivative(self, order: int = 1) -> "UniPoly":
        p = self
        for _ in range(order):
            p = UniPoly([i * c for i, c in enumerate(p.coeffs)][1:])
        return p

    def compose(self, other: "UniPoly") -> "UniPoly":
        acc = UniPoly()
        for c in reversed(self.coeffs):
            acc = acc * other + c
        return acc

    def divmod(self, other: "UniPoly") -> tuple["UniPoly", "UniPoly"]:
        if not other.coeffs:
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        quot = [_ZERO] * max(len(rem) - len(other.coeffs) + 1, 0)
        lead = other.coeffs[-1]
        for shift in range(len(quot) - 1, -1, -1):
            c = rem[shift + len(other.coeffs) - 1] / lead
            quot[shift] = c
            for j, b in enumerate(other.coeffs):
                rem[shift + j] = rem[shift + j] - c * b
        return UniPoly(quot), UniPoly(rem[: len(other.coeffs) - 1])

    def is_even(self) -> bool:
        return all(c == 0 for c in self.coeffs[1::2])

    def is_odd(self) -> bool:
        return all(c == 0 for c in self.coeffs[0::2])

    def of_square(self) -> "UniPoly":
        """The polynomial ``x -> self(x^2)``."""
        out = []
        for c in self.coeffs:
            out.extend([c, _ZERO])
        return UniPoly(out)

    def even_part_in_square(self) -> "UniPoly":
        """For an even polynomial ``p(x) = g(x^2)``, return ``g``."""
        if not self.is_even():
            raise ValueError("polynomial is not even")
        return UniPoly(self.coeffs[0::2])

    def to_tripoly(self, var: int) -> "TriPoly":
        terms = {}
        for k, c in enumerate(self.coeffs):
            if c != 0:
                e = [0, 0, 0]
                e[var] = k
                terms[tuple(e)] = c
        return TriPoly(terms)

    def to_json(self) -> list:
        return [scalar_to_json(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, data: Sequence) -> "UniPoly":
        return cls([scalar_from_json(c) for c in data])

    def __repr__(self):
        return f"UniPoly({[str(c) for c in self.coeffs]})"

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            mono = "" if k == 0 else ("t" if k == 1 else f"t^{k}")
            if isinstance(c, QuadNumber):
                parts.append(f"({c})" + (f"*{mono}" if mono else ""))
            elif mono and c == 1:
                parts.append(mono)
            elif mono and c == -1:
                parts.append(f"-{mono}")
            else:
                parts.append(f"{c}" + (f"*{mono}" if mono else ""))
        return " + ".join(parts).replace("+ -", "- ")


def _as_unipoly(x) -> UniPoly:
    if isinstance(x, UniPoly):
        return x
    return UniPoly([to_exact(x)])


# ----------------------------------------------------------------------
# trivariate


Exponent = tuple  # (i, j, k) powers of u, v, t


class TriPoly:
    """Sparse polynomial in ``u, v, t``: exponent triple -> coefficient."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping | None = None):
        clean = {}
        if terms:
            for e, c in terms.items():
                c = to_exact(c)
                if c != 0:
                    clean[tuple(e)] = c
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("TriPoly is immutable")

    def __reduce__(self):
        return (TriPoly, (dict(self.terms),))

    @classmethod
    def constant(cls, c) -> "TriPoly":
        return cls({(0, 0, 0): c})

    @classmethod
    def var(cls, index: int) -> "TriPoly":
        e = [0, 0, 0]
        e[index] = 1
        return cls({tuple(e): 1})

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def coeff(self, e: Exponent) -> Scalar:
        return self.terms.get(tuple(e), _ZERO)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other):
        other = _as_tripoly(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, _ZERO) + c
        return TriPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return TriPoly({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-_as_tripoly(other))

    def __rsub__(self, other):
        return _as_tripoly(other) - self

    def __mul__(self, other):
        if not isinstance(other, TriPoly):
            other = to_exact(other)
            return TriPoly({e: c * other for e, c in self.terms.items()})
        out: dict = {}
        for (a1, b1, c1), x in self.terms.items():
            for (a2, b2, c2), y in other.terms.items():
                e = (a1 + a2, b1 + b2, c1 + c2)
                out[e] = out.get(e, _ZERO) + x * y
        return TriPoly(out)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        scalar = to_exact(scalar)
        return TriPoly({e: c / scalar for e, c in self.terms.items()})

    def __pow__(self, k: int):
        out = TriPoly.constant(1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, TriPoly):
            return self.terms == other.terms
        try:
            return self == _as_tripoly(other)
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def shift(self, e: Exponent) -> "TriPoly":
        """Multiply by the monomial ``u^e0 v^e1 t^e2``."""
        return TriPoly({(a + e[0], b + e[1], c + e[2]): x for (a, b, c), x in self.terms.items()})

    def permute(self, perm: Sequence[int]) -> "TriPoly":
        """Substitute variable ``i`` by variable ``perm[i]``."""
        out = {}
        for e, c in self.terms.items():
            new = [0, 0, 0]
            for i, p in enumerate(perm):
                new[p] += e[i]
            out[tuple(new)] = c
        return TriPoly(out)

    def flip_signs(self, signs: Sequence[int]) -> "TriPoly":
        out = {}
        for e, c in self.terms.items():
            s = 1
            for si, ei in zip(signs, e):
                if si < 0 and ei % 2:
                    s = -s
            out[e] = c if s > 0 else -c
        return TriPoly(out)

    def __call__(self, u, v, t):
        return self.evaluate((u, v, t))

    def evaluate(self, point: Sequence) -> Scalar:
        u, v, t = point
        cache = [dict(), dict(), dict()]

        def power(i, x, k):
            got = cache[i].get(k)
            if got is None:
                got = x ** k if k else _ONE
                cache[i][k] = got
            return got

        total: Scalar = _ZERO
        for (a, b, c), x in self.terms.items():
            total = total + x * power(0, u, a) * power(1, v, b) * power(2, t, c)
        return total

    def evaluate_invariants(self, uu, vv, tt, uvt) -> Scalar:
        """Evaluate from ``u^2, v^2, t^2`` and ``uvt``.

        Valid only for polynomials invariant under negating any two
        variables, i.e. all exponents of each monomial share parity.
        """
        total: Scalar = _ZERO
        for (a, b, c), x in self.terms.items():
            if a % 2 != b % 2 or a % 2 != c % 2:
                raise ValueError("polynomial is not invariant under paired sign changes")
            if a % 2:
                term = x * uvt * uu ** ((a - 1) // 2) * vv ** ((b - 1) // 2) * tt ** ((c - 1) // 2)
            else:
                term = x * uu ** (a // 2) * vv ** (b // 2) * tt ** (c // 2)
            total = total + term
        return total

    def partial(self, var: int) -> "TriPoly":
        out = {}
        for e, c in self.terms.items():
            if e[var]:
                new = list(e)
                new[var] -= 1
                out[tuple(new)] = c * e[var]
        return TriPoly(out)

    def diagonal(self) -> UniPoly:
        """The univariate restriction ``x -> p(x, x, 1)``."""
        coeffs: dict = {}
        for (a, b, _), c in self.terms.items():
            coeffs[a + b] = coeffs.get(a + b, _ZERO) + c
        deg = max(coeffs, default=-1)
        return UniPoly([coeffs.get(i, _ZERO) for i in range(deg + 1)])

    def to_json(self) -> list:
        return [[a, b, c, scalar_to_json(x)] for (a, b, c), x in sorted(self.terms.items())]

    @classmethod
    def from_json(cls, data: Sequence) -> "TriPoly":
        return cls({(int(a), int(b), int(c)): scalar_from_json(x) for a, b, c, x in data})

    def __repr__(self):
        return f"TriPoly({len(self.terms)} terms, degree {self.degree})"


def _as_tripoly(x) -> TriPoly:
    if isinstance(x, TriPoly):
        return x
    return TriPoly.constant(to_exact(x))


_PERMS = tuple(itertools.permutations(range(3)))


def symmetrize(p: TriPoly) -> TriPoly:
    """Average of ``p`` over the six permutations of ``(u, v, t)``."""
    acc: dict = {}
    for perm in _PERMS:
        for e, c in p.permute(perm).terms.items():
            acc[e] = acc.get(e, _ZERO) + c
    return TriPoly({e: c / 6 for e, c in acc.items()})


# ----------------------------------------------------------------------
# Gegenbauer


@lru_cache(maxsize=None)
def _gegenbauer_cached(n: int, k: int) -> UniPoly:
    if k == 0:
        return UniPoly([1])
    if k == 1:
        return UniPoly([0, 1])
    prev, cur = UniPoly([1]), UniPoly([0, 1])
    t = UniPoly([0, 1])
    for j in range(1, k):
        nxt = (t * cur * Fraction(2 * j + n - 2) - prev * Fraction(j)) / Fraction(j + n - 2)
        prev, cur = cur, nxt
    return cur


def gegenbauer(n: int, k: int) -> UniPoly:
    """Gegenbauer polynomial for ``S^{n-1}``, normalized so ``P(1) = 1``.

    Built from ``(k+n-2) P_{k+1} = (2k+n-2) t P_k - k P_{k-1}``.
    """
    if n < 2:
        raise ValueError("gegenbauer needs n >= 2")
    if k < 0:
        raise ValueError("degree must be nonnegative")
    return _gegenbauer_cached(n, k)


def gegenbauer_coefficients(f: UniPoly, n: int) -> list:
    """Coefficients ``a_k`` with ``f = sum a_k P^n_k`` (triangular solve)."""
    rem = f
    out = [_ZERO] * (f.degree + 1)
    for k in range(f.degree, -1, -1):
        p = gegenbauer(n, k)
        a = rem.coeff(k) / p.coeffs[-1]
        out[k] = a
        rem = rem - p * a
    return out


# ----------------------------------------------------------------------
# Hermite interpolation


@dataclass(frozen=True)
class Multiset:
    """Nodes with positive multiplicities, kept in nondecreasing order."""

    items: tuple

    def __init__(self, items: Iterable):
        merged: dict = {}
        for node, mult in items:
            node = to_exact(node)
            if mult < 0:
                raise ValueError("multiplicities must be nonnegative")
            if mult:
                merged[node] = merged.get(node, 0) + int(mult)
        if not merged:
            raise ValueError("multiset must be nonempty")
        ordered = sorted(merged.items(), key=lambda kv: _SortKey(kv[0]))
        object.__setattr__(self, "items", tuple(ordered))

    @property
    def total(self) -> int:
        return sum(m for _, m in self.items)

    def nodes(self) -> list:
        """Nodes repeated by multiplicity, nondecreasing."""
        return [node for node, m in self.items for _ in range(m)]

    def multiplicity(self, node) -> int:
        return dict(self.items).get(to_exact(node), 0)


class _SortKey:
    __slots__ = ("x",)

    def __init__(self, x):
        self.x = x

    def __lt__(self, other):
        return sign(self.x - other.x) < 0


def divided_differences(nodes: Sequence, f: UniPoly) -> list:
    """Newton coefficients ``f[t_1], f[t_1,t_2], ...`` with confluent nodes.

    Repeated nodes must be adjacent; for a run of equal nodes the divided
    difference is the scaled derivative ``f^{(j)}(t)/j!``.
    """
    m = len(nodes)
    if m == 0:
        raise ValueError("need at least one node")
    for i in range(m - 1):
        if nodes[i] != nodes[i + 1] and any(nodes[j] == nodes[i] for j in range(i + 2, m)):
            raise ValueError("repeated nodes must be adjacent")
    derivs = [f]
    for _ in range(m):
        derivs.append(derivs[-1].derivative())
    col = [f(x) for x in nodes]
    out = [col[0]]
    for j in range(1, m):
        nxt = []
        for i in range(m - j):
            if nodes[i + j] == nodes[i]:
                nxt.append(derivs[j](nodes[i]) / math.factorial(j))
            else:
                nxt.append((col[i + 1] - col[i]) / (nodes[i + j] - nodes[i]))
        col = nxt
        out.append(col[0])
    return out


def partial_products(nodes: Sequence) -> list[UniPoly]:
    """``[1, (t - t1), (t - t1)(t - t2), ...]``, one per node."""
    if len(nodes) == 0:
        raise ValueError("need at least one node")
    out = [UniPoly([1])]
    for x in nodes[:-1]:
        out.append(out[-1] * UniPoly([-to_exact(x), 1]))
    return out


def hermite_interpolate(T: Multiset, f: UniPoly) -> UniPoly:
    """Hermite interpolant of ``f`` on the multiset ``T``.

    The unique polynomial of degree below ``T.total`` agreeing with ``f`` to
    order ``mult(t)`` at each node.
    """
    nodes = T.nodes()
    coeffs = divided_differences(nodes, f)
    acc = UniPoly()
    for c, p in zip(coeffs, partial_products(nodes)):
        acc = acc + p * c
    return acc


def reduction_multiset(squared_inner_products: Iterable, mult_zero: int) -> Multiset:
    """Nodes for reducing universal optimality to finitely many potentials.

    Every nonzero value appears twice; zero, an endpoint of ``[0, 1)``,
    appears ``mult_zero`` times.
    """
    items = []
    for x in set(to_exact(v) for v in squared_inner_products):
        if sign(x) < 0 or sign(x - 1) >= 0:
            raise ValueError(f"squared inner product {x} outside [0, 1)")
        if x != 0:
            items.append((x, 2))
    if mult_zero:
        items.append((Fraction(0), mult_zero))
    return Multiset(items)


def sphere_reduction_multiset(inner_products: Iterable) -> Multiset:
    """Spherical analogue on ``[-1, 1)``: ``-1`` once, other values twice."""
    items = []
    for x in set(to_exact(v) for v in inner_products):
        if sign(x + 1) < 0 or sign(x - 1) >= 0:
            raise ValueError(f"inner product {x} outside [-1, 1)")
        items.append((x, 1 if x == -1 else 2))
    return Multiset(items)


# ----------------------------------------------------------------------
# univariate nonnegativity on an interval (rational coefficients)


def _monic(p: UniPoly) -> UniPoly:
    return p / p.coeffs[-1]


def _gcd(a: UniPoly, b: UniPoly) -> UniPoly:
    while b.coeffs:
        a, b = b, a.divmod(b)[1]
    return _monic(a) if a.coeffs else a


def _odd_multiplicity_part(p: UniPoly) -> UniPoly:
    # Yun's square-free decomposition, keeping factors of odd multiplicity.
    a = p
    b = a.derivative()
    c = _gcd(a, b)
    w = a.divmod(c)[0]
    y = b.divmod(c)[0]
    out = UniPoly([1])
    i = 1
    while w.degree > 0:
        z = y - w.derivative()
        g = _gcd(w, z) if z.coeffs else _monic(w)
        if i % 2 and g.degree > 0:
            out = out * g
        w = w.divmod(g)[0]
        y = z.divmod(g)[0] if z.coeffs else UniPoly()
        i += 1
    return out


def _sturm_count(p: UniPoly, a: Fraction, b: Fraction) -> int:
    """Number of distinct roots of square-free ``p`` in ``(a, b]``."""
    seq = [p, p.derivative()]
    while seq[-1].degree > 0:
        r = seq[-2].divmod(seq[-1])[1]
        if not r.coeffs:
            break
        seq.append(-r)

    def changes(x):
        vals = [s(x) for s in seq]
        vals = [v for v in vals if v != 0]
        return sum(1 for v1, v2 in zip(vals, vals[1:]) if (v1 > 0) != (v2 > 0))

    return changes(a) - changes(b)


def is_nonnegative_on(p: UniPoly, a, b) -> bool:
    """Exact test of ``p(x) >= 0`` for all ``x`` in ``[a, b]`` (rational p)."""
    a, b = Fraction(a), Fraction(b)
    if not p.coeffs:
        return True
    if any(isinstance(c, QuadNumber) for c in p.coeffs):
        raise TypeError("is_nonnegative_on needs rational coefficients")
    if p.degree == 0:
        return p.coeffs[0] >= 0
    odd = _odd_multiplicity_part(p)
    if odd.degree > 0:
        roots_inside = _sturm_count(odd, a, b) - (1 if odd(b) == 0 else 0)
        if roots_inside > 0:
            return False
    # constant sign on (a, b) away from touching roots; probe where p != 0
    probes = [a + (b - a) * Fraction(i, 97) for i in range(1, 97)]
    for x in probes:
        v = p(x)
        if v != 0:
            return v > 0
    return True


# ----------------------------------------------------------------------
# parsing potentials such as "t^3*(t-1/9)^2"


def parse_potential(text: str) -> UniPoly:
    """Parse a polynomial in ``t`` with rational coefficients."""
    tree = ast.parse(text.replace("^", "**"), mode="eval")

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            if isinstance(node.value, float):
                return UniPoly([Fraction(str(node.value))])
            return UniPoly([node.value])
        if isinstance(node, ast.Name) and node.id in ("t", "x"):
            return UniPoly([0, 1])
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            left = ev(node.left)
            if isinstance(node.op, ast.Pow):
                exp = ev(node.right)
                if exp.degree > 0 or (exp.coeffs and Fraction(exp.coeffs[0]).denominator != 1):
                    raise ValueError("exponents must be nonnegative integers")
                return left ** int(exp.coeff(0))
            right = ev(node.right)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            if isinstance(node.op, ast.Div):
                if right.degree > 0:
                    raise ValueError("division by a polynomial")
                return left / right.coeff(0)
        raise ValueError(f"unsupported syntax in potential: {ast.dump(node)}")

    return ev(tree)
