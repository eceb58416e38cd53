"""Exact point configurations on spheres and projective spaces.

Points are stored as raw vectors over ``Q`` or ``Q(sqrt q)``; they need not
be unit vectors.  Projective codes only ever use squared cosines and the
triple products ``<x,y><y,z><z,x> / (|x|^2 |y|^2 |z|^2)``, which stay in the
field even when the norms are irrational.  Sphere codes must have equal
squared norms so that every cosine is a field element.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .exact_arith import (
    QuadNumber,
    Scalar,
    common_q,
    scalar_from_json,
    scalar_to_json,
    sign,
    sqrt_exact,
    to_exact,
)
from .polynomials import UniPoly, gegenbauer

__all__ = [
    "Code",
    "TripleDistribution",
    "CodeReport",
    "builtin",
    "list_builtin",
    "energy",
    "energy_from_triples",
    "triple_distribution",
    "design_strength",
    "verify_code",
    "canonical_projective",
    "canonical_sphere",
    "projective_invariants",
    "read_code",
    "write_code",
]

_ZERO = Fraction(0)


def _dot(x: Sequence, y: Sequence) -> Scalar:
    acc: Scalar = _ZERO
    for a, b in zip(x, y):
        if a != 0 and b != 0:
            acc = acc + a * b
    return acc


def _exact_rank(rows: list[list]) -> int:
    """Rank by Gaussian elimination over the (quadratic) field."""
    m = [list(r) for r in rows]
    rank = 0
    ncols = len(m[0]) if m else 0
    for col in range(ncols):
        piv = next((r for r in range(rank, len(m)) if m[r][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = 1 / m[rank][col]
        for r in range(rank + 1, len(m)):
            if m[r][col] != 0:
                fac = m[r][col] * inv
                m[r] = [a - fac * b for a, b in zip(m[r], m[rank])]
        rank += 1
    return rank


class _Key:
    """Sort key comparing exact scalars."""

    __slots__ = ("x",)

    def __init__(self, x):
        self.x = x

    def __lt__(self, other):
        return sign(self.x - other.x) < 0


@dataclass(frozen=True, eq=False)
class Code:
    """A finite code in ``S^{n-1}`` or ``RP^{n-1}``.

    For projective codes each stored vector is one lift of a line.  An
    antipodal sphere code stores one point per antipodal pair and sets
    ``antipodal=True``.
    """

    n: int
    space: str
    points: tuple
    name: str = ""
    antipodal: bool = False

    def __post_init__(self):
        if self.space not in ("sphere", "projective"):
            raise ValueError("space must be 'sphere' or 'projective'")
        if self.antipodal and self.space != "sphere":
            raise ValueError("only sphere codes carry the antipodal flag")
        pts = tuple(tuple(to_exact(c) for c in p) for p in self.points)
        object.__setattr__(self, "points", pts)
        if not pts:
            raise ValueError("empty code")
        dim = len(pts[0])
        if any(len(p) != dim for p in pts):
            raise ValueError("points have different lengths")
        if dim < self.n:
            raise ValueError(f"vectors of length {dim} cannot span dimension {self.n}")
        common_q(c for p in pts for c in p)
        if any(sign(v) <= 0 for v in self.norms):
            raise ValueError("zero vector in code")
        if self.space == "sphere" and len(set(self.norms)) != 1:
            raise ValueError("sphere codes need equal squared norms")
        if dim > self.n and _exact_rank([list(p) for p in pts]) > self.n:
            raise ValueError(f"points span more than {self.n} dimensions")
        # distinctness
        for i, j in itertools.combinations(range(len(pts)), 2):
            d = self._raw_dot(i, j)
            par = d * d == self.norms[i] * self.norms[j]
            if self.space == "projective" or self.antipodal:
                if par:
                    raise ValueError(f"points {i} and {j} span the same line")
            elif par and sign(d) > 0:
                raise ValueError(f"points {i} and {j} coincide")

    # -- basic data ----------------------------------------------------
    @cached_property
    def q(self) -> Fraction | None:
        return common_q(c for p in self.points for c in p)

    @cached_property
    def norms(self) -> tuple:
        return tuple(_dot(p, p) for p in self.points)

    def _raw_dot(self, i: int, j: int) -> Scalar:
        return _dot(self.points[i], self.points[j])

    @cached_property
    def _dots(self) -> list[list[Scalar]]:
        m = len(self.points)
        out = [[_ZERO] * m for _ in range(m)]
        for i in range(m):
            for j in range(i, m):
                out[i][j] = out[j][i] = self._raw_dot(i, j)
        return out

    @property
    def N(self) -> int:
        return 2 * len(self.points) if self.antipodal else len(self.points)

    @cached_property
    def sphere_points(self) -> tuple:
        """All points of a sphere code, negatives appended when antipodal."""
        if self.space != "sphere":
            raise ValueError("projective codes have no canonical point set")
        if not self.antipodal:
            return self.points
        return self.points + tuple(tuple(-c for c in p) for p in self.points)

    @cached_property
    def cosines(self) -> list[list[Scalar]]:
        """Exact cosine matrix of a sphere code (expanded if antipodal)."""
        if self.space != "sphere":
            raise ValueError("cosines of a projective code depend on the lifts")
        r2 = self.norms[0]
        m = len(self.points)
        base = [[self._dots[i][j] / r2 for j in range(m)] for i in range(m)]
        if not self.antipodal:
            return base
        top = [row + [-x for x in row] for row in base]
        bottom = [[-x for x in row] + row for row in base]
        return top + bottom

    @cached_property
    def cos_squared(self) -> list[list[Scalar]]:
        """Squared cosines ``<x,y>^2 / (|x|^2 |y|^2)`` between stored lifts."""
        m = len(self.points)
        d, nr = self._dots, self.norms
        return [[d[i][j] * d[i][j] / (nr[i] * nr[j]) for j in range(m)] for i in range(m)]

    def squared_inner_products(self) -> set:
        """Distinct squared cosines between distinct lines (projective)."""
        if self.space != "projective":
            raise ValueError("squared inner products are a projective notion")
        m = len(self.points)
        return {self.cos_squared[i][j] for i in range(m) for j in range(m) if i != j}

    def inner_products(self) -> set:
        """Distinct cosines between distinct points (sphere)."""
        c = self.cosines
        m = len(c)
        return {c[i][j] for i in range(m) for j in range(m) if i != j}

    def triple_product(self, i: int, j: int, k: int) -> Scalar:
        d, nr = self._dots, self.norms
        return d[i][j] * d[j][k] * d[k][i] / (nr[i] * nr[j] * nr[k])

    def as_projective(self) -> "Code":
        """Lines through an antipodal sphere code."""
        if self.space == "projective":
            return self
        if not self.antipodal:
            raise ValueError("only antipodal sphere codes define line sets")
        return Code(self.n, "projective", self.points, self.name)

    def as_antipodal(self) -> "Code":
        """The antipodal sphere code ``{+-x}`` of a projective code."""
        if self.space == "sphere":
            if not self.antipodal:
                raise ValueError("code is not antipodal")
            return self
        return Code(self.n, "sphere", self.points, self.name, antipodal=True)

    def __repr__(self):
        return f"Code({self.name or '?'}: n={self.n}, N={self.N}, {self.space})"


# ----------------------------------------------------------------------
# catalog


def _q(a, b, q) -> Scalar:
    return QuadNumber(a, b, q) if b else Fraction(a)


def orthogonal_lines(n: int, m: int) -> Code:
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n")
    pts = [[1 if i == j else 0 for j in range(n)] for i in range(m)]
    return Code(n, "projective", pts, f"orthogonal_lines({n},{m})")


def simplex_lines(n: int) -> Code:
    """Lines through the ``n+1`` vertices of a regular simplex.

    Embedded in the sum-zero hyperplane of ``R^{n+1}``.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    pts = [[Fraction(n if i == j else -1, n + 1) for j in range(n + 1)] for i in range(n + 1)]
    return Code(n, "projective", pts, f"simplex_lines({n})")


def rhombic7() -> Code:
    s = QuadNumber(0, 1, Fraction(1, 3))
    pts = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    for signs in itertools.product((1, -1), repeat=3):
        if signs.count(-1) % 2 == 0:
            pts.append([s * e for e in signs])
    return Code(3, "projective", pts, "rhombic7")


def _phi() -> QuadNumber:
    return QuadNumber(Fraction(1, 2), Fraction(1, 2), 5)


def _cyclic(v):
    return [list(v), [v[2], v[0], v[1]], [v[1], v[2], v[0]]]


def icosa6() -> Code:
    phi = _phi()
    pts = _cyclic((0, 1, phi)) + _cyclic((0, -1, phi))
    return Code(3, "projective", pts, "icosa6")


def cube4() -> Code:
    pts = [list(s) for s in itertools.product((1, -1), repeat=3) if s.count(-1) % 2 == 0]
    return Code(3, "projective", pts, "cube4")


def icosaVF16() -> Code:
    """Icosahedron vertex lines plus dodecahedron vertex (face) lines."""
    phi = _phi()
    iphi = phi - 1
    pts = icosa6().points
    pts = [list(p) for p in pts]
    pts += [list(s) for s in itertools.product((1, -1), repeat=3) if s.count(-1) % 2 == 0]
    pts += _cyclic((0, iphi, phi)) + _cyclic((0, -iphi, phi))
    return Code(3, "projective", pts, "icosaVF16")


def antipodal22_S3() -> Code:
    s = QuadNumber(0, Fraction(1, 3), 3)
    h = QuadNumber(0, Fraction(1, 2), 3)
    half = Fraction(1, 2)
    pts = [[s, s * a, s * b, 0] for a in (1, -1) for b in (1, -1)]
    pts.append([0, 0, 0, 1])
    for axis in range(3):
        for w in (half, -half):
            v = [0, 0, 0, w]
            v[axis] = h
            pts.append(v)
    return Code(4, "sphere", pts, "antipodal22_S3", antipodal=True)


def petersen10_S3() -> Code:
    """Midpoints of the edges of a regular simplex in ``R^5``."""
    pts = []
    for i, j in itertools.combinations(range(5), 2):
        pts.append([Fraction(3 if k in (i, j) else -2, 5) for k in range(5)])
    return Code(4, "sphere", pts, "petersen10_S3")


def pentagons10_S3() -> Code:
    """Two regular pentagons in orthogonal planes of ``R^4``.

    Each pentagon is realized by cosine vectors ``(cos 2pi(j-m)/5)_m`` in
    its own block of five coordinates.
    """
    c1 = QuadNumber(Fraction(-1, 4), Fraction(1, 4), 5)  # cos 72
    c2 = QuadNumber(Fraction(-1, 4), Fraction(-1, 4), 5)  # cos 144
    cos = [Fraction(1), c1, c2, c2, c1]
    pts = []
    for block in range(2):
        for j in range(5):
            v = [_ZERO] * 10
            for m in range(5):
                v[5 * block + m] = cos[(j - m) % 5]
            pts.append(v)
    return Code(4, "sphere", pts, "pentagons10_S3")


def antiprism8(w=1) -> Code:
    """Square antiprism: squares at heights ``w`` and ``-w`` (unnormalized)."""
    w = to_exact(w)
    r2 = QuadNumber(0, 1, 2)
    pts = [[a, b, w] for a in (1, -1) for b in (1, -1)]
    pts += [[r2, 0, -w], [-r2, 0, -w], [0, r2, -w], [0, -r2, -w]]
    return Code(3, "sphere", pts, f"antiprism8({w})")


def cell600() -> Code:
    """The 600-cell: 60 antipodal representatives over ``Q(sqrt 5)``."""
    phi = _phi()
    iphi = phi - 1
    half = Fraction(1, 2)
    raw = []
    for i in range(4):
        v = [0, 0, 0, 0]
        v[i] = 1
        raw.append(tuple(to_exact(x) for x in v))
    for s in itertools.product((half, -half), repeat=4):
        raw.append(tuple(s))
    base = (phi / 2, half, iphi / 2, _ZERO)
    even = [p for p in itertools.permutations(range(4)) if _perm_parity(p) == 0]
    for p in even:
        for signs in itertools.product((1, -1), repeat=3):
            v = [_ZERO] * 4
            for pos, src in enumerate(p):
                x = base[src]
                if src < 3:
                    x = x * signs[src]
                v[pos] = x
            raw.append(tuple(v))
    reps, seen = [], set()
    for v in raw:
        neg = tuple(-x for x in v)
        if v in seen or neg in seen:
            continue
        seen.add(v)
        reps.append(list(v))
    return Code(4, "sphere", reps, "cell600", antipodal=True)


def _perm_parity(p) -> int:
    p = list(p)
    parity = 0
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            parity ^= 1
    return parity


_CATALOG: dict[str, tuple[Callable, str]] = {
    "orthogonal_lines": (orthogonal_lines, "orthogonal_lines(n,m): m orthogonal lines in RP^{n-1}"),
    "simplex_lines": (simplex_lines, "simplex_lines(n): lines through a regular simplex's vertices"),
    "rhombic7": (rhombic7, "7 lines through cube and octahedron vertices in RP^2"),
    "icosa6": (icosa6, "6 lines through icosahedron vertices in RP^2"),
    "cube4": (cube4, "4 lines through cube vertices in RP^2"),
    "antipodal22_S3": (antipodal22_S3, "(4,22,1/2) antipodal code with cosines +-1/3, +-1/4"),
    "icosaVF16": (icosaVF16, "16 lines through icosahedron vertices and face centers"),
    "petersen10_S3": (petersen10_S3, "10 edge midpoints of a regular 4-simplex in S^3"),
    "pentagons10_S3": (pentagons10_S3, "two regular pentagons in orthogonal planes of R^4"),
    "antiprism8": (antiprism8, "antiprism8(w): square antiprism with half-height parameter w"),
    "cell600": (cell600, "120 vertices of the 600-cell (antipodal)"),
}


def list_builtin() -> list[tuple[str, str]]:
    return [(k, v[1]) for k, v in _CATALOG.items()]


def builtin(name: str) -> Code:
    """Catalog lookup; parameters go in parentheses, e.g. ``antiprism8(1/2)``."""
    m = re.fullmatch(r"\s*([A-Za-z0-9_]+)\s*(?:\((.*)\))?\s*", name)
    if not m or m.group(1) not in _CATALOG:
        raise KeyError(f"unknown code {name!r}")
    func = _CATALOG[m.group(1)][0]
    args = []
    if m.group(2) and m.group(2).strip():
        for a in m.group(2).split(","):
            a = a.strip()
            args.append(int(a) if re.fullmatch(r"-?\d+", a) else Fraction(a))
    return func(*args)


# ----------------------------------------------------------------------
# energies


def _pair_values(c: Code, convention: str) -> list[tuple[Scalar, int]]:
    """Distinct pair arguments with multiplicities over unordered pairs."""
    counts: dict = {}
    if convention == "E_hat":
        if c.space != "projective":
            raise ValueError("E_hat needs a projective code")
        m = len(c.points)
        for i in range(m):
            for j in range(i + 1, m):
                x = c.cos_squared[i][j]
                counts[x] = counts.get(x, 0) + 1
        return list(counts.items())
    if c.space == "projective":
        if convention == "E":
            return [(1 - x, k) for x, k in _pair_values(c, "E_hat")]
        raise ValueError("E_tilde is undefined for line sets; use E or E_hat")
    cos = c.cosines
    m = len(cos)
    for i in range(m):
        for j in range(i + 1, m):
            x = cos[i][j]
            counts[x] = counts.get(x, 0) + 1
    if convention == "E_tilde":
        return list(counts.items())
    return [(2 - 2 * x, k) for x, k in counts.items()]


_ALIASES = {"E": "E", "e": "E", "E_tilde": "E_tilde", "tilde": "E_tilde", "E_hat": "E_hat", "hat": "E_hat"}


def energy(c: Code, f: UniPoly, convention: str = "E_hat") -> Scalar:
    """Sum of ``f`` over unordered pairs of distinct points.

    ``E`` uses squared chordal distance (``2-2<x,y>`` on spheres,
    ``1-<x,y>^2`` for lines), ``E_tilde`` the inner product and ``E_hat``
    the squared inner product.
    """
    conv = _ALIASES.get(convention)
    if conv is None:
        raise ValueError(f"unknown convention {convention!r}")
    total: Scalar = _ZERO
    for x, k in _pair_values(c, conv):
        total = total + f(x) * k
    return total


# ----------------------------------------------------------------------
# triples


def projective_invariants(triple: Sequence) -> tuple:
    """``(a, b, c, p)``: squares sorted decreasingly and the product ``uvt``."""
    u, v, t = (to_exact(x) for x in triple)
    sq = sorted((u * u, v * v, t * t), key=_Key, reverse=True)
    return (sq[0], sq[1], sq[2], u * v * t)


def canonical_projective(triple: Sequence) -> tuple:
    """Lexicographically largest image under permutations and paired sign flips."""
    vals = [abs(to_exact(x)) for x in triple]
    prod = to_exact(triple[0]) * to_exact(triple[1]) * to_exact(triple[2])
    vals.sort(key=_Key, reverse=True)
    if sign(prod) < 0:
        vals[2] = -vals[2]
    return tuple(vals)


def canonical_sphere(triple: Sequence) -> tuple:
    return tuple(sorted((to_exact(x) for x in triple), key=_Key, reverse=True))


def _invariants_to_triple(key: tuple, q) -> tuple | None:
    a, b, c, p = key
    roots = [sqrt_exact(x, q) for x in (a, b, c)]
    if any(r is None for r in roots):
        return None
    trip = (roots[0], roots[1], -roots[2] if sign(p) < 0 else roots[2])
    if trip[0] * trip[1] * trip[2] != p:
        return None
    return trip


@dataclass
class TripleDistribution:
    """Counts ``A_{u,v,t}`` of ordered triples, merged over symmetry classes.

    Projective keys are invariants ``(u^2, v^2, t^2, uvt)`` with the squares
    in decreasing order; sphere keys are triples in decreasing order.  The
    ``triples`` map sends each key to a canonical triple (or None when the
    coordinates leave the field).
    """

    N: int
    space: str
    entries: dict
    triples: dict = field(default_factory=dict)
    q: Fraction | None = None

    def key(self, triple: Sequence) -> tuple:
        if self.space == "projective":
            return projective_invariants(triple)
        return canonical_sphere(triple)

    def count(self, triple: Sequence) -> int:
        return self.entries.get(self.key(triple), 0)

    def invariants(self, key: tuple) -> tuple:
        if self.space == "projective":
            return key
        u, v, t = key
        return (u * u, v * v, t * t, u * v * t)

    def in_domain(self, key: tuple) -> bool:
        """Inside ``D``: no coordinate equal to 1 and PSD Gram matrix."""
        a, b, c, p = self.invariants(key)
        if self.space == "projective":
            if a == 1:
                return False
        elif key[0] == 1:
            return False
        return sign(1 + 2 * p - a - b - c) >= 0

    def restricted(self) -> dict:
        """Entries over ``D`` (triples of distinct points)."""
        return {k: v for k, v in self.entries.items() if self.in_domain(k)}

    def total(self) -> int:
        return sum(self.entries.values())

    def identities(self) -> dict[str, bool]:
        N = self.N
        one = (1, 1, 1, 1) if self.space == "projective" else (1, 1, 1)
        degenerate = 0
        for k, v in self.entries.items():
            a, b, c, p = self.invariants(k)
            ones = sum(1 for x in ((a, b, c) if self.space == "projective" else k) if x == 1)
            if ones == 1:
                degenerate += v
        gram_ok = all(sign(1 + 2 * p - a - b - c) >= 0 for a, b, c, p in map(self.invariants, self.entries))
        return {
            "diagonal": self.entries.get(self._norm_key(one), 0) == N,
            "pairs": degenerate == 3 * (N * N - N),
            "total": self.total() == N ** 3,
            "domain": sum(self.restricted().values()) == N * (N - 1) * (N - 2),
            "gram_psd": gram_ok,
        }

    def _norm_key(self, k):
        return tuple(to_exact(x) for x in k)

    def labeled(self, domain_only: bool = True) -> list[tuple]:
        """``(key, canonical triple or None, count)`` sorted by key."""
        items = self.restricted() if domain_only else self.entries
        keys = sorted(items, key=lambda k: tuple(float(x) for x in k), reverse=True)
        return [(k, self.triples.get(k), items[k]) for k in keys]


def triple_distribution(c: Code) -> TripleDistribution:
    """Counts of all ordered triples ``(x, y, z)`` in ``C^3``."""
    if c.space == "projective":
        vals = c.cos_squared
        m = len(c.points)
        sg = np.array([[sign(c._dots[i][j]) for j in range(m)] for i in range(m)], dtype=np.int64)
    else:
        vals = c.cosines
        m = len(vals)
        sg = np.zeros((m, m), dtype=np.int64)
    distinct = sorted({x for row in vals for x in row}, key=_Key, reverse=True)
    index = {x: i for i, x in enumerate(distinct)}
    ids = np.array([[index[x] for x in row] for row in vals], dtype=np.int64)
    base = len(distinct)
    counts = np.zeros(base ** 3 * 3, dtype=np.int64)
    witness: dict[int, tuple] = {}
    for i in range(m):
        a = np.broadcast_to(ids[i, :, None], (m, m))
        b = ids
        cc = np.broadcast_to(ids[None, :, i], (m, m))
        st = np.sort(np.stack([a, b, cc]), axis=0)
        s = sg[i, :, None] * sg * sg[None, :, i]
        code = ((st[0] * base + st[1]) * base + st[2]) * 3 + (s + 1)
        flat = code.ravel()
        counts += np.bincount(flat, minlength=counts.size)
        uniq, first = np.unique(flat, return_index=True)
        for u, f in zip(uniq.tolist(), first.tolist()):
            if u not in witness:
                witness[u] = (i, f // m, f % m)
    entries: dict = {}
    reps: dict = {}
    for code_id in np.nonzero(counts)[0].tolist():
        i, j, k = witness[code_id]
        if c.space == "projective":
            s0 = code_id // 3
            ia, rest = divmod(s0, base * base)
            ib, ic = divmod(rest, base)
            key = (distinct[ia], distinct[ib], distinct[ic], c.triple_product(i, j, k))
            reps[key] = _invariants_to_triple(key, c.q)
        else:
            key = canonical_sphere((vals[i][j], vals[j][k], vals[k][i]))
            reps[key] = key
        entries[key] = entries.get(key, 0) + int(counts[code_id])
    return TripleDistribution(c.N, c.space, entries, reps, c.q)


def energy_from_triples(dist: TripleDistribution, f: UniPoly, convention: str = "E_hat") -> Scalar:
    """``(1/(6(N-2))) sum_D A (f(u)+f(v)+f(t))``; squared arguments for E_hat."""
    conv = _ALIASES.get(convention)
    total: Scalar = _ZERO
    for key, cnt in dist.restricted().items():
        if conv == "E_hat":
            a, b, cc, _ = dist.invariants(key)
            args = (a, b, cc)
        elif conv == "E_tilde":
            args = key
        else:
            args = tuple(2 - 2 * x for x in key)
        total = total + cnt * (f(args[0]) + f(args[1]) + f(args[2]))
    return total / (6 * (dist.N - 2))


# ----------------------------------------------------------------------
# designs and minimal distance


def design_strength(c: Code, k_max: int) -> int:
    """Largest ``m <= k_max`` with vanishing Gegenbauer pair sums up to ``m``.

    Projective codes use ``P_{2j}`` for ``j = 1..m``; sphere codes ``P_j``.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    counts: dict = {}
    if c.space == "projective":
        for row in c.cos_squared:
            for x in row:
                counts[x] = counts.get(x, 0) + 1
    else:
        for row in c.cosines:
            for x in row:
                counts[x] = counts.get(x, 0) + 1
    for j in range(1, k_max + 1):
        if c.space == "projective":
            g = gegenbauer(c.n, 2 * j).even_part_in_square()
        else:
            g = gegenbauer(c.n, j)
        total: Scalar = _ZERO
        for x, k in counts.items():
            total = total + g(x) * k
        if total != 0:
            return j - 1
    return k_max


@dataclass(frozen=True)
class CodeReport:
    max_cos: Scalar | None  # None when the root leaves the field
    max_cos_squared: Scalar | None
    satisfies: bool


def verify_code(c: Code, t) -> CodeReport:
    """Largest cosine between distinct points (lines: largest ``|cos|``)."""
    t = to_exact(t)
    if c.space == "projective":
        m = len(c.points)
        vals = [c.cos_squared[i][j] for i in range(m) for j in range(m) if i != j]
        if not vals:
            return CodeReport(None, None, True)
        best = max(vals, key=_Key)
        root = sqrt_exact(best, c.q)
        ok = sign(t) >= 0 and sign(t * t - best) >= 0
        return CodeReport(root, best, ok)
    vals = list(c.inner_products())
    best = max(vals, key=_Key)
    if sign(best) >= 0 and sign(t) >= 0:
        ok = sign(t * t - best * best) >= 0
    else:
        ok = _cmp_mixed(best, t) <= 0
    return CodeReport(best, best * best, ok)


def _cmp_mixed(x, y) -> int:
    try:
        return sign(x - y)
    except Exception:
        return (float(x) > float(y)) - (float(x) < float(y))


# ----------------------------------------------------------------------
# file format


def write_code(c: Code, path) -> None:
    header = {"n": c.n, "space": c.space, "q": None if c.q is None else str(c.q),
              "antipodal": c.antipodal, "name": c.name}
    lines = [json.dumps(header, sort_keys=True)]
    for p in c.points:
        lines.append(json.dumps([scalar_to_json(x) for x in p], sort_keys=True))
    Path(path).write_text("\n".join(lines) + "\n")


def read_code(path) -> Code:
    text = Path(path).read_text().splitlines()
    text = [ln for ln in text if ln.strip()]
    if not text:
        raise ValueError(f"{path}: empty code file")
    try:
        header = json.loads(text[0])
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}:1: bad header: {exc}") from exc
    pts = []
    for lineno, ln in enumerate(text[1:], start=2):
        try:
            pts.append([scalar_from_json(x) for x in json.loads(ln)])
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise ValueError(f"{path}:{lineno}: bad vector: {exc}") from exc
    return Code(int(header["n"]), header["space"], pts, header.get("name", ""),
                bool(header.get("antipodal", False)))
