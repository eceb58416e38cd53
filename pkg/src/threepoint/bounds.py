"""Dual three-point programs, two-point bounds and the restricted primal.

The dual program asks for ``c``, PSD matrices ``F_k`` and an SOS Gram
matrix ``M`` with

    (f0(u^2) + f0(v^2) + f0(t^2))/3 - H(u,v,t) = z^T M z,
    H = c + sum_k <F_k, T_k(u,v,t)>,

(unsquared arguments on spheres) and bounds the energy below by
``(N/2)((N-1)c - <F_0, J>)``.

When a target code is given, complementary slackness forces
``F_k X_k = 0`` for the PSD matrices ``X_k = N(N-2) delta_{k0} J +
sum A T_k(class)`` and forces ``M z(p) = 0`` at every triple ``p`` where the
code attains equality.  These kernels are built into the variables:
``F_k = E_k V_k E_k^T`` and ``M = sum_b E_b V_b E_b^T`` with ``E`` spanning
the complement of the forced kernel.  Projective programs also split ``M``
into four blocks by the characters of the paired sign changes.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .codes import Code, energy, triple_distribution
from .exact_arith import (
    LinearEquation,
    QuadNumber,
    Scalar,
    nullspace,
    rational_parts,
    scalar_from_json,
    scalar_to_json,
    sign,
    to_exact,
)
from .kernels import KernelMatrix, make_T, projective_S, sphere_S
from .polynomials import (
    Multiset,
    TriPoly,
    UniPoly,
    gegenbauer,
    is_nonnegative_on,
)

__all__ = [
    "DEFAULT_BLOCKS",
    "DEFAULT_EPS",
    "DEFAULT_ROOTS",
    "Block",
    "Certificate",
    "DualProgram",
    "TwoPointResult",
    "UnsupportedCaseError",
    "bound_value",
    "build_dual_program",
    "monomials",
    "perturb_potential",
    "primal_restricted",
    "symmetry_orbit",
    "tangency_constraints",
    "two_point_bound",
]

DEFAULT_BLOCKS = ((0, 5), (1, 4), (2, 4), (3, 3), (4, 3), (5, 2))
DEFAULT_EPS = Fraction(1, 1000)
DEFAULT_ROOTS = ((Fraction(0), 3), (Fraction(1, 9), 2), (Fraction(1, 3), 2))

_ZERO = Fraction(0)


class UnsupportedCaseError(ValueError):
    """The code or potential falls outside what the exact pipeline handles."""


def monomials(D: int) -> list[tuple]:
    """Exponent triples of total degree at most ``D`` in lexicographic order."""
    if D < 0:
        raise ValueError("D must be nonnegative")
    return [(i, j, k) for i in range(D + 1) for j in range(D + 1 - i) for k in range(D + 1 - i - j)]


def perturb_potential(f: UniPoly, roots=DEFAULT_ROOTS, eps=DEFAULT_EPS) -> UniPoly:
    """``f - eps * prod (t - r)^m`` over the root multiset.

    ``roots`` is a :class:`Multiset`, a list of ``(root, multiplicity)``
    pairs or a flat list of roots with repetition.
    """
    eps = Fraction(eps)
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if eps == 0:
        return f
    if isinstance(roots, Multiset):
        items = roots.items
    else:
        roots = list(roots)
        if roots and isinstance(roots[0], tuple):
            items = roots
        else:
            items = [(r, 1) for r in roots]
    prod = UniPoly([1])
    for r, m in items:
        prod = prod * UniPoly([-to_exact(r), 1]) ** m
    return f - prod * eps


def bound_value(c, F0, N: int) -> Fraction:
    """``(N/2)((N-1)c - <F_0, J>)``."""
    total = sum((x for row in F0 for x in row), _ZERO) if F0 is not None else _ZERO
    return Fraction(N, 2) * ((N - 1) * to_exact(c) - total)


def symmetry_orbit(point: Sequence, space: str) -> list[tuple]:
    """Images under coordinate permutations (and paired sign flips)."""
    p = tuple(to_exact(x) for x in point)
    signs = [(1, 1, 1), (-1, -1, 1), (-1, 1, -1), (1, -1, -1)] if space == "projective" else [(1, 1, 1)]
    out = []
    seen = set()
    for perm in itertools.permutations(range(3)):
        for s in signs:
            img = tuple(p[perm[i]] * s[i] for i in range(3))
            if img not in seen:
                seen.add(img)
                out.append(img)
    return out


def _in_domain(p: Sequence) -> bool:
    u, v, t = p
    if any(sign(x - 1) >= 0 or sign(x + 1) < 0 for x in p):
        return False
    return sign(1 + 2 * u * v * t - u * u - v * v - t * t) >= 0


def _vech(r: int) -> list[tuple[int, int]]:
    return [(p, q) for p in range(r) for q in range(p, r)]


def _primitive_columns(vectors: list[list[Fraction]]) -> np.ndarray:
    """Integer matrix whose columns are the given vectors scaled to primitive."""
    if not vectors:
        return np.zeros((0, 0), dtype=object)
    cols = []
    for v in vectors:
        den = 1
        for x in v:
            den = den * x.denominator // math.gcd(den, x.denominator)
        ints = [int(x * den) for x in v]
        g = 0
        for x in ints:
            g = math.gcd(g, x)
        g = g or 1
        cols.append([x // g for x in ints])
    return np.array(cols, dtype=object).T


def _split_rows(vectors: list[list[Scalar]]) -> list[list[Fraction]]:
    """Rational and irrational parts of vectors over ``Q(sqrt q)``."""
    out = []
    for v in vectors:
        parts = [rational_parts(x) for x in v]
        out.append([a for a, _ in parts])
        if any(b for _, b in parts):
            out.append([b for _, b in parts])
    return out


def _complement_basis(kernel_rows: list[list[Scalar]], size: int) -> np.ndarray:
    """Integer basis ``E`` (size x r) of vectors orthogonal to ``kernel_rows``."""
    rows = [r for r in _split_rows(kernel_rows) if any(r)]
    if not rows:
        return np.identity(size, dtype=int).astype(object)
    ns = nullspace(rows, size)
    if not ns:
        return np.zeros((size, 0), dtype=object)
    return _primitive_columns(ns)


@dataclass
class Block:
    """One PSD variable ``V`` of the reduced program.

    The full matrix it contributes is ``E V E^T`` placed at ``rows`` of the
    matrix ``group`` (``F<k>`` for kernel blocks, ``M`` or ``G<i>`` for SOS
    blocks).
    """

    name: str
    group: str
    kind: str  # "F" or "SOS"
    rows: tuple
    E: np.ndarray
    offset: int = 0
    k: int | None = None
    multiplier: TriPoly | None = None
    monomials: tuple = ()

    @property
    def size(self) -> int:
        return self.E.shape[1]

    @property
    def nvars(self) -> int:
        return self.size * (self.size + 1) // 2

    def full(self, V: Sequence[Sequence]) -> list[list[Fraction]]:
        """``E V E^T`` with exact entries."""
        E = self.E
        Vm = np.array([[Fraction(x) for x in row] for row in V], dtype=object).reshape(self.size, self.size)
        if self.size == 0:
            return [[_ZERO] * E.shape[0] for _ in range(E.shape[0])]
        out = E.dot(Vm).dot(E.T)
        return [[Fraction(x) for x in row] for row in out]


@dataclass
class Certificate:
    """Exact dual solution: ``c``, kernel blocks ``F``, SOS matrix ``M``."""

    c: Fraction
    F: list
    M: list
    monomial_order: list
    ks: list
    G: list = field(default_factory=list)
    G_monomials: list = field(default_factory=list)
    N: int | None = None
    n: int | None = None
    space: str = "projective"

    def F_by_k(self, k: int):
        for kk, F in zip(self.ks, self.F):
            if kk == k:
                return F
        return None

    def to_json(self) -> dict:
        def mat(m):
            return [[scalar_to_json(x) for x in row] for row in m]

        return {
            "c": scalar_to_json(self.c),
            "ks": list(self.ks),
            "F": [mat(F) for F in self.F],
            "M": mat(self.M),
            "monomial_order": [list(e) for e in self.monomial_order],
            "G": [mat(G) for G in self.G],
            "G_monomials": [[list(e) for e in z] for z in self.G_monomials],
            "N": self.N,
            "n": self.n,
            "space": self.space,
        }

    @classmethod
    def from_json(cls, data: dict) -> "Certificate":
        def mat(m):
            return [[scalar_from_json(x) for x in row] for row in m]

        return cls(
            scalar_from_json(data["c"]),
            [mat(F) for F in data["F"]],
            mat(data["M"]),
            [tuple(e) for e in data["monomial_order"]],
            list(data["ks"]),
            [mat(G) for G in data.get("G", [])],
            [[tuple(e) for e in z] for z in data.get("G_monomials", [])],
            data.get("N"),
            data.get("n"),
            data.get("space", "projective"),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _putinar_multipliers(space: str) -> list[TriPoly]:
    U, V, T = TriPoly.var(0), TriPoly.var(1), TriPoly.var(2)
    gram = 1 + U * V * T * 2 - U * U - V * V - T * T
    return [1 - U * U, 1 - V * V, 1 - T * T, gram]


@dataclass
class DualProgram:
    """Exact data of a dual program in reduced (face-embedded) variables."""

    N: int
    n: int
    space: str
    f0: UniPoly
    blocks_spec: tuple
    sos_degree: int
    kernels: list
    monomial_order: list
    blocks: list
    nvars: int
    equations: list
    objective: dict
    objective_constant: Fraction
    target_poly: TriPoly
    support: list = field(default_factory=list)
    equality_points: list = field(default_factory=list)
    target: Fraction | None = None
    putinar: bool = False
    counts: dict = field(default_factory=dict)

    # -- derived --------------------------------------------------------
    @property
    def block_sizes(self) -> list[int]:
        return [b.size for b in self.blocks]

    def kernel(self, k: int) -> KernelMatrix | None:
        for K in self.kernels:
            if K.k == k:
                return K
        return None

    def objective_value(self, x: Sequence) -> Scalar:
        total = self.objective_constant
        for i, c in self.objective.items():
            total = total + c * x[i]
        return total

    def block_matrix(self, b: Block, x: Sequence) -> list[list]:
        """The reduced symmetric matrix ``V_b`` from the variable vector."""
        r = b.size
        V = [[_ZERO] * r for _ in range(r)]
        for idx, (p, q) in enumerate(_vech(r)):
            V[p][q] = V[q][p] = x[b.offset + idx]
        return V

    def certificate(self, x: Sequence) -> Certificate:
        """Expand reduced variables into full ``c``, ``F_k``, ``M``."""
        x = [Fraction(v) for v in x]
        Fs, ks = [], []
        for k, d in self.blocks_spec:
            ks.append(k)
            Fs.append([[_ZERO] * d for _ in range(d)])
        nz = len(self.monomial_order)
        M = [[_ZERO] * nz for _ in range(nz)]
        G_mats: dict = {}
        for b in self.blocks:
            full = b.full(self.block_matrix(b, x))
            if b.kind == "F":
                target = Fs[ks.index(b.k)]
            elif b.group == "M":
                target = M
            else:
                if b.group not in G_mats:
                    nm = len(b.monomials)
                    G_mats[b.group] = [[_ZERO] * nm for _ in range(nm)]
                target = G_mats[b.group]
            for a, ra in enumerate(b.rows):
                for c_, rc in enumerate(b.rows):
                    target[ra][rc] = full[a][c_]
        G, Gz = [], []
        for name in sorted(G_mats):
            G.append(G_mats[name])
            Gz.append(next(list(b.monomials) for b in self.blocks if b.group == name))
        return Certificate(x[0], Fs, M, list(self.monomial_order), ks, G, Gz, self.N, self.n, self.space)

    # -- serialization --------------------------------------------------
    def to_json(self) -> dict:
        return {
            "N": self.N,
            "n": self.n,
            "space": self.space,
            "f0": self.f0.to_json(),
            "blocks": [list(b) for b in self.blocks_spec],
            "sos_degree": self.sos_degree,
            "putinar": self.putinar,
            "support": [[[scalar_to_json(x) for x in p], cnt] for p, cnt in self.support],
            "target": None if self.target is None else scalar_to_json(self.target),
            "nvars": self.nvars,
            "block_structure": [
                {"name": b.name, "group": b.group, "rows": list(b.rows),
                 "E": [[str(x) for x in row] for row in b.E.tolist()], "offset": b.offset}
                for b in self.blocks
            ],
            "objective": {"constant": scalar_to_json(self.objective_constant),
                          "coefficients": [[i, scalar_to_json(c)] for i, c in sorted(self.objective.items())]},
            "equations": [
                {"label": eq.label, "rhs": scalar_to_json(eq.rhs),
                 "coeffs": [[i, scalar_to_json(c)] for i, c in sorted(eq.coeffs.items())]}
                for eq in self.equations
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    def fingerprint(self) -> str:
        return hashlib.sha256(self.dumps().encode()).hexdigest()

    @classmethod
    def from_json(cls, data: dict) -> "DualProgram":
        """Rebuild from stored parameters; the stored structure must match."""
        support = [(tuple(scalar_from_json(x) for x in p), int(cnt)) for p, cnt in data["support"]]
        prog = build_dual_program(
            data["N"], data["n"], data["space"], UniPoly.from_json(data["f0"]),
            [tuple(b) for b in data["blocks"]], data["sos_degree"],
            support=support or None, putinar=data.get("putinar", False),
        )
        if data.get("target") is not None:
            prog.target = scalar_from_json(data["target"])
        mine = prog.to_json()
        for key in ("nvars", "block_structure", "equations", "objective"):
            if mine[key] != data[key]:
                raise ValueError(f"stored program does not match its rebuild ({key})")
        return prog


def _kernel_matrices(N: int, n: int, space: str, blocks_spec) -> list[KernelMatrix]:
    build = projective_S if space == "projective" else sphere_S
    return [make_T(build(n, k, d), N) for k, d in blocks_spec]


def _target_poly(f0: UniPoly, space: str) -> TriPoly:
    g = f0.of_square() if space == "projective" else f0
    return (g.to_tripoly(0) + g.to_tripoly(1) + g.to_tripoly(2)) / 3


def _sign_character(e: tuple) -> tuple:
    return ((e[0] + e[1]) % 2, (e[0] + e[2]) % 2)


def _eval_monomials(monos: Sequence[tuple], p: Sequence) -> list[Scalar]:
    u, v, t = p
    pw = [[to_exact(1)], [to_exact(1)], [to_exact(1)]]
    top = max((max(e) for e in monos), default=0)
    for i, x in enumerate((u, v, t)):
        for _ in range(top):
            pw[i].append(pw[i][-1] * x)
    return [pw[0][a] * pw[1][b] * pw[2][c] for a, b, c in monos]


def _class_matrix(K: KernelMatrix, triple: Sequence) -> list[list[Scalar]]:
    from .kernels import eval_kernel

    return eval_kernel(K, triple)


def build_dual_program(
    N: int,
    n: int,
    space: str,
    f0: UniPoly,
    blocks: Sequence = DEFAULT_BLOCKS,
    sos_degree: int | None = None,
    target_code: Code | None = None,
    support: Sequence | None = None,
    putinar: bool = False,
) -> DualProgram:
    """Assemble the dual program in reduced variables.

    ``support`` (list of ``(triple, count)`` over ``D``) may be given instead
    of ``target_code``; either one switches on complementary slackness and
    tangency.  ``putinar=True`` adds Gram matrices ``G_i`` for the
    multipliers ``1-u^2, 1-v^2, 1-t^2`` and ``1+2uvt-u^2-v^2-t^2``.
    """
    if space not in ("sphere", "projective"):
        raise ValueError("space must be 'sphere' or 'projective'")
    if N < 3:
        raise ValueError("need N >= 3")
    blocks_spec = tuple((int(k), int(d)) for k, d in blocks)
    if len({k for k, _ in blocks_spec}) != len(blocks_spec):
        raise ValueError("repeated kernel degree in blocks")
    g = _target_poly(f0, space)
    if sos_degree is None:
        sos_degree = max((g.degree + 1) // 2, 0)
    if g.degree > 2 * sos_degree:
        raise ValueError(
            f"potential has degree {g.degree} but the SOS part only reaches {2 * sos_degree}"
        )
    kernels = _kernel_matrices(N, n, space, blocks_spec)
    z = monomials(sos_degree)

    # target data -------------------------------------------------------
    sup: list = []
    target = None
    if target_code is not None:
        if target_code.N != N or target_code.space != space:
            raise ValueError("target code does not match (N, space)")
        dist = triple_distribution(target_code)
        for key, trip, cnt in dist.labeled():
            if trip is None:
                raise UnsupportedCaseError(
                    "triple coordinates leave the code's quadratic field; "
                    "equality points cannot be written exactly"
                )
            sup.append((trip, cnt))
        conv = "E_hat" if space == "projective" else "E_tilde"
        target = energy(target_code, f0, conv)
    elif support is not None:
        sup = [(tuple(to_exact(x) for x in p), int(c)) for p, c in support]
    for p, _ in sup:
        if not _in_domain(p):
            raise ValueError(f"support triple {p} lies outside D")
    points: list = []
    for p, _ in sup:
        for img in symmetry_orbit(p, space):
            if img not in points:
                points.append(img)

    # kernel blocks -----------------------------------------------------
    blocks_out: list[Block] = []
    counts: dict = {}
    for K in kernels:
        d = K.d
        if sup:
            X = [[(N * (N - 2) if K.k == 0 else 0) for _ in range(d)] for _ in range(d)]
            X = [[to_exact(x) for x in row] for row in X]
            for p, cnt in sup:
                val = _class_matrix(K, p)
                X = [[X[i][j] + cnt * val[i][j] for j in range(d)] for i in range(d)]
            E = _complement_basis([list(row) for row in X], d)
        else:
            E = np.identity(d, dtype=int).astype(object)
        blocks_out.append(Block(f"F{K.k}", f"F{K.k}", "F", tuple(range(d)), E, k=K.k))

    # SOS blocks ----------------------------------------------------------
    sos_terms = [("M", TriPoly.constant(1), z)]
    if putinar:
        for i, q in enumerate(_putinar_multipliers(space), start=1):
            zi = monomials(max(sos_degree - (q.degree + 1) // 2, 0))
            sos_terms.append((f"G{i}", q, zi))
    for group, q, zz in sos_terms:
        if space == "projective":
            chars = sorted({_sign_character(e) for e in zz})
            parts = [(ch, tuple(i for i, e in enumerate(zz) if _sign_character(e) == ch)) for ch in chars]
        else:
            parts = [(None, tuple(range(len(zz))))]
        for ch, rows in parts:
            sub = [zz[i] for i in rows]
            kern = []
            for p in points:
                if q.evaluate(p) != 0:
                    kern.append(_eval_monomials(sub, p))
            E = _complement_basis(kern, len(sub))
            name = group if ch is None else f"{group}[{ch[0]}{ch[1]}]"
            blocks_out.append(Block(name, group, "SOS", rows, E, multiplier=q, monomials=tuple(zz)))

    offset = 1
    for b in blocks_out:
        b.offset = offset
        offset += b.nvars
    nvars = offset

    # coefficient matching ---------------------------------------------
    rows: dict = {}

    def add(mu, var, coef):
        if coef != 0:
            row = rows.setdefault(mu, {})
            row[var] = row.get(var, _ZERO) + coef

    add((0, 0, 0), 0, Fraction(1))
    for K, b in zip(kernels, blocks_out[: len(kernels)]):
        if b.size == 0:
            continue
        cmat: dict = {}
        for i in range(K.d):
            for j in range(K.d):
                for mu, c in K.entries[i][j].terms.items():
                    cmat.setdefault(mu, np.zeros((K.d, K.d), dtype=object))[i, j] = Fraction(c)
        E = b.E
        vech = _vech(b.size)
        for mu, C in cmat.items():
            B = E.T.dot(C).dot(E)
            for idx, (p, qq) in enumerate(vech):
                add(mu, b.offset + idx, B[p, qq] if p == qq else 2 * B[p, qq])
    for b in blocks_out[len(kernels):]:
        if b.size == 0:
            continue
        zz = b.monomials
        sub = [zz[i] for i in b.rows]
        by_mu: dict = {}
        for a, ea in enumerate(sub):
            for c_, ec in enumerate(sub):
                base = (ea[0] + ec[0], ea[1] + ec[1], ea[2] + ec[2])
                for e, coef in b.multiplier.terms.items():
                    mu = (base[0] + e[0], base[1] + e[1], base[2] + e[2])
                    by_mu.setdefault(mu, []).append((a, c_, coef))
        E = b.E
        vech = _vech(b.size)
        for mu, pairs in by_mu.items():
            B = np.zeros((b.size, b.size), dtype=object)
            for a, c_, coef in pairs:
                B = B + np.outer(E[a], E[c_]) * coef
            for idx, (p, qq) in enumerate(vech):
                add(mu, b.offset + idx, B[p, qq] if p == qq else 2 * B[p, qq])
    all_mu = sorted(set(rows) | set(g.terms))
    equations = []
    for mu in all_mu:
        coeffs = {i: Fraction(c) for i, c in rows.get(mu, {}).items() if c != 0}
        rhs = g.coeff(mu)
        if not coeffs and rhs == 0:
            continue
        equations.append(LinearEquation(coeffs, rhs, f"coef{mu}"))

    # slackness and tangency, rewritten in reduced variables -------------
    prog_tmp = DualProgram(N, n, space, f0, blocks_spec, sos_degree, kernels, z, blocks_out, nvars,
                           [], {}, _ZERO, g, sup, points, target, putinar)
    if sup:
        for K, b in zip(kernels, blocks_out[: len(kernels)]):
            d = K.d
            X = [[to_exact(N * (N - 2) if K.k == 0 else 0) for _ in range(d)] for _ in range(d)]
            for p, cnt in sup:
                val = _class_matrix(K, p)
                X = [[X[i][j] + cnt * val[i][j] for j in range(d)] for i in range(d)]
            eq = _reduce_kernel_equation(b, {K.k: X}, _ZERO, f"slack F{K.k}")
            equations.extend(_nontrivial(eq, counts, "slackness"))
        for eq in tangency_constraints(prog_tmp, [p for p, _ in sup]):
            red = _reduce_full_equation(prog_tmp, eq)
            equations.extend(_nontrivial(red, counts, "tangency"))

    # objective ----------------------------------------------------------
    objective = {0: Fraction(N * (N - 1), 2)}
    for K, b in zip(kernels, blocks_out[: len(kernels)]):
        if K.k != 0 or b.size == 0:
            continue
        J = np.full((K.d, K.d), Fraction(1), dtype=object)
        B = b.E.T.dot(J).dot(b.E)
        for idx, (p, qq) in enumerate(_vech(b.size)):
            c = B[p, qq] if p == qq else 2 * B[p, qq]
            if c:
                objective[b.offset + idx] = objective.get(b.offset + idx, _ZERO) - Fraction(N, 2) * c
    prog_tmp.equations = equations
    prog_tmp.objective = objective
    prog_tmp.counts = counts
    return prog_tmp


def _nontrivial(eqs, counts: dict, label: str) -> list:
    out = []
    for eq in eqs:
        if not eq.coeffs and eq.rhs == 0:
            counts[label + "_structural"] = counts.get(label + "_structural", 0) + 1
            continue
        counts[label] = counts.get(label, 0) + 1
        out.append(eq)
    return out


def _reduce_kernel_equation(b: Block, mats: dict, rhs: Scalar, label: str) -> list[LinearEquation]:
    """``<F_k, X> = rhs`` in the reduced variables of block ``b``.

    ``X`` may have entries in ``Q(sqrt q)``; the result is split into
    rational equations.
    """
    X = mats[b.k]
    d = len(X)
    re = np.array([[rational_parts(X[i][j])[0] for j in range(d)] for i in range(d)], dtype=object)
    im = np.array([[rational_parts(X[i][j])[1] for j in range(d)] for i in range(d)], dtype=object)
    ra, rb = rational_parts(to_exact(rhs))
    out = []
    for part, r in ((re, ra), (im, rb)):
        if b.size:
            B = b.E.T.dot(part).dot(b.E)
            coeffs = {}
            for idx, (p, q) in enumerate(_vech(b.size)):
                c = B[p, q] if p == q else 2 * B[p, q]
                if c:
                    coeffs[b.offset + idx] = Fraction(c)
        else:
            coeffs = {}
        if part is im and not any(x for x in im.flat) and rb == 0:
            continue
        out.append(LinearEquation(coeffs, r, label))
    return out


def _reduce_full_equation(prog: DualProgram, eq: LinearEquation) -> list[LinearEquation]:
    """Rewrite an equation over full unknowns ``c`` and ``F_k[i,j]``."""
    mats: dict = {}
    c0 = _ZERO
    for name, coef in eq.coeffs.items():
        if name == "c":
            c0 = coef
            continue
        _, k, i, j = name
        K = prog.kernel(k)
        X = mats.setdefault(k, [[_ZERO] * K.d for _ in range(K.d)])
        if i == j:
            X[i][i] = X[i][i] + coef
        else:
            X[i][j] = X[i][j] + coef / 2
            X[j][i] = X[j][i] + coef / 2
    # merge all kernel parts into one pair of rational equations
    total_re: dict = {}
    total_im: dict = {}
    a, b_ = rational_parts(to_exact(c0))
    if a:
        total_re[0] = a
    if b_:
        total_im[0] = b_
    blocks = {b.k: b for b in prog.blocks if b.kind == "F"}
    for k, X in mats.items():
        blk = blocks[k]
        d = len(X)
        for target, idx_part in ((total_re, 0), (total_im, 1)):
            P = np.array([[rational_parts(X[i][j])[idx_part] for j in range(d)] for i in range(d)], dtype=object)
            if blk.size == 0:
                continue
            B = blk.E.T.dot(P).dot(blk.E)
            for idx, (p, q) in enumerate(_vech(blk.size)):
                c = B[p, q] if p == q else 2 * B[p, q]
                if c:
                    target[blk.offset + idx] = target.get(blk.offset + idx, _ZERO) + Fraction(c)
    ra, rb = rational_parts(to_exact(eq.rhs))
    out = [LinearEquation({i: c for i, c in total_re.items() if c}, ra, eq.label)]
    if total_im or rb:
        out.append(LinearEquation({i: c for i, c in total_im.items() if c}, rb, eq.label + " (sqrt part)"))
    return out


def tangency_constraints(program: DualProgram, code_triples: Sequence) -> list[LinearEquation]:
    """Value and gradient equality of ``H`` and the potential average.

    Four equations per triple, over the full unknowns ``"c"`` and
    ``("F", k, i, j)`` with ``i <= j``; coefficients may lie in ``Q(sqrt q)``.
    """
    g = program.target_poly
    out = []
    for p in code_triples:
        p = tuple(to_exact(x) for x in p)
        if not _in_domain(p):
            raise ValueError(f"triple {p} lies outside D")
        for deriv in (None, 0, 1, 2):
            coeffs: dict = {}
            if deriv is None:
                coeffs["c"] = Fraction(1)
                rhs = g.evaluate(p)
            else:
                rhs = g.partial(deriv).evaluate(p)
            for K in program.kernels:
                for i in range(K.d):
                    for j in range(i, K.d):
                        poly = K.entries[i][j]
                        if deriv is not None:
                            poly = poly.partial(deriv)
                        val = poly.evaluate(p)
                        if i != j:
                            val = val * 2
                        if val != 0:
                            coeffs[("F", K.k, i, j)] = val
            label = f"tangent{tuple(str(x) for x in p)}" + ("" if deriv is None else f" d{'uvt'[deriv]}")
            out.append(LinearEquation(coeffs, rhs, label))
    return out


# ----------------------------------------------------------------------
# two-point bound


@dataclass
class TwoPointResult:
    bound: Fraction
    c: Fraction
    a: list  # a[k-1] multiplies P_{2k}^n (projective) or P_k^n (sphere)
    sharp_target: Fraction | None = None
    exact: bool = True

    @property
    def sharp(self) -> bool:
        return self.sharp_target is not None and self.bound == self.sharp_target


def _two_point_polys(n: int, K: int, space: str) -> list[UniPoly]:
    """Gegenbauer polynomials in the pair variable (``s = t^2`` for lines)."""
    if space == "projective":
        return [gegenbauer(n, 2 * k).even_part_in_square() for k in range(1, K + 1)]
    return [gegenbauer(n, k) for k in range(1, K + 1)]


def _two_point_ok(f: UniPoly, c: Fraction, a: Sequence, polys, lo, hi) -> bool:
    if any(x < 0 for x in a):
        return False
    r = f - c
    for ak, P in zip(a, polys):
        r = r - P * ak
    return is_nonnegative_on(r, lo, hi)


def two_point_bound(N: int, n: int, f: UniPoly, max_degree: int | None = None,
                    space: str = "projective", target: Fraction | None = None,
                    precision_bits: int = 53) -> TwoPointResult:
    """Yudin-style linear programming bound with an exact certificate.

    Finds ``c`` and ``a_k >= 0`` with ``c + sum a_k P_k <= f`` on the pair
    domain (``[0,1]`` in ``s = t^2`` for lines, ``[-1,1]`` on spheres) and
    returns ``(N/2)((N-1)c - sum a_k)``.  The numerical optimum is
    rationalized and the inequality is checked exactly by Sturm sequences.
    """
    from .solver import SDPData, solve_sdp_data

    f = UniPoly(f.coeffs)
    if N < 2:
        raise ValueError("need N >= 2")
    lo, hi = (Fraction(0), Fraction(1)) if space == "projective" else (Fraction(-1), Fraction(1))
    if f.degree <= 0:
        c = f.coeff(0)
        return TwoPointResult(Fraction(N * (N - 1), 2) * c, c, [], target)
    K = max_degree if max_degree is not None else f.degree + 2
    polys = _two_point_polys(n, K, space)
    D = max(f.degree, max((p.degree for p in polys), default=0))
    # unknowns: c, a_1..a_K, Gram matrices of the Lukacs certificate
    if D % 2 == 0:
        m = D // 2
        mults = [UniPoly([1]), UniPoly([-lo * hi, lo + hi, -1])]  # (s-lo)(hi-s)
        sizes = [m + 1, m]
    else:
        m = (D - 1) // 2
        mults = [UniPoly([-lo, 1]), UniPoly([hi, -1])]
        sizes = [m + 1, m + 1]
    nv = 1 + K + sum(s * (s + 1) // 2 for s in sizes)
    rows: dict = {}

    def add(deg, var, coef):
        if coef:
            rows.setdefault(deg, {})
            rows[deg][var] = rows[deg].get(var, _ZERO) + coef

    add(0, 0, Fraction(1))
    for k, P in enumerate(polys, start=1):
        for deg, coef in enumerate(P.coeffs):
            add(deg, k, coef)
    off = 1 + K
    gram_offsets = []
    for mult, s in zip(mults, sizes):
        gram_offsets.append(off)
        for idx, (p, q) in enumerate(_vech(s)):
            for e, coef in enumerate(mult.coeffs):
                add(p + q + e, off + idx, coef if p == q else 2 * coef)
        off += s * (s + 1) // 2
    eqs = []
    for deg in range(D + 1):
        eqs.append(LinearEquation(rows.get(deg, {}), f.coeff(deg), f"deg{deg}"))
    from .exact_arith import solve_affine

    sol = solve_affine(eqs, list(range(nv)))
    obj = {0: Fraction(N * (N - 1), 2)}
    for k in range(1, K + 1):
        obj[k] = -Fraction(N, 2)
    layout = [(1 + k, 1) for k in range(K)] + list(zip(gram_offsets, sizes))
    data = SDPData.from_affine(sol, layout, obj)
    res = solve_sdp_data(data, precision_bits=precision_bits)
    xs = data.point_float(res.lam)
    c_num, a_num = xs[0], xs[1 : 1 + K]
    # rationalize: try simple fractions first
    for den in (10, 100, 1000, 10 ** 4, 10 ** 6, 10 ** 8):
        c = Fraction(c_num).limit_denominator(den)
        a = [max(Fraction(x).limit_denominator(den), _ZERO) for x in a_num]
        if _two_point_ok(f, c, a, polys, lo, hi):
            break
    else:
        a = [max(Fraction(x).limit_denominator(10 ** 8), _ZERO) for x in a_num]
        r = f
        for ak, P in zip(a, polys):
            r = r - P * ak
        # shift c below the minimum of r on the interval
        grid = [lo + (hi - lo) * Fraction(i, 2000) for i in range(2001)]
        c = min(r(x) for x in grid) - Fraction(1, 10 ** 6)
        while not _two_point_ok(f, c, a, polys, lo, hi):
            c -= Fraction(1, 10 ** 4)
    bound = Fraction(N, 2) * ((N - 1) * c - sum(a, _ZERO))
    return TwoPointResult(bound, c, a, target)


# ----------------------------------------------------------------------
# restricted primal


def primal_restricted(N: int, f0: UniPoly, support: Sequence, blocks: Sequence = DEFAULT_BLOCKS,
                      n: int = 3, space: str = "projective", precision_bits: int = 256,
                      relax=None):
    """Numerical optimum of the primal program on a fixed support.

    Minimizes ``(1/(6(N-2))) sum A (f0(u^2)+f0(v^2)+f0(t^2))`` over ``A >= 0``
    on the support triples, with ``sum A = N(N-1)(N-2)`` and
    ``N(N-2) delta_{k0} J + sum A T_k(triple)`` PSD.  On a code's own
    support the feasible set is typically a single point, so each cone is
    relaxed by ``relax`` (``A >= -relax``, ``X + relax I`` PSD; default
    ``2^(-3 precision_bits / 4)``) to give the barrier method an interior.
    The relaxed value is a lower bound converging to the optimum as
    ``relax -> 0``.  Returns an ``mpmath`` number.
    """
    from .solver import SDPData, solve_sdp_data

    import mpmath

    sup = [tuple(to_exact(x) for x in p) for p in support]
    if not sup:
        raise ValueError("empty support")
    for p in sup:
        if not _in_domain(p):
            raise ValueError(f"support triple {p} lies outside D")
    eps = Fraction(1, 2 ** (3 * precision_bits // 4)) if relax is None else Fraction(relax)
    g = _target_poly(f0, space)
    weights = [g.evaluate(p) * 3 / (6 * (N - 2)) for p in sup]
    kernels = _kernel_matrices(N, n, space, tuple(blocks)) if blocks else []
    total = N * (N - 1) * (N - 2)
    m = len(sup)
    # A = A0 + B lam with sum A = total
    A0 = [Fraction(total, m)] * m
    basis = []
    for i in range(1, m):
        v = [_ZERO] * m
        v[0], v[i] = Fraction(-1), Fraction(1)
        basis.append(v)
    blocks_data, groups = [], []
    for i in range(m):
        blocks_data.append(([[A0[i] + eps]], [[[b[i]]] for b in basis]))
        groups.append(f"A{i}")
    for K in kernels:
        d = K.d
        vals = [_class_matrix(K, p) for p in sup]
        const = N * (N - 2) if K.k == 0 else 0
        X0 = [[const + (eps if r == s else 0) + sum((A0[i] * vals[i][r][s] for i in range(m)), _ZERO)
               for s in range(d)] for r in range(d)]
        Xs = [[[sum((b[i] * vals[i][r][s] for i in range(m)), _ZERO) for s in range(d)] for r in range(d)]
              for b in basis]
        blocks_data.append((X0, Xs))
        groups.append(f"X{K.k}")
    for blk in blocks_data:
        for mat in [blk[0]] + blk[1]:
            for row in mat:
                for x in row:
                    if isinstance(x, QuadNumber):
                        raise UnsupportedCaseError("kernel values must be rational")
    if any(isinstance(w, QuadNumber) for w in weights):
        raise UnsupportedCaseError("objective must be rational")
    obj0 = sum((w * a for w, a in zip(weights, A0)), _ZERO)
    obj = [-sum((w * b[i] for i, w in enumerate(weights)), _ZERO) for b in basis]
    # maximize the negated objective
    data = SDPData(len(basis), blocks_data, obj, -obj0, groups)
    res = solve_sdp_data(data, precision_bits=precision_bits, tol=mpmath.mpf(2) ** (-precision_bits // 3))
    return -res.objective_mp
