"""Numerical solution of parameterized SDPs, SDPA exchange and rounding.

Every problem is handled in the form

    maximize  obj . lam + obj0   subject to   X_b(lam) = A0_b + sum_i lam_i A_bi  PSD,

where ``lam`` are coordinates in an exact basis of the affine solution set
of all linear constraints.  The interior-point method is a damped-Newton
barrier method in float64; with ``precision_bits > 53`` the final iterates
are refined with FLINT ball arithmetic at that precision.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import flint
import mpmath
import numpy as np

from .exact_arith import AffineSolution, from_fmpq, solve_affine

__all__ = [
    "AffineParameterization",
    "SDPData",
    "SolveResult",
    "SolverError",
    "parameterize",
    "solve_numeric",
    "solve_sdp_data",
    "export_sdpa",
    "read_sdpa",
    "import_solution",
    "sdpa_exchange",
    "round_lambda",
    "round_certificate",
]

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    """No strictly feasible point, divergence, or iteration limit."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


# ----------------------------------------------------------------------
# parameterization


@dataclass
class AffineParameterization:
    """``x = particular + sum lam_i basis_i`` for all program unknowns."""

    unknowns: tuple
    particular: tuple
    basis: tuple
    _fmpq: tuple | None = field(default=None, repr=False)

    @classmethod
    def from_solution(cls, sol: AffineSolution) -> "AffineParameterization":
        return cls(sol.unknowns, sol.particular, sol.basis)

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def _mats(self):
        if self._fmpq is None:
            n, m = len(self.particular), len(self.basis)
            x0 = flint.fmpq_mat(n, 1, [flint.fmpq(x.numerator, x.denominator) for x in self.particular])
            entries = []
            for i in range(n):
                for j in range(m):
                    v = self.basis[j][i]
                    entries.append(flint.fmpq(v.numerator, v.denominator))
            B = flint.fmpq_mat(n, m, entries) if m else None
            self._fmpq = (x0, B)
        return self._fmpq

    def point(self, lams: Sequence) -> list[Fraction]:
        """Exact point for rational coordinates."""
        if len(lams) != self.dimension:
            raise ValueError("wrong number of coordinates")
        x0, B = self._mats()
        if not self.dimension:
            return [from_fmpq(x0[i, 0]) for i in range(x0.nrows())]
        lam = flint.fmpq_mat(self.dimension, 1, [flint.fmpq(Fraction(v).numerator, Fraction(v).denominator) for v in lams])
        x = x0 + B * lam
        return [from_fmpq(x[i, 0]) for i in range(x.nrows())]

    def point_float(self, lams: Sequence[float]) -> np.ndarray:
        x0 = np.array([float(v) for v in self.particular])
        if not self.dimension:
            return x0
        B = np.array([[float(v) for v in b] for b in self.basis]).T
        return x0 + B @ np.asarray(lams, dtype=float)


def parameterize(program) -> AffineParameterization:
    """Exact basis of all reduced variables satisfying every program equation."""
    sol = solve_affine(program.equations, list(range(program.nvars)))
    return AffineParameterization.from_solution(sol)


# ----------------------------------------------------------------------
# problem data


def _vech_pairs(s: int):
    return [(p, q) for p in range(s) for q in range(p, s)]


@dataclass
class SDPData:
    """Exact block data of ``X_b(lam) = A0_b + sum lam_i A_bi``.

    ``blocks`` holds ``(A0, [A_1, ..., A_m])`` with exact square matrices
    (nested lists).  ``groups`` labels blocks that belong to one exported
    matrix.
    """

    m: int
    blocks: list
    obj: list
    obj0: Fraction = Fraction(0)
    groups: list | None = None
    param: AffineParameterization | None = None

    def __post_init__(self):
        self.obj = [Fraction(x) for x in self.obj]
        self.obj0 = Fraction(self.obj0)
        if self.groups is None:
            self.groups = [f"B{i}" for i in range(len(self.blocks))]
        self._float = None

    @property
    def sizes(self) -> list[int]:
        return [len(A0) for A0, _ in self.blocks]

    @property
    def objective_constant(self) -> bool:
        return all(c == 0 for c in self.obj)

    def float_blocks(self):
        if self._float is None:
            out = []
            for A0, As in self.blocks:
                s = len(A0)
                a0 = np.array([[float(x) for x in row] for row in A0]).reshape(s, s)
                a = np.array([[[float(x) for x in row] for row in A] for A in As]).reshape(self.m, s, s)
                out.append((a0, a))
            self._float = out
        return self._float

    @classmethod
    def from_affine(cls, sol, layout: Sequence, obj: dict, obj0=0, groups=None) -> "SDPData":
        """Blocks given by vech slices ``(offset, size)`` of ``x``."""
        param = sol if isinstance(sol, AffineParameterization) else AffineParameterization.from_solution(sol)
        m = param.dimension
        blocks = []
        for off, s in layout:
            pairs = _vech_pairs(s)

            def sym(vec):
                M = [[Fraction(0)] * s for _ in range(s)]
                for idx, (p, q) in enumerate(pairs):
                    M[p][q] = M[q][p] = vec[off + idx]
                return M

            blocks.append((sym(param.particular), [sym(b) for b in param.basis]))
        o = [sum((Fraction(c) * b[i] for i, c in obj.items()), Fraction(0)) for b in param.basis]
        c0 = Fraction(obj0) + sum((Fraction(c) * param.particular[i] for i, c in obj.items()), Fraction(0))
        return cls(m, blocks, o, c0, groups, param)

    @classmethod
    def from_program(cls, program, param: AffineParameterization) -> "SDPData":
        layout, groups = [], []
        for b in program.blocks:
            if b.size:
                layout.append((b.offset, b.size))
                groups.append(b.group)
        return cls.from_affine(param, layout, program.objective, program.objective_constant, groups)

    def point_float(self, lam) -> np.ndarray:
        if self.param is None:
            raise ValueError("data has no parameterization")
        return self.param.point_float([float(x) for x in lam])

    def objective_at(self, lam) -> Fraction:
        return self.obj0 + sum((c * Fraction(x) for c, x in zip(self.obj, lam)), Fraction(0))


@dataclass
class SolveResult:
    lam: list  # mpmath numbers at the working precision
    objective: float
    objective_mp: object
    gap: float
    status: str
    iterations: int
    min_eigenvalues: list
    precision_bits: int
    diagnostics: dict = field(default_factory=dict)

    @property
    def lam_float(self) -> np.ndarray:
        return np.array([float(x) for x in self.lam])


# ----------------------------------------------------------------------
# float64 barrier method


class _Barrier:
    """Log-det barrier for the float blocks plus optional extra linear blocks."""

    def __init__(self, fblocks, extra=()):
        self.blocks = list(fblocks) + list(extra)
        self.m = fblocks[0][1].shape[0] if fblocks else extra[0][1].shape[0]

    def mats(self, lam):
        return [a0 + np.tensordot(lam, a, axes=1) for a0, a in self.blocks]

    def feasible(self, lam) -> bool:
        try:
            for X in self.mats(lam):
                np.linalg.cholesky(X)
        except np.linalg.LinAlgError:
            return False
        return True

    def logdet(self, lam) -> float:
        total = 0.0
        for X in self.mats(lam):
            sgn, ld = np.linalg.slogdet(X)
            if sgn <= 0:
                return -math.inf
            total += ld
        return total

    def derivatives(self, lam):
        g = np.zeros(self.m)
        H = np.zeros((self.m, self.m))
        for (a0, a), X in zip(self.blocks, self.mats(lam)):
            L = np.linalg.cholesky(X)
            Li = np.linalg.inv(L)
            Xi = Li.T @ Li
            g += np.einsum("kij,ij->k", a, Xi)
            At = Li @ a @ Li.T
            F = At.reshape(self.m, -1)
            H += F @ F.T
        return g, H

    def min_eigs(self, lam):
        return [float(np.linalg.eigvalsh(X)[0]) for X in self.mats(lam)]


def _scaled_solve(H: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Solve ``H x = g`` for PSD ``H`` after symmetric diagonal scaling."""
    d = np.sqrt(np.diag(H))
    d[d == 0] = 1.0
    Hs = H / d[:, None] / d[None, :]
    gs = g / d
    try:
        L = np.linalg.cholesky(Hs)
        y = np.linalg.solve(L.T, np.linalg.solve(L, gs))
    except np.linalg.LinAlgError:
        w, V = np.linalg.eigh(Hs)
        keep = w > 1e-14 * w[-1]
        y = V[:, keep] @ ((V[:, keep].T @ gs) / w[keep])
    return y / d


def _newton_center(bar: _Barrier, c: np.ndarray, t: float, lam: np.ndarray, tol: float, max_iter: int):
    """Maximize ``t c.lam + logdet`` by damped Newton from a feasible ``lam``."""
    it = 0
    dec = math.inf
    for it in range(1, max_iter + 1):
        g, H = bar.derivatives(lam)
        grad = t * c + g
        step = _scaled_solve(H, grad)
        dec = float(math.sqrt(max(grad @ step, 0.0)))
        if dec < tol:
            break
        alpha = 1.0 / (1.0 + dec) if dec > 0.25 else 1.0
        while alpha > 1e-12 and not bar.feasible(lam + alpha * step):
            alpha *= 0.5
        if alpha <= 1e-12:
            break
        lam = lam + alpha * step
        if not np.all(np.isfinite(lam)) or np.max(np.abs(lam)) > 1e15:
            raise SolverError("iterates diverge (problem unbounded?)", {"iterations": it})
    return lam, dec, it


def _phase_one(data: SDPData, fblocks, max_iter: int):
    """Find ``lam`` with every block positive definite."""
    m = data.m
    lam = np.zeros(m)
    mins = [np.linalg.eigvalsh(a0)[0] if a0.size else 1.0 for a0, _ in fblocks]
    if min(mins) > 0:
        return lam, 0
    s0 = min(mins) - 1.0
    # variables (lam, s); blocks A0 + sum lam A_i - s I
    ext = []
    for a0, a in fblocks:
        sz = a0.shape[0]
        col = -np.eye(sz)[None, :, :]
        ext.append((a0, np.concatenate([a, col], axis=0)))
    tr0 = sum(float(np.trace(a0)) for a0, _ in fblocks)
    R = 1e6 * (abs(tr0) + sum(a0.shape[0] for a0, _ in fblocks))
    trace_row = np.array([sum(float(np.trace(a[i])) for _, a in fblocks) for i in range(m)] + [-sum(a0.shape[0] for a0, _ in fblocks)])
    ext.append((np.array([[R - tr0]]), -trace_row.reshape(m + 1, 1, 1)))
    cap = np.zeros((m + 1, 1, 1))
    cap[m, 0, 0] = -1.0
    ext.append((np.array([[1.0]]), cap))
    bar = _Barrier(ext)
    x = np.concatenate([lam, [s0]])
    c = np.zeros(m + 1)
    c[m] = 1.0
    t = 1.0
    total = 0
    for _ in range(60):
        x, _, it = _newton_center(bar, c, t, x, 1e-6, max_iter)
        total += it
        if x[m] > 0:
            lam = x[:m]
            if all(np.linalg.eigvalsh(a0 + np.tensordot(lam, a, axes=1))[0] > 0 for a0, a in fblocks):
                return lam, total
        if (sum(a0.shape[0] for a0, _ in ext)) / t < 1e-10:
            break
        t *= 8.0
    raise SolverError("no strictly feasible point found", {"best_margin": float(x[m]), "iterations": total})


def _float_solve(data: SDPData, max_iter: int, gap_tol: float):
    fblocks = [fb for fb in data.float_blocks() if fb[0].size]
    lam, it1 = _phase_one(data, fblocks, max_iter)
    c = np.array([float(x) for x in data.obj])
    total_dim = sum(a0.shape[0] for a0, _ in fblocks)
    if data.objective_constant:
        # analytic center; a loose trace bound keeps it well defined
        tr = sum(float(np.trace(a0 + np.tensordot(lam, a, axes=1))) for a0, a in fblocks)
        R = 1e3 * (abs(tr) + total_dim)
        row = np.array([sum(float(np.trace(a[i])) for _, a in fblocks) for i in range(data.m)])
        base = sum(float(np.trace(a0)) for a0, _ in fblocks)
        trace_block = (np.array([[R - base]]), -row.reshape(data.m, 1, 1))
        bar = _Barrier(fblocks, [trace_block])
        lam, dec, it2 = _newton_center(bar, np.zeros(data.m), 0.0, lam, 1e-9, max_iter)
        return lam, 0.0, it1 + it2, bar, 0.0, [trace_block]
    bar = _Barrier(fblocks)
    t = 1.0
    its = it1
    prev = None
    while True:
        new, dec, it = _newton_center(bar, c, t, lam, 1e-6, max_iter)
        its += it
        if its > max_iter * 50:
            raise SolverError("iteration limit", {"t": t})
        if prev is not None and _ill_conditioned(bar, new):
            # float64 cannot resolve the next centre; keep the last good one
            return lam, total_dim / (t / 10.0), its, bar, t / 10.0, []
        lam, prev = new, lam
        gap = total_dim / t
        if gap < gap_tol:
            return lam, gap, its, bar, t, []
        t *= 10.0


def _ill_conditioned(bar: _Barrier, lam, ratio: float = 1e-11) -> bool:
    for X in bar.mats(lam):
        w = np.linalg.eigvalsh(X)
        if w[0] <= ratio * max(abs(w[-1]), 1.0):
            return True
    return False


# ----------------------------------------------------------------------
# high-precision refinement with ball arithmetic


def _arb_mat(rows) -> flint.arb_mat:
    n = len(rows)
    m = len(rows[0]) if n else 0
    q = flint.fmpq_mat(n, m, [flint.fmpq(x.numerator, x.denominator) for row in rows for x in row])
    return flint.arb_mat(q)


class _ArbData:
    def __init__(self, data: SDPData, extra_float=()):
        self.m = data.m
        self.blocks = []
        for A0, As in data.blocks:
            s = len(A0)
            if not s:
                continue
            a0 = _arb_mat([[x for row in A0 for x in row]])  # 1 x s^2
            flat = _arb_mat([[x for row in A for x in row] for A in As]) if self.m else None
            self.blocks.append((s, a0, flat))
        self.extra = []
        for a0, a in extra_float:
            # trace block: exact rational conversion of the float data
            self.extra.append((1, flint.arb_mat(1, 1, [flint.arb(float(a0[0, 0]))]),
                               flint.arb_mat(self.m, 1, [flint.arb(float(a[i, 0, 0])) for i in range(self.m)])))
        self.obj = flint.arb_mat(self.m, 1, [flint.arb(flint.fmpq(c.numerator, c.denominator)) for c in data.obj])
        self.obj0 = flint.arb(flint.fmpq(data.obj0.numerator, data.obj0.denominator))
        self._cache: dict = {}

    def _low(self, flat):
        key = (id(flat), flint.ctx.prec)
        if key not in self._cache:
            self._cache[key] = flat * 1
        return self._cache[key]

    def mats(self, lam: flint.arb_mat):
        out = []
        for s, a0, flat in self.blocks + self.extra:
            vec = a0 + (lam.transpose() * flat if flat is not None else 0)
            out.append((s, flint.arb_mat(s, s, [vec[0, i] for i in range(s * s)]), flat))
        return out

    def gradient(self, lam, t):
        g = self.obj * t
        invs = []
        for s, X, flat in self.mats(lam):
            Xi = X.solve(flint.arb_mat(s, s, [1 if i == j else 0 for i in range(s) for j in range(s)]), algorithm="approx")
            invs.append((s, Xi, flat))
            if flat is not None:
                v = flint.arb_mat(s * s, 1, [Xi[i, j] for i in range(s) for j in range(s)])
                g = g + flat * v
        return g, invs

    def hessian(self, invs, low: bool = False):
        """``H_ij = tr(X^-1 A_i X^-1 A_j)`` summed over blocks.

        With ``low`` the data is first rounded to the current precision.
        """
        H = flint.arb_mat(self.m, self.m)
        for s, Xi, flat in invs:
            if flat is None:
                continue
            if low:
                flat = self._low(flat)
                Xi = Xi * 1
            x = [[Xi[p, q] for q in range(s)] for p in range(s)]
            kron = flint.arb_mat(s * s, s * s, [x[p][r] * x[q][w] for p in range(s) for q in range(s)
                                                for r in range(s) for w in range(s)])
            H = H + flat * kron * flat.transpose()
        return H


def _arb_to_mpf(x: flint.arb):
    man, exp = x.mid().man_exp()
    return mpmath.mpf((int(man), int(exp))) if int(man) else mpmath.mpf(0)


def _refine(data: SDPData, lam0: np.ndarray, t: float, extra, bits: int, max_iter: int):
    """Newton refinement of the centering problem at ``bits`` of precision.

    The Hessian is formed once at a reduced precision and reused (a chord
    method); it is rebuilt whenever the decrement stops shrinking fast.
    Iteration stops once the decrement is below ``2^-bits``.
    """
    old = flint.ctx.prec
    flint.ctx.prec = bits + 32
    try:
        ad = _ArbData(data, extra)
        lam = flint.arb_mat(data.m, 1, [flint.arb(float(x)) for x in lam0])
        target = mpmath.mpf(2) ** (-bits)
        dec = mpmath.inf
        H = None
        it = 0
        for it in range(1, max_iter + 1):
            g, invs = ad.gradient(lam, flint.arb(t))
            if H is None:
                flint.ctx.prec = min(bits, 160)
                H = ad.hessian(invs, low=True)
                flint.ctx.prec = bits + 32
            step = H.solve(g, algorithm="approx")
            dec2 = sum(_arb_to_mpf(g[i, 0]) * _arb_to_mpf(step[i, 0]) for i in range(data.m))
            new_dec = mpmath.sqrt(abs(dec2))
            if new_dec > dec / 8:
                H = None  # slow contraction: refresh the Hessian next time
            dec = new_dec
            alpha = 1 if dec < 0.25 else 1 / (1 + dec)
            a = flint.arb(float(alpha))
            lam = flint.arb_mat(data.m, 1, [(lam[i, 0] + step[i, 0] * a).mid() for i in range(data.m)])
            if dec < target:
                break
        lam_mp = [_arb_to_mpf(lam[i, 0]) for i in range(data.m)]
        with mpmath.workprec(bits + 32):
            obj = _mp_objective(data, lam_mp)
        return lam_mp, obj, float(dec), it
    finally:
        flint.ctx.prec = old


def _mp_path(data: SDPData, lam0, t0: float, bits: int, gap_tol, max_iter: int, stop=None):
    """Full high-precision path following for small parameter spaces.

    ``stop(lam)`` may end the path early after any centering.
    """
    old = flint.ctx.prec
    flint.ctx.prec = 2 * bits + 64  # Hessians near the boundary are very ill conditioned
    try:
        ad = _ArbData(data)
        total_dim = sum(s for s, _, _ in ad.blocks)
        lam = flint.arb_mat(data.m, 1, [_to_arb(x) for x in lam0])
        t = mpmath.mpf(t0)
        its = 0
        final = False
        with mpmath.workprec(2 * bits + 64):
            while True:
                for _ in range(max_iter):
                    its += 1
                    g, invs = ad.gradient(lam, flint.arb(mpmath.nstr(t, 40)))
                    H = ad.hessian(invs)
                    step = H.solve(g, algorithm="approx")
                    dec2 = sum(_arb_to_mpf(g[i, 0]) * _arb_to_mpf(step[i, 0]) for i in range(data.m))
                    dec = mpmath.sqrt(abs(dec2))
                    alpha = mpmath.mpf(1) if dec < 0.25 else 1 / (1 + dec)
                    # backtrack on positive definiteness
                    while True:
                        cand = flint.arb_mat(data.m, 1, [(lam[i, 0] + step[i, 0] * flint.arb(mpmath.nstr(alpha, 40))).mid()
                                                         for i in range(data.m)])
                        if _arb_pd(ad, cand):
                            break
                        alpha /= 2
                        if alpha < mpmath.mpf(2) ** (-60):
                            raise SolverError("line search failed in refinement")
                    lam = cand
                    if dec < (mpmath.mpf(2) ** (-(bits // 2)) if final else mpmath.mpf("0.1")):
                        break
                else:
                    raise SolverError("centering did not converge", {"t": float(t), "decrement": float(dec)})
                gap = total_dim / t
                if final or (stop is not None and stop([_arb_to_mpf(lam[i, 0]) for i in range(data.m)])):
                    break
                if gap < gap_tol:
                    final = True
                    continue
                t *= 10
            lam_mp = [_arb_to_mpf(lam[i, 0]) for i in range(data.m)]
            obj = _mp_objective(data, lam_mp)
        return lam_mp, obj, float(gap), its
    finally:
        flint.ctx.prec = old


def _to_arb(x) -> flint.arb:
    if isinstance(x, Fraction):
        return flint.arb(flint.fmpq(x.numerator, x.denominator))
    if isinstance(x, mpmath.mpf):
        sgn, man, exp, _ = x._mpf_
        if not man:
            return flint.arb(0)
        v = flint.arb(flint.fmpz((-1) ** sgn * int(man))) * flint.arb(2) ** int(exp)
        return v
    return flint.arb(float(x))


def _mp_phase_one(data: SDPData, bits: int, max_iter: int):
    """Strictly feasible point by high-precision path following on (lam, s)."""
    fb = [f for f in data.float_blocks() if f[0].size]
    s0 = Fraction(math.floor(min(float(np.linalg.eigvalsh(a0)[0]) for a0, _ in fb)) - 1)
    blocks = []
    for A0, As in data.blocks:
        sz = len(A0)
        if not sz:
            continue
        neg = [[Fraction(-1) if i == j else Fraction(0) for j in range(sz)] for i in range(sz)]
        blocks.append((A0, list(As) + [neg]))
    zero = [[Fraction(0)]]
    blocks.append(([[Fraction(1)]], [zero] * data.m + [[[Fraction(-1)]]]))
    ext = SDPData(data.m + 1, blocks, [Fraction(0)] * data.m + [Fraction(1)])
    start = [Fraction(0)] * data.m + [s0]
    lam, _, _, _ = _mp_path(ext, start, 1.0, bits, mpmath.mpf(2) ** (-bits), max_iter,
                            stop=lambda v: v[-1] > 0)
    if not lam[-1] > 0:
        raise SolverError("no strictly feasible point found", {"best_margin": float(lam[-1])})
    return lam[:-1]


def _mp_objective(data: SDPData, lam_mp):
    q = lambda x: mpmath.mpf(x.numerator) / x.denominator
    return q(data.obj0) + mpmath.fsum(q(c) * x for c, x in zip(data.obj, lam_mp))


def _arb_pd(ad: _ArbData, lam) -> bool:
    """Positive pivots in an LDL^T factorization on ball midpoints."""
    for s, X, _ in ad.mats(lam):
        a = [[X[i, j].mid() for j in range(s)] for i in range(s)]
        for k in range(s):
            piv = a[k][k]
            if not piv > 0:
                return False
            for i in range(k + 1, s):
                f = (a[i][k] / piv).mid()
                for j in range(k + 1, i + 1):
                    a[i][j] = (a[i][j] - f * a[j][k]).mid()
    return True


def solve_sdp_data(data: SDPData, precision_bits: int = 256, max_iter: int = 200, tol=None) -> SolveResult:
    """Interior-point solve of an exact parameterized SDP.

    ``tol`` bounds the duality gap of the path-following phase (default
    ``2^(-precision_bits/4)``).  Problems with a constant objective are
    solved for the analytic center of the feasible set.
    """
    if precision_bits < 53:
        raise ValueError("precision_bits must be at least 53")
    gap_tol = float(tol) if tol is not None else 2.0 ** (-precision_bits / 4)
    if data.m == 0:
        fb = data.float_blocks()
        mins = [float(np.linalg.eigvalsh(a0)[0]) for a0, _ in fb if a0.size]
        if mins and min(mins) < -1e-12:
            raise SolverError("the only candidate point is infeasible", {"min_eigenvalues": mins})
        obj0 = Fraction(data.obj0)
        with mpmath.workprec(precision_bits):
            obj_mp = mpmath.mpf(obj0.numerator) / obj0.denominator
        return SolveResult([], float(obj0), obj_mp, 0.0, "fixed", 0, mins, precision_bits)
    float_gap = max(gap_tol, 1e-9)
    try:
        lam, gap, its, bar, t, extra = _float_solve(data, max_iter, float_gap)
    except SolverError:
        if precision_bits <= 53 or data.m > 64 or data.objective_constant:
            raise
        # margins below float64 resolution: do everything at full precision
        lam0 = _mp_phase_one(data, precision_bits, 60)
        gt = mpmath.mpf(tol) if tol is not None else mpmath.mpf(2) ** (-(precision_bits // 4))
        lam_mp, obj_mp, gap, its = _mp_path(data, lam0, 1.0, precision_bits, gt, 60)
        lf = np.array([float(x) for x in lam_mp])
        mins = [float(np.linalg.eigvalsh(a0 + np.tensordot(lf, a, axes=1))[0]) for a0, a in data.float_blocks() if a0.size]
        return SolveResult(lam_mp, float(obj_mp), obj_mp, float(gap), "optimal", its, mins, precision_bits,
                           {"phase_one": "high precision"})
    lam_mp = [mpmath.mpf(float(x)) for x in lam]
    obj_mp = mpmath.mpf(float(data.obj0)) + sum(mpmath.mpf(float(c)) * x for c, x in zip(data.obj, lam_mp))
    diag = {"float_iterations": its}
    status = "optimal" if not data.objective_constant else "centered"
    if precision_bits > 53:
        small = data.m <= 64
        if data.objective_constant:
            lam_mp, obj_mp, dec, it = _refine(data, lam, 0.0, extra, precision_bits, 30)
            diag["refine_decrement"] = dec
            its += it
        elif small:
            lam_mp, obj_mp, gap, it = _mp_path(data, lam, t, precision_bits, mpmath.mpf(tol) if tol is not None else mpmath.mpf(2) ** (-precision_bits // 4), 60)
            its += it
        else:
            lam_mp, obj_mp, dec, it = _refine(data, lam, t, extra, precision_bits, 30)
            its += it
            diag["note"] = "gap limited by float64 path"
    lf = np.array([float(x) for x in lam_mp])
    mins = [float(np.linalg.eigvalsh(a0 + np.tensordot(lf, a, axes=1))[0]) for a0, a in data.float_blocks() if a0.size]
    return SolveResult(lam_mp, float(obj_mp), obj_mp, float(gap), status, its, mins, precision_bits, diag)


def solve_numeric(param: AffineParameterization, program, precision_bits: int = 256, max_iter: int = 200) -> SolveResult:
    """Solve a dual program over its exact parameterization."""
    data = SDPData.from_program(program, param)
    return solve_sdp_data(data, precision_bits, max_iter)


# ----------------------------------------------------------------------
# SDPA sparse format


def _fmt(x: Fraction, digits: int = 40) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    with mpmath.workdps(digits + 5):
        return mpmath.nstr(mpmath.mpf(x.numerator) / x.denominator, digits, strip_zeros=True)


def export_sdpa(data: SDPData, path) -> None:
    """Write ``data`` in SDPA sparse format (``.dat-s``).

    Primal form: minimize ``c.x`` with ``sum x_i F_i - F_0`` PSD, so
    ``F_i = A_i``, ``F_0 = -A0`` and ``c = -obj``.  Blocks sharing a group
    label are merged into one block-diagonal matrix.
    """
    order: list = []
    members: dict = {}
    for idx, (g, (A0, _)) in enumerate(zip(data.groups, data.blocks)):
        if not len(A0):
            continue
        if g not in members:
            order.append(g)
            members[g] = []
        members[g].append(idx)
    sizes = [sum(len(data.blocks[i][0]) for i in members[g]) for g in order]
    lines = [f'"exported parameterized program, {data.m} coordinates"', str(data.m), str(len(order)),
             " ".join(str(s) for s in sizes), " ".join(_fmt(-c) for c in data.obj)]
    for mat in range(data.m + 1):
        for bno, g in enumerate(order, start=1):
            shift = 0
            for i in members[g]:
                A0, As = data.blocks[i]
                src = A0 if mat == 0 else As[mat - 1]
                sign = -1 if mat == 0 else 1
                s = len(A0)
                for p in range(s):
                    for q in range(p, s):
                        v = src[p][q]
                        if v:
                            lines.append(f"{mat} {bno} {p + 1 + shift} {q + 1 + shift} {_fmt(sign * Fraction(v))}")
                shift += s
    Path(path).write_text("\n".join(lines) + "\n")


class SDPAParseError(ValueError):
    pass


def read_sdpa(path) -> dict:
    """Parse a ``.dat-s`` file into ``{m, sizes, c, entries}``.

    ``entries`` maps ``(mat, block)`` to a dict ``{(i, j): value}`` with
    1-based indices and ``i <= j``.
    """
    raw = Path(path).read_text().splitlines()
    lines = []
    for no, ln in enumerate(raw, start=1):
        s = ln.split("*")[0].strip() if not ln.lstrip().startswith('"') else ""
        if s:
            lines.append((no, s))
    if len(lines) < 4:
        last = lines[-1][0] if lines else len(raw)
        raise SDPAParseError(f"{path}:{last + 1}: file ends before the header is complete")

    def nums(s):
        return [x for x in re.split(r"[,\s{}()]+", s) if x]

    try:
        m = int(nums(lines[0][1])[0])
        nb = int(nums(lines[1][1])[0])
        sizes = [int(x) for x in nums(lines[2][1])][:nb]
        c = [Fraction(x) for x in nums(lines[3][1])]
    except (ValueError, IndexError) as exc:
        raise SDPAParseError(f"{path}: malformed header: {exc}") from exc
    if len(sizes) != nb:
        raise SDPAParseError(f"{path}:{lines[2][0]}: expected {nb} block sizes")
    if len(c) != m:
        raise SDPAParseError(f"{path}:{lines[3][0]}: expected {m} objective entries, got {len(c)}")
    entries: dict = {}
    for no, s in lines[4:]:
        parts = nums(s)
        if len(parts) != 5:
            raise SDPAParseError(f"{path}:{no}: expected 'matno blkno i j value', got {s!r}")
        try:
            mat, blk, i, j = (int(x) for x in parts[:4])
            val = Fraction(parts[4])
        except ValueError as exc:
            raise SDPAParseError(f"{path}:{no}: {exc}") from exc
        if not (0 <= mat <= m and 1 <= blk <= nb and 1 <= i <= abs(sizes[blk - 1]) and 1 <= j <= abs(sizes[blk - 1])):
            raise SDPAParseError(f"{path}:{no}: entry out of range")
        entries.setdefault((mat, blk), {})[(min(i, j), max(i, j))] = val
    return {"m": m, "sizes": sizes, "c": c, "entries": entries}


def import_solution(path, m: int) -> list[Fraction]:
    """Read the primal vector ``x`` (our ``lam``) from a solver output.

    Accepts SDPA/SDPA-GMP output (``xVec = {...}``) and CSDP solution
    files (first line holds ``y``, which is CSDP's name for ``x``).
    """
    raw = Path(path).read_text().splitlines()
    if not raw:
        raise SDPAParseError(f"{path}:1: empty solution file")
    for no, ln in enumerate(raw, start=1):
        if "xVec" in ln:
            buf = ln.split("=", 1)[1] if "=" in ln else ""
            k = no
            while "}" not in buf:
                if k >= len(raw):
                    raise SDPAParseError(f"{path}:{k}: xVec not terminated")
                buf += " " + raw[k]
                k += 1
            vals = [x for x in re.split(r"[,\s{}]+", buf.split("}")[0]) if x]
            if len(vals) != m:
                raise SDPAParseError(f"{path}:{no}: xVec has {len(vals)} entries, expected {m}")
            return [Fraction(v) for v in vals]
    vals = [x for x in raw[0].split() if x]
    try:
        out = [Fraction(v) for v in vals]
    except ValueError as exc:
        raise SDPAParseError(f"{path}:1: {exc}") from exc
    if len(out) != m:
        raise SDPAParseError(f"{path}:1: found {len(out)} values, expected {m}")
    return out


def sdpa_exchange(data: SDPData, mode: str, path):
    """``export`` writes a ``.dat-s`` file; ``import`` reads a solution."""
    if mode == "export":
        export_sdpa(data, path)
        return Path(path)
    if mode == "import":
        return import_solution(path, data.m)
    raise ValueError("mode must be 'export' or 'import'")


# ----------------------------------------------------------------------
# rounding


def round_lambda(lam: Sequence, digits: int) -> list[Fraction]:
    """Nearest multiples of ``10^-digits``; tiny entries snap to zero."""
    if digits < 1:
        raise ValueError("digits must be >= 1")
    scale = 10 ** digits
    out = []
    for x in lam:
        if isinstance(x, Fraction):
            fx = x
        else:
            with mpmath.workdps(digits + 30):
                fx = Fraction(mpmath.nstr(mpmath.mpf(x), digits + 25, strip_zeros=False).replace(" ", ""))
        if abs(fx) * 2 * scale < 1:
            out.append(Fraction(0))
            continue
        n = fx * scale
        k = math.floor(n + Fraction(1, 2))
        out.append(Fraction(k, scale))
    return out


def round_certificate(param: AffineParameterization, lam: Sequence, digits: int, program):
    """Exact certificate from rounded coordinates (linear constraints exact)."""
    lam_r = round_lambda(lam, digits)
    x = param.point(lam_r)
    return program.certificate(x)
