"""Exact verification of dual certificates and the universal-optimality pipeline.

Verification never trusts floating point: PSD tests use exact
characteristic polynomials, and the polynomial identity is checked twice
by independent routes (coefficient bookkeeping and direct polynomial
arithmetic).
"""

from __future__ import annotations

import itertools
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .bounds import (
    DEFAULT_BLOCKS,
    DEFAULT_EPS,
    Certificate,
    DualProgram,
    UnsupportedCaseError,
    bound_value,
    build_dual_program,
    perturb_potential,
    two_point_bound,
)
from .codes import Code, energy
from .exact_arith import (
    AsymmetricMatrixError,
    LinearEquation,
    QuadNumber,
    mat_inner,
    psd_check,
    scalar_to_json,
    solve_affine,
    sqrt_exact,
    sign,
    to_exact,
)
from .kernels import make_T, projective_S, sphere_S
from .polynomials import TriPoly, UniPoly, partial_products, reduction_multiset

__all__ = [
    "VerificationReport",
    "PotentialReport",
    "PipelineReport",
    "verify_certificate",
    "identity_residual",
    "equality_set",
    "uniqueness_counts",
    "universal_optimality_pipeline",
    "default_mult_zero",
]

log = logging.getLogger(__name__)

DIGIT_SWEEP = (9, 10, 8, 11, 12, 13, 14, 15, 16)


@dataclass
class VerificationReport:
    psd_results: dict
    identity_ok: bool
    bound: Fraction
    target: Fraction | None
    sharp: bool
    slackness_ok: bool | None
    tangency_ok: bool | None
    identity_routes: tuple = (False, False)
    log: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        """Valid lower bound (identity and PSD), sharp or not."""
        return self.identity_ok and all(self.psd_results.values())

    def to_json(self) -> dict:
        return {
            "psd": dict(self.psd_results),
            "identity_ok": self.identity_ok,
            "identity_routes": list(self.identity_routes),
            "bound": scalar_to_json(self.bound),
            "target": None if self.target is None else scalar_to_json(self.target),
            "sharp": self.sharp,
            "slackness_ok": self.slackness_ok,
            "tangency_ok": self.tangency_ok,
            "log": list(self.log),
        }

    def to_text(self) -> str:
        lines = [f"bound        {self.bound}"]
        if self.target is not None:
            lines.append(f"target       {self.target}")
        lines.append(f"identity     {'ok' if self.identity_ok else 'FAILED'}")
        for name, ok in self.psd_results.items():
            lines.append(f"psd {name:<8} {'ok' if ok else 'FAILED'}")
        for name, val in (("slackness", self.slackness_ok), ("tangency", self.tangency_ok)):
            lines.append(f"{name:<12} {'n/a' if val is None else ('ok' if val else 'FAILED')}")
        lines.append(f"sharp        {'yes' if self.sharp else 'no'}")
        lines.extend(f"  {msg}" for msg in self.log)
        return "\n".join(lines)


# ----------------------------------------------------------------------
# polynomial identity


def _kernels_for(cert: Certificate, program: DualProgram | None):
    if program is not None:
        return program.kernels
    if cert.N is None or cert.n is None:
        raise ValueError("certificate does not record N and n; pass the program")
    build = projective_S if cert.space == "projective" else sphere_S
    return [make_T(build(cert.n, k, len(F)), cert.N) for k, F in zip(cert.ks, cert.F)]


def _target_of(program: DualProgram | None, f0: UniPoly | None, space: str) -> TriPoly:
    if program is not None:
        return program.target_poly
    g = f0.of_square() if space == "projective" else f0
    return (g.to_tripoly(0) + g.to_tripoly(1) + g.to_tripoly(2)) / 3


def _putinar(space: str) -> list[TriPoly]:
    U, V, T = TriPoly.var(0), TriPoly.var(1), TriPoly.var(2)
    return [1 - U * U, 1 - V * V, 1 - T * T, 1 + U * V * T * 2 - U * U - V * V - T * T]


def _identity_by_coefficients(cert: Certificate, kernels, g: TriPoly) -> dict:
    """Residual ``g - H - z^T M z - ...`` accumulated monomial by monomial."""
    res: dict = {}

    def add(mu, val):
        if val != 0:
            res[mu] = res.get(mu, 0) + val

    for mu, c in g.terms.items():
        add(mu, c)
    add((0, 0, 0), -to_exact(cert.c))
    for K, F in zip(kernels, cert.F):
        for i in range(K.d):
            for j in range(K.d):
                if F[i][j] == 0:
                    continue
                for mu, c in K.entries[i][j].terms.items():
                    add(mu, -F[i][j] * c)
    z = cert.monomial_order
    for a, za in enumerate(z):
        row = cert.M[a]
        for b, zb in enumerate(z):
            if row[b] != 0:
                add((za[0] + zb[0], za[1] + zb[1], za[2] + zb[2]), -row[b])
    for q, G, zz in zip(_putinar("projective"), cert.G, cert.G_monomials):
        for a, za in enumerate(zz):
            for b, zb in enumerate(zz):
                if G[a][b] == 0:
                    continue
                for e, c in q.terms.items():
                    add((za[0] + zb[0] + e[0], za[1] + zb[1] + e[1], za[2] + zb[2] + e[2]), -G[a][b] * c)
    return {mu: v for mu, v in res.items() if v != 0}


def _gram_poly(G, zz) -> TriPoly:
    """``z^T G z`` by polynomial products ``sum_a z_a (sum_b G_ab z_b)``."""
    mons = [TriPoly({e: 1}) for e in zz]
    acc = TriPoly()
    for a, za in enumerate(mons):
        inner = TriPoly({zz[b]: G[a][b] for b in range(len(zz)) if G[a][b] != 0})
        if inner.terms:
            acc = acc + za * inner
    return acc


def _identity_direct(cert: Certificate, kernels, g: TriPoly) -> TriPoly:
    H = TriPoly.constant(cert.c)
    for K, F in zip(kernels, cert.F):
        for i in range(K.d):
            for j in range(K.d):
                if F[i][j] != 0:
                    H = H + K.entries[i][j] * F[i][j]
    rhs = _gram_poly(cert.M, cert.monomial_order)
    for q, G, zz in zip(_putinar("projective"), cert.G, cert.G_monomials):
        rhs = rhs + q * _gram_poly(G, zz)
    return g - H - rhs


def identity_residual(cert: Certificate, program: DualProgram | None = None, f0: UniPoly | None = None) -> dict:
    """Nonzero coefficients of ``g - H - z^T M z`` (empty when exact)."""
    kernels = _kernels_for(cert, program)
    g = _target_of(program, f0, cert.space)
    return _identity_by_coefficients(cert, kernels, g)


def _H_poly(cert: Certificate, kernels) -> TriPoly:
    H = TriPoly.constant(cert.c)
    for K, F in zip(kernels, cert.F):
        for i in range(K.d):
            for j in range(K.d):
                if F[i][j] != 0:
                    H = H + K.entries[i][j] * F[i][j]
    return H


# ----------------------------------------------------------------------
# verification


def verify_certificate(cert: Certificate, program: DualProgram, target=None) -> VerificationReport:
    """All exact checks of a certificate against its program.

    ``sharp`` requires both identity routes, every PSD test, the bound
    equal to ``target`` and (when the program has a support) slackness
    and tangency.
    """
    msgs: list = []
    if [len(F) for F in cert.F] != [d for _, d in program.blocks_spec]:
        raise ValueError("certificate block sizes do not match the program")
    if len(cert.M) != len(program.monomial_order):
        raise ValueError("certificate SOS size does not match the program")
    psd: dict = {}
    mats = [(f"F{k}", F) for k, F in zip(cert.ks, cert.F)] + [("M", cert.M)]
    mats += [(f"G{i}", G) for i, G in enumerate(cert.G, start=1)]
    for name, A in mats:
        try:
            psd[name] = psd_check(A) if len(A) else True
        except AsymmetricMatrixError:
            psd[name] = False
            msgs.append(f"{name} is not symmetric")
        if not psd[name]:
            msgs.append(f"{name} is not positive semidefinite")
    kernels = program.kernels
    g = program.target_poly
    res_a = _identity_by_coefficients(cert, kernels, g)
    res_b = _identity_direct(cert, kernels, g)
    ok_a, ok_b = not res_a, not res_b.terms
    if ok_a != ok_b:
        raise RuntimeError("identity routes disagree; verifier is inconsistent")
    if not ok_a:
        worst = sorted(res_a.items())[:3]
        msgs.append(f"identity fails at {len(res_a)} monomials, e.g. {worst}")
    F0 = cert.F_by_k(0)
    bound = bound_value(cert.c, F0, program.N)
    tgt = None if target is None else to_exact(target)
    slack = tang = None
    if program.support:
        slack = _slackness_ok(cert, program, msgs)
        tang = _tangency_ok(cert, program, g, msgs)
    sharp = ok_a and ok_b and all(psd.values()) and tgt is not None and bound == tgt
    sharp = sharp and slack is not False and tang is not False
    if tgt is not None and bound != tgt:
        msgs.append(f"bound {bound} differs from target {tgt}")
    return VerificationReport(psd, ok_a and ok_b, bound, tgt, sharp, slack, tang, (ok_a, ok_b), msgs)


def _slackness_ok(cert: Certificate, program: DualProgram, msgs: list) -> bool:
    ok = True
    N = program.N
    for K, F in zip(program.kernels, cert.F):
        d = K.d
        X = [[to_exact(N * (N - 2) if K.k == 0 else 0) for _ in range(d)] for _ in range(d)]
        for p, cnt in program.support:
            val = _eval_entries(K, p)
            X = [[X[i][j] + cnt * val[i][j] for j in range(d)] for i in range(d)]
        if mat_inner(F, X) != 0:
            msgs.append(f"<F{K.k}, X{K.k}> != 0")
            ok = False
    z = cert.monomial_order
    for p in program.equality_points:
        zp = _monomial_values(z, p)
        for a in range(len(z)):
            s = sum((cert.M[a][b] * zp[b] for b in range(len(z)) if cert.M[a][b] != 0), Fraction(0))
            if s != 0:
                msgs.append(f"M z(p) != 0 at p={p}")
                return False
    return ok


def _tangency_ok(cert: Certificate, program: DualProgram, g: TriPoly, msgs: list) -> bool:
    diff = g - _H_poly(cert, program.kernels)
    parts = [diff] + [diff.partial(i) for i in range(3)]
    for p, _ in program.support:
        for idx, P in enumerate(parts):
            if P.evaluate(p) != 0:
                msgs.append(f"tangency fails at {p} ({'value' if idx == 0 else 'd' + 'uvt'[idx - 1]})")
                return False
    return True


def _eval_entries(K, p):
    from .kernels import eval_kernel

    return eval_kernel(K, p)


def _monomial_values(z, p):
    return [to_exact(p[0]) ** e[0] * to_exact(p[1]) ** e[1] * to_exact(p[2]) ** e[2] for e in z]


# ----------------------------------------------------------------------
# equality set and uniqueness


def _exact_roots(values) -> dict:
    """Square roots of the candidate values in one common field."""
    roots: dict = {}
    q = None
    for x in sorted(set(to_exact(v) for v in values), key=float):
        r = sqrt_exact(x, q) if q is not None else sqrt_exact(x)
        if r is None and q is None:
            q = x
            r = QuadNumber.sqrt(x)
        if r is None:
            log.warning("sqrt(%s) leaves the field Q(sqrt %s); skipped", x, q)
            continue
        roots[x] = r
    return roots


def equality_set(cert: Certificate, f: UniPoly, candidate_values, program: DualProgram | None = None) -> list[tuple]:
    """Canonical triples in ``D`` with squared coordinates among the candidates
    where ``(f(u^2)+f(v^2)+f(t^2))/3 = H(u,v,t)`` exactly.

    Triples are listed with absolute values in decreasing order, the last
    coordinate negated when the product is negative.
    """
    roots = _exact_roots(candidate_values)
    if not roots:
        return []
    kernels = _kernels_for(cert, program)
    H = _H_poly(cert, kernels)
    g = f.of_square()
    out = []
    vals = sorted(roots, key=float, reverse=True)
    for a, b, c in itertools.combinations_with_replacement(vals, 3):
        if a == 1:
            continue
        signs = (1, -1) if c != 0 and b != 0 and a != 0 else (1,)
        for s in signs:
            p = (roots[a], roots[b], roots[c] * s)
            if sign(1 + 2 * p[0] * p[1] * p[2] - a - b - c) < 0:
                continue
            lhs = (g(p[0]) + g(p[1]) + g(p[2])) / 3
            if lhs - H.evaluate(p) == 0:
                out.append(p)
    return out


def uniqueness_counts(cert: Certificate, triples: Sequence, N: int | None = None,
                      program: DualProgram | None = None) -> tuple:
    """Triple counts forced by complementary slackness.

    Solves ``sum N_i = N(N-1)(N-2)`` together with
    ``<F_k, N(N-2) delta_{k0} J + sum_i N_i T_k(triple_i)> = 0`` for every
    kernel block.  Raises ``ValueError`` if the solution is not unique.
    """
    N = N if N is not None else cert.N
    if N is None:
        raise ValueError("N is required")
    kernels = _kernels_for(cert, program)
    m = len(triples)
    eqs = [LinearEquation({i: Fraction(1) for i in range(m)}, Fraction(N * (N - 1) * (N - 2)), "total")]
    for K, F in zip(kernels, cert.F):
        if K.N != N:
            K = make_T((projective_S if K.parity == "projective" else sphere_S)(K.n, K.k, K.d), N)
        coeffs = {}
        for i, p in enumerate(triples):
            v = mat_inner(F, _eval_entries(K, p))
            if v != 0:
                coeffs[i] = v
        J = N * (N - 2) * sum((x for row in F for x in row), Fraction(0)) if K.k == 0 else Fraction(0)
        eqs.append(LinearEquation(coeffs, -J, f"slack F{K.k}"))
    sol = solve_affine(eqs, list(range(m)))
    if sol.dimension:
        raise ValueError(f"slackness leaves {sol.dimension} free directions; counts are not determined")
    counts = tuple(sol.particular)
    # substitute back
    for eq in eqs:
        lhs = sum((c * counts[i] for i, c in eq.coeffs.items()), Fraction(0))
        if lhs != eq.rhs:
            raise RuntimeError("uniqueness counts fail back-substitution")
    return tuple(int(x) if Fraction(x).denominator == 1 else x for x in counts)


# ----------------------------------------------------------------------
# pipeline


def default_mult_zero(values) -> int:
    """Multiplicity of 0 in the reduction multiset.

    Three when the code has nonzero squared inner products, two for
    mutually orthogonal lines.
    """
    return 3 if any(to_exact(v) != 0 for v in values) else 2


@dataclass
class PotentialReport:
    index: int
    potential: UniPoly
    method: str  # trivial | two-point | three-point
    target: Fraction | None = None
    bound: Fraction | None = None
    sharp: bool = False
    digits: int | None = None
    verification: VerificationReport | None = None
    certificate: Certificate | None = None
    error: str | None = None
    seconds: float = 0.0
    basis_dimension: int | None = None

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "potential": str(self.potential),
            "method": self.method,
            "target": None if self.target is None else scalar_to_json(self.target),
            "bound": None if self.bound is None else scalar_to_json(self.bound),
            "sharp": self.sharp,
            "digits": self.digits,
            "basis_dimension": self.basis_dimension,
            "verification": None if self.verification is None else self.verification.to_json(),
            "error": self.error,
        }

    def to_text(self) -> str:
        head = f"[{self.index}] f = {self.potential}  ({self.method})"
        if self.error:
            return f"{head}\n    error: {self.error}"
        body = f"    bound {self.bound}  target {self.target}  {'sharp' if self.sharp else 'NOT sharp'}"
        if self.digits is not None:
            body += f"  (rounded at {self.digits} digits)"
        return f"{head}\n{body}"


@dataclass
class PipelineReport:
    code: str
    multiset: list
    potentials: list
    certified: bool
    uniqueness: tuple | None = None
    equality_classes: list | None = None
    notes: list = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return "universal optimality certified" if self.certified else "not certified"

    def to_json(self) -> dict:
        return {
            "code": self.code,
            "multiset": [[scalar_to_json(x), m] for x, m in self.multiset],
            "potentials": [p.to_json() for p in self.potentials],
            "verdict": self.verdict,
            "uniqueness": None if self.uniqueness is None else [str(x) for x in self.uniqueness],
            "equality_classes": None if self.equality_classes is None
            else [[scalar_to_json(x) for x in p] for p in self.equality_classes],
            "notes": list(self.notes),
        }

    def to_text(self) -> str:
        lines = [f"code {self.code}", "multiset T = {" + ", ".join(f"{x}x{m}" for x, m in self.multiset) + "}"]
        lines += [p.to_text() for p in self.potentials]
        if self.uniqueness is not None:
            lines.append(f"uniqueness counts {self.uniqueness} (sum {sum(self.uniqueness)})")
        lines += [f"note: {n}" for n in self.notes]
        lines.append(f"verdict: {self.verdict}")
        return "\n".join(lines)


def _three_point_job(args) -> PotentialReport:
    (idx, f, code, roots, eps, blocks, precision_bits, digits_sweep, solution, out_dir) = args
    from .solver import SDPData, import_solution, parameterize, round_lambda, solve_sdp_data

    t0 = time.time()
    rep = PotentialReport(idx, f, "three-point")
    try:
        rep.target = energy(code, f, "E_hat")
        f0 = perturb_potential(f, roots, eps)
        prog = build_dual_program(code.N, code.n, "projective", f0, blocks, target_code=code)
        param = parameterize(prog)
        rep.basis_dimension = param.dimension
        data = SDPData.from_program(prog, param)
        if solution is not None:
            lam = import_solution(solution, data.m)
        else:
            lam = solve_sdp_data(data, precision_bits=precision_bits).lam
        for d in digits_sweep:
            x = param.point(round_lambda(lam, d))
            cert = prog.certificate(x)
            ver = verify_certificate(cert, prog, rep.target)
            rep.digits, rep.verification, rep.bound = d, ver, ver.bound
            if ver.sharp:
                rep.sharp = True
                rep.certificate = cert
                break
        if out_dir is not None and rep.certificate is not None:
            out = Path(out_dir)
            out.mkdir(parents=True, exist_ok=True)
            (out / f"certificate_{idx}.json").write_text(rep.certificate.dumps())
            (out / f"report_{idx}.json").write_text(json.dumps(rep.to_json(), sort_keys=True, indent=1))
    except Exception as exc:  # reported, never a false verdict
        rep.error = f"{type(exc).__name__}: {exc}"
    rep.seconds = time.time() - t0
    return rep


def universal_optimality_pipeline(code: Code, *, precision_bits: int = 256, digits: int = 9,
                                  eps=DEFAULT_EPS, blocks=DEFAULT_BLOCKS, mult_zero: int | None = None,
                                  jobs: int = 1, solutions: dict | None = None, out_dir=None,
                                  progress=None) -> PipelineReport:
    """Certify universal optimality of a projective code.

    Builds the reduction multiset ``T`` from the squared inner products,
    takes its partial products as basis potentials and certifies each:
    constants trivially, linear potentials by the two-point bound, the rest
    by rounded three-point certificates of the perturbed potential.
    ``solutions`` may map a basis index to an external solver output file.
    """
    if code.space != "projective":
        raise UnsupportedCaseError("the pipeline handles projective codes")
    values = sorted(set(code.squared_inner_products()), key=float)
    if any(isinstance(v, QuadNumber) for v in values):
        raise UnsupportedCaseError("irrational squared inner products are not supported")
    mz = default_mult_zero(values) if mult_zero is None else mult_zero
    T = reduction_multiset(values, mz)
    basis = partial_products(T.nodes())
    sweep = (digits,) + tuple(d for d in DIGIT_SWEEP if d != digits)
    reports: list = [None] * len(basis)
    jobs_args = []
    for idx, f in enumerate(basis):
        if f.degree <= 0:
            e = energy(code, f, "E_hat")
            reports[idx] = PotentialReport(idx, f, "trivial", e, e, True)
        elif f.degree == 1:
            t0 = time.time()
            e = energy(code, f, "E_hat")
            try:
                tp = two_point_bound(code.N, code.n, f, space="projective", target=e)
                reports[idx] = PotentialReport(idx, f, "two-point", e, tp.bound, tp.bound == e,
                                               seconds=time.time() - t0)
            except Exception as exc:
                reports[idx] = PotentialReport(idx, f, "two-point", e, error=f"{type(exc).__name__}: {exc}")
        else:
            sol = (solutions or {}).get(idx)
            jobs_args.append((idx, f, code, T, eps, tuple(blocks), precision_bits, sweep, sol, out_dir))
    if jobs > 1 and len(jobs_args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for rep in pool.map(_three_point_job, jobs_args):
                reports[rep.index] = rep
                if progress:
                    progress(rep)
    else:
        for a in jobs_args:
            rep = _three_point_job(a)
            reports[rep.index] = rep
            if progress:
                progress(rep)
    certified = all(r.sharp and r.error is None for r in reports)
    report = PipelineReport(code.name, list(T.items), reports, certified)
    last = reports[-1]
    if certified and last.certificate is not None:
        try:
            classes = equality_set(last.certificate, last.potential, values)
            report.equality_classes = classes
            report.uniqueness = uniqueness_counts(last.certificate, classes, code.N)
            report.notes.append("the remaining geometric step (an orthonormal triple forces the cube "
                                "configuration) is a manual argument, not automated")
        except (ValueError, RuntimeError) as exc:
            report.notes.append(f"uniqueness counts unavailable: {exc}")
    return report
