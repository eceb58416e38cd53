"""Command-line interface: ``threepoint <command> ...``.

Exit status is 0 on success, 1 when a verification fails or a stage
raises, and 2 for usage errors.  ``THREEPOINT_PRECISION`` sets the default
mantissa precision (bits) of the numerical solver.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path

import mpmath

from . import bounds, certify, codes, orthoplex, solver
from .polynomials import parse_potential, partial_products, reduction_multiset

__all__ = ["main", "build_parser", "dispatch", "load_code"]

def _default_precision() -> int:
    raw = os.environ.get("THREEPOINT_PRECISION", "256")
    try:
        bits = int(raw)
    except ValueError:
        raise SystemExit(f"THREEPOINT_PRECISION must be an integer, got {raw!r}")
    return bits


def load_code(spec: str) -> codes.Code:
    """A catalog name (``rhombic7``, ``antiprism8(1/2)``) or a code file."""
    if Path(spec).is_file():
        return codes.read_code(spec)
    try:
        return codes.builtin(spec)
    except KeyError:
        raise ValueError(f"{spec!r} is neither a catalog code nor a file") from None


def _blocks(text: str | None):
    if not text:
        return bounds.DEFAULT_BLOCKS
    out = []
    for part in text.split(","):
        k, d = part.split(":")
        out.append((int(k), int(d)))
    return tuple(out)


def _write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=1) + "\n")


# ----------------------------------------------------------------------
# commands


def cmd_energy(a) -> int:
    c = load_code(a.code)
    print(codes.energy(c, parse_potential(a.f), a.convention))
    return 0


def cmd_codes(a) -> int:
    if a.action == "list":
        for name, desc in codes.list_builtin():
            print(f"{name:<18} {desc}")
        return 0
    c = load_code(a.name)
    if a.action == "show":
        print(repr(c))
        for p in c.points:
            print("  (" + ", ".join(str(x) for x in p) + ")")
        if c.space == "projective":
            vals = sorted(c.squared_inner_products(), key=float)
            print("squared inner products: " + ", ".join(str(v) for v in vals))
        else:
            vals = sorted(c.inner_products(), key=float)
            print("inner products: " + ", ".join(str(v) for v in vals))
        if a.out:
            codes.write_code(c, a.out)
        return 0
    rep = codes.verify_code(c, Fraction(a.t) if a.t else 1)
    print(f"max cos {rep.max_cos}  (squared {rep.max_cos_squared})")
    if a.t:
        print("satisfies" if rep.satisfies else "violates", a.t)
        return 0 if rep.satisfies else 1
    return 0


def cmd_design(a) -> int:
    c = load_code(a.code)
    print(codes.design_strength(c, a.kmax))
    return 0


def cmd_orthoplex(a) -> int:
    v = orthoplex.check_code(load_code(a.code))
    print(v.to_text())
    return 1 if v.status == "violates" else 0


def cmd_basis(a) -> int:
    c = load_code(a.code)
    if c.space != "projective":
        c = c.as_projective()
    vals = c.squared_inner_products()
    mz = certify.default_mult_zero(vals) if a.mult_zero is None else a.mult_zero
    T = reduction_multiset(vals, mz)
    print("T = {" + ", ".join(f"{x}x{m}" for x, m in T.items) + "}")
    for i, p in enumerate(partial_products(T.nodes())):
        print(f"[{i}] {p}")
    return 0


def cmd_bound(a) -> int:
    return {"build": _bound_build, "two-point": _bound_two_point, "solve": _bound_solve,
            "round": _bound_round, "certify": _bound_certify}[a.action](a)


def _bound_build(a) -> int:
    f = parse_potential(a.f)
    if a.eps:
        f = bounds.perturb_potential(f, bounds.DEFAULT_ROOTS, Fraction(a.eps))
    if a.code:
        c = load_code(a.code)
        N, n, space = c.N, c.n, c.space
    else:
        c = None
        N, n, space = a.N, a.n, a.space
    prog = bounds.build_dual_program(N, n, space, f, _blocks(a.blocks), a.sos_degree, target_code=c,
                                     putinar=a.putinar)
    Path(a.out).write_text(prog.dumps() + "\n")
    sizes = ", ".join(f"{b.name}:{b.size}" for b in prog.blocks)
    print(f"{prog.nvars} variables, {len(prog.equations)} equations; blocks {sizes}")
    return 0


def _bound_two_point(a) -> int:
    r = bounds.two_point_bound(a.N, a.n, parse_potential(a.f), a.max_degree, a.space)
    print(r.bound)
    return 0


def _load_program(path) -> bounds.DualProgram:
    return bounds.DualProgram.from_json(json.loads(Path(path).read_text()))


def _bound_solve(a) -> int:
    prog = _load_program(a.program)
    param = solver.parameterize(prog)
    data = solver.SDPData.from_program(prog, param)
    print(f"parameterization dimension {param.dimension}")
    if a.export_sdpa:
        solver.export_sdpa(data, a.export_sdpa)
        print(f"wrote {a.export_sdpa}")
        return 0
    if a.import_solution:
        lam = solver.import_solution(a.import_solution, data.m)
        values = [str(x) for x in lam]
        obj = data.objective_at(lam)
        print(f"objective {float(obj)}")
    else:
        res = solver.solve_sdp_data(data, precision_bits=a.precision, max_iter=a.max_iter)
        digits = int(a.precision * 0.30103) + 2
        values = [mpmath.nstr(x, digits, strip_zeros=False) for x in res.lam]
        print(f"objective {mpmath.nstr(res.objective_mp, 40)}  ({res.status}, {res.iterations} iterations)")
    _write_json(a.out, {"lambda": values, "dimension": data.m})
    return 0


def _bound_round(a) -> int:
    prog = _load_program(a.program)
    param = solver.parameterize(prog)
    lam = [Fraction(x) for x in json.loads(Path(a.solution).read_text())["lambda"]]
    cert = solver.round_certificate(param, lam, a.digits, prog)
    Path(a.out).write_text(cert.dumps() + "\n")
    print(f"bound {bounds.bound_value(cert.c, cert.F_by_k(0), prog.N)}")
    return 0


def _bound_certify(a) -> int:
    prog = _load_program(a.program)
    cert = bounds.Certificate.from_json(json.loads(Path(a.cert).read_text()))
    target = Fraction(a.target) if a.target else prog.target
    rep = certify.verify_certificate(cert, prog, target)
    print(rep.to_text())
    if a.report:
        _write_json(a.report, rep.to_json())
    if target is not None:
        return 0 if rep.sharp else 1
    return 0 if rep.ok else 1


def cmd_prove(a) -> int:
    c = load_code(a.code)

    def progress(rep):
        print(rep.to_text(), flush=True)

    rep = certify.universal_optimality_pipeline(
        c, precision_bits=a.precision, digits=a.digits, jobs=a.jobs, mult_zero=a.mult_zero,
        out_dir=a.out, progress=progress if a.verbose else None,
    )
    print(rep.to_text())
    if a.out:
        _write_json(Path(a.out) / "summary.json", rep.to_json())
    return 0 if rep.certified else 1


# ----------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    prec = _default_precision()
    p = argparse.ArgumentParser(prog="threepoint", description="Three-point SDP bounds for codes and exact certificates.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("energy", help="exact energy of a code")
    s.add_argument("--code", required=True, help="catalog name or code file")
    s.add_argument("--f", required=True, help="potential in t, e.g. 't^3*(t-1/9)'")
    s.add_argument("--convention", default="hat", help="E, tilde or hat (default hat)")
    s.set_defaults(func=cmd_energy)

    s = sub.add_parser("codes", help="list, show or verify catalog codes")
    s.add_argument("action", choices=["list", "show", "verify"])
    s.add_argument("name", nargs="?", help="catalog name or code file")
    s.add_argument("--t", help="bound to check the maximal |cos| against")
    s.add_argument("--out", help="write the code file (show)")
    s.set_defaults(func=cmd_codes)

    s = sub.add_parser("design", help="projective or spherical design strength")
    s.add_argument("--code", required=True)
    s.add_argument("--kmax", type=int, default=6)
    s.set_defaults(func=cmd_design)

    s = sub.add_parser("orthoplex", help="compare an antipodal code with the orthoplex bound")
    s.add_argument("--code", required=True)
    s.set_defaults(func=cmd_orthoplex)

    s = sub.add_parser("basis", help="reduction multiset and basis potentials")
    s.add_argument("--code", required=True)
    s.add_argument("--mult-zero", type=int, default=None)
    s.set_defaults(func=cmd_basis)

    s = sub.add_parser("bound", help="build, solve, round and certify bounds")
    s.add_argument("action", choices=["build", "two-point", "solve", "round", "certify"])
    s.add_argument("--code", help="target code (switches on slackness and tangency)")
    s.add_argument("--N", type=int)
    s.add_argument("--n", type=int, default=3)
    s.add_argument("--space", default="projective", choices=["projective", "sphere"])
    s.add_argument("--f", help="potential in t")
    s.add_argument("--eps", help="perturb by eps*t^3(t-1/9)^2(t-1/3)^2")
    s.add_argument("--blocks", help="kernel blocks as k:d,k:d,...")
    s.add_argument("--sos-degree", type=int)
    s.add_argument("--putinar", action="store_true")
    s.add_argument("--max-degree", type=int, help="two-point: highest Gegenbauer degree")
    s.add_argument("--program", help="program file")
    s.add_argument("--solution", help="solution file (lambda vector)")
    s.add_argument("--cert", help="certificate file")
    s.add_argument("--target", help="claimed exact bound, p/q")
    s.add_argument("--digits", type=int, default=9)
    s.add_argument("--precision", type=int, default=prec)
    s.add_argument("--max-iter", type=int, default=200)
    s.add_argument("--export-sdpa", help="write the program as .dat-s and stop")
    s.add_argument("--import-solution", help="read lambda from an SDPA or CSDP output file")
    s.add_argument("--report", help="write the verification report (JSON)")
    s.add_argument("--out", help="output file")
    s.set_defaults(func=cmd_bound)

    s = sub.add_parser("prove-universal", help="certify universal optimality of a line code")
    s.add_argument("--code", required=True)
    s.add_argument("--precision", type=int, default=prec)
    s.add_argument("--digits", type=int, default=9)
    s.add_argument("--jobs", type=int, default=1, help="parallel potential jobs")
    s.add_argument("--mult-zero", type=int, default=None)
    s.add_argument("--out", help="directory for certificates and reports")
    s.set_defaults(func=cmd_prove)
    return p


_REQUIRED = {
    ("bound", "build"): ("f", "out"),
    ("bound", "two-point"): ("N", "f"),
    ("bound", "solve"): ("program",),
    ("bound", "round"): ("program", "solution", "out"),
    ("bound", "certify"): ("program", "cert"),
}


def dispatch(argv=None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING, format="%(message)s")
    if a.command == "codes" and a.action != "list" and not a.name:
        parser.error("codes show/verify need a code name")
    if a.command == "bound":
        missing = [k for k in _REQUIRED[("bound", a.action)] if getattr(a, k) is None]
        if a.action == "build" and a.code is None and a.N is None:
            missing.append("code or N")
        if a.action == "solve" and not (a.out or a.export_sdpa):
            missing.append("out")
        if missing:
            parser.error(f"bound {a.action} needs --" + ", --".join(missing))
    try:
        return a.func(a)
    except (ValueError, KeyError, RuntimeError, OSError, solver.SolverError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main(argv=None) -> None:
    sys.exit(dispatch(argv))


if __name__ == "__main__":
    main()
