import math
import random
from fractions import Fraction as Q

import mpmath
import pytest

from threepoint import solver
from threepoint.bounds import (
    Certificate, DualProgram, UnsupportedCaseError, bound_value, build_dual_program, monomials,
    perturb_potential, primal_restricted, tangency_constraints, two_point_bound,
)
from threepoint.codes import builtin, energy, triple_distribution
from threepoint.exact_arith import QuadNumber
from threepoint.polynomials import UniPoly

t = UniPoly([0, 1])
s3 = QuadNumber.sqrt(Q(1, 3))


def test_monomials():
    assert monomials(0) == [(0, 0, 0)]
    assert len(monomials(1)) == 4
    m7 = monomials(7)
    assert len(m7) == math.comb(10, 3) == 120
    assert m7 == sorted(m7)
    assert len(monomials(14)) == math.comb(17, 3) == 680


def test_perturb_potential():
    f0 = perturb_potential(t ** 2)
    assert f0(0) == 0 and f0(Q(1, 9)) == Q(1, 81) and f0(Q(1, 3)) == Q(1, 9)
    assert f0(1) == 1 - Q(256, 729000)
    assert perturb_potential(t ** 2, eps=0) == t ** 2
    assert perturb_potential(t, [(Q(1, 2), 2)], Q(1)) == t - (t - Q(1, 2)) ** 2


def test_bound_value():
    assert bound_value(0, [[0]], 5) == 0
    assert bound_value(Q(2, 9), [[1, -1], [-1, 1]], 7) == Q(14, 3)
    assert bound_value(1, [[1]], 3) == Q(3, 2)


def test_two_point_examples():
    r = two_point_bound(7, 3, t)
    assert r.bound == Q(14, 3) and r.c == Q(1, 3) and r.a[0] == Q(2, 3)
    assert r.bound == energy(builtin("rhombic7"), t, "hat")
    assert two_point_bound(7, 3, UniPoly([Q(5, 2)])).bound == Q(21 * 5, 2)
    r2 = two_point_bound(7, 3, t ** 2)
    assert r2.bound < Q(38, 27)
    # orthogonal lines: all squared inner products vanish and the bound is sharp
    assert two_point_bound(3, 3, t).bound == 0


def test_two_point_bound_is_certified():
    # independent check: c + sum a_k P_2k(x) <= f(x^2) on a fine grid of [-1,1]
    from threepoint.polynomials import gegenbauer

    r = two_point_bound(7, 3, t ** 3)
    for i in range(401):
        x = Q(i - 200, 200)
        h = r.c + sum((a * gegenbauer(3, 2 * (k + 1))(x) for k, a in enumerate(r.a)), Q(0))
        assert h <= x ** 6
    assert all(a >= 0 for a in r.a)
    assert r.bound <= energy(builtin("rhombic7"), t ** 3, "hat")


def test_rhombic_program_shape():
    f0 = perturb_potential(t ** 2)
    prog = build_dual_program(7, 3, "projective", f0, target_code=builtin("rhombic7"))
    full_sizes = {b.name: len(b.rows) for b in prog.blocks if b.kind == "F"}
    assert full_sizes == {"F0": 5, "F1": 4, "F2": 4, "F3": 3, "F4": 3, "F5": 2}
    sos_rows = sum(len(b.rows) for b in prog.blocks if b.group == "M")
    assert sos_rows == 120
    assert len(prog.monomial_order) == 120
    assert len(prog.support) == 5
    assert sum(c for _, c in prog.support) == 210
    assert prog.target == energy(builtin("rhombic7"), f0, "hat")
    # determinism and JSON round trip
    again = build_dual_program(7, 3, "projective", f0, target_code=builtin("rhombic7"))
    assert again.dumps() == prog.dumps()
    back = DualProgram.from_json(prog.to_json())
    assert back.dumps() == prog.dumps() and back.fingerprint() == prog.fingerprint()


def test_coefficient_equations_unreduced():
    # without a target code every monomial of degree <= 14 gets one equation
    # up to those that vanish identically by the sign symmetry
    f0 = perturb_potential(t ** 2)
    prog = build_dual_program(7, 3, "projective", f0)
    mus = [eq.label for eq in prog.equations if eq.label.startswith("coef")]
    assert 0 < len(mus) <= 680
    assert len(set(mus)) == len(mus)


def test_degree_mismatch():
    with pytest.raises(ValueError):
        build_dual_program(7, 3, "projective", t ** 4, sos_degree=3)


def test_tangency_counts():
    f0 = perturb_potential(t ** 2)
    prog = build_dual_program(7, 3, "projective", f0)
    assert len(tangency_constraints(prog, [(0, 0, 0)])) == 4
    five = [trip for _, trip, _ in triple_distribution(builtin("rhombic7")).labeled()]
    eqs = tangency_constraints(prog, five)
    assert len(eqs) == 20
    with pytest.raises(ValueError):
        tangency_constraints(prog, [(1, 1, 1)])


def test_tangency_radicals_cancel():
    f0 = perturb_potential(t ** 2)
    prog = build_dual_program(7, 3, "projective", f0)
    eqs = tangency_constraints(prog, [(s3, s3, 0)])
    value = eqs[0]
    assert all(isinstance(c, Q) for c in value.coeffs.values()) and isinstance(value.rhs, Q)


def test_unsupported_irrational_triples():
    # icosa6 has the single rational value 1/5; the 16 lines leave Q
    assert builtin("icosa6").squared_inner_products() == {Q(1, 5)}
    c = builtin("icosaVF16")
    with pytest.raises(UnsupportedCaseError):
        build_dual_program(c.N, 3, "projective", t ** 2, target_code=c)


def test_degenerate_constant_program():
    kappa = Q(2, 3)
    prog = build_dual_program(7, 3, "projective", UniPoly([kappa]), blocks=())
    param = solver.parameterize(prog)
    data = solver.SDPData.from_program(prog, param)
    res = solver.solve_sdp_data(data, precision_bits=128)
    assert abs(float(res.objective_mp) - 21 * kappa) < 1e-8


def test_primal_restricted_small_cases():
    f0 = perturb_potential(t ** 2) + UniPoly([Q(1, 7)])
    v = primal_restricted(3, f0, [(0, 0, 0)], precision_bits=128)
    assert abs(v - mpmath.mpf(3) / 7) < mpmath.mpf(10) ** -30
    g = t + UniPoly([Q(1, 5)])
    v = primal_restricted(7, g, [(0, 0, 0), (Q(1, 3), Q(1, 3), Q(-1, 3))], blocks=(), precision_bits=128)
    # linear objective: all mass on the cheaper triple (0,0,0)
    assert abs(v - Q(21, 5)) < 1e-10
    with pytest.raises(ValueError):
        primal_restricted(7, g, [])


def test_certificate_json(rhombic_t2):
    prog, cert = rhombic_t2
    back = Certificate.from_json(cert.to_json())
    assert back.dumps() == cert.dumps()
    assert back.N == 7 and back.n == 3


def test_weak_duality_exact(rhombic_t2):
    prog, cert = rhombic_t2
    b = bound_value(cert.c, cert.F_by_k(0), 7)
    for name in ("rhombic7", "simplex_lines(3)"):
        c = builtin(name)
        if c.N == 7 and c.space == "projective":
            assert b <= energy(c, prog.f0, "hat")


def _float_poly(p):
    terms = [(float(c), e) for e, c in p.terms.items()]
    return lambda x: sum(c * x[0] ** e[0] * x[1] ** e[1] * x[2] ** e[2] for c, e in terms)


def test_sos_implies_pointwise_inequality(rhombic_t2):
    # H(u,v,t) <= (f0(u^2)+f0(v^2)+f0(t^2))/3 at 10^4 random points of D, in floats
    prog, cert = rhombic_t2
    # H = c + sum <F_k, T_k>, collapsed into one polynomial per entry weight
    pieces = []
    for K, F in zip(prog.kernels, cert.F):
        for i in range(K.d):
            for j in range(K.d):
                if F[i][j]:
                    pieces.append((float(F[i][j]), _float_poly(K.entries[i][j])))
    g = _float_poly(prog.target_poly)
    rng = random.Random(5)
    checked = 0
    while checked < 10_000:
        x = [rng.uniform(-1, 1) for _ in range(3)]
        if 1 + 2 * x[0] * x[1] * x[2] - sum(v * v for v in x) < 0:
            continue
        h = float(cert.c) + sum(w * e(x) for w, e in pieces)
        assert h <= g(x) + 1e-9
        checked += 1


@pytest.mark.slow
def test_primal_sandwich(rhombic_t2):
    prog, cert = rhombic_t2
    dual = bound_value(cert.c, cert.F_by_k(0), 7)
    f0 = perturb_potential(t ** 2)
    sup = [trip for trip, _ in prog.support]
    v = primal_restricted(7, f0, sup, precision_bits=256)
    tol = mpmath.mpf(10) ** -20
    lo = mpmath.mpf(dual.numerator) / dual.denominator
    hi = mpmath.mpf(38) / 27
    assert lo - tol <= v <= hi + tol
