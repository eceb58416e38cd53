from fractions import Fraction as Q

import numpy as np
import pytest
from hypothesis import given, strategies as st

from threepoint.exact_arith import (
    AsymmetricMatrixError, ContextError, InconsistentSystemError, LinearEquation, QuadNumber,
    charpoly, identity, mat_inner, ones, psd_check, scalar_from_json, scalar_to_json, sign,
    solve_affine, sqrt_exact,
)

from conftest import psd_by_minors

fractions = st.fractions(min_value=-5, max_value=5, max_denominator=12)


def sym_matrices(max_dim=5):
    def build(args):
        d, vals = args
        m = [[Q(0)] * d for _ in range(d)]
        it = iter(vals)
        for i in range(d):
            for j in range(i, d):
                m[i][j] = m[j][i] = next(it)
        return m

    return st.integers(1, max_dim).flatmap(
        lambda d: st.tuples(st.just(d), st.lists(fractions, min_size=d * (d + 1) // 2, max_size=d * (d + 1) // 2))
    ).map(build)


def test_quad_arithmetic():
    s = QuadNumber.sqrt(Q(1, 3))
    assert s * s == Q(1, 3)
    x = QuadNumber(1, 2, 3)
    y = QuadNumber(Q(1, 2), -1, 3)
    # (1 + 2 sqrt3)(1/2 - sqrt3) = 1/2 - sqrt3 + sqrt3 - 6
    assert x * y == Q(-11, 2)
    assert x / x == 1
    assert sign(QuadNumber(-1, 1, 2)) == 1
    assert sign(QuadNumber(Q(3, 2), -1, 2)) == 1
    assert sign(QuadNumber(Q(7, 5), -1, 2)) == -1


small = st.fractions(-3, 3, max_denominator=20)


@given(small, small, small, small)
def test_quad_sign_matches_float(a, b, c, d):
    x = QuadNumber(a, b, 5) if b else a
    y = QuadNumber(c, d, 5) if d else c
    z = x * y - x
    approx = float(z if isinstance(z, Q) else z.a + z.b * 5 ** 0.5)
    if abs(approx) > 1e-9:
        assert sign(z) == (1 if approx > 0 else -1)


def test_quad_context_mismatch():
    with pytest.raises(ContextError):
        QuadNumber(0, 1, 3) + QuadNumber(0, 1, 5)


def test_sqrt_exact_and_json():
    assert sqrt_exact(Q(4, 9)) == Q(2, 3)
    assert sqrt_exact(Q(1, 3)) is None  # no context given
    r = sqrt_exact(Q(1, 3), Q(1, 3))
    assert r * r == Q(1, 3)
    for v in (Q(-7, 3), QuadNumber(1, Q(-2, 5), Q(1, 3))):
        assert scalar_from_json(scalar_to_json(v)) == v
    assert scalar_to_json(Q(-7, 3)) == "-7/3"


def test_charpoly_examples():
    assert charpoly(identity(2)) == [1, -2, 1]
    assert charpoly([[0, 1], [1, 0]]) == [-1, 0, 1]
    assert charpoly([[1, 2], [2, 1]]) == [-3, -2, 1]
    with pytest.raises(ValueError):
        charpoly([[1, 2]])


def test_charpoly_vanishes_on_diagonal_eigenvalues():
    s = QuadNumber.sqrt(Q(1, 3))
    diag = [Q(1, 2), s, -s, Q(0)]
    m = [[diag[i] if i == j else Q(0) for j in range(4)] for i in range(4)]
    p = charpoly(m)
    for lam in diag:
        val = sum((c * lam ** k for k, c in enumerate(p)), Q(0))
        assert val == 0


def test_charpoly_agrees_with_numpy_large():
    rng = np.random.default_rng(1)
    a = rng.integers(-3, 4, size=(10, 10))
    a = a + a.T
    p = charpoly([[Q(int(x)) for x in row] for row in a])
    ref = np.poly(a.astype(float))[::-1]
    assert np.allclose([float(c) for c in p], ref, rtol=1e-9, atol=1e-6)


def test_psd_examples():
    assert psd_check(identity(3))
    assert not psd_check([[1, 2], [2, 1]])
    assert psd_check([[2, -1, 0], [-1, 2, -1], [0, -1, 2]])
    assert psd_check(ones(3))  # singular but PSD
    with pytest.raises(AsymmetricMatrixError):
        psd_check([[1, 2], [0, 1]])


def test_psd_quadratic_entries():
    s = QuadNumber.sqrt(Q(1, 3))
    assert psd_check([[1, s], [s, Q(1, 3)]])  # rank one
    assert not psd_check([[1, s], [s, Q(1, 4)]])


@given(sym_matrices())
def test_psd_matches_principal_minors(m):
    assert psd_check(m) == psd_by_minors(m)


@given(st.lists(fractions, min_size=3, max_size=3), st.lists(fractions, min_size=3, max_size=3))
def test_psd_gram_matrices(a, b):
    # Gram matrices are PSD; the oracle is construction
    vecs = [a, b, [x + y for x, y in zip(a, b)]]
    g = [[sum(x * y for x, y in zip(u, v)) for v in vecs] for u in vecs]
    assert psd_check(g)


def test_mat_inner_examples():
    assert mat_inner(identity(3), identity(3)) == 3
    assert mat_inner(ones(2), ones(2)) == 4
    assert mat_inner([[1, 2], [2, 1]], [[0, 1], [1, 0]]) == 4
    with pytest.raises(ValueError):
        mat_inner(identity(2), identity(3))


@given(sym_matrices(4))
def test_mat_inner_self_nonnegative(m):
    v = mat_inner(m, m)
    assert v >= 0
    assert (v == 0) == all(x == 0 for row in m for x in row)


def test_solve_affine_examples():
    sol = solve_affine([LinearEquation({"x": 1, "y": 1}, 1), LinearEquation({"x": 1, "y": -1}, 0)])
    assert sol.particular == (Q(1, 2), Q(1, 2)) and sol.dimension == 0
    sol = solve_affine([LinearEquation({"m11": 1, "m22": 1}, 0)], ["m11", "m12", "m22"])
    assert sol.dimension == 2
    with pytest.raises(InconsistentSystemError):
        solve_affine([LinearEquation({"x": 1}, 0), LinearEquation({"x": 1}, 1)])


def test_solve_affine_quadratic_coefficients():
    s = QuadNumber.sqrt(Q(1, 3))
    # (1 + sqrt(1/3)) x + y = 2 + sqrt(1/3) over rational x, y forces x = 1, y = 1
    sol = solve_affine([LinearEquation({"x": 1 + s, "y": 1}, 2 + s)])
    assert sol.particular == (1, 1) and sol.dimension == 0


@given(st.integers(1, 5), st.integers(1, 6), st.data())
def test_solve_affine_substitution(neq, nvar, data):
    rows = data.draw(st.lists(st.lists(fractions, min_size=nvar, max_size=nvar), min_size=neq, max_size=neq))
    x0 = data.draw(st.lists(fractions, min_size=nvar, max_size=nvar))
    eqs = [LinearEquation({i: c for i, c in enumerate(r)}, sum(c * x for c, x in zip(r, x0))) for r in rows]
    sol = solve_affine(eqs, list(range(nvar)))
    lams = data.draw(st.lists(fractions, min_size=sol.dimension, max_size=sol.dimension))
    pt = sol.point(lams)
    for eq in eqs:
        assert sum(c * pt[i] for i, c in eq.coeffs.items()) == eq.rhs
