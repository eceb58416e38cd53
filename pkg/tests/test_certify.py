import dataclasses
from fractions import Fraction as Q

import pytest

from threepoint.bounds import UnsupportedCaseError
from threepoint.certify import (
    default_mult_zero, equality_set, identity_residual, uniqueness_counts, universal_optimality_pipeline,
    verify_certificate,
)
from threepoint.codes import builtin, energy, projective_invariants, triple_distribution
from threepoint.exact_arith import to_exact
from threepoint.polynomials import UniPoly

t = UniPoly([0, 1])
F6 = t ** 3 * (t - Q(1, 9)) ** 2 * (t - Q(1, 3))
RHOMBIC_VALUES = [0, Q(1, 9), Q(1, 3)]


def _zero(m):
    return [[Q(0)] * len(m) for _ in m]


def _scaled(m, s):
    return [[x * s for x in row] for row in m]


def test_t2_certificate_verifies(rhombic_t2):
    prog, cert = rhombic_t2
    rep = verify_certificate(cert, prog, Q(38, 27))
    assert rep.sharp and rep.identity_routes == (True, True)
    assert rep.slackness_ok and rep.tangency_ok
    assert identity_residual(cert, prog) == {}


def test_zero_certificate_fails_identity(rhombic_t2):
    prog, cert = rhombic_t2
    zero = dataclasses.replace(cert, c=Q(0), F=[_zero(F) for F in cert.F], M=_zero(cert.M))
    rep = verify_certificate(zero, prog, Q(38, 27))
    assert not rep.identity_ok and not rep.sharp
    assert rep.identity_routes == (False, False)


def test_tiny_perturbation_is_caught(rhombic_t2):
    prog, cert = rhombic_t2
    eps = Q(1, 10 ** 9)
    bumped = dataclasses.replace(cert, c=cert.c + eps)
    rep = verify_certificate(bumped, prog, Q(38, 27))
    assert not rep.identity_ok and not rep.sharp
    M = [row[:] for row in cert.M]
    M[3][5] += eps
    M[5][3] += eps
    rep = verify_certificate(dataclasses.replace(cert, M=M), prog, Q(38, 27))
    assert not rep.identity_ok
    assert identity_residual(dataclasses.replace(cert, M=M), prog)


def test_wrong_target_is_not_sharp(rhombic_t2):
    prog, cert = rhombic_t2
    rep = verify_certificate(cert, prog, Q(38, 27) + Q(1, 10 ** 6))
    assert rep.ok and not rep.sharp


def _final(rhombic_pipeline):
    rep = rhombic_pipeline.potentials[-1]
    assert rep.certificate is not None, rep.error
    return rep.certificate


def test_equality_set_on_five_classes(rhombic_pipeline):
    cert = _final(rhombic_pipeline)
    classes = equality_set(cert, F6, RHOMBIC_VALUES)
    got = sorted(projective_invariants(p) for p in classes)
    expect = sorted(key for key, _, _ in triple_distribution(builtin("rhombic7")).labeled())
    assert got == expect
    assert equality_set(cert, F6, []) == []
    assert equality_set(cert, F6, [0]) == [(0, 0, 0)]


def test_uniqueness_counts(rhombic_pipeline):
    cert = _final(rhombic_pipeline)
    classes = equality_set(cert, F6, RHOMBIC_VALUES)
    counts = uniqueness_counts(cert, classes, 7)
    assert sorted(counts) == [6, 24, 36, 72, 72] and sum(counts) == 210
    # the counts agree with the code's own triple distribution
    dist = {key: cnt for key, _, cnt in triple_distribution(builtin("rhombic7")).labeled()}
    assert all(dist[projective_invariants(p)] == c for p, c in zip(classes, counts))
    # invariant under positive scaling of the certificate
    scaled = dataclasses.replace(cert, F=[_scaled(F, 3) for F in cert.F], M=_scaled(cert.M, 3))
    assert uniqueness_counts(scaled, classes, 7) == counts
    # without the slackness rows only the total survives
    blank = dataclasses.replace(cert, F=[_zero(F) for F in cert.F])
    with pytest.raises(ValueError):
        uniqueness_counts(blank, classes, 7)


def test_default_mult_zero():
    assert default_mult_zero(RHOMBIC_VALUES) == 3
    assert default_mult_zero([0]) == 2


def test_pipeline_orthogonal_lines():
    rep = universal_optimality_pipeline(builtin("orthogonal_lines(3,3)"), precision_bits=128)
    assert rep.certified
    assert [m for _, m in rep.multiset] == [2]
    assert [p.method for p in rep.potentials] == ["trivial", "two-point"]
    assert rep.potentials[-1].bound == 0 == rep.potentials[-1].target


def test_pipeline_rejects_irrational_values():
    with pytest.raises(UnsupportedCaseError):
        universal_optimality_pipeline(builtin("icosaVF16"))


def test_final_potential_nonpositive_on_small_angles():
    # F6 <= 0 on [0, 1/3], so codes with max cos^2 <= 1/3 have nonpositive energy
    names = ["rhombic7", "icosa6", "cube4", "simplex_lines(3)", "simplex_lines(4)", "orthogonal_lines(3,3)"]
    for name in names:
        c = builtin(name)
        if max(to_exact(x) for x in c.squared_inner_products()) <= Q(1, 3):
            assert energy(c, F6, "hat") <= 0, name
