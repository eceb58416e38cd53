import itertools
from fractions import Fraction as Q

import pytest
from hypothesis import given, settings, strategies as st

from threepoint.codes import Code, builtin
from threepoint.exact_arith import QuadNumber, psd_check
from threepoint.orthoplex import applicable_bound, check_code, phi, phi_inner, transform_code
from threepoint.polynomials import UniPoly, gegenbauer


def rational_unit_vector(ys):
    """Inverse stereographic projection of ``ys`` in R^(n-1): a rational point on S^(n-1)."""
    r2 = sum(y * y for y in ys)
    d = 1 + r2
    return tuple(2 * y / d for y in ys) + ((r2 - 1) / d,)


coords = st.fractions(-4, 4, max_denominator=6)


@settings(max_examples=30)
@given(st.integers(2, 4).flatmap(lambda k: st.tuples(st.lists(coords, min_size=k, max_size=k),
                                                     st.lists(coords, min_size=k, max_size=k))))
def test_phi_identity(pair):
    x, y = (rational_unit_vector(v) for v in pair)
    n = len(x)
    px, py = phi(x), phi(y)
    assert phi_inner(px, px) == 1
    assert sum(px[i][i] for i in range(n)) == 0
    ip = sum(a * b for a, b in zip(x, y))
    assert phi_inner(px, py) == gegenbauer(n, 2)(ip)


def test_phi_validation():
    with pytest.raises(ValueError):
        phi((1, 1, 0))
    with pytest.raises(ValueError):
        phi((1,))


def test_gram_matches_phi_images():
    c = builtin("rhombic7")
    G = transform_code(c)
    imgs = [phi(p) for p in c.points]
    for i, j in itertools.product(range(c.N), repeat=2):
        assert G[i][j] == phi_inner(imgs[i], imgs[j])
    assert psd_check(G)


def test_gram_row_sums_vanish_for_two_designs():
    # icosa6 is a 2-design, so every row of the P_2 Gram matrix sums to 0
    G = transform_code(builtin("icosa6"))
    assert all(sum(row) == 0 for row in G)
    assert psd_check(G)
    # with P_4 the icosahedral rows still vanish, the rhombic ones do not
    p4 = gegenbauer(3, 4)
    assert all(sum(row) == 0 for row in transform_code(builtin("icosa6"), p4))
    assert all(sum(row) == 0 for row in transform_code(builtin("rhombic7")))
    assert any(sum(row) != 0 for row in transform_code(builtin("rhombic7"), p4))


def test_transform_code_validation():
    c = builtin("rhombic7")
    t = UniPoly([0, 1])
    with pytest.raises(ValueError):
        transform_code(c, 2 * t)  # f(1) != 1
    with pytest.raises(ValueError):
        transform_code(c, 2 * t ** 2 - t)  # negative Gegenbauer coefficient
    assert transform_code(c, t ** 2) == c.cos_squared
    # odd potentials need signed cosines, which unequal lifts do not give
    with pytest.raises(ValueError):
        transform_code(builtin("icosaVF16"), t)
    with pytest.raises(ValueError):
        transform_code(Code(3, "sphere", [(1, 0, 0), (0, 1, 0)]))


def test_applicable_bound():
    assert applicable_bound(3, 14) == (True, QuadNumber.sqrt(Q(1, 3)))
    assert applicable_bound(4, 22) == (True, Q(1, 2))
    assert applicable_bound(3, 12)[0] is False
    assert applicable_bound(3, 22)[0] is False
    assert applicable_bound(3, 20)[0] is True
    with pytest.raises(ValueError):
        applicable_bound(3, 13)
    with pytest.raises(ValueError):
        applicable_bound(1, 4)


def test_catalog_examples():
    r = check_code(builtin("rhombic7"))
    assert r.applicable and r.status == "sharp" and r.code_max_cos == QuadNumber.sqrt(Q(1, 3))
    a = check_code(builtin("antipodal22_S3"))
    assert a.applicable and a.status == "sharp" and a.code_max_cos == Q(1, 2)
    assert a.to_text().startswith("sharp at 1/2")
    for name in ("icosa6", "cube4", "icosaVF16"):
        assert check_code(builtin(name)).status == "not_applicable"


def test_every_applicable_case_holds():
    # seven lines with a pair at 45 degrees sit above the bound
    pts = [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0), (1, -1, 0), (1, 0, 1), (0, 1, 1)]
    v = check_code(Code(3, "projective", pts))
    assert v.applicable and v.status == "meets"
    names = ["rhombic7", "antipodal22_S3", "icosa6", "cube4", "icosaVF16", "petersen10_S3",
             "pentagons10_S3", "simplex_lines(3)", "simplex_lines(4)", "orthogonal_lines(3,3)"]
    for name in names:
        c = builtin(name)
        if c.space == "sphere" and not c.antipodal:
            continue
        assert check_code(c).status != "violates", name
