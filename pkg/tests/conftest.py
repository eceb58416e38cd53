import itertools
from fractions import Fraction

from hypothesis import settings

settings.register_profile("default", deadline=None, print_blob=True)
settings.load_profile("default")

# filled by the acceptance tests, echoed after the run
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


def det_laplace(m):
    """Cofactor expansion; an oracle independent of any elimination code."""
    d = len(m)
    if d == 0:
        return Fraction(1)
    if d == 1:
        return m[0][0]
    total = 0
    for j in range(d):
        if m[0][j] == 0:
            continue
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        total += (-1) ** j * m[0][j] * det_laplace(minor)
    return total


def psd_by_minors(m):
    """All principal minors nonnegative."""
    d = len(m)
    for r in range(1, d + 1):
        for idx in itertools.combinations(range(d), r):
            sub = [[m[i][j] for j in idx] for i in idx]
            if det_laplace(sub) < 0:
                return False
    return True


# ----------------------------------------------------------------------
# shared expensive fixtures

import pytest  # noqa: E402


@pytest.fixture(scope="session")
def rhombic_pipeline():
    """The full certification run for the 7 lines (solved once per session)."""
    from threepoint.certify import universal_optimality_pipeline
    from threepoint.codes import builtin

    import time

    t0 = time.time()
    rep = universal_optimality_pipeline(builtin("rhombic7"), precision_bits=256)
    rep.wall_seconds = time.time() - t0
    return rep


@pytest.fixture(scope="session")
def rhombic_t2(rhombic_pipeline):
    """(program, certificate) for the perturbed potential t^2."""
    from threepoint.bounds import build_dual_program, perturb_potential
    from threepoint.codes import builtin
    from threepoint.polynomials import UniPoly

    f0 = perturb_potential(UniPoly([0, 0, 1]))
    prog = build_dual_program(7, 3, "projective", f0, target_code=builtin("rhombic7"))
    rep = rhombic_pipeline.potentials[2]
    assert rep.certificate is not None, rep.error
    return prog, rep.certificate
