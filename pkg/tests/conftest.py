import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# lines collected by the acceptance suite, echoed at the end of the session
ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


# ---------------------------------------------------------------- shared runs
# The heavy solves are shared by the acceptance suite and the slow property
# tests, so each one runs once per session.


def _convergence(problem, scheme, levels, start_level=2, **kw):
    from vvpctl.harness import RunConfig, run_convergence

    cfg = RunConfig(problem=problem, scheme=scheme, levels=levels, start_level=start_level, **kw)
    return run_convergence(cfg, write=False)


@pytest.fixture(scope="session")
def ex51_cg_augmented():
    """ex51, CG, rho1 = 2 nu0 / 3, rho2 = nu0 / 10, levels 2..6."""
    return _convergence("ex51", "cg", 5)


@pytest.fixture(scope="session")
def ex51_cg_plain():
    """ex51, CG, rho1 = rho2 = 0, levels 2..6."""
    return _convergence("ex51", "cg", 5, rho1=0.0, rho2=0.0)


@pytest.fixture(scope="session")
def ex51_dg():
    """ex51, DG k = 0, levels 2..5."""
    return _convergence("ex51", "dg", 4)


@pytest.fixture(scope="session")
def ex52_adaptive():
    from vvpctl.adapt import adaptive_loop
    from vvpctl.problems import make_problem

    meshes = []
    recs = adaptive_loop(make_problem("ex52"), "cg", theta=0.5, max_dofs=60000, start_level=4, meshes=meshes)
    return recs, meshes


@pytest.fixture(scope="session")
def ex53_l_adaptive():
    from vvpctl.adapt import adaptive_loop
    from vvpctl.problems import make_problem

    meshes = []
    recs = adaptive_loop(make_problem("ex53_l"), "cg", theta=0.5, max_dofs=10 ** 6, start_level=3,
                         max_iterations=6, meshes=meshes)
    return recs, meshes
