import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from vvpctl.estimate import (
    LocalIndicators,
    cg_indicators,
    dg_indicators,
    dg_trace_indicators,
    efficiency_index,
    global_estimators,
    true_errors,
)
from vvpctl.fem import FeFunction, interpolate
from vvpctl.forms_cg import cg_spaces, constant_coefficients
from vvpctl.forms_dg import dg_spaces, stab_params
from vvpctl.mesh import generate
from vvpctl.optctl import Discretization, SolutionBundle, fixed_point_solve
from vvpctl.problems import make_problem


def _ind(y, w, u):
    z = np.zeros(len(y))
    return LocalIndicators(np.asarray(y, float), np.asarray(w, float), np.asarray(u, float), z, z, "cg")


def test_three_four_five():
    g = global_estimators(_ind([9.0], [16.0], [0.0]))
    assert g.eta_total == 5.0
    assert (g.eta_y, g.eta_w, g.eta_u) == (3.0, 4.0, 0.0)


def test_all_zero():
    g = global_estimators(_ind([0.0] * 5, [0.0] * 5, [0.0] * 5))
    assert tuple(g) == (0.0,) * 5


def test_negative_entries_rejected():
    with pytest.raises(ValueError):
        _ind([-1.0], [0.0], [0.0])


nonneg = arrays(float, st.integers(1, 60), elements=st.floats(0, 1e6))


@given(nonneg, st.integers(0, 2 ** 32 - 1))
def test_totals_ignore_cell_order(a, seed):
    perm = np.random.default_rng(seed).permutation(len(a))
    g1 = global_estimators(_ind(a, 2 * a, a[::-1]))
    g2 = global_estimators(_ind(a[perm], (2 * a)[perm], a[::-1][perm]))
    assert tuple(g1) == tuple(g2)


def test_efficiency_index():
    assert efficiency_index(0.7, 0.7) == 1.0
    assert efficiency_index(3.0, 1.5) == efficiency_index(6.0, 3.0)
    with pytest.raises(ZeroDivisionError):
        efficiency_index(1.0, 0.0)


def _scaled(bundle, factor):
    def sc(fn):
        return FeFunction(fn.space, factor * fn.coefficients)

    return SolutionBundle(sc(bundle.y_h), sc(bundle.omega_h), sc(bundle.p_h), sc(bundle.w_h),
                          sc(bundle.theta_h), sc(bundle.q_h), sc(bundle.u_h), bundle.multipliers)


def _scaled_data(c, factor):
    return replace(c, f=lambda x: factor * np.asarray(c.f(x)), y_d=lambda x: factor * np.asarray(c.y_d(x)),
                   omega_d=lambda x: factor * np.asarray(c.omega_d(x)))


@pytest.fixture(scope="module", params=["cg", "dg"])
def solved(request):
    p = make_problem("ex51")
    disc = Discretization(request.param, p.coefficients, generate("unit_square", 3))
    return disc, fixed_point_solve(disc)


def _indicators(disc, c, bundle):
    if disc.scheme == "cg":
        return cg_indicators(c, bundle)
    return dg_indicators(c, bundle, disc.stab)


def test_zero_problem_has_zero_indicators():
    c = constant_coefficients(nu=1.0, sigma=1.0)
    for scheme in ("cg", "dg"):
        disc = Discretization(scheme, c, generate("unit_square", 3))
        b = fixed_point_solve(disc)
        ind = _indicators(disc, c, b)
        assert global_estimators(ind).eta_total == 0.0


def test_homogeneity(solved):
    disc, b = solved
    i1 = _indicators(disc, disc.c, b)
    i2 = _indicators(disc, _scaled_data(disc.c, 2.0), _scaled(b, 2.0))
    for a, bb in ((i1.eta_y_sq, i2.eta_y_sq), (i1.eta_w_sq, i2.eta_w_sq), (i1.eta_u_sq, i2.eta_u_sq)):
        assert np.allclose(bb, 4.0 * a, rtol=1e-12, atol=0)


def test_locality(solved):
    disc, b = solved
    m = disc.mesh
    base = _indicators(disc, disc.c, b)
    cell = 21
    y = b.y_h.coefficients.copy()
    if disc.scheme == "cg":
        # the bubble of one cell lives in that cell only
        d = 2 * (m.nverts + cell)
        y[d:d + 2] += 0.5
        allowed = {cell}
    else:
        y[disc.spaces.velocity.dof_map[cell]] += 0.5
        nb = m.edge_cells[m.cell_edges[cell]].ravel()
        allowed = {int(c) for c in nb if c >= 0}
    bb = SolutionBundle(FeFunction(b.y_h.space, y), b.omega_h, b.p_h, b.w_h, b.theta_h, b.q_h, b.u_h, b.multipliers)
    new = _indicators(disc, disc.c, bb)
    changed = set(np.flatnonzero((new.total_sq != base.total_sq)).tolist())
    assert cell in changed
    assert changed <= allowed


def _interpolated_bundle(spaces, ex):
    return SolutionBundle(
        interpolate(spaces.velocity, ex.y), interpolate(spaces.vorticity, ex.omega),
        interpolate(spaces.pressure, ex.p), interpolate(spaces.velocity, ex.w),
        interpolate(spaces.vorticity, ex.theta), interpolate(spaces.pressure, ex.q),
        interpolate(spaces.control, ex.u), (0.0, 0.0))


def test_cg_estimator_tracks_interpolation_error():
    p = make_problem("ex51")
    eta, te, h = [], [], []
    for n in (6, 7):
        s = cg_spaces(generate("unit_square", n))
        b = _interpolated_bundle(s, p.exact)
        eta.append(global_estimators(cg_indicators(p.coefficients, b)).eta_total)
        te.append(true_errors(p.exact, b).total)
        h.append(s.mesh.cell_diameters.max())
    r_eta = math.log(eta[0] / eta[1]) / math.log(h[0] / h[1])
    r_te = math.log(te[0] / te[1]) / math.log(h[0] / h[1])
    assert abs(r_eta - r_te) <= 0.3


def test_dg_trace_indicator_vanishes_for_conforming_fields():
    m = generate("unit_square", 3)
    s = dg_spaces(m, 0)
    inner = ~m.boundary_vertices

    def broken(seed):
        # continuous P1 field with zero boundary values, copied cellwise
        vals = np.random.default_rng(seed).standard_normal((m.nverts, 2)) * inner[:, None]
        return FeFunction(s.velocity, vals[m.cells].reshape(-1))

    const = FeFunction(s.pressure, np.full(s.pressure.ndofs, 0.7))
    vort = FeFunction(s.vorticity, np.zeros(s.vorticity.ndofs))
    ctrl = FeFunction(s.control, np.zeros(s.control.ndofs))
    b = SolutionBundle(broken(1), vort, const, broken(2), vort, const, ctrl, (0.0, 0.0))
    jy, jw = dg_trace_indicators(b, stab_params(m, 1.0, 1.0, 1.0))
    assert np.abs(jy).max() <= 1e-28 and np.abs(jw).max() <= 1e-28


def test_dg_oscillation_vanishes_for_constant_data():
    c = replace(constant_coefficients(nu=2.0, sigma=3.0, beta=(1.0, -0.5)),
                f=lambda x: np.broadcast_to([1.0, 2.0], x.shape),
                y_d=lambda x: np.broadcast_to([0.5, 0.0], x.shape),
                omega_d=lambda x: np.full(x.shape[:-1], -2.0))
    disc = Discretization("dg", c, generate("unit_square", 3))
    b = fixed_point_solve(disc)
    ind = dg_indicators(c, b, disc.stab)
    assert global_estimators(ind).theta_total <= 1e-12 * global_estimators(ind).eta_total


def test_csv_layout():
    text = _ind([1.0, 2.0], [0.5, 0.25], [0.0, 0.125]).to_csv()
    assert text.splitlines() == ["cell_id,eta_y_sq,eta_w_sq,eta_u_sq", "0,1.0,0.5,0.0", "1,2.0,0.25,0.125"]
