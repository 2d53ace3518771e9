import math
import warnings
from dataclasses import replace

import numpy as np
import pytest
import scipy.linalg as sla

from vvpctl.fem import FeFunction, cell_quad, evaluate, interpolate, space_tab
from vvpctl.forms_cg import (
    Triplets,
    adjoint_from_state,
    assemble_adjoint_cg,
    assemble_state_cg,
    cg_spaces,
    check_assumptions,
    constant_coefficients,
    norm_gram,
    state_matrix_cg,
    volume_blocks,
)
from vvpctl.linsolve import solve
from vvpctl.mesh import generate
from vvpctl.optctl import Discretization
from vvpctl.problems import make_problem


def _interior_vw(spaces):
    """Indices of free velocity DOFs followed by all vorticity DOFs."""
    o = spaces.offsets
    free = np.setdiff1d(np.arange(o[1]), spaces.velocity.boundary_dofs)
    return np.concatenate([free, np.arange(o[1], o[2])])


def _min_coercivity(a, gram, idx):
    a = a.toarray()[np.ix_(idx, idx)]
    g = gram.toarray()[np.ix_(idx, idx)]
    s = 0.5 * (a + a.T)
    return float(sla.eigh(s, g, eigvals_only=True).min())


def test_p1_mass_entries():
    m = generate("unit_square", 2)
    sp_ = cg_spaces(m)
    c = constant_coefficients(nu=1.0, sigma=1.0)
    kvv = volume_blocks(c, sp_, 7)["vv"][0]
    area = m.areas[0]
    # vertex DOFs come first, component-interleaved
    vert = kvv[:6, :6]
    for a in range(6):
        for b in range(6):
            if a % 2 != b % 2:
                expect = 0.0
            elif a == b:
                expect = area / 6
            else:
                expect = area / 12
            assert abs(vert[a, b] - expect) <= 1e-15


def test_vorticity_block_is_spd_mass():
    m = generate("unit_square", 3)
    sp_ = cg_spaces(m)
    a = state_matrix_cg(constant_coefficients(), sp_)
    o = sp_.offsets
    ww = a[o[1]:o[2], o[1]:o[2]].toarray()
    assert np.allclose(ww, ww.T, atol=1e-15)
    assert np.linalg.eigvalsh(ww).min() > 0
    assert abs(ww.sum() - 1.0) <= 1e-13


@pytest.mark.parametrize("n", [1, 2])
def test_coercivity_cg(n):
    # 2 cells at n = 1, 8 cells at n = 2
    p = make_problem("ex51", rho1=2 * 0.001 / 3, rho2=0.4 * 0.001)
    m = generate("unit_square", n)
    sp_ = cg_spaces(m)
    a = state_matrix_cg(p.coefficients, sp_)
    g = norm_gram(sp_)
    lam = _min_coercivity(a, g, _interior_vw(sp_))
    assert lam > 0


def test_discrete_inf_sup_does_not_decay():
    vals = []
    for n in (2, 3, 4):
        sp_ = cg_spaces(generate("unit_square", n))
        c = constant_coefficients()
        a = state_matrix_cg(c, sp_)
        o = sp_.offsets
        free = np.setdiff1d(np.arange(o[1]), sp_.velocity.boundary_dofs)
        b = a[o[2]:o[3], :o[1]].toarray()[:, free]
        gv = norm_gram(sp_).toarray()[np.ix_(free, free)]
        cq = cell_quad(sp_.mesh, 4)
        t = space_tab(sp_.pressure, 4)
        mq = np.zeros((sp_.pressure.ndofs,) * 2)
        loc = np.einsum("kq,kqa,kqb->kab", cq.w, t.val, t.val)
        for k, d in enumerate(sp_.pressure.dof_map):
            mq[np.ix_(d, d)] += loc[k]
        s = b @ np.linalg.solve(gv, b.T)
        ev = np.sort(sla.eigh(s, mq, eigvals_only=True))
        # the constant pressure is the single zero mode
        assert ev[0] <= 1e-10
        vals.append(math.sqrt(ev[1]))
    for v0, v1 in zip(vals, vals[1:]):
        assert v1 >= 0.9 * v0


def test_augmentation_terms_are_consistent():
    p = make_problem("ex51")
    ex = p.exact
    curl_gap, div_gap = [], []
    for n in (6, 7, 8):
        sp_ = cg_spaces(generate("unit_square", n))
        y = interpolate(sp_.velocity, ex.y)
        om = interpolate(sp_.vorticity, ex.omega)
        cq = cell_quad(sp_.mesh, 7)
        _, gy = evaluate(y, space_tab(sp_.velocity, 7))
        ov, _ = evaluate(om, space_tab(sp_.vorticity, 7))
        curl = gy[..., 1, 0] - gy[..., 0, 1]
        div = gy[..., 0, 0] + gy[..., 1, 1]
        curl_gap.append(math.sqrt(((curl - ov) ** 2 * cq.w).sum()))
        div_gap.append(math.sqrt((div ** 2 * cq.w).sum()))
    for e in (curl_gap, div_gap):
        # rates reported to two decimals, as in a convergence table
        rates = [round(math.log2(e[i] / e[i + 1]), 2) for i in range(2)]
        assert min(rates) >= 1.0


def test_adjoint_is_signed_transpose():
    p = make_problem("ex51")
    sp_ = cg_spaces(generate("unit_square", 2))
    a = state_matrix_cg(p.coefficients, sp_)
    at = adjoint_from_state(a, sp_).toarray()
    o = sp_.offsets
    dense = a.toarray()
    sign = np.ones(sp_.size)
    sign[o[1]:o[3]] = -1
    assert np.array_equal(at, dense.T * sign[None, :])


def _linear_beta_coefficients():
    return replace(
        constant_coefficients(nu=1.0, sigma=2.0),
        beta=lambda x: np.stack([1.0 + x[..., 1], 2.0 * x[..., 0] - x[..., 1]], -1),
        div_beta=lambda x: np.full(x.shape[:-1], -1.0),
    )


def test_adjoint_transport_matches_strong_form():
    # transpose of (sigma y + (beta.grad) y, v) on zero-trace fields equals
    # (sigma w - (beta.grad) w - (div beta) w, z), assembled independently
    c = _linear_beta_coefficients()
    sp_ = cg_spaces(generate("unit_square", 3))
    deg = 7
    cq = cell_quad(sp_.mesh, deg)
    tv = space_tab(sp_.velocity, deg)
    beta = np.asarray(c.beta(cq.x))
    adv = np.einsum("kqbij,kqj->kqbi", tv.grad, beta)
    nv = sp_.velocity.ndofs
    st, ad = Triplets(nv), Triplets(nv)
    dv = sp_.velocity.dof_map
    st.add(dv, dv, np.einsum("kq,kqbi,kqai->kab", cq.w, adv + 2.0 * tv.val, tv.val))
    # sigma - div beta = 2 - (-1)
    ad.add(dv, dv, np.einsum("kq,kqbi,kqai->kab", cq.w, -adv + 3.0 * tv.val, tv.val))
    free = np.setdiff1d(np.arange(nv), sp_.velocity.boundary_dofs)
    s = st.matrix().toarray()[np.ix_(free, free)]
    t = ad.matrix().toarray()[np.ix_(free, free)]
    assert np.abs(s.T - t).max() <= 1e-13


def test_adjoint_of_exact_targets_is_zero():
    # linear targets are reproduced exactly by the discrete state fields
    yd = lambda x: np.stack([x[..., 0] - 2 * x[..., 1], 0.5 + x[..., 1]], -1)
    od = lambda x: 3.0 * x[..., 0] - x[..., 1]
    c = replace(constant_coefficients(nu=1.0, sigma=1.0), y_d=yd, omega_d=od)
    sp_ = cg_spaces(generate("unit_square", 3))
    y = interpolate(sp_.velocity, yd)
    om = interpolate(sp_.vorticity, od)
    sys = assemble_adjoint_cg(c, sp_, y, om)
    assert np.abs(sys.rhs).max() <= 1e-14
    x, _ = solve(sys.matrix, sys.rhs)
    assert np.abs(x).max() <= 1e-12


def test_galerkin_residual_state_and_adjoint():
    p = make_problem("ex51")
    disc = Discretization("cg", p.coefficients, generate("unit_square", 4))
    u = FeFunction(disc.spaces.control, np.zeros(disc.spaces.control.ndofs))
    y, om, _, _ = disc.solve_state(u)
    disc.solve_adjoint(y, om)
    assert max(disc.last_residuals) <= 1e-10
    sys = assemble_state_cg(p.coefficients, disc.spaces, u)
    x, _ = solve(sys.matrix, sys.rhs)
    assert np.abs(sys.matrix @ x - sys.rhs).max() / np.abs(sys.rhs).max() <= 1e-10


def test_mean_pressure_is_zero():
    p = make_problem("ex51")
    disc = Discretization("cg", p.coefficients, generate("unit_square", 3))
    u = FeFunction(disc.spaces.control, np.zeros(disc.spaces.control.ndofs))
    _, _, ph, _ = disc.solve_state(u)
    cq = cell_quad(disc.mesh, 4)
    pv, _ = evaluate(ph, space_tab(ph.space, 4))
    assert abs((pv * cq.w).sum()) <= 1e-12


def test_check_assumptions_examples():
    ok = check_assumptions(constant_coefficients(nu=1.0, sigma=1.0))
    assert ok["ok"]
    with warnings.catch_warnings(record=True):
        warnings.simplefilter("always")
        rep = check_assumptions(make_problem("ex51").coefficients)
    assert rep["divergence_free"]
    assert "reaction_margin" in rep and "divergence_free_margin" in rep
    bad = replace(constant_coefficients(nu=1.0, sigma=0.0), grad_nu=lambda x: np.ones(x.shape))
    with pytest.warns(UserWarning):
        assert not check_assumptions(bad)["ok"]
