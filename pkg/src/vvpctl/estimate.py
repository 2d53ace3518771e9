"""Residual a posteriori indicators, data oscillation and true errors.

Strong residuals use the exact coefficient callables.  The co-state
residual is the strong form of the assembled co-state operator

    div G(w) + curl(nu theta) + sigma w - (beta.grad) w - (div beta) w
        + rho1 curl curl w - grad q = y - y_d,
    (nu - rho1) curl w + grad nu x w - nu theta = omega - omega_d,

with G_ij = w_i d_j nu + w_j d_i nu (the rho2 grad div w term vanishes
for the exact co-state and is left out, as the divergence residual covers
it).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fem import (
    FeFunction,
    cell_quad,
    evaluate,
    evaluate_hessian,
    space_tab,
)
from .forms_cg import Coefficients, _cross, coefficient_samples
from .forms_dg import EdgeStabilization, edge_quad, jump_seminorms, _trace_jump

ERROR_DEGREE = 9


@dataclass
class LocalIndicators:
    eta_y_sq: np.ndarray
    eta_w_sq: np.ndarray
    eta_u_sq: np.ndarray
    theta_y_sq: np.ndarray
    theta_w_sq: np.ndarray
    scheme: str

    def __post_init__(self):
        for name in ("eta_y_sq", "eta_w_sq", "eta_u_sq", "theta_y_sq", "theta_w_sq"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if np.any(arr < 0):
                raise ValueError(f"{name} has negative entries")
            setattr(self, name, arr)

    @property
    def total_sq(self) -> np.ndarray:
        return self.eta_y_sq + self.eta_w_sq + self.eta_u_sq

    def to_csv(self) -> str:
        lines = ["cell_id,eta_y_sq,eta_w_sq,eta_u_sq"]
        for i, (a, b, c) in enumerate(zip(self.eta_y_sq, self.eta_w_sq, self.eta_u_sq)):
            lines.append(f"{i},{float(a)!r},{float(b)!r},{float(c)!r}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class GlobalEstimators:
    eta_y: float
    eta_w: float
    eta_u: float
    eta_total: float
    theta_total: float

    def __iter__(self):
        return iter((self.eta_y, self.eta_w, self.eta_u, self.eta_total, self.theta_total))


def global_estimators(ind: LocalIndicators) -> GlobalEstimators:
    """Square roots of compensated sums taken in cell-index order."""
    sy = math.fsum(ind.eta_y_sq.tolist())
    sw = math.fsum(ind.eta_w_sq.tolist())
    su = math.fsum(ind.eta_u_sq.tolist())
    st = math.fsum(ind.theta_y_sq.tolist()) + math.fsum(ind.theta_w_sq.tolist())
    return GlobalEstimators(math.sqrt(sy), math.sqrt(sw), math.sqrt(su),
                            math.sqrt(math.fsum([sy, sw, su])), math.sqrt(st))


def efficiency_index(eta_total: float, true_total_error: float) -> float:
    if true_total_error == 0.0:
        raise ZeroDivisionError("true error is zero")
    return eta_total / true_total_error


# ---------------------------------------------------------------- helpers


def _cell_sq(values, w):
    v2 = values ** 2
    while v2.ndim > 2:
        v2 = v2.sum(-1)
    return (v2 * w).sum(1)


def _fields(fn: FeFunction, degree: int, hessians: bool = False):
    tab = space_tab(fn.space, degree, hessians=hessians)
    val, grad = evaluate(fn, tab)
    hess = evaluate_hessian(fn, tab) if hessians else None
    return val, grad, hess


def _curl_scalar(g):
    return np.stack([g[..., 1], -g[..., 0]], -1)


def _curl_vec(g):
    return g[..., 1, 0] - g[..., 0, 1]


def _div_vec(g):
    return g[..., 0, 0] + g[..., 1, 1]


def _curlcurl(hess):
    """curl curl v from hess[..., i, j, l] = d^2 v_i / dx_j dx_l."""
    dcx = hess[..., 1, 0, 0] - hess[..., 0, 1, 0]
    dcy = hess[..., 1, 0, 1] - hess[..., 0, 1, 1]
    return np.stack([dcy, -dcx], -1)


def _cellwise_projection(values, w, order: int, x=None, mesh=None):
    """L2 projection of sampled data onto P0 per cell (order 0) or keep as is."""
    if order == 0:
        area = w.sum(1)
        if values.ndim == 2:
            mean = (values * w).sum(1) / area
            return np.broadcast_to(mean[:, None], values.shape)
        extra = values.shape[2:]
        flat = values.reshape(values.shape[0], values.shape[1], -1)
        mean = np.einsum("kqi,kq->ki", flat, w) / area[:, None]
        return np.broadcast_to(mean[:, None, :], flat.shape).reshape(values.shape[:2] + extra)
    return _project_pk(values, w, order, x, mesh)


def _project_pk(values, w, order, x, mesh):
    """Cellwise L2 projection onto P_order in physical monomials."""
    c = mesh.centroids[:, None, :]
    h = mesh.cell_diameters[:, None, None]
    s = (x - c) / h
    cols = [np.ones(s.shape[:2])]
    for d in range(1, order + 1):
        for i in range(d + 1):
            cols.append(s[..., 0] ** (d - i) * s[..., 1] ** i)
    B = np.stack(cols, -1)
    M = np.einsum("kq,kqa,kqb->kab", w, B, B)
    flat = values.reshape(values.shape[0], values.shape[1], -1)
    rhs = np.einsum("kq,kqa,kqi->kai", w, B, flat)
    coef = np.linalg.solve(M, rhs)
    out = np.einsum("kqa,kai->kqi", B, coef)
    return out.reshape(values.shape)


def _state_momentum(s, u, yv, yg, om_g, pg, f_vals, nu_key="nu", gnu_key="gnu", beta_key="beta",
                    sigma_key="sigma"):
    eps2 = yg + np.swapaxes(yg, -1, -2)
    r = f_vals + u
    r = r + np.einsum("kqij,kqj->kqi", eps2, s[gnu_key])
    r = r - s[nu_key][..., None] * _curl_scalar(om_g)
    r = r - np.einsum("kqij,kqj->kqi", yg, s[beta_key])
    r = r - s[sigma_key][..., None] * yv
    r = r - pg
    return r


def _adjoint_momentum(c: Coefficients, s, wv, wg, wh, thv, thg, qg, mismatch, hnu):
    gnu = s["gnu"]
    lap_nu = hnu[..., 0, 0] + hnu[..., 1, 1]
    div_w = _div_vec(wg)
    div_g = (np.einsum("kqij,kqj->kqi", wg, gnu) + wv * lap_nu[..., None]
             + div_w[..., None] * gnu + np.einsum("kqij,kqj->kqi", hnu, wv))
    curl_nu_th = s["nu"][..., None] * _curl_scalar(thg) + thv[..., None] * _curl_scalar(gnu)
    lhs = (div_g + curl_nu_th + s["sigma"][..., None] * wv
           - np.einsum("kqij,kqj->kqi", wg, s["beta"]) - s["div_beta"][..., None] * wv - qg)
    if wh is not None and c.rho1 != 0.0:
        lhs = lhs + c.rho1 * _curlcurl(wh)
    return mismatch - lhs


def _adjoint_constitutive(c: Coefficients, s, wv, wg, thv, om_mismatch):
    lhs = (s["nu"] - c.rho1) * _curl_vec(wg) + _cross(s["gnu"], wv) - s["nu"] * thv
    return om_mismatch - lhs


def _control_values(u_h: FeFunction, nq: int):
    u = u_h.coefficients.reshape(-1, 2)
    return np.broadcast_to(u[:, None, :], (u.shape[0], nq, 2))


# ---------------------------------------------------------------- indicators


def cg_indicators(c: Coefficients, bundle, degree: int | None = None) -> LocalIndicators:
    """Volume residual indicators of the conforming scheme."""
    mesh = bundle.y_h.space.mesh
    k = bundle.y_h.space.degree
    degree = degree or 2 * k + 3
    cq = cell_quad(mesh, degree)
    x, w = cq.x, cq.w
    s = coefficient_samples(c, x)
    hnu = np.asarray(c.hess_nu(x), dtype=float)
    h2 = mesh.cell_diameters[:, None] ** 2
    nq = x.shape[1]

    yv, yg, _ = _fields(bundle.y_h, degree)
    omv, omg, _ = _fields(bundle.omega_h, degree)
    _, pg, _ = _fields(bundle.p_h, degree)
    wv, wg, wh = _fields(bundle.w_h, degree, hessians=True)
    thv, thg, _ = _fields(bundle.theta_h, degree)
    _, qg, _ = _fields(bundle.q_h, degree)
    u = _control_values(bundle.u_h, nq)

    f_vals = np.asarray(c.f(x), dtype=float)
    r_y = _state_momentum(s, u, yv, yg, omg, pg, f_vals)
    eta_y = (_cell_sq(np.sqrt(h2)[..., None] * r_y, w) + _cell_sq(omv - _curl_vec(yg), w)
             + _cell_sq(_div_vec(yg), w))

    mismatch = yv - np.asarray(c.y_d(x), dtype=float)
    om_mismatch = omv - np.asarray(c.omega_d(x), dtype=float)
    r_w = _adjoint_momentum(c, s, wv, wg, wh, thv, thg, qg, mismatch, hnu)
    r_th = _adjoint_constitutive(c, s, wv, wg, thv, om_mismatch)
    eta_w = (_cell_sq(np.sqrt(h2)[..., None] * r_w, w) + _cell_sq(r_th, w) + _cell_sq(_div_vec(wg), w))

    eta_u = _cell_sq(np.sqrt(h2)[..., None] * (wv + c.gamma * u), w)
    zero = np.zeros(mesh.ncells)
    return LocalIndicators(eta_y, eta_w, eta_u, zero, zero.copy(), "cg")


def _edge_to_cells(mesh, per_edge_int, per_edge_bnd):
    """Interior edges give half to each side, boundary edges all to their cell."""
    out = np.zeros(mesh.ncells)
    ec = mesh.edge_cells
    interior = ec[:, 1] >= 0
    np.add.at(out, ec[interior, 0], 0.5 * per_edge_int[interior])
    np.add.at(out, ec[interior, 1], 0.5 * per_edge_int[interior])
    np.add.at(out, ec[~interior, 0], per_edge_bnd[~interior])
    return out


def _scalar_jump_sq(fn: FeFunction, eq, weight):
    m = fn.space.mesh
    out = np.zeros(len(m.edges))
    if len(eq.interior):
        j = _trace_jump(fn, eq, eq.interior, True)
        out[eq.interior] = (eq.w[eq.interior] * weight[eq.interior][:, None] * j ** 2).sum(1)
    return out


def dg_trace_indicators(bundle, stab: EdgeStabilization):
    """Cellwise jump penalties of state and co-state.

    Interior edges give half to each side, boundary edges all to their cell.
    """
    mesh = bundle.y_h.space.mesh
    deg = 2 * bundle.y_h.space.degree + 2
    jv_y, jp_y = jump_seminorms(bundle.y_h, bundle.p_h, stab, deg)
    jv_w, jp_w = jump_seminorms(bundle.w_h, bundle.q_h, stab, deg)
    return _edge_to_cells(mesh, jv_y + jp_y, jv_y), _edge_to_cells(mesh, jv_w + jp_w, jv_w)


def dg_indicators(c: Coefficients, bundle, stab: EdgeStabilization, degree: int | None = None) -> LocalIndicators:
    """Volume, edge and trace indicators of the DG scheme plus oscillation."""
    mesh = bundle.y_h.space.mesh
    kv = bundle.y_h.space.degree
    kp = bundle.p_h.space.degree
    degree = degree or 2 * kv + 3
    cq = cell_quad(mesh, degree)
    x, w = cq.x, cq.w
    s = coefficient_samples(c, x)
    hnu = np.asarray(c.hess_nu(x), dtype=float)
    h2 = mesh.cell_diameters[:, None] ** 2
    hcol = np.sqrt(h2)[..., None]
    nq = x.shape[1]

    yv, yg, _ = _fields(bundle.y_h, degree)
    omv, omg, _ = _fields(bundle.omega_h, degree)
    _, pg, _ = _fields(bundle.p_h, degree)
    wv, wg, wh = _fields(bundle.w_h, degree, hessians=True)
    thv, thg, _ = _fields(bundle.theta_h, degree)
    _, qg, _ = _fields(bundle.q_h, degree)
    u = _control_values(bundle.u_h, nq)

    f_vals = np.asarray(c.f(x), dtype=float)
    yd = np.asarray(c.y_d(x), dtype=float)
    omd = np.asarray(c.omega_d(x), dtype=float)

    r_y = _state_momentum(s, u, yv, yg, omg, pg, f_vals)
    eta_ry = _cell_sq(hcol * r_y, w) + _cell_sq(omv - _curl_vec(yg), w)
    r_w = _adjoint_momentum(c, s, wv, wg, wh, thv, thg, qg, yv - yd, hnu)
    r_th = _adjoint_constitutive(c, s, wv, wg, thv, omv - omd)
    eta_rw = _cell_sq(hcol * r_w, w) + _cell_sq(r_th, w)
    eta_u = _cell_sq(hcol * (wv + c.gamma * u), w)

    # edge residuals: h_E (|[[p]]|^2 + |[[omega]]|^2) on interior edges
    eq = edge_quad(mesh, 2 * kv + 2)
    he = mesh.edge_lengths
    ey = _scalar_jump_sq(bundle.p_h, eq, he) + _scalar_jump_sq(bundle.omega_h, eq, he)
    ew = _scalar_jump_sq(bundle.q_h, eq, he) + _scalar_jump_sq(bundle.theta_h, eq, he)
    zero_e = np.zeros(len(mesh.edges))
    eta_ey = _edge_to_cells(mesh, ey, zero_e)
    eta_ew = _edge_to_cells(mesh, ew, zero_e)

    eta_jy, eta_jw = dg_trace_indicators(bundle, stab)

    # oscillation: exact minus cellwise P_k projected data
    def proj(v):
        return _cellwise_projection(v, w, kp, x, mesh)

    nu_h, gnu_h = proj(s["nu"]), proj(s["gnu"])
    beta_h, sig_h = proj(s["beta"]), proj(s["sigma"])
    react = s["sigma"] - s["div_beta"]
    eps_y = yg + np.swapaxes(yg, -1, -2)
    eps_w = wg + np.swapaxes(wg, -1, -2)
    dgnu = s["gnu"] - gnu_h
    dnu = (s["nu"] - nu_h)[..., None]
    th_y = h2[:, 0] * (
        _cell_sq(f_vals - proj(f_vals), w)
        + _cell_sq(np.einsum("kqij,kqj->kqi", eps_y, dgnu), w)
        + _cell_sq(dnu * _curl_scalar(omg), w)
        + _cell_sq(np.einsum("kqij,kqj->kqi", yg, s["beta"] - beta_h), w)
        + _cell_sq((s["sigma"] - sig_h)[..., None] * yv, w)
    )
    th_w = h2[:, 0] * (
        _cell_sq(yd - proj(yd), w)
        + _cell_sq(np.einsum("kqij,kqj->kqi", eps_w, dgnu), w)
        + _cell_sq(dnu * _curl_scalar(thg), w)
        + _cell_sq(np.einsum("kqij,kqj->kqi", wg, s["beta"] - beta_h), w)
        + _cell_sq((react - proj(react))[..., None] * wv, w)
        + _cell_sq(omd - proj(omd), w)
    )
    return LocalIndicators(eta_ry + eta_ey + eta_jy, eta_rw + eta_ew + eta_jw, eta_u, th_y, th_w, "dg")


def indicators(scheme: str, c: Coefficients, bundle, stab=None) -> LocalIndicators:
    if scheme == "cg":
        return cg_indicators(c, bundle)
    return dg_indicators(c, bundle, stab)


# ---------------------------------------------------------------- true errors


@dataclass(frozen=True)
class TrueErrors:
    err_u: float
    err_y_triple: float
    err_w_triple: float
    err_omega: float
    err_theta: float
    err_p: float
    err_q: float

    @property
    def total(self) -> float:
        return math.sqrt(math.fsum(e * e for e in (self.err_u, self.err_y_triple, self.err_w_triple,
                                                   self.err_omega, self.err_theta, self.err_p, self.err_q)))


def _vector_error_sq(fn: FeFunction, exact_v, exact_g, x, w, degree):
    val, grad, _ = _fields(fn, degree)
    ev = val - exact_v
    eg = grad - exact_g
    return math.fsum(_cell_sq(ev, w)) + math.fsum(_cell_sq(_curl_vec(eg), w)) + math.fsum(_cell_sq(_div_vec(eg), w))


def _scalar_error_sq(fn: FeFunction, exact, w, degree):
    val, _, _ = _fields(fn, degree)
    return math.fsum(_cell_sq(val - exact, w))


def true_errors(exact, bundle, stab: EdgeStabilization | None = None, degree: int = ERROR_DEGREE) -> TrueErrors:
    """Errors against an exact solution; DG norms when stab is given.

    The exact velocities and pressures are continuous, and the exact
    velocities vanish on the boundary, so the jump parts of the DG norms
    of the error are those of the discrete fields.  Pressure jumps are
    taken on interior edges only.
    """
    mesh = bundle.y_h.space.mesh
    cq = cell_quad(mesh, degree)
    x, w = cq.x, cq.w
    ey2 = _vector_error_sq(bundle.y_h, exact.y(x), exact.grad_y(x), x, w, degree)
    ew2 = _vector_error_sq(bundle.w_h, exact.w(x), exact.grad_w(x), x, w, degree)
    eom2 = _scalar_error_sq(bundle.omega_h, exact.omega(x), w, degree)
    eth2 = _scalar_error_sq(bundle.theta_h, exact.theta(x), w, degree)
    ep2 = _scalar_error_sq(bundle.p_h, exact.p(x), w, degree)
    eq2 = _scalar_error_sq(bundle.q_h, exact.q(x), w, degree)
    u_vals = _control_values(bundle.u_h, x.shape[1])
    eu2 = math.fsum(_cell_sq(u_vals - exact.u(x), w))
    if stab is not None:
        jv, jp = jump_seminorms(bundle.y_h, bundle.p_h, stab)
        ey2 += math.fsum(jv)
        ep2 += math.fsum(jp)
        jv, jp = jump_seminorms(bundle.w_h, bundle.q_h, stab)
        ew2 += math.fsum(jv)
        eq2 += math.fsum(jp)
    return TrueErrors(*(math.sqrt(v) for v in (eu2, ey2, ew2, eom2, eth2, ep2, eq2)))
