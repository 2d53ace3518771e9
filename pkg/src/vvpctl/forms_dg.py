"""Discontinuous Galerkin forms with jump penalties and upwind convection.

Jumps on an interior edge with unit normal n pointing out of the first
adjacent cell (side 0) into the second (side 1):

    [[v]]_T = v0 x n - v1 x n,   [[v]]_N = v0.n - v1.n,   {{t}} = (t0 + t1) / 2

with the 2D cross product v x n = v1 n2 - v2 n1.  On boundary edges the
jump is the own trace and the average the own value.

The pressure-jump penalty D11 [[p]].[[phi]] enters the continuity rows with
a negative sign, so that testing with (y, p) adds +D11 |[[p]]|^2 to the
energy.  It acts on interior edges only: the exact pressure does not vanish
on the boundary, and a boundary penalty there would be inconsistent.

The broken term -(2 eps(y) grad nu, v) is consistent for the state but its
transpose is not consistent for the co-state.  Interior edges therefore
carry [[y]].G({v}) n with G_ij(v) = v_i d_j nu + v_j d_i nu, which vanishes
for a continuous state and cancels the co-state's edge defect.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
import scipy.sparse as sp

from .fem import edge_rule, make_space, tabulate, geometry
from .forms_cg import (
    BlockSystem,
    Coefficients,
    Spaces,
    Triplets,
    _scatter_volume,
    adjoint_from_state,
    adjoint_rhs,
    cell_quad,
    coefficient_samples,
    space_tab,
    state_rhs,
    volume_blocks,
)
from .mesh import Mesh


@dataclass(frozen=True)
class EdgeStabilization:
    A11: np.ndarray
    C11: np.ndarray
    D11: np.ndarray


def stab_params(m: Mesh, a11: float, c11: float, d11: float) -> EdgeStabilization:
    if min(a11, c11, d11) <= 0:
        raise ValueError("stabilization constants must be positive")
    h = m.cell_diameters
    ec = m.edge_cells
    hp = h[ec[:, 0]]
    hm = np.where(ec[:, 1] >= 0, h[np.maximum(ec[:, 1], 0)], hp)
    inv = np.maximum(1.0 / hp, 1.0 / hm)
    big = np.maximum(hp, hm)
    return EdgeStabilization(a11 * inv, c11 * inv, d11 * big)


def default_stab_constants(c: Coefficients):
    """(a11, c11, d11) = (10 nu1, 10 nu1, 1 / nu1).

    A pressure penalty scaled by 1/nu0 locks P0 pressures to a constant
    when nu0 is small, so the upper viscosity bound sets d11.
    """
    return 10.0 * c.nu1, 10.0 * c.nu1, 1.0 / c.nu1


def dg_spaces(mesh: Mesh, k: int = 0) -> Spaces:
    return Spaces(
        make_space("dg_vector", mesh, k + 1),
        make_space("dg_scalar", mesh, k),
        make_space("dg_scalar", mesh, k),
        make_space("piecewise_const_vector", mesh, 0),
    )


@dataclass(eq=False)
class EdgeQuad:
    """Quadrature data on every edge of a mesh."""

    mesh: Mesh
    degree: int

    @cached_property
    def rule(self):
        return edge_rule(self.degree)

    @cached_property
    def x(self):
        m = self.mesh
        a = m.vertices[m.edges[:, 0]]
        b = m.vertices[m.edges[:, 1]]
        s = self.rule.points
        return a[:, None, :] + s[None, :, None] * (b - a)[:, None, :]

    @cached_property
    def w(self):
        return self.mesh.edge_lengths[:, None] * self.rule.weights[None, :]

    @cached_property
    def normal(self):
        """Unit normal pointing out of edge_cells[:, 0]."""
        m = self.mesh
        a = m.vertices[m.edges[:, 0]]
        b = m.vertices[m.edges[:, 1]]
        t = (b - a) / m.edge_lengths[:, None]
        n = np.stack([t[:, 1], -t[:, 0]], -1)
        k0 = m.edge_cells[:, 0]
        opp = m.vertices[m.cells[k0, m.edge_local[:, 0]]]
        flip = ((opp - a) * n).sum(1) > 0
        n[flip] *= -1.0
        return n

    @cached_property
    def interior(self):
        return np.flatnonzero(self.mesh.edge_cells[:, 1] >= 0)

    @cached_property
    def boundary(self):
        return np.flatnonzero(self.mesh.edge_cells[:, 1] < 0)

    def side_tab(self, space, edges, side):
        cells = self.mesh.edge_cells[edges, side]
        xi = geometry(self.mesh).to_reference(self.x[edges], cells)
        return tabulate(space, xi, cells=cells), cells


@lru_cache(maxsize=8)
def edge_quad(mesh: Mesh, degree: int) -> EdgeQuad:
    return EdgeQuad(mesh, degree)


def _cross_n(v, n):
    """v x n for v (..., 2) and n broadcastable."""
    return v[..., 0] * n[..., 1] - v[..., 1] * n[..., 0]


def _edge_traces(spaces: Spaces, eq: EdgeQuad, edges, interior: bool):
    """Combined trace arrays of both sides (or the single boundary side)."""
    n = eq.normal[edges][:, None, None, :]
    out = {}
    sides = (0, 1) if interior else (0,)
    vel, vort, pres, dv, dw, dq = [], [], [], [], [], []
    for s in sides:
        tv, cells = eq.side_tab(spaces.velocity, edges, s)
        tw, _ = eq.side_tab(spaces.vorticity, edges, s)
        tq, _ = eq.side_tab(spaces.pressure, edges, s)
        vel.append(tv.val)
        vort.append(tw.val)
        pres.append(tq.val)
        dv.append(spaces.velocity.dof_map[cells])
        dw.append(spaces.vorticity.dof_map[cells])
        dq.append(spaces.pressure.dof_map[cells])
    sgn = (1.0, -1.0)
    out["jt"] = np.concatenate([sgn[i] * _cross_n(v, n) for i, v in enumerate(vel)], axis=2)
    out["jn"] = np.concatenate([sgn[i] * (v * n).sum(-1) for i, v in enumerate(vel)], axis=2)
    scale = 0.5 if interior else 1.0
    out["avg_w"] = scale * np.concatenate(vort, axis=2)
    out["avg_p"] = scale * np.concatenate(pres, axis=2)
    out["jump_p"] = np.concatenate([sgn[i] * p for i, p in enumerate(pres)], axis=2)
    out["vel"] = vel
    out["dv"] = np.concatenate(dv, axis=1)
    out["dw"] = np.concatenate(dw, axis=1)
    out["dq"] = np.concatenate(dq, axis=1)
    return out


def _scatter_edges(tr: Triplets, c: Coefficients, spaces: Spaces, stab: EdgeStabilization,
                   eq: EdgeQuad, edges, interior: bool, adjoint_consistent: bool = True):
    if len(edges) == 0:
        return
    o = spaces.offsets
    t = _edge_traces(spaces, eq, edges, interior)
    x = eq.x[edges]
    w = eq.w[edges]
    nu = np.asarray(c.nu(x))
    wnu = w * nu
    C11 = stab.C11[edges][:, None]
    A11 = stab.A11[edges][:, None]
    jt, jn = t["jt"], t["jn"]

    kvw = np.einsum("eq,eqa,eqb->eab", wnu, jt, t["avg_w"])
    kwv = -np.einsum("eq,eqa,eqb->eab", wnu, t["avg_w"], jt)
    kvv = np.einsum("eq,eqa,eqb->eab", C11 * wnu, jt, jt) + np.einsum("eq,eqa,eqb->eab", A11 * w, jn, jn)

    # upwind transport: b (y_up).(v0 - v1) with b = beta.n0
    bn = (np.asarray(c.beta(x)) * eq.normal[edges][:, None, :]).sum(-1)
    vel = t["vel"]
    if interior:
        up0 = (bn >= 0)[:, :, None, None]
        yup = np.concatenate([np.where(up0, vel[0], 0.0), np.where(~up0, vel[1], 0.0)], axis=2)
        vdiff = np.concatenate([vel[0], -vel[1]], axis=2)
        kvv += np.einsum("eq,eqai,eqbi->eab", w * bn, vdiff, yup)
    else:
        out = w * np.maximum(bn, 0.0)
        kvv += np.einsum("eq,eqai,eqbi->eab", out, vel[0], vel[0])

    if interior and adjoint_consistent:
        # [[y]].G({v}) n with G_ij(v) = v_i d_j nu + v_j d_i nu; zero for the
        # exact state, and its transpose restores consistency of the co-state
        g = np.asarray(c.grad_nu(x))
        nrm = eq.normal[edges][:, None, :]
        jy = np.concatenate([vel[0], -vel[1]], axis=2)
        vbar = 0.5 * np.concatenate([vel[0], vel[1]], axis=2)
        gn = (g * nrm).sum(-1)
        kvv += np.einsum("eq,eqai,eqbi->eab", w * gn, vbar, jy)
        kvv += np.einsum("eq,eqa,eqb->eab", w, np.einsum("eqai,eqi->eqa", vbar, nrm),
                         np.einsum("eqbi,eqi->eqb", jy, g))

    kvp = np.einsum("eq,eqa,eqb->eab", w, jn, t["avg_p"])
    tr.add(t["dv"], t["dw"], kvw, o[0], o[1])
    tr.add(t["dw"], t["dv"], kwv, o[1], o[0])
    tr.add(t["dv"], t["dv"], kvv, o[0], o[0])
    tr.add(t["dv"], t["dq"], kvp, o[0], o[2])
    tr.add(t["dq"], t["dv"], np.swapaxes(kvp, 1, 2), o[2], o[0])
    if interior:
        D11 = stab.D11[edges][:, None]
        kpp = -np.einsum("eq,eqa,eqb->eab", D11 * w, t["jump_p"], t["jump_p"])
        tr.add(t["dq"], t["dq"], kpp, o[2], o[2])


def convection_volume(c: Coefficients, spaces: Spaces, degree: int):
    """Element matrices of (sigma - div beta) y.v - sum_i y_i beta.grad v_i."""
    cq = cell_quad(spaces.mesh, degree)
    s = coefficient_samples(c, cq.x)
    tv = space_tab(spaces.velocity, degree)
    react = cq.w * (s["sigma"] - s["div_beta"])
    k = np.einsum("kq,kqai,kqbi->kab", react, tv.val, tv.val)
    bgrad = np.einsum("kqaij,kqj->kqai", tv.grad, s["beta"])
    k -= np.einsum("kq,kqbi,kqai->kab", cq.w, tv.val, bgrad)
    return k


def dg_degrees(spaces: Spaces):
    kv = spaces.velocity.degree
    return 2 * kv + 3, 2 * kv + 2


def state_matrix_dg(c: Coefficients, spaces: Spaces, stab: EdgeStabilization, degree=None,
                    adjoint_consistent: bool = True) -> sp.csr_matrix:
    vol_deg, edge_deg = dg_degrees(spaces)
    degree = degree or vol_deg
    tr = Triplets(spaces.size)
    blocks = volume_blocks(c, spaces, degree, transport=False)
    blocks["vv"] = blocks["vv"] + convection_volume(c, spaces, degree)
    _scatter_volume(tr, blocks, spaces)
    eq = edge_quad(spaces.mesh, edge_deg)
    _scatter_edges(tr, c, spaces, stab, eq, eq.interior, True, adjoint_consistent)
    _scatter_edges(tr, c, spaces, stab, eq, eq.boundary, False)
    return tr.matrix()


def assemble_state_dg(c: Coefficients, spaces: Spaces, stab: EdgeStabilization, u_h, degree=None) -> BlockSystem:
    degree = degree or dg_degrees(spaces)[0]
    a = state_matrix_dg(c, spaces, stab, degree)
    return BlockSystem(a, state_rhs(c, spaces, u_h, degree), spaces.offsets, spaces)


def assemble_adjoint_dg(c: Coefficients, spaces: Spaces, stab: EdgeStabilization, y_h, omega_h,
                        degree=None) -> BlockSystem:
    degree = degree or dg_degrees(spaces)[0]
    a = adjoint_from_state(state_matrix_dg(c, spaces, stab, degree), spaces)
    return BlockSystem(a, adjoint_rhs(c, spaces, y_h, omega_h, degree), spaces.offsets, spaces)


def jump_seminorms(v, p, stab: EdgeStabilization, degree=None):
    """Squared |v|_j (all edges) and |p|_j (interior edges)."""
    m = v.space.mesh
    degree = degree or 2 * v.space.degree + 2
    eq = edge_quad(m, degree)
    n = eq.normal
    total_v = np.zeros(len(m.edges))
    for edges, interior in ((eq.interior, True), (eq.boundary, False)):
        if len(edges) == 0:
            continue
        jv = _trace_jump(v, eq, edges, interior)
        nn = n[edges][:, None, :]
        jt = _cross_n(jv, nn)
        jn = (jv * nn).sum(-1)
        total_v[edges] = (eq.w[edges] * (stab.C11[edges][:, None] * jt ** 2 + stab.A11[edges][:, None] * jn ** 2)).sum(1)
    total_p = np.zeros(len(m.edges))
    if p is not None and len(eq.interior):
        jp = _trace_jump(p, eq, eq.interior, True)
        total_p[eq.interior] = (eq.w[eq.interior] * stab.D11[eq.interior][:, None] * jp ** 2).sum(1)
    return total_v, total_p


def _trace_jump(fn, eq: EdgeQuad, edges, interior: bool):
    """Own trace minus neighbour trace (interior) or own trace (boundary)."""
    vals = []
    for s in ((0, 1) if interior else (0,)):
        t, cells = eq.side_tab(fn.space, edges, s)
        loc = fn.coefficients[fn.space.dof_map[cells]]
        vals.append(np.einsum("eqa...,ea->eq...", t.val, loc))
    return vals[0] - vals[1] if interior else vals[0]


def trace_values(fn, eq: EdgeQuad, edges, side):
    t, cells = eq.side_tab(fn.space, edges, side)
    loc = fn.coefficients[fn.space.dof_map[cells]]
    return np.einsum("eqa...,ea->eq...", t.val, loc)


def jump_gram(spaces: Spaces, stab: EdgeStabilization) -> sp.csr_matrix:
    """Velocity Gram matrix of |v|_j^2 over all edges."""
    kv = spaces.velocity.degree
    eq = edge_quad(spaces.mesh, 2 * kv + 2)
    tr = Triplets(spaces.velocity.ndofs)
    for edges, interior in ((eq.interior, True), (eq.boundary, False)):
        if len(edges) == 0:
            continue
        t = _edge_traces(spaces, eq, edges, interior)
        w = eq.w[edges]
        k = (np.einsum("eq,eqa,eqb->eab", stab.C11[edges][:, None] * w, t["jt"], t["jt"])
             + np.einsum("eq,eqa,eqb->eab", stab.A11[edges][:, None] * w, t["jn"], t["jn"]))
        tr.add(t["dv"], t["dv"], k)
    return tr.matrix()


def dg_norm_gram(spaces: Spaces, stab: EdgeStabilization, degree=None) -> sp.csr_matrix:
    """Gram matrix of the DG norm |||v|||_{1,h}^2 + |theta|_0^2."""
    from .forms_cg import norm_gram

    g = norm_gram(spaces, degree or dg_degrees(spaces)[0]).tolil()
    nv = spaces.velocity.ndofs
    g[:nv, :nv] = g[:nv, :nv] + jump_gram(spaces, stab)
    return g.tocsr()


def dg_norms(v, p, stab: EdgeStabilization, degree: int = 5):
    """(|||v|||_{1,h}, |p|_h) with the jump seminorms added to the broken norms."""
    from .fem import l2_norm, triple_norm

    jv, jp = jump_seminorms(v, p, stab)
    nv = math.sqrt(triple_norm(v, degree) ** 2 + math.fsum(jv.tolist()))
    np_ = math.sqrt(l2_norm(p, degree) ** 2 + math.fsum(jp.tolist())) if p is not None else 0.0
    return nv, np_
