"""Conforming augmented velocity-vorticity-pressure forms.

Unknowns are stacked as (velocity, vorticity, pressure, mean multiplier).
The state operator is

    A((y,w),(v,t)) = -(2 eps(y) grad nu, v) + (nu w, curl v) + (w, grad nu x v)
                     + (nu w, t) - (nu t, curl y) + (sigma y + (beta.grad) y, v)
                     + rho1 (curl y - w, curl v) + rho2 (div y, div v)
    B(v, p) = -(p, div v)

The co-state system is the exact discrete transpose of the state system,
written in the variables (w, theta, q) = (w~, -theta~, -q~) so that the
pressure enters the momentum rows as -B(z, q).  The transpose is what makes
the computed co-state the gradient of the discrete reduced cost.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .fem import FeFunction, Space, cell_quad, evaluate, make_space, space_tab
from .mesh import Mesh

Field = Callable[[np.ndarray], np.ndarray]


def _zero_scalar(x):
    return np.zeros(x.shape[:-1])


def _zero_vector(x):
    return np.zeros(x.shape)


def _zero_hessian(x):
    return np.zeros(x.shape[:-1] + (2, 2))


@dataclass(frozen=True)
class Coefficients:
    """Problem data as callables of points x with shape (..., 2)."""

    nu: Field
    grad_nu: Field
    beta: Field
    div_beta: Field
    sigma: Field
    f: Field
    y_d: Field
    omega_d: Field
    nu0: float
    nu1: float
    sigma_min: float
    sigma_max: float
    rho1: float = 0.0
    rho2: float = 0.0
    gamma: float = 1.0
    a_bound: tuple = (-np.inf, -np.inf)
    b_bound: tuple = (np.inf, np.inf)
    hess_nu: Field = field(default=_zero_hessian)
    grad_beta: Field | None = None


def constant_coefficients(nu=1.0, sigma=1.0, beta=(0.0, 0.0), **kw) -> Coefficients:
    """Constant data; convenient for tests and sanity runs."""
    b = np.asarray(beta, dtype=float)
    base = dict(
        nu=lambda x: np.full(x.shape[:-1], nu),
        grad_nu=_zero_vector,
        beta=lambda x: np.broadcast_to(b, x.shape).copy(),
        div_beta=_zero_scalar,
        sigma=lambda x: np.full(x.shape[:-1], sigma),
        f=_zero_vector,
        y_d=_zero_vector,
        omega_d=_zero_scalar,
        nu0=nu,
        nu1=nu,
        sigma_min=sigma,
        sigma_max=sigma,
    )
    base.update(kw)
    return Coefficients(**base)


def default_quadrature_degree(k: int = 1) -> int:
    # 2k+3 plus two for the variable-coefficient terms
    return 2 * k + 5


# ---------------------------------------------------------------- assumptions


def _sample_points(domain_id: str, n: int = 201) -> np.ndarray:
    boxes = {
        "unit_square": (0, 1, 0, 1),
        "unit_triangle": (0, 1, 0, 1),
        "l_shape": (-1, 1, -1, 1),
        "t_shape": (-1.5, 1.5, -2, 1),
    }
    x0, x1, y0, y1 = boxes.get(domain_id, (0, 1, 0, 1))
    X, Y = np.meshgrid(np.linspace(x0, x1, n), np.linspace(y0, y1, n))
    pts = np.stack([X.ravel(), Y.ravel()], -1)
    if domain_id == "unit_triangle":
        pts = pts[pts.sum(1) <= 1.0]
    elif domain_id == "l_shape":
        pts = pts[~((pts[:, 0] > 0) & (pts[:, 1] > 0))]
    elif domain_id == "t_shape":
        pts = pts[(pts[:, 1] >= 0) | (np.abs(pts[:, 0]) <= 0.5)]
    return pts


def check_assumptions(c: Coefficients, domain_id: str = "unit_square", div_beta_const: float = 1.0) -> dict:
    """Report the sufficient well-posedness conditions and their margins.

    div_beta_const is the unknown embedding constant multiplying
    ||div beta||_0 in the smallness condition; 1 is used by default.
    """
    from .mesh import generate

    pts = _sample_points(domain_id)
    gnu = np.asarray(c.grad_nu(pts))
    gnu_inf = float(np.sqrt((gnu ** 2).sum(-1)).max())
    m = generate(domain_id, 4)
    cq = cell_quad(m, 6)
    div_l2 = math.sqrt(math.fsum((np.asarray(c.div_beta(cq.x)) ** 2 * cq.w).ravel()))
    reaction_gap = c.sigma_min - 9.0 * gnu_inf ** 2 / c.nu0
    cond_reaction = reaction_gap >= 0.0
    small = div_beta_const * div_l2
    cond_div = small < min(reaction_gap, c.nu0 / 12.0)
    div_free = div_l2 <= 1e-12
    cond_divfree = c.sigma_min * c.nu0 > 9.0 * gnu_inf ** 2
    ok = (cond_reaction and cond_div) or (div_free and cond_divfree)
    report = {
        "ok": bool(ok),
        "grad_nu_inf": gnu_inf,
        "div_beta_l2": div_l2,
        "reaction_margin": reaction_gap,
        "divergence_margin": min(reaction_gap, c.nu0 / 12.0) - small,
        "divergence_free": bool(div_free),
        "divergence_free_margin": c.sigma_min * c.nu0 - 9.0 * gnu_inf ** 2,
    }
    if not ok:
        warnings.warn("sufficient coercivity conditions are not met; solving anyway", stacklevel=2)
    return report


# ---------------------------------------------------------------- systems


@dataclass(frozen=True)
class Spaces:
    velocity: Space
    vorticity: Space
    pressure: Space
    control: Space

    @property
    def mesh(self) -> Mesh:
        return self.velocity.mesh

    @property
    def offsets(self):
        nv, nw, nq = self.velocity.ndofs, self.vorticity.ndofs, self.pressure.ndofs
        return (0, nv, nv + nw, nv + nw + nq, nv + nw + nq + 1)

    @property
    def size(self) -> int:
        return self.offsets[-1]

    def dofs_total(self) -> int:
        """State, co-state, control and both multipliers."""
        return 2 * self.size + self.control.ndofs


def cg_spaces(mesh: Mesh, k: int = 1, discontinuous_vorticity: bool = False) -> Spaces:
    vort = make_space("dg_scalar", mesh, k) if discontinuous_vorticity else make_space("vorticity_cont", mesh, k)
    return Spaces(
        make_space("mini_velocity", mesh, k),
        vort,
        make_space("lagrange_scalar", mesh, k),
        make_space("piecewise_const_vector", mesh, 0),
    )


@dataclass(eq=False)
class BlockSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray
    offsets: tuple
    spaces: Spaces

    def block(self, i: int, j: int):
        o = self.offsets
        return self.matrix[o[i]:o[i + 1], o[j]:o[j + 1]]

    def dump_matrix(self) -> str:
        coo = self.matrix.tocoo()
        return "".join(f"{r} {c} {v!r}\n" for r, c, v in zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist()))


class Triplets:
    """Accumulates element blocks as coordinate triplets."""

    def __init__(self, n: int):
        self.n = n
        self.rows, self.cols, self.vals = [], [], []

    def add(self, row_dofs, col_dofs, ke, row_off=0, col_off=0):
        r = np.broadcast_to(row_dofs[:, :, None] + row_off, ke.shape)
        c = np.broadcast_to(col_dofs[:, None, :] + col_off, ke.shape)
        self.rows.append(r.ravel())
        self.cols.append(c.ravel())
        self.vals.append(ke.ravel())

    def add_entries(self, rows, cols, vals):
        self.rows.append(np.asarray(rows).ravel())
        self.cols.append(np.asarray(cols).ravel())
        self.vals.append(np.asarray(vals, dtype=float).ravel())

    def matrix(self) -> sp.csr_matrix:
        if not self.rows:
            return sp.csr_matrix((self.n, self.n))
        r = np.concatenate(self.rows)
        c = np.concatenate(self.cols)
        v = np.concatenate(self.vals)
        a = sp.coo_matrix((v, (r, c)), shape=(self.n, self.n)).tocsr()
        a.sum_duplicates()
        a.sort_indices()
        return a


def _cross(g, v):
    """2D scalar cross product g x v = g1 v2 - g2 v1."""
    return g[..., 0] * v[..., 1] - g[..., 1] * v[..., 0]


def coefficient_samples(c: Coefficients, x):
    return dict(
        nu=np.asarray(c.nu(x)),
        gnu=np.asarray(c.grad_nu(x)),
        beta=np.asarray(c.beta(x)),
        div_beta=np.asarray(c.div_beta(x)),
        sigma=np.asarray(c.sigma(x)),
    )


def volume_blocks(c: Coefficients, spaces: Spaces, degree: int, transport: bool = True):
    """Element matrices of the broken volume terms.

    Returns a dict of (ncells, ntest, ntrial) arrays keyed by block name.
    The DG scheme reuses everything except the transport and reaction,
    which it assembles through its own convection form.
    """
    mesh = spaces.mesh
    cq = cell_quad(mesh, degree)
    w = cq.w
    s = coefficient_samples(c, cq.x)
    tv = space_tab(spaces.velocity, degree)
    tw = space_tab(spaces.vorticity, degree)
    tq = space_tab(spaces.pressure, degree)
    val, sym, curl, div, grad = tv.val, tv.sym, tv.curl, tv.div, tv.grad
    nu, gnu = s["nu"], s["gnu"]

    eps_gnu = np.einsum("kqbij,kqj->kqbi", sym, gnu)
    kvv = -2.0 * np.einsum("kq,kqbi,kqai->kab", w, eps_gnu, val)
    kvv += c.rho1 * np.einsum("kq,kqa,kqb->kab", w, curl, curl)
    kvv += c.rho2 * np.einsum("kq,kqa,kqb->kab", w, div, div)
    if transport:
        adv = np.einsum("kqbij,kqj->kqbi", grad, s["beta"]) + s["sigma"][:, :, None, None] * val
        kvv += np.einsum("kq,kqbi,kqai->kab", w, adv, val)

    theta = tw.val
    gcross = _cross(gnu[:, :, None, :], val)  # (k, q, a)
    kvw = np.einsum("kq,kqa,kqb->kab", w, (nu[:, :, None] - c.rho1) * curl + gcross, theta)
    kwv = -np.einsum("kq,kqa,kqb->kab", w * nu, theta, curl)
    kww = np.einsum("kq,kqa,kqb->kab", w * nu, theta, theta)

    phi = tq.val
    kvp = -np.einsum("kq,kqa,kqb->kab", w, div, phi)
    mean_p = np.einsum("kq,kqb->kb", w, phi)
    return dict(vv=kvv, vw=kvw, wv=kwv, ww=kww, vp=kvp, mean_p=mean_p)


def _scatter_volume(tr: Triplets, blocks, spaces: Spaces, pressure_rows: bool = True):
    o = spaces.offsets
    dv = spaces.velocity.dof_map
    dw = spaces.vorticity.dof_map
    dq = spaces.pressure.dof_map
    tr.add(dv, dv, blocks["vv"], o[0], o[0])
    tr.add(dv, dw, blocks["vw"], o[0], o[1])
    tr.add(dw, dv, blocks["wv"], o[1], o[0])
    tr.add(dw, dw, blocks["ww"], o[1], o[1])
    tr.add(dv, dq, blocks["vp"], o[0], o[2])
    tr.add(dq, dv, np.swapaxes(blocks["vp"], 1, 2), o[2], o[0])
    mult = o[3]
    tr.add_entries(dq.ravel() + o[2], np.full(dq.size, mult), blocks["mean_p"].ravel())
    tr.add_entries(np.full(dq.size, mult), dq.ravel() + o[2], blocks["mean_p"].ravel())


def _apply_dirichlet(a: sp.csr_matrix, rhs: np.ndarray, dofs: np.ndarray):
    """Zero rows and columns of constrained DOFs and put 1 on the diagonal."""
    if dofs.size == 0:
        return a, rhs
    keep = np.ones(a.shape[0])
    keep[dofs] = 0.0
    d = sp.diags(keep)
    fix = np.zeros(a.shape[0])
    fix[dofs] = 1.0
    a = (d @ a @ d + sp.diags(fix)).tocsr()
    a.sum_duplicates()
    a.eliminate_zeros()
    a.sort_indices()
    rhs = rhs.copy()
    rhs[dofs] = 0.0
    return a, rhs


def velocity_load(spaces: Spaces, values, degree: int) -> np.ndarray:
    """Vector of (g, v_a) for g sampled at the quadrature points."""
    cq = cell_quad(spaces.mesh, degree)
    tv = space_tab(spaces.velocity, degree)
    loc = np.einsum("kq,kqi,kqai->ka", cq.w, values, tv.val)
    return np.bincount(spaces.velocity.dof_map.ravel(), loc.ravel(), minlength=spaces.velocity.ndofs)


def scalar_load(space: Space, values, degree: int) -> np.ndarray:
    cq = cell_quad(space.mesh, degree)
    t = space_tab(space, degree)
    loc = np.einsum("kq,kq,kqa->ka", cq.w, values, t.val)
    return np.bincount(space.dof_map.ravel(), loc.ravel(), minlength=space.ndofs)


def control_values(u_h: FeFunction, nq: int) -> np.ndarray:
    """Piecewise-constant control sampled at nq points per cell."""
    u = u_h.coefficients.reshape(-1, 2)
    return np.repeat(u[:, None, :], nq, axis=1)


def state_rhs(c: Coefficients, spaces: Spaces, u_h: FeFunction, degree: int) -> np.ndarray:
    cq = cell_quad(spaces.mesh, degree)
    src = np.asarray(c.f(cq.x)) + control_values(u_h, cq.x.shape[1])
    rhs = np.zeros(spaces.size)
    rhs[: spaces.offsets[1]] = velocity_load(spaces, src, degree)
    return rhs


def adjoint_rhs(c: Coefficients, spaces: Spaces, y_h: FeFunction, omega_h: FeFunction, degree: int) -> np.ndarray:
    cq = cell_quad(spaces.mesh, degree)
    yv, _ = evaluate(y_h, space_tab(spaces.velocity, degree))
    wv, _ = evaluate(omega_h, space_tab(spaces.vorticity, degree))
    o = spaces.offsets
    rhs = np.zeros(spaces.size)
    rhs[o[0]:o[1]] = velocity_load(spaces, yv - np.asarray(c.y_d(cq.x)), degree)
    rhs[o[1]:o[2]] = scalar_load(spaces.vorticity, wv - np.asarray(c.omega_d(cq.x)), degree)
    return rhs


def state_matrix_cg(c: Coefficients, spaces: Spaces, degree: int | None = None) -> sp.csr_matrix:
    degree = degree or default_quadrature_degree(spaces.velocity.degree)
    tr = Triplets(spaces.size)
    _scatter_volume(tr, volume_blocks(c, spaces, degree), spaces)
    a = tr.matrix()
    a, _ = _apply_dirichlet(a, np.zeros(spaces.size), spaces.velocity.boundary_dofs)
    return a


def adjoint_from_state(a: sp.csr_matrix, spaces: Spaces) -> sp.csr_matrix:
    """Transpose with the co-state vorticity and pressure columns negated."""
    o = spaces.offsets
    sign = np.ones(spaces.size)
    sign[o[1]:o[3]] = -1.0
    at = (a.T @ sp.diags(sign)).tocsr()
    at.sort_indices()
    return at


def assemble_state_cg(c: Coefficients, spaces: Spaces, u_h: FeFunction, degree: int | None = None) -> BlockSystem:
    degree = degree or default_quadrature_degree(spaces.velocity.degree)
    if u_h.space.mesh is not spaces.mesh:
        raise ValueError("control lives on a different mesh")
    a = state_matrix_cg(c, spaces, degree)
    rhs = state_rhs(c, spaces, u_h, degree)
    rhs[spaces.velocity.boundary_dofs] = 0.0
    return BlockSystem(a, rhs, spaces.offsets, spaces)


def assemble_adjoint_cg(c: Coefficients, spaces: Spaces, y_h: FeFunction, omega_h: FeFunction,
                        degree: int | None = None) -> BlockSystem:
    degree = degree or default_quadrature_degree(spaces.velocity.degree)
    if y_h.space is not spaces.velocity or omega_h.space is not spaces.vorticity:
        raise ValueError("state fields do not belong to these spaces")
    a = adjoint_from_state(state_matrix_cg(c, spaces, degree), spaces)
    rhs = adjoint_rhs(c, spaces, y_h, omega_h, degree)
    rhs[spaces.velocity.boundary_dofs] = 0.0
    return BlockSystem(a, rhs, spaces.offsets, spaces)


def norm_gram(spaces: Spaces, degree: int | None = None) -> sp.csr_matrix:
    """Gram matrix of |||v|||_1^2 + |theta|_0^2 on the velocity and vorticity DOFs.

    Broken cellwise on discontinuous spaces; jump parts are added separately.
    """
    degree = degree or default_quadrature_degree(spaces.velocity.degree)
    cq = cell_quad(spaces.mesh, degree)
    tv = space_tab(spaces.velocity, degree)
    tw = space_tab(spaces.vorticity, degree)
    kvv = (np.einsum("kq,kqai,kqbi->kab", cq.w, tv.val, tv.val)
           + np.einsum("kq,kqa,kqb->kab", cq.w, tv.curl, tv.curl)
           + np.einsum("kq,kqa,kqb->kab", cq.w, tv.div, tv.div))
    kww = np.einsum("kq,kqa,kqb->kab", cq.w, tw.val, tw.val)
    n = spaces.velocity.ndofs + spaces.vorticity.ndofs
    tr = Triplets(n)
    tr.add(spaces.velocity.dof_map, spaces.velocity.dof_map, kvv)
    nv = spaces.velocity.ndofs
    tr.add(spaces.vorticity.dof_map, spaces.vorticity.dof_map, kww, nv, nv)
    return tr.matrix()
