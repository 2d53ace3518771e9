"""Projected fixed-point solution of the discrete optimality system."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fem import FeFunction, cell_quad, cell_means, evaluate, space_tab
from .forms_cg import (
    Coefficients,
    Spaces,
    adjoint_from_state,
    adjoint_rhs,
    cg_spaces,
    default_quadrature_degree,
    state_matrix_cg,
    state_rhs,
)
from .forms_dg import EdgeStabilization, dg_degrees, dg_spaces, state_matrix_dg, stab_params
from .linsolve import Factorization
from .mesh import Mesh


def project_admissible(v, a, b):
    """Componentwise clamp min(b, max(a, v))."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a >= b):
        raise ValueError("bounds must satisfy a < b")
    return np.minimum(b, np.maximum(a, v))


class Discretization:
    """Spaces, matrices and factorizations of one scheme on one mesh."""

    def __init__(self, scheme: str, c: Coefficients, mesh: Mesh, k: int | None = None,
                 stab: EdgeStabilization | None = None, stab_constants=None):
        if scheme not in ("cg", "dg"):
            raise ValueError(f"unknown scheme {scheme!r}")
        self.scheme = scheme
        self.c = c
        self.mesh = mesh
        if scheme == "cg":
            self.k = 1 if k is None else k
            self.spaces = cg_spaces(mesh, self.k)
            self.degree = default_quadrature_degree(self.k)
            self.stab = None
        else:
            self.k = 0 if k is None else k
            self.spaces = dg_spaces(mesh, self.k)
            self.degree = dg_degrees(self.spaces)[0]
            if stab is None:
                from .forms_dg import default_stab_constants

                a11, c11, d11 = stab_constants or default_stab_constants(c)
                stab = stab_params(mesh, a11, c11, d11)
            self.stab = stab
        self._state_lu = None
        self._adjoint_lu = None
        self._state_matrix = None
        self.last_residuals = []

    @property
    def state_matrix(self):
        if self._state_matrix is None:
            if self.scheme == "cg":
                self._state_matrix = state_matrix_cg(self.c, self.spaces, self.degree)
            else:
                self._state_matrix = state_matrix_dg(self.c, self.spaces, self.stab, self.degree)
        return self._state_matrix

    @property
    def adjoint_matrix(self):
        return adjoint_from_state(self.state_matrix, self.spaces)

    def _dirichlet(self, rhs):
        if self.scheme == "cg":
            rhs[self.spaces.velocity.boundary_dofs] = 0.0
        return rhs

    def state_rhs(self, u_h):
        return self._dirichlet(state_rhs(self.c, self.spaces, u_h, self.degree))

    def adjoint_rhs(self, y_h, omega_h):
        return self._dirichlet(adjoint_rhs(self.c, self.spaces, y_h, omega_h, self.degree))

    def _split(self, x):
        o = self.spaces.offsets
        s = self.spaces
        return (FeFunction(s.velocity, x[o[0]:o[1]]), FeFunction(s.vorticity, x[o[1]:o[2]]),
                FeFunction(s.pressure, x[o[2]:o[3]]), float(x[o[3]]))

    def solve_state(self, u_h):
        if self._state_lu is None:
            self._state_lu = Factorization(self.state_matrix)
        x, res = self._state_lu.solve(self.state_rhs(u_h))
        self.last_residuals.append(res)
        return self._split(x)

    def solve_adjoint(self, y_h, omega_h):
        if self._state_lu is None:
            self._state_lu = Factorization(self.state_matrix)
        # the co-state matrix is A^T diag(s); solve A^T z = rhs and rescale
        x, res = self._state_lu.solve(self.adjoint_rhs(y_h, omega_h), trans="T")
        o = self.spaces.offsets
        x = x.copy()
        x[o[1]:o[3]] *= -1.0
        self.last_residuals.append(res)
        return self._split(x)


def make_discretization(scheme, c, mesh, k=None, stab_constants=None) -> Discretization:
    return Discretization(scheme, c, mesh, k=k, stab_constants=stab_constants)


def solve_state(scheme, c, spaces_or_disc, u_h):
    d = spaces_or_disc if isinstance(spaces_or_disc, Discretization) else Discretization(scheme, c, spaces_or_disc.mesh)
    y, om, p, _ = d.solve_state(u_h)
    return y, om, p


def solve_adjoint(scheme, c, spaces_or_disc, y_h, omega_h):
    d = spaces_or_disc if isinstance(spaces_or_disc, Discretization) else Discretization(scheme, c, spaces_or_disc.mesh)
    w, th, q, _ = d.solve_adjoint(y_h, omega_h)
    return w, th, q


def _sq_l2(values, w):
    v2 = values ** 2
    if v2.ndim == 3:
        v2 = v2.sum(-1)
    return math.fsum((v2 * w).ravel())


def control_norm_sq(u_h: FeFunction) -> float:
    area = u_h.space.mesh.areas
    return math.fsum((area[:, None] * u_h.coefficients.reshape(-1, 2) ** 2).ravel())


def cost(c: Coefficients, y_h: FeFunction, omega_h: FeFunction, u_h: FeFunction, degree: int | None = None) -> float:
    """0.5 |y - y_d|^2 + 0.5 |omega - omega_d|^2 + gamma/2 |u|^2."""
    mesh = y_h.space.mesh
    degree = degree or default_quadrature_degree(1)
    cq = cell_quad(mesh, degree)
    yv, _ = evaluate(y_h, space_tab(y_h.space, degree))
    wv, _ = evaluate(omega_h, space_tab(omega_h.space, degree))
    jy = _sq_l2(yv - np.asarray(c.y_d(cq.x)), cq.w)
    jw = _sq_l2(wv - np.asarray(c.omega_d(cq.x)), cq.w)
    return 0.5 * jy + 0.5 * jw + 0.5 * c.gamma * control_norm_sq(u_h)


@dataclass
class SolutionBundle:
    y_h: FeFunction
    omega_h: FeFunction
    p_h: FeFunction
    w_h: FeFunction
    theta_h: FeFunction
    q_h: FeFunction
    u_h: FeFunction
    multipliers: tuple
    iteration_log: list = field(default_factory=list)
    converged: bool = True

    def log_csv(self) -> str:
        lines = ["iter,du_norm,cost"]
        lines += [f"{i},{du!r},{j!r}" for i, (du, j) in enumerate(self.iteration_log)]
        return "\n".join(lines) + "\n"


def _control_fn(spaces: Spaces, values):
    return FeFunction(spaces.control, np.asarray(values, dtype=float).reshape(-1))


def fixed_point_solve(disc: Discretization, u0=None, damping: float = 1.0, tol: float = 1e-8,
                      max_iter: int = 200, min_damping: float = 1.0 / 16.0, callback=None) -> SolutionBundle:
    """u <- Pi((1 - s) u + s P0(-w(u) / gamma)), halving s when the cost rises.

    callback(u, J) is called with every accepted iterate, (ncells, 2) values.
    """
    c = disc.c
    spaces = disc.spaces
    a, b = np.asarray(c.a_bound, float), np.asarray(c.b_bound, float)
    nc = spaces.mesh.ncells
    if u0 is None:
        u = project_admissible(np.zeros((nc, 2)), a, b)
    else:
        u0 = np.asarray(u0.coefficients if isinstance(u0, FeFunction) else u0, dtype=float).reshape(nc, 2)
        u = project_admissible(u0, a, b)
    area = spaces.mesh.areas
    u_fn = _control_fn(spaces, u)
    y, om, p, mu_p = disc.solve_state(u_fn)
    J = cost(c, y, om, u_fn, disc.degree)
    log = []
    converged = False
    s = damping
    for _ in range(max_iter):
        w, th, q, mu_q = disc.solve_adjoint(y, om)
        target = -cell_means(w, disc.degree) / c.gamma
        while True:
            u_new = project_admissible((1.0 - s) * u + s * target, a, b)
            u_new_fn = _control_fn(spaces, u_new)
            y_new, om_new, p_new, mu_new = disc.solve_state(u_new_fn)
            J_new = cost(c, y_new, om_new, u_new_fn, disc.degree)
            if J_new <= J + 1e-12 * max(1.0, abs(J)) or s <= min_damping:
                break
            s = max(0.5 * s, min_damping)
        du = math.sqrt(math.fsum((area[:, None] * (u_new - u) ** 2).ravel()))
        log.append((du, J_new))
        u, u_fn, y, om, p, mu_p, J = u_new, u_new_fn, y_new, om_new, p_new, mu_new, J_new
        if callback is not None:
            callback(u, J)
        if du <= tol:
            converged = True
            break
    w, th, q, mu_q = disc.solve_adjoint(y, om)
    return SolutionBundle(y, om, p, w, th, q, u_fn, (mu_p, mu_q), log, converged)


def vi_residual(c: Coefficients, w_h: FeFunction, u_h: FeFunction, eps: float = 0.0) -> float:
    """Largest violation of the cellwise optimality conditions."""
    g = cell_means(w_h) + c.gamma * u_h.coefficients.reshape(-1, 2)
    u = u_h.coefficients.reshape(-1, 2)
    a = np.broadcast_to(np.asarray(c.a_bound, float), u.shape)
    b = np.broadcast_to(np.asarray(c.b_bound, float), u.shape)
    viol = np.where(u == a, np.maximum(-g - eps, 0.0),
                    np.where(u == b, np.maximum(g - eps, 0.0), np.maximum(np.abs(g) - eps, 0.0)))
    return float(viol.max()) if viol.size else 0.0


def reduced_cost(disc: Discretization, u: np.ndarray) -> float:
    u_fn = _control_fn(disc.spaces, u)
    y, om, _, _ = disc.solve_state(u_fn)
    return cost(disc.c, y, om, u_fn, disc.degree)


def reduced_gradient(disc: Discretization, u: np.ndarray) -> np.ndarray:
    """Cellwise coefficients of gamma u + P0 w, scaled by cell area."""
    u = np.asarray(u, float).reshape(-1, 2)
    u_fn = _control_fn(disc.spaces, u)
    y, om, _, _ = disc.solve_state(u_fn)
    w, _, _, _ = disc.solve_adjoint(y, om)
    return disc.mesh.areas[:, None] * (disc.c.gamma * u + cell_means(w, disc.degree))


def gradient_check(disc: Discretization, u=None, h_fd: float = 1e-4, n_dirs: int = 5, seed: int = 0) -> float:
    """Max relative mismatch between (gamma u + w, lam) and centred differences."""
    rng = np.random.default_rng(seed)
    nc = disc.mesh.ncells
    if u is None:
        u = 0.1 * rng.standard_normal((nc, 2))
    u = np.asarray(u, float).reshape(nc, 2)
    grad = reduced_gradient(disc, u)
    worst = 0.0
    for _ in range(n_dirs):
        lam = rng.standard_normal((nc, 2))
        exact = float((grad * lam).sum())
        fd = (reduced_cost(disc, u + h_fd * lam) - reduced_cost(disc, u - h_fd * lam)) / (2.0 * h_fd)
        scale = max(abs(exact), abs(fd), 1e-300)
        worst = max(worst, abs(exact - fd) / scale)
    return worst
