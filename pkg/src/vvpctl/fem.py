"""Finite-element spaces, quadrature and field evaluation on affine triangles.

Reference triangle: vertices (0,0), (1,0), (0,1) with barycentric
coordinates l1 = 1 - x - y, l2 = x, l3 = y.  Basis functions are stored as
monomial coefficient tables so values, gradients and Hessians at arbitrary
reference points come out of one routine.

Vector spaces interleave components: global DOF = 2 * node + component,
and local DOF a = 2 * i + component for local scalar basis i.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from scipy.special import roots_jacobi

from .mesh import Mesh

MAX_DEGREE = 10


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray  # (nq, 3) barycentric, or (nq,) edge parameter in [0,1]
    weights: np.ndarray  # reference measure weights
    exact_degree: int

    @property
    def xi(self) -> np.ndarray:
        """Reference Cartesian coordinates (nq, 2)."""
        return self.points[:, 1:3]


@lru_cache(maxsize=None)
def gauss_rule(exact_degree: int) -> QuadratureRule:
    """Collapsed Gauss-Jacobi rule on the reference triangle."""
    if not 1 <= exact_degree <= MAX_DEGREE:
        raise ValueError(f"unsupported quadrature degree {exact_degree}")
    n = (exact_degree + 2) // 2
    xs, ws = roots_jacobi(n, 1.0, 0.0)
    s = 0.5 * (1.0 + xs)
    ws = ws / 4.0
    xt, wt = np.polynomial.legendre.leggauss(n)
    t = 0.5 * (1.0 + xt)
    wt = wt / 2.0
    S, T = np.meshgrid(s, t, indexing="ij")
    x = S.ravel()
    y = ((1.0 - S) * T).ravel()
    w = np.outer(ws, wt).ravel()
    bary = np.stack([1.0 - x - y, x, y], axis=1)
    return QuadratureRule(bary, w, exact_degree)


@lru_cache(maxsize=None)
def edge_rule(exact_degree: int) -> QuadratureRule:
    """Gauss-Legendre rule on [0, 1]."""
    n = max(1, (exact_degree + 2) // 2)
    x, w = np.polynomial.legendre.leggauss(n)
    return QuadratureRule(0.5 * (1.0 + x), 0.5 * w, exact_degree)


# ---------------------------------------------------------------- elements


@dataclass(frozen=True)
class PolyElement:
    """Scalar reference element given by monomial coefficients.

    coeffs[i, m] multiplies x**px[m] * y**py[m] in basis function i.
    """

    name: str
    px: tuple
    py: tuple
    coeffs: np.ndarray

    @property
    def nloc(self) -> int:
        return self.coeffs.shape[0]

    def _mono(self, xi, dx=0, dy=0):
        x = xi[..., 0, None]
        y = xi[..., 1, None]
        px = np.array(self.px)
        py = np.array(self.py)
        fx = np.ones_like(px, dtype=float)
        fy = np.ones_like(py, dtype=float)
        ex, ey = px.copy(), py.copy()
        for _ in range(dx):
            fx = fx * ex
            ex = ex - 1
        for _ in range(dy):
            fy = fy * ey
            ey = ey - 1
        ok = (ex >= 0) & (ey >= 0)
        ex = np.where(ok, ex, 0)
        ey = np.where(ok, ey, 0)
        return np.where(ok, fx * fy, 0.0) * x ** ex * y ** ey

    def values(self, xi):
        """(..., nloc) values at reference points xi (..., 2)."""
        return self._mono(xi) @ self.coeffs.T

    def grads(self, xi):
        """(..., nloc, 2) reference gradients."""
        gx = self._mono(xi, 1, 0) @ self.coeffs.T
        gy = self._mono(xi, 0, 1) @ self.coeffs.T
        return np.stack([gx, gy], axis=-1)

    def hessians(self, xi):
        """(..., nloc, 2, 2) reference Hessians."""
        hxx = self._mono(xi, 2, 0) @ self.coeffs.T
        hxy = self._mono(xi, 1, 1) @ self.coeffs.T
        hyy = self._mono(xi, 0, 2) @ self.coeffs.T
        return np.stack([np.stack([hxx, hxy], -1), np.stack([hxy, hyy], -1)], -2)


def _monomials(k):
    px, py = [], []
    for d in range(k + 1):
        for j in range(d + 1):
            px.append(d - j)
            py.append(j)
    return tuple(px), tuple(py)


def lattice_nodes(k):
    """Equispaced reference nodes: vertices first, then the rest row by row."""
    if k == 0:
        return np.array([[1.0 / 3.0, 1.0 / 3.0]])
    pts = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]
    for j in range(k + 1):
        for i in range(k + 1 - j):
            p = (i / k, j / k)
            if p not in pts:
                pts.append(p)
    return np.array(pts)


@lru_cache(maxsize=None)
def lagrange_element(k: int) -> PolyElement:
    px, py = _monomials(k)
    nodes = lattice_nodes(k)
    V = nodes[:, 0, None] ** np.array(px) * nodes[:, 1, None] ** np.array(py)
    coeffs = np.linalg.inv(V).T  # basis i has coefficients coeffs[i]
    coeffs[np.abs(coeffs) < 1e-14] = 0.0
    return PolyElement(f"P{k}", px, py, coeffs)


@lru_cache(maxsize=None)
def mini_element() -> PolyElement:
    """P1 hats plus the cubic bubble 27 l1 l2 l3."""
    px, py = _monomials(3)
    p1 = lagrange_element(1)
    coeffs = np.zeros((4, len(px)))
    index = {(a, b): m for m, (a, b) in enumerate(zip(px, py))}
    for i in range(3):
        for m, (a, b) in enumerate(zip(p1.px, p1.py)):
            coeffs[i, index[(a, b)]] = p1.coeffs[i, m]
    # 27 (1 - x - y) x y = 27 (xy - x^2 y - x y^2)
    coeffs[3, index[(1, 1)]] = 27.0
    coeffs[3, index[(2, 1)]] = -27.0
    coeffs[3, index[(1, 2)]] = -27.0
    return PolyElement("MINI", px, py, coeffs)


# ---------------------------------------------------------------- geometry


@dataclass(frozen=True, eq=False)
class Geometry:
    """Affine maps x = v0 + J xi for every cell."""

    mesh: Mesh

    @cached_property
    def v0(self):
        return self.mesh.vertices[self.mesh.cells[:, 0]]

    @cached_property
    def jac(self):
        p = self.mesh.vertices[self.mesh.cells]
        return np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=2)

    @cached_property
    def detj(self):
        J = self.jac
        return J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]

    @cached_property
    def jinv(self):
        return np.linalg.inv(self.jac)

    def to_physical(self, xi, cells=None):
        """xi (..., nq, 2) -> physical points (ncells, nq, 2)."""
        v0 = self.v0 if cells is None else self.v0[cells]
        J = self.jac if cells is None else self.jac[cells]
        return v0[:, None, :] + np.einsum("kij,...qj->kqi", J, xi)

    def to_reference(self, x, cells):
        """x (n, nq, 2) physical points in cells (n,) -> reference coords."""
        return np.einsum("kij,kqj->kqi", self.jinv[cells], x - self.v0[cells][:, None, :])


@lru_cache(maxsize=8)
def geometry(mesh: Mesh) -> Geometry:
    return Geometry(mesh)


# ---------------------------------------------------------------- spaces

KINDS = (
    "mini_velocity",
    "lagrange_scalar",
    "vorticity_cont",
    "dg_vector",
    "dg_scalar",
    "piecewise_const_vector",
)


@dataclass(frozen=True, eq=False)
class Space:
    kind: str
    mesh: Mesh
    degree: int
    ncomp: int
    element: PolyElement
    cell_nodes: np.ndarray  # (ncells, nloc) scalar node indices
    nnodes: int
    continuous: bool

    @property
    def ndofs(self) -> int:
        return self.ncomp * self.nnodes

    @property
    def nloc(self) -> int:
        return self.ncomp * self.element.nloc

    @cached_property
    def dof_map(self) -> np.ndarray:
        """(ncells, ncomp * nloc) global DOFs, component-interleaved."""
        c = self.ncomp
        nodes = self.cell_nodes
        return (c * nodes[:, :, None] + np.arange(c)[None, None, :]).reshape(len(nodes), -1)

    @cached_property
    def boundary_dofs(self) -> np.ndarray:
        """Global DOFs tied to boundary vertices (continuous spaces only)."""
        if not self.continuous:
            return np.zeros(0, dtype=np.int64)
        nodes = np.flatnonzero(self.mesh.boundary_vertices)
        return (self.ncomp * nodes[:, None] + np.arange(self.ncomp)).ravel()

    def tag(self) -> str:
        return f"{self.kind}:{self.degree}"


def make_space(kind: str, mesh: Mesh, k: int = 1) -> Space:
    """Build a space; k is the polynomial degree of the scalar element."""
    nc = mesh.ncells
    if kind == "mini_velocity":
        if k != 1:
            raise ValueError("MINI velocity exists for k = 1 only")
        nodes = np.hstack([mesh.cells, mesh.nverts + np.arange(nc)[:, None]])
        return Space(kind, mesh, 1, 2, mini_element(), nodes, mesh.nverts + nc, True)
    if kind in ("lagrange_scalar", "vorticity_cont"):
        if k != 1:
            raise ValueError("continuous Lagrange spaces are provided for k = 1")
        return Space(kind, mesh, 1, 1, lagrange_element(1), mesh.cells.copy(), mesh.nverts, True)
    if kind in ("dg_vector", "dg_scalar", "piecewise_const_vector"):
        if kind == "piecewise_const_vector":
            k = 0
        el = lagrange_element(k)
        nodes = np.arange(nc * el.nloc).reshape(nc, el.nloc)
        ncomp = 1 if kind == "dg_scalar" else 2
        return Space(kind, mesh, k, ncomp, el, nodes, nc * el.nloc, False)
    raise ValueError(f"unknown space kind {kind!r}")


@dataclass(eq=False)
class FeFunction:
    space: Space
    coefficients: np.ndarray

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=float)
        if self.coefficients.shape != (self.space.ndofs,):
            raise ValueError("coefficient length does not match the space")

    def local(self) -> np.ndarray:
        """(ncells, nloc) local coefficient table."""
        return self.coefficients[self.space.dof_map]

    def dump(self) -> str:
        lines = ["vvpfield 1", self.space.tag(), str(self.space.ndofs)]
        lines += [repr(float(v)) for v in self.coefficients]
        return "\n".join(lines) + "\n"


def zero_function(space: Space) -> FeFunction:
    return FeFunction(space, np.zeros(space.ndofs))


# ---------------------------------------------------------------- tabulation


@dataclass(eq=False)
class Tab:
    """Basis data of a space at points of every cell.

    phi  : (ncells, nq, nloc) scalar basis values
    dphi : (ncells, nq, nloc, 2) physical gradients
    For vector spaces the per-DOF arrays are built on demand:
    val (ncells, nq, nvloc, 2) and grad (ncells, nq, nvloc, 2, 2) with
    grad[..., i, j] = d v_i / d x_j.
    """

    space: Space
    phi: np.ndarray
    dphi: np.ndarray
    ddphi: np.ndarray | None = None

    @cached_property
    def val(self):
        if self.space.ncomp == 1:
            return self.phi
        k, q, n = self.phi.shape
        out = np.zeros((k, q, n, 2, 2))
        out[:, :, :, 0, 0] = self.phi
        out[:, :, :, 1, 1] = self.phi
        return out.reshape(k, q, 2 * n, 2)

    @cached_property
    def grad(self):
        if self.space.ncomp == 1:
            return self.dphi
        k, q, n, _ = self.dphi.shape
        out = np.zeros((k, q, n, 2, 2, 2))
        out[:, :, :, 0, 0, :] = self.dphi
        out[:, :, :, 1, 1, :] = self.dphi
        return out.reshape(k, q, 2 * n, 2, 2)

    @cached_property
    def div(self):
        g = self.grad
        return g[..., 0, 0] + g[..., 1, 1]

    @cached_property
    def curl(self):
        g = self.grad
        return g[..., 1, 0] - g[..., 0, 1]

    @cached_property
    def sym(self):
        g = self.grad
        return 0.5 * (g + np.swapaxes(g, -1, -2))

    @cached_property
    def hess(self):
        """Vector space: (ncells, nq, nvloc, 2, 2, 2) with [..., i, j, l]."""
        if self.ddphi is None:
            raise ValueError("Hessians were not tabulated")
        if self.space.ncomp == 1:
            return self.ddphi
        k, q, n = self.ddphi.shape[:3]
        out = np.zeros((k, q, n, 2, 2, 2, 2))
        out[:, :, :, 0, 0] = self.ddphi
        out[:, :, :, 1, 1] = self.ddphi
        return out.reshape(k, q, 2 * n, 2, 2, 2)


def tabulate(space: Space, xi, cells=None, hessians=False) -> Tab:
    """Tabulate the basis at reference points.

    xi is (nq, 2) shared by all cells, or (ncells, nq, 2) per cell.
    """
    g = geometry(space.mesh)
    el = space.element
    jinv = g.jinv if cells is None else g.jinv[cells]
    ncell = len(jinv)
    if xi.ndim == 2:
        phi = np.broadcast_to(el.values(xi), (ncell,) + (len(xi), el.nloc))
        dref = el.grads(xi)
        dphi = np.einsum("kji,qnj->kqni", jinv, dref)
        ddref = el.hessians(xi) if hessians else None
        if hessians:
            ddphi = np.einsum("kai,qnab,kbj->kqnij", jinv, ddref, jinv)
    else:
        phi = el.values(xi)
        dref = el.grads(xi)
        dphi = np.einsum("kji,kqnj->kqni", jinv, dref)
        if hessians:
            ddref = el.hessians(xi)
            ddphi = np.einsum("kai,kqnab,kbj->kqnij", jinv, ddref, jinv)
    return Tab(space, np.asarray(phi), dphi, ddphi if hessians else None)


def eval_basis(space: Space, cell: int, rule: QuadratureRule):
    """Basis values and physical gradients on one cell."""
    t = tabulate(space, rule.xi, cells=np.array([cell]))
    return t.phi[0], t.dphi[0]


@dataclass(eq=False)
class CellQuad:
    """Physical quadrature data of one rule on all cells."""

    mesh: Mesh
    rule: QuadratureRule

    @cached_property
    def x(self):
        return geometry(self.mesh).to_physical(self.rule.xi)

    @cached_property
    def w(self):
        return np.abs(geometry(self.mesh).detj)[:, None] * self.rule.weights[None, :]


@lru_cache(maxsize=32)
def cell_quad(mesh: Mesh, degree: int) -> CellQuad:
    return CellQuad(mesh, gauss_rule(min(degree, MAX_DEGREE)))


@lru_cache(maxsize=16)
def _tab_cached(space: Space, degree: int, hessians: bool) -> Tab:
    return tabulate(space, cell_quad(space.mesh, degree).rule.xi, hessians=hessians)


def space_tab(space: Space, degree: int, hessians=False) -> Tab:
    return _tab_cached(space, min(degree, MAX_DEGREE), hessians)


def evaluate(fn: FeFunction, tab: Tab):
    """Values and gradients of fn at the tabulated points.

    Scalar: (k, q) and (k, q, 2).  Vector: (k, q, 2) and (k, q, 2, 2).
    """
    loc = fn.local()
    val = np.einsum("kqa...,ka->kq...", tab.val, loc)
    grad = np.einsum("kqa...,ka->kq...", tab.grad, loc)
    return val, grad


def evaluate_hessian(fn: FeFunction, tab: Tab):
    return np.einsum("kqa...,ka->kq...", tab.hess, fn.local())


# ---------------------------------------------------------------- projections


def curl2d(grad):
    """Curl of a vector field from its gradient grad[..., i, j] = d v_i/d x_j."""
    return grad[..., 1, 0] - grad[..., 0, 1]


def curl_scalar(grad):
    """Vector curl (d w/dy, -d w/dx) of a scalar field from its gradient."""
    return np.stack([grad[..., 1], -grad[..., 0]], axis=-1)


def cell_means(fn: FeFunction, degree: int = 5) -> np.ndarray:
    """Cellwise means, (ncells,) or (ncells, 2)."""
    cq = cell_quad(fn.space.mesh, degree)
    val, _ = evaluate(fn, space_tab(fn.space, degree))
    area = cq.w.sum(axis=1)
    if val.ndim == 2:
        return (val * cq.w).sum(1) / area
    return np.einsum("kqi,kq->ki", val, cq.w) / area[:, None]


def interpolate(space: Space, f) -> FeFunction:
    """Nodal interpolation (continuous), cellwise L2 projection (DG).

    f maps an (..., 2) point array to (...) scalars or (..., 2) vectors.
    Bubble coefficients are set to zero.
    """
    m = space.mesh
    if space.continuous:
        coeffs = np.zeros(space.ndofs)
        vals = np.asarray(f(m.vertices), dtype=float)
        if space.ncomp == 1:
            coeffs[: m.nverts] = vals
        else:
            coeffs[: 2 * m.nverts] = vals.reshape(-1)
        return FeFunction(space, coeffs)
    deg = min(2 * space.degree + 4, MAX_DEGREE)
    cq = cell_quad(m, deg)
    tab = space_tab(space, deg)
    phi = tab.phi
    M = np.einsum("kq,kqa,kqb->kab", cq.w, phi, phi)
    fx = np.asarray(f(cq.x), dtype=float)
    if space.ncomp == 1:
        rhs = np.einsum("kq,kqa,kq->ka", cq.w, phi, fx)
        loc = np.linalg.solve(M, rhs[..., None])[..., 0]
    else:
        rhs = np.einsum("kq,kqa,kqi->kai", cq.w, phi, fx)
        loc = np.linalg.solve(M, rhs).reshape(m.ncells, -1)
    coeffs = np.zeros(space.ndofs)
    coeffs[space.dof_map] = loc
    return FeFunction(space, coeffs)


def project_p0(fn_values, mesh: Mesh, degree: int = 5) -> np.ndarray:
    """Cell means of a callable field."""
    cq = cell_quad(mesh, degree)
    vals = np.asarray(fn_values(cq.x), dtype=float)
    area = cq.w.sum(axis=1)
    if vals.ndim == 2:
        return (vals * cq.w).sum(1) / area
    return np.einsum("kqi,kq->ki", vals, cq.w) / area[:, None]


# ---------------------------------------------------------------- norms


def l2_norm_sq_cells(values, w):
    """Cellwise squared L2 norms of (k, q) or (k, q, ...) sampled values."""
    v2 = values ** 2
    while v2.ndim > 2:
        v2 = v2.sum(-1)
    return (v2 * w).sum(1)


def triple_norm(v: FeFunction, degree: int = 5) -> float:
    """sqrt(|v|^2 + |curl v|^2 + |div v|^2), broken on discontinuous spaces."""
    cq = cell_quad(v.space.mesh, degree)
    val, grad = evaluate(v, space_tab(v.space, degree))
    curl = grad[..., 1, 0] - grad[..., 0, 1]
    div = grad[..., 0, 0] + grad[..., 1, 1]
    total = l2_norm_sq_cells(val, cq.w) + l2_norm_sq_cells(curl, cq.w) + l2_norm_sq_cells(div, cq.w)
    return math.sqrt(math.fsum(total))


def l2_norm(v: FeFunction, degree: int = 5) -> float:
    cq = cell_quad(v.space.mesh, degree)
    val, _ = evaluate(v, space_tab(v.space, degree))
    return math.sqrt(math.fsum(l2_norm_sq_cells(val, cq.w)))
