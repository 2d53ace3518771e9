"""Dörfler marking and the solve, estimate, mark, refine loop."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .estimate import LocalIndicators, global_estimators, indicators, true_errors
from .mesh import Mesh, bisect_refine, generate
from .optctl import Discretization, fixed_point_solve


def dorfler_mark(ind: LocalIndicators | np.ndarray, theta: float = 0.5) -> set:
    """Smallest cell set carrying at least theta^2 of the total indicator.

    Cells are taken by descending combined indicator, ties by lower index.
    """
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie in (0, 1)")
    eta = ind.total_sq if isinstance(ind, LocalIndicators) else np.asarray(ind, dtype=float)
    total = math.fsum(eta.tolist())
    if total == 0.0:
        return set()
    order = np.lexsort((np.arange(len(eta)), -eta))
    target = theta * theta * total
    acc = []
    marked = []
    for i in order:
        marked.append(int(i))
        acc.append(float(eta[i]))
        if math.fsum(acc) >= target:
            break
    return set(marked)


@dataclass
class RunRecord:
    level: int
    dofs_total: int
    h: float
    errors: object | None
    eta: object
    efficiency: float | None
    seconds: float
    ncells: int
    dofs: dict = field(default_factory=dict)
    converged: bool = True


def solve_level(problem, scheme: str, mesh: Mesh, level: int, k=None, stab_constants=None,
                tol: float = 1e-8, max_iter: int = 200, keep=None):
    """One full solve with indicators and (if available) true errors."""
    t0 = time.perf_counter()
    disc = Discretization(scheme, problem.coefficients, mesh, k=k, stab_constants=stab_constants)
    bundle = fixed_point_solve(disc, tol=tol, max_iter=max_iter)
    ind = indicators(scheme, problem.coefficients, bundle, disc.stab)
    eta = global_estimators(ind)
    errs = true_errors(problem.exact, bundle, disc.stab) if problem.exact is not None else None
    eff = eta.eta_total / errs.total if errs is not None and errs.total > 0 else None
    sp = disc.spaces
    rec = RunRecord(
        level=level, dofs_total=sp.dofs_total(), h=float(mesh.cell_diameters.max()),
        errors=errs, eta=eta, efficiency=eff, seconds=time.perf_counter() - t0, ncells=mesh.ncells,
        dofs={"velocity": sp.velocity.ndofs, "vorticity": sp.vorticity.ndofs,
              "pressure": sp.pressure.ndofs, "control": sp.control.ndofs},
        converged=bundle.converged,
    )
    if keep is not None:
        keep.append((mesh, bundle, ind))
    return rec, ind


def adaptive_loop(problem, scheme: str, theta: float = 0.5, max_dofs: int = 20000, start_level: int = 1,
                  max_iterations: int = 50, k=None, stab_constants=None, tol: float = 1e-8,
                  meshes: list | None = None) -> list:
    """Refine adaptively until the DOF count exceeds max_dofs.

    The first record is always produced; refinement stops as soon as the
    current mesh is above the budget.  Meshes, bundles and indicators are
    appended to `meshes` when a list is given.
    """
    mesh = generate(problem.domain_id, start_level)
    history = []
    for it in range(max_iterations):
        rec, ind = solve_level(problem, scheme, mesh, it, k=k, stab_constants=stab_constants, tol=tol,
                               keep=meshes)
        history.append(rec)
        if rec.dofs_total > max_dofs:
            break
        marked = dorfler_mark(ind, theta)
        if not marked:
            break
        mesh = bisect_refine(mesh, marked)
    return history
