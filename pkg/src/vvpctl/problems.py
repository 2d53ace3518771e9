"""Named test problems: two manufactured solutions and two data-only cases."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _manufactured
from .forms_cg import Coefficients


def clamp(v, a, b):
    """Componentwise projection onto the box [a, b]."""
    return np.minimum(np.asarray(b), np.maximum(np.asarray(a), v))


class ExactSolution:
    """Exact state, co-state and control of a manufactured problem."""

    def __init__(self, fields: Callable, rho1: float, rho2: float, gamma: float, a, b):
        self._fields = fields
        self.rho1, self.rho2, self.gamma = rho1, rho2, gamma
        self.a = np.asarray(a, dtype=float)
        self.b = np.asarray(b, dtype=float)

    def raw(self, x, key):
        out = self._fields(x[..., 0], x[..., 1], self.rho1, self.rho2)[key]
        return out

    def _vec(self, x, key):
        return np.stack(self.raw(x, key), axis=-1)

    def _mat(self, x, key):
        c = self.raw(x, key)
        return np.stack([np.stack(c[:2], -1), np.stack(c[2:], -1)], -2)

    def _scal(self, x, key):
        return self.raw(x, key)[0]

    def y(self, x):
        return self._vec(x, "y")

    def grad_y(self, x):
        return self._mat(x, "grad_y")

    def omega(self, x):
        return self._scal(x, "omega")

    def p(self, x):
        return self._scal(x, "p")

    def w(self, x):
        return self._vec(x, "w")

    def grad_w(self, x):
        return self._mat(x, "grad_w")

    def theta(self, x):
        return self._scal(x, "theta")

    def q(self, x):
        return self._scal(x, "q")

    def u(self, x):
        return clamp(-self.w(x) / self.gamma, self.a, self.b)

    def f(self, x):
        return self._vec(x, "f_smooth") - self.u(x)

    def y_d(self, x):
        return self._vec(x, "y_d")

    def omega_d(self, x):
        return self._scal(x, "omega_d")


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    domain_id: str
    coefficients: Coefficients
    exact: ExactSolution | None
    label: str


def _manufactured_problem(name, domain_id, fields, nu0, nu1, sigma, a, b, label,
                          rho1=None, rho2=None, gamma=1.0):
    rho1 = 2.0 * nu0 / 3.0 if rho1 is None else rho1
    rho2 = 0.1 * nu0 if rho2 is None else rho2
    ex = ExactSolution(fields, rho1, rho2, gamma, a, b)

    def vec(key):
        return lambda x: ex._vec(x, key)

    def scal(key):
        return lambda x: ex._scal(x, key)

    c = Coefficients(
        nu=scal("nu"), grad_nu=vec("grad_nu"), beta=vec("beta"), div_beta=scal("div_beta"),
        sigma=scal("sigma"), f=ex.f, y_d=ex.y_d, omega_d=ex.omega_d,
        nu0=nu0, nu1=nu1, sigma_min=sigma, sigma_max=sigma,
        rho1=rho1, rho2=rho2, gamma=gamma, a_bound=tuple(a), b_bound=tuple(b),
        hess_nu=lambda x: ex._mat(x, "hess_nu"), grad_beta=lambda x: ex._mat(x, "grad_beta"),
    )
    return ProblemSpec(name, domain_id, c, ex, label)


def ex51(rho1=None, rho2=None, gamma=1.0) -> ProblemSpec:
    return _manufactured_problem(
        "ex51", "unit_square", _manufactured.ex51_fields, 0.001, 1.0, 100.0,
        (-0.5, -0.5), (0.5, 0.5), "smooth solution, nu = 0.001 + 0.999 x1 x2, beta = y",
        rho1, rho2, gamma)


def ex52(rho1=None, rho2=None, gamma=1.0) -> ProblemSpec:
    return _manufactured_problem(
        "ex52", "unit_triangle", _manufactured.ex52_fields, 1.0, 1.00025, 100.0,
        (0.0, 0.0), (0.1, 0.1), "exponential boundary layers on the unit triangle",
        rho1, rho2, gamma)


def _ex53(name, domain_id, nu1, rho1=None, rho2=None, gamma=1.0) -> ProblemSpec:
    nu0 = 1.0
    rho1 = 2.0 * nu0 / 3.0 if rho1 is None else rho1
    rho2 = 0.1 * nu0 if rho2 is None else rho2

    def ones(x):
        return np.ones(x.shape)

    c = Coefficients(
        nu=lambda x: 1.0 + x[..., 0] ** 2,
        grad_nu=lambda x: np.stack([2.0 * x[..., 0], np.zeros(x.shape[:-1])], -1),
        beta=ones,
        div_beta=lambda x: np.zeros(x.shape[:-1]),
        sigma=lambda x: np.zeros(x.shape[:-1]),
        f=ones,
        y_d=lambda x: np.stack([x[..., 1], -x[..., 0]], -1),
        omega_d=lambda x: np.full(x.shape[:-1], -2.0),
        nu0=nu0, nu1=nu1, sigma_min=0.0, sigma_max=0.0,
        rho1=rho1, rho2=rho2, gamma=gamma, a_bound=(0.0, 0.0), b_bound=(1.0, 1.0),
        hess_nu=lambda x: np.broadcast_to(np.array([[2.0, 0.0], [0.0, 0.0]]), x.shape[:-1] + (2, 2)).copy(),
        grad_beta=lambda x: np.zeros(x.shape[:-1] + (2, 2)),
    )
    return ProblemSpec(name, domain_id, c, None, f"nonconvex {domain_id}, no exact solution")


def ex53_l(rho1=None, rho2=None, gamma=1.0) -> ProblemSpec:
    return _ex53("ex53_l", "l_shape", 2.0, rho1, rho2, gamma)


def ex53_t(rho1=None, rho2=None, gamma=1.0) -> ProblemSpec:
    return _ex53("ex53_t", "t_shape", 3.25, rho1, rho2, gamma)


_BUILDERS = {"ex51": ex51, "ex52": ex52, "ex53_l": ex53_l, "ex53_t": ex53_t}


def registry() -> dict:
    """All named problems with default parameters."""
    return {name: build() for name, build in _BUILDERS.items()}


def problem_names() -> tuple:
    return tuple(_BUILDERS)


def make_problem(name: str, rho1=None, rho2=None, gamma=1.0) -> ProblemSpec:
    if name not in _BUILDERS:
        raise KeyError(f"unknown problem {name!r}")
    return _BUILDERS[name](rho1=rho1, rho2=rho2, gamma=gamma)
