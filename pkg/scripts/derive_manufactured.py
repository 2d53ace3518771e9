"""Derive manufactured data symbolically and write src/vvpctl/_manufactured.py.

Run from the repository root:

    python scripts/derive_manufactured.py

The generated module is committed; nothing is differentiated at run time.
The co-state data follow the transpose of the discrete state operator:

    div G(w) + curl(nu theta) + sigma w - (beta.grad) w - (div beta) w
        + rho1 curl curl w - rho2 grad div w - grad q = y - y_d
    (nu - rho1) curl w + grad nu x w - nu theta = omega - omega_d

with G_ij = w_i d_j nu + w_j d_i nu.
"""

from __future__ import annotations

import pathlib

import sympy as sp
from sympy.printing.numpy import NumPyPrinter

x1, x2, rho1, rho2 = sp.symbols("x1 x2 rho1 rho2", real=True)
X = (x1, x2)


def curl_s(s):
    return sp.Matrix([sp.diff(s, x2), -sp.diff(s, x1)])


def curl_v(v):
    return sp.diff(v[1], x1) - sp.diff(v[0], x2)


def div_v(v):
    return sp.diff(v[0], x1) + sp.diff(v[1], x2)


def grad_s(s):
    return sp.Matrix([sp.diff(s, x1), sp.diff(s, x2)])


def jac(v):
    return sp.Matrix(2, 2, lambda i, j: sp.diff(v[i], X[j]))


def cross(g, v):
    return g[0] * v[1] - g[1] * v[0]


def derive(psi_y, psi_w, p, q, nu, beta, sigma):
    y = curl_s(psi_y)
    w = curl_s(psi_w)
    om = curl_v(y)
    th = curl_v(w)
    gnu = grad_s(nu)
    Jy = jac(y)
    Jw = jac(w)
    eps2 = Jy + Jy.T
    state = -eps2 * gnu + nu * curl_s(om) + Jy * beta + sigma * y + grad_s(p)
    G = sp.Matrix(2, 2, lambda i, j: w[i] * gnu[j] + w[j] * gnu[i])
    divG = sp.Matrix([sp.diff(G[0, 0], x1) + sp.diff(G[0, 1], x2), sp.diff(G[1, 0], x1) + sp.diff(G[1, 1], x2)])
    adj = (divG + curl_s(nu * th) + sigma * w - Jw * beta - div_v(beta) * w
           + rho1 * curl_s(curl_v(w)) - rho2 * grad_s(div_v(w)) - grad_s(q))
    y_d = y - adj
    omega_d = om - (nu - rho1) * curl_v(w) - cross(gnu, w) + nu * th
    out = {
        "y": list(y), "grad_y": list(Jy),
        "omega": [om], "grad_omega": list(grad_s(om)),
        "p": [p],
        "w": list(w), "grad_w": list(Jw),
        "theta": [th], "grad_theta": list(grad_s(th)),
        "q": [q],
        "f_smooth": list(state),
        "y_d": list(y_d), "omega_d": [omega_d],
        "nu": [nu], "grad_nu": list(gnu), "hess_nu": list(sp.hessian(nu, X)),
        "beta": list(beta), "div_beta": [div_v(beta)], "grad_beta": list(jac(beta)),
        "sigma": [sigma],
    }
    return out


def problem_ex51():
    pi = sp.pi
    psi_y = (sp.sin(pi * x1) * sp.sin(pi * x2)) ** 2
    psi_w = (sp.sin(2 * pi * x1) * sp.sin(2 * pi * x2)) ** 2
    beta = curl_s(psi_y)
    return derive(psi_y, psi_w,
                  sp.cos(2 * pi * x1) * sp.cos(2 * pi * x2),
                  sp.sin(2 * pi * x1) * sp.sin(2 * pi * x2),
                  sp.Rational(1, 1000) + sp.Rational(999, 1000) * x1 * x2,
                  beta, sp.Integer(100))


def problem_ex52():
    pi = sp.pi
    e = sp.exp(-50)
    layer_x = (sp.exp(-50 * x1) - e) / (1 - e)
    layer_y = (sp.exp(-50 * x2) - e) / (1 - e)
    psi_y = x1 * x2 ** 2 * (1 - x1 - x2) ** 2 * (1 - x1 - layer_x)
    psi_w = x1 ** 2 * x2 * (1 - x1 - x2) ** 2 * (1 - x2 - layer_y)
    return derive(psi_y, psi_w,
                  sp.cos(2 * pi * x2) / 1024,
                  sp.cos(2 * pi * x1) / 1024,
                  1 + sp.Rational(1, 1000) * x1 * x2,
                  sp.Matrix([1, 1]), sp.Integer(100))


def emit(name, fields):
    printer = NumPyPrinter({"fully_qualified_modules": False, "allow_unknown_functions": False})
    keys = list(fields)
    flat = []
    for k in keys:
        flat.extend(fields[k])
    subs, reduced = sp.cse(flat, optimizations="basic")
    lines = [f"def {name}(x1, x2, rho1=0.0, rho2=0.0):"]
    lines.append("    one = np.ones_like(x1)")
    for sym, expr in subs:
        lines.append(f"    {sym} = {printer.doprint(expr)}")
    pos = 0
    lines.append("    out = {}")
    for k in keys:
        n = len(fields[k])
        parts = ", ".join(f"({printer.doprint(e)}) * one" for e in reduced[pos:pos + n])
        lines.append(f"    out[{k!r}] = [{parts}]")
        pos += n
    lines.append("    return out")
    return "\n".join(lines)


def main():
    body = [
        '"""Manufactured-solution fields, generated by scripts/derive_manufactured.py.',
        "",
        "Do not edit by hand.  Each function returns a dict of component lists;",
        "matrix-valued entries are row-major.",
        '"""',
        "",
        "import numpy as np",
        "from numpy import cos, exp, pi, sin",
        "",
        "",
        emit("ex51_fields", problem_ex51()),
        "",
        "",
        emit("ex52_fields", problem_ex52()),
        "",
    ]
    text = "\n".join(body).replace("numpy.", "np.")
    target = pathlib.Path(__file__).resolve().parents[1] / "src" / "vvpctl" / "_manufactured.py"
    target.write_text(text)
    print(f"wrote {target}")


if __name__ == "__main__":
    main()
