"""Experiment driver: convergence studies, adaptive runs, CSV output, CLI."""

from __future__ import annotations

import argparse
import logging
import math
import os
import pathlib
import sys
from dataclasses import dataclass, field

import numpy as np

from .adapt import RunRecord, adaptive_loop, solve_level
from .forms_cg import check_assumptions
from .linsolve import SingularMatrixError
from .mesh import generate
from .optctl import Discretization, gradient_check
from .problems import make_problem, problem_names

log = logging.getLogger("vvpctl")

CSV_HEADER = ("level,dofs_total,h,err_u,err_y_triple,err_w_triple,err_omega,err_theta,"
              "err_p,err_q,eta_y,eta_w,eta_u,eta_total,efficiency,seconds")
ERROR_FIELDS = ("err_u", "err_y_triple", "err_w_triple", "err_omega", "err_theta", "err_p", "err_q")
RATE_HEADER = "level,h," + ",".join("r_" + f[4:] for f in ERROR_FIELDS) + ",r_eta"


@dataclass
class RunConfig:
    problem: str = "ex51"
    scheme: str = "cg"
    k: int | None = None
    levels: int = 4
    start_level: int = 2
    theta: float = 0.5
    max_dofs: int = 20000
    rho1: float | None = None
    rho2: float | None = None
    a11: float | None = None
    c11: float | None = None
    d11: float | None = None
    gamma: float = 1.0
    tol: float = 1e-8
    out: str = "."
    seed: int = 0
    timing: bool = False

    def stab_constants(self, c):
        from .forms_dg import default_stab_constants

        a, cc, d = default_stab_constants(c)
        return (self.a11 or a, self.c11 or cc, self.d11 or d)


@dataclass
class RunResult:
    records: list
    rates: list = field(default_factory=list)
    csv_path: pathlib.Path | None = None


def rate(e0: float, e1: float, h0: float, h1: float) -> float:
    """log(e0 / e1) / log(h0 / h1)."""
    if e0 <= 0 or e1 <= 0:
        return float("nan")
    return math.log(e0 / e1) / math.log(h0 / h1)


def rate_table(records: list) -> list:
    """Rates between consecutive records, one dict per later record."""
    out = []
    for a, b in zip(records, records[1:]):
        row = {"level": b.level, "h": b.h}
        for f in ERROR_FIELDS:
            if a.errors is None:
                row["r_" + f[4:]] = float("nan")
            else:
                row["r_" + f[4:]] = rate(getattr(a.errors, f), getattr(b.errors, f), a.h, b.h)
        row["r_eta"] = rate(a.eta.eta_total, b.eta.eta_total, a.h, b.h)
        out.append(row)
    return out


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def record_row(r: RunRecord, timing: bool = False) -> str:
    errs = [getattr(r.errors, f) if r.errors is not None else None for f in ERROR_FIELDS]
    vals = [r.level, r.dofs_total, r.h, *errs, r.eta.eta_y, r.eta.eta_w, r.eta.eta_u, r.eta.eta_total,
            r.efficiency, r.seconds if timing else 0.0]
    return ",".join(_fmt(v) for v in vals)


def write_csv(path, records: list, timing: bool = False) -> pathlib.Path:
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [CSV_HEADER] + [record_row(r, timing) for r in records]
    path.write_text("\n".join(lines) + "\n")
    return path


def write_rates(path, rates: list) -> pathlib.Path:
    path = pathlib.Path(path)
    keys = RATE_HEADER.split(",")
    lines = [RATE_HEADER] + [",".join(_fmt(row[k]) for k in keys) for row in rates]
    path.write_text("\n".join(lines) + "\n")
    return path


def _level_mesh(domain_id: str, n: int):
    # level n is a 2^n x 2^n grid of squares on the unit square
    return generate(domain_id, n + 1)


def run_convergence(cfg: RunConfig, write: bool = True) -> RunResult:
    """Uniform refinement over cfg.levels levels starting at cfg.start_level."""
    problem = make_problem(cfg.problem, rho1=cfg.rho1, rho2=cfg.rho2, gamma=cfg.gamma)
    if problem.exact is None:
        log.warning("%s has no exact solution; errors are left empty", cfg.problem)
    stab = cfg.stab_constants(problem.coefficients) if cfg.scheme == "dg" else None
    records = []
    for n in range(cfg.start_level, cfg.start_level + cfg.levels):
        mesh = _level_mesh(problem.domain_id, n)
        rec, _ = solve_level(problem, cfg.scheme, mesh, n, k=cfg.k, stab_constants=stab, tol=cfg.tol)
        log.info("level %d: %d dofs, eta %.4e", n, rec.dofs_total, rec.eta.eta_total)
        records.append(rec)
    res = RunResult(records, rate_table(records))
    if write:
        out = pathlib.Path(cfg.out)
        res.csv_path = write_csv(out / f"{cfg.problem}_{cfg.scheme}_convergence.csv", records, cfg.timing)
        write_rates(out / f"{cfg.problem}_{cfg.scheme}_rates.csv", res.rates)
    return res


def run_adaptive(cfg: RunConfig, write: bool = True, meshes: list | None = None) -> RunResult:
    problem = make_problem(cfg.problem, rho1=cfg.rho1, rho2=cfg.rho2, gamma=cfg.gamma)
    stab = cfg.stab_constants(problem.coefficients) if cfg.scheme == "dg" else None
    records = adaptive_loop(problem, cfg.scheme, theta=cfg.theta, max_dofs=cfg.max_dofs,
                            start_level=cfg.start_level, k=cfg.k, stab_constants=stab, tol=cfg.tol,
                            meshes=meshes)
    res = RunResult(records)
    if write:
        res.csv_path = write_csv(pathlib.Path(cfg.out) / f"{cfg.problem}_{cfg.scheme}_adaptive.csv",
                                 records, cfg.timing)
    return res


def dof_slope(records: list, last: int | None = None) -> float:
    """Least-squares slope of log eta_total against log DOFs."""
    recs = records[-last:] if last else records
    d = np.log([r.dofs_total for r in recs])
    e = np.log([r.eta.eta_total for r in recs])
    return float(np.polyfit(d, e, 1)[0])


# ---------------------------------------------------------------- CLI


def read_config(path) -> dict:
    """Plain `key = value` lines; '#' starts a comment."""
    out = {}
    for raw in pathlib.Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"bad config line: {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vvpctl", description="Optimal control of Oseen flow in VVP form.")
    p.add_argument("--config", help="key = value file; command-line flags take precedence")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help=argparse.SUPPRESS)
        sp.add_argument("--problem", choices=problem_names(), default="ex51")
        sp.add_argument("--scheme", choices=("cg", "dg"), default="cg")
        sp.add_argument("--k", type=int, default=None)
        sp.add_argument("--levels", type=int, default=4)
        sp.add_argument("--start-level", type=int, default=2)
        sp.add_argument("--theta", type=float, default=0.5)
        sp.add_argument("--max-dofs", type=int, default=20000)
        sp.add_argument("--rho1", type=float, default=None)
        sp.add_argument("--rho2", type=float, default=None)
        sp.add_argument("--a11", type=float, default=None)
        sp.add_argument("--c11", type=float, default=None)
        sp.add_argument("--d11", type=float, default=None)
        sp.add_argument("--gamma", type=float, default=1.0)
        sp.add_argument("--tol", type=float, default=1e-8)
        sp.add_argument("--out", default=os.environ.get("VVP_OUT", "."))
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--timing", action="store_true", help="record wall time in the seconds column")
        sp.add_argument("-v", "--verbose", action="store_true")

    for name, text in (("convergence", "uniform refinement study"), ("adaptive", "adaptive refinement run"),
                       ("check", "report the coercivity assumptions"), ("gradcheck", "finite-difference gradient test")):
        common(sub.add_parser(name, help=text))
    return p


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    values = read_config(known.config)
    for sp in parser._subparsers._group_actions[0].choices.values():
        actions = {a.dest: a for a in sp._actions}
        defaults = {}
        for key, value in values.items():
            if key not in actions:
                parser.error(f"unknown config key {key!r}")
            a = actions[key]
            if a.const is True and a.nargs == 0:
                defaults[key] = value.lower() in ("1", "true", "yes", "on")
            else:
                conv = a.type or str
                try:
                    defaults[key] = conv(value)
                except ValueError:
                    parser.error(f"bad value for {key}: {value!r}")
                if a.choices is not None and defaults[key] not in a.choices:
                    parser.error(f"invalid choice for {key}: {value!r}")
        sp.set_defaults(**defaults)


def _validate(parser, args):
    if args.levels < 1:
        parser.error("--levels must be at least 1")
    if args.start_level < 1:
        parser.error("--start-level must be at least 1")
    if not 0.0 < args.theta < 1.0:
        parser.error("--theta must lie in (0, 1)")
    if args.gamma <= 0:
        parser.error("--gamma must be positive")
    for name in ("rho1", "rho2"):
        v = getattr(args, name)
        if v is not None and v < 0:
            parser.error(f"--{name} must be nonnegative")
    for name in ("a11", "c11", "d11"):
        v = getattr(args, name)
        if v is not None and v <= 0:
            parser.error(f"--{name} must be positive")
    if args.k is not None and args.scheme == "cg" and args.k != 1:
        parser.error("the conforming scheme supports --k 1 only")
    if args.k is not None and args.k < 0:
        parser.error("--k must be nonnegative")


def _config_from_args(args) -> RunConfig:
    fields = RunConfig.__dataclass_fields__
    return RunConfig(**{k: v for k, v in vars(args).items() if k in fields})


def _print_records(records, rates):
    print(CSV_HEADER.replace(",seconds", ""))
    for r in records:
        print(record_row(r).rsplit(",", 1)[0])
    if rates:
        print(RATE_HEADER)
        keys = RATE_HEADER.split(",")
        for row in rates:
            print(",".join(f"{row[k]:.3f}" if isinstance(row[k], float) else str(row[k]) for k in keys))


def cli(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        _validate(parser, args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (OSError, ValueError) as exc:
        print(f"vvpctl: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    cfg = _config_from_args(args)
    try:
        if args.command == "convergence":
            res = run_convergence(cfg)
            _print_records(res.records, res.rates)
            print(f"wrote {res.csv_path}")
        elif args.command == "adaptive":
            res = run_adaptive(cfg)
            _print_records(res.records, [])
            print(f"wrote {res.csv_path}")
        elif args.command == "check":
            problem = make_problem(cfg.problem, rho1=cfg.rho1, rho2=cfg.rho2, gamma=cfg.gamma)
            report = check_assumptions(problem.coefficients, problem.domain_id)
            for key, value in report.items():
                print(f"{key} = {value}")
        elif args.command == "gradcheck":
            problem = make_problem(cfg.problem, rho1=cfg.rho1, rho2=cfg.rho2, gamma=cfg.gamma)
            mesh = _level_mesh(problem.domain_id, cfg.start_level)
            stab = cfg.stab_constants(problem.coefficients) if cfg.scheme == "dg" else None
            disc = Discretization(cfg.scheme, problem.coefficients, mesh, k=cfg.k, stab_constants=stab)
            mismatch = gradient_check(disc, seed=cfg.seed)
            print(f"max relative mismatch = {mismatch:.3e}")
            return 0 if mismatch <= 1e-5 else 1
    except (SingularMatrixError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"vvpctl: solver failure: {exc}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(cli())


if __name__ == "__main__":
    main()
