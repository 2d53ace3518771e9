"""Acceptance criteria, one test per criterion.

Every test appends a PASS/FAIL line to the session summary before asserting,
so a failing criterion still reports its observed numbers.
"""

import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from vvpctl.harness import dof_slope

pytestmark = pytest.mark.acceptance

TESTS = Path(__file__).parent

# target rates at N = 6 for the augmentation study
REF_RY_PLAIN = 0.03
REF_R_KAPPA = 1.85
REF_R_P = 2.44
REF_R_U = 0.78
RATE_TOL = 0.25


def _report(name, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def _diameters(mesh):
    v = mesh.vertices[mesh.cells]
    d = np.linalg.norm(v - np.roll(v, 1, axis=1), axis=-1)
    return d.max(axis=1)


def _seconds(records):
    return sum(r.seconds for r in records)


def test_c1_augmentation_study(ex51_cg_plain, ex51_cg_augmented):
    plain, aug = ex51_cg_plain, ex51_cg_augmented
    ry = plain.rates[-1]["r_y_triple"]
    last = aug.rates[-1]
    rk, rp, ru = last["r_omega"], last["r_p"], last["r_u"]
    checks = {
        "r(y) plain <= 0.2": ry <= 0.2 and abs(ry - REF_RY_PLAIN) <= RATE_TOL,
        "r(kappa) in [1.6, 2.2]": 1.6 <= rk <= 2.2 and abs(rk - REF_R_KAPPA) <= RATE_TOL,
        "r(p) >= 1.8": rp >= 1.8 and abs(rp - REF_R_P) <= RATE_TOL,
        "r(u) in [0.65, 1.1]": 0.65 <= ru <= 1.1 and abs(ru - REF_R_U) <= RATE_TOL,
    }
    secs = _seconds(plain.records) + _seconds(aug.records)
    checks["runtime <= 600 s"] = secs <= 600
    ok = all(checks.values())
    failed = [k for k, v in checks.items() if not v]
    _report("C1 augmentation study", ok,
            f"r(y)[rho=0]={ry:.3f} r(kappa)={rk:.3f} r(p)={rp:.3f} r(u)={ru:.3f} "
            f"time={secs:.0f}s" + (f" failed: {failed}" if failed else ""))
    assert ok, failed


def test_c2_control_rate(ex51_cg_augmented):
    res = ex51_cg_augmented
    # rates between N=4,5 and N=5,6
    rates = [row["r_u"] for row in res.rates if row["level"] in (5, 6)]
    assert len(rates) == 2
    mean = float(np.mean(rates))
    ok = mean >= 0.7
    _report("C2 control O(h)", ok, f"r(u) = {rates[0]:.3f}, {rates[1]:.3f}, mean {mean:.3f} (>= 0.7)")
    assert ok


def test_c3_dg_rates(ex51_dg):
    res = ex51_dg
    last = res.rates[-1]
    ry, rw, ru = last["r_y_triple"], last["r_w_triple"], last["r_u"]
    dofs = res.records[-1].dofs_total
    secs = _seconds(res.records)
    checks = {
        "r(y) in [0.8, 1.2]": 0.8 <= ry <= 1.2,
        "r(w) in [0.8, 1.2]": 0.8 <= rw <= 1.2,
        "r(u) >= 0.7": ru >= 0.7,
        "dofs <= 1e5": dofs <= 10 ** 5,
        "runtime <= 600 s": secs <= 600,
    }
    ok = all(checks.values())
    failed = [k for k, v in checks.items() if not v]
    _report("C3 DG k=0 rates", ok,
            f"r(y)={ry:.3f} r(w)={rw:.3f} r(u)={ru:.3f} dofs={dofs} time={secs:.0f}s"
            + (f" failed: {failed}" if failed else ""))
    assert ok, failed


def test_c4_efficiency(ex51_cg_augmented, ex51_dg):
    ok, parts = True, []
    for name, res in (("cg", ex51_cg_augmented), ("dg", ex51_dg)):
        eff = np.array([r.efficiency for r in res.records[-3:]])
        ratio = eff.max() / eff.min()
        ok &= bool(ratio <= 2.0)
        parts.append(f"{name} eta/err = {np.array2string(eff, precision=3)} max/min {ratio:.3f}")
    _report("C4 estimator efficiency", ok, "; ".join(parts))
    assert ok


def test_c5_adaptive_localization(ex52_adaptive, ex53_l_adaptive):
    recs52, keep52 = ex52_adaptive
    recs53, keep53 = ex53_l_adaptive
    checks = {}

    # ex52: refined cells concentrate in the strip x1 < 0.1 along the layer
    m0 = keep52[0][0]
    m5 = keep52[min(5, len(keep52) - 1)][0]
    refined = m5.areas < m0.areas.min() * (1 - 1e-12)
    in_strip = m5.centroids[:, 0] < 0.1
    frac = in_strip[refined].sum() / max(refined.sum(), 1)
    strip_area = (0.1 - 0.1 ** 2 / 2) / 0.5
    checks["ex52 strip concentration"] = frac > strip_area

    slope = dof_slope(recs52, last=4)
    checks["ex52 eta slope -0.5 +- 0.2"] = abs(slope + 0.5) <= 0.2

    # ex53_l: smallest cells sit at the reentrant corner
    m = keep53[min(5, len(keep53) - 1)][0]
    diam = _diameters(m)
    near = np.linalg.norm(m.vertices[m.cells], axis=-1).min(axis=1) <= 0.1
    checks["ex53_l min size near corner"] = bool(diam[near].min() <= diam.min())

    eta = [r.eta.eta_total for r in recs53]
    tail = eta[3:]
    checks["ex53_l eta decreasing after 3 iterations"] = all(b < a for a, b in zip(tail, tail[1:]))

    ok = all(checks.values())
    failed = [k for k, v in checks.items() if not v]
    _report("C5 adaptive localization", ok,
            f"ex52 strip fraction {frac:.3f} vs area {strip_area:.3f}, slope {slope:.3f}; "
            f"ex53_l min h {diam.min():.4f} near corner {diam[near].min():.4f}, "
            f"eta {', '.join(f'{e:.4g}' for e in eta)}" + (f" failed: {failed}" if failed else ""))
    assert ok, failed


def test_c6_property_suite():
    files = sorted(str(p) for p in TESTS.glob("test_*.py") if p.name != "test_acceptance.py")
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-m", "not slow", "-p", "no:cacheprovider",
                           *files], capture_output=True, text=True, cwd=TESTS.parent)
    secs = time.perf_counter() - t0
    summary = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    ok = proc.returncode == 0 and secs <= 300
    _report("C6 property suite", ok, f"{summary} ({secs:.0f}s, limit 300s)")
    assert ok, proc.stdout[-3000:]


def test_c7_exclusions():
    # figure pixels, the curved pipe, the 3D case and raw error magnitudes are out of scope
    from vvpctl.problems import problem_names

    ok = set(problem_names()) == {"ex51", "ex52", "ex53_l", "ex53_t"}
    _report("C7 exclusions", ok, "registry has no curved-pipe or 3D problems; rates compared, not magnitudes")
    assert ok


def test_state_error_decreases(ex51_cg_augmented):
    errs = [r.errors.err_y_triple for r in ex51_cg_augmented.records[:4]]
    assert all(b < a for a, b in zip(errs, errs[1:]))
