#!/usr/bin/env python3
"""Smoke test for the optscore_py extension module.

Build the module first, then run this script:

    cargo build -p optscore-py --release
    python3 python/smoke_test.py
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def import_extension():
    candidates = [
        REPO / "target" / "release" / "liboptscore_py.so",
        REPO / "target" / "debug" / "liboptscore_py.so",
        REPO / "target" / "release" / "liboptscore_py.dylib",
        REPO / "target" / "debug" / "liboptscore_py.dylib",
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit("optscore_py is not built; run `cargo build -p optscore-py --release` first")
    stage = Path(tempfile.mkdtemp(prefix="optscore-py-"))
    shutil.copy2(built, stage / "optscore_py.so")
    sys.path.insert(0, str(stage))
    import optscore_py

    return optscore_py


def close(a, b, tol=1e-9):
    assert abs(a - b) <= tol, f"{a} vs {b} (tol {tol})"


def main():
    op = import_extension()

    # ------------------------------------------------------------------
    # The uniform-prior / Bernoulli-signal example, end to end.
    n = 401
    grid = [0.6 + 0.4 * k / (n - 1) for k in range(n)]
    model = op.SignalModel(grid, [1.0 / n] * n, [[1.0 - t, t] for t in grid])
    dist = model.posterior_mean_distribution()
    assert len(dist) == 2
    close(dist.mean()[0], 0.8, 1e-9)
    opt = dist.opt_value()
    close(opt, 0.016667, 1e-4)
    close(dist.variance(), 0.001111, 1e-4)
    print(f"signal model example: opt {opt:.6f}, quadratic {dist.variance():.6f}")

    rule = op.optimal_v_shaped(dist.mean()[0])
    close(rule.objective(dist), opt, 1e-12)

    # ------------------------------------------------------------------
    # Closed-form scores.
    close(op.quadratic_rule().score([0.5], [1.0]), 0.75, 1e-12)
    v8 = op.optimal_v_shaped(0.8)
    close(v8.score([1.0], [1.0]), 0.625, 1e-9)
    print("canonical scores: quadratic S(0.5, 1) = 0.75, V(0.8) S(1, 1) = 0.625")

    # ------------------------------------------------------------------
    # Exact LP optimum on the uniform-extremes instance.
    extremes = op.FiniteDistribution([0.0, 1.0], [0.5, 0.5])
    sol = op.lp_optimal([[0.0], [1.0]], extremes, 1.0)
    close(sol.objective, 0.5, 1e-7)
    close(extremes.opt_value(), 0.5, 1e-15)
    lp_rule = sol.to_rule()
    close(lp_rule.objective(extremes), 0.5, 1e-7)
    print(f"lp optimum on uniform extremes: {sol.objective:.6f}")

    # ------------------------------------------------------------------
    # Max-over-separate in two dimensions.
    mos = op.max_over_separate([0.5, 0.5], [0.0, 0.0], [1.0, 1.0])
    assert mos.chosen_dimension([0.9, 0.5]) == 0
    close(mos.score([0.9, 0.5], [1.0, 0.3]), 1.0, 1e-12)
    close(mos.choose_and_report(1, 1.0, [0.2, 1.0]), 1.0, 1e-12)
    sym = op.symmetric_v_shaped([0.0, 0.0], [1.0, 1.0])
    close(sym.utility([1.0, 0.5]), 0.5, 1e-12)
    print("max-over-separate: dimension choice and scores check out")

    # ------------------------------------------------------------------
    # Gap families and sampling counts.
    sep, mos_obj = op.separate_gap(10)
    close(sep, 0.05, 1e-15)
    close(mos_obj, 0.5 * (1.0 - 0.9**10), 1e-12)
    mean_opt, full_lower = op.mean_vs_full_gap(0.1)
    close(mean_opt, 0.14, 1e-12)
    close(full_lower, 0.5, 1e-15)
    assert op.sample_count(0.1, 0.05, 4) == 439
    close(op.maxmin_quadratic_value(0.25), 0.0625, 1e-15)
    close(op.pi_upper_bound(0.1), 0.08 / 0.36, 1e-12)
    print(f"gaps: separate {sep} vs mos {mos_obj:.6f}; mean {mean_opt} vs full {full_lower}")

    # ------------------------------------------------------------------
    # Reductions and properness checks.
    three = op.FiniteDistribution([0.0, 0.5, 1.0], [1 / 3, 1 / 3, 1 / 3])
    reduced = three.two_point_reduction()
    assert len(reduced) == 2
    close(reduced.support[1][0], 0.75, 1e-12)
    close(reduced.opt_value(), three.opt_value(), 1e-12)

    reports = [[k / 20] for k in range(21)]
    beliefs = [op.FiniteDistribution([0.0, 1.0], [1 - p, p]) for p in (0.1, 0.5, 0.9)]
    proper, worst = op.quadratic_rule().verify_proper(reports, beliefs)
    assert proper, f"quadratic rule flagged improper ({worst})"
    print("reductions and properness checks pass")

    # ------------------------------------------------------------------
    # Full-distribution elicitation via the indicator encoding.
    full = op.optimal_full_dist([[1.0, 0.0], [0.0, 1.0]], [0.5, 0.5], 1.0)
    close(full.objective, 0.5, 1e-7)
    print(f"full-distribution optimum on point-mass posteriors: {full.objective:.6f}")

    # error paths surface as ValueError
    try:
        op.FiniteDistribution([0.0, 1.0], [0.6, 0.6])
    except ValueError:
        pass
    else:
        raise AssertionError("bad probabilities must raise")

    assert math.isclose(op.v_shape_objective(0.5, -1.0, 1.0, extremes), 0.5, abs_tol=1e-12)

    print("smoke test passed")


if __name__ == "__main__":
    main()
