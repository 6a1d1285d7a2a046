"""Acceptance suite: every release criterion, one test each.

Each test prints one `[PASS]`/`[FAIL]` line (visible under `pytest -s`)
and asserts the criterion at its stated tolerance and runtime budget.
Shared heavy computations are cached at module scope so the band and
determinant criteria reuse one 100-seed ensemble.
"""

import time

import numpy as np
import pytest

from grouprisk.bounds import bound_exponent
from grouprisk.cli import primitive_set_max_gap
from grouprisk.estimators import accumulate_gram, fit_cmni, fit_gd, fit_ridge, interpolation_residual
from grouprisk.harness import SweepAxis, SweepSpec, preset, run_sweep
from grouprisk.model import ModelConfig, sample_dataset
from grouprisk.primitives import (
    build_decomposition,
    check_aux_inequalities,
    compute_primitives,
    risk_identity_check,
    verify_primitive_bounds,
    wishart_coverage,
    woodbury_invert,
)


def e1(scale, length):
    v = np.zeros(length)
    v[0] = scale
    return v


def grid_config(n, d, seed, **overrides):
    """Canonical test instance at total size (n, d): 4:1 split, block means."""
    half = d // 2
    base = dict(
        d_core=half,
        d_spur=d - half,
        mu_core=e1(np.sqrt(d / 10.0), half),
        mu_spur=e1(np.sqrt(d / 40.0), d - half),
        n_plus=n - max(1, n // 5),
        n_minus=max(1, n // 5),
        delta_plus=0.9,
        delta_minus=0.3,
        seed=seed,
    )
    base.update(overrides)
    return ModelConfig(**base)


def report(num, ok, detail):
    marker = "PASS" if ok else "FAIL"
    print(f"[{marker}] criterion {num}: {detail}")
    return ok


GRID = [(20, 400), (50, 2000)]
TAUS = (0.0, 1.0, 100.0)
N_SEEDS = 20

_band_cache = {}


def band_regime_ensemble():
    """100-seed primitive ensemble at n=30, d=30000, |mu_c|^2 = 9000.

    Returns {tau: [(BandReport, det_a), ...]} and the elapsed wall time.
    """
    if _band_cache:
        return _band_cache["data"], _band_cache["elapsed"]
    start = time.time()
    data = {}
    for tau in (0.0, 30_000.0):
        entries = []
        for seed in range(100):
            cfg = ModelConfig(
                d_core=15_000,
                d_spur=15_000,
                mu_core=e1(np.sqrt(9000.0), 15_000),
                mu_spur=np.zeros(15_000),
                n_plus=24,
                n_minus=6,
                tau=tau,
                seed=seed,
            )
            ds = sample_dataset(cfg)
            prims = compute_primitives(ds, mode="recursive")
            entries.append((verify_primitive_bounds(prims, cfg), prims.det_a.copy()))
        data[tau] = entries
    elapsed = time.time() - start
    _band_cache["data"] = data
    _band_cache["elapsed"] = elapsed
    return data, elapsed


class TestRecursionMachinery:
    def test_criterion_01_woodbury_equivalence(self):
        start = time.time()
        worst = 0.0
        for n, d in GRID:
            for tau in TAUS:
                for seed in range(N_SEEDS):
                    ds = sample_dataset(grid_config(n, d, seed))
                    dec = build_decomposition(ds, tau=tau)
                    recursive = woodbury_invert(dec)[2]
                    dense = np.linalg.inv(ds.X @ ds.X.T + tau * np.eye(n))
                    rel = np.linalg.norm(recursive - dense) / np.linalg.norm(dense)
                    worst = max(worst, rel)
        elapsed = time.time() - start
        ok = worst <= 1e-8 and elapsed < 30.0
        assert report(
            1, ok, f"recursive vs dense inverse, max rel error {worst:.3e}, {elapsed:.1f}s"
        )

    def test_criterion_02_mode_equivalence(self):
        start = time.time()
        worst = 0.0
        for n, d in GRID:
            for tau in TAUS:
                for seed in range(N_SEEDS):
                    ds = sample_dataset(grid_config(n, d, seed))
                    direct = compute_primitives(ds, tau=tau, mode="direct")
                    recursive = compute_primitives(ds, tau=tau, mode="recursive")
                    worst = max(worst, primitive_set_max_gap(direct, recursive))
        elapsed = time.time() - start
        ok = worst <= 1e-8 and elapsed < 60.0
        assert report(
            2, ok, f"direct vs recursive primitives, max rel gap {worst:.3e}, {elapsed:.1f}s"
        )

    def test_criterion_03_risk_identity(self):
        start = time.time()
        worst = 0.0
        for n, d in GRID:
            for tau in (0.0, 5.0):
                for deltas in ((1.0, 1.0), (None, None)):
                    for seed in range(5):
                        if deltas[0] is None:
                            cfg = grid_config(n, d, seed)
                            cfg = cfg.with_updates(
                                delta_plus=cfg.n_plus / cfg.n,
                                delta_minus=cfg.n_minus / cfg.n,
                                tau=tau,
                            )
                        else:
                            cfg = grid_config(
                                n, d, seed, delta_plus=deltas[0], delta_minus=deltas[1], tau=tau
                            )
                        ds = sample_dataset(cfg)
                        stats = accumulate_gram(ds)
                        sol = fit_ridge(stats, cfg.deltas, (ds.y, ds.a, ds.b), tau)
                        prims = compute_primitives(ds, mode="direct")
                        for b in (+1, -1):
                            worst = max(worst, risk_identity_check(prims, sol, cfg, b))
        elapsed = time.time() - start
        ok = worst <= 1e-8 and elapsed < 30.0
        assert report(
            3, ok, f"margin identity via adjusted primitives, max rel error {worst:.3e}, {elapsed:.1f}s"
        )


class TestEstimatorContracts:
    def test_criterion_04_interpolation(self):
        worst_resid = 0.0
        worst_dual = 0.0
        for n, d in GRID:
            for seed in range(N_SEEDS):
                cfg = grid_config(n, d, seed)
                ds = sample_dataset(cfg)
                stats = accumulate_gram(ds)
                labels = (ds.y, ds.a, ds.b)
                sol = fit_cmni(stats, cfg.deltas, labels)
                worst_resid = max(
                    worst_resid, interpolation_residual(sol, stats, cfg.deltas, labels)
                )
                ridge0 = fit_ridge(stats, cfg.deltas, labels, tau=0.0)
                worst_dual = max(
                    worst_dual,
                    float(np.linalg.norm(ridge0.c - sol.c) / np.linalg.norm(sol.c)),
                )
        ok = worst_resid <= 1e-8 and worst_dual <= 1e-10
        assert report(
            4,
            ok,
            f"constraint residual {worst_resid:.3e}, ridge(0) vs direct dual gap {worst_dual:.3e}",
        )

    def test_criterion_05_gradient_descent_limit(self):
        start = time.time()
        cfg = grid_config(20, 400, seed=0)
        ds = sample_dataset(cfg)
        stats = accumulate_gram(ds)
        labels = (ds.y, ds.a, ds.b)
        direct = fit_cmni(stats, cfg.deltas, labels)
        gd = fit_gd(ds, cfg.deltas, iters=100_000, stats=stats, labels=labels)
        rel = float(np.linalg.norm(gd.c - direct.c) / np.linalg.norm(direct.c))
        elapsed = time.time() - start
        ok = rel <= 1e-4 and gd.info["iters"] <= 100_000 and elapsed < 60.0
        assert report(
            5,
            ok,
            f"gd dual error {rel:.3e} after {gd.info['iters']} iterations, {elapsed:.1f}s",
        )


class TestConcentration:
    def test_criterion_06_wishart_coverage(self):
        start = time.time()
        rep = wishart_coverage(d=1000, n=10, t=4.6, draws=1000, seed=0)
        elapsed = time.time() - start
        ok = rep["passed"] and elapsed < 60.0
        assert report(
            6,
            ok,
            f"coverage {rep['fraction']:.4f} vs threshold {rep['threshold']:.4f}, {elapsed:.1f}s",
        )

    def test_criterion_07_primitive_rate_bands(self):
        data, elapsed = band_regime_ensemble()
        counts = {}
        for tau, entries in data.items():
            diag_pass = 0
            cross_pass = 0
            for band_report, _ in entries:
                diag_rows = [r for r in band_report.rows if r.band_low == 0.5]
                cross_rows = [r for r in band_report.rows if r.band_low == -2.0]
                diag_pass += all(r.passed for r in diag_rows)
                cross_pass += all(r.passed for r in cross_rows)
            counts[tau] = (diag_pass, cross_pass)
        ok = all(d >= 99 and c >= 99 for d, c in counts.values()) and elapsed < 300.0
        detail = ", ".join(
            f"tau={tau:g}: {d}/100 diagonal, {c}/100 cross" for tau, (d, c) in counts.items()
        )
        assert report(7, ok, f"{detail}, ensemble built in {elapsed:.1f}s")

    def test_criterion_08_det_band(self):
        data, _ = band_regime_ensemble()
        in_band = 0
        total = 0
        worst = (np.inf, -np.inf)
        for entries in data.values():
            for _, det_a in entries:
                total += 1
                in_band += bool(np.all((det_a >= 0.5) & (det_a <= 2.0)))
                worst = (min(worst[0], det_a.min()), max(worst[1], det_a.max()))
        ok = in_band == total
        assert report(
            8,
            ok,
            f"{in_band}/{total} seeds with det in [0.5, 2], observed range [{worst[0]:.3f}, {worst[1]:.3f}]",
        )


class TestFigureLevel:
    def test_criterion_09_weight_sweep_trends(self):
        start = time.time()
        rows, skips = run_sweep(preset("fig1_left", seed=0, trials=10))
        elapsed = time.time() - start
        assert not skips
        share = 0.05  # n_minus / n
        ordered = sorted(rows, key=lambda r: -r.axis_value)
        to_share = [r for r in ordered if r.axis_value >= share - 1e-12]
        minority = [r.risk_minus_mean for r in to_share]
        violations = sum(
            1 for prev, cur in zip(minority, minority[1:]) if cur > prev + 1e-12
        )
        monotone_ok = violations <= 1

        argmin_row = min(rows, key=lambda r: r.worst_mean)
        argmin_ok = share / 2.0 <= argmin_row.axis_value <= share * 2.0

        at_share = next(r for r in ordered if abs(r.axis_value - share) < 1e-9)
        below = [r for r in ordered if r.axis_value < share - 1e-12]
        majority_ok = all(r.risk_plus_mean > at_share.risk_plus_mean for r in below)

        ok = monotone_ok and argmin_ok and majority_ok and elapsed <= 900.0
        assert report(
            9,
            ok,
            (
                f"minority monotone violations {violations}, worst argmin at "
                f"{argmin_row.axis_value:.4f} (target 0.05 within 2x), majority blowup "
                f"below share {majority_ok}, {elapsed:.1f}s"
            ),
        )

    def test_criterion_10_signal_thresholds(self):
        start = time.time()
        outcomes = []
        left = preset("fig2_left", seed=0, trials=10)
        spec_left = SweepSpec(
            base=left.base,
            axis=SweepAxis("r_plus_sq", (500.0,)),  # d/n
            methods=left.methods,
            trials=10,
            outputs=("risk",),
            name="threshold_left",
        )
        rows, _ = run_sweep(spec_left)
        outcomes.append(("identity weights at d/n: majority", rows[0].risk_plus_mean, "<=", 0.05))
        outcomes.append(("identity weights at d/n: minority", rows[0].risk_minus_mean, ">=", 0.10))

        right = preset("fig2_right", seed=0, trials=10)
        spec_right = SweepSpec(
            base=right.base,
            axis=SweepAxis("r_plus_sq", (100_000.0,)),  # 10 d / n_minus
            methods=right.methods,
            trials=10,
            outputs=("risk",),
            name="threshold_right",
        )
        rows, _ = run_sweep(spec_right)
        outcomes.append(("share weights at 10d/n_minus: majority", rows[0].risk_plus_mean, "<=", 0.05))
        outcomes.append(("share weights at 10d/n_minus: minority", rows[0].risk_minus_mean, "<=", 0.05))

        elapsed = time.time() - start
        checks = [
            value <= limit if op == "<=" else value >= limit
            for _, value, op, limit in outcomes
        ]
        ok = all(checks) and elapsed <= 1200.0
        detail = "; ".join(
            f"{label} {value:.4f} {op} {limit}" for (label, value, op, limit) in outcomes
        )
        assert report(10, ok, f"{detail}, {elapsed:.1f}s")

    def test_criterion_11_bound_tightness_band(self):
        start = time.time()
        spec = preset("fig2_right", seed=0, trials=10)
        spec = SweepSpec(
            base=spec.base,
            axis=spec.axis,
            methods=spec.methods,
            trials=10,
            outputs=("risk", "bounds", "tightness"),
            name=spec.name,
        )
        rows, _ = run_sweep(spec)
        ratios = []
        for row in rows:
            for e_mean, t_mean in (
                (row.e_plus_mean, row.tightness_plus_mean),
                (row.e_minus_mean, row.tightness_minus_mean),
            ):
                if e_mean is not None and 1.0 <= e_mean <= 30.0 and t_mean is not None:
                    ratios.append(t_mean)
        elapsed = time.time() - start
        spread = max(ratios) / min(ratios) if ratios else np.inf
        ok = bool(ratios) and spread <= 10.0
        assert report(
            11,
            ok,
            f"{len(ratios)} in-window ratios spanning [{min(ratios):.3f}, {max(ratios):.3f}], "
            f"max/min {spread:.2f}, {elapsed:.1f}s",
        )


class TestFormulaLevel:
    def test_criterion_12_aux_inequalities(self):
        start = time.time()
        count_cap_ok = True
        for n in (10, 100, 1000):
            n_minus = max(1, n // 10)
            cfg = ModelConfig(
                d_core=n,
                d_spur=n,
                mu_core=e1(4.0 * np.sqrt(n), n),
                mu_spur=e1(np.sqrt(n), n),
                n_plus=n - n_minus,
                n_minus=n_minus,
            )
            grid = np.geomspace(1.0 / n, 1.0, 8)
            for dp in grid:
                for dm in grid:
                    if dm > dp:
                        continue
                    rep = check_aux_inequalities(
                        cfg.with_updates(delta_plus=float(dp), delta_minus=float(dm))
                    )
                    count_cap_ok = count_cap_ok and rep.count_cap_ok

        margin_floor_ok = True
        n = 120
        for n_minus in (12, 30, 60):  # alpha = 0.1, 0.25, 0.5
            cfg = ModelConfig(
                d_core=200,
                d_spur=200,
                mu_core=e1(9.0, 200),
                mu_spur=e1(3.0, 200),
                n_plus=n - n_minus,
                n_minus=n_minus,
            )
            rep = check_aux_inequalities(cfg)
            alpha = n_minus / n
            expected_floor = np.sqrt(alpha) * 9.0 / 2.0
            margin_floor_ok = (
                margin_floor_ok
                and rep.margin_floor_ok
                and rep.margin_floor_realized >= expected_floor - 1e-12
            )
        elapsed = time.time() - start
        ok = count_cap_ok and margin_floor_ok and elapsed < 5.0
        assert report(
            12,
            ok,
            f"count cap holds on the weight grid {count_cap_ok}, margin floor holds {margin_floor_ok}, {elapsed:.1f}s",
        )
