"""Exact group risks, a Monte Carlo cross-check, and the matching bounds.

Fits the cost-sensitive interpolator on a wide mixture whose core and
spurious energies are equal (R_minus = 0), reads off the exact per-group
risks, confirms one of them empirically, and compares against the
exponential upper/lower envelope built from the adjusted sample sizes.

Run:  python3 demos/risk_and_bounds.py
"""

import numpy as np

from grouprisk import (
    ModelConfig,
    accumulate_gram,
    build_report,
    consistency_check,
    evaluate_bounds,
    fit_cmni,
    sample_labels,
    signal_strengths,
    tightness_ratio,
)

SEED = 11
MC_DRAWS = 400_000


def e1(scale, length):
    v = np.zeros(length)
    v[0] = scale
    return v


def main():
    # d >> n and R_minus = 0: the consistency condition applies verbatim
    cfg = ModelConfig(
        d_core=50_000,
        d_spur=50_000,
        mu_core=e1(np.sqrt(125.0), 50_000),
        mu_spur=e1(np.sqrt(125.0), 50_000),
        n_plus=190,
        n_minus=10,
        delta_plus=0.95,
        delta_minus=0.05,
        seed=SEED,
    )
    sig = signal_strengths(cfg)
    print(f"d = {cfg.d}, n = {cfg.n} ({cfg.n_plus}/{cfg.n_minus}), "
          f"R_plus = {sig.r_plus:.1f}, R_minus = {sig.r_minus:.1f}")

    # streamed gram accumulation; X is never materialized at this width
    stats = accumulate_gram(cfg)
    labels = sample_labels(cfg)
    sol = fit_cmni(stats, cfg.deltas, labels)

    report = build_report(sol, cfg, mc_draws=MC_DRAWS)
    print("\nexact risks from the fitted margin:")
    for b in (+1, -1):
        tag = "majority" if b > 0 else "minority"
        print(f"  {tag}: margin = {report.margin[b]:8.4f},  "
              f"risk = {report.risk[b]:.3e}")
    print(f"  worst = {report.worst_risk:.3e}, "
          f"train-weighted average = {report.avg_risk:.3e}")

    print(f"\nMonte Carlo on {MC_DRAWS} fresh draws per group:")
    for b in (+1, -1):
        rate, se = report.mc_risk[b]
        gap = abs(rate - report.risk[b])
        print(f"  b = {b:+d}: rate = {rate:.3e} (se {se:.1e}), "
              f"|rate - exact| = {gap:.1e}")

    bound = evaluate_bounds(cfg)
    print("\nexponential envelope from the adjusted counts:")
    print(f"  n_delta = {bound.n_delta:.1f}, alpha_plus = {bound.alpha_plus:.4f}")
    for b in (+1, -1):
        print(f"  b = {b:+d}: E = {bound.exponent[b]:.4f}, "
              f"upper = {bound.upper[b]:.3e}, lower = {bound.lower[b]:.3e}")

    # the realized exponent sits a constant factor from E_b
    print("\nempirical exponent / bound exponent:")
    for b in (+1, -1):
        print(f"  b = {b:+d}: ratio = {tightness_ratio(sol, cfg, b):.3f}")

    res = consistency_check(cfg, -1)
    print(f"\nminority consistency condition: applicable = {res.applicable}, "
          f"holds = {res.holds}, slack = {res.slack:.3f}")


if __name__ == "__main__":
    main()
