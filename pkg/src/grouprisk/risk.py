"""Group-wise generalization error, exact and Monte-Carlo.

A fitted direction w_hat misclassifies a fresh group-b sample with
probability Q(w_hat' mu_b / |w_hat|), where Q is the standard Gaussian
upper tail.  Everything here consumes dual statistics only: the margin
ratio needs just w_hat' mu_b and |w_hat|^2, both carried by DualSolution.

Tail bounds exposed alongside the exact Q:

    upper:     Q(x) <= exp(-x^2 / 2)                     (x >= 0)
    certified: Q(x) >= (1/4) exp(-x^2)                   (x >= 0)
    Mills:     Q(x) >= x / (1 + x^2) * phi(x)            (x >= 0)
    two-term:  (1/12) exp(-x^2/2) + (1/4) exp(-2 x^2/3)  upper only for
               x >= 0.78; below that it dips under Q (checked on a grid,
               not assumed).

The certified pair (upper, (1/4) exp(-x^2)) is what q_bounds returns; the
worst grid ratio Q(x) / lower on [0, 6] is about 1.57 at x ~ 0.65, so the
constant pair (C, c) = (1/4, 1) holds with margin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .model import ModelConfig, philox_generator, substream_seed, STREAM_MC

__all__ = [
    "GroupRiskEntry",
    "RiskReport",
    "q_function",
    "q_bounds",
    "q_lower_mills",
    "q_upper_two_term",
    "TWO_TERM_VALID_FROM",
    "group_risk",
    "worst_and_average",
    "monte_carlo_risk",
    "build_report",
]

_SQRT2 = np.sqrt(2.0)

# Smallest x (to 1e-2) at which the two-term expression is still an upper
# bound on Q; verified numerically in the test suite.
TWO_TERM_VALID_FROM = 0.78


@dataclass(frozen=True)
class GroupRiskEntry:
    """Margin ratio, exponent, and exact risk of one group."""

    b: int
    margin: float
    exponent: float
    risk: float

    def to_dict(self) -> dict:
        return {
            "b": self.b,
            "margin": self.margin,
            "exponent": self.exponent,
            "risk": self.risk,
        }


@dataclass(frozen=True)
class RiskReport:
    """Per-group margins, exponents, and risks with the two aggregates.

    Per-group maps are keyed by b in {+1, -1}.  mc_risk, when present,
    maps b to (estimate, standard error).
    """

    margin: dict
    exponent: dict
    risk: dict
    worst_risk: float
    avg_risk: float
    mc_risk: dict | None = None

    def to_dict(self) -> dict:
        out = {
            "margin_plus": self.margin[+1],
            "margin_minus": self.margin[-1],
            "exponent_plus": self.exponent[+1],
            "exponent_minus": self.exponent[-1],
            "risk_plus": self.risk[+1],
            "risk_minus": self.risk[-1],
            "worst_risk": self.worst_risk,
            "avg_risk": self.avg_risk,
        }
        if self.mc_risk is not None:
            for b, tag in ((+1, "plus"), (-1, "minus")):
                out[f"mc_risk_{tag}"], out[f"mc_stderr_{tag}"] = self.mc_risk[b]
        return out


def q_function(x):
    """Standard Gaussian upper tail Q(x) = P(N(0,1) > x), to ~1e-16 relative."""
    return 0.5 * erfc(np.asarray(x, dtype=np.float64) / _SQRT2)


def _require_nonnegative(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 0.0):
        raise ValueError("tail bounds are defined for x >= 0 only")
    return x


def q_bounds(x):
    """Certified envelope for x >= 0: exp(-x^2/2) above, (1/4) exp(-x^2) below."""
    x = _require_nonnegative(x)
    upper = np.exp(-0.5 * x * x)
    lower = 0.25 * np.exp(-x * x)
    return upper, lower


def q_lower_mills(x):
    """Mills-ratio lower bound x/(1+x^2) * phi(x), valid for x >= 0."""
    x = _require_nonnegative(x)
    phi = np.exp(-0.5 * x * x) / np.sqrt(2.0 * np.pi)
    return x / (1.0 + x * x) * phi


def q_upper_two_term(x):
    """Two-term exponential upper bound (1/12)e^{-x^2/2} + (1/4)e^{-2x^2/3}.

    Only an upper bound for x >= TWO_TERM_VALID_FROM; raises below that.
    """
    x = _require_nonnegative(x)
    if np.any(x < TWO_TERM_VALID_FROM):
        raise ValueError(
            f"two-term bound only valid for x >= {TWO_TERM_VALID_FROM}"
        )
    return np.exp(-0.5 * x * x) / 12.0 + 0.25 * np.exp(-2.0 * x * x / 3.0)


def group_risk(sol, config: ModelConfig, b: int) -> GroupRiskEntry:
    """Exact risk of group b: Q(w_hat' mu_b / |w_hat|) from dual statistics."""
    if b not in (1, -1):
        raise ValueError("b must be +1 or -1")
    if not sol.w_norm_sq > 0.0:
        raise ValueError("estimator has zero norm; margin undefined")
    dot = sol.w_dot_mu[0] if b == 1 else sol.w_dot_mu[1]
    margin = dot / np.sqrt(sol.w_norm_sq)
    return GroupRiskEntry(
        b=b,
        margin=float(margin),
        exponent=float(0.5 * margin * margin),
        risk=float(q_function(margin)),
    )


def worst_and_average(reports, config: ModelConfig | None = None, weights=None):
    """(max risk, weighted-average risk) over the two group entries.

    Default weights are the training proportions (n_plus/n, n_minus/n),
    which needs config; custom (w_plus, w_minus) are normalized to sum 1.
    reports is either an iterable of group entries or a {b: risk} mapping.
    """
    if isinstance(reports, dict):
        by_b = {int(b): GroupRiskEntry(b=int(b), margin=np.nan, exponent=np.nan, risk=float(r))
                for b, r in reports.items()}
    else:
        by_b = {r.b: r for r in reports}
    if set(by_b) != {1, -1}:
        raise ValueError("need exactly one entry per group b in {+1, -1}")
    if weights is None:
        if config is None:
            raise ValueError("pass config for default weights, or explicit weights")
        weights = (config.n_plus / config.n, config.n_minus / config.n)
    w_plus, w_minus = float(weights[0]), float(weights[1])
    if w_plus < 0 or w_minus < 0 or w_plus + w_minus <= 0:
        raise ValueError("weights must be nonnegative and not both zero")
    total = w_plus + w_minus
    worst = max(by_b[1].risk, by_b[-1].risk)
    average = (w_plus * by_b[1].risk + w_minus * by_b[-1].risk) / total
    return worst, average


def monte_carlo_risk(sol, config: ModelConfig, b: int, m: int, seed=None):
    """Empirical error rate on m fresh group-b samples, with standard error.

    For x drawn from group b with label y, the classification margin is
    y w_hat' x = w_hat' mu_b + y w_hat' z, and y w_hat' z / |w_hat| is a
    standard normal whatever y is, so the label marginalizes out exactly
    and one scalar Gaussian per sample suffices.
    """
    if b not in (1, -1):
        raise ValueError("b must be +1 or -1")
    if m < 1:
        raise ValueError("m must be at least 1")
    if not sol.w_norm_sq > 0.0:
        raise ValueError("estimator has zero norm; margin undefined")
    dot = sol.w_dot_mu[0] if b == 1 else sol.w_dot_mu[1]
    margin = float(dot / np.sqrt(sol.w_norm_sq))
    base = config.seed if seed is None else seed
    rng = philox_generator(substream_seed(base, 0 if b == 1 else 1), STREAM_MC)
    errors = 0
    left = int(m)
    while left > 0:
        k = min(left, 10_000_000)
        g = rng.standard_normal(k)
        errors += int(np.count_nonzero(margin + g < 0.0))
        left -= k
    rate = errors / m
    std_err = float(np.sqrt(rate * (1.0 - rate) / m))
    return rate, std_err


def build_report(
    sol,
    config: ModelConfig,
    weights=None,
    mc_draws: int | None = None,
    seed=None,
) -> RiskReport:
    """Assemble the full two-group report from one fitted solution."""
    entries = [group_risk(sol, config, b) for b in (+1, -1)]
    worst, average = worst_and_average(entries, config=config, weights=weights)
    mc = None
    if mc_draws is not None:
        mc = {
            b: monte_carlo_risk(sol, config, b, mc_draws, seed=seed)
            for b in (+1, -1)
        }
    by_b = {e.b: e for e in entries}
    return RiskReport(
        margin={b: by_b[b].margin for b in (+1, -1)},
        exponent={b: by_b[b].exponent for b in (+1, -1)},
        risk={b: by_b[b].risk for b in (+1, -1)},
        worst_risk=worst,
        avg_risk=average,
        mc_risk=mc,
    )
