"""Experiment sweeps and result persistence.

A sweep walks one named axis, derives a full config at each value, runs
`trials` seeded repetitions of every method, and aggregates per-group
risks, margin exponents, bound exponents, and tightness ratios into rows.

Axes:

    delta_minus   vary the minority adjustment weight only
    r_plus_sq     vary the squared total signal strength; means are
                  rebuilt as mu_c = mu_s = sqrt(R_plus/2) e_1
    n_coupled     vary n with the coupled rule d = 2 n^2,
                  n_minus = round(0.04 n), Delta_pm = n_pm / n,
                  R_plus = d^0.6 / 4, means split evenly on e_1

Trial i reseeds the config with seed XOR i.  Along delta_minus and
r_plus_sq the noise matrix and labels do not depend on the axis value, so
each trial streams the noise once into (Q Q', Q u_c, Q u_s) and assembles
every Gram matrix from those parts in O(n^2); n_coupled rebuilds per
value.  Rows are aggregated in trial order and CSV output is
byte-deterministic for a fixed seed; the JSON format carries run metadata
including a timestamp, so only its `rows` payload is stable.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from .bounds import bound_exponent
from .estimators import GramStats, fit_cmni, fit_ridge, x_mu_from_parts
from .model import ModelConfig, embed_means, noise_blocks, sample_labels, substream_seed
from .primitives import compute_primitives, decomposition_from_parts, verify_primitive_bounds
from .risk import group_risk, worst_and_average

__all__ = [
    "SweepAxis",
    "SweepSpec",
    "SweepRow",
    "CSV_COLUMNS",
    "PRESET_NAMES",
    "derive_config",
    "resolve_tau",
    "run_sweep",
    "preset",
    "emit",
]

AXIS_NAMES = ("delta_minus", "r_plus_sq", "n_coupled")
_CACHED_AXES = ("delta_minus", "r_plus_sq")
OUTPUT_NAMES = ("risk", "bounds", "primitives", "tightness")
PRESET_NAMES = ("fig1_left", "fig1_right", "fig2_left", "fig2_right")

CSV_COLUMNS = [
    "run_id",
    "axis_value",
    "method",
    "tau",
    "trials",
    "risk_plus_mean",
    "risk_plus_std",
    "risk_minus_mean",
    "risk_minus_std",
    "worst_mean",
    "worst_std",
    "average_mean",
    "average_std",
    "exponent_plus_mean",
    "exponent_plus_std",
    "exponent_minus_mean",
    "exponent_minus_std",
    "e_plus_mean",
    "e_plus_std",
    "e_minus_mean",
    "e_minus_std",
    "tightness_plus_mean",
    "tightness_plus_std",
    "tightness_minus_mean",
    "tightness_minus_std",
    "primitive_pass_frac",
]


@dataclass(frozen=True)
class SweepAxis:
    name: str
    values: tuple

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ValueError(f"unknown axis {self.name!r}; choose from {AXIS_NAMES}")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not self.values:
            raise ValueError("axis needs at least one value")


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: base config, axis, methods, trial count, outputs."""

    base: ModelConfig
    axis: SweepAxis
    methods: tuple = (("cmni", None),)
    trials: int = 1
    outputs: tuple = ("risk", "bounds")
    out_path: str | None = None
    name: str = "sweep"

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        methods = []
        for entry in self.methods:
            mname, tau = entry
            if mname not in ("cmni", "ridge"):
                raise ValueError(f"unknown method {mname!r}")
            if mname == "cmni" and tau not in (None, 0, 0.0):
                raise ValueError("cmni takes no tau")
            methods.append((mname, tau))
        object.__setattr__(self, "methods", tuple(methods))
        outputs = tuple(self.outputs)
        unknown = set(outputs) - set(OUTPUT_NAMES)
        if unknown:
            raise ValueError(f"unknown outputs: {sorted(unknown)}")
        object.__setattr__(self, "outputs", outputs)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "base": self.base.to_dict(),
            "axis": {"name": self.axis.name, "values": list(self.axis.values)},
            "methods": [
                {"method": m} if t is None else {"method": m, "tau": t}
                for m, t in self.methods
            ],
            "trials": self.trials,
            "outputs": list(self.outputs),
            "out_path": self.out_path,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SweepSpec":
        methods = tuple(
            (entry["method"], entry.get("tau")) for entry in data.get("methods", [])
        ) or (("cmni", None),)
        return cls(
            base=ModelConfig.from_dict(data["base"]),
            axis=SweepAxis(data["axis"]["name"], tuple(data["axis"]["values"])),
            methods=methods,
            trials=int(data.get("trials", 1)),
            outputs=tuple(data.get("outputs", ("risk", "bounds"))),
            out_path=data.get("out_path"),
            name=data.get("name", "sweep"),
        )


@dataclass(frozen=True)
class SweepRow:
    run_id: str
    axis_value: float
    method: str
    tau: float
    trials: int
    risk_plus_mean: float
    risk_plus_std: float
    risk_minus_mean: float
    risk_minus_std: float
    worst_mean: float
    worst_std: float
    average_mean: float
    average_std: float
    exponent_plus_mean: float
    exponent_plus_std: float
    exponent_minus_mean: float
    exponent_minus_std: float
    e_plus_mean: float | None = None
    e_plus_std: float | None = None
    e_minus_mean: float | None = None
    e_minus_std: float | None = None
    tightness_plus_mean: float | None = None
    tightness_plus_std: float | None = None
    tightness_minus_mean: float | None = None
    tightness_minus_std: float | None = None
    primitive_pass_frac: float | None = None

    def to_dict(self) -> dict:
        return {col: getattr(self, col) for col in CSV_COLUMNS}

    def to_csv_values(self) -> list[str]:
        out = []
        for col in CSV_COLUMNS:
            v = getattr(self, col)
            if v is None:
                out.append("")
            elif isinstance(v, str):
                out.append(v)
            elif isinstance(v, int):
                out.append(str(v))
            else:
                out.append(repr(float(v)))
        return out


def _e1_mean(scale: float, length: int) -> np.ndarray:
    v = np.zeros(length)
    v[0] = scale
    return v


def derive_config(base: ModelConfig, axis_name: str, value) -> ModelConfig:
    """Materialize the config at one axis value (see module docstring)."""
    if axis_name == "delta_minus":
        return base.with_updates(delta_minus=float(value))
    if axis_name == "r_plus_sq":
        r_sq = float(value)
        if r_sq <= 0:
            raise ValueError("r_plus_sq must be positive")
        scale = np.sqrt(np.sqrt(r_sq) / 2.0)
        return base.with_updates(
            mu_core=_e1_mean(scale, base.d_core),
            mu_spur=_e1_mean(scale, base.d_spur),
        )
    if axis_name == "n_coupled":
        n = int(value)
        if n != value:
            raise ValueError("n_coupled axis values must be integers")
        if n < 2:
            raise ValueError("n must be at least 2")
        n_minus = max(1, round(0.04 * n))
        n_plus = n - n_minus
        d = 2 * n * n
        scale = np.sqrt(d**0.6 / 4.0 / 2.0)
        d_core = (d + 1) // 2
        return base.with_updates(
            d_core=d_core,
            d_spur=d - d_core,
            mu_core=_e1_mean(scale, d_core),
            mu_spur=_e1_mean(scale, d - d_core),
            n_plus=n_plus,
            n_minus=n_minus,
            delta_plus=n_plus / n,
            delta_minus=n_minus / n,
        )
    raise ValueError(f"unknown axis {axis_name!r}")


def resolve_tau(tau_spec, config: ModelConfig) -> float:
    """Resolve a tau entry: a number, None (0), 'd', or 'd/<number>'."""
    if tau_spec is None:
        return 0.0
    if isinstance(tau_spec, str):
        text = tau_spec.strip()
        if text == "d":
            return float(config.d)
        if text.startswith("d/"):
            try:
                divisor = float(text[2:])
            except ValueError:
                divisor = 0.0
            if divisor <= 0:
                raise ValueError(f"cannot resolve tau spec {tau_spec!r}")
            return config.d / divisor
        raise ValueError(f"cannot resolve tau spec {tau_spec!r}")
    tau = float(tau_spec)
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    return tau


@dataclass(eq=False)
class _TrialParts:
    """Noise-level sufficient statistics of one (seed, shape) draw."""

    y: np.ndarray
    a: np.ndarray
    b: np.ndarray
    gram_0: np.ndarray
    q_core: np.ndarray  # Q times the unit core direction (0 if mean is 0)
    q_spur: np.ndarray


def _unit_direction(vec: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(vec)
    return vec / norm if norm > 0 else np.zeros_like(vec)


def noise_parts(config: ModelConfig, block_cols: int = 4096) -> _TrialParts:
    """Stream the noise once into (labels, Q Q', Q u_core, Q u_spur)."""
    y, a, b = sample_labels(config)
    mu_bar_c, mu_bar_s = embed_means(config)
    u_c = _unit_direction(mu_bar_c)
    u_s = _unit_direction(mu_bar_s)
    n = config.n
    gram_0 = np.zeros((n, n))
    q_core = np.zeros(n)
    q_spur = np.zeros(n)
    for j0, blk in noise_blocks(config, block_cols):
        j1 = j0 + blk.shape[1]
        gram_0 += blk @ blk.T
        q_core += blk @ u_c[j0:j1]
        q_spur += blk @ u_s[j0:j1]
    gram_0 = 0.5 * (gram_0 + gram_0.T)
    return _TrialParts(y=y, a=a, b=b, gram_0=gram_0, q_core=q_core, q_spur=q_spur)


def stats_from_parts(config: ModelConfig, parts: _TrialParts) -> GramStats:
    """Assemble GramStats for `config`'s means from cached noise parts."""
    mc = float(np.linalg.norm(config.mu_core))
    ms = float(np.linalg.norm(config.mu_spur))
    y, a = parts.y, parts.a
    d_1 = ms * parts.q_spur
    d_2 = mc * parts.q_core
    gram = (
        parts.gram_0
        + mc * mc * np.outer(y, y)
        + np.outer(y, d_2)
        + np.outer(d_2, y)
        + ms * ms * np.outer(a, a)
        + np.outer(a, d_1)
        + np.outer(d_1, a)
    )
    gram = 0.5 * (gram + gram.T)
    return GramStats(
        gram=gram,
        x_mu_plus=x_mu_from_parts(config, y, a, d_1, d_2, +1),
        x_mu_minus=x_mu_from_parts(config, y, a, d_1, d_2, -1),
        d_1=d_1,
        d_2=d_2,
    )


def _stat_pair(values) -> tuple[float, float]:
    arr = np.asarray(values, dtype=np.float64)
    mean = float(arr.mean())
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return mean, std


def run_sweep(spec: SweepSpec, block_cols: int = 4096):
    """Execute the sweep; returns (rows, skips).

    Failures at any stage are appended to `skips` as JSON-ready dicts and
    the sweep continues.  Trial i runs at seed base.seed XOR i; the same
    trial's noise is shared across axis values when the axis permits it.
    """
    derived: list[tuple[float, ModelConfig | None]] = []
    skips: list[dict] = []
    for value in spec.axis.values:
        try:
            derived.append((value, derive_config(spec.base, spec.axis.name, value)))
        except (ValueError, TypeError) as exc:
            skips.append(
                {
                    "axis": spec.axis.name,
                    "value": value,
                    "stage": "config",
                    "reason": str(exc),
                }
            )
            derived.append((value, None))

    cacheable = spec.axis.name in _CACHED_AXES
    want_bounds = "bounds" in spec.outputs
    want_tight = "tightness" in spec.outputs
    want_prims = "primitives" in spec.outputs

    exponents_e = {}
    for idx, (value, cfg) in enumerate(derived):
        if cfg is not None and (want_bounds or want_tight):
            exponents_e[idx] = (bound_exponent(cfg, +1), bound_exponent(cfg, -1))

    # results[(idx, mi)] -> list of per-trial output dicts
    results: dict[tuple[int, int], list[dict]] = {}
    for trial in range(spec.trials):
        parts_cache: _TrialParts | None = None
        for idx, (value, cfg) in enumerate(derived):
            if cfg is None:
                continue
            tcfg = cfg.with_updates(seed=substream_seed(spec.base.seed, trial))
            try:
                if cacheable and parts_cache is not None:
                    parts = parts_cache
                else:
                    parts = noise_parts(tcfg, block_cols)
                    if cacheable:
                        parts_cache = parts
                stats = stats_from_parts(tcfg, parts)
                labels = (parts.y, parts.a, parts.b)
            except Exception as exc:
                skips.append(
                    {
                        "axis": spec.axis.name,
                        "value": value,
                        "trial": trial,
                        "stage": "sample",
                        "reason": str(exc),
                    }
                )
                continue
            for mi, (mname, tau_spec) in enumerate(spec.methods):
                try:
                    tau = resolve_tau(tau_spec, tcfg)
                    if mname == "cmni":
                        sol = fit_cmni(stats, tcfg.deltas, labels)
                    else:
                        sol = fit_ridge(stats, tcfg.deltas, labels, tau)
                    entry = _trial_outputs(
                        tcfg,
                        sol,
                        stats,
                        parts,
                        exponents_e.get(idx),
                        want_tight,
                        want_prims,
                        tau,
                    )
                except Exception as exc:
                    skips.append(
                        {
                            "axis": spec.axis.name,
                            "value": value,
                            "trial": trial,
                            "method": mname,
                            "stage": "fit",
                            "reason": str(exc),
                        }
                    )
                    continue
                results.setdefault((idx, mi), []).append(entry)

    rows: list[SweepRow] = []
    for idx, (value, cfg) in enumerate(derived):
        if cfg is None:
            continue
        for mi, (mname, tau_spec) in enumerate(spec.methods):
            data = results.get((idx, mi), [])
            if not data:
                skips.append(
                    {
                        "axis": spec.axis.name,
                        "value": value,
                        "method": mname,
                        "stage": "aggregate",
                        "reason": "no successful trials",
                    }
                )
                continue
            rows.append(
                _aggregate_row(spec, idx, value, cfg, mname, tau_spec, data)
            )
    return rows, skips


def _trial_outputs(cfg, sol, stats, parts, e_pair, want_tight, want_prims, tau):
    plus = group_risk(sol, cfg, +1)
    minus = group_risk(sol, cfg, -1)
    worst, average = worst_and_average((plus, minus), config=cfg)
    entry = {
        "risk_plus": plus.risk,
        "risk_minus": minus.risk,
        "worst": worst,
        "average": average,
        "exponent_plus": plus.exponent,
        "exponent_minus": minus.exponent,
    }
    if e_pair is not None:
        entry["e_plus"], entry["e_minus"] = e_pair
        if want_tight:
            entry["tightness_plus"] = (
                plus.exponent / e_pair[0] if e_pair[0] > 0 else None
            )
            entry["tightness_minus"] = (
                minus.exponent / e_pair[1] if e_pair[1] > 0 else None
            )
    if want_prims:
        dec = decomposition_from_parts(
            cfg,
            parts.y,
            parts.a,
            parts.gram_0,
            float(np.linalg.norm(cfg.mu_spur)) * parts.q_spur,
            float(np.linalg.norm(cfg.mu_core)) * parts.q_core,
            tau=tau,
        )
        prims = compute_primitives(dec, delta=cfg.deltas, mode="recursive")
        report = verify_primitive_bounds(prims, cfg)
        entry["primitive_pass_frac"] = sum(r.passed for r in report.rows) / len(
            report.rows
        )
    return entry


def _aggregate_row(spec, idx, value, cfg, mname, tau_spec, data) -> SweepRow:
    tau = resolve_tau(tau_spec, cfg)
    run_id = f"{spec.name}:{spec.axis.name}[{idx}]:{mname}:tau={tau:g}"
    fields = {}
    for key in ("risk_plus", "risk_minus", "worst", "average", "exponent_plus", "exponent_minus"):
        mean, std = _stat_pair([e[key] for e in data])
        fields[f"{key}_mean"] = mean
        fields[f"{key}_std"] = std
    extra = {}
    if "e_plus" in data[0]:
        for key in ("e_plus", "e_minus"):
            mean, std = _stat_pair([e[key] for e in data])
            extra[f"{key}_mean"] = mean
            extra[f"{key}_std"] = std
    if "tightness_plus" in data[0]:
        for key in ("tightness_plus", "tightness_minus"):
            vals = [e[key] for e in data if e[key] is not None]
            if vals:
                mean, std = _stat_pair(vals)
                extra[f"{key}_mean"] = mean
                extra[f"{key}_std"] = std
    if "primitive_pass_frac" in data[0]:
        extra["primitive_pass_frac"], _ = _stat_pair(
            [e["primitive_pass_frac"] for e in data]
        )
    return SweepRow(
        run_id=run_id,
        axis_value=float(value),
        method=mname,
        tau=float(tau),
        trials=len(data),
        risk_plus_mean=fields["risk_plus_mean"],
        risk_plus_std=fields["risk_plus_std"],
        risk_minus_mean=fields["risk_minus_mean"],
        risk_minus_std=fields["risk_minus_std"],
        worst_mean=fields["worst_mean"],
        worst_std=fields["worst_std"],
        average_mean=fields["average_mean"],
        average_std=fields["average_std"],
        exponent_plus_mean=fields["exponent_plus_mean"],
        exponent_plus_std=fields["exponent_plus_std"],
        exponent_minus_mean=fields["exponent_minus_mean"],
        exponent_minus_std=fields["exponent_minus_std"],
        **extra,
    )


def _fig_base(seed: int, delta_plus: float, delta_minus: float, r_plus: float = 250.0) -> ModelConfig:
    d = 100_000
    d_core = d // 2
    scale = np.sqrt(r_plus / 2.0)
    return ModelConfig(
        d_core=d_core,
        d_spur=d - d_core,
        mu_core=_e1_mean(scale, d_core),
        mu_spur=_e1_mean(scale, d - d_core),
        n_plus=190,
        n_minus=10,
        delta_plus=delta_plus,
        delta_minus=delta_minus,
        tau=0.0,
        seed=seed,
    )


def preset(name: str, seed: int = 0, trials: int = 10) -> SweepSpec:
    """Built-in sweeps mirroring the simulation setups."""
    if name == "fig1_left":
        grid = np.concatenate(
            [np.geomspace(0.95, 0.05, 20), [0.05 / 2, 0.05 / 4, 0.05 / 8]]
        )
        return SweepSpec(
            base=_fig_base(seed, delta_plus=0.95, delta_minus=0.95),
            axis=SweepAxis("delta_minus", tuple(grid)),
            methods=(("cmni", None),),
            trials=trials,
            outputs=("risk", "bounds", "tightness"),
            out_path=f"{name}.csv",
            name=name,
        )
    if name == "fig1_right":
        base = ModelConfig(
            d_core=2500,
            d_spur=2500,
            mu_core=_e1_mean(np.sqrt(5000.0**0.6 / 8.0), 2500),
            mu_spur=_e1_mean(np.sqrt(5000.0**0.6 / 8.0), 2500),
            n_plus=48,
            n_minus=2,
            delta_plus=0.96,
            delta_minus=0.04,
            tau=0.0,
            seed=seed,
        )
        return SweepSpec(
            base=base,
            axis=SweepAxis("n_coupled", (50, 100, 150, 200, 250)),
            methods=(("ridge", 0.0), ("ridge", "d/10"), ("ridge", "d")),
            trials=trials,
            outputs=("risk", "bounds", "tightness"),
            out_path=f"{name}.csv",
            name=name,
        )
    if name in ("fig2_left", "fig2_right"):
        if name == "fig2_left":
            dp, dm = 1.0, 1.0
        else:
            dp, dm = 0.95, 0.05
        base = _fig_base(seed, delta_plus=dp, delta_minus=dm)
        d, n, n_minus = 100_000, 200, 10
        grid = np.geomspace(d / n, d * n / n_minus**2, 12)
        return SweepSpec(
            base=base,
            axis=SweepAxis("r_plus_sq", tuple(grid)),
            methods=(("cmni", None),),
            trials=trials,
            outputs=("risk", "bounds", "tightness"),
            out_path=f"{name}.csv",
            name=name,
        )
    raise ValueError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")


def emit(rows, path: str, fmt: str = "csv", meta: dict | None = None) -> None:
    """Write sweep rows to path as CSV (fixed header) or JSON."""
    if not rows:
        raise ValueError("refusing to emit an empty table")
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(row.to_csv_values())
        with open(path, "w", newline="") as fh:
            fh.write(buf.getvalue())
        return
    if fmt == "json":
        from . import __version__

        doc = {
            "version": f"grouprisk-{__version__}",
            "generator": "philox",
            "timestamp": datetime.now(timezone.utc).isoformat(),
        }
        if meta:
            doc["meta"] = dict(meta)
        doc["rows"] = [row.to_dict() for row in rows]
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
        return
    raise ValueError(f"unknown format {fmt!r}")
