"""Two-group Gaussian mixture with a spurious binary attribute.

Samples follow

    x = y * mu_bar_c + a * mu_bar_s + z,        z ~ N(0, I_d),

where y in {-1, +1} is the class label with P(y = +1) = pi_plus and a in
{-1, +1} is a spurious attribute.  The product b = y * a splits the sample
into a majority group (b = +1, exactly n_plus rows) and a minority group
(b = -1, exactly n_minus rows).  The core mean occupies the first d_core
coordinates and the spurious mean the remaining d_spur, so the embedded
directions are orthogonal by construction and group b has class-conditional
mean y * (mu_bar_c + b * mu_bar_s).

Randomness is counter-based (Philox) with one named stream per purpose.
Normals come from the inverse-CDF transform at exactly one 64-bit word per
value, and column j of the noise matrix consumes words [j*n, (j+1)*n) of
its stream.  Any column blocking therefore reproduces the one-shot matrix
bit for bit; `noise_blocks` is the single noise source.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields, replace

import numpy as np
from scipy.special import ndtri

__all__ = [
    "ModelConfig",
    "Dataset",
    "SignalStrengths",
    "AssumptionReport",
    "embed_means",
    "group_mean",
    "signal_strengths",
    "sample_labels",
    "noise_blocks",
    "sample_dataset",
    "check_assumptions",
    "save_dataset",
    "load_dataset",
    "substream_seed",
    "philox_generator",
]

# Stream ids for the second Philox key word.  One stream per purpose keeps
# draws independent of call order across modules.
STREAM_LABELS = 1
STREAM_NOISE = 2
STREAM_MC = 3
STREAM_WISHART = 4

_MASK64 = (1 << 64) - 1
# Generator.random maps one uint64 word w to (w >> 11) * 2^-53, so 0.0 has
# probability 2^-53; flooring keeps ndtri finite without bias elsewhere.
_U_FLOOR = 2.0 ** -53


def substream_seed(seed: int, trial: int) -> int:
    """Per-trial substream seed: master seed XOR trial index."""
    return (int(seed) ^ int(trial)) & _MASK64


def philox_generator(seed: int, stream: int) -> np.random.Generator:
    """Generator on the independent Philox stream keyed by (seed, stream)."""
    return np.random.Generator(
        np.random.Philox(key=[int(seed) & _MASK64, int(stream) & _MASK64])
    )


def _uniforms_at(seed: int, stream: int, offset: int, count: int) -> np.ndarray:
    """`count` uniforms starting at word `offset` of stream (seed, stream).

    Philox advances in 4-word counter blocks, so we advance by offset // 4
    blocks and discard offset % 4 draws to land inside a block.  The result
    is bit-identical to slicing one long draw.
    """
    bg = np.random.Philox(key=[int(seed) & _MASK64, int(stream) & _MASK64])
    q, r = divmod(int(offset), 4)
    if q:
        bg.advance(q)
    gen = np.random.Generator(bg)
    if r:
        gen.random(r)
    return gen.random(count)


def _standard_normals(u: np.ndarray) -> np.ndarray:
    return ndtri(np.maximum(u, _U_FLOOR))


@dataclass(frozen=True, eq=False)
class ModelConfig:
    """Full specification of one synthetic problem instance.

    Parameters
    ----------
    d_core, d_spur : int
        Dimensions of the core and spurious blocks; d = d_core + d_spur.
    mu_core, mu_spur : array_like
        Core class mean (length d_core) and spurious mean (length d_spur).
    n_plus, n_minus : int
        Majority and minority group counts; n = n_plus + n_minus.
    pi_plus : float
        Label marginal P(y = +1), in (0, 1).
    delta_plus, delta_minus : float
        Cost-sensitive adjustment weights, 1/n <= delta_minus <= delta_plus <= 1.
    tau : float
        Ridge parameter, >= 0.
    seed : int
        Master RNG seed, a 64-bit unsigned integer.
    """

    d_core: int
    d_spur: int
    mu_core: np.ndarray
    mu_spur: np.ndarray
    n_plus: int
    n_minus: int
    pi_plus: float = 0.5
    delta_plus: float = 1.0
    delta_minus: float = 1.0
    tau: float = 0.0
    seed: int = 0

    def __post_init__(self):
        mu_core = np.atleast_1d(np.asarray(self.mu_core, dtype=np.float64)).copy()
        mu_spur = np.atleast_1d(np.asarray(self.mu_spur, dtype=np.float64)).copy()
        mu_core.setflags(write=False)
        mu_spur.setflags(write=False)
        object.__setattr__(self, "mu_core", mu_core)
        object.__setattr__(self, "mu_spur", mu_spur)
        if self.d_core < 1 or self.d_spur < 1:
            raise ValueError("d_core and d_spur must be positive")
        if mu_core.ndim != 1 or mu_core.size != self.d_core:
            raise ValueError(f"mu_core must have length d_core={self.d_core}")
        if mu_spur.ndim != 1 or mu_spur.size != self.d_spur:
            raise ValueError(f"mu_spur must have length d_spur={self.d_spur}")
        if self.n_plus < 1 or self.n_minus < 1:
            raise ValueError("group counts must be positive")
        if self.n_plus < self.n_minus:
            raise ValueError("n_plus must be at least n_minus")
        if self.d < self.n:
            raise ValueError(f"need d >= n, got d={self.d} < n={self.n}")
        nc2 = float(mu_core @ mu_core)
        ns2 = float(mu_spur @ mu_spur)
        if nc2 < ns2:
            raise ValueError(
                f"core signal must dominate: |mu_core|^2={nc2:g} < |mu_spur|^2={ns2:g}"
            )
        if not 0.0 < self.pi_plus < 1.0:
            raise ValueError("pi_plus must lie in (0, 1)")
        lo = 1.0 / self.n - 1e-12  # slop for decimal literals like 0.005
        if not (lo <= self.delta_minus <= self.delta_plus <= 1.0):
            raise ValueError(
                "adjustment weights must satisfy 1/n <= delta_minus <= delta_plus <= 1"
            )
        if self.tau < 0.0:
            raise ValueError("tau must be nonnegative")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def d(self) -> int:
        return self.d_core + self.d_spur

    @property
    def n(self) -> int:
        return self.n_plus + self.n_minus

    @property
    def deltas(self) -> tuple[float, float]:
        """(delta_plus, delta_minus)."""
        return (self.delta_plus, self.delta_minus)

    def delta_of(self, b) -> np.ndarray:
        """Adjustment weight Delta_{b_i} for each sign in b."""
        b = np.asarray(b)
        return np.where(b > 0, self.delta_plus, self.delta_minus).astype(np.float64)

    def with_updates(self, **changes) -> "ModelConfig":
        """Copy with fields replaced; revalidates."""
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "d_core": self.d_core,
            "d_spur": self.d_spur,
            "mu_core": [float(v) for v in self.mu_core],
            "mu_spur": [float(v) for v in self.mu_spur],
            "n_plus": self.n_plus,
            "n_minus": self.n_minus,
            "pi_plus": self.pi_plus,
            "delta_plus": self.delta_plus,
            "delta_minus": self.delta_minus,
            "tau": self.tau,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown ModelConfig fields: {sorted(unknown)}")
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ModelConfig":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class SignalStrengths:
    """Total (r_plus) and residual (r_minus) squared signal strengths."""

    r_plus: float
    r_minus: float


@dataclass(frozen=True)
class AssumptionReport:
    """Pass/fail and slack for the four regime inequalities.

    Slack is the ratio (left side) / (C * right side); a slack of at least
    1 means the inequality holds at constant c_const and failure target
    delta.
    """

    delta: float
    c_const: float
    pass_a: bool
    pass_b: bool
    pass_c: bool
    pass_d: bool
    slack_a: float
    slack_b: float
    slack_c: float
    slack_d: float

    @property
    def all_pass(self) -> bool:
        return self.pass_a and self.pass_b and self.pass_c and self.pass_d

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "c_const": self.c_const,
            "pass_a": self.pass_a,
            "pass_b": self.pass_b,
            "pass_c": self.pass_c,
            "pass_d": self.pass_d,
            "slack_a": self.slack_a,
            "slack_b": self.slack_b,
            "slack_c": self.slack_c,
            "slack_d": self.slack_d,
        }


@dataclass(eq=False)
class Dataset:
    """Sampled design matrix with labels, attributes, and retained noise."""

    X: np.ndarray
    y: np.ndarray
    a: np.ndarray
    b: np.ndarray
    Q: np.ndarray
    config: ModelConfig

    def validate(self) -> None:
        """Raise ValueError if any structural invariant fails."""
        cfg = self.config
        n, d = cfg.n, cfg.d
        if self.X.shape != (n, d) or self.Q.shape != (n, d):
            raise ValueError("X and Q must both be n x d")
        for name, v in (("y", self.y), ("a", self.a), ("b", self.b)):
            if v.shape != (n,) or not np.all(np.abs(v) == 1.0):
                raise ValueError(f"{name} must be an n-vector of signs")
        if not np.array_equal(self.b, self.y * self.a):
            raise ValueError("group labels must satisfy b = y * a")
        if int(np.sum(self.b < 0)) != cfg.n_minus:
            raise ValueError("minority count does not match config")
        mu_bar_c, mu_bar_s = embed_means(cfg)
        rebuilt = np.outer(self.y, mu_bar_c) + np.outer(self.a, mu_bar_s) + self.Q
        if not np.array_equal(rebuilt, self.X):
            raise ValueError("X does not reconstruct from labels, means, and Q")


def embed_means(config: ModelConfig) -> tuple[np.ndarray, np.ndarray]:
    """Embed the block means into R^d: mu_bar_c = [mu_c; 0], mu_bar_s = [0; mu_s]."""
    d = config.d
    mu_bar_c = np.zeros(d)
    mu_bar_s = np.zeros(d)
    mu_bar_c[: config.d_core] = config.mu_core
    mu_bar_s[config.d_core :] = config.mu_spur
    return mu_bar_c, mu_bar_s


def group_mean(config: ModelConfig, b: int) -> np.ndarray:
    """Class-(+1) mean of group b: mu_b = mu_bar_c + b * mu_bar_s."""
    if b not in (1, -1):
        raise ValueError("b must be +1 or -1")
    mu_bar_c, mu_bar_s = embed_means(config)
    return mu_bar_c + b * mu_bar_s


def signal_strengths(config: ModelConfig) -> SignalStrengths:
    nc2 = float(config.mu_core @ config.mu_core)
    ns2 = float(config.mu_spur @ config.mu_spur)
    return SignalStrengths(r_plus=nc2 + ns2, r_minus=nc2 - ns2)


def sample_labels(config: ModelConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Draw (y, a, b) for one dataset.

    y_i are i.i.d. signs with P(+1) = pi_plus.  b starts as n_plus entries
    of +1 followed by n_minus entries of -1 and is then shuffled by a
    seed-driven permutation, so group counts are exact.  a = y * b.
    """
    rng = philox_generator(config.seed, STREAM_LABELS)
    n = config.n
    y = np.where(rng.random(n) < config.pi_plus, 1.0, -1.0)
    base = np.concatenate([np.ones(config.n_plus), -np.ones(config.n_minus)])
    b = base[rng.permutation(n)]
    a = y * b
    return y, a, b


def noise_blocks(config: ModelConfig, block_cols: int = 4096):
    """Yield (j0, block) column blocks of the n x d noise matrix Q.

    Column j is ndtri applied to words [j*n, (j+1)*n) of the noise stream,
    so assembly is bit-identical for every block_cols choice.
    """
    if block_cols < 1:
        raise ValueError("block_cols must be positive")
    n, d = config.n, config.d
    for j0 in range(0, d, block_cols):
        m = min(block_cols, d - j0)
        u = _uniforms_at(config.seed, STREAM_NOISE, j0 * n, m * n)
        yield j0, np.ascontiguousarray(_standard_normals(u).reshape(m, n).T)


def sample_dataset(config: ModelConfig, block_cols: int = 4096) -> Dataset:
    """Sample a full dataset with X materialized.

    X = outer(y, mu_bar_c) + outer(a, mu_bar_s) + Q, evaluated in exactly
    that order so the reconstruction invariant holds bitwise.
    """
    y, a, b = sample_labels(config)
    mu_bar_c, mu_bar_s = embed_means(config)
    Q = np.empty((config.n, config.d))
    for j0, blk in noise_blocks(config, block_cols):
        Q[:, j0 : j0 + blk.shape[1]] = blk
    X = np.outer(y, mu_bar_c) + np.outer(a, mu_bar_s) + Q
    return Dataset(X=X, y=y, a=a, b=b, Q=Q, config=config)


def check_assumptions(
    config: ModelConfig, delta: float = 0.05, c_const: float = 1.0
) -> AssumptionReport:
    """Evaluate the four regime inequalities at constant c_const and level delta.

    (a) n >= C log(1/delta); (b) |mu_c|^2 >= C n log(n/delta);
    (c) d >= C R_plus n;     (d) d >= C n^2 log(n/delta).
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if c_const <= 0.0:
        raise ValueError("c_const must be positive")
    n, d = config.n, config.d
    r_plus = signal_strengths(config).r_plus
    core_sq = float(config.mu_core @ config.mu_core)
    log_inv = np.log(1.0 / delta)
    log_nd = np.log(n / delta)
    slack_a = np.inf if log_inv == 0.0 else n / (c_const * log_inv)
    slack_b = core_sq / (c_const * n * log_nd)
    slack_c = np.inf if r_plus == 0.0 else d / (c_const * r_plus * n)
    slack_d = d / (c_const * n * n * log_nd)
    return AssumptionReport(
        delta=delta,
        c_const=c_const,
        pass_a=bool(slack_a >= 1.0),
        pass_b=bool(slack_b >= 1.0),
        pass_c=bool(slack_c >= 1.0),
        pass_d=bool(slack_d >= 1.0),
        slack_a=float(slack_a),
        slack_b=float(slack_b),
        slack_c=float(slack_c),
        slack_d=float(slack_d),
    )


def save_dataset(dataset: Dataset, path: str) -> None:
    """Persist X and Q as little-endian float64 with a JSON sidecar.

    The binary file holds X row-major followed by Q row-major; the sidecar
    at path + '.json' records dimensions, seed, labels, and the config.
    """
    cfg = dataset.config
    with open(path, "wb") as fh:
        fh.write(np.ascontiguousarray(dataset.X, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(dataset.Q, dtype="<f8").tobytes())
    sidecar = {
        "n": cfg.n,
        "d": cfg.d,
        "seed": cfg.seed,
        "layout": "X then Q, row-major, little-endian float64",
        "y": [int(v) for v in dataset.y],
        "a": [int(v) for v in dataset.a],
        "b": [int(v) for v in dataset.b],
        "config": cfg.to_dict(),
    }
    with open(path + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=2)
        fh.write("\n")


def load_dataset(path: str) -> Dataset:
    with open(path + ".json") as fh:
        sidecar = json.load(fh)
    config = ModelConfig.from_dict(sidecar["config"])
    n, d = config.n, config.d
    raw = np.fromfile(path, dtype="<f8")
    if raw.size != 2 * n * d:
        raise ValueError(
            f"binary payload has {raw.size} floats, expected {2 * n * d}"
        )
    X = raw[: n * d].reshape(n, d).astype(np.float64)
    Q = raw[n * d :].reshape(n, d).astype(np.float64)
    y = np.asarray(sidecar["y"], dtype=np.float64)
    a = np.asarray(sidecar["a"], dtype=np.float64)
    b = np.asarray(sidecar["b"], dtype=np.float64)
    ds = Dataset(X=X, y=y, a=a, b=b, Q=Q, config=config)
    ds.validate()
    return ds
