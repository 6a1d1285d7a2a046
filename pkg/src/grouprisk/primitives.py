"""Staged Gram decomposition, recursive rank-3 inversion, and primitives.

Peel the two mean directions off the design matrix:

    X_0 = Q,    X_1 = v_1 mu_bar_1' + X_0,    X_2 = v_2 mu_bar_2' + X_1,

with v_1 = a, v_2 = y, mu_bar_1 = mu_bar_s, mu_bar_2 = mu_bar_c.  Each
stage updates the Gram matrix by rank 3:

    G_k = G_{k-1} + L_k R_k,
    L_k = [m_k v_k, d_k, v_k],   R_k = [m_k v_k'; v_k'; d_k'],

where m_k = |mu_bar_k| and d_k = Q mu_bar_k (the embedded means are
orthogonal, so X_{k-1} mu_bar_k = Q mu_bar_k at both stages).  Writing
M_k = G_k + tau I, the resolvents obey the recursive Woodbury identity

    M_k^{-1} = M_{k-1}^{-1}
             - M_{k-1}^{-1} L_k A_k^{-1} R_k M_{k-1}^{-1},
    A_k = I_3 + R_k M_{k-1}^{-1} L_k,

and A_k depends only on the three self primitives of direction k at the
previous order: with s = v'M^{-1}v, t = d'M^{-1}d, h = d'M^{-1}v,

    det(A_k) = s (m_k^2 - t) + (1 + h)^2,

with the adjugate in closed form below.  Consequently every scalar
quadratic form p = x' M_k^{-1} y updates through the bilinear map

    f_A(x_a, x_b, x_c, x_d) = (m_k^2 - t) x_a x_c
                              + (1 + h)(x_a x_d + x_b x_c)
                              - s x_b x_d,
    p_next = p - f_A(x'M^{-1}v_k, x'M^{-1}d_k, v_k'M^{-1}y, d_k'M^{-1}y)
                 / det(A_k),

which is how the recursive mode advances all primitives without touching
M_1 or M_2.  The direct mode forms each stage inverse densely instead;
the two routes share nothing past order 0 and must agree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .model import (
    Dataset,
    ModelConfig,
    embed_means,
    philox_generator,
    substream_seed,
    STREAM_WISHART,
)

__all__ = [
    "Decomposition",
    "PrimitiveSet",
    "BandRow",
    "BandReport",
    "AuxInequalityReport",
    "build_decomposition",
    "decomposition_from_parts",
    "woodbury_invert",
    "det_and_adj",
    "f_a",
    "compute_primitives",
    "risk_identity_check",
    "wishart_interval",
    "wishart_coverage",
    "verify_primitive_bounds",
    "check_aux_inequalities",
]

DET_SINGULAR_TOL = 1e-12

# Vector slots shared by both primitive modes.
_V1, _V2, _D1, _D2, _U, _W1, _W2 = range(7)


@dataclass(frozen=True, eq=False)
class Decomposition:
    """Stagewise rank-3 structure of one design matrix."""

    v_1: np.ndarray
    v_2: np.ndarray
    mu_bar_1: np.ndarray
    mu_bar_2: np.ndarray
    d_1: np.ndarray
    d_2: np.ndarray
    tau: float
    gram_0: np.ndarray
    L_1: np.ndarray
    R_1: np.ndarray
    L_2: np.ndarray
    R_2: np.ndarray

    @property
    def n(self) -> int:
        return self.v_1.shape[0]

    @property
    def mu_norms(self) -> tuple[float, float]:
        """(m_1, m_2) = (|mu_bar_1|, |mu_bar_2|)."""
        return (
            float(np.linalg.norm(self.mu_bar_1)),
            float(np.linalg.norm(self.mu_bar_2)),
        )

    def stage_gram(self, k: int) -> np.ndarray:
        """G_k for k in {0, 1, 2}: gram_0 plus the first k rank-3 updates."""
        if k not in (0, 1, 2):
            raise ValueError("stage k must be 0, 1, or 2")
        g = self.gram_0
        if k >= 1:
            g = g + self.L_1 @ self.R_1
        if k >= 2:
            g = g + self.L_2 @ self.R_2
        return g


def _update_factors(m: float, v: np.ndarray, d: np.ndarray):
    L = np.column_stack([m * v, d, v])
    R = np.vstack([m * v, v, d])
    return L, R


def build_decomposition(dataset: Dataset, tau: float | None = None) -> Decomposition:
    """Decompose a materialized dataset; requires the retained noise Q."""
    if dataset.Q is None:
        raise ValueError("dataset must retain its noise matrix Q")
    cfg = dataset.config
    mu_bar_c, mu_bar_s = embed_means(cfg)
    d_1 = dataset.Q @ mu_bar_s
    d_2 = dataset.Q @ mu_bar_c
    gram_0 = dataset.Q @ dataset.Q.T
    gram_0 = 0.5 * (gram_0 + gram_0.T)
    return _assemble(
        v_1=dataset.a,
        v_2=dataset.y,
        mu_bar_1=mu_bar_s,
        mu_bar_2=mu_bar_c,
        d_1=d_1,
        d_2=d_2,
        gram_0=gram_0,
        tau=cfg.tau if tau is None else float(tau),
    )


def decomposition_from_parts(
    config: ModelConfig,
    y: np.ndarray,
    a: np.ndarray,
    gram_0: np.ndarray,
    d_1: np.ndarray,
    d_2: np.ndarray,
    tau: float | None = None,
) -> Decomposition:
    """Same structure assembled from precomputed pieces (no Q needed)."""
    mu_bar_c, mu_bar_s = embed_means(config)
    return _assemble(
        v_1=np.asarray(a, dtype=np.float64),
        v_2=np.asarray(y, dtype=np.float64),
        mu_bar_1=mu_bar_s,
        mu_bar_2=mu_bar_c,
        d_1=np.asarray(d_1, dtype=np.float64),
        d_2=np.asarray(d_2, dtype=np.float64),
        gram_0=np.asarray(gram_0, dtype=np.float64),
        tau=config.tau if tau is None else float(tau),
    )


def _assemble(v_1, v_2, mu_bar_1, mu_bar_2, d_1, d_2, gram_0, tau) -> Decomposition:
    if tau < 0.0:
        raise ValueError("tau must be nonnegative")
    m_1 = float(np.linalg.norm(mu_bar_1))
    m_2 = float(np.linalg.norm(mu_bar_2))
    L_1, R_1 = _update_factors(m_1, v_1, d_1)
    L_2, R_2 = _update_factors(m_2, v_2, d_2)
    return Decomposition(
        v_1=v_1,
        v_2=v_2,
        mu_bar_1=mu_bar_1,
        mu_bar_2=mu_bar_2,
        d_1=d_1,
        d_2=d_2,
        tau=float(tau),
        gram_0=gram_0,
        L_1=L_1,
        R_1=R_1,
        L_2=L_2,
        R_2=R_2,
    )


def _det3(a: np.ndarray) -> float:
    return float(
        a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
        - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
        + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0])
    )


def _adj3(a: np.ndarray) -> np.ndarray:
    """Adjugate of a 3x3 matrix: transpose of the cofactor matrix."""
    out = np.empty((3, 3))
    out[0, 0] = a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1]
    out[1, 0] = -(a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
    out[2, 0] = a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0]
    out[0, 1] = -(a[0, 1] * a[2, 2] - a[0, 2] * a[2, 1])
    out[1, 1] = a[0, 0] * a[2, 2] - a[0, 2] * a[2, 0]
    out[2, 1] = -(a[0, 0] * a[2, 1] - a[0, 1] * a[2, 0])
    out[0, 2] = a[0, 1] * a[1, 2] - a[0, 2] * a[1, 1]
    out[1, 2] = -(a[0, 0] * a[1, 2] - a[0, 2] * a[1, 0])
    out[2, 2] = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    return out


def _dense_inverse(mat: np.ndarray) -> np.ndarray:
    try:
        factor = cho_factor(mat, lower=True, check_finite=False)
    except LinAlgError as exc:
        raise LinAlgError(f"stage matrix not positive definite: {exc}") from exc
    inv = cho_solve(factor, np.eye(mat.shape[0]), check_finite=False)
    return 0.5 * (inv + inv.T)


def woodbury_invert(dec: Decomposition):
    """(M_0^{-1}, M_1^{-1}, M_2^{-1}) by recursive rank-3 updates.

    M_0^{-1} is a dense inverse of gram_0 + tau I; each later stage applies
    the Woodbury identity with the 3x3 capacitance A_k solved through its
    explicit adjugate and determinant.  |det(A_k)| below DET_SINGULAR_TOL
    raises: the determinant stays order 1 in the intended regime, so a
    tiny value means the config is out of regime, not a rounding accident.
    """
    n = dec.n
    m0_inv = _dense_inverse(dec.gram_0 + dec.tau * np.eye(n))
    inverses = [m0_inv]
    for L, R in ((dec.L_1, dec.R_1), (dec.L_2, dec.R_2)):
        prev = inverses[-1]
        left = prev @ L          # n x 3
        right = R @ prev         # 3 x n
        a_k = np.eye(3) + R @ left
        det = _det3(a_k)
        if abs(det) < DET_SINGULAR_TOL:
            raise LinAlgError(f"rank-3 update singular: det(A_k) = {det:.3e}")
        nxt = prev - left @ (_adj3(a_k) / det) @ right
        inverses.append(0.5 * (nxt + nxt.T))
    return tuple(inverses)


def _self_primitives(prims: "PrimitiveSet", k: int):
    """(m_sq, s, t, h) of direction k at order k-1, for A_k closed forms."""
    if k not in (1, 2):
        raise ValueError("stage k must be 1 or 2")
    i = k - 1
    m = prims.mu_norms[i]
    return (
        m * m,
        float(prims.s[i, i, k - 1]),
        float(prims.t[i, i, k - 1]),
        float(prims.h[i, i, k - 1]),
    )


def det_and_adj(prims: "PrimitiveSet", k: int):
    """Closed-form det(A_k) and adj(A_k) from order-(k-1) primitives."""
    m_sq, s, t, h = _self_primitives(prims, k)
    det = s * (m_sq - t) + (1.0 + h) ** 2
    m = prims.mu_norms[k - 1]
    st_h = s * t - h - h * h
    adj = np.array(
        [
            [(1.0 + h) ** 2 - s * t, m * st_h, -m * s],
            [-m * s, 1.0 + h + m_sq * s, -s],
            [m * st_h, m_sq * h * h - t * (1.0 + m_sq * s), 1.0 + h + m_sq * s],
        ]
    )
    return float(det), adj


def f_a(prims: "PrimitiveSet", k: int, x_a: float, x_b: float, x_c: float, x_d: float) -> float:
    """Bilinear update form [m x_a, x_b, x_a] adj(A_k) [m x_c; x_c; x_d].

    Equals (m_k^2 - t) x_a x_c + (1 + h)(x_a x_d + x_b x_c) - s x_b x_d
    with (s, t, h) the direction-k self primitives at order k-1.
    """
    m_sq, s, t, h = _self_primitives(prims, k)
    return _f_a_closed(m_sq, s, t, h, x_a, x_b, x_c, x_d)


def _f_a_closed(m_sq, s, t, h, x_a, x_b, x_c, x_d) -> float:
    return float(
        (m_sq - t) * x_a * x_c + (1.0 + h) * (x_a * x_d + x_b * x_c) - s * x_b * x_d
    )


@dataclass(frozen=True, eq=False)
class PrimitiveSet:
    """All quadratic-form primitives at orders k = 0, 1, 2.

    Index convention (i, j are 0-based for directions 1, 2; k is the
    order):

        s[i, j, k]       = v_{i+1}' M_k^{-1} v_{j+1}
        t[i, j, k]       = d_{i+1}' M_k^{-1} d_{j+1}
        h[i, j, k]       = d_{i+1}' M_k^{-1} v_{j+1}
        s_uu[k]          = u' M_k^{-1} u
        s_ui[i, k]       = u' M_k^{-1} v_{i+1}
        h_iu[i, k]       = d_{i+1}' M_k^{-1} u
        s_id_j[i, j, k]  = (D^{-1} v_{i+1})' M_k^{-1} v_{j+1}
        s_id_jd[i, j, k] = (D^{-1} v_{i+1})' M_k^{-1} (D^{-1} v_{j+1})
        h_i_jd[i, j, k]  = d_{i+1}' M_k^{-1} (D^{-1} v_{j+1})
        o[i, k]          = (D^{-1} v_{i+1})' M_k^{-1} G_k M_k^{-1} (D^{-1} v_{i+1})

    where D is the diagonal adjustment matrix with D_jj = Delta_{b_j}.
    det_a[k-1] holds det(A_k) for k in {1, 2}.
    """

    s: np.ndarray
    t: np.ndarray
    h: np.ndarray
    s_uu: np.ndarray
    s_ui: np.ndarray
    h_iu: np.ndarray
    s_id_j: np.ndarray
    s_id_jd: np.ndarray
    h_i_jd: np.ndarray
    o: np.ndarray
    det_a: np.ndarray
    mu_norms: tuple[float, float]
    tau: float
    delta: tuple[float, float]
    u: np.ndarray
    mode: str

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "tau": self.tau,
            "delta_plus": self.delta[0],
            "delta_minus": self.delta[1],
            "mu_norms": list(self.mu_norms),
            "s": self.s.tolist(),
            "t": self.t.tolist(),
            "h": self.h.tolist(),
            "s_uu": self.s_uu.tolist(),
            "s_ui": self.s_ui.tolist(),
            "h_iu": self.h_iu.tolist(),
            "s_id_j": self.s_id_j.tolist(),
            "s_id_jd": self.s_id_jd.tolist(),
            "h_i_jd": self.h_i_jd.tolist(),
            "o": self.o.tolist(),
            "det_a": self.det_a.tolist(),
        }


def _pack(dec: Decomposition, delta, u: np.ndarray):
    """The 7 probe vectors, columns in slot order v1 v2 d1 d2 u w1 w2."""
    delta_plus, delta_minus = delta
    b = dec.v_2 * dec.v_1  # b = y * a
    dvec = np.where(b > 0, float(delta_plus), float(delta_minus))
    w_1 = dec.v_1 / dvec
    w_2 = dec.v_2 / dvec
    return np.column_stack([dec.v_1, dec.v_2, dec.d_1, dec.d_2, u, w_1, w_2])


def _distill(p_orders, o_vals, det_a, dec, delta, u, mode) -> PrimitiveSet:
    """Split the per-order 7x7 tables into the named primitive arrays."""
    s = np.empty((2, 2, 3))
    t = np.empty((2, 2, 3))
    h = np.empty((2, 2, 3))
    s_uu = np.empty(3)
    s_ui = np.empty((2, 3))
    h_iu = np.empty((2, 3))
    s_id_j = np.empty((2, 2, 3))
    s_id_jd = np.empty((2, 2, 3))
    h_i_jd = np.empty((2, 2, 3))
    v_slots = (_V1, _V2)
    d_slots = (_D1, _D2)
    w_slots = (_W1, _W2)
    for k, p in enumerate(p_orders):
        s_uu[k] = p[_U, _U]
        for i in range(2):
            s_ui[i, k] = p[_U, v_slots[i]]
            h_iu[i, k] = p[d_slots[i], _U]
            for j in range(2):
                s[i, j, k] = p[v_slots[i], v_slots[j]]
                t[i, j, k] = p[d_slots[i], d_slots[j]]
                h[i, j, k] = p[d_slots[i], v_slots[j]]
                s_id_j[i, j, k] = p[w_slots[i], v_slots[j]]
                s_id_jd[i, j, k] = p[w_slots[i], w_slots[j]]
                h_i_jd[i, j, k] = p[d_slots[i], w_slots[j]]
    return PrimitiveSet(
        s=s,
        t=t,
        h=h,
        s_uu=s_uu,
        s_ui=s_ui,
        h_iu=h_iu,
        s_id_j=s_id_j,
        s_id_jd=s_id_jd,
        h_i_jd=h_i_jd,
        o=o_vals,
        det_a=det_a,
        mu_norms=dec.mu_norms,
        tau=dec.tau,
        delta=(float(delta[0]), float(delta[1])),
        u=u,
        mode=mode,
    )


def compute_primitives(
    source,
    tau: float | None = None,
    delta=None,
    u: np.ndarray | None = None,
    mode: str = "direct",
) -> PrimitiveSet:
    """All primitives at orders 0..2, by dense stages or by recursion.

    source is a Dataset or a prebuilt Decomposition.  delta defaults to
    the config weights when a Dataset is given and to (1, 1) otherwise;
    u defaults to e_1 and must be unit norm.

    direct mode forms each M_k^{-1} densely and evaluates quadratic
    forms; recursive mode evaluates order 0 once, then advances every
    scalar through f_A / det(A_k), taking M_1^{-1} and M_2^{-1} from
    woodbury_invert only for the o primitive (which needs a matrix-vector
    product by its definition).
    """
    if isinstance(source, Dataset):
        if delta is None:
            delta = source.config.deltas
        dec = build_decomposition(source, tau=tau)
    elif isinstance(source, Decomposition):
        dec = source if tau is None else _retagged(source, tau)
        if delta is None:
            delta = (1.0, 1.0)
    else:
        raise TypeError(f"expected Dataset or Decomposition, got {type(source).__name__}")
    if mode not in ("direct", "recursive"):
        raise ValueError("mode must be 'direct' or 'recursive'")
    n = dec.n
    if u is None:
        u = np.zeros(n)
        u[0] = 1.0
    else:
        u = np.asarray(u, dtype=np.float64)
        if u.shape != (n,) or abs(np.linalg.norm(u) - 1.0) > 1e-12:
            raise ValueError("u must be a unit n-vector")
    if not (delta[0] > 0.0 and delta[1] > 0.0):
        raise ValueError("delta weights must be positive")

    probes = _pack(dec, delta, u)
    w_cols = probes[:, [_W1, _W2]]
    grams = [dec.stage_gram(k) for k in range(3)]

    if mode == "direct":
        p_orders = []
        o_vals = np.empty((2, 3))
        for k in range(3):
            m_inv = _dense_inverse(grams[k] + dec.tau * np.eye(n))
            sol = m_inv @ probes
            p = probes.T @ sol
            p_orders.append(0.5 * (p + p.T))
            c = m_inv @ w_cols
            for i in range(2):
                o_vals[i, k] = c[:, i] @ grams[k] @ c[:, i]
        det_a = np.empty(2)
        for k in (1, 2):
            i = k - 1
            p_prev = p_orders[k - 1]
            v_slot, d_slot = (_V1, _D1) if k == 1 else (_V2, _D2)
            m = dec.mu_norms[i]
            det_a[i] = (
                p_prev[v_slot, v_slot] * (m * m - p_prev[d_slot, d_slot])
                + (1.0 + p_prev[d_slot, v_slot]) ** 2
            )
        return _distill(p_orders, o_vals, det_a, dec, delta, u, "direct")

    # recursive mode
    m0_inv, m1_inv, m2_inv = woodbury_invert(dec)
    p0 = probes.T @ (m0_inv @ probes)
    p0 = 0.5 * (p0 + p0.T)
    p_orders = [p0]
    det_a = np.empty(2)
    for k in (1, 2):
        p = p_orders[-1]
        v_slot, d_slot = (_V1, _D1) if k == 1 else (_V2, _D2)
        m = dec.mu_norms[k - 1]
        m_sq = m * m
        s_kk = p[v_slot, v_slot]
        t_kk = p[d_slot, d_slot]
        h_kk = p[d_slot, v_slot]
        det = s_kk * (m_sq - t_kk) + (1.0 + h_kk) ** 2
        if abs(det) < DET_SINGULAR_TOL:
            raise LinAlgError(f"rank-3 update singular: det(A_{k}) = {det:.3e}")
        det_a[k - 1] = det
        pa = p[:, v_slot]
        pb = p[:, d_slot]
        update = (
            (m_sq - t_kk) * np.outer(pa, pa)
            + (1.0 + h_kk) * (np.outer(pa, pb) + np.outer(pb, pa))
            - s_kk * np.outer(pb, pb)
        )
        p_orders.append(p - update / det)
    o_vals = np.empty((2, 3))
    for k, m_inv in enumerate((m0_inv, m1_inv, m2_inv)):
        c = m_inv @ w_cols
        for i in range(2):
            o_vals[i, k] = c[:, i] @ grams[k] @ c[:, i]
    return _distill(p_orders, o_vals, det_a, dec, delta, u, "recursive")


def _retagged(dec: Decomposition, tau: float) -> Decomposition:
    if tau < 0.0:
        raise ValueError("tau must be nonnegative")
    return Decomposition(
        v_1=dec.v_1,
        v_2=dec.v_2,
        mu_bar_1=dec.mu_bar_1,
        mu_bar_2=dec.mu_bar_2,
        d_1=dec.d_1,
        d_2=dec.d_2,
        tau=float(tau),
        gram_0=dec.gram_0,
        L_1=dec.L_1,
        R_1=dec.R_1,
        L_2=dec.L_2,
        R_2=dec.R_2,
    )


def risk_identity_check(prims: PrimitiveSet, sol, config: ModelConfig, b: int) -> float:
    """Relative gap between the margin exponent and its primitive form.

    The fitted exponent (w_hat' mu_b)^2 / (2 w_hat' w_hat) must equal

        (m_2^2 s_{2D,2} + b m_1^2 s_{2D,1} + h_{2,2D} + b h_{1,2D})^2
        / (2 o_{2D,2D})

    with every primitive taken at order 2.
    """
    from .risk import group_risk

    if b not in (1, -1):
        raise ValueError("b must be +1 or -1")
    m_1, m_2 = prims.mu_norms
    num = (
        m_2 * m_2 * prims.s_id_j[1, 1, 2]
        + b * m_1 * m_1 * prims.s_id_j[1, 0, 2]
        + prims.h_i_jd[1, 1, 2]
        + b * prims.h_i_jd[0, 1, 2]
    )
    denom = prims.o[1, 2]
    primitive_side = num * num / (2.0 * denom)
    fitted_side = group_risk(sol, config, b).exponent
    scale = max(abs(primitive_side), abs(fitted_side), 1e-300)
    return float(abs(primitive_side - fitted_side) / scale)


def wishart_interval(d: int, n: int, t: float) -> tuple[float, float]:
    """Two-sided band for 1/(u' A^{-1} u), A ~ Wishart(d, I_n).

    With d' = d - n + 1 the band is [d' - sqrt(2 t d'), d' + sqrt(2 t d') + 2 t],
    each tail having probability at most e^{-t}.  Requires d' > 2 max(t, 1).
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    d_prime = d - n + 1
    if not d_prime > 2.0 * max(t, 1.0):
        raise ValueError(
            f"need d - n + 1 > 2 max(t, 1): got d' = {d_prime}, t = {t}"
        )
    half = np.sqrt(2.0 * t * d_prime)
    return float(d_prime - half), float(d_prime + half + 2.0 * t)


def wishart_coverage(
    d: int,
    n: int,
    t: float,
    draws: int,
    seed: int = 0,
    u: np.ndarray | None = None,
) -> dict:
    """Empirical coverage of the band over fresh Wishart draws.

    Each draw forms A = Q Q' with Q an n x d standard normal matrix and
    checks whether 1/(u' A^{-1} u) lands inside the interval.  Returns the
    count, fraction, and the binomial three-sigma acceptance threshold
    for coverage 1 - 2 e^{-t}.
    """
    if draws < 1:
        raise ValueError("draws must be at least 1")
    low, high = wishart_interval(d, n, t)
    if u is None:
        u = np.zeros(n)
        u[0] = 1.0
    else:
        u = np.asarray(u, dtype=np.float64)
        if u.shape != (n,) or abs(np.linalg.norm(u) - 1.0) > 1e-12:
            raise ValueError("u must be a unit n-vector")
    inside = 0
    for trial in range(draws):
        rng = philox_generator(substream_seed(seed, trial), STREAM_WISHART)
        q = rng.standard_normal((n, d))
        gram = q @ q.T
        factor = cho_factor(gram, lower=True, check_finite=False)
        quad = float(u @ cho_solve(factor, u, check_finite=False))
        value = 1.0 / quad
        if low <= value <= high:
            inside += 1
    coverage_target = 1.0 - 2.0 * np.exp(-t)
    sigma = np.sqrt(coverage_target * (1.0 - coverage_target) / draws)
    return {
        "d": d,
        "n": n,
        "t": t,
        "draws": draws,
        "seed": seed,
        "interval_low": low,
        "interval_high": high,
        "inside": inside,
        "fraction": inside / draws,
        "coverage_target": coverage_target,
        "threshold": coverage_target - 3.0 * sigma,
        "passed": bool(inside / draws >= coverage_target - 3.0 * sigma),
    }


@dataclass(frozen=True)
class BandRow:
    """One normalized primitive against its acceptance band."""

    name: str
    k: int
    value: float
    normalized: float
    band_low: float
    band_high: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "k": self.k,
            "value": self.value,
            "normalized": self.normalized,
            "band_low": self.band_low,
            "band_high": self.band_high,
            "pass": self.passed,
        }


@dataclass(frozen=True, eq=False)
class BandReport:
    rows: tuple
    all_pass: bool

    def failures(self):
        return [r for r in self.rows if not r.passed]

    def to_dict(self) -> dict:
        return {"all_pass": self.all_pass, "rows": [r.to_dict() for r in self.rows]}


def verify_primitive_bounds(
    prims: PrimitiveSet,
    config: ModelConfig,
    delta=None,
    band: tuple[float, float] = (0.5, 2.0),
    cross_band: tuple[float, float] = (-2.0, 2.0),
) -> BandReport:
    """Normalize every primitive by its theoretical rate and check bands.

    Sign-definite primitives (diagonal s, t, s_uu, the adjusted diagonals,
    o, det_A) go against `band`; fluctuating ones (cross terms and the
    u-projections) against `cross_band`.  A primitive whose rate vanishes
    because its mean direction is zero must itself be exactly zero.
    """
    if delta is None:
        delta = prims.delta
    delta_plus, delta_minus = float(delta[0]), float(delta[1])
    n, d = config.n, config.d
    tau = prims.tau
    dt = d + tau
    m = prims.mu_norms
    n_delta = config.n_plus / delta_plus**2 + config.n_minus / delta_minus**2
    n_mixed = config.n_plus / delta_plus + config.n_minus / delta_minus

    rows = []

    def add(name, k, value, rate, two_sided):
        lo, hi = band if two_sided else cross_band
        if rate == 0.0:
            # zero-mean direction: the primitive must vanish identically
            rows.append(
                BandRow(
                    name=name,
                    k=k,
                    value=float(value),
                    normalized=0.0,
                    band_low=0.0,
                    band_high=0.0,
                    passed=bool(value == 0.0),
                )
            )
            return
        normalized = float(value / rate)
        rows.append(
            BandRow(
                name=name,
                k=k,
                value=float(value),
                normalized=normalized,
                band_low=lo,
                band_high=hi,
                passed=bool(lo <= normalized <= hi),
            )
        )

    for k in range(3):
        for i in range(2):
            for j in range(2):
                diag = i == j
                add(
                    f"s_{i + 1}{j + 1}",
                    k,
                    prims.s[i, j, k],
                    n / dt,
                    diag,
                )
                add(
                    f"t_{i + 1}{j + 1}",
                    k,
                    prims.t[i, j, k],
                    n * m[i] * m[j] / dt,
                    diag,
                )
                add(
                    f"h_{i + 1}{j + 1}",
                    k,
                    prims.h[i, j, k],
                    n * m[i] / dt,
                    False,
                )
                add(
                    f"s_{i + 1}d_{j + 1}",
                    k,
                    prims.s_id_j[i, j, k],
                    n_mixed / dt,
                    diag,
                )
                add(
                    f"s_{i + 1}d_{j + 1}d",
                    k,
                    prims.s_id_jd[i, j, k],
                    n_delta / dt,
                    diag,
                )
                add(
                    f"h_{i + 1}_{j + 1}d",
                    k,
                    prims.h_i_jd[i, j, k],
                    np.sqrt(n * n_delta) * m[i] / dt,
                    False,
                )
        add("s_uu", k, prims.s_uu[k], 1.0 / dt, True)
        for i in range(2):
            add(f"s_u{i + 1}", k, prims.s_ui[i, k], np.sqrt(n) / dt, False)
            add(
                f"h_{i + 1}u",
                k,
                prims.h_iu[i, k],
                np.sqrt(n) * m[i] / dt,
                False,
            )
            add(f"o_{i + 1}d", k, prims.o[i, k], n_delta * d / dt**2, True)
    for k in (1, 2):
        add(f"det_a_{k}", k, prims.det_a[k - 1], 1.0, True)

    return BandReport(rows=tuple(rows), all_pass=all(r.passed for r in rows))


@dataclass(frozen=True)
class AuxInequalityReport:
    """Numeric checks of the two scalar auxiliary inequalities.

    The first: (1/2)(n_plus/Delta_plus + n_minus/Delta_minus) |mu_bar_c|
    >= C_1 sqrt(n n_delta) with reference constant
    C_1 = sqrt(n_minus / n) |mu_bar_c| / 2.  The second, at constants
    (c_big, c_tilde): (c_tilde / (sqrt(c_big) n)) (n + n_delta)
    <= (1/2)(n_plus/Delta_plus + n_minus/Delta_minus).
    """

    margin_floor_realized: float
    margin_floor_reference: float
    margin_floor_ok: bool
    count_cap_lhs: float
    count_cap_rhs: float
    count_cap_ok: bool
    c_big: float
    c_tilde: float

    @property
    def all_ok(self) -> bool:
        return self.margin_floor_ok and self.count_cap_ok

    def to_dict(self) -> dict:
        return {
            "margin_floor_realized": self.margin_floor_realized,
            "margin_floor_reference": self.margin_floor_reference,
            "margin_floor_ok": self.margin_floor_ok,
            "count_cap_lhs": self.count_cap_lhs,
            "count_cap_rhs": self.count_cap_rhs,
            "count_cap_ok": self.count_cap_ok,
            "c_big": self.c_big,
            "c_tilde": self.c_tilde,
        }


def check_aux_inequalities(
    config: ModelConfig, c_big: float = 145.0, c_tilde: float = 2.01
) -> AuxInequalityReport:
    """Evaluate both scalar inequalities at the config's weights."""
    n = config.n
    mu_c_norm = float(np.linalg.norm(config.mu_core))
    n_delta = config.n_plus / config.delta_plus**2 + config.n_minus / config.delta_minus**2
    n_mixed = config.n_plus / config.delta_plus + config.n_minus / config.delta_minus
    realized = 0.5 * n_mixed * mu_c_norm / np.sqrt(n * n_delta)
    reference = np.sqrt(config.n_minus / n) * mu_c_norm / 2.0
    count_cap_lhs = (c_tilde / (np.sqrt(c_big) * n)) * (n + n_delta)
    count_cap_rhs = 0.5 * n_mixed
    return AuxInequalityReport(
        margin_floor_realized=float(realized),
        margin_floor_reference=float(reference),
        margin_floor_ok=bool(realized >= reference * (1.0 - 1e-12)),
        count_cap_lhs=float(count_cap_lhs),
        count_cap_rhs=float(count_cap_rhs),
        count_cap_ok=bool(count_cap_lhs <= count_cap_rhs),
        c_big=float(c_big),
        c_tilde=float(c_tilde),
    )
