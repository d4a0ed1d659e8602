"""Attention kernels: softmax, differential, linear and gated differential linear.

Single-head kernels take already projected Q, K, V (rows are tokens).
The multi-head helpers take the token matrix X plus per-head weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .prng import Xoshiro256
from .tensor import (
    TensorError,
    activation,
    check_finite,
    concat_channels,
    hadamard,
    matmul,
    rmsnorm_rows,
    softmax_rows,
)

Z_FLOOR = 1e-9
GATE_KINDS = ("silu", "sigmoid")
FEATURE_MAPS = ("elu1",)


@dataclass(frozen=True)
class HeadConfig:
    d_model: int
    heads: int
    d_h: int
    layer_index: int = 1
    gate: str = "silu"
    feature_map: str = "elu1"

    def __post_init__(self):
        if self.d_model < 1 or self.heads < 1 or self.d_h < 1:
            raise TensorError(f"non-positive width in {self}")
        if self.d_h % 2:
            raise TensorError(f"per-head width must be even to split query/key subspaces, got {self.d_h}")
        if self.layer_index < 1:
            raise TensorError(f"layer index is 1-based, got {self.layer_index}")
        if self.gate not in GATE_KINDS:
            raise TensorError(f"gate must be one of {GATE_KINDS}, got {self.gate!r}")
        if self.feature_map not in FEATURE_MAPS:
            raise TensorError(f"feature map must be one of {FEATURE_MAPS}, got {self.feature_map!r}")

    @property
    def d_k(self) -> int:
        return self.heads * self.d_h

    @property
    def lambda_init(self) -> float:
        return lambda_init(self.layer_index)


def lambda_init(layer: int) -> float:
    """Depth schedule ``0.8 - 0.6 * exp(-0.3 * (layer - 1))`` for 1-based layers."""
    if layer < 1:
        raise TensorError(f"layer index is 1-based, got {layer}")
    return 0.8 - 0.6 * math.exp(-0.3 * (layer - 1))


@dataclass(frozen=True)
class DiffAttnParams:
    """Reparameterized scalar subtraction weight of differential attention."""

    lambda_q1: np.ndarray
    lambda_k1: np.ndarray
    lambda_q2: np.ndarray
    lambda_k2: np.ndarray
    lambda_init: float

    @property
    def value(self) -> float:
        return (
            math.exp(float(np.dot(self.lambda_q1, self.lambda_k1)))
            - math.exp(float(np.dot(self.lambda_q2, self.lambda_k2)))
            + self.lambda_init
        )

    @classmethod
    def init(cls, d_h: int, layer: int, rng: Xoshiro256 | None = None, scale: float = 0.1):
        half = d_h // 2
        if rng is None:
            vecs = [np.zeros(half) for _ in range(4)]
        else:
            vecs = [rng.normal_array((half,), scale) for _ in range(4)]
        return cls(*vecs, lambda_init=lambda_init(layer))


@dataclass(frozen=True)
class GdlaHeadParams:
    w_q: np.ndarray
    w_k: np.ndarray
    w_v: np.ndarray
    w_g: np.ndarray
    lam: np.ndarray

    def check(self, cfg: HeadConfig):
        want = (cfg.d_model, cfg.d_h)
        for name in ("w_q", "w_k", "w_v", "w_g"):
            if getattr(self, name).shape != want:
                raise TensorError(f"{name} has shape {getattr(self, name).shape}, expected {want}")
        if self.lam.shape != (cfg.d_h,):
            raise TensorError(f"lambda vector has shape {self.lam.shape}, expected ({cfg.d_h},)")

    @classmethod
    def init(cls, cfg: HeadConfig, rng: Xoshiro256):
        w = [rng.init_weight(cfg.d_model, cfg.d_model, cfg.d_h) for _ in range(4)]
        return cls(*w, lam=np.full(cfg.d_h, cfg.lambda_init))

    @classmethod
    def zeros(cls, cfg: HeadConfig):
        w = [np.zeros((cfg.d_model, cfg.d_h)) for _ in range(4)]
        return cls(*w, lam=np.full(cfg.d_h, cfg.lambda_init))


def _check_qkv(q, k, v):
    q, k, v = (np.asarray(t, dtype=np.float64) for t in (q, k, v))
    if q.ndim != 2 or k.ndim != 2 or v.ndim != 2:
        raise TensorError("Q, K, V must be 2-D")
    if q.shape != k.shape:
        raise TensorError(f"Q and K shapes differ: {q.shape} vs {k.shape}")
    if v.shape[0] != k.shape[0]:
        raise TensorError(f"K has {k.shape[0]} tokens but V has {v.shape[0]}")
    return q, k, v


def _halves(t: np.ndarray):
    d = t.shape[1]
    if d % 2:
        raise TensorError(f"cannot split odd width {d} into two subspaces")
    return t[:, : d // 2], t[:, d // 2:]


def softmax_weights(q, k) -> np.ndarray:
    return softmax_rows(matmul(q, k.T) / math.sqrt(q.shape[1]))


def softmax_attention(q, k, v) -> np.ndarray:
    q, k, v = _check_qkv(q, k, v)
    return matmul(softmax_weights(q, k), v)


def diff_attention_weights(q, k, lam: float) -> np.ndarray:
    """Combined map ``A1 - lam * A2``; each branch scaled by sqrt(d_h / 2)."""
    q1, q2 = _halves(q)
    k1, k2 = _halves(k)
    return softmax_weights(q1, k1) - lam * softmax_weights(q2, k2)


def diff_attention(q, k, v, params: DiffAttnParams | float) -> np.ndarray:
    q, k, v = _check_qkv(q, k, v)
    lam = params.value if isinstance(params, DiffAttnParams) else float(params)
    return matmul(diff_attention_weights(q, k, lam), v)


def diff_attention_multihead(x, heads, params: DiffAttnParams, w_o) -> np.ndarray:
    """Multi-head differential attention with a layer-shared lambda.

    ``heads`` is a sequence of ``(w_q, w_k, w_v)`` triples, each d_model x d_h.
    Every head is RMS-normalized and rescaled by ``1 - lambda_init`` before
    concatenation and the ``w_o`` projection.
    """
    x = np.asarray(x, dtype=np.float64)
    if not heads:
        raise TensorError("need at least one head")
    outs = []
    for w_q, w_k, w_v in heads:
        head = diff_attention(matmul(x, w_q), matmul(x, w_k), matmul(x, w_v), params)
        outs.append((1.0 - params.lambda_init) * rmsnorm_rows(head))
    cat = np.concatenate(outs, axis=1)
    if w_o.shape[0] != cat.shape[1]:
        raise TensorError(f"w_o expects {w_o.shape[0]} input channels, heads give {cat.shape[1]}")
    return matmul(cat, w_o)


def feature_map(t, kind: str = "elu1") -> np.ndarray:
    if kind not in FEATURE_MAPS:
        raise TensorError(f"unknown feature map {kind!r}")
    return activation(t, kind)


def _normalizer(phi_q, phi_k) -> np.ndarray:
    z = matmul(phi_q, phi_k.sum(axis=0)[:, None])
    return np.maximum(z, Z_FLOOR)


def linear_weights(q, k) -> np.ndarray:
    """Explicit N x N row-normalized kernel weights (quadratic cost)."""
    phi_q, phi_k = feature_map(q), feature_map(k)
    return matmul(phi_q, phi_k.T) / _normalizer(phi_q, phi_k)


def linear_attention(q, k, v, mode: str = "associative") -> np.ndarray:
    q, k, v = _check_qkv(q, k, v)
    phi_q, phi_k = feature_map(q), feature_map(k)
    z = _normalizer(phi_q, phi_k)
    if mode == "associative":
        num = matmul(phi_q, matmul(phi_k.T, v))
    elif mode == "quadratic":
        num = matmul(matmul(phi_q, phi_k.T), v)
    else:
        raise TensorError(f"mode must be 'associative' or 'quadratic', got {mode!r}")
    return check_finite(num / z, "linear attention output")


def diff_linear_branches(q, k, v, mode: str = "associative"):
    q, k, v = _check_qkv(q, k, v)
    q1, q2 = _halves(q)
    k1, k2 = _halves(k)
    return linear_attention(q1, k1, v, mode), linear_attention(q2, k2, v, mode)


def diff_linear_attention(q, k, v, lam, mode: str = "associative") -> np.ndarray:
    """``A1 - lam * A2`` with ``lam`` a per-channel vector over V's width."""
    lam = np.asarray(lam, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if lam.shape != (v.shape[1],):
        raise TensorError(f"lambda has shape {lam.shape}, V width is {v.shape[1]}")
    a1, a2 = diff_linear_branches(q, k, v, mode)
    return a1 - lam * a2


def gated_head_from_projections(q, k, v, g_raw, lam, gate: str = "silu") -> np.ndarray:
    y = rmsnorm_rows(diff_linear_attention(q, k, v, lam))
    return hadamard(y, activation(g_raw, gate))


def gated_head(x, params: GdlaHeadParams, cfg: HeadConfig) -> np.ndarray:
    params.check(cfg)
    return gated_head_from_projections(
        matmul(x, params.w_q),
        matmul(x, params.w_k),
        matmul(x, params.w_v),
        matmul(x, params.w_g),
        params.lam,
        cfg.gate,
    )


def gdla_multihead(x, heads, cfg: HeadConfig) -> np.ndarray:
    """Concatenate gated heads in order. No (1 - lambda_init) rescale here."""
    if len(heads) != cfg.heads:
        raise TensorError(f"config wants {cfg.heads} heads, got {len(heads)}")
    out = gated_head(x, heads[0], cfg)
    for p in heads[1:]:
        out = concat_channels(out, gated_head(x, p, cfg))
    return out


@dataclass
class BaselineWeights:
    """Projections for the softmax / linear / differential baseline mixers."""

    heads: list = field(default_factory=list)  # (w_q, w_k, w_v) per head
    diff: DiffAttnParams | None = None
    w_o: np.ndarray | None = None

    @classmethod
    def init(cls, cfg: HeadConfig, rng: Xoshiro256):
        heads = [
            tuple(rng.init_weight(cfg.d_model, cfg.d_model, cfg.d_h) for _ in range(3))
            for _ in range(cfg.heads)
        ]
        diff = DiffAttnParams.init(cfg.d_h, cfg.layer_index, rng)
        w_o = rng.init_weight(cfg.d_k, cfg.d_k, cfg.d_model)
        return cls(heads, diff, w_o)


def baseline_multihead(kind: str, x, weights: BaselineWeights) -> np.ndarray:
    """Standard multi-head mixer around one of the baseline kernels."""
    if kind == "diff":
        return diff_attention_multihead(x, weights.heads, weights.diff, weights.w_o)
    if kind == "softmax":
        kernel = softmax_attention
    elif kind == "linear":
        kernel = linear_attention
    else:
        raise TensorError(f"unknown baseline kind {kind!r}")
    outs = [kernel(matmul(x, wq), matmul(x, wk), matmul(x, wv)) for wq, wk, wv in weights.heads]
    return matmul(np.concatenate(outs, axis=1), weights.w_o)
