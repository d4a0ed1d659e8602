"""GDLA mixer block: global gated branch, local token-mixing branch, fusion, FFN."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .attention import (
    GdlaHeadParams,
    HeadConfig,
    gated_head_from_projections,
    gdla_multihead,
)
from .prng import Xoshiro256
from .tensor import (
    GridShape,
    TensorError,
    activation,
    concat_channels,
    dwconv2d,
    hadamard,
    matmul,
    pwconv,
    rmsnorm_rows,
)

FFN_KINDS = ("mlp", "swiglu", "mixffn")
DWC_KERNELS = (3, 5)
LOCAL_PATHS = ("q", "k", "v", "g")


@dataclass(frozen=True)
class FfnConfig:
    kind: str = "mixffn"
    alpha: float = 4.0
    dw_kernel: int = 3

    def __post_init__(self):
        if self.kind not in FFN_KINDS:
            raise TensorError(f"ffn kind must be one of {FFN_KINDS}, got {self.kind!r}")
        if self.alpha <= 0:
            raise TensorError(f"expansion must be positive, got {self.alpha}")
        if self.dw_kernel < 1 or self.dw_kernel % 2 == 0:
            raise TensorError(f"ffn depthwise kernel must be odd, got {self.dw_kernel}")

    def hidden(self, d_model: int) -> int:
        return max(1, int(round(self.alpha * d_model)))


@dataclass
class FfnWeights:
    """``w_in`` feeds the hidden layer, ``w_gate`` is SwiGLU's linear half,
    ``dw`` are Mix-FFN depthwise kernels, ``w_out`` projects back."""

    w_in: np.ndarray
    w_out: np.ndarray
    w_gate: np.ndarray | None = None
    dw: np.ndarray | None = None

    @classmethod
    def init(cls, d_model: int, cfg: FfnConfig, rng: Xoshiro256 | None):
        dh = cfg.hidden(d_model)
        if rng is None:
            def make(fan_in, *shape):
                return np.zeros(shape)
        else:
            make = rng.init_weight
        k = cfg.dw_kernel
        if cfg.kind == "mlp":
            return cls(make(d_model, d_model, dh), make(dh, dh, d_model))
        if cfg.kind == "swiglu":
            return cls(make(d_model, d_model, dh), make(dh, dh, d_model), w_gate=make(d_model, d_model, dh))
        return cls(make(d_model, d_model, 2 * dh), make(dh, dh, d_model), dw=make(k * k, 2 * dh, k, k))


def ffn_forward(x, cfg: FfnConfig, weights: FfnWeights, grid: GridShape | None = None) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if cfg.kind == "mlp":
        return matmul(activation(matmul(x, weights.w_in), "silu"), weights.w_out)
    if cfg.kind == "swiglu":
        if weights.w_gate is None:
            raise TensorError("swiglu needs w_gate")
        h = hadamard(activation(matmul(x, weights.w_in), "silu"), matmul(x, weights.w_gate))
        return matmul(h, weights.w_out)
    if grid is None:
        raise TensorError("mixffn needs a token grid")
    if weights.dw is None:
        raise TensorError("mixffn needs depthwise kernels")
    h = dwconv2d(activation(pwconv(x, weights.w_in), "silu"), grid, weights.dw)
    dh = h.shape[1] // 2
    x_hat, g = h[:, :dh], h[:, dh:]
    return pwconv(hadamard(x_hat, activation(g, "silu")), weights.w_out)


def local_mix(x, grid: GridShape, dw_kernels, pw) -> np.ndarray:
    """Depthwise conv on the grid followed by a pointwise channel mix."""
    return pwconv(dwconv2d(x, grid, dw_kernels), pw)


@dataclass
class LocalMixer:
    dw: np.ndarray  # d_k x k x k
    pw: np.ndarray  # d_k x d_k

    @classmethod
    def init(cls, d_k: int, k: int, rng: Xoshiro256):
        return cls(rng.init_weight(k * k, d_k, k, k), rng.init_weight(d_k, d_k, d_k))

    @classmethod
    def identity(cls, d_k: int, k: int = 3):
        dw = np.zeros((d_k, k, k))
        dw[:, k // 2, k // 2] = 1.0
        return cls(dw, np.eye(d_k))

    @classmethod
    def zeros(cls, d_k: int, k: int = 3):
        return cls(np.zeros((d_k, k, k)), np.zeros((d_k, d_k)))

    def __call__(self, x, grid):
        return local_mix(x, grid, self.dw, self.pw)


def _stack(heads, name):
    return np.concatenate([getattr(p, name) for p in heads], axis=1)


def local_branch(x, grid: GridShape, heads, mixers: dict, cfg: HeadConfig) -> np.ndarray:
    """GDLA multi-head on locally mixed projections.

    Projections are taken with all heads stacked (d_model x d_k), each mixed
    by ``mixers[path]`` over the full d_k channels, then sliced back per head.
    ``heads[i].lam`` plays the role of the local subtraction vector.
    """
    x = np.asarray(x, dtype=np.float64)
    if len(heads) != cfg.heads:
        raise TensorError(f"config wants {cfg.heads} heads, got {len(heads)}")
    if x.shape[0] != grid.n_tokens:
        raise TensorError(f"{x.shape[0]} tokens do not fit grid {grid}")
    for p in heads:
        p.check(cfg)
    mixed = {
        path: mixers[path](matmul(x, _stack(heads, f"w_{path}")), grid)
        for path in LOCAL_PATHS
    }
    outs = []
    for i, p in enumerate(heads):
        sl = slice(i * cfg.d_h, (i + 1) * cfg.d_h)
        outs.append(
            gated_head_from_projections(
                mixed["q"][:, sl], mixed["k"][:, sl], mixed["v"][:, sl], mixed["g"][:, sl], p.lam, cfg.gate
            )
        )
    return np.concatenate(outs, axis=1)


def fuse(global_out, local_out, w_o) -> np.ndarray:
    global_out = np.asarray(global_out, dtype=np.float64)
    local_out = np.asarray(local_out, dtype=np.float64)
    if global_out.shape != local_out.shape:
        raise TensorError(f"branch widths differ: {global_out.shape} vs {local_out.shape}")
    if w_o.shape[0] != 2 * global_out.shape[1]:
        raise TensorError(f"fusion matrix expects {w_o.shape[0]} channels, got 2x{global_out.shape[1]}")
    return matmul(concat_channels(global_out, local_out), w_o)


@dataclass
class MixerWeights:
    global_heads: list
    local_heads: list
    local_mixers: dict
    w_o: np.ndarray
    ffn: FfnWeights
    dwc_kernel: int = 3

    def check(self, cfg: HeadConfig):
        if cfg.d_k != cfg.d_model:
            raise TensorError(f"heads * d_h must equal d_model ({cfg.d_k} != {cfg.d_model})")
        if self.w_o.shape != (2 * cfg.d_model, cfg.d_model):
            raise TensorError(f"fusion matrix must be {2 * cfg.d_model}x{cfg.d_model}, got {self.w_o.shape}")
        if self.dwc_kernel not in DWC_KERNELS:
            raise TensorError(f"dwc kernel must be one of {DWC_KERNELS}, got {self.dwc_kernel}")
        if set(self.local_mixers) != set(LOCAL_PATHS):
            raise TensorError(f"local mixers needed for paths {LOCAL_PATHS}")

    @classmethod
    def init(cls, cfg: HeadConfig, ffn: FfnConfig, rng: Xoshiro256, dwc_kernel: int = 3):
        global_heads = [GdlaHeadParams.init(cfg, rng) for _ in range(cfg.heads)]
        local_heads = [GdlaHeadParams.init(cfg, rng) for _ in range(cfg.heads)]
        mixers = {path: LocalMixer.init(cfg.d_k, dwc_kernel, rng) for path in LOCAL_PATHS}
        w_o = rng.init_weight(2 * cfg.d_model, 2 * cfg.d_model, cfg.d_model)
        return cls(global_heads, local_heads, mixers, w_o, FfnWeights.init(cfg.d_model, ffn, rng), dwc_kernel)

    @classmethod
    def zeros(cls, cfg: HeadConfig, ffn: FfnConfig, dwc_kernel: int = 3):
        return cls(
            [GdlaHeadParams.zeros(cfg) for _ in range(cfg.heads)],
            [GdlaHeadParams.zeros(cfg) for _ in range(cfg.heads)],
            {path: LocalMixer.zeros(cfg.d_k, dwc_kernel) for path in LOCAL_PATHS},
            np.zeros((2 * cfg.d_model, cfg.d_model)),
            FfnWeights.init(cfg.d_model, ffn, None),
            dwc_kernel,
        )


def gdla_mixer(x, grid: GridShape, weights: MixerWeights, cfg: HeadConfig) -> np.ndarray:
    """Fused global + local output, before any residual."""
    weights.check(cfg)
    g = gdla_multihead(x, weights.global_heads, cfg)
    loc = local_branch(x, grid, weights.local_heads, weights.local_mixers, cfg)
    return fuse(g, loc, weights.w_o)


def gdla_block_forward(x, grid: GridShape, weights: MixerWeights, cfg: HeadConfig, ffn: FfnConfig) -> np.ndarray:
    """Pre-norm residual block: mixer then FFN, each on an RMS-normalized input."""
    x = np.asarray(x, dtype=np.float64)
    y = x + gdla_mixer(rmsnorm_rows(x), grid, weights, cfg)
    return y + ffn_forward(rmsnorm_rows(y), ffn, weights.ffn, grid)
