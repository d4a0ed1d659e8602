"""Per-token diagnostic maps over the token grid."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..attention import BaselineWeights, HeadConfig, baseline_multihead
from ..mixer import MixerWeights, gdla_mixer
from ..tensor import GridShape, TensorError, rmsnorm_rows

MIXER_KINDS = ("linear", "diff", "softmax", "gdla")


@dataclass(frozen=True)
class DiagnosticMap:
    grid: GridShape
    values: np.ndarray  # length H*W, row-major
    normalization: str = "minmax"

    def __post_init__(self):
        if self.values.shape != (self.grid.n_tokens,):
            raise TensorError(f"map has {self.values.shape} values for grid {self.grid}")

    def as_image(self) -> np.ndarray:
        return self.values.reshape(self.grid.height, self.grid.width)


def minmax(values) -> np.ndarray:
    """Rescale to [0, 1]; a constant input maps to all zeros."""
    values = np.asarray(values, dtype=np.float64)
    lo, hi = values.min(), values.max()
    if hi == lo:
        return np.zeros_like(values)
    return np.clip((values - lo) / (hi - lo), 0.0, 1.0)


def _token_rows(x, grid):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != grid.n_tokens:
        raise TensorError(f"tensor of shape {x.shape} does not fit grid {grid}")
    return x


def token_norms(x) -> np.ndarray:
    return np.sqrt(np.sum(x * x, axis=1))


def token_rms(x) -> np.ndarray:
    return np.sqrt(np.mean(x * x, axis=1))


def token_norm_map(x, grid: GridShape, normalize: bool = True) -> DiagnosticMap:
    v = token_norms(_token_rows(x, grid))
    return DiagnosticMap(grid, minmax(v), "minmax") if normalize else DiagnosticMap(grid, v, "raw")


def delta_attn_map(x, update, grid: GridShape, normalize: bool = True) -> DiagnosticMap:
    """Magnitude of the mixer's pre-residual update at each token."""
    x = _token_rows(x, grid)
    update = _token_rows(update, grid)
    if x.shape != update.shape:
        raise TensorError(f"input {x.shape} and update {update.shape} differ")
    v = token_norms(update)
    return DiagnosticMap(grid, minmax(v), "minmax") if normalize else DiagnosticMap(grid, v, "raw")


def channel_saliency_map(x, grid: GridShape, normalize: bool = True) -> DiagnosticMap:
    v = token_rms(_token_rows(x, grid))
    return DiagnosticMap(grid, minmax(v), "minmax") if normalize else DiagnosticMap(grid, v, "raw")


def difference_map(a: DiagnosticMap, b: DiagnosticMap) -> np.ndarray:
    """Signed ``a - b`` of two normalized maps, clipped to [-1, 1]."""
    if a.grid != b.grid:
        raise TensorError(f"grids differ: {a.grid} vs {b.grid}")
    return np.clip(a.values - b.values, -1.0, 1.0)


def mixer_update(kind: str, x, grid: GridShape, cfg: HeadConfig, weights) -> np.ndarray:
    """Pre-residual mixer output on the RMS-normalized input."""
    xn = rmsnorm_rows(x)
    if kind == "gdla":
        if not isinstance(weights, MixerWeights):
            raise TensorError("gdla mixer needs MixerWeights")
        return gdla_mixer(xn, grid, weights, cfg)
    if kind not in MIXER_KINDS:
        raise TensorError(f"unknown mixer kind {kind!r}")
    if not isinstance(weights, BaselineWeights):
        raise TensorError(f"{kind} mixer needs BaselineWeights")
    return baseline_multihead(kind, xn, weights)
