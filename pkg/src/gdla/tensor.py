"""Dense float64 tensor primitives.

Tensors are plain ``numpy.ndarray`` values of dtype float64. Every op here
validates shapes, returns a fresh array and refuses to emit NaN/Inf.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

RMS_EPS = 1e-6


class TensorError(ValueError):
    """Shape or argument error raised by a tensor op."""


class NonFiniteError(FloatingPointError):
    """An op produced (or was fed) NaN or Inf."""


@dataclass(frozen=True)
class GridShape:
    """H x W token grid; token ``t`` sits at ``(t // width, t % width)``."""

    height: int
    width: int

    def __post_init__(self):
        if self.height < 1 or self.width < 1:
            raise TensorError(f"grid extents must be positive, got {self.height}x{self.width}")

    @property
    def n_tokens(self) -> int:
        return self.height * self.width

    def position(self, t: int) -> tuple[int, int]:
        return divmod(t, self.width)

    def index(self, row: int, col: int) -> int:
        return row * self.width + col

    @classmethod
    def parse(cls, text: str) -> "GridShape":
        h, _, w = text.lower().partition("x")
        return cls(int(h), int(w))

    def __str__(self):
        return f"{self.height}x{self.width}"


def check_finite(a: np.ndarray, what: str = "tensor") -> np.ndarray:
    if not np.all(np.isfinite(a)):
        raise NonFiniteError(f"{what} contains NaN or Inf")
    return a


def _matrix(a, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise TensorError(f"{name} must be 2-D, got shape {a.shape}")
    return a


def matmul(a, b) -> np.ndarray:
    a = _matrix(a, "a")
    b = _matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise TensorError(f"matmul inner dims differ: {a.shape} @ {b.shape}")
    with np.errstate(over="ignore", invalid="ignore"):
        out = a @ b
    return check_finite(out, "matmul result")


def softmax_rows(a) -> np.ndarray:
    a = check_finite(_matrix(a, "a"), "softmax input")
    e = np.exp(a - a.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def _elu1(x):
    # exp(min(x, 0)) keeps the unused branch from overflowing
    return np.where(x >= 0, x + 1.0, np.exp(np.minimum(x, 0.0)))


def _sigmoid(x):
    # split by sign so exp never overflows
    z = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + z), z / (1.0 + z))


def _silu(x):
    return x * _sigmoid(x)


ACTIVATIONS = {"elu1": _elu1, "silu": _silu, "sigmoid": _sigmoid}


def activation(a, kind: str) -> np.ndarray:
    try:
        fn = ACTIVATIONS[kind]
    except KeyError:
        raise TensorError(f"unknown activation {kind!r}; expected one of {sorted(ACTIVATIONS)}") from None
    a = check_finite(np.asarray(a, dtype=np.float64), "activation input")
    return check_finite(fn(a), f"{kind} output")


def rmsnorm_rows(a, eps: float = RMS_EPS) -> np.ndarray:
    """Scale each row to unit RMS: ``x / sqrt(mean(x**2) + eps)``. No gain."""
    a = check_finite(_matrix(a, "a"), "rmsnorm input")
    if a.shape[1] < 1:
        raise TensorError("rmsnorm needs at least one column")
    return a / np.sqrt(np.mean(a * a, axis=1, keepdims=True) + eps)


def hadamard(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise TensorError(f"hadamard shapes differ: {a.shape} vs {b.shape}")
    with np.errstate(over="ignore", invalid="ignore"):
        out = a * b
    return check_finite(out, "hadamard result")


def elementwise_div(a, b, eps: float = 0.0) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise TensorError(f"division shapes differ: {a.shape} vs {b.shape}")
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        out = a / (b + eps)
    return check_finite(out, "division result")


def concat_channels(a, b) -> np.ndarray:
    a = _matrix(a, "a")
    b = _matrix(b, "b")
    if a.shape[0] != b.shape[0]:
        raise TensorError(f"token counts differ: {a.shape[0]} vs {b.shape[0]}")
    return np.concatenate([a, b], axis=1)


def dwconv2d(x, grid: GridShape, kernels) -> np.ndarray:
    """Depthwise 2-D cross-correlation over the token grid.

    ``x`` is N x C with tokens in row-major grid order, ``kernels`` is
    C x k x k with odd k. Zero same-padding, stride 1.
    """
    x = check_finite(_matrix(x, "x"), "dwconv input")
    kernels = np.asarray(kernels, dtype=np.float64)
    n, c = x.shape
    if n != grid.n_tokens:
        raise TensorError(f"{n} tokens do not fit grid {grid}")
    if kernels.ndim != 3 or kernels.shape[0] != c or kernels.shape[1] != kernels.shape[2]:
        raise TensorError(f"kernels must be {c} x k x k, got {kernels.shape}")
    k = kernels.shape[1]
    if k % 2 == 0:
        raise TensorError(f"kernel size must be odd, got {k}")
    r = k // 2
    img = x.reshape(grid.height, grid.width, c)
    padded = np.zeros((grid.height + 2 * r, grid.width + 2 * r, c))
    padded[r:r + grid.height, r:r + grid.width] = img
    out = np.zeros_like(img)
    # fixed accumulation order: kernel rows, then kernel cols
    for i in range(k):
        for j in range(k):
            out += padded[i:i + grid.height, j:j + grid.width] * kernels[:, i, j]
    return check_finite(out.reshape(n, c), "dwconv output")


def pwconv(x, w) -> np.ndarray:
    """1x1 convolution, i.e. a channel-mixing matmul without bias."""
    return matmul(x, w)
