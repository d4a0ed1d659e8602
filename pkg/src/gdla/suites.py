"""Seeded verification suites shared by the CLI and the acceptance tests."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from statistics import median

import numpy as np

from .attention import (
    BaselineWeights,
    DiffAttnParams,
    HeadConfig,
    baseline_multihead,
    diff_attention,
    linear_attention,
    softmax_attention,
)
from .diagnostics.flops import flop_count
from .diagnostics.gradcheck import gradcheck
from .mixer import FFN_KINDS, FfnConfig, FfnWeights, MixerWeights, ffn_forward, gdla_block_forward
from .prng import Xoshiro256
from .tensor import GridShape

GRADCHECK_KINDS = ("softmax", "linear", "diff", "gdla_block")


@dataclass(frozen=True)
class GradcheckRow:
    kind: str
    seed: int
    ratio: float
    rel_error: float
    passed: bool


def scalar_loss(kind: str, seed: int):
    """``(fn, theta)``: a random linear readout of one forward pass.

    ``theta`` is the query matrix for the single-head kernels and the token
    matrix for the full block; everything else is frozen by ``seed``.
    """
    rng = Xoshiro256(seed)
    if kind == "gdla_block":
        grid = GridShape(4, 4)
        cfg = HeadConfig(d_model=8, heads=2, d_h=4, layer_index=2)
        ffn = FfnConfig("mixffn", alpha=2)
        weights = MixerWeights.init(cfg, ffn, rng)
        theta = rng.normal_array((grid.n_tokens, cfg.d_model))
        readout = rng.normal_array(theta.shape)

        def fn(x):
            return float(np.sum(readout * gdla_block_forward(x, grid, weights, cfg, ffn)))

        return fn, theta
    n, d = 6, 4
    theta = rng.normal_array((n, d))
    k = rng.normal_array((n, d))
    v = rng.normal_array((n, d))
    readout = rng.normal_array((n, d))
    if kind == "softmax":
        def fwd(q):
            return softmax_attention(q, k, v)
    elif kind == "linear":
        def fwd(q):
            return linear_attention(q, k, v)
    elif kind == "diff":
        params = DiffAttnParams.init(d, 2, rng)

        def fwd(q):
            return diff_attention(q, k, v, params)
    else:
        raise ValueError(f"unknown gradcheck kind {kind!r}")
    return (lambda q: float(np.sum(readout * fwd(q)))), theta


def gradcheck_suite(kinds=GRADCHECK_KINDS, seeds=range(5), h: float = 1e-3) -> list[GradcheckRow]:
    rows = []
    for kind in kinds:
        for seed in seeds:
            fn, theta = scalar_loss(kind, seed)
            res = gradcheck(fn, theta, h=h, seed=seed)
            rows.append(GradcheckRow(kind, seed, res.ratio, res.rel_error, res.passed))
    return rows


@dataclass(frozen=True)
class FfnRow:
    kind: str
    check: str
    max_abs: float
    passed: bool


def ffn_suite(d_model: int = 16, grid: GridShape = GridShape(4, 4), seed: int = 0, alpha: float = 4.0) -> list[FfnRow]:
    """Shape, finiteness and zero-gate degeneracy for each FFN kind."""
    rows = []
    rng = Xoshiro256(seed)
    x = rng.uniform_array((grid.n_tokens, d_model), -10.0, 10.0)
    for kind in FFN_KINDS:
        cfg = FfnConfig(kind, alpha=alpha)
        w = FfnWeights.init(d_model, cfg, rng)
        y = ffn_forward(x, cfg, w, grid)
        ok = y.shape == x.shape and bool(np.all(np.isfinite(y)))
        rows.append(FfnRow(kind, "shape_finite", float(np.max(np.abs(y))), ok))
        dh = cfg.hidden(d_model)
        if kind == "mlp":
            zeroed = FfnWeights(w.w_in, np.zeros_like(w.w_out))
        elif kind == "swiglu":
            zeroed = FfnWeights(w.w_in, w.w_out, w_gate=np.zeros_like(w.w_gate))
        else:
            dw = w.dw.copy()
            dw[dh:] = 0.0
            zeroed = FfnWeights(w.w_in, w.w_out, dw=dw)
        z = float(np.max(np.abs(ffn_forward(x, cfg, zeroed, grid))))
        rows.append(FfnRow(kind, "zero_gate", z, z == 0.0))
    return rows


@dataclass(frozen=True)
class AblationRow:
    gate: str
    dwc_kernel: int
    ffn: str
    finite: bool
    max_abs: float
    seconds: float


def ablation_suite(grid=GridShape(16, 16), d_model: int = 32, heads: int = 4, seed: int = 0) -> list[AblationRow]:
    """Every gate x DWC kernel x FFN combination through one block forward."""
    rows = []
    for gate in ("silu", "sigmoid"):
        for k in (3, 5):
            for ffn_kind in FFN_KINDS:
                t0 = time.perf_counter()
                rng = Xoshiro256(seed)
                cfg = HeadConfig(d_model, heads, d_model // heads, layer_index=1, gate=gate)
                ffn = FfnConfig(ffn_kind)
                weights = MixerWeights.init(cfg, ffn, rng, dwc_kernel=k)
                x = rng.normal_array((grid.n_tokens, d_model))
                y = gdla_block_forward(x, grid, weights, cfg, ffn)
                rows.append(
                    AblationRow(gate, k, ffn_kind, bool(np.all(np.isfinite(y))), float(np.max(np.abs(y))),
                                time.perf_counter() - t0)
                )
    return rows


@dataclass(frozen=True)
class BenchRecord:
    kind: str
    n: int
    d_model: int
    heads: int
    t_min: float
    t_median: float
    flops: int
    flops_per_s: float
    time_ratio: float  # t(N) / t(N/2) when the previous sweep point is N/2, else NaN


def grid_for(n: int) -> GridShape:
    """Most square H x W factorization of n."""
    h = int(math.isqrt(n))
    while n % h:
        h -= 1
    return GridShape(h, n // h)


def bench_one(kind: str, n: int, cfg: HeadConfig, seed: int, reps: int = 5, ffn: FfnConfig | None = None):
    rng = Xoshiro256(seed)
    x = rng.normal_array((n, cfg.d_model))
    if kind == "gdla_block":
        ffn = ffn or FfnConfig()
        grid = grid_for(n)
        weights = MixerWeights.init(cfg, ffn, rng)

        def run():
            gdla_block_forward(x, grid, weights, cfg, ffn)
    else:
        weights = BaselineWeights.init(cfg, rng)

        def run():
            baseline_multihead(kind, x, weights)

    run()  # warmup
    times = []
    for _ in range(max(reps, 1)):
        t0 = time.perf_counter()
        run()
        times.append(time.perf_counter() - t0)
    return min(times), median(times), flop_count(kind, cfg, n, ffn=ffn).total


def bench_sweep(kind: str, ns, cfg: HeadConfig, seed: int = 0, reps: int = 5, ffn=None) -> list[BenchRecord]:
    records = []
    prev = None
    for n in ns:
        t_min, t_med, flops = bench_one(kind, n, cfg, seed, reps, ffn)
        t_min = max(t_min, 1e-12)
        t_med = max(t_med, t_min)
        ratio = t_med / prev[1] if prev and 2 * prev[0] == n else math.nan
        records.append(BenchRecord(kind, n, cfg.d_model, cfg.heads, t_min, t_med, flops, flops / t_med, ratio))
        prev = (n, t_med)
    return records
