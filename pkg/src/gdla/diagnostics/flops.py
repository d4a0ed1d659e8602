"""Closed-form operation counts for each attention variant.

A multiply-add counts as two FLOPs (one mult, one add). Transcendental
evaluations (exp, sqrt, sigmoid) are tallied under ``nonlin`` and left out
of ``total``. Each stage records the power of N it scales with so the
absence of quadratic terms can be asserted directly.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..attention import HeadConfig
from ..mixer import FfnConfig

KINDS = ("softmax", "linear", "diff", "gdla_block")


@dataclass(frozen=True)
class Stage:
    name: str
    mults: int = 0
    adds: int = 0
    divs: int = 0
    nonlin: int = 0
    degree: int = 1  # power of N

    @property
    def total(self) -> int:
        return self.mults + self.adds + self.divs


@dataclass(frozen=True)
class FlopReport:
    kind: str
    n: int
    d_model: int
    heads: int
    d_h: int
    k: int
    stages: tuple

    @property
    def mults(self) -> int:
        return sum(s.mults for s in self.stages)

    @property
    def adds(self) -> int:
        return sum(s.adds for s in self.stages)

    @property
    def divs(self) -> int:
        return sum(s.divs for s in self.stages)

    @property
    def nonlin(self) -> int:
        return sum(s.nonlin for s in self.stages)

    @property
    def total(self) -> int:
        return sum(s.total for s in self.stages)

    @property
    def max_degree(self) -> int:
        return max(s.degree for s in self.stages)

    def quadratic_stages(self) -> list[str]:
        return [s.name for s in self.stages if s.degree >= 2]


def _mac(name, count, degree=1):
    return Stage(name, mults=count, adds=count, degree=degree)


def _rmsnorm(name, rows, cols):
    return Stage(name, mults=rows * cols, adds=rows * cols, divs=rows + rows * cols, nonlin=rows)


def _silu(name, count):
    return Stage(name, mults=count, nonlin=count)


def _softmax_rows(name, rows, cols, degree):
    # max-subtract, exp, row sum, normalize
    return Stage(name, adds=2 * rows * cols, divs=rows * cols, nonlin=rows * cols, degree=degree)


def _linear_core(prefix, n, h, d_qk, d_v, branches=1):
    c = h * branches
    return [
        Stage(f"{prefix}feature_map", nonlin=2 * c * n * d_qk),
        _mac(f"{prefix}kv_state", c * n * d_qk * d_v),
        Stage(f"{prefix}key_sum", adds=c * n * d_qk),
        _mac(f"{prefix}numerator", c * n * d_qk * d_v),
        _mac(f"{prefix}normalizer", c * n * d_qk),
        Stage(f"{prefix}divide", divs=c * n * d_v),
    ]


def _gdla_branch(prefix, n, cfg):
    h, dh = cfg.heads, cfg.d_h
    return [
        _mac(f"{prefix}proj_qkvg", 4 * n * cfg.d_model * cfg.d_k),
        *_linear_core(prefix, n, h, dh // 2, dh, branches=2),
        Stage(f"{prefix}lambda_subtract", mults=h * n * dh, adds=h * n * dh),
        _rmsnorm(f"{prefix}head_rmsnorm", h * n, dh),
        _silu(f"{prefix}gate_act", n * cfg.d_k),
        Stage(f"{prefix}gate_mul", mults=n * cfg.d_k),
    ]


def _ffn(n, d, ffn: FfnConfig):
    dh = ffn.hidden(d)
    if ffn.kind == "mlp":
        return [_mac("ffn_in", n * d * dh), _silu("ffn_act", n * dh), _mac("ffn_out", n * dh * d)]
    if ffn.kind == "swiglu":
        return [
            _mac("ffn_in", n * d * dh),
            _mac("ffn_gate_proj", n * d * dh),
            _silu("ffn_act", n * dh),
            Stage("ffn_gate_mul", mults=n * dh),
            _mac("ffn_out", n * dh * d),
        ]
    k2 = ffn.dw_kernel ** 2
    return [
        _mac("ffn_in", n * d * 2 * dh),
        _silu("ffn_act", n * 2 * dh),
        _mac("ffn_dwc", n * 2 * dh * k2),
        _silu("ffn_gate_act", n * dh),
        Stage("ffn_gate_mul", mults=n * dh),
        _mac("ffn_out", n * dh * d),
    ]


def flop_count(kind: str, cfg: HeadConfig, n: int, dwc_kernel: int = 3, ffn: FfnConfig | None = None) -> FlopReport:
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}; expected one of {KINDS}")
    if n < 1:
        raise ValueError(f"N must be positive, got {n}")
    h, dh, dm, dk = cfg.heads, cfg.d_h, cfg.d_model, cfg.d_k
    proj = _mac("proj_qkv", 3 * n * dm * dk)
    out = _mac("out_proj", n * dk * dm)
    if kind == "softmax":
        stages = [
            proj,
            _mac("scores", h * n * n * dh, degree=2),
            Stage("scale", mults=h * n * n, degree=2),
            _softmax_rows("softmax", h * n, n, degree=2),
            _mac("weighted_values", h * n * n * dh, degree=2),
            out,
        ]
    elif kind == "linear":
        stages = [proj, *_linear_core("", n, h, dh, dh), out]
    elif kind == "diff":
        half = dh // 2
        stages = [
            proj,
            Stage("lambda", mults=2 * half, adds=2 * half + 2, nonlin=2, degree=0),
            _mac("scores", 2 * h * n * n * half, degree=2),
            Stage("scale", mults=2 * h * n * n, degree=2),
            _softmax_rows("softmax", 2 * h * n, n, degree=2),
            Stage("combine", mults=h * n * n, adds=h * n * n, degree=2),
            _mac("weighted_values", h * n * n * dh, degree=2),
            _rmsnorm("head_rmsnorm", h * n, dh),
            Stage("rescale", mults=n * dk),
            out,
        ]
    else:
        ffn = ffn or FfnConfig()
        k2 = dwc_kernel ** 2
        stages = [
            _rmsnorm("block_norm1", n, dm),
            *_gdla_branch("global_", n, cfg),
            _mac("local_dwc", 4 * n * dk * k2),
            _mac("local_pwc", 4 * n * dk * dk),
            *_gdla_branch("local_", n, cfg),
            _mac("fusion", n * 2 * dm * dm),
            Stage("residual1", adds=n * dm),
            _rmsnorm("block_norm2", n, dm),
            *_ffn(n, dm, ffn),
            Stage("residual2", adds=n * dm),
        ]
    return FlopReport(kind, n, dm, h, dh, dwc_kernel, tuple(stages))
