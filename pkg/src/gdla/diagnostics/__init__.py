from .equivalence import EquivCase, equivalence_suite
from .flops import FlopReport, Stage, flop_count
from .gradcheck import GradcheckResult, central_difference, gradcheck
from .maps import (
    DiagnosticMap,
    channel_saliency_map,
    delta_attn_map,
    difference_map,
    minmax,
    mixer_update,
    token_norm_map,
)

__all__ = [
    "DiagnosticMap",
    "EquivCase",
    "FlopReport",
    "GradcheckResult",
    "Stage",
    "central_difference",
    "channel_saliency_map",
    "delta_attn_map",
    "difference_map",
    "equivalence_suite",
    "flop_count",
    "gradcheck",
    "minmax",
    "mixer_update",
    "token_norm_map",
]
