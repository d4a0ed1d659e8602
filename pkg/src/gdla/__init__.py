"""Gated differential linear attention and its baseline attention kernels."""

from .attention import (
    BaselineWeights,
    DiffAttnParams,
    GdlaHeadParams,
    HeadConfig,
    diff_attention,
    diff_attention_multihead,
    diff_linear_attention,
    gated_head,
    gdla_multihead,
    lambda_init,
    linear_attention,
    softmax_attention,
)
from .mixer import FfnConfig, FfnWeights, LocalMixer, MixerWeights, ffn_forward, fuse, gdla_block_forward, local_branch, local_mix
from .prng import Xoshiro256, prng
from .tensor import GridShape, NonFiniteError, TensorError

__version__ = "0.1.0"
