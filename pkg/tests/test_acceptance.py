"""Exit criteria for the package, one test per criterion."""

import csv
import math
import time

import numpy as np
import pytest

from gdla.attention import (
    DiffAttnParams,
    GdlaHeadParams,
    HeadConfig,
    diff_attention_weights,
    diff_linear_attention,
    gdla_multihead,
    lambda_init,
    linear_attention,
    softmax_weights,
)
from gdla.cli import main
from gdla.diagnostics import equivalence_suite, flop_count
from gdla.io import parse_pgm
from gdla.mixer import FfnConfig, LocalMixer, MixerWeights, gdla_block_forward, local_branch
from gdla.prng import Xoshiro256
from gdla.suites import GRADCHECK_KINDS, ablation_suite, bench_sweep, gradcheck_suite
from gdla.tensor import GridShape

from test_diagnostics import quadratic_fit

criterion = pytest.mark.criterion


@criterion("associativity equivalence: >=100 cases, max |assoc - quad| <= 1e-11, < 30 s")
def test_associativity_equivalence():
    sizes = [(n, d) for n in (1, 2, 4, 8, 16, 64, 256) for d in (2, 4, 8, 16)]
    t0 = time.perf_counter()
    cases = equivalence_suite(range(4), sizes)
    elapsed = time.perf_counter() - t0
    worst = max(c.max_dev for c in cases)
    print(f"{len(cases)} cases, max deviation {worst:.3e}, {elapsed:.2f} s")
    assert len(cases) >= 100
    assert worst <= 1e-11
    assert elapsed < 30


@criterion("GDLA degeneracies: lambda=0 reduction and identical-subspace cancellation <= 1e-12, 20 seeds")
@pytest.mark.parametrize("seed", range(20))
def test_gdla_degeneracies(seed):
    rng = Xoshiro256(seed)
    n, half, dv = 12, 3, 6
    q, k, v = rng.normal_array((n, 2 * half)), rng.normal_array((n, 2 * half)), rng.normal_array((n, dv))
    reduced = diff_linear_attention(q, k, v, np.zeros(dv))
    assert np.max(np.abs(reduced - linear_attention(q[:, :half], k[:, :half], v))) <= 1e-12
    qs, ks = q[:, :half], k[:, :half]
    cancelled = diff_linear_attention(np.hstack([qs, qs]), np.hstack([ks, ks]), v, np.ones(dv))
    assert np.max(np.abs(cancelled)) <= 1e-12


@criterion("row-sum laws: softmax rows 1 +- 1e-10, differential rows (1 - lambda) +- 1e-10")
@pytest.mark.parametrize("seed", range(10))
def test_row_sum_laws(seed):
    rng = Xoshiro256(seed)
    q, k = rng.normal_array((9, 8)), rng.normal_array((9, 8))
    assert np.max(np.abs(softmax_weights(q, k).sum(axis=1) - 1.0)) <= 1e-10
    params = DiffAttnParams.init(8, 1 + seed, rng, scale=0.5)
    lam = (
        math.exp(float(np.dot(params.lambda_q1, params.lambda_k1)))
        - math.exp(float(np.dot(params.lambda_q2, params.lambda_k2)))
        + params.lambda_init
    )
    assert params.value == pytest.approx(lam, abs=1e-15)
    rows = diff_attention_weights(q, k, params.value).sum(axis=1)
    assert np.max(np.abs(rows - (1.0 - lam))) <= 1e-10


@criterion("lambda_init schedule: l=1 -> 0.2, l=100 -> 0.8 +- 1e-12")
def test_lambda_init_schedule():
    assert abs(lambda_init(1) - 0.2) <= 1e-12
    assert abs(lambda_init(100) - 0.8) <= 1e-12


@criterion("local-branch reduction: delta DWC + identity PWC equals global branch <= 1e-12")
@pytest.mark.parametrize("k", [3, 5])
def test_local_branch_reduction(k):
    cfg = HeadConfig(d_model=16, heads=4, d_h=4, layer_index=2)
    grid = GridShape(6, 7)
    rng = Xoshiro256(100 + k)
    heads = [GdlaHeadParams.init(cfg, rng) for _ in range(cfg.heads)]
    x = rng.normal_array((grid.n_tokens, cfg.d_model))
    mixers = {p: LocalMixer.identity(cfg.d_k, k) for p in "qkvg"}
    dev = np.max(np.abs(local_branch(x, grid, heads, mixers, cfg) - gdla_multihead(x, heads, cfg)))
    assert dev <= 1e-12


@criterion("block identity: all-zero weights return the input <= 1e-14, 10 seeds")
@pytest.mark.parametrize("seed", range(10))
def test_block_identity(seed):
    cfg = HeadConfig(d_model=16, heads=4, d_h=4)
    ffn = FfnConfig("mixffn")
    grid = GridShape(5, 5)
    x = Xoshiro256(seed).normal_array((grid.n_tokens, cfg.d_model))
    y = gdla_block_forward(x, grid, MixerWeights.zeros(cfg, ffn), cfg, ffn)
    assert np.max(np.abs(y - x)) <= 1e-14


@criterion("complexity: linear FLOPs affine (zero quadratic residual), softmax quadratic > 0, no N^2 stage in GDLA block")
def test_complexity_certification(tmp_path):
    cfg = HeadConfig(d_model=32, heads=4, d_h=8)
    ns = (1024, 2048, 4096)
    a_lin, _, c_lin = quadratic_fit(ns, [flop_count("linear", cfg, n).total for n in ns])
    a_soft, _, _ = quadratic_fit(ns, [flop_count("softmax", cfg, n).total for n in ns])
    block = flop_count("gdla_block", cfg, 4096)
    assert a_lin == 0 and c_lin == 0
    assert a_soft > 0
    assert block.quadratic_stages() == []

    # informational timing ratio, carried in the bench CSV
    for kind in ("linear", "softmax"):
        assert main(["bench", "--kind", kind, "--n", "2048,4096", "--reps", "5", "--out", str(tmp_path)]) == 0
        with open(tmp_path / f"bench_{kind}.csv") as fh:
            rows = list(csv.DictReader(fh))
        ratio = float(rows[-1]["time_ratio"])
        print(f"{kind}: t(4096)/t(2048) = {ratio:.2f}")
        assert math.isfinite(ratio) and ratio > 0


@criterion("gradient smoothness: h vs h/2 ratio in [0.1, 0.6] for softmax, linear, diff, GDLA block, 5 seeds each")
def test_gradient_smoothness():
    rows = gradcheck_suite(GRADCHECK_KINDS, range(5))
    for r in rows:
        print(f"{r.kind:10s} seed {r.seed}: ratio {r.ratio:.4f}")
    assert len(rows) == 20
    assert all(0.1 <= r.ratio <= 0.6 for r in rows)


@criterion("diagnostics determinism: diag twice gives byte-identical PGMs, values in [0,1]")
def test_diag_determinism(tmp_path):
    runs = [tmp_path / "a", tmp_path / "b"]
    for d in runs:
        assert main(["diag", "--kind", "gdla", "--grid", "16x16", "--seed", "7", "--out", str(d)]) == 0
    files = sorted(p.name for p in runs[0].iterdir())
    assert len(files) == 3
    for name in files:
        data = (runs[0] / name).read_bytes()
        assert data == (runs[1] / name).read_bytes()
        vals = parse_pgm(data.decode()).values
        assert np.all((vals >= 0) & (vals <= 1))


@criterion("ablation lattice: 12 gate x DWC x FFN configs finite on 16x16, d_model=32, h=4, < 60 s")
def test_ablation_axes():
    t0 = time.perf_counter()
    rows = ablation_suite(GridShape(16, 16), d_model=32, heads=4)
    elapsed = time.perf_counter() - t0
    assert len(rows) == 12
    assert {(r.gate, r.dwc_kernel, r.ffn) for r in rows} == {
        (g, k, f) for g in ("silu", "sigmoid") for k in (3, 5) for f in ("mlp", "swiglu", "mixffn")
    }
    assert all(r.finite for r in rows)
    assert elapsed < 60
