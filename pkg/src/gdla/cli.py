"""Command-line front end.

Subcommands: equiv, gradcheck, diag, bench, ffncheck, ablation. Every file goes under
``--out`` (default: $GDLA_OUT_DIR or the working directory).

Exit codes: 0 all cases passed, 1 some case failed, 2 bad usage,
3 I/O failure, 4 unsupported floating-point environment.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .attention import BaselineWeights, HeadConfig
from .diagnostics import (
    DiagnosticMap,
    channel_saliency_map,
    delta_attn_map,
    difference_map,
    equivalence_suite,
    mixer_update,
    token_norm_map,
)
from .diagnostics.maps import MIXER_KINDS
from .mixer import FFN_KINDS, FfnConfig, MixerWeights
from .prng import Xoshiro256
from .suites import GRADCHECK_KINDS, ablation_suite, bench_sweep, ffn_suite, gradcheck_suite
from .tensor import GridShape, TensorError


EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO, EXIT_FPENV = 0, 1, 2, 3, 4
OUT_ENV = "GDLA_OUT_DIR"


class UsageError(Exception):
    pass


def _int_list(text):
    try:
        vals = [int(t) for t in text.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError("values must be positive and the list nonempty")
    return vals


def _size_list(text):
    sizes = []
    for tok in text.split(","):
        n, sep, d = tok.partition("x")
        if not sep:
            raise argparse.ArgumentTypeError(f"size {tok!r} is not NxD")
        try:
            sizes.append((int(n), int(d)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"size {tok!r} is not NxD") from None
    if not sizes or any(n < 1 or d < 1 for n, d in sizes):
        raise argparse.ArgumentTypeError("sizes must be positive")
    return sizes


def _grid(text):
    try:
        return GridShape.parse(text)
    except (ValueError, TensorError):
        raise argparse.ArgumentTypeError(f"grid {text!r} is not HxW") from None


def _seed(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--d-model", type=int, default=32)
    common.add_argument("--heads", type=int, default=4)
    common.add_argument("--d-h", type=int, default=None, help="per-head width (default d_model / heads)")
    common.add_argument("--layer", type=int, default=1, help="1-based layer index")
    common.add_argument("--gate", choices=("silu", "sigmoid"), default="silu")
    common.add_argument("--dwc-kernel", type=int, choices=(3, 5), default=3)
    common.add_argument("--ffn", choices=FFN_KINDS, default="mixffn")
    common.add_argument("--alpha", type=float, default=4.0)
    common.add_argument("--seed", type=_seed, default=0)
    common.add_argument("--out", type=Path, default=None, help=f"output directory (env {OUT_ENV})")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="gdla", description="GDLA attention verification and diagnostics")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("equiv", parents=[common], help="associative vs quadratic linear attention")
    s.add_argument("--sizes", type=_size_list, default=[(8, 4), (16, 8)])
    s.add_argument("--seeds", type=int, default=10, help="number of seeds, counted up from --seed")

    s = sub.add_parser("gradcheck", parents=[common], help="finite-difference smoothness suite")
    s.add_argument("--kinds", default=",".join(GRADCHECK_KINDS))
    s.add_argument("--seeds", type=int, default=5)
    s.add_argument("--step", type=float, default=1e-3)

    s = sub.add_parser("diag", parents=[common], help="write token-norm, update and saliency maps as PGM")
    s.add_argument("--kind", choices=MIXER_KINDS, default="gdla")
    s.add_argument("--grid", type=_grid, default=GridShape(16, 16))
    s.add_argument("--baseline", choices=MIXER_KINDS, default=None,
                   help="also write the update-map difference against this mixer")
    s.add_argument("--probe", choices=("input", "update", "output"), default="output",
                   help="tensor the saliency map is taken from")

    s = sub.add_parser("bench", parents=[common], help="time one kernel over an N sweep")
    s.add_argument("--kind", choices=("linear", "softmax", "diff", "gdla_block"), default="linear")
    s.add_argument("--n", type=_int_list, default=[1024, 2048, 4096])
    s.add_argument("--reps", type=int, default=5)

    s = sub.add_parser("ffncheck", parents=[common], help="FFN variant shape and degeneracy suite")
    s.add_argument("--grid", type=_grid, default=GridShape(4, 4))

    s = sub.add_parser("ablation", parents=[common], help="run gate x kernel x FFN lattice")
    s.add_argument("--grid", type=_grid, default=GridShape(16, 16))
    return p


def check_fp_environment():
    info = np.finfo(np.float64)
    if info.nmant != 52 or info.smallest_subnormal <= 0.0 or 0.1 + 0.2 != 0.30000000000000004:
        raise RuntimeError("IEEE-754 binary64 round-to-nearest with subnormals is required")


def head_config(args) -> HeadConfig:
    d_h = args.d_h if args.d_h is not None else args.d_model // max(args.heads, 1)
    try:
        return HeadConfig(args.d_model, args.heads, d_h, args.layer, args.gate)
    except TensorError as e:
        raise UsageError(str(e)) from None


def out_dir(args) -> Path:
    d = args.out or Path(os.environ.get(OUT_ENV, "."))
    d.mkdir(parents=True, exist_ok=True)
    return d


def cmd_equiv(args) -> int:
    seeds = range(args.seed, args.seed + args.seeds)
    cases = equivalence_suite(seeds, args.sizes)
    path = out_dir(args) / "equiv.csv"
    io.write_csv(cases, path, ["kind", "N", "d", "seed", "max_dev", "pass"])
    failed = sum(not c.passed for c in cases)
    print(f"equiv: {len(cases) - failed}/{len(cases)} cases pass, max deviation "
          f"{max(c.max_dev for c in cases):.3e} -> {path}")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_gradcheck(args) -> int:
    kinds = [k for k in args.kinds.split(",") if k]
    bad = set(kinds) - set(GRADCHECK_KINDS)
    if bad:
        raise UsageError(f"unknown gradcheck kinds {sorted(bad)}")
    rows = gradcheck_suite(kinds, range(args.seed, args.seed + args.seeds), h=args.step)
    path = out_dir(args) / "gradcheck.csv"
    io.write_csv(rows, path, ["kind", "seed", "ratio", "rel_error", "pass"])
    failed = sum(not r.passed for r in rows)
    print(f"gradcheck: {len(rows) - failed}/{len(rows)} cases pass -> {path}")
    return EXIT_FAIL if failed else EXIT_OK


def _mixer(kind, cfg, args, rng):
    if kind == "gdla":
        return MixerWeights.init(cfg, FfnConfig(args.ffn, args.alpha), rng, args.dwc_kernel)
    return BaselineWeights.init(cfg, rng)


def cmd_diag(args) -> int:
    cfg = head_config(args)
    grid = args.grid
    rng = Xoshiro256(args.seed)
    x = rng.normal_array((grid.n_tokens, cfg.d_model))
    try:
        update = mixer_update(args.kind, x, grid, cfg, _mixer(args.kind, cfg, args, rng))
    except TensorError as e:
        raise UsageError(str(e)) from None
    probe = {"input": x, "update": update, "output": x + update}[args.probe]
    maps = {
        "input_norm": token_norm_map(x, grid),
        "delta_attn": delta_attn_map(x, update, grid),
        "saliency": channel_saliency_map(probe, grid),
    }
    if args.baseline:
        base_rng = Xoshiro256(args.seed)
        base_rng.normal_array((grid.n_tokens, cfg.d_model))
        base = mixer_update(args.baseline, x, grid, cfg, _mixer(args.baseline, cfg, args, base_rng))
        diff = difference_map(maps["delta_attn"], delta_attn_map(x, base, grid))
        # signed [-1, 1] shown around mid-grey
        maps[f"delta_attn_minus_{args.baseline}"] = DiagnosticMap(grid, (diff + 1.0) / 2.0, "minmax")
    d = out_dir(args)
    for name, m in maps.items():
        path = d / f"{args.kind}_{name}.pgm"
        io.emit_pgm(m, path)
        print(f"diag: wrote {path}")
    ok = all(np.all((m.values >= 0) & (m.values <= 1)) for m in maps.values())
    return EXIT_OK if ok else EXIT_FAIL


def cmd_bench(args) -> int:
    cfg = head_config(args)
    ffn = FfnConfig(args.ffn, args.alpha)
    records = bench_sweep(args.kind, args.n, cfg, args.seed, args.reps, ffn)
    path = out_dir(args) / f"bench_{args.kind}.csv"
    io.write_csv(records, path)
    for r in records:
        print(f"bench {r.kind} N={r.n}: median {r.t_median * 1e3:.3f} ms, {r.flops} flops, "
              f"t(N)/t(N/2)={r.time_ratio:.2f}")
    return EXIT_OK


def cmd_ffncheck(args) -> int:
    rows = ffn_suite(args.d_model, args.grid, args.seed, args.alpha)
    path = out_dir(args) / "ffncheck.csv"
    io.write_csv(rows, path, ["kind", "check", "max_abs", "pass"])
    failed = sum(not r.passed for r in rows)
    print(f"ffncheck: {len(rows) - failed}/{len(rows)} checks pass -> {path}")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_ablation(args) -> int:
    rows = ablation_suite(args.grid, args.d_model, args.heads, args.seed)
    path = out_dir(args) / "ablation.csv"
    io.write_csv(rows, path)
    failed = sum(not r.finite for r in rows)
    print(f"ablation: {len(rows) - failed}/{len(rows)} configurations finite -> {path}")
    return EXIT_FAIL if failed else EXIT_OK


COMMANDS = {
    "equiv": cmd_equiv,
    "gradcheck": cmd_gradcheck,
    "diag": cmd_diag,
    "bench": cmd_bench,
    "ffncheck": cmd_ffncheck,
    "ablation": cmd_ablation,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with 2 on bad flags
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        check_fp_environment()
    except RuntimeError as e:
        print(f"gdla: {e}", file=sys.stderr)
        return EXIT_FPENV
    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"gdla: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"gdla: I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
