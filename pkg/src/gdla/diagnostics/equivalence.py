"""Associative vs quadratic linear-attention equivalence harness."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..attention import diff_linear_branches, linear_attention
from ..prng import Xoshiro256

TOLERANCE = 1e-11


@dataclass(frozen=True)
class EquivCase:
    kind: str
    n: int
    d: int
    seed: int
    max_dev: float
    passed: bool


def random_qkv(n: int, d: int, seed: int):
    rng = Xoshiro256(seed)
    q = rng.normal_array((n, d))
    k = rng.normal_array((n, d))
    v = rng.normal_array((n, d))
    lam = rng.normal_array((d,))
    return q, k, v, lam


def check_case(n: int, d: int, seed: int, tol: float = TOLERANCE) -> EquivCase:
    q, k, v, lam = random_qkv(n, d, seed)
    dev = float(np.max(np.abs(linear_attention(q, k, v, "associative") - linear_attention(q, k, v, "quadratic"))))
    if d % 2 == 0:
        a1, a2 = diff_linear_branches(q, k, v, "associative")
        o1, o2 = diff_linear_branches(q, k, v, "quadratic")
        dev = max(
            dev,
            float(np.max(np.abs(a1 - o1))),
            float(np.max(np.abs(a2 - o2))),
            float(np.max(np.abs((a1 - lam * a2) - (o1 - lam * o2)))),
        )
    return EquivCase("linear", n, d, seed, dev, dev <= tol)


def equivalence_suite(seeds, sizes, tol: float = TOLERANCE, workers: int = 1) -> list[EquivCase]:
    """Run every (size, seed) case; results ordered by (N, d, seed)."""
    jobs = [(n, d, s) for n, d in sizes for s in seeds]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            cases = list(pool.map(lambda j: check_case(*j, tol=tol), jobs))
    else:
        cases = [check_case(*j, tol=tol) for j in jobs]
    return sorted(cases, key=lambda c: (c.n, c.d, c.seed))
