"""Finite-difference smoothness checks.

There is no backprop here, so a check compares central differences at three
step sizes h, h/2, h/4. For a smooth function the successive differences of
the estimates shrink by ~4x per halving; a kink or jump breaks that ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..prng import Xoshiro256
from ..tensor import NonFiniteError

RATIO_BAND = (0.1, 0.6)


def central_difference(fn, theta, h: float, coords=None) -> np.ndarray:
    """Central-difference partials of scalar ``fn`` at ``theta`` (flat coords)."""
    theta = np.array(theta, dtype=np.float64)
    coords = range(theta.size) if coords is None else coords
    grad = []
    for i in coords:
        plus = theta.copy()
        minus = theta.copy()
        plus.flat[i] += h
        minus.flat[i] -= h
        f_plus, f_minus = float(fn(plus)), float(fn(minus))
        if not (math.isfinite(f_plus) and math.isfinite(f_minus)):
            raise NonFiniteError(f"fn is not finite near coordinate {i}")
        grad.append((f_plus - f_minus) / (2.0 * h))
    return np.array(grad)


@dataclass(frozen=True)
class GradcheckResult:
    coords: tuple
    grad_h: np.ndarray
    grad_h2: np.ndarray
    grad_h4: np.ndarray
    ratio: float
    rel_error: float
    passed: bool

    @property
    def richardson(self) -> np.ndarray:
        return (4.0 * self.grad_h2 - self.grad_h) / 3.0


def gradcheck(fn, theta, h: float = 1e-3, n_coords: int = 8, seed: int = 0, floor: float = 1e-9) -> GradcheckResult:
    """Second-order consistency check of central differences.

    ``ratio`` is |g(h/2) - g(h/4)| / |g(h) - g(h/2)| over the sampled
    coordinates; ~0.25 for smooth ``fn``. ``rel_error`` is the distance of
    g(h/2) from the Richardson extrapolate, relative to its size. When the
    h vs h/2 change is below ``floor`` the estimate is already exact (e.g. a
    quadratic) and the check passes outright.
    """
    theta = np.array(theta, dtype=np.float64)
    coords = tuple(Xoshiro256(seed).choice(theta.size, n_coords))
    g1 = central_difference(fn, theta, h, coords)
    g2 = central_difference(fn, theta, h / 2, coords)
    g4 = central_difference(fn, theta, h / 4, coords)
    d1 = float(np.linalg.norm(g1 - g2))
    d2 = float(np.linalg.norm(g2 - g4))
    rich = (4.0 * g2 - g1) / 3.0
    scale = max(float(np.max(np.abs(rich))), 1e-300)
    rel = float(np.max(np.abs(g2 - rich))) / scale
    if d1 <= floor * max(1.0, scale):
        ratio = 0.0 if d2 <= floor * max(1.0, scale) else math.inf
        passed = ratio == 0.0
    else:
        ratio = d2 / d1
        passed = RATIO_BAND[0] <= ratio <= RATIO_BAND[1]
    return GradcheckResult(coords, g1, g2, g4, ratio, rel, passed)
