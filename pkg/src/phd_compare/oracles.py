"""Slow reference implementations used to cross-check the fast numeric paths.

Everything here is written as explicit loops on purpose: the point is to share
neither code nor summation order with what it checks. The CLI's oracle-check
command and the test suite both drive these.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .doctrine import DoctrineSpec, apply_doctrine, doctrine_mask
from .metrics import lp_norm
from .phd import GridPhd, GridSpec, mass_in

__all__ = [
    "convolve_direct",
    "lp_norm_direct",
    "mass_in_quadrature",
    "CheckResult",
    "run_all_checks",
]


def convolve_direct(values, mask_values, dx: float) -> np.ndarray:
    """O(n*m) double-loop zero-padded convolution, centered mask."""
    values = list(map(float, values))
    mask_values = list(map(float, mask_values))
    n = len(values)
    m = len(mask_values)
    k = (m - 1) // 2
    out = np.zeros(n)
    for i in range(n):
        acc = 0.0
        for j in range(n):
            t = k + i - j
            if 0 <= t < m:
                acc += values[j] * mask_values[t]
        out[i] = acc * dx
    return out


def lp_norm_direct(values, dx: float, p) -> float:
    """Scalar-accumulation Lp norm."""
    q = float(p)
    if math.isinf(q):
        best = 0.0
        for v in values:
            best = max(best, abs(float(v)))
        return best
    acc = 0.0
    for v in values:
        acc += abs(float(v)) ** q * dx
    return acc ** (1.0 / q)


def mass_in_quadrature(phd: GridPhd, a: float, b: float, n_samples: int = 20000) -> float:
    """Midpoint-rule integral of the piecewise-constant intensity over [a, b]."""
    if b <= a:
        return 0.0
    spec = phd.spec
    step = (b - a) / n_samples
    acc = 0.0
    for j in range(n_samples):
        x = a + (j + 0.5) * step
        i = int(math.floor((x - spec.x_min) / spec.dx))
        if 0 <= i < spec.n_bins:
            acc += float(phd.values[i]) * step
    return acc


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str


def _check_convolution(rng: np.random.Generator, trials: int) -> CheckResult:
    worst = 0.0
    spec = GridSpec(0.0, 128.0, 256)
    for _ in range(trials):
        values = rng.uniform(0.0, 2.0, spec.n_bins)
        values[rng.random(spec.n_bins) < 0.5] = 0.0
        grid = GridPhd(spec, values)
        doc = DoctrineSpec.evenly_spaced(
            spacing=rng.uniform(2.0, 8.0), sigma=rng.uniform(0.3, 1.5)
        )
        mask = doctrine_mask(doc, spec.dx)
        fast = apply_doctrine(grid, mask).grid.values
        slow = convolve_direct(grid.values, mask.values, spec.dx)
        worst = max(worst, float(np.max(np.abs(fast - slow))))
    return CheckResult(
        "convolution vs direct double loop", worst <= 1e-9, f"max abs err {worst:.3e}"
    )


def _check_lp_norms(rng: np.random.Generator, trials: int) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        values = rng.normal(0.0, 3.0, 200)
        dx = rng.uniform(0.1, 2.0)
        for p in (1.0, 2.0, math.inf):
            worst = max(
                worst, abs(lp_norm(values, dx, p) - lp_norm_direct(values, dx, p))
            )
    return CheckResult(
        "lp_norm vs scalar accumulation", worst <= 1e-9, f"max abs err {worst:.3e}"
    )


def _check_mass_in(rng: np.random.Generator, trials: int) -> CheckResult:
    worst = 0.0
    spec = GridSpec(-10.0, 30.0, 80)
    for _ in range(trials):
        grid = GridPhd(spec, rng.uniform(0.0, 1.5, spec.n_bins))
        a = rng.uniform(spec.x_min, spec.x_max)
        b = rng.uniform(a, spec.x_max)
        approx = mass_in_quadrature(grid, a, b)
        exact = mass_in(grid, (a, b))
        # the quadrature is exact except at the two boundary sub-steps
        tol = 2.0 * float(grid.values.max()) * (b - a) / 20000 + 1e-12
        worst = max(worst, abs(approx - exact) - tol)
    return CheckResult(
        "mass_in vs midpoint quadrature", worst <= 0.0, f"worst excess {worst:.3e}"
    )


def run_all_checks(trials: int = 10, seed: int = 0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    return [
        _check_convolution(rng, trials),
        _check_lp_norms(rng, trials),
        _check_mass_in(rng, trials),
    ]
