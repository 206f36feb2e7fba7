"""Stationary filter synthesis for the point-sensed rod.

With spatially constant process noise the filter Riccati equations decouple
by mode and admit the constant solution: every oscillatory mode carries zero
steady-state gain and the mean mode carries

    P00 = sqrt( b^2 / sum_i C_i^2 / D_i^2 ),      L_i = P00 * C_i.

The stationary estimator is then a convolution of the past measurements
against an explicit kernel whose modal weights decay like
exp((n^2 pi^2 + sum L_i) s) backwards in time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lqr_synthesis import RodConfig
from .spectral_core import phi


@dataclass(frozen=True)
class FilterGains:
    """Constant filter gains: covariance level P00 and injection weights L_i.

    ``decay0 = sum(L)`` is the rate constant of the estimator kernel (and the
    mean-mode error decay).
    """

    P00: float
    L: np.ndarray

    def __post_init__(self):
        L = np.array(self.L, dtype=float)
        L.setflags(write=False)
        object.__setattr__(self, "L", L)
        if self.P00 < 0.0:
            raise ValueError("P00 must be nonnegative")
        if L.size < 1 or np.any(L < 0.0):
            raise ValueError("filter gains must be nonnegative")

    @property
    def decay0(self) -> float:
        return float(np.sum(self.L))


def solve_filter_riccati(config: RodConfig) -> FilterGains:
    """Stationary error-covariance level and gains from the sensor layout.

    Raises ``ValueError`` when the config carries no sensors (nothing to
    filter: the mean mode would be unobservable).
    """
    if config.p == 0:
        raise ValueError("unobservable: no sensors")
    C, D = config.sensor_gains, config.sensor_noise
    p00 = math.sqrt(config.b**2 / float(np.sum(C**2 / D**2)))
    return FilterGains(p00, p00 * C)


@dataclass(frozen=True)
class KernelH:
    """Backward estimator kernel H(x, x1, s), truncated at N modes.

    gamma_n(s) = exp((n^2 pi^2 + sum L_i) s) solves the per-mode kernel ODE
    with the sifting terminal condition at s = 0; for s <= -0.01 the n >= 1
    terms are below double precision at the default truncation.
    """

    gains: FilterGains
    N: int = 64

    def __post_init__(self):
        if self.N < 0:
            raise ValueError("truncation must be nonnegative")


def kernel_h(k: KernelH, x: float, x1: float, s: float) -> float:
    """Kernel value sum_n exp((n^2 pi^2 + sum L) s) phi_n(x) phi_n(x1), s <= 0."""
    if s > 0.0:
        raise ValueError("backward kernel only: s must be <= 0")
    n = np.arange(k.N + 1)
    rates = (n * math.pi) ** 2 + k.gains.decay0
    weights = np.exp(rates * s)
    px = np.array([phi(int(m), x) for m in n])
    px1 = np.array([phi(int(m), x1) for m in n])
    return float(np.sum(weights * px * px1))


def impulse_response(k: KernelH, i: int, x: float, s: float) -> float:
    """Measurement-to-estimate impulse response L_i exp(sum(L) s).

    Only the mean mode survives the spatial integral of the kernel, so the
    response is independent of x (x is accepted for interface symmetry and
    validated only).
    """
    if s > 0.0:
        raise ValueError("backward kernel only: s must be <= 0")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if not 0 <= i < k.gains.L.size:
        raise ValueError(f"sensor index {i} out of range")
    return float(k.gains.L[i] * math.exp(k.gains.decay0 * s))
