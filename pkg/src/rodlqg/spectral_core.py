"""Cosine eigenbasis of the Neumann Laplacian on [0, 1].

The insulated rod has eigenfunctions ``phi_0(x) = 1`` and
``phi_n(x) = sqrt(2) cos(n pi x)`` with eigenvalues ``-n^2 pi^2``.  Everything
downstream (Riccati series, gain fields, matching matrices, the Galerkin
simulator) is expressed in this basis, in one of two conventions:

* ``orthonormal`` -- coefficients of ``phi_n``; Parseval holds, used for
  state vectors.
* ``plain_cosine`` -- coefficients of ``cos(n pi x)``; used for kernel and
  gain series whose natural closed forms come out in plain cosines.

All functions here are pure and operate on immutable values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ORTHONORMAL = "orthonormal"
PLAIN_COSINE = "plain_cosine"
_CONVENTIONS = (ORTHONORMAL, PLAIN_COSINE)

SQRT2 = math.sqrt(2.0)


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ModalVector:
    """Truncated cosine series c_0..c_N in a fixed basis convention.

    Parameters
    ----------
    coeffs : array_like
        Coefficients ``c_0 .. c_N``; must be finite.
    basis_convention : str
        ``"orthonormal"`` or ``"plain_cosine"``.  Immutable; arithmetic
        between mixed conventions is rejected.
    """

    coeffs: np.ndarray
    basis_convention: str

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _frozen_array(self.coeffs))
        if self.coeffs.ndim != 1 or self.coeffs.size < 1:
            raise ValueError("coeffs must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("coeffs must be finite")
        if self.basis_convention not in _CONVENTIONS:
            raise ValueError(
                f"basis_convention must be one of {_CONVENTIONS}, "
                f"got {self.basis_convention!r}"
            )

    @property
    def order(self) -> int:
        """Truncation order N (len(coeffs) - 1)."""
        return self.coeffs.size - 1


@dataclass(frozen=True)
class SegmentSinusoid:
    """a*cos(nu*(x - pivot)) + b*sin(nu*(x - pivot)) on [l, u].

    The pieces of the piecewise eigenfunctions produced by the spectrum
    solvers.  ``nu`` is the frequency in radians per unit length; the pivot
    anchors the phase (segment left endpoints keep the coefficients well
    conditioned at large nu).
    """

    interval: tuple[float, float]
    a: float
    b: float
    nu: float
    pivot: float = 0.0

    def __post_init__(self):
        l, u = self.interval
        if not (0.0 <= l < u <= 1.0):
            raise ValueError(f"invalid segment interval [{l}, {u}]")
        if self.nu < 0.0:
            raise ValueError("nu must be nonnegative")
        if not np.isfinite([self.a, self.b, self.nu, self.pivot]).all():
            raise ValueError("segment parameters must be finite")

    def __call__(self, x):
        t = self.nu * (np.asarray(x, dtype=float) - self.pivot)
        return self.a * np.cos(t) + self.b * np.sin(t)

    def derivative(self, x):
        t = self.nu * (np.asarray(x, dtype=float) - self.pivot)
        return self.nu * (-self.a * np.sin(t) + self.b * np.cos(t))


def _check_domain(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError("x must lie in [0, 1]")
    return x


def phi(n: int, x):
    """Orthonormal Neumann eigenfunction: 1 for n = 0, sqrt(2) cos(n pi x) else.

    Raises ``ValueError`` for x outside [0, 1].
    """
    if n < 0:
        raise ValueError("mode index must be nonnegative")
    x = _check_domain(x)
    if n == 0:
        return np.ones_like(x) if x.ndim else 1.0
    val = SQRT2 * np.cos(n * math.pi * x)
    return val if x.ndim else float(val)


def convert_basis(v: ModalVector, target: str) -> ModalVector:
    """Re-express ``v`` in the ``target`` convention (same function, new coeffs).

    c_0 is shared; for n >= 1 plain-cosine coefficients are sqrt(2) times the
    orthonormal ones.
    """
    if target not in _CONVENTIONS:
        raise ValueError(f"unknown basis convention {target!r}")
    if target == v.basis_convention:
        return v
    out = np.array(v.coeffs)
    if target == ORTHONORMAL:  # plain cos -> coefficient of sqrt(2) cos
        out[1:] /= SQRT2
    else:
        out[1:] *= SQRT2
    return ModalVector(out, target)


def evaluate(v: ModalVector, x):
    """Pointwise value of the truncated series at x in [0, 1]."""
    x = _check_domain(x)
    n = np.arange(v.coeffs.size)
    table = np.cos(np.multiply.outer(n * math.pi, x))
    if v.basis_convention == ORTHONORMAL:
        table[1:] *= SQRT2
    val = v.coeffs @ table.reshape(v.coeffs.size, -1)
    return float(val[0]) if x.ndim == 0 else val.reshape(x.shape)


def _phase_integrals(w, phase, l: float, u: float):
    """(int_l^u cos(w x + phase) dx, int_l^u sin(w x + phase) dx).

    Uses the identity  int = (u-l) * trig(w*(u+l)/2 + phase) * sinc(w*(u-l)/2)
    which is exact and free of cancellation, so the w -> 0 limit needs no
    branch switch.
    """
    half = w * (u - l) / 2.0
    mid = w * (u + l) / 2.0 + phase
    s = np.sinc(half / math.pi)  # sin(half)/half
    return (u - l) * np.cos(mid) * s, (u - l) * np.sin(mid) * s


def cos_sin_moment(n, nu: float, segment: tuple[float, float], pivot: float = 0.0):
    """Closed-form trigonometric moments over a segment.

    Returns ``(I_cos, I_sin)`` with::

        I_cos = int_l^u cos(n pi x) cos(nu (x - pivot)) dx
        I_sin = int_l^u cos(n pi x) sin(nu (x - pivot)) dx

    via product-to-sum identities.  ``n`` may be a scalar or an array of mode
    indices (vectorised).  The near-resonant case ``nu ~ n pi`` is handled by
    the analytic limit of the same expression, accurate to machine precision.
    """
    l, u = segment
    if not (0.0 <= l < u <= 1.0):
        raise ValueError(f"segment [{l}, {u}] must be inside [0, 1]")
    if nu < 0.0:
        raise ValueError("nu must be nonnegative")
    a = np.asarray(n, dtype=float) * math.pi
    cos_p, sin_p = _phase_integrals(a + nu, -nu * pivot, l, u)
    cos_m, sin_m = _phase_integrals(a - nu, +nu * pivot, l, u)
    i_cos = 0.5 * (cos_p + cos_m)
    i_sin = 0.5 * (sin_p - sin_m)
    if np.ndim(n) == 0:
        return float(i_cos), float(i_sin)
    return i_cos, i_sin
