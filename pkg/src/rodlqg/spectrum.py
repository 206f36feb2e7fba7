"""Closed-loop and error-dynamics spectra by determinant root-finding.

Eigenfunctions of the point-actuated rod under feedback are piecewise
sinusoids of a common frequency nu (eigenvalue -nu^2).  On each segment
between interface points the ansatz has two coefficients; interface and end
conditions assemble into a square matching matrix M(nu), and eigenvalues
occur where M(nu) is singular.  Two eigenproblems are covered:

* the regulated plant: flux interfaces at the actuator positions, with the
  nonlocal feedback integral ``int K_k(x) psi(x) dx`` entering the end and
  jump conditions (:func:`closed_loop_matching_matrix`);
* the estimation-error operator with point measurement corrections:
  derivative jumps ``L_i C_i theta(zeta_i)`` at the sensor positions
  (:func:`error_matching_matrix`).

Roots are located by scanning the (row/column equilibrated) determinant for
sign changes and bisecting, then certified by the smallest singular value.
Dense modal truncations (:func:`modal_closed_loop_matrix`) and a truncated
algebraic Riccati solve (:func:`truncated_are_oracle`) provide independent
cross-checks on both the spectra and the Riccati series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_continuous_lyapunov
from scipy.optimize import brentq

from .lqr_synthesis import GainField, RodConfig
from .spectral_core import SQRT2, SegmentSinusoid, cos_sin_moment

DEFAULT_GRID_STEP = math.pi / 8.0


@dataclass(frozen=True)
class SpectralRoot:
    """One accepted root: frequency, eigenvalue, eigenfunction, certificate."""

    nu: float
    eigenvalue: float
    eigenfunction: tuple[SegmentSinusoid, ...]
    residual: float
    multiplicity: int = 1
    converged: bool = True


@dataclass(frozen=True)
class SpectrumResult:
    """Roots sorted least-stable first (eigenvalue descending)."""

    roots: tuple[SpectralRoot, ...]

    def eigenvalues(self) -> np.ndarray:
        return np.array([r.eigenvalue for r in self.roots])

    def frequencies(self) -> np.ndarray:
        return np.array([r.nu for r in self.roots])

    def least_stable(self) -> SpectralRoot:
        if not self.roots:
            raise ValueError("empty spectrum")
        return self.roots[0]


def evaluate_piecewise(segments, x):
    """Value of a piecewise eigenfunction at x (scalar or array)."""
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(xs)
    for j, xv in enumerate(xs):
        for s in segments:
            if s.interval[0] - 1e-12 <= xv <= s.interval[1] + 1e-12:
                out[j] = s(xv)
                break
        else:
            raise ValueError(f"x={xv} outside the eigenfunction domain")
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# matching matrices
# ---------------------------------------------------------------------------


def _breakpoints(interior: np.ndarray) -> list[float]:
    pts = {0.0, 1.0}
    pts.update(float(x) for x in interior)
    return sorted(pts)


def _feedback_rows(gains: GainField, nu: float, pts: list[float]) -> tuple[np.ndarray, np.ndarray]:
    """Per-actuator feedback integrals against the segment basis.

    Returns (Fa, Fb) of shape (m, S): the coefficient of a_s and b_s in
    ``int_0^1 K_k(x) psi(x) dx`` when psi restricted to segment s is
    cos(nu (x - l_s)) / sin(nu (x - l_s)).
    """
    coeffs = gains.coefficient_matrix()  # (m, N+1)
    nvec = np.arange(coeffs.shape[1])
    S = len(pts) - 1
    Fa = np.empty((gains.m, S))
    Fb = np.empty((gains.m, S))
    for s in range(S):
        l, u = pts[s], pts[s + 1]
        i_cos, i_sin = cos_sin_moment(nvec, nu, (l, u), pivot=l)
        Fa[:, s] = coeffs @ i_cos
        Fb[:, s] = coeffs @ i_sin
    return Fa, Fb


def closed_loop_matching_matrix(config: RodConfig, gains: GainField, nu: float) -> np.ndarray:
    """Matching matrix of the regulated plant at trial frequency nu > 0.

    Unknowns are (a_s, b_s) per segment between consecutive points of
    {0, 1} union {actuator positions}, with the segment ansatz
    ``a cos(nu (x - l_s)) + b sin(nu (x - l_s))``.  Rows, in order:

    1. left end: psi'(0+) + beta_k * int K_k psi = 0 (actuator at 0), else
       psi'(0+) = 0.  Sign fixed by the flux convention
       beta_k u_k = dz/dx(xi-) - dz/dx(xi+) with dz/dx = 0 outside [0, 1].
    2. per interior actuator: continuity, then the derivative jump
       psi'(xi-) - psi'(xi+) - beta_k * int K_k psi = 0.
    3. right end: psi'(1-) - beta_k * int K_k psi = 0 (actuator at 1), else
       psi'(1-) = 0.

    The result is square of size 2 * (number of segments).
    """
    if nu <= 0.0:
        raise ValueError("nu must be positive; nu = 0 has a degenerate ansatz")
    if gains.m != config.m:
        raise ValueError("gain field and config disagree on actuator count")
    xi, beta = config.xi, config.beta
    pts = _breakpoints(xi)
    S = len(pts) - 1
    Fa, Fb = _feedback_rows(gains, nu, pts)
    actuator_at = {float(x): k for k, x in enumerate(xi)}

    def val(s, x):
        t = nu * (x - pts[s])
        return math.cos(t), math.sin(t)

    def der(s, x):
        t = nu * (x - pts[s])
        return -nu * math.sin(t), nu * math.cos(t)

    rows = []
    row = np.zeros(2 * S)
    row[0], row[1] = der(0, 0.0)
    if 0.0 in actuator_at:
        k = actuator_at[0.0]
        row[0::2] += beta[k] * Fa[k]
        row[1::2] += beta[k] * Fb[k]
    rows.append(row)

    for j in range(1, S):
        x = pts[j]
        k = actuator_at[x]
        va, vb = val(j - 1, x)
        wa, wb = val(j, x)
        row = np.zeros(2 * S)
        row[2 * (j - 1)], row[2 * (j - 1) + 1] = va, vb
        row[2 * j], row[2 * j + 1] = -wa, -wb
        rows.append(row)
        da, db = der(j - 1, x)
        ea, eb = der(j, x)
        row = np.zeros(2 * S)
        row[2 * (j - 1)], row[2 * (j - 1) + 1] = da, db
        row[2 * j] -= ea
        row[2 * j + 1] -= eb
        row[0::2] -= beta[k] * Fa[k]
        row[1::2] -= beta[k] * Fb[k]
        rows.append(row)

    row = np.zeros(2 * S)
    row[2 * (S - 1)], row[2 * (S - 1) + 1] = der(S - 1, 1.0)
    if 1.0 in actuator_at:
        k = actuator_at[1.0]
        row[0::2] -= beta[k] * Fa[k]
        row[1::2] -= beta[k] * Fb[k]
    rows.append(row)
    return np.array(rows)


def _closed_loop_matrix_nu0(config: RodConfig, gains: GainField) -> np.ndarray:
    """Degenerate nu = 0 matching matrix with the ansatz a_s + b_s (x - l_s)."""
    xi, beta = config.xi, config.beta
    pts = _breakpoints(xi)
    S = len(pts) - 1
    coeffs = gains.coefficient_matrix()
    nvec = np.arange(coeffs.shape[1])
    Fa = np.empty((gains.m, S))
    Fb = np.empty((gains.m, S))
    for s in range(S):
        l, u = pts[s], pts[s + 1]
        i_const, _ = cos_sin_moment(nvec, 0.0, (l, u), pivot=l)
        # int cos(n pi x) (x - l) dx by parts; n = 0 separately
        a = nvec[1:] * math.pi
        lin = np.empty(nvec.size)
        lin[0] = 0.5 * (u - l) ** 2
        lin[1:] = ((u - l) * np.sin(a * u) + (np.cos(a * u) - np.cos(a * l)) / a) / a
        Fa[:, s] = coeffs @ i_const
        Fb[:, s] = coeffs @ lin
    actuator_at = {float(x): k for k, x in enumerate(xi)}
    rows = []
    row = np.zeros(2 * S)
    row[1] = 1.0  # psi'(0) = b_0
    if 0.0 in actuator_at:
        k = actuator_at[0.0]
        row[0::2] += beta[k] * Fa[k]
        row[1::2] += beta[k] * Fb[k]
    rows.append(row)
    for j in range(1, S):
        x = pts[j]
        k = actuator_at[x]
        row = np.zeros(2 * S)
        row[2 * (j - 1)] = 1.0
        row[2 * (j - 1) + 1] = x - pts[j - 1]
        row[2 * j] = -1.0
        rows.append(row)
        row = np.zeros(2 * S)
        row[2 * (j - 1) + 1] = 1.0
        row[2 * j + 1] = -1.0
        row[0::2] -= beta[k] * Fa[k]
        row[1::2] -= beta[k] * Fb[k]
        rows.append(row)
    row = np.zeros(2 * S)
    row[2 * (S - 1) + 1] = 1.0
    if 1.0 in actuator_at:
        k = actuator_at[1.0]
        row[0::2] -= beta[k] * Fa[k]
        row[1::2] -= beta[k] * Fb[k]
    rows.append(row)
    return np.array(rows)


def error_matching_matrix(config: RodConfig, L, nu: float) -> np.ndarray:
    """Matching matrix of the error eigenproblem at trial frequency nu > 0.

    Segments run between consecutive points of {0, 1} union {sensor
    positions}; conditions are Neumann ends, continuity at each sensor, and
    the derivative jump theta'(zeta+) - theta'(zeta-) = L_i C_i theta(zeta).
    """
    if nu <= 0.0:
        raise ValueError("nu must be positive")
    L = np.asarray(L, dtype=float)
    if L.size != config.p:
        raise ValueError("filter gain list must match the sensor count")
    if np.any(L <= 0.0):
        raise ValueError("filter gains must be positive")
    zeta = config.zeta
    if np.any((zeta <= 0.0) | (zeta >= 1.0)):
        raise ValueError("error eigenproblem requires sensors strictly inside (0, 1)")
    weights = L * config.sensor_gains
    pts = _breakpoints(zeta)
    S = len(pts) - 1

    def val(s, x):
        t = nu * (x - pts[s])
        return math.cos(t), math.sin(t)

    def der(s, x):
        t = nu * (x - pts[s])
        return -nu * math.sin(t), nu * math.cos(t)

    rows = []
    row = np.zeros(2 * S)
    row[0], row[1] = der(0, 0.0)
    rows.append(row)
    for i, z in enumerate(zeta):
        s = pts.index(float(z)) - 1  # segment left of the sensor
        va, vb = val(s, z)
        wa, wb = val(s + 1, z)
        row = np.zeros(2 * S)
        row[2 * s], row[2 * s + 1] = va, vb
        row[2 * s + 2], row[2 * s + 3] = -wa, -wb
        rows.append(row)
        da, db = der(s, z)
        ea, eb = der(s + 1, z)
        row = np.zeros(2 * S)
        row[2 * s + 2], row[2 * s + 3] = ea, eb
        row[2 * s] -= da
        row[2 * s + 1] -= db
        row[2 * s] -= weights[i] * va
        row[2 * s + 1] -= weights[i] * vb
        rows.append(row)
    row = np.zeros(2 * S)
    row[2 * (S - 1)], row[2 * (S - 1) + 1] = der(S - 1, 1.0)
    rows.append(row)
    return np.array(rows)


# ---------------------------------------------------------------------------
# determinant root finding
# ---------------------------------------------------------------------------


def _equilibrated_det(M: np.ndarray) -> float:
    """Determinant after row and column norm equilibration (sign preserved)."""
    r = np.linalg.norm(M, axis=1)
    r[r == 0.0] = 1.0
    M = M / r[:, None]
    c = np.linalg.norm(M, axis=0)
    c[c == 0.0] = 1.0
    return float(np.linalg.det(M / c[None, :]))


def _normalized_residual(M: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    """(sigma_min / sigma_max, all normalized sigmas, null vector candidate)."""
    U, s, Vt = np.linalg.svd(M)
    smax = s[0] if s[0] > 0 else 1.0
    return s[-1] / smax, s / smax, Vt[-1]


def _segments_from_vector(pts, nu, vec) -> tuple[SegmentSinusoid, ...]:
    segs = []
    for s in range(len(pts) - 1):
        segs.append(
            SegmentSinusoid(
                (pts[s], pts[s + 1]), float(vec[2 * s]), float(vec[2 * s + 1]), nu, pivot=pts[s]
            )
        )
    return tuple(segs)


def _normalize_eigenfunction(segments, samples: int = 2048):
    """Scale to sup-norm 1; sign so the leftmost maximizer of |psi| is positive."""
    xs_all, vals_all = [], []
    for seg in segments:
        xs = np.linspace(seg.interval[0], seg.interval[1], samples // len(segments) + 2)
        xs_all.append(xs)
        vals_all.append(seg(xs))
    xs = np.concatenate(xs_all)
    vals = np.concatenate(vals_all)
    order = np.argsort(xs)
    xs, vals = xs[order], vals[order]
    amax = np.max(np.abs(vals))
    if amax == 0.0:
        return segments
    near = np.abs(vals) >= amax * (1.0 - 1e-9)
    scale = 1.0 / (amax if vals[np.argmax(near)] > 0 else -amax)
    return tuple(
        SegmentSinusoid(s.interval, s.a * scale, s.b * scale, s.nu, s.pivot) for s in segments
    )


def _scan_roots(det_fn, nu_max, tol, grid_step):
    """Sign-change brackets on a uniform grid, refined by bisection."""
    n_cells = max(8, int(math.ceil(nu_max / grid_step)))
    grid = np.linspace(grid_step * 1e-3, nu_max, n_cells + 1)
    vals = np.array([det_fn(v) for v in grid])
    roots = []
    for i in np.where(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]:
        if vals[i] == 0.0:
            roots.append((float(grid[i]), True))
            continue
        try:
            r = brentq(det_fn, grid[i], grid[i + 1], xtol=tol, rtol=4 * np.finfo(float).eps)
            roots.append((float(r), True))
        except (ValueError, RuntimeError):
            roots.append((float(0.5 * (grid[i] + grid[i + 1])), False))
    # near-tangential minima without a sign change (possible even-order roots)
    mag = np.abs(vals)
    for i in range(1, len(grid) - 1):
        if mag[i] < mag[i - 1] and mag[i] < mag[i + 1] and mag[i] < 1e-6:
            if any(abs(grid[i] - r) < grid_step for r, _ in roots):
                continue
            lo, hi = grid[i - 1], grid[i + 1]
            for _ in range(200):
                m1 = lo + (hi - lo) / 3.0
                m2 = hi - (hi - lo) / 3.0
                if abs(det_fn(m1)) < abs(det_fn(m2)):
                    hi = m2
                else:
                    lo = m1
                if hi - lo < tol:
                    break
            roots.append((float(0.5 * (lo + hi)), True))
    return sorted(roots)


def _collect_spectrum(
    matrix_fn, pts, nu_max, tol, grid_step, residual_tol
) -> list[SpectralRoot]:
    det_fn = lambda v: _equilibrated_det(matrix_fn(v))
    found = []
    for nu, converged in _scan_roots(det_fn, nu_max, tol, grid_step):
        res, sigmas, null_vec = _normalized_residual(matrix_fn(nu))
        if res >= residual_tol:
            continue
        multiplicity = int(np.sum(sigmas < residual_tol))
        segs = _normalize_eigenfunction(_segments_from_vector(pts, nu, null_vec))
        found.append(
            SpectralRoot(nu, -nu * nu, segs, res, max(1, multiplicity), converged)
        )
    return found


def find_spectrum(
    config: RodConfig,
    gains: GainField,
    nu_max: float,
    tol: float = 1e-10,
    grid_step: float = DEFAULT_GRID_STEP,
    residual_tol: float = 1e-7,
) -> SpectrumResult:
    """Closed-loop spectrum of the regulated plant on nu in (0, nu_max].

    Scans the equilibrated determinant of the matching matrix on a grid of
    step ``grid_step`` (default pi/8, fine enough to separate the roots of
    these problems), bisects each sign change to ``tol`` in nu, and accepts a
    root when the normalized smallest singular value falls below
    ``residual_tol``.  nu = 0 is probed separately with the degenerate
    piecewise-linear ansatz.  Eigenfunctions are the null vectors,
    sup-normalized with a deterministic sign.  An empty result is valid (no
    roots in range).
    """
    if nu_max <= 0.0 or tol <= 0.0:
        raise ValueError("nu_max and tol must be positive")
    pts = _breakpoints(config.xi)
    roots = _collect_spectrum(
        lambda v: closed_loop_matching_matrix(config, gains, v),
        pts,
        nu_max,
        tol,
        grid_step,
        residual_tol,
    )
    res0, sigmas0, vec0 = _normalized_residual(_closed_loop_matrix_nu0(config, gains))
    if res0 < residual_tol:
        # degenerate-branch root: constant-compatible null vectors only
        segs = tuple(
            SegmentSinusoid((pts[s], pts[s + 1]), float(vec0[2 * s]), 0.0, 0.0, pts[s])
            for s in range(len(pts) - 1)
        )
        roots.insert(
            0,
            SpectralRoot(
                0.0,
                0.0,
                _normalize_eigenfunction(segs),
                res0,
                int(np.sum(sigmas0 < residual_tol)),
                bool(np.max(np.abs(vec0[1::2])) < 1e-8),
            ),
        )
    return SpectrumResult(tuple(sorted(roots, key=lambda r: r.nu)))


def error_spectrum(
    config: RodConfig,
    L,
    nu_max: float,
    tol: float = 1e-10,
    grid_step: float = DEFAULT_GRID_STEP,
    residual_tol: float = 1e-7,
) -> SpectrumResult:
    """Spectrum of the estimation-error eigenproblem with sensor jumps.

    Root 0 is the uniform mode theta_0 = 1 with eigenvalue
    ``-sum_i L_i C_i`` (the correction acts on the mean), recorded with its
    frequency set to sqrt(sum L_i C_i) so eigenvalue = -nu^2 holds for every
    stored root.  Positive-frequency roots come from the determinant scan of
    :func:`error_matching_matrix`.
    """
    if nu_max <= 0.0 or tol <= 0.0:
        raise ValueError("nu_max and tol must be positive")
    L = np.asarray(L, dtype=float)
    if np.any(L <= 0.0):
        raise ValueError("filter gains must be positive")
    pts = _breakpoints(config.zeta)
    roots = _collect_spectrum(
        lambda v: error_matching_matrix(config, L, v),
        pts,
        nu_max,
        tol,
        grid_step,
        residual_tol,
    )
    decay0 = float(np.sum(L * config.sensor_gains))
    theta0 = (SegmentSinusoid((0.0, 1.0), 1.0, 0.0, 0.0, 0.0),)
    roots.insert(0, SpectralRoot(math.sqrt(decay0), -decay0, theta0, 0.0, 1, True))
    return SpectrumResult(tuple(sorted(roots, key=lambda r: -r.eigenvalue)))


# ---------------------------------------------------------------------------
# dense modal oracles
# ---------------------------------------------------------------------------


def modal_input_matrix(config: RodConfig, N: int) -> np.ndarray:
    """(N+1, m) coupling phi_n(xi_k) beta_k of point fluxes into modes."""
    n = np.arange(N + 1)
    phi = SQRT2 * np.cos(np.outer(n * math.pi, config.xi))
    phi[0, :] = 1.0
    return phi * config.beta[None, :]


def modal_feedback_matrix(gains: GainField, N: int) -> np.ndarray:
    """(m, N+1) rows int K_k phi_n dx: c_{k,0} for n = 0, c_{k,n}/sqrt(2) else."""
    if N > gains.order:
        raise ValueError("gain series shorter than the requested truncation")
    F = gains.coefficient_matrix()[:, : N + 1].copy()
    F[:, 1:] /= SQRT2
    return F


def modal_closed_loop_matrix(config: RodConfig, gains: GainField, N: int) -> np.ndarray:
    """Dense closed-loop generator A + B K on the first N+1 modes.

    A = diag(-n^2 pi^2) in orthonormal coordinates, the input column of
    actuator k is phi_n(xi_k) beta_k, and its feedback row is the modal
    expansion of int K_k(x) phi_n(x) dx.  Eigenvalues of this matrix are the
    independent cross-check for :func:`find_spectrum`.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    n = np.arange(N + 1).astype(float)
    A = np.diag(-(n**2) * math.pi**2)
    return A + modal_input_matrix(config, N) @ modal_feedback_matrix(gains, N)


def newton_kleinman(A, B, Q, R, K0, max_iter: int = 60, tol: float = 1e-9):
    """Kleinman iteration for A'P + PA - P B R^{-1} B' P + Q = 0.

    ``K0`` must make A + B K0 Hurwitz; each step solves a Lyapunov equation
    and the iterates decrease monotonically to the stabilizing solution.
    Returns (P, residual_history); raises ``ArithmeticError`` with the
    history attached if the residual fails to reach ``tol``.
    """
    K = np.array(K0, dtype=float)
    Rinv = np.linalg.inv(R)
    history = []
    P = None
    for _ in range(max_iter):
        Acl = A + B @ K
        P = solve_continuous_lyapunov(Acl.T, -(Q + K.T @ R @ K))
        P = 0.5 * (P + P.T)
        K = -Rinv @ B.T @ P
        res = float(np.linalg.norm(A.T @ P + P @ A - P @ B @ Rinv @ B.T @ P + Q, "fro"))
        history.append(res)
        if res < tol:
            return P, np.array(history)
    err = ArithmeticError(
        f"Riccati iteration did not reach residual {tol:g} in {max_iter} steps "
        f"(last residual {history[-1]:g})"
    )
    err.residual_history = np.array(history)
    raise err


Q_EXACT = "exact"
Q_FORMAL = "formal"


@dataclass(frozen=True)
class AreOracleResult:
    """Truncated-ARE solution with its convergence record."""

    P: np.ndarray
    residual_history: np.ndarray
    q_convention: str
    N: int

    def diag_plain(self) -> np.ndarray:
        """Diagonal re-expressed in the plain-cosine convention."""
        d = np.diag(self.P).copy()
        d[1:] *= 2.0
        return d


def truncated_are_oracle(
    config: RodConfig,
    N: int,
    q_convention: str = Q_EXACT,
    max_iter: int = 60,
    tol: float = 1e-9,
) -> AreOracleResult:
    """Brute-force Riccati oracle on the truncated modal system.

    Solves A'P + PA - P B R^{-1} B' P + Q_N = 0 with A = diag(-n^2 pi^2),
    B the point-flux coupling, and Q_N the state weight in orthonormal
    coordinates: ``q I`` ("exact"; the orthonormal projection of the constant
    weight has no convention ambiguity) or diag(q, q/2, ..) ("formal", the
    plain-cosine diagonal-weight reading).  Newton iteration starts from the
    diagonal-series gain; if that start is not stabilizing the dissipative
    start K0 = -B' is used (A - B B' is negative definite here).
    """
    if N > 256:
        raise ValueError("oracle is intended for desk scale (N <= 256)")
    if q_convention not in (Q_EXACT, Q_FORMAL):
        raise ValueError(f"unknown q convention {q_convention!r}")
    from .lqr_synthesis import gain_field, solve_riccati_diagonal

    n = np.arange(N + 1).astype(float)
    A = np.diag(-(n**2) * math.pi**2)
    B = modal_input_matrix(config, N)
    qdiag = np.full(N + 1, config.q)
    if q_convention == Q_FORMAL:
        qdiag[1:] = config.q / 2.0
    Q = np.diag(qdiag)
    R = np.array(config.R)

    K0 = modal_feedback_matrix(gain_field(config, solve_riccati_diagonal(config, N)), N)
    if np.max(np.linalg.eigvals(A + B @ K0).real) >= 0.0:
        K0 = -B.T
    P, history = newton_kleinman(A, B, Q, R, K0, max_iter=max_iter, tol=tol)
    return AreOracleResult(P, history, q_convention, N)
