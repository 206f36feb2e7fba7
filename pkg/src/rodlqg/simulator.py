"""Spectral Galerkin time simulation of the plant / filter interconnection.

The rod state is advanced in orthonormal modal coordinates by explicit
Euler (or exponential Euler for the stiff diagonal), with point fluxes
entering through exact eigenfunction values and measurement noise realized
in increment form: one step of the estimator consumes the increment
``dY_i = C_i z(zeta_i) dt + D_i dW_i`` and injects the innovation into the
mean mode (the gains L_i are spatially constant).

Randomness is reproducible: a master seed spawns one substream per channel
(process noise first, then one per sensor, by fixed index), so runs are
bitwise identical for a fixed SimConfig and adding sensors never perturbs
the process-noise draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kalman_synthesis import FilterGains
from .lqr_synthesis import GainField, RodConfig
from .spectral_core import ORTHONORMAL, SQRT2, ModalVector
from .spectrum import modal_feedback_matrix, modal_input_matrix

EULER = "euler"
EXP_EULER = "exp_euler"


@dataclass(frozen=True)
class SimConfig:
    """Simulation grid, seeding, and initial data.

    ``dt`` must satisfy the explicit-Euler stiffness bound
    dt < 2 / (N^2 pi^2 + stability_margin); violations are rejected here, at
    construction, rather than mid-run.  ``initial_state`` and
    ``initial_estimate`` are orthonormal modal vectors (estimate defaults to
    zero).
    """

    N: int
    dt: float
    T: float
    seed: int = 0
    noise_enabled: bool = True
    initial_state: ModalVector | None = None
    initial_estimate: ModalVector | None = None
    integrator: str = EULER
    stability_margin: float = 0.0

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("modal truncation N must be at least 1")
        if self.dt <= 0.0 or self.T < self.dt:
            raise ValueError("need dt > 0 and T >= dt")
        if self.integrator not in (EULER, EXP_EULER):
            raise ValueError(f"unknown integrator {self.integrator!r}")
        bound = 2.0 / (self.N**2 * math.pi**2 + self.stability_margin)
        if self.integrator == EULER and self.dt >= bound:
            raise ValueError(
                f"dt = {self.dt:g} violates the explicit stability bound "
                f"{bound:g} at N = {self.N}"
            )
        for name in ("initial_state", "initial_estimate"):
            v = getattr(self, name)
            if v is not None:
                if v.basis_convention != ORTHONORMAL:
                    raise ValueError(f"{name} must be in the orthonormal convention")
                if v.order > self.N:
                    raise ValueError(f"{name} has more modes than the truncation")

    @property
    def steps(self) -> int:
        return int(math.floor(self.T / self.dt + 1e-9))

    def _initial_array(self, name: str) -> np.ndarray:
        v = getattr(self, name)
        z = np.zeros(self.N + 1)
        if v is not None:
            z[: v.order + 1] = v.coeffs
        return z


@dataclass(frozen=True)
class Trajectory:
    """Recorded run: modal states, control and measurement histories.

    All arrays share the leading length steps + 1; ``y`` rows hold the
    measurement increments consumed over [t_j, t_j + dt).
    """

    times: np.ndarray
    z: np.ndarray
    zhat: np.ndarray
    u: np.ndarray
    y: np.ndarray

    @property
    def error(self) -> np.ndarray:
        return self.z - self.zhat

    def energy(self, signal: str = "z") -> np.ndarray:
        """Per-step modal L2 norm of z, the estimate, or the error."""
        arr = {"z": self.z, "estimate": self.zhat, "error": self.error}.get(signal)
        if arr is None:
            raise ValueError(f"unknown signal {signal!r}")
        return np.sqrt(np.sum(arr * arr, axis=1))

    def to_csv(self, path, max_modes: int = 16) -> None:
        """Write `t,energy_z,energy_zerr,u_1..u_m,y_1..y_p,z_0..z_K`.

        K is min(N, max_modes); floats are written in shortest round-trip
        form so identical runs produce identical bytes.
        """
        K = min(self.z.shape[1] - 1, max_modes)
        m = self.u.shape[1]
        p = self.y.shape[1]
        cols = (
            ["t", "energy_z", "energy_zerr"]
            + [f"u_{k + 1}" for k in range(m)]
            + [f"y_{i + 1}" for i in range(p)]
            + [f"z_{n}" for n in range(K + 1)]
        )
        ez = self.energy("z")
        ee = self.energy("error")
        with open(path, "w", newline="") as fh:
            fh.write(",".join(cols) + "\n")
            for j in range(self.times.size):
                row = [self.times[j], ez[j], ee[j], *self.u[j], *self.y[j], *self.z[j, : K + 1]]
                fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _sensor_eval_matrix(config: RodConfig, N: int) -> np.ndarray:
    """(p, N+1) table phi_n(zeta_i) so that point values are table @ z."""
    n = np.arange(N + 1)
    tab = SQRT2 * np.cos(np.outer(config.zeta, n * math.pi))
    if config.p:
        tab[:, 0] = 1.0
    return tab


def _substreams(sim: SimConfig, p: int):
    """Noise increments, one row per step: process stream then sensor streams."""
    rows = sim.steps + 1
    if not sim.noise_enabled:
        return np.zeros(rows), np.zeros((rows, p))
    children = np.random.SeedSequence(sim.seed).spawn(1 + p)
    scale = math.sqrt(sim.dt)
    dW = np.random.default_rng(children[0]).normal(0.0, scale, rows)
    dV = np.column_stack(
        [np.random.default_rng(children[1 + i]).normal(0.0, scale, rows) for i in range(p)]
    ) if p else np.zeros((rows, 0))
    return dW, dV


# ---------------------------------------------------------------------------
# single-step operations (public, ModalVector in/out)
# ---------------------------------------------------------------------------


def step_plant(state: ModalVector, u, config: RodConfig, dt: float, noise_increment: float) -> ModalVector:
    """One explicit Euler step of the actuated plant.

    z_n <- z_n + dt (-n^2 pi^2 z_n + sum_k phi_n(xi_k) beta_k u_k) plus the
    process-noise increment on the mean mode (constant-in-x noise projects
    onto mode 0 only).
    """
    z = np.array(state.coeffs)
    N = z.size - 1
    lam = -((np.arange(N + 1) * math.pi) ** 2)
    Bin = modal_input_matrix(config, N)
    z = z + dt * (lam * z + Bin @ np.asarray(u, dtype=float))
    z[0] += config.b * noise_increment
    return ModalVector(z, ORTHONORMAL)


def measure(state: ModalVector, config: RodConfig, noise_increments, dt: float) -> np.ndarray:
    """Measurement increments dY_i = C_i z(zeta_i) dt + D_i dW_i."""
    N = state.coeffs.size - 1
    tab = _sensor_eval_matrix(config, N)
    vals = tab @ state.coeffs
    return config.sensor_gains * vals * dt + config.sensor_noise * np.asarray(
        noise_increments, dtype=float
    )


def step_filter(
    zhat: ModalVector, u, dY, config: RodConfig, gains: FilterGains, dt: float
) -> ModalVector:
    """One estimator step: plant copy plus mean-mode innovation injection.

    The innovation sum_i L_i (dY_i - C_i zhat(zeta_i) dt) enters mode 0 only,
    because the stationary gains are spatially constant.
    """
    zh = np.array(zhat.coeffs)
    N = zh.size - 1
    lam = -((np.arange(N + 1) * math.pi) ** 2)
    Bin = modal_input_matrix(config, N)
    tab = _sensor_eval_matrix(config, N)
    predicted = config.sensor_gains * (tab @ zh) * dt
    innovation = np.asarray(dY, dtype=float) - predicted
    zh = zh + dt * (lam * zh + Bin @ np.asarray(u, dtype=float))
    zh[0] += float(gains.L @ innovation)
    return ModalVector(zh, ORTHONORMAL)


# ---------------------------------------------------------------------------
# full runs
# ---------------------------------------------------------------------------


def simulate_lqg(
    config: RodConfig,
    gains: GainField,
    fgains: FilterGains | None,
    sim: SimConfig,
) -> Trajectory:
    """Closed-loop run of plant, measurement, and estimator.

    Per step: the control u = <K, zhat> is formed from the current estimate,
    the measurement increment is taken on the current state, then plant and
    estimator advance together.  With ``fgains=None`` (or no sensors) the
    estimator is a pure plant copy, which reduces the run to full-state
    feedback whenever the initial estimate matches the initial state.
    """
    N = sim.N
    if gains.order < N:
        raise ValueError("gain series shorter than the simulation truncation")
    steps = sim.steps
    lam = -((np.arange(N + 1) * math.pi) ** 2).astype(float)
    Bin = modal_input_matrix(config, N)
    F = modal_feedback_matrix(gains, N)
    tab = _sensor_eval_matrix(config, N)
    C, D = config.sensor_gains, config.sensor_noise
    L = fgains.L if fgains is not None else None
    if L is not None and L.size != config.p:
        raise ValueError("filter gains and sensor count disagree")

    dW, dV = _substreams(sim, config.p)
    if sim.integrator == EXP_EULER:
        # exact diagonal propagator and its forcing weight int_0^dt e^{lam s} ds
        decay = np.exp(lam * sim.dt)
        phi_dt = np.where(lam == 0.0, sim.dt, (decay - 1.0) / np.where(lam == 0.0, 1.0, lam))

    z = sim._initial_array("initial_state")
    zh = sim._initial_array("initial_estimate")

    times = np.arange(steps + 1) * sim.dt
    Z = np.empty((steps + 1, N + 1))
    ZH = np.empty_like(Z)
    U = np.empty((steps + 1, config.m))
    Y = np.empty((steps + 1, config.p))

    for j in range(steps + 1):
        u = F @ zh
        vals = tab @ z
        dY = C * vals * sim.dt + D * dV[j]
        Z[j], ZH[j], U[j], Y[j] = z, zh, u, dY
        if j == steps:
            break
        force = Bin @ u
        if sim.integrator == EULER:
            z_new = z + sim.dt * (lam * z + force)
            zh_new = zh + sim.dt * (lam * zh + force)
        else:
            z_new = decay * z + phi_dt * force
            zh_new = decay * zh + phi_dt * force
        z_new[0] += config.b * dW[j]
        if L is not None:
            innovation = dY - C * (tab @ zh) * sim.dt
            zh_new[0] += float(L @ innovation)
        z, zh = z_new, zh_new

    return Trajectory(times, Z, ZH, U, Y)


def decay_rate(traj: Trajectory, signal: str, window: tuple[float, float]) -> float:
    """Least-squares slope of log energy over the time window.

    Raises ``ValueError`` when the window holds fewer than 10 samples or the
    energy reaches the numerical floor inside it.
    """
    t0, t1 = window
    if t1 <= t0:
        raise ValueError("window must satisfy t1 > t0")
    mask = (traj.times >= t0) & (traj.times <= t1)
    if int(np.sum(mask)) < 10:
        raise ValueError("window holds fewer than 10 samples")
    e = traj.energy(signal)[mask]
    if np.any(e < 1e-300):
        raise ValueError("signal extinguished; shrink window")
    slope, _ = np.polyfit(traj.times[mask], np.log(e), 1)
    return float(slope)
