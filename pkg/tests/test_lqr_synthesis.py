import math

import numpy as np
import pytest

import rodlqg as rl
from rodlqg import (
    ROOT_QUADRATIC,
    RodConfig,
    gain_field,
    gamma,
    riccati_residual,
    solve_riccati_diagonal,
)

PI2 = math.pi**2


def single_actuator_at_origin(q=1.0):
    return RodConfig(actuators=((0.0, 1.0),), sensors=(), q=q, R=np.eye(1))


class TestRodConfigValidation:
    def test_example_one_is_valid(self, cfg1):
        assert cfg1.m == 2
        assert cfg1.xi.tolist() == [0.0, 1.0]

    def test_negative_beta_rejected(self):
        with pytest.raises(ValueError, match="beta must be nonnegative"):
            RodConfig(actuators=((0.0, -1.0), (1.0, 1.0)), sensors=(), q=1.0, R=np.eye(2))

    def test_all_beta_zero_rejected(self):
        with pytest.raises(ValueError, match="at least one beta"):
            RodConfig(actuators=((0.0, 0.0), (1.0, 0.0)), sensors=(), q=1.0, R=np.eye(2))

    def test_unsorted_actuators_rejected(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            RodConfig(actuators=((0.5, 1.0), (0.5, 1.0)), sensors=(), q=1.0, R=np.eye(2))

    def test_position_outside_rod_rejected(self):
        with pytest.raises(ValueError, match="positions"):
            RodConfig(actuators=((0.0, 1.0), (1.5, 1.0)), sensors=(), q=1.0, R=np.eye(2))

    def test_asymmetric_r_rejected(self):
        with pytest.raises(ValueError, match="symmetric"):
            RodConfig(actuators=((0.0, 1.0), (1.0, 1.0)), sensors=(), q=1.0,
                      R=np.array([[1.0, 0.5], [0.0, 1.0]]))

    def test_indefinite_r_rejected(self):
        with pytest.raises(ValueError, match="positive definite"):
            RodConfig(actuators=((0.0, 1.0), (1.0, 1.0)), sensors=(), q=1.0,
                      R=np.array([[1.0, 0.0], [0.0, -1.0]]))

    def test_ill_conditioned_r_rejected(self):
        with pytest.raises(ValueError, match="ill-conditioned"):
            RodConfig(actuators=((0.0, 1.0), (1.0, 1.0)), sensors=(), q=1.0,
                      R=np.diag([1.0, 1e-13]))

    def test_nonpositive_q_rejected(self):
        with pytest.raises(ValueError, match="q must be positive"):
            RodConfig(actuators=((0.0, 1.0),), sensors=(), q=0.0, R=np.eye(1))

    def test_bad_sensor_noise_rejected(self):
        with pytest.raises(ValueError, match="noise d"):
            RodConfig(actuators=((0.0, 1.0),), sensors=((0.5, 1.0, 0.0),), q=1.0, R=np.eye(1))

    def test_unsorted_sensors_rejected(self):
        with pytest.raises(ValueError, match="sensor positions"):
            RodConfig(actuators=((0.0, 1.0),), sensors=((0.7, 1.0, 1.0), (0.2, 1.0, 1.0)),
                      q=1.0, R=np.eye(1))


class TestGamma:
    def test_example_one_diagonal_is_two(self, cfg1):
        for n in range(12):
            assert gamma(cfg1, n, n) == pytest.approx(2.0, abs=1e-14)

    def test_example_two_parity_split(self, cfg2):
        for n in range(12):
            expected = 6.0 if n % 2 == 0 else 2.0
            assert gamma(cfg2, n, n) == pytest.approx(expected, abs=1e-13)

    def test_example_one_cross_term_vanishes(self, cfg1):
        # 1*1 + 1*(-1) = 0
        assert gamma(cfg1, 0, 1) == pytest.approx(0.0, abs=1e-15)

    def test_symmetry(self, cfg2):
        assert gamma(cfg2, 3, 8) == pytest.approx(gamma(cfg2, 8, 3), abs=1e-15)

    def test_single_actuator_all_ones(self):
        cfg = single_actuator_at_origin()
        for n in range(6):
            assert gamma(cfg, n, n) == pytest.approx(1.0)


class TestSolveRiccatiDiagonal:
    def test_example_one_reference_table(self, pipeline1):
        ric, _ = pipeline1
        target = [1.4142, 0.1008, 0.0253, 0.0113, 0.0063, 0.0041]
        assert ric.P[:6] == pytest.approx(target, abs=5e-5)

    def test_vanishing_state_weight(self, cfg1):
        cfg = RodConfig(actuators=cfg1.actuators, sensors=(), q=1e-14, R=np.array(cfg1.R))
        ric = solve_riccati_diagonal(cfg, 16)
        assert np.all(ric.P < 1e-6)

    def test_example_two_mode_one_closed_form(self, cfg2):
        ric = solve_riccati_diagonal(cfg2, 4)
        assert ric.P[1] == pytest.approx(-PI2 + math.sqrt(PI2**2 + 2.0), rel=1e-12)

    def test_series_root_solves_shifted_quadratic(self, cfg1):
        # the series closed form satisfies P^2 + 2 n^2 pi^2 P - gamma q = 0
        ric = solve_riccati_diagonal(cfg1, 64)
        n2 = (np.arange(65) * math.pi) ** 2
        g = np.array([gamma(cfg1, n, n) for n in range(65)])
        resid = ric.P**2 + 2 * n2 * ric.P - g * cfg1.q
        assert np.max(np.abs(resid)) < 1e-10

    def test_quadratic_root_solves_mode_quadratic(self, cfg2):
        ric = solve_riccati_diagonal(cfg2, 64, ROOT_QUADRATIC)
        n2 = (np.arange(65) * math.pi) ** 2
        g = np.array([gamma(cfg2, n, n) for n in range(65)])
        resid = -2 * n2 * ric.P + cfg2.q - g * ric.P**2
        assert np.max(np.abs(resid)) < 1e-12

    def test_tail_estimate_and_positivity_to_large_order(self, cfg2):
        # 0 < P_n <= gamma_n q / (2 n^2 pi^2) up to n = 10^4
        ric = solve_riccati_diagonal(cfg2, 10_000)
        n = np.arange(1, 10_001)
        g = np.where(n % 2 == 0, 6.0, 2.0)
        bound = g * cfg2.q / (2 * n.astype(float) ** 2 * PI2)
        assert np.all(ric.P[1:] > 0.0)
        assert np.all(ric.P[1:] <= bound * (1 + 1e-12))

    def test_monotone_for_constant_gamma(self, cfg1):
        ric = solve_riccati_diagonal(cfg1, 200)
        assert np.all(np.diff(ric.P[1:]) <= 0.0)

    def test_tail_bound_below_reference_tolerance_at_default_order(self, cfg1, cfg2):
        for cfg in (cfg1, cfg2):
            ric = solve_riccati_diagonal(cfg, 512)
            assert ric.tail_bound < 1e-4

    def test_gamma_zero_mode_takes_continuous_limit(self):
        # single actuator at the midpoint annihilates odd modes: gamma_1 = 0
        cfg = RodConfig(actuators=((0.5, 1.0),), sensors=(), q=1.0, R=np.eye(1))
        ric = solve_riccati_diagonal(cfg, 8)
        # gamma_1 is ~cos(pi/2)^2 ~ 4e-33 in floating point, zero in exact arithmetic
        assert gamma(cfg, 1, 1) == pytest.approx(0.0, abs=1e-30)
        assert abs(ric.P[1]) < 1e-30
        ric_q = solve_riccati_diagonal(cfg, 8, ROOT_QUADRATIC)
        assert ric_q.P[1] == pytest.approx(1.0 / (2 * PI2), rel=1e-12)


class TestGainField:
    def test_example_one_two_end_kernels(self, pipeline1):
        ric, gains = pipeline1
        c = gains.coefficient_matrix()
        signs = (-1.0) ** np.arange(ric.N + 1)
        assert c[0] == pytest.approx(-ric.P, abs=1e-14)
        assert c[1] == pytest.approx(-signs * ric.P, abs=1e-14)

    def test_example_two_middle_kernel_even_modes_only(self, pipeline2):
        ric, gains = pipeline2
        c = gains.coefficient_matrix()
        assert np.max(np.abs(c[1, 1::2])) < 1e-14
        k = np.arange(0, ric.N + 1, 2) // 2
        assert c[1, 0::2] == pytest.approx(-2.0 * (-1.0) ** k * ric.P[0::2], abs=1e-13)

    def test_single_actuator_kernel(self):
        cfg = single_actuator_at_origin()
        ric = solve_riccati_diagonal(cfg, 16)
        c = gain_field(cfg, ric).coefficient_matrix()
        assert c[0] == pytest.approx(-ric.P, abs=1e-15)

    def test_matches_independent_matrix_product(self, cfg2):
        ric = solve_riccati_diagonal(cfg2, 40)
        c = gain_field(cfg2, ric).coefficient_matrix()
        # independent dense assembly: -R^{-1} beta [P_n cos(n pi xi_j)]
        ref = np.empty_like(c)
        Rinv = np.linalg.inv(np.array(cfg2.R))
        for n in range(41):
            col = ric.P[n] * np.cos(n * math.pi * cfg2.xi)
            ref[:, n] = -Rinv @ (cfg2.beta * col)
        assert np.max(np.abs(c - ref)) < 1e-13

    def test_kernel_reconstruction_is_symmetric(self, pipeline1):
        # P(x1,x2) from the diagonal series is symmetric at random pairs
        ric, _ = pipeline1
        rng = np.random.default_rng(5)
        n = np.arange(ric.N + 1)
        for _ in range(100):
            x1, x2 = rng.uniform(0.0, 1.0, 2)
            p12 = np.sum(ric.P * np.cos(n * math.pi * x1) * np.cos(n * math.pi * x2))
            p21 = np.sum(ric.P * np.cos(n * math.pi * x2) * np.cos(n * math.pi * x1))
            assert abs(p12 - p21) < 1e-12

    def test_weight_scaling(self, cfg1):
        # scaling (q, R) -> (alpha q, alpha R) leaves the exact-root gains
        # unchanged; the series-convention gains rescale by 1/alpha because
        # that root omits the 1/gamma factor.
        alpha = 3.7
        scaled = RodConfig(actuators=cfg1.actuators, sensors=(), q=alpha * cfg1.q,
                           R=alpha * np.array(cfg1.R))
        for convention, factor in ((ROOT_QUADRATIC, 1.0), (rl.ROOT_SERIES, 1.0 / alpha)):
            c0 = gain_field(cfg1, solve_riccati_diagonal(cfg1, 32, convention)).coefficient_matrix()
            c1 = gain_field(scaled, solve_riccati_diagonal(scaled, 32, convention)).coefficient_matrix()
            assert np.max(np.abs(c1 - factor * c0)) < 1e-12


class TestRiccatiResidual:
    def test_diagonal_vanishes_when_gamma_is_one(self):
        cfg = single_actuator_at_origin()
        ric = solve_riccati_diagonal(cfg, 24)
        res = riccati_residual(cfg, ric, 24)
        assert np.max(np.abs(np.diag(res))) < 1e-10

    def test_diagonal_vanishes_for_quadratic_root_any_config(self, cfg1, cfg2):
        for cfg in (cfg1, cfg2):
            ric = solve_riccati_diagonal(cfg, 24, ROOT_QUADRATIC)
            res = riccati_residual(cfg, ric, 24)
            assert np.max(np.abs(np.diag(res))) < 1e-10

    def test_series_root_diagonal_gap_closed_form(self, cfg1):
        # under the series convention the diagonal residual equals
        # (gamma - 1)(2 n^2 pi^2 P_n - q (1 + gamma)); nonzero when gamma != 1
        ric = solve_riccati_diagonal(cfg1, 12)
        res = riccati_residual(cfg1, ric, 12)
        n2 = (np.arange(13) * math.pi) ** 2
        g = 2.0
        expected = (g - 1.0) * (2 * n2 * ric.P[:13] - cfg1.q * (1.0 + g))
        assert np.diag(res) == pytest.approx(expected, abs=1e-10)
        assert abs(res[0, 0] - (-3.0)) < 1e-12

    def test_example_one_cross_entry(self, cfg1):
        ric = solve_riccati_diagonal(cfg1, 8)
        res = riccati_residual(cfg1, ric, 8)
        assert res[0, 2] == pytest.approx(-2.0 * ric.P[0] * ric.P[2], rel=1e-12)
        # parity-odd couplings vanish for the symmetric two-end layout
        assert res[0, 1] == pytest.approx(0.0, abs=1e-14)

    def test_single_actuator_cross_entry(self):
        cfg = single_actuator_at_origin()
        ric = solve_riccati_diagonal(cfg, 8)
        res = riccati_residual(cfg, ric, 8)
        assert res[0, 1] == pytest.approx(-ric.P[0] * ric.P[1], rel=1e-12)

    def test_order_beyond_truncation_rejected(self, cfg1):
        ric = solve_riccati_diagonal(cfg1, 8)
        with pytest.raises(ValueError):
            riccati_residual(cfg1, ric, 9)
