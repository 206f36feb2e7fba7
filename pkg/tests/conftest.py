import numpy as np
import pytest

import rodlqg as rl


@pytest.fixture(scope="session")
def cfg1():
    return rl.example_config(1)


@pytest.fixture(scope="session")
def cfg2():
    return rl.example_config(2)


@pytest.fixture(scope="session")
def cfg3():
    return rl.example_config(3)


@pytest.fixture(scope="session")
def pipeline1(cfg1):
    ric = rl.solve_riccati_diagonal(cfg1, 512)
    return ric, rl.gain_field(cfg1, ric)


@pytest.fixture(scope="session")
def pipeline2(cfg2):
    ric = rl.solve_riccati_diagonal(cfg2, 512)
    return ric, rl.gain_field(cfg2, ric)


@pytest.fixture(scope="session")
def spectrum1(cfg1, pipeline1):
    return rl.find_spectrum(cfg1, pipeline1[1], 13.0, tol=1e-10)


@pytest.fixture(scope="session")
def spectrum2(cfg2, pipeline2):
    return rl.find_spectrum(cfg2, pipeline2[1], 13.0, tol=1e-10)


@pytest.fixture(scope="session")
def filter3(cfg3):
    return rl.solve_filter_riccati(cfg3)


@pytest.fixture(scope="session")
def error_spectrum3(cfg3, filter3):
    return rl.error_spectrum(cfg3, filter3.L, 30.0, tol=1e-10)


def zero_gains(m: int, order: int) -> rl.GainField:
    return rl.GainField(
        tuple(rl.ModalVector(np.zeros(order + 1), rl.PLAIN_COSINE) for _ in range(m))
    )
