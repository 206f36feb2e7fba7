"""Built-in benchmark configurations used by the CLI and the test suite."""

from __future__ import annotations

import numpy as np

from .lqr_synthesis import RodConfig


def example_config(example_id: int) -> RodConfig:
    """Benchmark rod layouts 1-3.

    1: heating at both ends, unit weights.
    2: heating at both ends and the midpoint (double-strength middle flux).
    3: layout 2 plus two unit sensors at x = 1/4 and 3/4, unit noise levels.
    """
    if example_id == 1:
        return RodConfig(
            actuators=((0.0, 1.0), (1.0, 1.0)),
            sensors=(),
            q=1.0,
            R=np.eye(2),
        )
    if example_id == 2:
        return RodConfig(
            actuators=((0.0, 1.0), (0.5, 2.0), (1.0, 1.0)),
            sensors=(),
            q=1.0,
            R=np.eye(3),
        )
    if example_id == 3:
        return RodConfig(
            actuators=((0.0, 1.0), (0.5, 2.0), (1.0, 1.0)),
            sensors=((0.25, 1.0, 1.0), (0.75, 1.0, 1.0)),
            q=1.0,
            R=np.eye(3),
            b=1.0,
        )
    raise ValueError("example id must be 1, 2 or 3")
