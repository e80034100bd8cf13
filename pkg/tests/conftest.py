import numpy as np
import pytest


def smooth_field(d: np.ndarray) -> np.ndarray:
    """Band-limited 3-channel test signal: degree-2 polynomial in the
    direction components, values safely inside [0, 1]."""
    x, y, z = d[..., 0], d[..., 1], d[..., 2]
    return np.stack(
        [
            0.5 + 0.30 * x,
            0.5 + 0.25 * y - 0.10 * x * z,
            0.5 + 0.20 * z + 0.10 * x * y,
        ],
        axis=-1,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
