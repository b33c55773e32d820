import numpy as np
import pytest

from emodeid.synthetic import make_mock_dataset

__all__ = ["ar_signal", "speech_like_poles", "make_mock_dataset"]


def ar_signal(rng, n, poles):
    """AR-filtered white noise, peak-normalized to 0.5."""
    from scipy import signal as sps

    coeffs = np.poly(poles).real
    x = sps.lfilter([1.0], coeffs, rng.standard_normal(n))
    return x / np.max(np.abs(x)) * 0.5


def speech_like_poles():
    return [
        0.97 * np.exp(1j * 0.3),
        0.97 * np.exp(-1j * 0.3),
        0.95 * np.exp(1j * 1.2),
        0.95 * np.exp(-1j * 1.2),
    ]


@pytest.fixture
def mock_dataset(tmp_path):
    return make_mock_dataset(tmp_path)
