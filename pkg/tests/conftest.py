"""Shared fixtures for the svdfbmc test suite."""

import numpy as np
import pytest

from svdfbmc.core.config import SimConfig
from svdfbmc.phy.modem import FsFbmcModem
from svdfbmc.phy.prototype_filter import design_phydyas


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def phydyas():
    """PHYDYAS filter of the default numerology, M = 64 and K = 4."""
    return design_phydyas(64, 4)


@pytest.fixture(scope="session")
def full_modem(phydyas):
    """Modem with every subchannel active."""
    return FsFbmcModem(phydyas)


@pytest.fixture
def config(tmp_path):
    """Short uncoded run writing into a temporary directory."""
    return SimConfig(
        SYSTEM="proposed",
        CODING=False,
        SNR_GRID_DB=[20.0],
        FRAMES_PER_POINT=2,
        MIN_FRAMES=2,
        OUTPUT_DIR=str(tmp_path / "results"),
    )


def random_unitary(rng, n):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def complex_normal(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
