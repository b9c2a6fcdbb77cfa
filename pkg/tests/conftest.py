import numpy as np
import pytest

from drivenatom import Lorentzian, make_system


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def resonant_system():
    """Weakly driven atom exactly on resonance with the laser."""
    return make_system(omega_a=10.0, omega_l=10.0, rabi=0.4)


@pytest.fixture
def detuned_system():
    """3-4-5 geometry: delta = 0.3, rabi = 0.4, dressed splitting 0.5."""
    return make_system(omega_a=10.3, omega_l=10.0, rabi=0.4)


@pytest.fixture
def resonant_lorentzian():
    """Reservoir peaked exactly at the laser frequency."""
    return Lorentzian(center=10.0, width=0.5, strength=0.2)
