import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Add parent directory to path to import src
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.classifier import SearchGrid
from src.config import Config
from src.profiles import ArcProfile, CylinderProfile, LineProfile, ProfileState

GOLDEN_DIR = Path(__file__).parent / 'golden'


@pytest.fixture(autouse=True)
def restore_config():
    """Undo tolerance overrides made by a test."""
    saved = Config.snapshot()
    yield
    Config.restore(saved)


@pytest.fixture
def rng():
    """Seeded generator for the fixed-size random draws."""
    return np.random.default_rng(20240601)


@pytest.fixture
def unit_cylinder():
    """x = 1, theta = pi/2."""
    return CylinderProfile(x0=1.0, z0=0.0)


@pytest.fixture
def helicoid_profile():
    """Horizontal line theta = 0 through (1, 0)."""
    return LineProfile(theta0=0.0, x0=1.0)


@pytest.fixture
def generic_arc():
    """Arc with x = 2, theta = pi/6, theta' = 0.1 at s = 0."""
    return ArcProfile(kappa=0.1, theta0=math.pi / 6, x0=2.0, z0=1.0)


@pytest.fixture
def random_states():
    """Factory of batched regular profile states with bounded magnitudes."""
    def make(rng, count, x_range=(0.3, 2.0), z_range=(0.1, 2.0), kappa=1.0):
        x = rng.uniform(*x_range, count) * rng.choice([-1.0, 1.0], count)
        return ProfileState(
            s=np.zeros(count),
            x=x,
            z=rng.uniform(*z_range, count),
            theta=rng.uniform(0.0, 2 * math.pi, count),
            theta_prime=rng.uniform(-kappa, kappa, count),
        )
    return make


@pytest.fixture
def random_unit_vectors():
    """Factory of uniformly distributed unit vectors, shape (count, 3)."""
    def make(rng, count):
        v = rng.normal(size=(count, 3))
        return v / np.linalg.norm(v, axis=1)[:, np.newaxis]
    return make


@pytest.fixture
def small_grid():
    """Cylinder and helicoid family over four cells."""
    return SearchGrid(
        curvature_values=[0.0],
        segment_count=1,
        segment_length=0.5,
        x0_values=[1.0],
        z0_values=[0.5],
        theta0_values=[math.pi / 2, 0.0],
        pitches=[1.0],
        alphas=[-1.0, -2.0],
        directions=[(1.0, 0.0, 0.0), (0.0, 0.0, 1.0)],
        step=0.01,
        sample_stride=5,
        t_samples=16,
        batch_size=2,
    )


@pytest.fixture
def golden_dir():
    return GOLDEN_DIR
