"""
Shared fixtures: reduced sample sizes and the reference operators
"""
import math
from pathlib import Path

import numpy as np
import pytest

from core.config import Settings
from core.families import AbcParams, abc_to_tensor
from core.models import QqoTensor

DATA_DIR = Path(__file__).resolve().parent.parent / "data" / "operators"

FLAGSHIP = AbcParams(a=1 / math.sqrt(3), b=1 / math.sqrt(3), c=0.0)

# Bell-basis sign patterns s_j = (s_j1, s_j2, s_j3)
BELL_SIGNS = np.array([
    [1.0, 1.0, -1.0],
    [1.0, -1.0, 1.0],
    [-1.0, 1.0, 1.0],
    [-1.0, -1.0, -1.0],
])


def bell_tensor(vectors: np.ndarray) -> QqoTensor:
    """
    Tensor of x -> sum_j phi_{v_j}(x) P_j for the Bell projections P_j

    The vectors must sum to zero so that the identity part stays w0;
    the map is then unital and completely positive.
    """
    b = np.zeros((3, 3, 3))
    for m in range(3):
        b[m, m, :] = np.einsum("j,jk->k", BELL_SIGNS[:, m], vectors) / 4.0
    return QqoTensor(b)


def random_bell_vectors(rng: np.random.Generator) -> np.ndarray:
    """Four Bloch vectors summing to zero, each inside the unit ball"""
    head = rng.normal(size=(3, 3))
    head /= np.linalg.norm(head, axis=1, keepdims=True)
    head *= rng.uniform(0.0, 1.0 / 3.0, size=(3, 1))
    return np.vstack([head, -head.sum(axis=0)])


@pytest.fixture
def fast_settings():
    """Settings with small grids so scans run quickly"""
    return Settings(
        sphere_points=162,
        ks_pairs=256,
        oracle_samples=256,
        dstar1_random_pairs=256,
        dstar1_pair_grid=42,
        triple_norm_refine=30,
        refine_steps=20,
    )


@pytest.fixture
def default_settings():
    return Settings()


@pytest.fixture
def flagship_tensor():
    return abc_to_tensor(FLAGSHIP)


@pytest.fixture
def v0_tensor():
    """V(f) = (f1^2, 0, 0)"""
    return QqoTensor.from_entries({(1, 1, 1): 1.0})
