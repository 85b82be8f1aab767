"""
Deterministic sample sets

The sphere grid is a Fibonacci lattice augmented with the six axis points;
all random samples come from numpy Generators seeded explicitly so that
verdicts are reproducible.
"""
from __future__ import annotations
import numpy as np

AXES = np.vstack([np.eye(3), -np.eye(3)])


def fibonacci_sphere(n: int) -> np.ndarray:
    """
    Unit-sphere grid of n Fibonacci lattice points plus the six +-e_k

    Args:
        n: Number of lattice points (>= 1)

    Returns:
        Array of shape (n + 6, 3); the axes come first
    """
    if n < 1:
        raise ValueError(f"Grid size must be positive, got {n}")
    i = np.arange(n, dtype=float) + 0.5
    z = 1.0 - 2.0 * i / n
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = np.pi * (1.0 + np.sqrt(5.0)) * i
    lattice = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    return np.vstack([AXES, lattice])


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_ball(rng: np.random.Generator, n: int) -> np.ndarray:
    """n points uniform in the closed unit ball of R^3"""
    directions = rng.normal(size=(n, 3))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = rng.random(n) ** (1.0 / 3.0)
    return directions * radii[:, None]


def random_complex_unit(rng: np.random.Generator, n: int) -> np.ndarray:
    """n complex Gaussian 3-vectors normalized to unit norm"""
    w = rng.normal(size=(n, 3)) + 1j * rng.normal(size=(n, 3))
    return w / np.linalg.norm(w, axis=1, keepdims=True)


def random_pauli_coefficients(rng: np.random.Generator, n: int):
    """(w0, w) arrays for n complex Gaussian elements w0*1 + w.sigma with |w0|^2 + |w|^2 = 1"""
    w0 = rng.normal(size=n) + 1j * rng.normal(size=n)
    w = rng.normal(size=(n, 3)) + 1j * rng.normal(size=(n, 3))
    norm = np.sqrt(np.abs(w0) ** 2 + np.sum(np.abs(w) ** 2, axis=1))
    return w0 / norm, w / norm[:, None]


def ball_grid(n: int) -> np.ndarray:
    """Points of the n x n x n cube grid on [-1, 1]^3 that lie in the unit ball"""
    if n < 1:
        raise ValueError(f"Grid size must be positive, got {n}")
    axis = np.linspace(-1.0, 1.0, n) if n > 1 else np.zeros(1)
    cube = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 3)
    return cube[np.linalg.norm(cube, axis=1) <= 1.0]
