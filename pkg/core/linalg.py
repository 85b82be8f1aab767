"""
Small dense Hermitian linear algebra

Cyclic Jacobi eigensolver with complex rotations, used as the ground-truth
oracle for positivity and Kadison-Schwarz checks on 2x2, 4x4 and 8x8
matrices, plus batched LAPACK helpers for large sample scans.
"""
from __future__ import annotations
import logging
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from .config import Settings, get_settings

# Configure logging
logger = logging.getLogger(__name__)

SUPPORTED_SIZES = (2, 3, 4, 8)


class LinalgError(Exception):
    """Base exception for dense linear algebra"""
    pass


class NonHermitianError(LinalgError):
    """Input matrix is not Hermitian within tolerance"""
    pass


@dataclass
class DenseHermitian:
    """n x n complex Hermitian matrix, n in {2, 3, 4, 8}"""
    matrix: np.ndarray
    tol: float = 1e-12

    def __post_init__(self):
        """Validate shape and Hermiticity"""
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise LinalgError(f"Expected a square matrix, got shape {m.shape}")
        if m.shape[0] not in SUPPORTED_SIZES:
            raise LinalgError(f"Matrix size must be one of {SUPPORTED_SIZES}, got {m.shape[0]}")
        deviation = hermitian_deviation(m)
        scale = max(1.0, float(np.max(np.abs(m))))
        if deviation > self.tol * scale:
            raise NonHermitianError(
                f"Matrix is not Hermitian: max|M - M^H| = {deviation:.3e} > {self.tol:.1e}"
            )
        self.matrix = m

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def hermitian_deviation(m: np.ndarray) -> float:
    """max |M - M^H| elementwise"""
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def _off_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(np.abs(off) ** 2)))


def _rotation(a: np.ndarray, p: int, q: int) -> Optional[np.ndarray]:
    """
    Unitary U zeroing a[p, q] in U^H a U, or None when already zero

    The phase of a[p, q] is removed first, then the real 2x2 Jacobi
    rotation is applied.
    """
    apq = a[p, q]
    mag = abs(apq)
    if mag < 1e-300:
        return None

    phase = apq / mag
    app = a[p, p].real
    aqq = a[q, q].real
    theta = (aqq - app) / (2.0 * mag)
    t = 1.0 if theta == 0.0 else np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c

    u = np.eye(a.shape[0], dtype=complex)
    u[p, p] = c
    u[p, q] = s
    u[q, p] = -s * np.conj(phase)
    u[q, q] = c * np.conj(phase)
    return u


def jacobi_eigh(
    matrix: Union[np.ndarray, DenseHermitian],
    settings: Optional[Settings] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigen-decomposition by cyclic complex Jacobi rotations

    Args:
        matrix: Hermitian matrix (validated through DenseHermitian)
        settings: Optional settings (jacobi_tol, jacobi_max_sweeps, tolerances.hermitian)

    Returns:
        (eigenvalues ascending, eigenvectors as columns)

    Raises:
        NonHermitianError: If the input is not Hermitian within tolerance
    """
    settings = settings or get_settings()
    if not isinstance(matrix, DenseHermitian):
        matrix = DenseHermitian(matrix, tol=settings.tolerances.hermitian)

    a = 0.5 * (matrix.matrix + matrix.matrix.conj().T)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    threshold = settings.jacobi_tol * max(1.0, float(np.linalg.norm(a)))

    sweeps = 0
    while _off_norm(a) >= threshold and sweeps < settings.jacobi_max_sweeps:
        for p in range(n - 1):
            for q in range(p + 1, n):
                u = _rotation(a, p, q)
                if u is None:
                    continue
                a = u.conj().T @ a @ u
                v = v @ u
        sweeps += 1

    if sweeps >= settings.jacobi_max_sweeps:
        logger.warning("Jacobi hit the sweep cap (%d), off-diagonal mass %.3e",
                       sweeps, _off_norm(a))

    eigenvalues = np.real(np.diag(a))
    order = np.argsort(eigenvalues, kind="stable")
    return eigenvalues[order], v[:, order]


def eig_hermitian(
    matrix: Union[np.ndarray, DenseHermitian],
    settings: Optional[Settings] = None,
) -> np.ndarray:
    """
    Ascending real eigenvalues of a small Hermitian matrix

    Example:
        >>> eig_hermitian(np.diag([1.0, 2.0, 3.0, 4.0]))
        array([1., 2., 3., 4.])
    """
    eigenvalues, _ = jacobi_eigh(matrix, settings=settings)
    return eigenvalues


def min_eigenvalue(matrix: np.ndarray, settings: Optional[Settings] = None) -> float:
    return float(eig_hermitian(matrix, settings=settings)[0])


def batch_min_eigenvalues(matrices: np.ndarray) -> np.ndarray:
    """
    Smallest eigenvalue of each matrix in a stack (LAPACK path for scans)

    Args:
        matrices: Array of shape (N, n, n), Hermitian up to roundoff

    Returns:
        Array of shape (N,)
    """
    stack = np.asarray(matrices, dtype=complex)
    if stack.shape[0] == 0:
        return np.zeros(0)
    stack = 0.5 * (stack + np.conj(np.swapaxes(stack, -1, -2)))
    return np.linalg.eigvalsh(stack)[..., 0]
