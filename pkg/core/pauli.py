"""
Pauli-basis algebra of 2x2 matrices

Elements are x = w0*1 + w.sigma. The scalar product on C^3 is
<u, v> = sum_k u_k conj(v_k) everywhere; the bracket [u, v] is the
cross product.
"""
from __future__ import annotations
import logging
from typing import Optional, Tuple

import numpy as np

from .config import Settings, get_settings
from .linalg import LinalgError
from .models import PauliElement, StateVec

# Configure logging
logger = logging.getLogger(__name__)

IDENTITY_2 = np.eye(2, dtype=complex)
SIGMA = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)

# Levi-Civita symbol eps[m, l, k]
LEVI_CIVITA = np.zeros((3, 3, 3))
for _m, _l, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    LEVI_CIVITA[_m, _l, _k] = 1.0
    LEVI_CIVITA[_l, _m, _k] = -1.0


def inner(u: np.ndarray, v: np.ndarray) -> complex:
    """<u, v> = sum_k u_k conj(v_k)"""
    return complex(np.sum(np.asarray(u) * np.conj(v)))


def bracket(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """[u, v] as the cross product of complex 3-vectors"""
    return np.cross(np.asarray(u, dtype=complex), np.asarray(v, dtype=complex))


def pauli_to_dense(x: PauliElement) -> np.ndarray:
    """
    Dense 2x2 matrix w0*I + sum_k w_k sigma_k

    Example:
        >>> pauli_to_dense(PauliElement(0, [1, 0, 0]))
        array([[0.+0.j, 1.+0.j],
               [1.+0.j, 0.+0.j]])
    """
    return x.w0 * IDENTITY_2 + np.einsum("k,kij->ij", x.w, SIGMA)


def dense_to_pauli(m: np.ndarray, settings: Optional[Settings] = None) -> PauliElement:
    """
    Inverse embedding: w0 = Tr(M)/2, w_k = Tr(M sigma_k)/2

    Raises:
        ValueError: If m is not 2x2
        LinalgError: If the result does not reproduce m within tolerances.roundtrip
    """
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        raise ValueError(f"Expected a 2x2 matrix, got shape {m.shape}")
    w0 = 0.5 * np.trace(m)
    w = 0.5 * np.einsum("ij,kji->k", m, SIGMA)
    x = PauliElement(w0, w)
    check_roundtrip(pauli_to_dense(x), m, settings)
    return x


def check_roundtrip(rebuilt: np.ndarray, original: np.ndarray, settings: Optional[Settings] = None) -> float:
    """Max deviation of a rebuilt dense matrix, relative to max(1, max |original|)"""
    tol = (settings or get_settings()).tolerances.roundtrip
    scale = max(1.0, float(np.max(np.abs(original))))
    deviation = float(np.max(np.abs(rebuilt - original))) / scale
    if deviation > tol:
        logger.warning("Dense round-trip deviation %.3e exceeds %.1e", deviation, tol)
        raise LinalgError(f"Dense round-trip deviation {deviation:.3e} exceeds tolerance")
    return deviation


def pauli_mul(x: PauliElement, y: PauliElement) -> PauliElement:
    """
    Product via sigma_m sigma_l = delta_ml 1 + i eps_mlk sigma_k

    (w0 + w.s)(v0 + v.s) = (w0 v0 + w.v) 1 + (w0 v + v0 w + i w x v).s
    where w.v is the bilinear (unconjugated) dot product.
    """
    scalar = x.w0 * y.w0 + np.dot(x.w, y.w)
    vector = x.w0 * y.w + y.w0 * x.w + 1j * np.cross(x.w, y.w)
    return PauliElement(scalar, vector)


def eval_state(f: StateVec, x: PauliElement) -> complex:
    """phi_f(x) = w0 + <w, f>"""
    return complex(x.w0 + inner(x.w, f.f))


def tau(x: PauliElement) -> complex:
    """Normalized trace Tr(x)/2"""
    return complex(x.w0)


def is_self_adjoint(x: PauliElement, tol: float) -> bool:
    return abs(x.w0.imag) <= tol and bool(np.all(np.abs(x.w.imag) <= tol))


def is_positive_element(x: PauliElement, settings: Optional[Settings] = None) -> Tuple[bool, float]:
    """
    Positivity test x >= 0 iff x is self-adjoint and |w| <= w0

    Returns:
        (verdict, margin) with margin = w0 - |w|
    """
    tol = (settings or get_settings()).tolerances
    margin = float(x.w0.real - np.linalg.norm(x.w))
    verdict = is_self_adjoint(x, tol.hermitian) and margin >= -tol.positivity
    return verdict, margin
