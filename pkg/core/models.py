from __future__ import annotations
from typing import Dict, Iterable, Optional, Tuple
from dataclasses import dataclass, field

import numpy as np

from .config import get_settings


def _as_vector(values: Iterable, dtype, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=dtype).reshape(-1)
    if arr.shape != (3,):
        raise ValueError(f"{name} must have exactly 3 components, got shape {arr.shape}")
    return arr


@dataclass
class PauliElement:
    """Element x = w0*1 + w.sigma of the 2x2 matrix algebra"""
    w0: complex
    w: np.ndarray = field(default_factory=lambda: np.zeros(3, dtype=complex))

    def __post_init__(self):
        """Coerce coefficients to complex and validate the vector part"""
        self.w0 = complex(self.w0)
        self.w = _as_vector(self.w, complex, "Pauli vector part")
        if not (np.isfinite(self.w0) and np.all(np.isfinite(self.w))):
            raise ValueError("Pauli coefficients must be finite")

    @classmethod
    def identity(cls) -> "PauliElement":
        return cls(1.0, np.zeros(3))

    @classmethod
    def sigma(cls, k: int) -> "PauliElement":
        """Pauli matrix sigma_k with 1-based k"""
        if k not in (1, 2, 3):
            raise ValueError(f"Pauli index must be 1, 2 or 3, got {k}")
        w = np.zeros(3, dtype=complex)
        w[k - 1] = 1.0
        return cls(0.0, w)

    def adjoint(self) -> "PauliElement":
        return PauliElement(np.conj(self.w0), np.conj(self.w))

    def scale(self, s: complex) -> "PauliElement":
        return PauliElement(s * self.w0, s * self.w)

    def __add__(self, other: "PauliElement") -> "PauliElement":
        return PauliElement(self.w0 + other.w0, self.w + other.w)

    def __sub__(self, other: "PauliElement") -> "PauliElement":
        return PauliElement(self.w0 - other.w0, self.w - other.w)


@dataclass
class StateVec:
    """
    Bloch-ball point f identifying the state w0*1 + w.sigma -> w0 + <w, f>

    slack widens the unit ball; it defaults to tolerances.state_norm.
    """
    f: np.ndarray
    slack: Optional[float] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        """Validate that f is a real 3-vector inside the closed unit ball"""
        arr = np.asarray(self.f)
        if np.iscomplexobj(arr):
            if np.any(np.abs(arr.imag) > 0):
                raise ValueError("State vector must be real")
            arr = arr.real
        self.f = _as_vector(arr, float, "State vector")
        if not np.all(np.isfinite(self.f)):
            raise ValueError("State vector must be finite")
        if self.slack is None:
            self.slack = get_settings().tolerances.state_norm
        norm = float(np.linalg.norm(self.f))
        if norm > 1.0 + self.slack:
            raise ValueError(f"State vector lies outside the unit ball: |f| = {norm!r}")

    @classmethod
    def of(cls, *components: float) -> "StateVec":
        return cls(np.array(components, dtype=float))

    @property
    def gamma(self) -> float:
        """max_i |f_i|"""
        return float(np.max(np.abs(self.f)))


@dataclass
class QqoTensor:
    """
    Coefficients b[m][l][k] of a Haar-state quadratic operator

    Stored 0-based as a real (3, 3, 3) array; the operator is
    Delta(w0 + w.sigma) = w0 1(x)1 + sum_{m,l} (sum_k b[m,l,k] w_k) sigma_m (x) sigma_l.
    """
    b: np.ndarray

    def __post_init__(self):
        """Validate shape and finiteness of the 27 coefficients"""
        arr = np.asarray(self.b)
        if np.iscomplexobj(arr):
            if np.any(np.abs(arr.imag) > 0):
                raise ValueError("Tensor coefficients must be real")
            arr = arr.real
        arr = np.array(arr, dtype=float)
        if arr.shape != (3, 3, 3):
            raise ValueError(f"Tensor must have shape (3, 3, 3), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("Tensor coefficients must be finite reals")
        self.b = arr

    @classmethod
    def zeros(cls) -> "QqoTensor":
        return cls(np.zeros((3, 3, 3)))

    @classmethod
    def from_entries(cls, entries: Dict[Tuple[int, int, int], float]) -> "QqoTensor":
        """
        Build a tensor from 1-based (m, l, k) entries; omitted entries are zero

        Args:
            entries: Mapping (m, l, k) -> b_{ml,k}

        Returns:
            QqoTensor

        Raises:
            ValueError: If an index is outside 1..3
        """
        b = np.zeros((3, 3, 3))
        for (m, l, k), value in entries.items():
            if not all(i in (1, 2, 3) for i in (m, l, k)):
                raise ValueError(f"Tensor index out of range: {(m, l, k)}")
            b[m - 1, l - 1, k - 1] = float(value)
        return cls(b)

    def entry(self, m: int, l: int, k: int) -> float:
        """b_{ml,k} with 1-based indices"""
        return float(self.b[m - 1, l - 1, k - 1])

    def scaled(self, s: float) -> "QqoTensor":
        return QqoTensor(s * self.b)


@dataclass
class TensorSquareElement:
    """Element of M2 (x) M2 in the Pauli product basis"""
    c00: complex
    c10: np.ndarray = field(default_factory=lambda: np.zeros(3, dtype=complex))
    c01: np.ndarray = field(default_factory=lambda: np.zeros(3, dtype=complex))
    C: np.ndarray = field(default_factory=lambda: np.zeros((3, 3), dtype=complex))

    def __post_init__(self):
        """Coerce all parts to complex arrays of the right shape"""
        self.c00 = complex(self.c00)
        self.c10 = _as_vector(self.c10, complex, "sigma_m (x) 1 part")
        self.c01 = _as_vector(self.c01, complex, "1 (x) sigma_l part")
        self.C = np.array(self.C, dtype=complex)
        if self.C.shape != (3, 3):
            raise ValueError(f"sigma_m (x) sigma_l part must be 3x3, got {self.C.shape}")
