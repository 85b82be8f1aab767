"""
Diagonal operators and the three-parameter (a, b, c) family

A diagonal operator has b[i,j,k] = 0 for i != j, so V(f)_k = sum_i b_ik f_i^2.
The (a, b, c) family is the diagonal operator
    V(f) = (f1^2, a f2^2 + b f3^2, c f3^2).
"""
from __future__ import annotations
import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from .config import Settings, get_settings
from .models import QqoTensor, StateVec
from .operator import Certificate

# Configure logging
logger = logging.getLogger(__name__)

E1 = np.array([1.0, 0.0, 0.0])

# abc_classify case labels
CASE_LABELS = ("i", "ii", "iii", "iv", "v", "vi", "silent")


class FamilyError(Exception):
    """Base exception for operator families"""
    pass


class HypothesisNotMetError(FamilyError):
    """Classification requested outside the parameter region it covers"""
    pass


@dataclass
class DiagonalQO:
    """Diagonal operator coefficients b[i][k] = b[i,i,k], stored 0-based"""
    b: np.ndarray

    def __post_init__(self):
        arr = np.array(self.b, dtype=float)
        if arr.shape != (3, 3):
            raise ValueError(f"Diagonal coefficients must be 3x3, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("Diagonal coefficients must be finite reals")
        self.b = arr

    @classmethod
    def from_entries(cls, entries: Dict[Tuple[int, int], float]) -> "DiagonalQO":
        """Build from 1-based (i, k) entries; omitted entries are zero"""
        b = np.zeros((3, 3))
        for (i, k), value in entries.items():
            if i not in (1, 2, 3) or k not in (1, 2, 3):
                raise ValueError(f"Diagonal index out of range: {(i, k)}")
            b[i - 1, k - 1] = float(value)
        return cls(b)


class AbcParams(BaseModel):
    """Parameters of V(f) = (f1^2, a f2^2 + b f3^2, c f3^2)"""
    model_config = ConfigDict(frozen=True)

    a: float
    b: float
    c: float

    @field_validator("a", "b", "c")
    @classmethod
    def validate_finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError(f"Parameter must be finite, got {v}")
        return v


@dataclass
class NotKsVerdict:
    proved_not_ks: bool
    e14: float
    e15: float

    @property
    def label(self) -> str:
        return "proved_not_ks" if self.proved_not_ks else "inconclusive"


@dataclass
class AbcPrediction:
    """Case of the (a, b, c) orbit analysis and the limit it predicts"""
    case: str
    limit: Optional[np.ndarray]

    def __post_init__(self):
        if self.case not in CASE_LABELS:
            raise ValueError(f"Unknown case label {self.case!r}, expected one of {CASE_LABELS}")


def diagonal_to_tensor(d: DiagonalQO) -> QqoTensor:
    b = np.zeros((3, 3, 3))
    for i in range(3):
        b[i, i, :] = d.b[i, :]
    return QqoTensor(b)


def abc_to_diagonal(p: AbcParams) -> DiagonalQO:
    return DiagonalQO.from_entries({(1, 1): 1.0, (2, 2): p.a, (3, 2): p.b, (3, 3): p.c})


def abc_to_tensor(p: AbcParams) -> QqoTensor:
    """
    Embed the family: b[1,1,1] = 1, b[2,2,2] = a, b[3,3,2] = b, b[3,3,3] = c

    Example:
        >>> abc_to_tensor(AbcParams(a=0.0, b=0.0, c=0.0)).entry(1, 1, 1)
        1.0
    """
    return diagonal_to_tensor(abc_to_diagonal(p))


def _diagonal_sum_of_max_squares(d: DiagonalQO) -> float:
    return float(np.sum(np.max(d.b ** 2, axis=0)))


def check_bb3(d: DiagonalQO, settings: Optional[Settings] = None) -> Certificate:
    """
    sum_k max_i b_ik^2 <= 1, which keeps V on the ball for diagonal operators
    """
    settings = settings or get_settings()
    value = _diagonal_sum_of_max_squares(d)
    return Certificate(value <= 1.0 + settings.tolerances.bb, value, 1.0 - value)


def check_bb4(d: DiagonalQO, settings: Optional[Settings] = None) -> Certificate:
    """Strict form of check_bb3; makes (0,0,0) the unique stable fixed point"""
    settings = settings or get_settings()
    value = _diagonal_sum_of_max_squares(d)
    return Certificate(value < 1.0 - settings.tolerances.bb, value, 1.0 - value)


def check_bb5(p: AbcParams, settings: Optional[Settings] = None) -> Certificate:
    """max(a^2, b^2) + c^2 <= 1"""
    settings = settings or get_settings()
    value = max(p.a ** 2, p.b ** 2) + p.c ** 2
    return Certificate(value <= 1.0 + settings.tolerances.bb, value, 1.0 - value)


def diagonal_orbit_bound(d: DiagonalQO, n: int) -> np.ndarray:
    """
    Bound |V^n(f)_k| <= a_k gamma^(n-1) for f in the ball, n >= 2

    a_k = max_i |b_ik| and gamma = sum_k a_k^2.
    """
    if n < 2:
        raise ValueError(f"The orbit bound starts at n = 2, got {n}")
    a = np.max(np.abs(d.b), axis=0)
    gamma = float(np.sum(a ** 2))
    return a * gamma ** (n - 1)


def not_ks_predicate(p: AbcParams, settings: Optional[Settings] = None) -> NotKsVerdict:
    """
    Sufficient condition for the family to fail the Kadison-Schwarz property

    Proved not KS when max(a^2, b^2) + c^2 <= 1 and |a| + |b| > 1.
    e14 = a^2 + 2 max(b^2, c^2) is reported alongside; e14 <= 1 makes the
    first reduced condition hold.
    """
    settings = settings or get_settings()
    e14 = p.a ** 2 + 2.0 * max(p.b ** 2, p.c ** 2)
    e15 = abs(p.a) + abs(p.b)
    proved = check_bb5(p, settings).verdict and e15 > 1.0 + settings.tolerances.bb
    return NotKsVerdict(proved_not_ks=proved, e14=e14, e15=e15)


def check_e12(p: AbcParams, w: np.ndarray, settings: Optional[Settings] = None) -> Certificate:
    """
    Reduced first Kadison-Schwarz condition for the family at f = (1,0,0)

    |a|^2 |w2|^2 + |b conj(w2) + c conj(w3)|^2 <= |w2|^2 + |w3|^2;
    the margin equals the first value of ks-cert's ksf_margins.
    """
    settings = settings or get_settings()
    w = np.asarray(w, dtype=complex).reshape(3)
    lhs = abs(p.a) ** 2 * abs(w[1]) ** 2 + abs(p.b * np.conj(w[1]) + p.c * np.conj(w[2])) ** 2
    rhs = abs(w[1]) ** 2 + abs(w[2]) ** 2
    margin = float(rhs - lhs)
    return Certificate(margin >= -settings.tolerances.ks_residual, float(lhs), margin)


def abc_regime(p: AbcParams, settings: Optional[Settings] = None) -> str:
    """Which parameter case of the orbit analysis the family falls in"""
    settings = settings or get_settings()
    tol = settings.tolerances.equality
    if not check_bb5(p, settings).verdict:
        return "bb5_violated"
    if abs(abs(p.c) - 1.0) <= tol:
        return "iii"
    if abs(abs(p.a) - 1.0) <= tol:
        return "iv"
    if abs(abs(p.b) - 1.0) <= tol and abs(p.a) < 1.0:
        return "v"
    if max(p.a ** 2, p.b ** 2) + p.c ** 2 < 1.0:
        return "vi"
    return "silent"


def abc_classify(
    p: AbcParams,
    f0: Union[StateVec, np.ndarray],
    settings: Optional[Settings] = None,
) -> AbcPrediction:
    """
    Predict the limit of V^n(f0) for the (a, b, c) family

    Cases are tried in order, the first match wins:
        (i)   f0 is the fixed point (0,0,0) or (1,0,0)
        (ii)  |f1| = 1 -> (1,0,0)
        (iii) |c| = 1: |f3| = 1 -> (0,0,c); max(|f1|,|f3|) < 1 -> 0
        (iv)  |a| = 1: |a f2^2 + b f3^2| = 1 -> (0,a,0); < 1 with |f1| < 1 -> 0
        (v)   |b| = 1, |a| < 1, |f1| < 1 -> 0
        (vi)  max(a^2, b^2) + c^2 < 1, |f1| < 1 -> 0
    Anything else is reported as "silent" with no limit.

    Args:
        p: Family parameters
        f0: Starting state
        settings: Optional settings (tolerances.equality for the boundaries)

    Returns:
        AbcPrediction

    Raises:
        HypothesisNotMetError: If max(a^2, b^2) + c^2 > 1
    """
    settings = settings or get_settings()
    bb5 = check_bb5(p, settings)
    if not bb5.verdict:
        raise HypothesisNotMetError(
            f"Classification needs max(a^2, b^2) + c^2 <= 1, got {bb5.value!r}"
        )

    tol = settings.tolerances.equality
    f = f0.f if isinstance(f0, StateVec) else np.asarray(f0, dtype=float).reshape(3)
    f1, f2, f3 = (float(v) for v in f)
    zero = np.zeros(3)

    def is_one(v: float) -> bool:
        return abs(abs(v) - 1.0) <= tol

    if np.linalg.norm(f) <= tol:
        return AbcPrediction("i", zero)
    if np.linalg.norm(f - E1) <= tol:
        return AbcPrediction("i", E1.copy())
    if is_one(f1):
        return AbcPrediction("ii", E1.copy())

    if is_one(p.c):
        if is_one(f3):
            return AbcPrediction("iii", np.array([0.0, 0.0, p.c]))
        if max(abs(f1), abs(f3)) < 1.0:
            return AbcPrediction("iii", zero)

    if is_one(p.a):
        base = p.a * f2 ** 2 + p.b * f3 ** 2
        if is_one(base):
            # f2 picks up base^(2^(n-1)), an even power, so base = -1 lands here too
            return AbcPrediction("iv", np.array([0.0, p.a, 0.0]))
        if abs(base) < 1.0 and abs(f1) < 1.0:
            return AbcPrediction("iv", zero)

    if is_one(p.b) and abs(p.a) < 1.0 and abs(f1) < 1.0:
        return AbcPrediction("v", zero)

    if max(p.a ** 2, p.b ** 2) + p.c ** 2 < 1.0 and abs(f1) < 1.0:
        return AbcPrediction("vi", zero)

    logger.debug("abc_classify: no case applies to %s from %s", p, f)
    return AbcPrediction("silent", None)
