"""
Quadratic dynamics on the Bloch ball

V(f)_k = sum_ij b[i,j,k] f_i f_j is the map induced by Delta^* on product
states; the majorant V~ uses |b| instead. This module iterates both,
computes the contraction and majorant certificates and searches for
fixed points.
"""
from __future__ import annotations
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np
from scipy import optimize

from .config import Settings, get_settings
from .models import QqoTensor, StateVec
from .utils import map_ordered

# Configure logging
logger = logging.getLogger(__name__)

CONVERGED = "converged_to_zero"
FIXED_POINT = "fixed_point"
MAX_STEPS = "max_steps"
LEFT_BALL = "left_ball"

# Labels of dynamics_class, strongest first
DYNAMICS_CLASSES = ("contraction", "bb_main", "majorant_decay", "bounded_majorant", "unclassified")


@dataclass
class StabilityCertificates:
    """Contraction constant, majorant data and the stability flags derived from them"""
    alpha_k: np.ndarray
    alpha: float
    delta_k: np.ndarray
    alfa_contraction: bool
    bb2: bool
    bb33_n0: Optional[int]
    bb_main: bool

    @property
    def d(self) -> np.ndarray:
        return self.delta_k


@dataclass
class Trajectory:
    points: List[np.ndarray] = field(default_factory=list)
    terminal: str = MAX_STEPS
    limit: Optional[np.ndarray] = None

    @property
    def steps(self) -> int:
        return len(self.points) - 1


@dataclass
class TildeOrbit:
    bounded_up_to_horizon: bool
    sup_seen: float
    converged_to_zero: bool
    steps: int


def _vec(f: Union[StateVec, np.ndarray]) -> np.ndarray:
    if isinstance(f, StateVec):
        return f.f
    return np.asarray(f, dtype=float).reshape(3)


def apply_v(t: QqoTensor, f: Union[StateVec, np.ndarray]) -> np.ndarray:
    """
    V(f)_k = sum_ij b[i,j,k] f_i f_j

    Example:
        >>> apply_v(QqoTensor.from_entries({(1, 1, 1): 1.0}), np.array([0.5, 0, 0]))
        array([0.25, 0.  , 0.  ])
    """
    f = _vec(f)
    return np.einsum("ijk,i,j->k", t.b, f, f)


def apply_v_tilde(t: QqoTensor, p: np.ndarray) -> np.ndarray:
    """V~(p)_k = sum_ij |b[i,j,k]| p_i p_j"""
    p = np.asarray(p, dtype=float)
    return np.einsum("ijk,i,j->k", np.abs(t.b), p, p)


def jacobian_v(t: QqoTensor, f: np.ndarray) -> np.ndarray:
    """dV_k/df_i = sum_j (b[i,j,k] + b[j,i,k]) f_j, returned as [k, i]"""
    return np.einsum("ijk,j->ki", t.b + t.b.transpose(1, 0, 2), f)


def _tilde_power(t: QqoTensor, p: np.ndarray, n: int) -> np.ndarray:
    for _ in range(n):
        p = apply_v_tilde(t, p)
    return p


def certificates(t: QqoTensor, settings: Optional[Settings] = None) -> StabilityCertificates:
    """
    Stability certificates of V

    alpha_k adds the Euclidean norms of the column sums and the row sums
    of |b[., ., k]|; alpha = sum alpha_k^2 < 1 makes V a contraction.
    delta_k = sum_ij |b[i,j,k]|; delta_k <= 1 for all k bounds the
    majorant orbit of d = (delta_1, delta_2, delta_3). bb33_n0 is only
    searched under that bound.

    Args:
        t: Coefficient tensor
        settings: Optional settings (bb33_max_n, tolerances.bb)

    Returns:
        StabilityCertificates
    """
    settings = settings or get_settings()
    abs_b = np.abs(t.b)
    col_sums = abs_b.sum(axis=0)  # [j, k]
    row_sums = abs_b.sum(axis=1)  # [i, k]
    alpha_k = np.sqrt(np.sum(col_sums ** 2, axis=0)) + np.sqrt(np.sum(row_sums ** 2, axis=0))
    alpha = float(np.sum(alpha_k ** 2))
    delta_k = abs_b.sum(axis=(0, 1))

    bb2 = bool(np.all(delta_k <= 1.0 + settings.tolerances.bb))

    bb33_n0 = None
    if bb2:
        p = delta_k.copy()
        for n in range(1, settings.bb33_max_n + 1):
            p = apply_v_tilde(t, p)
            if np.all(p < 1.0):
                bb33_n0 = n
                break

    # coupled[k0, k]: some i0 has |b[i0,k0,k]| + |b[k0,i0,k]| != 0
    coupled = np.any(abs_b.transpose(1, 0, 2) + abs_b > 0.0, axis=1)
    bb_main = bb2 and any(
        delta_k[k0] < 1.0 and bool(np.all(coupled[k0])) for k0 in range(3)
    )

    return StabilityCertificates(
        alpha_k=alpha_k,
        alpha=alpha,
        delta_k=delta_k,
        alfa_contraction=alpha < 1.0,
        bb2=bb2,
        bb33_n0=bb33_n0,
        bb_main=bb_main,
    )


def dynamics_class(certs: StabilityCertificates) -> str:
    """Strongest stability statement the certificates support"""
    if certs.alfa_contraction:
        return "contraction"
    if certs.bb_main:
        return "bb_main"
    if certs.bb2 and certs.bb33_n0 is not None:
        return "majorant_decay"
    if certs.bb2:
        return "bounded_majorant"
    return "unclassified"


def iterate(
    t: QqoTensor,
    f0: Union[StateVec, np.ndarray],
    max_steps: Optional[int] = None,
    tol: Optional[float] = None,
    settings: Optional[Settings] = None,
) -> Trajectory:
    """
    Iterate V from f0 until a terminal condition

    Each point is checked in order: outside the ball by more than the
    escape slack (left_ball), norm <= tol (converged_to_zero), then
    |V(f) - f| <= tol (fixed_point). Otherwise the orbit ends at max_steps.

    Args:
        t: Coefficient tensor
        f0: Starting state
        max_steps: Maximum number of applications of V
        tol: Convergence and fixed-point tolerance
        settings: Optional settings

    Returns:
        Trajectory whose points start with f0

    Raises:
        ValueError: If max_steps < 1 or tol <= 0
    """
    settings = settings or get_settings()
    max_steps = settings.steps if max_steps is None else max_steps
    tol = settings.tol if tol is None else tol
    if max_steps < 1:
        raise ValueError(f"max_steps must be at least 1, got {max_steps}")
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    escape = 1.0 + settings.tolerances.ball_escape

    f = _vec(f0).copy()
    trajectory = Trajectory(points=[f])
    for n in range(max_steps + 1):
        norm = float(np.linalg.norm(f))
        if norm > escape:
            trajectory.terminal = LEFT_BALL
            return trajectory
        if norm <= tol:
            trajectory.terminal = CONVERGED
            trajectory.limit = np.zeros(3)
            return trajectory
        if n == max_steps:
            break
        g = apply_v(t, f)
        if np.linalg.norm(g - f) <= tol:
            trajectory.terminal = FIXED_POINT
            trajectory.limit = f
            return trajectory
        trajectory.points.append(g)
        f = g

    logger.debug("iterate: no terminal condition after %d steps", max_steps)
    trajectory.terminal = MAX_STEPS
    return trajectory


def tilde_orbit_probe(
    t: QqoTensor,
    horizon: Optional[int] = None,
    settings: Optional[Settings] = None,
) -> TildeOrbit:
    """
    Follow V~^n(d) up to the horizon

    Escape is declared when a component exceeds tolerances.tilde_escape,
    convergence when every component is below tolerances.tilde_zero.
    sup_seen includes d itself.
    """
    settings = settings or get_settings()
    horizon = settings.tilde_horizon if horizon is None else horizon
    if horizon < 1:
        raise ValueError(f"Horizon must be at least 1, got {horizon}")
    tol = settings.tolerances

    p = np.abs(t.b).sum(axis=(0, 1))
    sup_seen = float(np.max(p))
    if np.all(p < tol.tilde_zero):
        return TildeOrbit(True, sup_seen, True, 0)

    for n in range(1, horizon + 1):
        p = apply_v_tilde(t, p)
        sup_seen = max(sup_seen, float(np.max(p)))
        if np.any(p > tol.tilde_escape):
            return TildeOrbit(False, sup_seen, False, n)
        if np.all(p < tol.tilde_zero):
            return TildeOrbit(True, sup_seen, True, n)

    return TildeOrbit(True, sup_seen, False, horizon)


def majorant_bound(t: QqoTensor, f: Union[StateVec, np.ndarray], n: int) -> np.ndarray:
    """
    Componentwise bound gamma_f^(2^n) V~^(n-1)(d) on |V^n(f)|

    Raises:
        ValueError: If n < 1
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    f = _vec(f)
    gamma = float(np.max(np.abs(f)))
    d = np.abs(t.b).sum(axis=(0, 1))
    return gamma ** (2 ** n) * _tilde_power(t, d, n - 1)


def _fixed_point_candidates(t: QqoTensor, seed: np.ndarray, settings: Settings) -> List[np.ndarray]:
    """Damped iteration from the seed, and a Newton solve started at the seed itself"""
    theta = settings.damping
    f = seed.copy()
    for _ in range(settings.fixed_point_steps):
        g = (1.0 - theta) * f + theta * apply_v(t, f)
        if not np.all(np.isfinite(g)) or np.linalg.norm(g) > 10.0:
            f = g
            break
        settled = np.linalg.norm(g - f) <= settings.fixed_point_residual
        f = g
        if settled:
            break

    candidates = [f] if np.all(np.isfinite(f)) else []
    for start in candidates[:1] + [seed]:
        sol = optimize.root(
            lambda g: apply_v(t, g) - g,
            start,
            jac=lambda g: jacobian_v(t, g) - np.eye(3),
            method="hybr",
        )
        if sol.success:
            candidates.append(sol.x)
    return candidates


def find_fixed_points(
    t: QqoTensor,
    seeds: Sequence[Union[StateVec, np.ndarray]],
    tol: Optional[float] = None,
    settings: Optional[Settings] = None,
) -> List[np.ndarray]:
    """
    Fixed points of V in the ball reachable from the seeds

    Every seed runs the damped iteration f <- (1 - theta) f + theta V(f);
    the damped result and the raw seed are then polished by a Newton
    solve. Points with residual <= tol inside the ball are kept and
    deduplicated in seed order.

    Args:
        t: Coefficient tensor
        seeds: Starting states
        tol: Residual tolerance (defaults to settings.fixed_point_residual)
        settings: Optional settings

    Returns:
        List of distinct fixed points
    """
    settings = settings or get_settings()
    tol = settings.fixed_point_residual if tol is None else tol
    escape = 1.0 + settings.tolerances.ball_escape
    dedupe = settings.tolerances.dedupe

    seed_arrays = [_vec(s).copy() for s in seeds]
    per_seed = map_ordered(
        lambda s: _fixed_point_candidates(t, s, settings), seed_arrays, settings.workers
    )

    found: List[np.ndarray] = []
    for candidates in per_seed:
        for g in candidates:
            if np.linalg.norm(g) > escape:
                continue
            if np.linalg.norm(apply_v(t, g) - g) > tol:
                continue
            if any(np.linalg.norm(g - h) <= dedupe for h in found):
                continue
            found.append(g)

    logger.debug("find_fixed_points: %d seeds, %d fixed points", len(seed_arrays), len(found))
    return found
