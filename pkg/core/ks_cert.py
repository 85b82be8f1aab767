"""
Kadison-Schwarz certification

For x = w0 + w.sigma the derived quantities are
    x_ml = <b_ml, w>            x_m = (x_m1, x_m2, x_m3)
    alpha_ml = <x_m, x_l> - <x_l, x_m>
    gamma_ml = [x_m, conj x_l] + [conj x_m, x_l]
    q(f, w)_m = <beta(f)_m, [w, conj w]>      h(w)_m = <b_1m, [w, conj w]>
Applying the conditional expectation of the state f to
Delta(x*x) - Delta(x)*Delta(x) gives scalar + vector.sigma with
    scalar = |w|^2 - i sum_m f_m alpha'_m - sum_m |x_m|^2
    vector = i (q - i sum_m f_m gamma'_m - sum_m [x_m, conj x_m])
where alpha'_m, gamma'_m are taken at the cyclic pairs (2,3), (3,1), (1,2).
The ks11 margin is the scalar, the ks2 margin is scalar - |vector|.
Both are necessary conditions; the dense oracle decides.
"""
from __future__ import annotations
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np

from .config import Settings, get_settings
from .linalg import batch_min_eigenvalues, min_eigenvalue
from .models import PauliElement, QqoTensor, StateVec, TensorSquareElement
from .operator import IDENTITY_4, KRON, apply_delta, tensor_square_to_dense
from .pauli import pauli_mul
from .sampling import fibonacci_sphere, make_rng, random_complex_unit, random_pauli_coefficients
from .utils import map_chunks

# Configure logging
logger = logging.getLogger(__name__)

# 0-based (pi(m), pi(m+1)) for m = 1, 2, 3
PI_PAIRS = ((1, 2), (2, 0), (0, 1))
E1 = np.array([1.0, 0.0, 0.0])

CHANNELS = ("ks11", "ks2", "oracle")
# Channels that carry a refined (f, w) pair
REFINED_CHANNELS = ("ks11", "ks2")


class KsCertError(Exception):
    """Base exception for Kadison-Schwarz certification"""
    pass


class ConventionFault(KsCertError):
    """The ks11 scalar has an imaginary residue beyond tolerance"""
    pass


@dataclass
class KsQuantities:
    x_vecs: np.ndarray   # (3, 3), row m is x_m
    alpha: np.ndarray    # (3, 3)
    gamma: np.ndarray    # (3, 3, 3), gamma[m, l] is a 3-vector
    q: np.ndarray
    h: np.ndarray


@dataclass
class KsWitness:
    """
    A point where a Kadison-Schwarz test came out negative (or the worst one seen)

    For the ks11 and ks2 channels (f, w) is the state and vector part;
    for the oracle channel f is None and x = w0 + w.sigma.
    """
    channel: str
    margin: float
    w: np.ndarray
    f: Optional[np.ndarray] = None
    w0: complex = 0j

    def element(self) -> PauliElement:
        return PauliElement(self.w0, self.w)


@dataclass
class KsReport:
    violation_found: bool
    worst: Dict[str, KsWitness] = field(default_factory=dict)
    pairs_evaluated: int = 0
    oracle_samples: int = 0

    @property
    def best(self) -> KsWitness:
        """
        Most negative refined (f, w) witness

        The oracle channel is kept apart: its elements carry a w0 part and
        no state, so its eigenvalue is reported on its own.
        """
        return min((self.worst[c] for c in REFINED_CHANNELS if c in self.worst), key=lambda w: w.margin)

    @property
    def oracle_min_eigenvalue(self) -> float:
        return self.worst["oracle"].margin


def _state(f: Union[StateVec, np.ndarray]) -> np.ndarray:
    if isinstance(f, StateVec):
        return f.f
    return np.asarray(f, dtype=float).reshape(3)


def _x_rows(b: np.ndarray, ws: np.ndarray) -> np.ndarray:
    """x_ml = sum_k b[m,l,k] conj(w_k), batched over ws of shape (N, 3)"""
    return np.einsum("mlk,nk->nml", b, np.conj(ws))


def _cyclic_gamma(X: np.ndarray) -> np.ndarray:
    """gamma'_m for the cyclic pairs, shape (N, 3, 3)"""
    out = []
    for i, j in PI_PAIRS:
        out.append(np.cross(X[:, i], np.conj(X[:, j])) + np.cross(np.conj(X[:, i]), X[:, j]))
    return np.stack(out, axis=1)


def _ef_terms(b: np.ndarray, fs: np.ndarray, ws: np.ndarray) -> np.ndarray:
    """
    Closed-form scalar and inner vector of E_phi(Delta(x*x) - Delta(x)*Delta(x))

    Returns:
        Complex array (N, 4): column 0 is the scalar, columns 1..3 the vector
        inside the ks2 norm (the sigma part is i times it)
    """
    X = _x_rows(b, ws)
    G = np.einsum("nmj,nlj->nml", X, np.conj(X))
    alpha_pi = np.stack([G[:, i, j] - G[:, j, i] for i, j in PI_PAIRS], axis=1)
    x_sq = np.real(np.einsum("nmm->n", G))
    w_sq = np.sum(np.abs(ws) ** 2, axis=1)
    scalar = w_sq - 1j * np.sum(fs * alpha_pi, axis=1) - x_sq

    u = np.cross(ws, np.conj(ws))
    q = np.einsum("kml,nk,nl->nm", b, fs, np.conj(u))
    gamma_pi = _cyclic_gamma(X)
    bracket_sum = np.sum(np.cross(X, np.conj(X)), axis=1)
    inner = q - 1j * np.einsum("nm,nmc->nc", fs, gamma_pi) - bracket_sum
    return np.column_stack([scalar, inner])


def _checked_scalar(scalar: np.ndarray, ws: np.ndarray, settings: Settings) -> np.ndarray:
    """Real part of the ks11 scalar, after checking the imaginary residue"""
    bound = settings.tolerances.ks_residual * np.maximum(1.0, np.sum(np.abs(ws) ** 2, axis=1))
    residue = np.abs(scalar.imag)
    if np.any(residue > bound):
        idx = int(np.argmax(residue - bound))
        logger.warning("ks11 scalar has imaginary residue %.3e at w=%s", residue[idx], ws[idx])
        raise ConventionFault(f"ks11 scalar imaginary residue {residue[idx]:.3e} exceeds tolerance")
    return scalar.real


def _margins(
    t: QqoTensor,
    fs: np.ndarray,
    ws: np.ndarray,
    settings: Settings,
) -> Tuple[np.ndarray, np.ndarray]:
    terms = _ef_terms(t.b, fs, ws)
    ks11 = _checked_scalar(terms[:, 0], ws, settings)
    ks2 = ks11 - np.linalg.norm(terms[:, 1:], axis=1)
    return ks11, ks2


def ks_quantities(
    t: QqoTensor,
    f: Union[StateVec, np.ndarray],
    w: np.ndarray,
) -> KsQuantities:
    """
    Derived quantities x_m, alpha, gamma, q(f, w) and h(w)

    Example:
        >>> kq = ks_quantities(QqoTensor.zeros(), StateVec.of(1, 0, 0), np.zeros(3))
        >>> float(np.abs(kq.x_vecs).max())
        0.0
    """
    f = _state(f)
    w = np.asarray(w, dtype=complex).reshape(3)
    X = np.einsum("mlk,k->ml", t.b, np.conj(w))
    G = X @ np.conj(X).T
    gamma = np.empty((3, 3, 3), dtype=complex)
    for m in range(3):
        for l in range(3):
            gamma[m, l] = np.cross(X[m], np.conj(X[l])) + np.cross(np.conj(X[m]), X[l])
    u = np.cross(w, np.conj(w))
    beta = np.einsum("kij,k->ij", t.b, f)
    return KsQuantities(
        x_vecs=X,
        alpha=G - G.T,
        gamma=gamma,
        q=beta @ np.conj(u),
        h=t.b[0] @ np.conj(u),
    )


def ks11_margin(
    t: QqoTensor,
    f: Union[StateVec, np.ndarray],
    w: np.ndarray,
    settings: Optional[Settings] = None,
) -> float:
    """
    |w|^2 - i sum_m f_m alpha'_m - sum_m |x_m|^2; Kadison-Schwarz needs >= 0

    Raises:
        ConventionFault: If the scalar has an imaginary residue beyond tolerance
    """
    settings = settings or get_settings()
    ks11, _ = _margins(t, _state(f)[None, :], np.asarray(w, dtype=complex).reshape(1, 3), settings)
    return float(ks11[0])


def ks2_margin(
    t: QqoTensor,
    f: Union[StateVec, np.ndarray],
    w: np.ndarray,
    settings: Optional[Settings] = None,
) -> float:
    """
    ks11 value minus |q - i sum_m f_m gamma'_m - sum_m [x_m, conj x_m]|

    This is the smallest eigenvalue of the conditional expectation of
    Delta(x*x) - Delta(x)*Delta(x); Kadison-Schwarz needs >= 0.

    Raises:
        ConventionFault: If the scalar has an imaginary residue beyond tolerance
    """
    settings = settings or get_settings()
    _, ks2 = _margins(t, _state(f)[None, :], np.asarray(w, dtype=complex).reshape(1, 3), settings)
    return float(ks2[0])


def ksf_margins(
    t: QqoTensor,
    w: np.ndarray,
    settings: Optional[Settings] = None,
) -> Tuple[float, float]:
    """Both margins at f = (1,0,0), written through h(w) and gamma_23"""
    settings = settings or get_settings()
    w = np.asarray(w, dtype=complex).reshape(3)
    kq = ks_quantities(t, E1, w)
    scalar = (
        np.sum(np.abs(w) ** 2)
        - 1j * kq.alpha[1, 2]
        - np.sum(np.abs(kq.x_vecs) ** 2)
    )
    first = float(_checked_scalar(np.array([scalar]), w[None, :], settings)[0])
    inner = kq.h - 1j * kq.gamma[1, 2] - np.sum(np.cross(kq.x_vecs, np.conj(kq.x_vecs)), axis=0)
    return first, first - float(np.linalg.norm(inner))


def ef_difference(
    t: QqoTensor,
    f: Union[StateVec, np.ndarray],
    x: PauliElement,
) -> PauliElement:
    """
    E_phi(Delta(x*x) - Delta(x)*Delta(x)) in the Pauli basis, from the closed form

    Independent of w0.
    """
    terms = _ef_terms(t.b, _state(f)[None, :], x.w[None, :])[0]
    return PauliElement(terms[0], 1j * terms[1:])


def dd1_expansion(t: QqoTensor, x: PauliElement) -> TensorSquareElement:
    """Delta(x*x) = (|w0|^2 + |w|^2) + sum (w0 x_ml + conj(w0 x_ml) + i <b_ml, [w, conj w]>) s_m s_l"""
    X = np.einsum("mlk,k->ml", t.b, np.conj(x.w))
    u = np.cross(x.w, np.conj(x.w))
    C = x.w0 * X + np.conj(x.w0 * X) + 1j * np.einsum("mlk,k->ml", t.b, np.conj(u))
    c00 = abs(x.w0) ** 2 + np.sum(np.abs(x.w) ** 2)
    return TensorSquareElement(c00, np.zeros(3), np.zeros(3), C)


def dd2_expansion(t: QqoTensor, x: PauliElement) -> TensorSquareElement:
    """
    Delta(x)*Delta(x) in the Pauli product basis

    The quadratic part contributes sum |x_m|^2 to the identity,
    i sum [x_m, conj x_m] to 1 (x) sigma, i alpha'_m to sigma_m (x) 1
    and -gamma'_m to the sigma_m (x) sigma row.
    """
    X = np.einsum("mlk,k->ml", t.b, np.conj(x.w))
    G = X @ np.conj(X).T
    alpha_pi = np.array([G[i, j] - G[j, i] for i, j in PI_PAIRS])
    gamma_pi = _cyclic_gamma(X[None, :, :])[0]
    c00 = abs(x.w0) ** 2 + np.real(np.trace(G))
    c01 = 1j * np.sum(np.cross(X, np.conj(X)), axis=0)
    C = np.conj(x.w0 * X) + x.w0 * X - gamma_pi
    return TensorSquareElement(c00, 1j * alpha_pi, c01, C)


def ks_difference_matrix(t: QqoTensor, x: PauliElement) -> np.ndarray:
    """Dense 4x4 Delta(x*x) - Delta(x)^H Delta(x)"""
    square = tensor_square_to_dense(apply_delta(t, pauli_mul(x.adjoint(), x)))
    image = tensor_square_to_dense(apply_delta(t, x))
    return square - image.conj().T @ image


def ks_oracle(t: QqoTensor, x: PauliElement, settings: Optional[Settings] = None) -> float:
    """Smallest eigenvalue of Delta(x*x) - Delta(x)*Delta(x) (Jacobi solver)"""
    return min_eigenvalue(ks_difference_matrix(t, x), settings=settings)


def _batch_oracle(b: np.ndarray, w0s: np.ndarray, ws: np.ndarray) -> np.ndarray:
    def dense(c00: np.ndarray, vec: np.ndarray) -> np.ndarray:
        C = np.einsum("mlk,nk->nml", b, vec)
        return c00[:, None, None] * IDENTITY_4 + np.einsum("nml,mlij->nij", C, KRON)

    sq0 = np.abs(w0s) ** 2 + np.sum(np.abs(ws) ** 2, axis=1)
    sq_vec = (
        np.conj(w0s)[:, None] * ws
        + w0s[:, None] * np.conj(ws)
        - 1j * np.cross(ws, np.conj(ws))
    )
    image = dense(w0s, ws)
    diff = dense(sq0, sq_vec) - np.conj(np.swapaxes(image, -1, -2)) @ image
    return batch_min_eigenvalues(diff)


def _refine(
    margin_fn: Callable[[np.ndarray, np.ndarray], float],
    f: np.ndarray,
    w: np.ndarray,
    settings: Settings,
) -> Tuple[float, np.ndarray, np.ndarray]:
    """
    Coordinate descent on (f, Re w, Im w), keeping |f| <= 1 and |w| = 1

    The step halves (refine_decay) after a sweep without improvement.
    """
    def project(params: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        pf = params[:3].copy()
        norm = np.linalg.norm(pf)
        if norm > 1.0:
            pf /= norm
        pw = params[3:6] + 1j * params[6:]
        return pf, pw / np.linalg.norm(pw)

    params = np.concatenate([f, w.real, w.imag])
    f, w = project(params)
    best = margin_fn(f, w)
    step = 0.1
    for _ in range(settings.refine_steps):
        improved = False
        for i in range(9):
            for sign in (1.0, -1.0):
                trial = params.copy()
                trial[i] += sign * step
                if np.linalg.norm(trial[3:]) == 0.0:
                    continue
                tf, tw = project(trial)
                value = margin_fn(tf, tw)
                if value < best:
                    best, f, w = value, tf, tw
                    params = np.concatenate([tf, tw.real, tw.imag])
                    improved = True
                    break
        if not improved:
            step *= settings.refine_decay
    return best, f, w


def ks_scan(
    t: QqoTensor,
    sample_count: Optional[int] = None,
    seed: Optional[int] = None,
    settings: Optional[Settings] = None,
) -> KsReport:
    """
    Sampled search for Kadison-Schwarz violations

    The ks11/ks2 margins are evaluated on every sphere-grid state (plus the
    origin) against the real axes w = e_k, and on sample_count pairs where f
    cycles through the grid and w is a seeded complex unit vector. The
    worst pair of each channel is refined by coordinate descent. The oracle
    channel evaluates seeded random elements x and x = w.sigma for both
    refined witnesses.

    Args:
        t: Coefficient tensor
        sample_count: Number of random (f, w) pairs (defaults to settings.ks_pairs)
        seed: Seed (defaults to settings.seed)
        settings: Optional settings

    Returns:
        KsReport; deterministic for a given seed and independent of settings.workers

    Raises:
        ValueError: If sample_count < 1
        ConventionFault: If a ks11 scalar shows an imaginary residue
    """
    settings = settings or get_settings()
    sample_count = settings.ks_pairs if sample_count is None else sample_count
    seed = settings.seed if seed is None else seed
    if sample_count < 1:
        raise ValueError(f"Sample count must be positive, got {sample_count}")

    f_pool = np.vstack([fibonacci_sphere(settings.sphere_points), np.zeros((1, 3))])
    rng = make_rng(seed)
    w_rand = random_complex_unit(rng, sample_count)
    axes = np.eye(3, dtype=complex)

    fs = np.vstack([np.repeat(f_pool, 3, axis=0), f_pool[np.arange(sample_count) % len(f_pool)]])
    ws = np.vstack([np.tile(axes, (len(f_pool), 1)), w_rand])

    terms = map_chunks(lambda fc, wc: _ef_terms(t.b, fc, wc), (fs, ws), settings.workers)
    ks11 = _checked_scalar(terms[:, 0], ws, settings)
    ks2 = ks11 - np.linalg.norm(terms[:, 1:], axis=1)

    def single(channel: str) -> Callable[[np.ndarray, np.ndarray], float]:
        fn = ks11_margin if channel == "ks11" else ks2_margin
        return lambda f, w: fn(t, f, w, settings)

    worst: Dict[str, KsWitness] = {}
    for channel, values in (("ks11", ks11), ("ks2", ks2)):
        idx = int(np.argmin(values))
        margin, f, w = _refine(single(channel), fs[idx], ws[idx], settings)
        if margin > values[idx]:
            margin, f, w = float(values[idx]), fs[idx], ws[idx]
        worst[channel] = KsWitness(channel=channel, margin=float(margin), w=w, f=f)

    w0_rand, w_oracle = random_pauli_coefficients(rng, settings.oracle_samples)
    w0s = np.concatenate([w0_rand, np.zeros(2, dtype=complex)])
    xs = np.vstack([w_oracle, worst["ks11"].w, worst["ks2"].w])
    eigs = map_chunks(lambda a, c: _batch_oracle(t.b, a, c), (w0s, xs), settings.workers)
    idx = int(np.argmin(eigs))
    worst["oracle"] = KsWitness(channel="oracle", margin=float(eigs[idx]), w=xs[idx], w0=complex(w0s[idx]))

    min_margin = min(wt.margin for wt in worst.values())
    violation = min_margin < -settings.tolerances.witness
    logger.debug(
        "ks_scan: %d pairs, %d oracle elements, worst ks11 %.3e ks2 %.3e oracle %.3e",
        len(fs), len(xs), worst["ks11"].margin, worst["ks2"].margin, worst["oracle"].margin,
    )
    return KsReport(
        violation_found=violation,
        worst=worst,
        pairs_evaluated=len(fs),
        oracle_samples=len(xs),
    )
