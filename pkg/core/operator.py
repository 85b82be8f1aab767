"""
Haar-state quadratic operators on the 2x2 matrix algebra

An operator is given by its coefficient tensor b[m][l][k]; Delta sends
w0 + w.sigma to w0 1(x)1 + sum_{m,l} C[m][l] sigma_m (x) sigma_l with
C[m][l] = sum_k b[m,l,k] w_k. The normalized trace is its Haar state.
This module applies Delta, builds the B(f) matrix and its sup-norm, and
carries the positivity certificates plus the structural checks.
"""
from __future__ import annotations
import logging
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from .config import Settings, get_settings
from .linalg import batch_min_eigenvalues, eig_hermitian, min_eigenvalue
from .models import PauliElement, QqoTensor, StateVec, TensorSquareElement
from .pauli import IDENTITY_2, SIGMA, check_roundtrip, is_positive_element
from .sampling import fibonacci_sphere, make_rng, random_ball

# Configure logging
logger = logging.getLogger(__name__)

IDENTITY_4 = np.eye(4, dtype=complex)
# KRON[m, l] = sigma_m (x) sigma_l, left factor m
KRON = np.einsum("mij,lkn->mlikjn", SIGMA, SIGMA).reshape(3, 3, 4, 4)
SIGMA_ID = np.array([np.kron(s, IDENTITY_2) for s in SIGMA])
ID_SIGMA = np.array([np.kron(IDENTITY_2, s) for s in SIGMA])
# KRON3[a, b, c] = sigma_a (x) sigma_b (x) sigma_c
KRON3 = np.einsum("aij,bkl,cmn->abcikmjln", SIGMA, SIGMA, SIGMA).reshape(3, 3, 3, 8, 8)


class OperatorError(Exception):
    """Base exception for operator computations"""
    pass


class NotPositiveElementError(OperatorError):
    """Positivity oracle called with an element that is not positive"""
    pass


@dataclass
class Certificate:
    """Boolean verdict together with the quantity it was decided on"""
    verdict: bool
    value: float
    margin: float


@dataclass
class BMatrix:
    """The 3x3 real matrix beta(f)_ij = sum_k b[k,i,j] f_k"""
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (3, 3):
            raise ValueError(f"B(f) must be 3x3, got shape {m.shape}")
        self.matrix = m


@dataclass
class TripleNormEstimate:
    """Lower-bound estimate of sup_f ||B(f)|| with its maximizer"""
    value: float
    argmax: np.ndarray
    grid_value: float
    gap_estimate: float


@dataclass
class DStar1Result:
    """Worst sampled value of the product-state bilinear form"""
    verdict: bool
    worst: float
    f: np.ndarray
    p: np.ndarray
    margin: float
    pairs_evaluated: int


@dataclass
class PositivitySearch:
    """Worst min eigenvalue of Delta(1 + w.sigma) over sampled unit w"""
    min_eigenvalue: float
    w: np.ndarray
    points: int


def _state_array(f: Union[StateVec, np.ndarray]) -> np.ndarray:
    if isinstance(f, StateVec):
        return f.f
    return np.asarray(f, dtype=float).reshape(3)


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    """Flip v so that its largest-magnitude component is positive"""
    idx = int(np.argmax(np.abs(v)))
    return -v if v[idx] < 0 else v


def apply_delta(t: QqoTensor, x: PauliElement) -> TensorSquareElement:
    """
    Apply Delta in the Pauli product basis

    Args:
        t: Coefficient tensor
        x: Element w0 + w.sigma

    Returns:
        TensorSquareElement with c00 = w0, C[m][l] = sum_k b[m,l,k] w_k
        and vanishing sigma (x) 1 and 1 (x) sigma parts

    Example:
        >>> apply_delta(QqoTensor.zeros(), PauliElement.identity()).c00
        (1+0j)
    """
    C = np.einsum("mlk,k->ml", t.b, x.w)
    return TensorSquareElement(x.w0, np.zeros(3), np.zeros(3), C)


def tensor_square_to_dense(e: TensorSquareElement) -> np.ndarray:
    """Dense 4x4 matrix of a tensor-square element (Kronecker embedding)"""
    return (
        e.c00 * IDENTITY_4
        + np.einsum("m,mij->ij", e.c10, SIGMA_ID)
        + np.einsum("l,lij->ij", e.c01, ID_SIGMA)
        + np.einsum("ml,mlij->ij", e.C, KRON)
    )


def dense_to_tensor_square(m: np.ndarray, settings: Optional[Settings] = None) -> TensorSquareElement:
    """Inverse of tensor_square_to_dense using Tr(P Q) = 4 delta_PQ, checked by rebuilding m"""
    m = np.asarray(m, dtype=complex)
    if m.shape != (4, 4):
        raise ValueError(f"Expected a 4x4 matrix, got shape {m.shape}")
    c00 = np.trace(m) / 4.0
    c10 = np.einsum("ij,mji->m", m, SIGMA_ID) / 4.0
    c01 = np.einsum("ij,lji->l", m, ID_SIGMA) / 4.0
    C = np.einsum("ij,mlji->ml", m, KRON) / 4.0
    e = TensorSquareElement(c00, c10, c01, C)
    check_roundtrip(tensor_square_to_dense(e), m, settings)
    return e


def conditional_expectation(m: np.ndarray, f: Union[StateVec, np.ndarray]) -> np.ndarray:
    """
    Dense E_phi = (phi (x) id) on a 4x4 matrix

    The state phi has density (1 + f.sigma)/2; f = 0 gives the partial
    normalized trace over the left factor.

    Returns:
        2x2 complex matrix
    """
    f = _state_array(f)
    rho = 0.5 * (IDENTITY_2 + np.einsum("k,kij->ij", f, SIGMA))
    m4 = np.asarray(m, dtype=complex).reshape(2, 2, 2, 2)
    return np.einsum("ba,acbd->cd", rho, m4)


def conditional_expectation_element(
    e: TensorSquareElement,
    f: Union[StateVec, np.ndarray],
) -> PauliElement:
    """E_phi in the Pauli basis: (c00 + c10.f) 1 + (c01 + f^T C).sigma"""
    f = _state_array(f)
    return PauliElement(e.c00 + np.dot(e.c10, f), e.c01 + f @ e.C)


def b_matrix(t: QqoTensor, f: Union[StateVec, np.ndarray]) -> BMatrix:
    """
    B(f) with beta(f)_ij = sum_k b[k,i,j] f_k

    E_phi(Delta x) = w0 1 + (B(f) w).sigma for phi given by f.
    """
    return BMatrix(np.einsum("kij,k->ij", t.b, _state_array(f)))


def spectral_norm3(B: Union[BMatrix, np.ndarray], settings: Optional[Settings] = None) -> float:
    """Largest singular value of a 3x3 real matrix, from the eigenvalues of B^T B"""
    mat = B.matrix if isinstance(B, BMatrix) else np.asarray(B, dtype=float)
    eigenvalues = eig_hermitian(mat.T @ mat, settings=settings)
    return float(np.sqrt(max(eigenvalues[-1], 0.0)))


def _batch_b_matrices(t: QqoTensor, fs: np.ndarray) -> np.ndarray:
    return np.einsum("kij,nk->nij", t.b, fs)


def _top_singular(t: QqoTensor, f: np.ndarray) -> Tuple[float, np.ndarray, np.ndarray]:
    u, s, vh = np.linalg.svd(np.einsum("kij,k->ij", t.b, f))
    return float(s[0]), u[:, 0], vh[0]


def triple_norm(
    t: QqoTensor,
    grid_n: Optional[int] = None,
    refine_steps: Optional[int] = None,
    settings: Optional[Settings] = None,
) -> TripleNormEstimate:
    """
    Estimate |||B||| = sup_{f in S} ||B(f)|| from below

    B(f) is linear in f, so the sup sits on the unit sphere. The sphere
    grid is scanned first; the best seeds are then refined by projected
    gradient ascent, using d sigma_max / d f_k = u^T b[k] v.

    Args:
        t: Coefficient tensor
        grid_n: Fibonacci lattice size (defaults to settings.sphere_points)
        refine_steps: Ascent steps per seed (defaults to settings.triple_norm_refine)
        settings: Optional settings

    Returns:
        TripleNormEstimate; gap_estimate is the gain of refinement over the grid
    """
    settings = settings or get_settings()
    grid_n = settings.sphere_points if grid_n is None else grid_n
    refine_steps = settings.triple_norm_refine if refine_steps is None else refine_steps
    if grid_n < 1:
        raise ValueError(f"Grid size must be positive, got {grid_n}")

    grid = fibonacci_sphere(grid_n)
    norms = np.linalg.svd(_batch_b_matrices(t, grid), compute_uv=False)[:, 0]
    best_idx = int(np.argmax(norms))
    grid_value = float(norms[best_idx])
    best_value, best_f = grid_value, grid[best_idx].copy()

    seeds = np.argsort(-norms, kind="stable")[:settings.triple_norm_seeds]
    for idx in seeds:
        f = grid[idx].copy()
        value, u, v = _top_singular(t, f)
        step = 0.5
        for _ in range(refine_steps):
            grad = np.einsum("i,kij,j->k", u, t.b, v)
            if np.linalg.norm(grad) == 0.0:
                break
            candidate = f + step * grad
            candidate /= np.linalg.norm(candidate)
            cand_value, cand_u, cand_v = _top_singular(t, candidate)
            if cand_value > value:
                f, value, u, v = candidate, cand_value, cand_u, cand_v
            else:
                step *= 0.5
        if value > best_value:
            best_value, best_f = value, f

    logger.debug("triple_norm: grid %.17g refined %.17g", grid_value, best_value)
    return TripleNormEstimate(
        value=best_value,
        argmax=best_f,
        grid_value=grid_value,
        gap_estimate=best_value - grid_value,
    )


def dual_product_state(
    t: QqoTensor,
    f: Union[StateVec, np.ndarray],
    p: Union[StateVec, np.ndarray],
) -> np.ndarray:
    """Vector of Delta^*(phi_f (x) phi_p)(sigma_k) = sum_ij b[i,j,k] f_i p_j"""
    return np.einsum("ijk,i,j->k", t.b, _state_array(f), _state_array(p))


def check_dstar1(
    t: QqoTensor,
    sample_count: Optional[int] = None,
    seed: Optional[int] = None,
    settings: Optional[Settings] = None,
) -> DStar1Result:
    """
    Sampled positivity of the bilinear form on product states

    Evaluates ||Delta^*(phi_f (x) phi_p)||^2 on three pair sets, in order:
    every sphere-grid f with its maximizing p (top left singular vector
    of B(f)), all pairs of a coarse sphere grid, and seeded random pairs
    from the unit ball. The first pair attaining the worst value is the witness.

    Args:
        t: Coefficient tensor
        sample_count: Number of random pairs (defaults to settings.dstar1_random_pairs)
        seed: Seed of the random pairs (defaults to settings.seed)
        settings: Optional settings

    Returns:
        DStar1Result with verdict worst <= 1 + tol and margin 1 - worst

    Raises:
        ValueError: If sample_count < 1
    """
    settings = settings or get_settings()
    sample_count = settings.dstar1_random_pairs if sample_count is None else sample_count
    seed = settings.seed if seed is None else seed
    if sample_count < 1:
        raise ValueError(f"Sample count must be positive, got {sample_count}")

    grid = fibonacci_sphere(settings.sphere_points)
    u, _, _ = np.linalg.svd(_batch_b_matrices(t, grid))
    p_star = u[:, :, 0]

    coarse = fibonacci_sphere(settings.dstar1_pair_grid)
    f_coarse = np.repeat(coarse, len(coarse), axis=0)
    p_coarse = np.tile(coarse, (len(coarse), 1))

    rng = make_rng(seed)
    f_rand = random_ball(rng, sample_count)
    p_rand = random_ball(rng, sample_count)

    fs = np.vstack([grid, f_coarse, f_rand])
    ps = np.vstack([p_star, p_coarse, p_rand])
    values = np.sum(np.einsum("ijk,ni,nj->nk", t.b, fs, ps) ** 2, axis=1)

    worst_idx = int(np.argmax(values))
    worst = float(values[worst_idx])
    verdict = worst <= 1.0 + settings.tolerances.dstar1
    logger.debug("check_dstar1: %d pairs, worst %.17g", len(values), worst)
    return DStar1Result(
        verdict=verdict,
        worst=worst,
        f=fs[worst_idx].copy(),
        p=_canonical_sign(ps[worst_idx].copy()),
        margin=1.0 - worst,
        pairs_evaluated=len(values),
    )


def check_dstar3(t: QqoTensor, settings: Optional[Settings] = None) -> Certificate:
    """Sufficient condition sum b_ijk^2 <= 1 for the product-state bound"""
    settings = settings or get_settings()
    value = float(np.sum(t.b ** 2))
    return Certificate(value <= 1.0 + settings.tolerances.dstar3, value, 1.0 - value)


def haar_check(t: QqoTensor, x: PauliElement) -> float:
    """
    Max deviation of both partial-trace marginals of Delta(x) from tau(x) 1

    (tau (x) id) keeps the 1 (x) sigma part and (id (x) tau) keeps the
    sigma (x) 1 part; both vanish for the Haar form.
    """
    e = apply_delta(t, x)
    target = np.array([x.w0, 0.0, 0.0, 0.0], dtype=complex)
    left = np.concatenate([[e.c00], e.c01])
    right = np.concatenate([[e.c00], e.c10])
    return float(max(np.max(np.abs(left - target)), np.max(np.abs(right - target))))


def positivity_oracle(
    t: QqoTensor,
    x: PauliElement,
    settings: Optional[Settings] = None,
) -> float:
    """
    Minimum eigenvalue of the dense 4x4 matrix Delta(x)

    Raises:
        NotPositiveElementError: If x is not a positive element
    """
    positive, margin = is_positive_element(x, settings=settings)
    if not positive:
        raise NotPositiveElementError(f"Element is not positive (w0 - |w| = {margin:.3e})")
    return min_eigenvalue(tensor_square_to_dense(apply_delta(t, x)), settings=settings)


def search_positivity_violation(
    t: QqoTensor,
    grid: Optional[np.ndarray] = None,
    settings: Optional[Settings] = None,
) -> PositivitySearch:
    """
    Scan the boundary positive elements x = 1 + w.sigma, |w| = 1

    Every positive element is a nonnegative multiple of a convex combination
    of 1 and such an x, so the worst boundary value decides positivity of
    Delta up to the grid resolution.
    """
    settings = settings or get_settings()
    ws = fibonacci_sphere(settings.sphere_points) if grid is None else np.asarray(grid, dtype=float)
    C = np.einsum("mlk,nk->nml", t.b, ws)
    dense = IDENTITY_4[None, :, :] + np.einsum("nml,mlij->nij", C, KRON)
    values = batch_min_eigenvalues(dense)
    idx = int(np.argmin(values))
    return PositivitySearch(min_eigenvalue=float(values[idx]), w=ws[idx].copy(), points=len(ws))


def check_flip_symmetry(t: QqoTensor, settings: Optional[Settings] = None) -> bool:
    """True iff b[m,l,k] = b[l,m,k], i.e. U Delta = Delta for the flip U"""
    settings = settings or get_settings()
    return bool(np.allclose(t.b, t.b.transpose(1, 0, 2), rtol=0.0, atol=settings.tolerances.equality))


def check_coassociativity(t: QqoTensor) -> float:
    """
    Max elementwise deviation between (Delta (x) id) Delta and (id (x) Delta) Delta

    Both sides are built on sigma_1, sigma_2, sigma_3 as dense 8x8 matrices;
    on the identity they agree trivially.
    """
    deviation = 0.0
    for i in range(3):
        # (Delta (x) id): sum b[m,l,i] b[p,q,m] sigma_p (x) sigma_q (x) sigma_l
        lhs = np.einsum("ml,pqm->pql", t.b[:, :, i], t.b)
        # (id (x) Delta): sum b[m,l,i] b[p,q,l] sigma_m (x) sigma_p (x) sigma_q
        rhs = np.einsum("ml,pql->mpq", t.b[:, :, i], t.b)
        diff = np.einsum("abc,abcij->ij", lhs - rhs, KRON3)
        deviation = max(deviation, float(np.max(np.abs(diff))))
    return deviation
