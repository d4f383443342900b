"""Dense complex-matrix kernels.

Everything here is a pure function of its arguments. Matrices are 2-D
``complex128`` numpy arrays; results that carry more than a matrix are frozen
pydantic models whose arrays are marked read-only.

Public contracts are stated through residuals and projectors only, never
through particular SVD factors, so the LAPACK driver's sign and ordering
conventions do not leak.
"""

import logging
import math
from collections.abc import Sequence
from typing import NamedTuple

import numpy as np
import numpy.typing as npt
import scipy.linalg
from pydantic import BaseModel, ConfigDict, model_validator

from .errors import InvalidInputError, ShapeError
from .schemas import ToleranceConfig

logger = logging.getLogger(__name__)

ComplexMatrix = npt.NDArray[np.complex128]

DEFAULT_TOLERANCE = ToleranceConfig()
EPS = float(np.finfo(np.float64).eps)


class Check(NamedTuple):
    holds: bool
    residual: float


class PsdCheck(NamedTuple):
    holds: bool
    min_eigenvalue: float
    hermitian_residual: float


class PseudoInverseResult(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    pinv: np.ndarray
    singular_values: np.ndarray
    numerical_rank: int

    @model_validator(mode="after")
    def _freeze(self):
        self.pinv.setflags(write=False)
        self.singular_values.setflags(write=False)
        return self


class SubspaceProjector(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    matrix: np.ndarray
    subspace_dim: int

    @model_validator(mode="after")
    def _freeze(self):
        self.matrix.setflags(write=False)
        return self

    def residuals(self) -> dict[str, float]:
        """Hermitian, idempotent and trace defects, each already relative."""
        p = self.matrix
        scale = max(1.0, fro(p))
        return {
            "hermitian": fro(p - adjoint(p)) / scale,
            "idempotent": fro(p @ p - p) / scale,
            "trace": abs(np.trace(p).real - self.subspace_dim) / max(1, p.shape[0]),
        }


# Input handling

def as_matrix(t) -> ComplexMatrix:
    """Coerce to a finite 2-D complex matrix or raise InvalidInputError."""
    try:
        a = np.asarray(t, dtype=np.complex128)
    except (TypeError, ValueError) as e:
        raise InvalidInputError(f"Not a numeric matrix: {e}") from e
    if a.ndim != 2 or a.size == 0:
        raise ShapeError(f"Expected a non-empty 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("Matrix has non-finite entries")
    return a


def require_square(t) -> ComplexMatrix:
    a = as_matrix(t)
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"Square matrix required, got {a.shape[0]}x{a.shape[1]}")
    return a


def adjoint(a: ComplexMatrix) -> ComplexMatrix:
    return a.conj().T


def fro(a: ComplexMatrix) -> float:
    return float(np.linalg.norm(a))


def spectral_norm(a: ComplexMatrix) -> float:
    if a.size == 0:
        return 0.0
    return float(scipy.linalg.norm(a, 2))


def power_scale(t: ComplexMatrix, k: int) -> float:
    """Zero floor magnitude for T^k: the bound ||T||_2^k.

    T^0 = I and T^1 = T are not derived products and get no floor.
    """
    if k < 2:
        return 0.0
    return spectral_norm(t) ** k


def product_scale(*factors: ComplexMatrix) -> float:
    """Zero floor magnitude for a product: the product of the factors' spectral norms."""
    return math.prod(spectral_norm(f) for f in factors)


def operator_equal(a, b, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> Check:
    """A = B iff ||A-B||_F <= residual_tol * max(1, ||A||_F, ||B||_F)."""
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise ShapeError(f"Cannot compare {a.shape} with {b.shape}")
    residual = fro(a - b) / max(1.0, fro(a), fro(b))
    return Check(residual <= tol.residual_tol, residual)


# SVD and the rank rule

def _svd(a: ComplexMatrix) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    try:
        return scipy.linalg.svd(a, full_matrices=False, lapack_driver="gesdd")
    except np.linalg.LinAlgError:
        logger.debug("gesdd did not converge on %sx%s input, retrying with gesvd", *a.shape)
        return scipy.linalg.svd(a, full_matrices=False, lapack_driver="gesvd")


def rank_cutoff(singular_values: np.ndarray, shape: tuple[int, int], tol: ToleranceConfig, scale: float = 0.0) -> float:
    """σ counts iff σ > rank_tol_factor·max(m,n)·σ_max·eps.

    A derived product passes `scale`, the norm bound of its factors, so that
    rounding noise in a product that is exactly zero stays below zero_tol·scale.
    """
    sigma_max = float(singular_values[0]) if singular_values.size else 0.0
    relative = tol.rank_tol_factor * max(shape) * sigma_max * EPS
    return max(relative, tol.zero_tol * scale)


def _rank(singular_values: np.ndarray, shape: tuple[int, int], tol: ToleranceConfig, scale: float) -> int:
    return int(np.count_nonzero(singular_values > rank_cutoff(singular_values, shape, tol, scale)))


def numerical_rank(t, tol: ToleranceConfig = DEFAULT_TOLERANCE, *, scale: float = 0.0) -> int:
    a = as_matrix(t)
    s = scipy.linalg.svdvals(a)
    return _rank(s, a.shape, tol, scale)


def _pinv_from_svd(u: np.ndarray, s: np.ndarray, vh: np.ndarray, rank: int) -> ComplexMatrix:
    return (adjoint(vh[:rank]) / s[:rank]) @ adjoint(u[:, :rank])


def pinv(t, tol: ToleranceConfig = DEFAULT_TOLERANCE, *, scale: float = 0.0) -> PseudoInverseResult:
    """Moore-Penrose inverse by rank-truncated SVD."""
    a = as_matrix(t)
    u, s, vh = _svd(a)
    rank = _rank(s, a.shape, tol, scale)
    if rank == 0:
        p = np.zeros((a.shape[1], a.shape[0]), dtype=np.complex128)
    else:
        p = _pinv_from_svd(u, s, vh, rank)
    return PseudoInverseResult(pinv=np.array(p, dtype=np.complex128), singular_values=np.array(s), numerical_rank=rank)


def mp_residuals(t, p, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> dict[str, float]:
    """Relative residuals of the four Moore-Penrose equations for candidate p."""
    a, p = as_matrix(t), as_matrix(p)
    ap, pa = a @ p, p @ a
    return {
        "TXT=T": operator_equal(ap @ a, a, tol).residual,
        "XTX=X": operator_equal(pa @ p, p, tol).residual,
        "(TX)*=TX": operator_equal(adjoint(ap), ap, tol).residual,
        "(XT)*=XT": operator_equal(adjoint(pa), pa, tol).residual,
    }


def limit_pinv_oracle(t, s_values: Sequence[float]) -> ComplexMatrix:
    """(T*T + s I)^-1 T* at the smallest s of a strictly decreasing sweep."""
    a = as_matrix(t)
    s_values = [float(s) for s in s_values]
    if not s_values:
        raise InvalidInputError("s_values must be nonempty")
    if any(not math.isfinite(s) or s <= 0.0 for s in s_values):
        raise InvalidInputError("s_values must be strictly positive")
    if any(later >= earlier for earlier, later in zip(s_values, s_values[1:])):
        raise InvalidInputError("s_values must be strictly decreasing")
    s = s_values[-1]
    gram = adjoint(a) @ a + s * np.eye(a.shape[1])
    return scipy.linalg.solve(gram, adjoint(a), assume_a="pos")


def limit_pinv_errors(t, s_values: Sequence[float], tol: ToleranceConfig = DEFAULT_TOLERANCE) -> list[float]:
    """Frobenius distance of the regularized inverse to pinv(T) along the sweep."""
    target = pinv(t, tol).pinv
    return [fro(limit_pinv_oracle(t, s_values[: i + 1]) - target) for i in range(len(s_values))]


# Projectors and subspace tests

def range_projector(t, tol: ToleranceConfig = DEFAULT_TOLERANCE, *, scale: float = 0.0) -> SubspaceProjector:
    """P_R(T) from the left singular vectors above the rank cutoff."""
    a = as_matrix(t)
    u, s, _ = _svd(a)
    rank = _rank(s, a.shape, tol, scale)
    basis = u[:, :rank]
    return SubspaceProjector(matrix=np.array(basis @ adjoint(basis)), subspace_dim=rank)


def kernel_projector(t, tol: ToleranceConfig = DEFAULT_TOLERANCE, *, scale: float = 0.0) -> SubspaceProjector:
    """P_N(T) = I - P_R(T*)."""
    a = as_matrix(t)
    _, s, vh = _svd(a)
    rank = _rank(s, a.shape, tol, scale)
    row_basis = adjoint(vh[:rank])
    n = a.shape[1]
    return SubspaceProjector(matrix=np.eye(n, dtype=np.complex128) - row_basis @ adjoint(row_basis), subspace_dim=n - rank)


def range_included(a, b, tol: ToleranceConfig = DEFAULT_TOLERANCE, *, scale: float = 0.0) -> Check:
    """R(A) ⊆ R(B) iff ||(I - P_R(B)) A||_F <= residual_tol * max(1, ||A||_F)."""
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[0] != b.shape[0]:
        raise ShapeError(f"Row counts differ: {a.shape[0]} vs {b.shape[0]}")
    p = range_projector(b, tol, scale=scale).matrix
    residual = fro(a - p @ a) / max(1.0, fro(a))
    return Check(residual <= tol.residual_tol, residual)


def douglas_constant(a, b, tol: ToleranceConfig = DEFAULT_TOLERANCE, *, scale: float = 0.0) -> float:
    """Minimal c with ||A* x|| <= c ||B* x|| for all x, or inf when R(A) ⊄ R(B)."""
    a, b = as_matrix(a), as_matrix(b)
    if not range_included(a, b, tol, scale=scale).holds:
        return math.inf
    return spectral_norm(pinv(b, tol, scale=scale).pinv @ a)


def subspace_invariant(b, kernel_of, tol: ToleranceConfig = DEFAULT_TOLERANCE, *, scale: float = 0.0) -> Check:
    """Whether B maps N(kernel_of) into itself."""
    b, k = require_square(b), as_matrix(kernel_of)
    if k.shape[1] != b.shape[0]:
        raise ShapeError(f"kernel_of acts on C^{k.shape[1]}, B on C^{b.shape[0]}")
    p = kernel_projector(k, tol, scale=scale).matrix
    leak = (np.eye(b.shape[0]) - p) @ b @ p
    residual = fro(leak) / max(1.0, fro(b))
    return Check(residual <= tol.residual_tol, residual)


def commutator(a, b) -> ComplexMatrix:
    """[A, B] = AB - BA."""
    a, b = require_square(a), require_square(b)
    if a.shape != b.shape:
        raise ShapeError(f"Commutator of {a.shape} and {b.shape}")
    return a @ b - b @ a


def commutes(a, b, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> Check:
    a, b = require_square(a), require_square(b)
    if a.shape != b.shape:
        raise ShapeError(f"Commutator of {a.shape} and {b.shape}")
    return operator_equal(a @ b, b @ a, tol)


def is_psd(h, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> PsdCheck:
    h = require_square(h)
    scale = max(1.0, fro(h))
    hermitian_residual = fro(h - adjoint(h)) / scale
    lam_min = float(scipy.linalg.eigvalsh((h + adjoint(h)) / 2)[0])
    holds = hermitian_residual <= tol.residual_tol and lam_min >= -tol.psd_tol * scale
    return PsdCheck(holds, lam_min, hermitian_residual)


# Cauchy dual

def cauchy_dual(t, tol: ToleranceConfig = DEFAULT_TOLERANCE, *, scale: float = 0.0) -> ComplexMatrix:
    """ω(T) = T (T*T)^† = (T^†)*."""
    return adjoint(pinv(t, tol, scale=scale).pinv)


def cauchy_dual_forms(t, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> dict[str, ComplexMatrix]:
    """The closed forms of ω(T) that must all coincide."""
    a = as_matrix(t)
    gram, cogram = adjoint(a) @ a, a @ adjoint(a)
    gram_scale = power_scale(a, 2)
    shifted = gram + kernel_projector(a, tol).matrix
    coshifted = cogram + kernel_projector(adjoint(a), tol).matrix
    return {
        "(T^†)*": cauchy_dual(a, tol),
        "T(T*T)^†": a @ pinv(gram, tol, scale=gram_scale).pinv,
        "T(T*T+P_N(T))^-1": adjoint(scipy.linalg.solve(shifted, adjoint(a), assume_a="pos")),
        "(TT*+P_N(T*))^-1 T": scipy.linalg.solve(coshifted, a, assume_a="pos"),
    }


def mat_power(t, k: int) -> ComplexMatrix:
    """T^k by repeated squaring, T^0 = I."""
    a = require_square(t)
    if k < 0:
        raise InvalidInputError(f"Power must be nonnegative, got {k}")
    return np.linalg.matrix_power(a, k)
