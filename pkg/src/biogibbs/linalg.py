"""Dense complex matrix substrate.

Operators are plain ``numpy.ndarray`` objects of dtype ``complex128``.  No
function here mutates its arguments.  Exponentials are only ever taken of
operators whose eigen-decomposition is known up front (a diagonal matrix
conjugated by an invertible transform), so :func:`exp_similar` uses the
closed form instead of a general matrix-exponential algorithm.
"""

from __future__ import annotations

import sys
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, ExponentialOverflow, SingularMatrix

# largest x with exp(x) finite in double precision
_LOG_MAX = float(np.log(sys.float_info.max))


def as_matrix(m) -> np.ndarray:
    """Validate ``m`` as a finite square complex matrix and return it."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionMismatch(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def _same_shape(*ms):
    shapes = {np.shape(m) for m in ms}
    if len(shapes) != 1:
        raise DimensionMismatch(f"incompatible shapes {sorted(shapes)}")


def adjoint(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.conj(np.transpose(m))


def trace(m: np.ndarray) -> complex:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"trace of non-square shape {m.shape}")
    return complex(np.trace(m))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``a @ b - b @ a``."""
    _same_shape(a, b)
    return a @ b - b @ a


def operator_norm(m: np.ndarray) -> float:
    """Largest singular value, from a Hermitian eigensolve of ``m* m``."""
    m = np.asarray(m, dtype=complex)
    if m.size == 0:
        return 0.0
    gram = adjoint(m) @ m
    gram = 0.5 * (gram + adjoint(gram))
    top = np.linalg.eigvalsh(gram)[-1]
    return float(np.sqrt(max(top, 0.0)))


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex)


def inverse(m: np.ndarray, tol: float | None = None,
            pivot_tol: float = 1e-13) -> tuple[np.ndarray, float]:
    """Invert ``m`` by partially pivoted LU and certify the result.

    Parameters
    ----------
    m : ndarray
        Square complex matrix.
    tol : float, optional
        Bound on ``||m @ inv - 1||_op``.  Defaults to ``1e-10 * dim``.
    pivot_tol : float
        A pivot smaller than ``pivot_tol * max|m_ij|`` is treated as zero.

    Returns
    -------
    inv : ndarray
    residual : float
        The achieved ``||m @ inv - 1||_op``.

    Raises
    ------
    SingularMatrix
        On a vanishing pivot or a residual above ``tol``.
    """
    m = as_matrix(m)
    dim = m.shape[0]
    if tol is None:
        tol = 1e-10 * dim
    scale = float(np.max(np.abs(m)))
    if scale == 0.0:
        raise SingularMatrix("zero matrix")
    with warnings.catch_warnings():
        # singularity is reported below through the pivot test
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(m, check_finite=False)
    smallest = float(np.min(np.abs(np.diag(lu))))
    if smallest < pivot_tol * scale:
        raise SingularMatrix(f"pivot {smallest:.3e} below {pivot_tol:.1e} * {scale:.3e}")
    inv = scipy.linalg.lu_solve((lu, piv), identity(dim), check_finite=False)
    residual = operator_norm(m @ inv - identity(dim))
    if not residual <= tol:
        raise SingularMatrix(f"inverse residual {residual:.3e} exceeds {tol:.3e}")
    return inv, residual


@dataclass(frozen=True)
class EigenSimilarity:
    """An operator given as ``transform @ diag(lambdas) @ transform_inverse``."""

    lambdas: np.ndarray
    transform: np.ndarray
    transform_inverse: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.lambdas)

    def matrix(self) -> np.ndarray:
        return (self.transform * self.lambdas) @ self.transform_inverse

    def apply(self, values) -> np.ndarray:
        """``transform @ diag(values) @ transform_inverse``."""
        return (self.transform * np.asarray(values)) @ self.transform_inverse


def exp_weights(lambdas, z: complex) -> np.ndarray:
    """``exp(z * lambdas)`` with an explicit range check."""
    lambdas = np.asarray(lambdas, dtype=float)
    expo = z * lambdas
    if np.max(np.real(expo), initial=-np.inf) > _LOG_MAX:
        raise ExponentialOverflow(
            f"exp({np.max(np.real(expo)):.1f}) overflows double precision")
    return np.exp(expo)


def exp_similar(es: EigenSimilarity, z: complex) -> np.ndarray:
    """Exact ``exp(z M)`` for ``M = T diag(lambdas) T^-1``."""
    return es.apply(exp_weights(es.lambdas, z))


def conjugation_phases(lambdas, z: complex) -> np.ndarray:
    """Matrix of ``exp(z (lambda_i - lambda_j))``.

    Scaling an operator entrywise by this matrix is the same as conjugating it
    by ``exp(z diag(lambdas))``, without ever forming the two large factors.
    """
    lambdas = np.asarray(lambdas, dtype=float)
    gaps = lambdas[:, None] - lambdas[None, :]
    expo = z * gaps
    if np.max(np.real(expo), initial=-np.inf) > _LOG_MAX:
        raise ExponentialOverflow("imaginary-time conjugation overflows double precision")
    return np.exp(expo)
