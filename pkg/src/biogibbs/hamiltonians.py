"""The operator triple ``H0``, ``H = T H0 T^-1`` and ``H* = (T*)^-1 H0 T*``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import linalg
from .biorthogonal import BiorthogonalSystem
from .errors import ExponentialOverflow, SingularMatrix
from .linalg import EigenSimilarity, operator_norm
from .sampling import make_rng, random_unit_vector


@dataclass(frozen=True)
class HamiltonianTriple:
    H0: np.ndarray
    H: np.ndarray
    Hstar: np.ndarray
    es_H0: EigenSimilarity
    es_H: EigenSimilarity
    es_Hstar: EigenSimilarity

    @property
    def lambdas(self) -> np.ndarray:
        return self.es_H0.lambdas


def build_triple(sys: BiorthogonalSystem) -> HamiltonianTriple:
    lam = sys.lambdas
    eye = linalg.identity(sys.dim)
    es_h0 = EigenSimilarity(lam, eye, eye)
    es_h = EigenSimilarity(lam, sys.T, sys.T_inv)
    # eigenvectors of H* are the psi_n = (T*)^-1 e_n
    es_hs = EigenSimilarity(lam, sys.psi, linalg.adjoint(sys.T))
    return HamiltonianTriple(
        H0=np.diag(lam).astype(complex),
        H=es_h.matrix(),
        Hstar=es_hs.matrix(),
        es_H0=es_h0,
        es_H=es_h,
        es_Hstar=es_hs,
    )


@dataclass(frozen=True)
class EigenResiduals:
    max_e: float
    max_phi: float
    max_psi: float

    @property
    def worst(self) -> float:
        return max(self.max_e, self.max_phi, self.max_psi)


def _column_residual(op, vecs, lam) -> float:
    return float(np.max(np.linalg.norm(op @ vecs - vecs * lam, axis=0), initial=0.0))


def eigen_residuals(triple: HamiltonianTriple, sys: BiorthogonalSystem) -> EigenResiduals:
    """Eigenvalue equations for ``e_n``, ``phi_n``, ``psi_n``, scaled by ``1 + max|lambda|``."""
    lam = sys.lambdas
    scale = 1.0 + float(np.max(np.abs(lam)))
    eye = linalg.identity(sys.dim)
    return EigenResiduals(
        max_e=_column_residual(triple.H0, eye, lam) / scale,
        max_phi=_column_residual(triple.H, sys.phi, lam) / scale,
        max_psi=_column_residual(triple.Hstar, sys.psi, lam) / scale,
    )


@dataclass(frozen=True)
class IntertwiningResiduals:
    r1: float  # ||T H0 - H T|| / ||H0||
    r2: float  # ||H* (T*)^-1 - (T*)^-1 H0|| / ||H0||


def intertwining_residuals(triple: HamiltonianTriple,
                           sys: BiorthogonalSystem) -> IntertwiningResiduals:
    scale = operator_norm(triple.H0) or 1.0
    t_star_inv = sys.psi
    return IntertwiningResiduals(
        r1=operator_norm(sys.T @ triple.H0 - triple.H @ sys.T) / scale,
        r2=operator_norm(triple.Hstar @ t_star_inv - t_star_inv @ triple.H0) / scale,
    )


@dataclass(frozen=True)
class ResolutionFamily:
    """Skew projections ``R_k = T P_k T^-1``."""

    members: list[np.ndarray]
    idempotency: float  # max_k ||R_k R_k - R_k||
    annihilation: float  # max_{k != j} ||R_k R_j||
    completeness: float  # ||sum_k R_k - 1||

    @property
    def product_residual(self) -> float:
        return max(self.idempotency, self.annihilation)


def resolution_family(sys: BiorthogonalSystem) -> ResolutionFamily:
    n = sys.dim
    members = []
    for k in range(n):
        p_k = np.zeros((n, n), dtype=complex)
        p_k[k, k] = 1.0
        members.append(sys.T @ p_k @ sys.T_inv)
    idem = 0.0
    annih = 0.0
    for k, r_k in enumerate(members):
        for j, r_j in enumerate(members):
            prod = r_k @ r_j
            if k == j:
                idem = max(idem, operator_norm(prod - r_j))
            else:
                annih = max(annih, operator_norm(prod))
    total = np.sum(members, axis=0)
    return ResolutionFamily(members, idem, annih, operator_norm(total - linalg.identity(n)))


def _sample(u, lambdas) -> np.ndarray:
    values = np.asarray(u(lambdas) if callable(u) else u, dtype=complex)
    if values.shape != np.shape(lambdas):
        values = np.broadcast_to(values, np.shape(lambdas)).astype(complex)
    if not np.all(np.isfinite(values)):
        raise ExponentialOverflow("function values not finite on the spectrum")
    return values


def functional_calculus(triple: HamiltonianTriple,
                        u: Callable[[np.ndarray], np.ndarray] | np.ndarray) -> np.ndarray:
    """``u(H) = T u(H0) T^-1`` for ``u`` given as a callable or its values at the eigenvalues."""
    return triple.es_H.apply(_sample(u, triple.lambdas))


def functional_calculus_consistency(triple: HamiltonianTriple, sys: BiorthogonalSystem,
                                    u, trials: int = 8, seed: int = 0) -> float:
    """Compare ``<g, u(H) f>`` with ``sum_k u(lambda_k) <g, R_k f>`` on random vectors."""
    values = _sample(u, sys.lambdas)
    uh = functional_calculus(triple, values)
    rng = make_rng(seed, "functional_calculus")
    worst = 0.0
    for _ in range(trials):
        f = random_unit_vector(rng, sys.dim)
        g = random_unit_vector(rng, sys.dim)
        # <g, R_k f> = <g, phi_k> <psi_k, f>
        spectral = np.sum(values * (g.conj() @ sys.phi) * (sys.psi.conj().T @ f))
        worst = max(worst, abs(np.vdot(g, uh @ f) - spectral))
    return float(worst)


@dataclass(frozen=True)
class SpectrumCertificate:
    certified: bool
    max_residual: float
    note: str = "continuous and residual spectrum empty by construction"


def spectrum_check(triple: HamiltonianTriple, sys: BiorthogonalSystem,
                   tol: float = 1e-10) -> SpectrumCertificate:
    """Certify ``sigma(H) = sigma(H0)`` with multiplicities.

    A full set of eigenpairs with small residual and an invertible eigenvector
    matrix pins down the whole spectrum of a finite matrix.
    """
    res = eigen_residuals(triple, sys).worst
    try:
        linalg.inverse(sys.phi)
        invertible = True
    except SingularMatrix:
        invertible = False
    return SpectrumCertificate(bool(res <= tol and invertible), res)


def domain_energy(sys: BiorthogonalSystem, g: np.ndarray) -> float:
    """``sum_k lambda_k^2 |<g, psi_k>|^2``, which equals ``||H0 T^-1 g||^2``."""
    coeffs = np.asarray(g, dtype=complex).conj() @ sys.psi
    return math.fsum(sys.lambdas ** 2 * np.abs(coeffs) ** 2)
