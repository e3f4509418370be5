"""Heisenberg-type evolutions generated by ``H0``, ``H`` and ``H*``.

``alpha0`` conjugates by the unitary ``exp(i t H0)``.  The two deformed
dynamics are defined by sandwiching ``alpha0`` with the intertwiner::

    alpha_phi^t(X) = T alpha0^t(T^-1 X T) T^-1
    alpha_psi^t(X) = (T*)^-1 alpha0^t(T* X (T*)^-1) T*

and ``alpha0`` itself acts entrywise in the ``H0`` eigenbasis, so complex
(imaginary) times never multiply large exponentials against each other.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from . import linalg
from .biorthogonal import BiorthogonalSystem
from .hamiltonians import HamiltonianTriple
from .linalg import commutator, exp_similar, operator_norm


class EvolutionKind(str, enum.Enum):
    ALPHA0 = "alpha0"
    ALPHA_PHI = "alpha_phi"
    ALPHA_PSI = "alpha_psi"


def _sandwich(kind: EvolutionKind, sys: BiorthogonalSystem):
    """``(left, right)`` with ``alpha^t(X) = left alpha0^t(right X left) right``."""
    kind = EvolutionKind(kind)
    if kind is EvolutionKind.ALPHA0:
        return None, None
    if kind is EvolutionKind.ALPHA_PHI:
        return sys.T, sys.T_inv
    return sys.psi, linalg.adjoint(sys.T)


def evolve(kind, triple: HamiltonianTriple, sys: BiorthogonalSystem, t: complex,
           X: np.ndarray) -> np.ndarray:
    phases = linalg.conjugation_phases(sys.lambdas, 1j * t)
    left, right = _sandwich(kind, sys)
    if left is None:
        return X * phases
    return left @ ((right @ X @ left) * phases) @ right


def imaginary_time(kind, triple: HamiltonianTriple, sys: BiorthogonalSystem, beta: float,
                   X: np.ndarray) -> np.ndarray:
    """``alpha^{i beta}(X) = exp(-beta G) X exp(beta G)``."""
    return evolve(kind, triple, sys, 1j * beta, X)


def generator(kind, triple: HamiltonianTriple) -> np.ndarray:
    kind = EvolutionKind(kind)
    return {EvolutionKind.ALPHA0: triple.H0, EvolutionKind.ALPHA_PHI: triple.H,
            EvolutionKind.ALPHA_PSI: triple.Hstar}[kind]


def evolve_exponential_form(kind, triple: HamiltonianTriple, t: complex,
                            X: np.ndarray) -> np.ndarray:
    """``exp(i t G) X exp(-i t G)`` with both factors formed explicitly."""
    es = {EvolutionKind.ALPHA0: triple.es_H0, EvolutionKind.ALPHA_PHI: triple.es_H,
          EvolutionKind.ALPHA_PSI: triple.es_Hstar}[EvolutionKind(kind)]
    return exp_similar(es, 1j * t) @ X @ exp_similar(es, -1j * t)


@dataclass(frozen=True)
class GroupElement:
    t: complex
    V: np.ndarray
    norm: float
    bound: float  # ||T|| ||T^-1||

    @property
    def within_bound(self) -> bool:
        return self.norm <= self.bound + 1e-9


def group_element(sys: BiorthogonalSystem, triple: HamiltonianTriple, t: complex) -> GroupElement:
    """``V(t) = T exp(i t H0) T^-1``."""
    v = exp_similar(triple.es_H, 1j * t)
    bound = operator_norm(sys.T) * operator_norm(sys.T_inv)
    return GroupElement(t, v, operator_norm(v), bound)


def group_law_residual(sys: BiorthogonalSystem, triple: HamiltonianTriple,
                       pairs: Iterable[tuple[float, float]],
                       group: Callable[[float], np.ndarray] | None = None) -> float:
    """Worst relative defect of ``V(t+s) = V(t) V(s)`` and ``V(-t) V(t) = 1``.

    ``group`` replaces ``V`` (used to inject faults in tests).
    """
    if group is None:
        def group(t):
            return exp_similar(triple.es_H, 1j * t)
    eye = linalg.identity(sys.dim)
    worst = 0.0
    for t, s in pairs:
        v_ts = group(t + s)
        worst = max(worst, operator_norm(v_ts - group(t) @ group(s)) / (1 + operator_norm(v_ts)))
        for x in (t, s):
            worst = max(worst, operator_norm(group(-x) @ group(x) - eye))
    return worst


def similar_to_unitary_check(sys: BiorthogonalSystem, triple: HamiltonianTriple,
                             ts: Iterable[float]) -> float:
    """``max_t ||U(t)* U(t) - 1||`` for ``U(t) = T^-1 V(t) T``."""
    eye = linalg.identity(sys.dim)
    worst = 0.0
    for t in ts:
        u = sys.T_inv @ exp_similar(triple.es_H, 1j * t) @ sys.T
        worst = max(worst, operator_norm(linalg.adjoint(u) @ u - eye))
    return worst


@dataclass(frozen=True)
class FiniteDifferenceReport:
    hs: tuple[float, ...]
    errors: tuple[float, ...]
    fitted_order: float
    extrapolated_error: float
    exact_norm: float


def generator_fd_check(kind, triple: HamiltonianTriple, sys: BiorthogonalSystem, X: np.ndarray,
                       hs: Sequence[float] = (1e-2, 5e-3, 2.5e-3)) -> FiniteDifferenceReport:
    """Central differences of ``t -> alpha^t(X)`` against ``i [G, X]``.

    ``fitted_order`` is the least-squares slope of log error against log h
    (``nan`` when the errors sit at rounding level).  ``extrapolated_error``
    applies one Richardson step to the two smallest steps, which must be in
    ratio 2, removing the leading ``h^2`` term.
    """
    hs = tuple(float(h) for h in hs)
    if any(h <= 0 for h in hs) or any(b >= a for a, b in zip(hs, hs[1:])):
        raise ValueError("step sizes must be positive and decreasing")
    exact = 1j * commutator(generator(kind, triple), X)
    diffs = [(evolve(kind, triple, sys, h, X) - evolve(kind, triple, sys, -h, X)) / (2 * h)
             for h in hs]
    errors = tuple(operator_norm(d - exact) for d in diffs)
    if len(hs) >= 2 and min(errors) > 1e-13 * (1 + operator_norm(X)):
        order = float(np.polyfit(np.log(hs), np.log(errors), 1)[0])
    else:
        order = math.nan
    extrapolated = math.nan
    if len(hs) >= 2:
        ratio = hs[-2] / hs[-1]
        rich = (ratio ** 2 * diffs[-1] - diffs[-2]) / (ratio ** 2 - 1)
        extrapolated = operator_norm(rich - exact)
    return FiniteDifferenceReport(hs, errors, order, extrapolated, operator_norm(exact))


@dataclass(frozen=True)
class RankOneEvolution:
    """Evolved vectors for ``Y = |Phi><Psi|``.

    Under ``alpha0`` both vectors move with ``exp(i t H0)``.  Under
    ``alpha_phi`` the ket moves with ``T exp(i t H0) T^-1 = exp(i t H)`` while
    the bra moves with ``(T^-1)* exp(i t H0) T* = exp(i t H*)``.
    """

    Phi_0t: np.ndarray
    Psi_0t: np.ndarray
    Phi_phit: np.ndarray
    Psi_psit: np.ndarray
    operator_residual: float  # ||alpha_phi(Y) - |Phi_phit><Psi_psit|||
    ket_simplification: float  # ||T e^{itH0} T^-1 x - e^{itH} x||
    bra_simplification: float  # ||(T^-1)* e^{itH0} T* x - e^{itH*} x||
    deformation: float  # ||alpha_phi(Y) - alpha0(Y)||


def rank_one_evolution(sys: BiorthogonalSystem, triple: HamiltonianTriple, Phi: np.ndarray,
                       Psi: np.ndarray, t: float) -> RankOneEvolution:
    Phi = np.asarray(Phi, dtype=complex)
    Psi = np.asarray(Psi, dtype=complex)
    u0 = exp_similar(triple.es_H0, 1j * t)
    ket_map = sys.T @ u0 @ sys.T_inv
    bra_map = sys.psi @ u0 @ linalg.adjoint(sys.T)
    phi_0t, psi_0t = u0 @ Phi, u0 @ Psi
    phi_t, psi_t = ket_map @ Phi, bra_map @ Psi

    y = np.outer(Phi, Psi.conj())
    a_phi = evolve(EvolutionKind.ALPHA_PHI, triple, sys, t, y)
    a_0 = evolve(EvolutionKind.ALPHA0, triple, sys, t, y)
    e_h = exp_similar(triple.es_H, 1j * t)
    e_hs = exp_similar(triple.es_Hstar, 1j * t)
    return RankOneEvolution(
        Phi_0t=phi_0t,
        Psi_0t=psi_0t,
        Phi_phit=phi_t,
        Psi_psit=psi_t,
        operator_residual=operator_norm(a_phi - np.outer(phi_t, psi_t.conj())),
        ket_simplification=max(float(np.linalg.norm(ket_map @ x - e_h @ x)) for x in (Phi, Psi)),
        bra_simplification=max(float(np.linalg.norm(bra_map @ x - e_hs @ x)) for x in (Phi, Psi)),
        deformation=operator_norm(a_phi - a_0),
    )
