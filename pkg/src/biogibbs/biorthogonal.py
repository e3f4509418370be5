"""Truncated biorthogonal families built from an intertwiner T.

Given an invertible ``T`` on ``C^N`` the two families are the columns

    phi_n = T e_n,        psi_n = (T*)^-1 e_n,

so that ``<phi_n, psi_m> = delta_nm``.  Inner products are antilinear in the
first slot throughout: ``<f, g> = f.conj() @ g``.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg
from .errors import RecipeInvalid
from .sampling import make_rng, random_operator, random_unit_vector

KINDS = ("identity", "projector", "diagonal", "random_riesz")

# c_n sequences for the diagonal recipe
C_RULES = {
    "linear": lambda n: 1.0 + n,
    "inverse-linear": lambda n: 1.0 / (1.0 + n),
}


@dataclass(frozen=True)
class ScenarioRecipe:
    """How to build the intertwiner ``T`` for one scenario.

    ``projector``: ``T = 1 + i |u><u|`` with ``u`` either ``u`` or ``e_{u_index}``.
    ``diagonal``: ``T = diag(c_n)`` with ``c_n`` from ``c_rule``.
    ``random_riesz``: ``T = 1 + epsilon R`` with ``R`` of unit operator norm,
    drawn from ``seed``.
    """

    kind: str
    dim: int
    beta: float = math.log(2.0)
    u_index: int = 0
    u: tuple[complex, ...] | None = None
    c_rule: str = "linear"
    epsilon: float = 0.3
    seed: int = 0
    lambdas: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise RecipeInvalid(f"unknown scenario kind {self.kind!r}; expected one of {KINDS}")
        if int(self.dim) < 1:
            raise RecipeInvalid(f"dim must be positive, got {self.dim}")
        if not self.beta > 0:
            raise RecipeInvalid(f"beta must be positive, got {self.beta}")
        if self.kind == "projector":
            if self.u is not None:
                u = np.asarray(self.u, dtype=complex)
                if u.shape != (self.dim,):
                    raise RecipeInvalid(f"u has length {u.size}, expected {self.dim}")
                if abs(np.linalg.norm(u) - 1.0) > 1e-12:
                    raise RecipeInvalid(f"u must be a unit vector, |u| = {np.linalg.norm(u)!r}")
            elif not 0 <= self.u_index < self.dim:
                raise RecipeInvalid(f"u_index {self.u_index} out of range for dim {self.dim}")
        if self.kind == "diagonal" and self.c_rule not in C_RULES:
            raise RecipeInvalid(f"unknown c_rule {self.c_rule!r}; expected one of {sorted(C_RULES)}")
        if self.kind == "random_riesz" and not 0 < self.epsilon < 1:
            raise RecipeInvalid(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.lambdas is not None:
            lam = np.asarray(self.lambdas, dtype=float)
            if lam.shape != (self.dim,):
                raise RecipeInvalid(f"{lam.size} eigenvalues given for dim {self.dim}")
            if np.any(np.diff(lam) < 0):
                raise RecipeInvalid("eigenvalues must be nondecreasing")

    def with_dim(self, dim: int) -> "ScenarioRecipe":
        if self.u is not None or self.lambdas is not None:
            raise RecipeInvalid("explicit u or lambdas cannot be resized")
        return dataclasses.replace(self, dim=dim)

    def eigenvalues(self) -> np.ndarray:
        if self.lambdas is None:
            return np.arange(self.dim, dtype=float)
        return np.asarray(self.lambdas, dtype=float)

    def unit_vector(self) -> np.ndarray:
        if self.u is not None:
            return np.asarray(self.u, dtype=complex)
        u = np.zeros(self.dim, dtype=complex)
        u[self.u_index] = 1.0
        return u

    def transform(self) -> np.ndarray:
        n = self.dim
        if self.kind == "identity":
            return linalg.identity(n)
        if self.kind == "projector":
            u = self.unit_vector()
            return linalg.identity(n) + 1j * np.outer(u, u.conj())
        if self.kind == "diagonal":
            c = np.array([C_RULES[self.c_rule](k) for k in range(n)], dtype=float)
            if np.any(c == 0):
                raise RecipeInvalid("diagonal entries c_n must be nonzero")
            return np.diag(c).astype(complex)
        r = random_operator(make_rng(self.seed, f"random_riesz/{n}"), n)
        return linalg.identity(n) + self.epsilon * r


@dataclass(frozen=True)
class BiorthogonalSystem:
    """Families ``phi`` and ``psi`` stored as column stacks."""

    dim: int
    lambdas: np.ndarray
    T: np.ndarray
    T_inv: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    inverse_residual: float
    recipe: ScenarioRecipe | None = field(default=None, compare=False)

    @property
    def metric(self) -> np.ndarray:
        """``T T*``."""
        return self.T @ linalg.adjoint(self.T)

    def lambdas_are_naturals(self) -> bool:
        return bool(np.array_equal(self.lambdas, np.arange(self.dim, dtype=float)))


def system_from_transform(T, lambdas=None, recipe=None, tol_inv=None,
                          tol_biorth: float = 1e-10) -> BiorthogonalSystem:
    """Build the families from an explicit intertwiner.

    ``psi`` is read off the certified inverse of ``T``; no per-column solves.
    """
    T = linalg.as_matrix(T)
    dim = T.shape[0]
    lam = np.arange(dim, dtype=float) if lambdas is None else np.asarray(lambdas, dtype=float)
    if lam.shape != (dim,):
        raise RecipeInvalid(f"{lam.size} eigenvalues for a {dim}x{dim} transform")
    T_inv, res = linalg.inverse(T, tol=tol_inv)
    sys_ = BiorthogonalSystem(dim=dim, lambdas=lam, T=T, T_inv=T_inv, phi=T,
                              psi=linalg.adjoint(T_inv), inverse_residual=res,
                              recipe=recipe)
    dev = biorthogonality_residual(sys_)
    if dev > tol_biorth:
        raise RecipeInvalid(f"biorthogonality residual {dev:.3e} exceeds {tol_biorth:.1e}")
    return sys_


def build_system(recipe: ScenarioRecipe, tol_inv=None, tol_biorth=1e-10) -> BiorthogonalSystem:
    return system_from_transform(recipe.transform(), recipe.eigenvalues(), recipe=recipe,
                                 tol_inv=tol_inv, tol_biorth=tol_biorth)


def biorthogonality_residual(sys: BiorthogonalSystem) -> float:
    """``max |<phi_n, psi_m> - delta_nm|``."""
    gram = linalg.adjoint(sys.phi) @ sys.psi
    return float(np.max(np.abs(gram - np.eye(sys.dim))))


@dataclass(frozen=True)
class MetricOperators:
    S_phi: np.ndarray
    S_psi: np.ndarray
    residual_phi: float  # ||S_phi - T T*||
    residual_psi: float  # ||S_psi - (T T*)^-1||


def metric_operators(sys: BiorthogonalSystem) -> MetricOperators:
    s_phi = sys.phi @ linalg.adjoint(sys.phi)
    s_psi = sys.psi @ linalg.adjoint(sys.psi)
    metric_inv, _ = linalg.inverse(sys.metric)
    return MetricOperators(
        S_phi=s_phi,
        S_psi=s_psi,
        residual_phi=linalg.operator_norm(s_phi - sys.metric),
        residual_psi=linalg.operator_norm(s_psi - metric_inv),
    )


def _tail_bound(terms: np.ndarray) -> float:
    """Geometric estimate of the discarded tail of a positive series.

    Uses the ratio of the last two retained terms; returns ``inf`` when the
    terms are not decreasing, i.e. when truncation cannot vouch for convergence.
    """
    if len(terms) < 2 or terms[-2] == 0:
        return float(terms[-1]) if len(terms) else 0.0
    ratio = terms[-1] / terms[-2]
    if ratio >= 1:
        return math.inf
    return float(terms[-1] * ratio / (1 - ratio))


@dataclass(frozen=True)
class WellBehaved:
    Z_phiphi: float
    Z_psipsi: float
    tail_phi: float
    tail_psi: float

    @property
    def tail_estimate(self) -> float:
        return max(self.tail_phi, self.tail_psi)

    @property
    def converging(self) -> bool:
        return math.isfinite(self.tail_estimate)


def boltzmann_weights(lambdas, beta: float) -> np.ndarray:
    return linalg.exp_weights(lambdas, -beta).real


def well_behaved_diagnostic(sys: BiorthogonalSystem, beta: float) -> WellBehaved:
    w = boltzmann_weights(sys.lambdas, beta)
    t_phi = w * np.sum(np.abs(sys.phi) ** 2, axis=0)
    t_psi = w * np.sum(np.abs(sys.psi) ** 2, axis=0)
    return WellBehaved(
        Z_phiphi=math.fsum(t_phi),
        Z_psipsi=math.fsum(t_psi),
        tail_phi=_tail_bound(t_phi),
        tail_psi=_tail_bound(t_psi),
    )


def quasi_basis_residual(sys: BiorthogonalSystem, trials: int, seed: int) -> float:
    """Worst violation of both weak resolutions of the identity on random pairs."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = make_rng(seed, "quasi_basis")
    worst = 0.0
    for _ in range(trials):
        f = random_unit_vector(rng, sys.dim)
        g = random_unit_vector(rng, sys.dim)
        exact = np.vdot(f, g)
        via_phi = (f.conj() @ sys.phi) @ (sys.psi.conj().T @ g)
        via_psi = (f.conj() @ sys.psi) @ (sys.phi.conj().T @ g)
        worst = max(worst, abs(exact - via_phi), abs(exact - via_psi))
    return float(worst)


def domain_stability_check(sys: BiorthogonalSystem) -> bool:
    """Stability of the dense domain under ``T`` and ``T^-1``.

    Every subspace of ``C^N`` that contains all basis vectors is the whole
    space, so this always holds at finite truncation.
    """
    return True


@dataclass(frozen=True)
class GrowthRow:
    dim: int
    norm_T: float
    norm_T_inv: float
    Z_phiphi: float
    Z_psipsi: float


@dataclass(frozen=True)
class GrowthSweep:
    rows: list[GrowthRow]
    flagged: bool
    factor: float


def riesz_growth_sweep(recipe: ScenarioRecipe, dims: Sequence[int],
                       factor: float = 2.0) -> GrowthSweep:
    """Norms of ``T_N`` and ``T_N^-1`` and partition sums across truncations.

    Flags possible unboundedness when either norm grows by more than
    ``factor`` between the smallest and largest truncation.
    """
    dims = list(dims)
    if any(b <= a for a, b in zip(dims, dims[1:])):
        raise ValueError("dims must be strictly increasing")
    rows = []
    for n in dims:
        s = build_system(recipe.with_dim(n))
        wb = well_behaved_diagnostic(s, recipe.beta)
        rows.append(GrowthRow(n, linalg.operator_norm(s.T), linalg.operator_norm(s.T_inv),
                              wb.Z_phiphi, wb.Z_psipsi))
    grow_t = rows[-1].norm_T / rows[0].norm_T
    grow_ti = rows[-1].norm_T_inv / rows[0].norm_T_inv
    return GrowthSweep(rows, bool(grow_t > factor or grow_ti > factor), factor)
