"""Gibbs-like functionals weighted by biorthogonal families, and their identities.

Five unprimed flavors are evaluated as truncated weighted sums::

    omega(X) = (1/Z) sum_n exp(-beta lambda_n) <l_n, X r_n>

with ``(l, r)`` one of ``(e, e)``, ``(phi, phi)``, ``(psi, psi)``,
``(phi, psi)``, ``(psi, phi)``.  Primed flavors replace the Boltzmann weight by
a fixed operator ``A* A``::

    omega'(X) = (1/Z') sum_n <l_n, A* A X r_n>

Every identity check evaluates both sides by independent routes and returns a
:class:`KmsReport`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .biorthogonal import (BiorthogonalSystem, boltzmann_weights, system_from_transform,
                           well_behaved_diagnostic)
from .dynamics import EvolutionKind
from .errors import WrongScenario, ZeroNormalization
from .hamiltonians import HamiltonianTriple
from .linalg import adjoint, commutator, exp_similar, operator_norm, trace
from .sampling import make_rng, random_operator


class Flavor(str, enum.Enum):
    EE = "ee"
    PHIPHI = "phiphi"
    PSIPSI = "psipsi"
    PHIPSI = "phipsi"
    PSIPHI = "psiphi"


def _families(flavor: Flavor, sys: BiorthogonalSystem):
    e = linalg.identity(sys.dim)
    return {
        Flavor.EE: (e, e),
        Flavor.PHIPHI: (sys.phi, sys.phi),
        Flavor.PSIPSI: (sys.psi, sys.psi),
        Flavor.PHIPSI: (sys.phi, sys.psi),
        Flavor.PSIPHI: (sys.psi, sys.phi),
    }[flavor]


def _csum(values) -> complex:
    values = np.asarray(values, dtype=complex)
    return complex(math.fsum(values.real), math.fsum(values.imag))


def _diag_pairs(left, op, right) -> np.ndarray:
    """``<left_n, op right_n>`` for every column ``n``."""
    return np.einsum("in,in->n", left.conj(), op @ right)


@dataclass(frozen=True)
class GibbsFunctional:
    """A normalized functional bound to one biorthogonal system.

    ``weight`` is ``None`` for the Boltzmann-weighted flavors and the operator
    ``A`` for the primed ones.
    """

    flavor: Flavor
    beta: float
    Z: complex
    weight: np.ndarray | None = field(default=None, compare=False)

    @property
    def primed(self) -> bool:
        return self.weight is not None

    @property
    def name(self) -> str:
        return ("primed_" if self.primed else "") + self.flavor.value


def make_functional(flavor, sys: BiorthogonalSystem, beta: float = math.log(2.0),
                    weight: np.ndarray | None = None,
                    zero_tol: float = 1e-12) -> GibbsFunctional:
    """Compute the normalization for ``flavor`` on ``sys``.

    Raises
    ------
    ZeroNormalization
        If a primed normalization has modulus at most ``zero_tol``.
    """
    flavor = Flavor(flavor)
    left, right = _families(flavor, sys)
    if weight is None:
        if not beta > 0:
            raise ValueError(f"beta must be positive, got {beta}")
        w = boltzmann_weights(sys.lambdas, beta)
        z = _csum(w * np.einsum("in,in->n", left.conj(), right))
    else:
        weight = linalg.as_matrix(weight)
        z = _csum(np.einsum("in,in->n", (weight @ left).conj(), weight @ right))
        if abs(z) <= zero_tol:
            raise ZeroNormalization(f"primed {flavor.value} normalization {abs(z):.2e} vanishes")
    if flavor in (Flavor.EE, Flavor.PHIPHI, Flavor.PSIPSI):
        z = complex(z.real, 0.0)  # sums of squared norms
    return GibbsFunctional(flavor, float(beta), z, weight)


def evaluate(f: GibbsFunctional, sys: BiorthogonalSystem, X: np.ndarray) -> complex:
    left, right = _families(f.flavor, sys)
    if f.weight is None:
        terms = boltzmann_weights(sys.lambdas, f.beta) * _diag_pairs(left, X, right)
    else:
        terms = _diag_pairs(left, adjoint(f.weight) @ f.weight @ X, right)
    return _csum(terms) / f.Z


_GENERATOR_OF_RIGHT_FAMILY = {
    Flavor.EE: EvolutionKind.ALPHA0,
    Flavor.PHIPHI: EvolutionKind.ALPHA_PHI,
    Flavor.PSIPHI: EvolutionKind.ALPHA_PHI,
    Flavor.PSIPSI: EvolutionKind.ALPHA_PSI,
    Flavor.PHIPSI: EvolutionKind.ALPHA_PSI,
}


def evaluate_evolved(f: GibbsFunctional, sys: BiorthogonalSystem, triple: HamiltonianTriple,
                     A: np.ndarray, B: np.ndarray) -> complex:
    """``omega(A alpha^{i beta}(B))`` for the dynamics whose generator has the right family as eigenvectors.

    Since ``alpha^{i beta}(B) r_n = exp(beta lambda_n) exp(-beta G) B r_n``,
    the Boltzmann weight cancels the growing factor and only the decaying
    exponential is ever formed.  Forming ``alpha^{i beta}(B)`` first instead
    produces entries of size ``exp(beta (lambda_max - lambda_min))`` whose
    cancellation loses all accuracy once that exceeds ``1/eps``.
    """
    if f.weight is not None:
        raise ValueError("only the Boltzmann-weighted flavors carry a dynamics")
    kind = _GENERATOR_OF_RIGHT_FAMILY[f.flavor]
    es = {EvolutionKind.ALPHA0: triple.es_H0, EvolutionKind.ALPHA_PHI: triple.es_H,
          EvolutionKind.ALPHA_PSI: triple.es_Hstar}[kind]
    left, right = _families(f.flavor, sys)
    return _csum(_diag_pairs(left, A @ exp_similar(es, -f.beta) @ B, right)) / f.Z


def density(f: GibbsFunctional, sys: BiorthogonalSystem, triple: HamiltonianTriple) -> np.ndarray:
    """Closed-form ``rho`` with ``omega(X) = tr(rho X)``."""
    if f.weight is not None:
        aa = adjoint(f.weight) @ f.weight
        if f.flavor is Flavor.PHIPHI:
            return sys.metric @ aa / f.Z
        if f.flavor is Flavor.PSIPSI:
            return sys.psi @ adjoint(sys.psi) @ aa / f.Z
        if f.flavor in (Flavor.PHIPSI, Flavor.PSIPHI):
            return aa / f.Z
        raise ValueError("primed functionals need a phi or psi family")
    g = -f.beta
    if f.flavor is Flavor.EE:
        return exp_similar(triple.es_H0, g) / f.Z
    if f.flavor is Flavor.PHIPHI:
        return exp_similar(triple.es_H, g) @ sys.metric / f.Z
    if f.flavor is Flavor.PSIPSI:
        return exp_similar(triple.es_Hstar, g) @ sys.psi @ adjoint(sys.psi) / f.Z
    if f.flavor is Flavor.PHIPSI:
        return exp_similar(triple.es_Hstar, g) / f.Z
    return exp_similar(triple.es_H, g) / f.Z


@dataclass(frozen=True)
class PartitionFunctions:
    Z0_partial: float
    Z0_closed: float | None
    Z0_trace: float
    Z_phiphi: float
    Z_psipsi: float
    trace_H: complex  # tr exp(-beta H)
    tail_Z0: float


def partition_functions(sys: BiorthogonalSystem, triple: HamiltonianTriple,
                        beta: float) -> PartitionFunctions:
    """``Z0`` three ways plus the two well-behavedness sums."""
    w = boltzmann_weights(sys.lambdas, beta)
    closed = None
    if sys.lambdas_are_naturals():
        closed = math.exp(beta) / math.expm1(beta)
    wb = well_behaved_diagnostic(sys, beta)
    tail = float(np.exp(-beta * sys.dim) / -np.expm1(-beta)) if sys.lambdas_are_naturals() else math.nan
    return PartitionFunctions(
        Z0_partial=math.fsum(w),
        Z0_closed=closed,
        Z0_trace=trace(exp_similar(triple.es_H0, -beta)).real,
        Z_phiphi=wb.Z_phiphi,
        Z_psipsi=wb.Z_psipsi,
        trace_H=trace(exp_similar(triple.es_H, -beta)),
        tail_Z0=tail,
    )


@dataclass(frozen=True)
class KmsReport:
    name: str
    lhs: complex
    rhs: complex
    notes: str = ""
    extras: dict = field(default_factory=dict)

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs) / (1 + abs(self.lhs))


def _report(name, lhs, rhs, notes="", **extras) -> KmsReport:
    return KmsReport(name, complex(lhs), complex(rhs), notes, extras)


def _projector(sys: BiorthogonalSystem) -> np.ndarray:
    recipe = sys.recipe
    if recipe is None or recipe.kind != "projector":
        raise WrongScenario("this check needs a projector scenario")
    u = recipe.unit_vector()
    return np.outer(u, u.conj())


def example_formula_check(sys: BiorthogonalSystem, triple: HamiltonianTriple, beta: float,
                          X: np.ndarray) -> tuple[KmsReport, KmsReport]:
    """Projector scenario: ``omega_phiphi`` rewritten through ``omega0``.

    With ``T = 1 + iP``::

        omega_phiphi(X) = omega0(X + i[X, P] + P X P) / (1 + omega0(P))
        Z_phiphi = Z0 (1 + omega0(P))
    """
    p = _projector(sys)
    w_pp = make_functional(Flavor.PHIPHI, sys, beta)
    w_0 = make_functional(Flavor.EE, sys, beta)
    o0_p = evaluate(w_0, sys, p)
    direct = evaluate(w_pp, sys, X)
    closed = evaluate(w_0, sys, X + 1j * commutator(X, p) + p @ X @ p) / (1 + o0_p)
    return (_report("projector_example_omega_phiphi", direct, closed),
            _report("projector_example_Z_phiphi", w_pp.Z, w_0.Z * (1 + o0_p)))


def trace_forms_check(sys: BiorthogonalSystem, triple: HamiltonianTriple, beta: float,
                      A: np.ndarray, B: np.ndarray) -> list[KmsReport]:
    """Trace representations of the phiphi, phipsi and psiphi functionals."""
    w_pp = make_functional(Flavor.PHIPHI, sys, beta)
    w_fs = make_functional(Flavor.PHIPSI, sys, beta)
    w_sf = make_functional(Flavor.PSIPHI, sys, beta)
    w_0 = make_functional(Flavor.EE, sys, beta)
    e_h = exp_similar(triple.es_H, -beta)
    e_hs = exp_similar(triple.es_Hstar, -beta)
    z0 = w_0.Z.real
    metric = sys.metric
    t_star = adjoint(sys.T)
    return [
        _report("trace_form_phiphi_BA", evaluate(w_pp, sys, B @ A),
                trace(e_h @ metric @ B @ A) / w_pp.Z),
        _report("trace_form_phiphi_evolved", evaluate_evolved(w_pp, sys, triple, A, B),
                trace(e_h @ B @ metric @ A) / w_pp.Z),
        _report("trace_form_phipsi", evaluate(w_fs, sys, A), trace(e_hs @ A) / z0),
        _report("omega0_form_phipsi", evaluate(w_fs, sys, A),
                evaluate(w_0, sys, t_star @ A @ sys.psi)),
        _report("trace_form_psiphi", evaluate(w_sf, sys, A), trace(e_h @ A) / z0),
        _report("omega0_form_psiphi", evaluate(w_sf, sys, A),
                evaluate(w_0, sys, sys.T_inv @ A @ sys.T)),
    ]


KMS_IDENTITIES = ("kms0", "kms_phiphi_commuting", "kms_phiphi", "kms_psipsi",
                  "kms_phipsi", "kms_psiphi")


def metric_commutator(sys: BiorthogonalSystem, B: np.ndarray) -> float:
    """``||[B, T T*]|| / (||B|| ||T T*||)``."""
    metric = sys.metric
    denom = operator_norm(B) * operator_norm(metric)
    return operator_norm(commutator(B, metric)) / denom if denom else 0.0


def kms_check(identity: str, sys: BiorthogonalSystem, triple: HamiltonianTriple, beta: float,
              A: np.ndarray, B: np.ndarray) -> KmsReport:
    """Evaluate one KMS-like identity on the pair ``(A, B)``.

    ``kms0``                 omega0(A alpha0^{ib}(B))       = omega0(B A)
    ``kms_phiphi_commuting`` omega_phiphi(B A)              = omega_phiphi(A alpha_phi^{ib}(B)),
                             valid only when ``[B, T T*] = 0``
    ``kms_phiphi``           omega_phiphi(A alpha_phi^{ib}(B)) = omega_phiphi(B_T A),
                             ``B_T = (T T*)^-1 B T T*``
    ``kms_psipsi``           omega_psipsi(A alpha_psi^{ib}(B)) = omega_psipsi(_TB A),
                             ``_TB = T T* B (T T*)^-1``
    ``kms_phipsi``           omega_phipsi(B A)              = omega_phipsi(A alpha_psi^{ib}(B))
    ``kms_psiphi``           omega_psiphi(B A)              = omega_psiphi(A alpha_phi^{ib}(B))
    """
    if identity not in KMS_IDENTITIES:
        raise ValueError(f"unknown identity {identity!r}; expected one of {KMS_IDENTITIES}")
    comm = metric_commutator(sys, B)
    notes = f"relative ||[B, TT*]|| = {comm:.3e}"
    metric = sys.metric
    metric_inv = sys.psi @ adjoint(sys.psi)

    def evolved(w):
        return evaluate_evolved(w, sys, triple, A, B)

    if identity == "kms0":
        w = make_functional(Flavor.EE, sys, beta)
        return _report(identity, evolved(w),
                       evaluate(w, sys, B @ A), notes, metric_commutator=comm)
    if identity in ("kms_phiphi_commuting", "kms_phiphi"):
        w = make_functional(Flavor.PHIPHI, sys, beta)
        lhs_evolved = evolved(w)
        if identity == "kms_phiphi_commuting":
            return _report(identity, evaluate(w, sys, B @ A), lhs_evolved, notes,
                           metric_commutator=comm)
        b_t = metric_inv @ B @ metric
        return _report(identity, lhs_evolved, evaluate(w, sys, b_t @ A), notes,
                       metric_commutator=comm)
    if identity == "kms_psipsi":
        w = make_functional(Flavor.PSIPSI, sys, beta)
        t_b = metric @ B @ metric_inv
        return _report(identity, evolved(w),
                       evaluate(w, sys, t_b @ A), notes, metric_commutator=comm)
    if identity == "kms_phipsi":
        w = make_functional(Flavor.PHIPSI, sys, beta)
        lhs = evaluate(w, sys, B @ A)
        rhs = evolved(w)
        z0 = make_functional(Flavor.EE, sys, beta).Z.real
        tr_form = trace(exp_similar(triple.es_Hstar, -beta) @ B @ A) / z0
        return _report(identity, lhs, rhs, notes, metric_commutator=comm, trace_form=tr_form,
                       trace_residual=max(abs(lhs - tr_form), abs(rhs - tr_form))
                       / (1 + abs(tr_form)))
    w = make_functional(Flavor.PSIPHI, sys, beta)
    lhs = evaluate(w, sys, B @ A)
    rhs = evolved(w)
    z0 = make_functional(Flavor.EE, sys, beta).Z.real
    tr_form = trace(exp_similar(triple.es_H, -beta) @ B @ A) / z0
    return _report(identity, lhs, rhs, notes, metric_commutator=comm, trace_form=tr_form,
                   trace_residual=max(abs(lhs - tr_form), abs(rhs - tr_form))
                   / (1 + abs(tr_form)))


def conjugation_relation_check(sys: BiorthogonalSystem, triple: HamiltonianTriple, beta: float,
                               X: np.ndarray) -> KmsReport:
    """``omega_phipsi(X) = conj(omega_psiphi(X*))``."""
    lhs = evaluate(make_functional(Flavor.PHIPSI, sys, beta), sys, X)
    rhs = np.conj(evaluate(make_functional(Flavor.PSIPHI, sys, beta), sys, adjoint(X)))
    return _report("conjugation_phipsi_psiphi", lhs, rhs)


def omega0_relation_check(sys: BiorthogonalSystem, triple: HamiltonianTriple, beta: float,
                          X: np.ndarray) -> tuple[KmsReport, KmsReport]:
    """``omega_phiphi`` and ``omega_psipsi`` as rescaled ``omega0`` of conjugated arguments."""
    w_0 = make_functional(Flavor.EE, sys, beta)
    w_pp = make_functional(Flavor.PHIPHI, sys, beta)
    w_ss = make_functional(Flavor.PSIPSI, sys, beta)
    z0 = w_0.Z.real
    t_star = adjoint(sys.T)
    return (
        _report("omega0_relation_phiphi", evaluate(w_pp, sys, X),
                z0 / w_pp.Z.real * evaluate(w_0, sys, t_star @ X @ sys.T)),
        _report("omega0_relation_psipsi", evaluate(w_ss, sys, X),
                z0 / w_ss.Z.real * evaluate(w_0, sys, sys.T_inv @ X @ sys.psi)),
    )


@dataclass(frozen=True)
class Membership:
    I_phi: float
    I_psi: float
    omega_phiphi: complex
    omega_psipsi: complex
    Z_phiphi: float
    Z_psipsi: float
    norm: float
    weak_ideal: float | None = None  # |omega_phiphi(A X)| / (||A|| I_phi(X) / Z_phiphi)

    @property
    def bound_check(self) -> bool:
        slack = 1e-12 * (1 + self.norm)
        ok = (abs(self.omega_phiphi) <= self.I_phi / self.Z_phiphi + slack
              and abs(self.omega_psipsi) <= self.I_psi / self.Z_psipsi + slack
              and abs(self.omega_phiphi) <= self.norm + slack
              and abs(self.omega_psipsi) <= self.norm + slack)
        if self.weak_ideal is not None:
            ok = ok and self.weak_ideal <= 1 + 1e-12
        return ok


def _i_quantity(vecs, X, w) -> float:
    norms = np.linalg.norm(vecs, axis=0)
    return max(math.fsum(w * norms * np.linalg.norm(X @ vecs, axis=0)),
               math.fsum(w * norms * np.linalg.norm(adjoint(X) @ vecs, axis=0)))


def membership_quantities(sys: BiorthogonalSystem, beta: float, X: np.ndarray,
                          A: np.ndarray | None = None) -> Membership:
    """The ``I_phi``/``I_psi`` majorants and the bounds they imply.

    With ``A`` given, also the weak-ideal ratio
    ``|omega_phiphi(A X)| Z_phiphi / (||A|| I_phi(X))``, which must not exceed one.
    """
    w = boltzmann_weights(sys.lambdas, beta)
    w_pp = make_functional(Flavor.PHIPHI, sys, beta)
    w_ss = make_functional(Flavor.PSIPSI, sys, beta)
    i_phi = _i_quantity(sys.phi, X, w)
    weak = None
    if A is not None and i_phi > 0:
        weak = abs(evaluate(w_pp, sys, A @ X)) * w_pp.Z.real / (operator_norm(A) * i_phi)
    return Membership(
        I_phi=i_phi,
        I_psi=_i_quantity(sys.psi, X, w),
        omega_phiphi=evaluate(w_pp, sys, X),
        omega_psipsi=evaluate(w_ss, sys, X),
        Z_phiphi=w_pp.Z.real,
        Z_psipsi=w_ss.Z.real,
        norm=operator_norm(X),
        weak_ideal=weak,
    )


@dataclass(frozen=True)
class Positivity:
    min_sample: float
    max_imag: float
    density_hermiticity: float
    density_min_eig: float
    functional_norm: float  # trace norm of rho, equal to sup |omega(X)| over ||X|| <= 1

    def status(self, tol: float = 1e-11) -> str:
        if (self.min_sample >= -tol and self.max_imag <= tol
                and self.density_hermiticity <= tol and self.density_min_eig >= -tol):
            return "positive"
        return "not established"


def positivity_diagnostic(f: GibbsFunctional, sys: BiorthogonalSystem, triple: HamiltonianTriple,
                          trials: int = 32, seed: int = 0) -> Positivity:
    rng = make_rng(seed, f"positivity/{f.name}")
    values = []
    for _ in range(trials):
        x = random_operator(rng, sys.dim)
        values.append(evaluate(f, sys, adjoint(x) @ x))
    rho = density(f, sys, triple)
    herm = 0.5 * (rho + adjoint(rho))
    sing = np.sqrt(np.clip(np.linalg.eigvalsh(adjoint(rho) @ rho), 0.0, None))
    return Positivity(
        min_sample=min(v.real for v in values),
        max_imag=max(abs(v.imag) for v in values),
        density_hermiticity=operator_norm(rho - adjoint(rho)),
        density_min_eig=float(np.linalg.eigvalsh(herm)[0]),
        functional_norm=math.fsum(sing),
    )


@dataclass(frozen=True)
class CauchySchwarzReport(KmsReport):
    @property
    def residual(self) -> float:
        return max(0.0, self.lhs.real - self.rhs.real) / (1 + abs(self.lhs))


def cauchy_schwarz_check(f: GibbsFunctional, sys: BiorthogonalSystem, A: np.ndarray,
                         B: np.ndarray) -> KmsReport:
    """``|omega(A* B)|^2 <= omega(A* A) omega(B* B)``.

    ``lhs`` and ``rhs`` are the two sides; ``residual`` here is the amount by
    which the inequality is violated (zero when it holds), and ``extras['slack']``
    is ``rhs - lhs``.
    """
    if f.flavor not in (Flavor.PHIPHI, Flavor.PSIPSI, Flavor.EE) or f.primed:
        raise ValueError("Cauchy-Schwarz is only checked for positive flavors")
    lhs = abs(evaluate(f, sys, adjoint(A) @ B)) ** 2
    rhs = (evaluate(f, sys, adjoint(A) @ A) * evaluate(f, sys, adjoint(B) @ B)).real
    return CauchySchwarzReport(f"cauchy_schwarz_{f.name}", lhs, rhs, "", {"slack": rhs - lhs})


def primed_family_checks(sys: BiorthogonalSystem, triple: HamiltonianTriple, A: np.ndarray,
                         X: np.ndarray, reference: BiorthogonalSystem | None = None
                         ) -> list[KmsReport]:
    """Normalizations, trace forms and T-independence of the primed functionals.

    ``reference`` is a second system on the same space (the orthonormal basis
    by default) against which ``omega'_phipsi`` must agree.
    """
    if reference is None:
        reference = system_from_transform(linalg.identity(sys.dim), sys.lambdas)
    fns = {fl: make_functional(fl, sys, weight=A) for fl in
           (Flavor.PHIPHI, Flavor.PSIPSI, Flavor.PHIPSI, Flavor.PSIPHI)}
    aa = adjoint(A) @ A
    tr_aa = trace(aa)
    t_star = adjoint(sys.T)
    ref = make_functional(Flavor.PHIPSI, reference, weight=A)
    val_fs = evaluate(fns[Flavor.PHIPSI], sys, X)
    z_pp = fns[Flavor.PHIPHI].Z
    z_ss = fns[Flavor.PSIPSI].Z
    return [
        _report("primed_Z_phipsi_trace", fns[Flavor.PHIPSI].Z, tr_aa),
        _report("primed_Z_psiphi_trace", fns[Flavor.PSIPHI].Z, tr_aa),
        _report("primed_phiphi_trace_form", evaluate(fns[Flavor.PHIPHI], sys, X),
                trace(t_star @ aa @ X @ sys.T) / z_pp,
                alt=trace(X @ sys.metric @ aa) / z_pp),
        _report("primed_phiphi_trace_cyclic", trace(t_star @ aa @ X @ sys.T) / z_pp,
                trace(X @ sys.metric @ aa) / z_pp),
        _report("primed_psipsi_trace_form", evaluate(fns[Flavor.PSIPSI], sys, X),
                trace(sys.T_inv @ aa @ X @ sys.psi) / z_ss),
        _report("primed_phipsi_trace", val_fs, trace(aa @ X) / tr_aa),
        _report("primed_psiphi_trace", evaluate(fns[Flavor.PSIPHI], sys, X), trace(aa @ X) / tr_aa),
        _report("primed_phipsi_T_independence", val_fs, evaluate(ref, reference, X)),
    ]
