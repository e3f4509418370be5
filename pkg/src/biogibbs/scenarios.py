"""Run configuration, the verification battery, and machine-readable reports."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import time
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from pathlib import Path
from typing import Callable

import numpy as np
import yaml

from . import biorthogonal as bio
from . import dynamics as dyn
from . import gibbs
from . import hamiltonians as ham
from . import linalg
from .errors import BiogibbsError, ConfigInvalid
from .linalg import adjoint, operator_norm
from .sampling import make_rng, random_operator, random_unit_vector

SCENARIO_ALIASES = {
    "identity": "identity",
    "projector": "projector",
    "diagonal": "diagonal",
    "random-riesz": "random_riesz",
    "random_riesz": "random_riesz",
}

TIME_SAMPLES = (-2.0, -1.0, 0.5, 1.0, 3.0)


@dataclass(frozen=True)
class Tolerances:
    tol_biorth: float = 1e-10
    tol_kms: float = 1e-9
    tol_group: float = 1e-10
    tol_inv: float | None = None  # None means 1e-10 * dim


@dataclass(frozen=True)
class RunConfig:
    scenario: bio.ScenarioRecipe
    tolerances: Tolerances = Tolerances()
    checks: tuple[str, ...] | str = "all"
    output_path: str | None = None
    format: str = "json"
    samples: int = 10

    @property
    def dim(self) -> int:
        return self.scenario.dim

    @property
    def beta(self) -> float:
        return self.scenario.beta

    @property
    def seed(self) -> int:
        return self.scenario.seed

    def echo(self) -> dict:
        r = self.scenario
        scen = {"kind": r.kind}
        if r.kind == "projector":
            scen["u"] = (None if r.u is None else [[float(np.real(x)), float(np.imag(x))] for x in r.u])
            scen["u_index"] = r.u_index
        elif r.kind == "diagonal":
            scen["c_rule"] = r.c_rule
        elif r.kind == "random_riesz":
            scen["epsilon"] = r.epsilon
        return {
            "scenario": scen,
            "dim": r.dim,
            "beta": r.beta,
            "seed": r.seed,
            "lambdas": None if r.lambdas is None else list(r.lambdas),
            "tolerances": dataclasses.asdict(self.tolerances),
            "checks": self.checks if isinstance(self.checks, str) else list(self.checks),
            "samples": self.samples,
        }


@dataclass
class CheckRow:
    name: str
    residual: float | None
    tolerance: float
    passed: bool
    notes: str = ""


@dataclass
class ScenarioReport:
    config: dict
    partition: dict
    checks: list[CheckRow]
    diagnostics: dict
    exit: int
    timings: dict = field(default_factory=dict)

    def to_dict(self, include_timings: bool = False) -> dict:
        out = {
            "config": self.config,
            "partition": self.partition,
            "checks": [{"name": c.name, "residual": c.residual, "tolerance": c.tolerance,
                        "pass": c.passed, "notes": c.notes} for c in self.checks],
            "diagnostics": self.diagnostics,
            "exit": self.exit,
        }
        if include_timings:
            out["wall_time"] = self.timings
        return _jsonable(out)

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioReport":
        rows = [CheckRow(c["name"], c["residual"], c["tolerance"], c["pass"], c["notes"])
                for c in data["checks"]]
        return cls(data["config"], data["partition"], rows, data["diagnostics"], data["exit"],
                   data.get("wall_time", {}))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, complex):
        return [_jsonable(obj.real), _jsonable(obj.imag)]
    return obj


# ----------------------------------------------------------------------------
# configuration
# ----------------------------------------------------------------------------

def _recipe_from_fields(fields: dict) -> bio.ScenarioRecipe:
    kind = SCENARIO_ALIASES.get(str(fields.get("scenario", "")).lower())
    if kind is None:
        raise ConfigInvalid("scenario", f"unknown scenario {fields.get('scenario')!r}; "
                                        f"expected one of {sorted(set(SCENARIO_ALIASES))}")
    try:
        dim = int(fields.get("dim", 8))
    except (TypeError, ValueError):
        raise ConfigInvalid("dim", f"not an integer: {fields.get('dim')!r}") from None
    if dim < 2:
        raise ConfigInvalid("dim", f"must be >= 2, got {dim}")
    try:
        beta = float(fields.get("beta", math.log(2.0)))
    except (TypeError, ValueError):
        raise ConfigInvalid("beta", f"not a number: {fields.get('beta')!r}") from None
    if not beta > 0:
        raise ConfigInvalid("beta", f"inverse temperature must be positive, got {beta}")
    seed = fields.get("seed", 0)
    if not isinstance(seed, int) or not -2 ** 63 <= seed < 2 ** 64:
        raise ConfigInvalid("seed", f"must be a 64-bit integer, got {seed!r}")
    u = fields.get("u")
    if u is not None:
        u = tuple(complex(*x) if isinstance(x, (list, tuple)) else complex(x) for x in u)
    lambdas = fields.get("lambdas")
    kwargs = dict(kind=kind, dim=dim, beta=beta, seed=seed,
                  u_index=int(fields.get("u_index", 0)), u=u,
                  c_rule=str(fields.get("c_rule", "linear")),
                  epsilon=float(fields.get("epsilon", 0.3)),
                  lambdas=None if lambdas is None else tuple(float(x) for x in lambdas))
    try:
        return bio.ScenarioRecipe(**kwargs)
    except bio.RecipeInvalid as exc:
        raise ConfigInvalid("scenario", str(exc)) from None


def parse_config(path: str | Path | None = None, **overrides) -> RunConfig:
    """Merge a YAML/JSON config file with flag overrides into a :class:`RunConfig`.

    ``overrides`` use the flag names (``scenario``, ``dim``, ``beta``, ``seed``,
    ``u_index``, ``c_rule``, ``epsilon``, ``checks``, ``tol_kms`` ... ``out``,
    ``format``); ``None`` values are ignored.
    """
    fields: dict = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigInvalid("config", f"cannot read {path}: {exc}") from None
        loaded = yaml.safe_load(text) or {}
        if not isinstance(loaded, dict):
            raise ConfigInvalid("config", "top level must be a mapping")
        scen = loaded.pop("scenario", None)
        if isinstance(scen, dict):
            fields.update(scen)
            fields["scenario"] = scen.get("kind")
        elif scen is not None:
            fields["scenario"] = scen
        tols = loaded.pop("tolerances", None) or {}
        if not isinstance(tols, dict):
            raise ConfigInvalid("tolerances", "must be a mapping")
        fields.update(loaded)
        fields.update(tols)
    fields.update({k: v for k, v in overrides.items() if v is not None})

    recipe = _recipe_from_fields(fields)
    tol_kwargs = {}
    for name in ("tol_biorth", "tol_kms", "tol_group", "tol_inv"):
        if fields.get(name) is not None:
            value = float(fields[name])
            if not value > 0:
                raise ConfigInvalid(name, f"must be positive, got {value}")
            tol_kwargs[name] = value
    checks = fields.get("checks", "all")
    if isinstance(checks, str) and checks != "all":
        checks = tuple(c.strip() for c in checks.split(",") if c.strip())
    if checks != "all":
        checks = tuple(checks)
        unknown = [c for c in checks if c not in CHECKS]
        if unknown:
            raise ConfigInvalid("checks", f"unrecognized check(s) {unknown}; known: {list(CHECKS)}")
    fmt = fields.get("format", "json")
    if fmt not in ("json", "csv"):
        raise ConfigInvalid("format", f"expected json or csv, got {fmt!r}")
    samples = int(fields.get("samples", 10))
    if samples < 1:
        raise ConfigInvalid("samples", "must be >= 1")
    return RunConfig(recipe, Tolerances(**tol_kwargs), checks, fields.get("out"), fmt, samples)


# ----------------------------------------------------------------------------
# the battery
# ----------------------------------------------------------------------------

@dataclass
class _Context:
    config: RunConfig
    sys: bio.BiorthogonalSystem
    triple: ham.HamiltonianTriple
    diagnostics: dict

    def rng(self, label: str) -> np.random.Generator:
        return make_rng(self.config.seed, label)

    def operators(self, label: str, count: int | None = None) -> list[np.ndarray]:
        rng = self.rng(label)
        return [random_operator(rng, self.sys.dim) for _ in range(count or self.config.samples)]


def _row(name, residual, tol, notes="") -> CheckRow:
    residual = float(residual)
    return CheckRow(name, residual, float(tol), bool(residual <= tol), notes)


def _max_residual(reports) -> float:
    return max(r.residual for r in reports)


def check_biorthogonality(ctx):
    res = bio.biorthogonality_residual(ctx.sys)
    return [_row("biorthogonality", res, ctx.config.tolerances.tol_biorth)]


def check_metric_operators(ctx):
    m = bio.metric_operators(ctx.sys)
    n = ctx.sys.dim
    ev_phi = np.linalg.eigvalsh(0.5 * (m.S_phi + adjoint(m.S_phi)))[0]
    ev_psi = np.linalg.eigvalsh(0.5 * (m.S_psi + adjoint(m.S_psi)))[0]
    ctx.diagnostics["metric_min_eigenvalues"] = {"S_phi": ev_phi, "S_psi": ev_psi}
    product = operator_norm(m.S_phi @ m.S_psi - linalg.identity(n))
    return [
        _row("metric_S_phi_equals_TTstar", m.residual_phi / (1 + operator_norm(m.S_phi)), 1e-10 * n),
        _row("metric_S_psi_equals_inverse", m.residual_psi / (1 + operator_norm(m.S_psi)), 1e-10 * n),
        _row("metric_product_identity", product, 1e-9),
        CheckRow("metric_positive_definite", -min(ev_phi, ev_psi), 0.0, bool(min(ev_phi, ev_psi) > 0),
                 f"min eigenvalues {ev_phi:.3e}, {ev_psi:.3e}"),
    ]


def check_quasi_basis(ctx):
    res = bio.quasi_basis_residual(ctx.sys, ctx.config.samples, ctx.config.seed)
    return [_row("quasi_basis_resolution", res, ctx.sys.dim * 1e-12)]


def check_eigen(ctx):
    e = ham.eigen_residuals(ctx.triple, ctx.sys)
    cert = ham.spectrum_check(ctx.triple, ctx.sys)
    return [
        _row("eigen_residuals", e.worst, 1e-10),
        CheckRow("spectrum_certified", cert.max_residual, 1e-10, cert.certified, cert.note),
        _row("adjoint_consistency", operator_norm(adjoint(ctx.triple.H) - ctx.triple.Hstar)
             / (1 + operator_norm(ctx.triple.H)), 1e-10),
    ]


def check_intertwining(ctx):
    r = ham.intertwining_residuals(ctx.triple, ctx.sys)
    return [_row("intertwining", max(r.r1, r.r2), 1e-12)]


def check_resolution(ctx):
    fam = ham.resolution_family(ctx.sys)
    return [
        _row("resolution_products", fam.product_residual, 1e-10),
        _row("resolution_completeness", fam.completeness, 1e-10 * ctx.sys.dim),
    ]


def check_functional_calculus(ctx):
    beta = ctx.config.beta

    def u1(x):
        return np.exp(-beta * (x - x[0]) / max(1.0, x[-1] - x[0]))

    def u2(x):
        return np.exp(1j * x)

    both = ham.functional_calculus(ctx.triple, lambda x: u1(x) * u2(x))
    prod = ham.functional_calculus(ctx.triple, u1) @ ham.functional_calculus(ctx.triple, u2)
    cons = ham.functional_calculus_consistency(ctx.triple, ctx.sys, u2, ctx.config.samples,
                                              ctx.config.seed)
    scale = 1 + operator_norm(both)
    return [
        _row("functional_calculus_homomorphism", operator_norm(both - prod) / scale, 1e-10),
        _row("functional_calculus_spectral_sum", cons, 1e-10),
    ]


def check_partition(ctx):
    pf = gibbs.partition_functions(ctx.sys, ctx.triple, ctx.config.beta)
    rows = [
        _row("trace_similarity_invariance", abs(pf.trace_H - pf.Z0_partial) / pf.Z0_partial, 1e-10),
        _row("partition_trace_vs_sum", abs(pf.Z0_trace - pf.Z0_partial) / pf.Z0_partial, 1e-12),
    ]
    if pf.Z0_closed is not None:
        rows.append(_row("partition_closed_form", abs(pf.Z0_closed - pf.Z0_partial),
                         pf.tail_Z0 + 1e-12 * pf.Z0_closed, f"geometric tail {pf.tail_Z0:.3e}"))
    return rows


def check_group(ctx):
    pairs = list(combinations_with_replacement(TIME_SAMPLES, 2))
    law = dyn.group_law_residual(ctx.sys, ctx.triple, pairs)
    elements = [dyn.group_element(ctx.sys, ctx.triple, t) for t in TIME_SAMPLES]
    excess = max(max(0.0, g.norm - g.bound) for g in elements)
    unit = dyn.similar_to_unitary_check(ctx.sys, ctx.triple, TIME_SAMPLES)
    return [
        _row("group_law", law, ctx.config.tolerances.tol_group),
        _row("group_norm_bound", excess, 1e-9, f"||T|| ||T^-1|| = {elements[0].bound:.6f}"),
        _row("similar_to_unitary", unit, 1e-11),
    ]


def check_dynamics_algebra(ctx):
    xs = ctx.operators("dynamics_algebra", 2 * ctx.config.samples)
    n = ctx.sys.dim
    eye = linalg.identity(n)
    worst = {"unital": 0.0, "multiplicative": 0.0, "cocycle": 0.0, "inverse": 0.0,
             "exponential_form": 0.0, "sandwich": 0.0}
    t, s = 0.7, -1.3
    for kind in dyn.EvolutionKind:
        worst["unital"] = max(worst["unital"],
                              operator_norm(dyn.evolve(kind, ctx.triple, ctx.sys, t, eye) - eye))
        for x, y in zip(xs[::2], xs[1::2]):
            ax = dyn.evolve(kind, ctx.triple, ctx.sys, t, x)
            ay = dyn.evolve(kind, ctx.triple, ctx.sys, t, y)
            axy = dyn.evolve(kind, ctx.triple, ctx.sys, t, x @ y)
            worst["multiplicative"] = max(worst["multiplicative"], operator_norm(axy - ax @ ay))
            both = dyn.evolve(kind, ctx.triple, ctx.sys, t + s, x)
            nested = dyn.evolve(kind, ctx.triple, ctx.sys, t, dyn.evolve(kind, ctx.triple, ctx.sys, s, x))
            worst["cocycle"] = max(worst["cocycle"], operator_norm(both - nested))
            back = dyn.evolve(kind, ctx.triple, ctx.sys, -t, ax)
            worst["inverse"] = max(worst["inverse"], operator_norm(back - x))
            expo = dyn.evolve_exponential_form(kind, ctx.triple, t, x)
            worst["exponential_form"] = max(worst["exponential_form"],
                                            operator_norm(expo - ax) / (1 + operator_norm(ax)))
        x = xs[0]
        a_phi = dyn.evolve(dyn.EvolutionKind.ALPHA_PHI, ctx.triple, ctx.sys, t, x)
        a_0 = dyn.evolve(dyn.EvolutionKind.ALPHA0, ctx.triple, ctx.sys, t, ctx.sys.T_inv @ x @ ctx.sys.T)
        worst["sandwich"] = max(worst["sandwich"], operator_norm(a_phi @ ctx.sys.T - ctx.sys.T @ a_0)
                                / (1 + operator_norm(ctx.sys.T) * operator_norm(a_0)))
    iso = max(abs(operator_norm(dyn.evolve("alpha0", ctx.triple, ctx.sys, t, x)) - operator_norm(x))
              for x in xs)
    return [
        _row("dynamics_unital", worst["unital"], 1e-11),
        _row("dynamics_multiplicative", worst["multiplicative"], 1e-11),
        _row("dynamics_cocycle", worst["cocycle"], 1e-11),
        _row("dynamics_inverse", worst["inverse"], 1e-11),
        _row("dynamics_exponential_form", worst["exponential_form"], 1e-10),
        _row("dynamics_sandwich_consistency", worst["sandwich"], 1e-12),
        _row("alpha0_isometry", iso, 1e-11),
    ]


def check_generators(ctx):
    spread = float(ctx.sys.lambdas[-1] - ctx.sys.lambdas[0])
    hs = tuple(h / max(1.0, spread) for h in (1e-2, 5e-3, 2.5e-3))
    rows = []
    xs = ctx.operators("generators", min(ctx.config.samples, 5))
    for kind in dyn.EvolutionKind:
        reports = [dyn.generator_fd_check(kind, ctx.triple, ctx.sys, x, hs) for x in xs]
        orders = [r.fitted_order for r in reports]
        err = max(r.extrapolated_error for r in reports)
        ok = all(1.7 <= o <= 2.3 for o in orders) and err <= 1e-6
        rows.append(CheckRow(f"generator_{kind.value}", err, 1e-6, ok,
                             f"fitted orders {min(orders):.3f}..{max(orders):.3f}"))
    return rows


def check_kms(ctx):
    beta = ctx.config.beta
    tol = ctx.config.tolerances.tol_kms
    xs = ctx.operators("kms", 2 * ctx.config.samples)
    pairs = list(zip(xs[::2], xs[1::2]))
    rows = []
    for identity in ("kms0", "kms_phiphi", "kms_psipsi", "kms_phipsi", "kms_psiphi"):
        reps = [gibbs.kms_check(identity, ctx.sys, ctx.triple, beta, a, b) for a, b in pairs]
        rows.append(_row({"kms0": "kms_standard"}.get(identity, identity), _max_residual(reps), tol))
        if identity in ("kms_phipsi", "kms_psiphi"):
            rows.append(_row(f"{identity}_trace_form",
                             max(r.extras["trace_residual"] for r in reps), tol))

    # B commuting with TT*: a cubic polynomial in the metric
    rng = ctx.rng("kms_commuting")
    metric = ctx.sys.metric
    commuting = []
    for a, _ in pairs:
        coeffs = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        b = sum(c * np.linalg.matrix_power(metric, k) for k, c in enumerate(coeffs))
        b = b / operator_norm(b)
        commuting.append(gibbs.kms_check("kms_phiphi_commuting", ctx.sys, ctx.triple, beta, a, b))
    rows.append(_row("kms_phiphi_commuting", _max_residual(commuting), tol))

    generic = [gibbs.kms_check("kms_phiphi_commuting", ctx.sys, ctx.triple, beta, a, b)
               for a, b in pairs]
    violating = [r for r in generic if r.extras["metric_commutator"] > 0.1]
    ctx.diagnostics["commuting_hypothesis"] = {
        "generic_samples": len(generic),
        "violating_samples": len(violating),
        "min_residual_when_violated": min((r.residual for r in violating), default=None),
        "detected": all(r.residual > 10 * tol for r in violating),
    }
    return rows


def check_trace_forms(ctx):
    beta = ctx.config.beta
    xs = ctx.operators("trace_forms", 2 * ctx.config.samples)
    reps = [gibbs.trace_forms_check(ctx.sys, ctx.triple, beta, a, b)
            for a, b in zip(xs[::2], xs[1::2])]
    tol = ctx.config.tolerances.tol_kms
    rows = [_row(reps[0][i].name, max(r[i].residual for r in reps), tol) for i in range(len(reps[0]))]
    conj = [gibbs.conjugation_relation_check(ctx.sys, ctx.triple, beta, x) for x in xs]
    rows.append(_row("conjugation_phipsi_psiphi", _max_residual(conj), tol))
    rel = [gibbs.omega0_relation_check(ctx.sys, ctx.triple, beta, x) for x in xs]
    rows.append(_row("omega0_relation_phiphi", max(r[0].residual for r in rel), tol))
    rows.append(_row("omega0_relation_psipsi", max(r[1].residual for r in rel), tol))
    if ctx.sys.recipe is not None and ctx.sys.recipe.kind == "projector":
        ex = [gibbs.example_formula_check(ctx.sys, ctx.triple, beta, x) for x in xs]
        rows.append(_row("projector_example_omega_phiphi", max(r[0].residual for r in ex), tol))
        rows.append(_row("projector_example_Z_phiphi", ex[0][1].residual, tol))
    return rows


def check_normalization(ctx):
    beta = ctx.config.beta
    eye = linalg.identity(ctx.sys.dim)
    worst = max(abs(gibbs.evaluate(gibbs.make_functional(f, ctx.sys, beta), ctx.sys, eye) - 1)
                for f in gibbs.Flavor)
    return [_row("normalization", worst, 1e-12)]


def check_bounds(ctx):
    beta = ctx.config.beta
    xs = ctx.operators("bounds", 2 * ctx.config.samples)
    worst = 0.0
    for x, a in zip(xs[::2], xs[1::2]):
        m = gibbs.membership_quantities(ctx.sys, beta, x, A=a)
        worst = max(worst,
                    abs(m.omega_phiphi) - m.I_phi / m.Z_phiphi,
                    abs(m.omega_psipsi) - m.I_psi / m.Z_psipsi,
                    abs(m.omega_phiphi) - m.norm,
                    abs(m.omega_psipsi) - m.norm,
                    (m.weak_ideal or 0.0) - 1.0)
    return [_row("continuity_and_weak_ideal_bounds", max(worst, 0.0), 1e-12)]


def check_positivity(ctx):
    rows = []
    beta = ctx.config.beta
    for flavor in (gibbs.Flavor.EE, gibbs.Flavor.PHIPHI, gibbs.Flavor.PSIPSI):
        f = gibbs.make_functional(flavor, ctx.sys, beta)
        p = gibbs.positivity_diagnostic(f, ctx.sys, ctx.triple, ctx.config.samples, ctx.config.seed)
        res = max(0.0, -p.min_sample, p.max_imag, p.density_hermiticity, -p.density_min_eig)
        rows.append(_row(f"positivity_{flavor.value}", res, 1e-11))
    xs = ctx.operators("cauchy_schwarz", 2 * ctx.config.samples)
    for flavor in (gibbs.Flavor.PHIPHI, gibbs.Flavor.PSIPSI):
        f = gibbs.make_functional(flavor, ctx.sys, beta)
        reps = [gibbs.cauchy_schwarz_check(f, ctx.sys, a, b) for a, b in zip(xs[::2], xs[1::2])]
        rows.append(_row(f"cauchy_schwarz_{flavor.value}", _max_residual(reps), 1e-12,
                         f"min slack {min(r.extras['slack'] for r in reps):.3e}"))
    mixed = {}
    for flavor in (gibbs.Flavor.PHIPSI, gibbs.Flavor.PSIPHI):
        f = gibbs.make_functional(flavor, ctx.sys, beta)
        p = gibbs.positivity_diagnostic(f, ctx.sys, ctx.triple, ctx.config.samples, ctx.config.seed)
        mixed[flavor.value] = {**dataclasses.asdict(p), "status": p.status()}
    mixed["condition_T"] = operator_norm(ctx.sys.T) * operator_norm(ctx.sys.T_inv)
    ctx.diagnostics["mixed_positivity"] = mixed
    return rows


def check_primed(ctx):
    rng = ctx.rng("primed")
    n = ctx.sys.dim
    rows: dict[str, float] = {}
    reference = bio.system_from_transform(linalg.identity(n), ctx.sys.lambdas)
    for _ in range(ctx.config.samples):
        a = random_operator(rng, n)
        x = random_operator(rng, n)
        for r in gibbs.primed_family_checks(ctx.sys, ctx.triple, a, x, reference):
            rows[r.name] = max(rows.get(r.name, 0.0), r.residual)
    tol = ctx.config.tolerances.tol_kms
    return [_row(name, res, tol) for name, res in rows.items()]


def check_domain(ctx):
    g = random_unit_vector(ctx.rng("domain"), ctx.sys.dim)
    direct = float(np.linalg.norm(ctx.triple.H0 @ ctx.sys.T_inv @ g) ** 2)
    energy = ham.domain_energy(ctx.sys, g)
    ctx.diagnostics["domain_stability"] = "automatic at finite truncation"
    return [_row("domain_energy", abs(energy - direct) / (1 + direct), 1e-12)]


CHECKS: dict[str, Callable[[_Context], list[CheckRow]]] = {
    "biorthogonality": check_biorthogonality,
    "metric_operators": check_metric_operators,
    "quasi_basis": check_quasi_basis,
    "eigen": check_eigen,
    "intertwining": check_intertwining,
    "resolution": check_resolution,
    "functional_calculus": check_functional_calculus,
    "domain": check_domain,
    "partition": check_partition,
    "group": check_group,
    "dynamics_algebra": check_dynamics_algebra,
    "generators": check_generators,
    "normalization": check_normalization,
    "kms": check_kms,
    "trace_forms": check_trace_forms,
    "bounds": check_bounds,
    "positivity": check_positivity,
    "primed": check_primed,
}


def _partition_echo(pf: gibbs.PartitionFunctions) -> dict:
    return {"Z0_partial": pf.Z0_partial, "Z0_closed": pf.Z0_closed,
            "Z_phiphi": pf.Z_phiphi, "Z_psipsi": pf.Z_psipsi}


def run(config: RunConfig) -> ScenarioReport:
    """Build the scenario, execute the selected checks and aggregate a report.

    Module errors do not escape: they become a failed row and exit code 2.
    """
    echo = config.echo()
    try:
        sys_ = bio.build_system(config.scenario, tol_inv=config.tolerances.tol_inv,
                                tol_biorth=config.tolerances.tol_biorth)
        triple = ham.build_triple(sys_)
        pf = gibbs.partition_functions(sys_, triple, config.beta)
    except (BiogibbsError, np.linalg.LinAlgError) as exc:
        return ScenarioReport(echo, {}, [CheckRow("build", None, 0.0, False,
                                                  f"{type(exc).__name__}: {exc}")],
                              {}, exit=2)
    wb = bio.well_behaved_diagnostic(sys_, config.beta)
    diagnostics = {
        "truncation_tails": {"Z0": pf.tail_Z0, "Z_phiphi": wb.tail_phi, "Z_psipsi": wb.tail_psi},
        "spectrum_parts": "continuous and residual spectrum empty by construction",
    }
    ctx = _Context(config, sys_, triple, diagnostics)
    names = list(CHECKS) if config.checks == "all" else list(config.checks)
    rows: list[CheckRow] = []
    timings = {}
    errored = False
    for name in names:
        start = time.perf_counter()
        try:
            rows.extend(CHECKS[name](ctx))
        except (BiogibbsError, np.linalg.LinAlgError) as exc:
            errored = True
            rows.append(CheckRow(name, None, 0.0, False, f"{type(exc).__name__}: {exc}"))
        timings[name] = time.perf_counter() - start
    code = 2 if errored else (0 if all(r.passed for r in rows) else 1)
    return ScenarioReport(echo, _partition_echo(pf), rows, diagnostics, code, timings)


# ----------------------------------------------------------------------------
# sweeps
# ----------------------------------------------------------------------------

@dataclass
class SweepResult:
    reports: list[ScenarioReport]
    growth: dict

    @property
    def exit(self) -> int:
        return max(r.exit for r in self.reports)

    def to_dict(self, include_timings: bool = False) -> dict:
        return _jsonable({"reports": [r.to_dict(include_timings) for r in self.reports],
                          "growth": self.growth, "exit": self.exit})


def _loglog_slope(dims, values) -> float:
    return float(np.polyfit(np.log(dims), np.log(values), 1)[0])


def sweep(config: RunConfig, dims) -> SweepResult:
    """Run the battery at each truncation and fit growth exponents."""
    dims = [int(d) for d in dims]
    if len(dims) < 2 or any(b <= a for a, b in zip(dims, dims[1:])):
        raise ConfigInvalid("dims", "need at least two strictly increasing dimensions")
    reports = [run(dataclasses.replace(config, scenario=config.scenario.with_dim(d)))
               for d in dims]
    table = bio.riesz_growth_sweep(config.scenario, dims)
    rows = table.rows
    z_phi = [r.Z_phiphi for r in rows]
    z_psi = [r.Z_psipsi for r in rows]
    growth = {
        "dims": dims,
        "norm_T": [r.norm_T for r in rows],
        "norm_T_inv": [r.norm_T_inv for r in rows],
        "Z_phiphi": z_phi,
        "Z_psipsi": z_psi,
        "exponent_norm_T": _loglog_slope(dims, [r.norm_T for r in rows]),
        "exponent_norm_T_inv": _loglog_slope(dims, [r.norm_T_inv for r in rows]),
        "exponent_Z_phiphi": _loglog_slope(dims, z_phi),
        "exponent_Z_psipsi": _loglog_slope(dims, z_psi),
        "Z_phiphi_monotone": bool(all(b >= a for a, b in zip(z_phi, z_phi[1:]))),
        "Z_psipsi_monotone": bool(all(b >= a for a, b in zip(z_psi, z_psi[1:]))),
        "growth_factor": table.factor,
        "unbounded_flag": table.flagged,
    }
    return SweepResult(reports, growth)


# ----------------------------------------------------------------------------
# output
# ----------------------------------------------------------------------------

def render_json(report, include_timings: bool = False) -> str:
    return json.dumps(report.to_dict(include_timings), indent=2, allow_nan=False) + "\n"


def render_csv(report: ScenarioReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["check", "residual", "tolerance", "pass", "notes"])
    for c in report.checks:
        writer.writerow([c.name, "" if c.residual is None else repr(c.residual),
                         repr(c.tolerance), int(c.passed), c.notes])
    return buf.getvalue()


def emit_report(report, path: str | Path | None, format: str = "json",
                include_timings: bool = False) -> str:
    """Serialize ``report`` and write it to ``path`` (``None``: only return the text)."""
    if format == "json":
        text = render_json(report, include_timings)
    elif format == "csv":
        if isinstance(report, SweepResult):
            text = "".join(render_csv(r) for r in report.reports)
        else:
            text = render_csv(report)
    else:
        raise ValueError(f"unknown format {format!r}")
    if path is not None:
        Path(path).write_text(text)
    return text
