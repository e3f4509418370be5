"""Gibbs states and KMS identities for non-self-adjoint Hamiltonians built from biorthogonal families.

Everything lives on a finite truncation ``C^N``: an invertible intertwiner
``T`` maps the orthonormal basis to ``phi_n = T e_n`` and its dual
``psi_n = (T*)^-1 e_n``, giving ``H = T H0 T^-1`` with the same real
spectrum as the diagonal ``H0``.
"""

from .biorthogonal import BiorthogonalSystem, ScenarioRecipe, build_system, system_from_transform
from .dynamics import EvolutionKind, evolve
from .errors import (BiogibbsError, ConfigInvalid, DimensionMismatch, ExponentialOverflow,
                     RecipeInvalid, SingularMatrix, WrongScenario, ZeroNormalization)
from .gibbs import Flavor, evaluate, kms_check, make_functional
from .hamiltonians import HamiltonianTriple, build_triple
from .scenarios import RunConfig, ScenarioReport, parse_config, run, sweep

__all__ = [
    "BiogibbsError", "BiorthogonalSystem", "ConfigInvalid", "DimensionMismatch", "EvolutionKind",
    "ExponentialOverflow", "Flavor", "HamiltonianTriple", "RecipeInvalid", "RunConfig",
    "ScenarioRecipe", "ScenarioReport", "SingularMatrix", "WrongScenario", "ZeroNormalization",
    "build_system", "build_triple", "evaluate", "evolve", "kms_check", "make_functional",
    "parse_config", "run", "sweep", "system_from_transform",
]
