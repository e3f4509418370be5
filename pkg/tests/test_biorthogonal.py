import math

import numpy as np
import pytest

from biogibbs import biorthogonal as bio
from biogibbs.biorthogonal import ScenarioRecipe, build_system
from biogibbs.errors import RecipeInvalid, SingularMatrix
from biogibbs.linalg import operator_norm
from oracle_values import (Z_PHIPHI_DIAGONAL_LIMIT, Z_PHIPHI_DIAGONAL_PARTIAL,
                           Z_PSIPSI_DIAGONAL_LIMIT, Z_PSIPSI_DIAGONAL_PARTIAL)

LN2 = math.log(2.0)


def test_identity_families():
    s = build_system(ScenarioRecipe("identity", 4))
    assert np.array_equal(s.phi, np.eye(4)) and np.array_equal(s.psi, np.eye(4))


def test_projector_families():
    s = build_system(ScenarioRecipe("projector", 5))
    assert s.phi[:, 0] == pytest.approx(np.r_[1 + 1j, 0, 0, 0, 0])
    assert s.psi[:, 0] == pytest.approx(np.r_[(1 + 1j) / 2, 0, 0, 0, 0])
    assert np.allclose(s.phi[:, 1:], np.eye(5)[:, 1:])
    assert np.allclose(s.psi[:, 1:], np.eye(5)[:, 1:])


def test_diagonal_families():
    s = build_system(ScenarioRecipe("diagonal", 6))
    n = np.arange(6)
    assert np.allclose(s.phi, np.diag(1.0 + n))
    assert np.allclose(s.psi, np.diag(1.0 / (1 + n)))


@pytest.mark.parametrize("kind,bound", [("identity", 0.0), ("projector", 1e-14),
                                        ("diagonal", 1e-14), ("random_riesz", 1e-13)])
def test_biorthogonality(kind, bound):
    assert bio.biorthogonality_residual(build_system(ScenarioRecipe(kind, 10))) <= bound


def test_metric_operators_examples():
    m = bio.metric_operators(build_system(ScenarioRecipe("identity", 4)))
    assert np.allclose(m.S_phi, np.eye(4)) and np.allclose(m.S_psi, np.eye(4))
    s = build_system(ScenarioRecipe("projector", 4))
    m = bio.metric_operators(s)
    assert np.allclose(m.S_phi, np.diag([2.0, 1, 1, 1]), atol=1e-15)
    # oracle: explicit sum of rank-one terms
    assert np.allclose(sum(np.outer(s.phi[:, k], s.phi[:, k].conj()) for k in range(4)), m.S_phi)
    m = bio.metric_operators(build_system(ScenarioRecipe("diagonal", 3)))
    assert np.allclose(m.S_phi, np.diag([1.0, 4, 9]))
    assert m.residual_phi < 1e-14 and m.residual_psi < 1e-14


def test_metric_operators_are_mutual_inverses(riesz16):
    s, _ = riesz16
    m = bio.metric_operators(s)
    assert operator_norm(m.S_phi @ m.S_psi - np.eye(16)) < 1e-13


def test_well_behaved_identity_tends_to_two():
    for n in (8, 16, 32, 64):
        wb = bio.well_behaved_diagnostic(build_system(ScenarioRecipe("identity", n)), LN2)
        assert abs(wb.Z_phiphi - (2 - 2.0 ** (1 - n))) <= 1e-15
        assert wb.Z_phiphi == wb.Z_psipsi


def test_well_behaved_diagonal_partial_sums():
    prev = 0.0
    for n in (8, 16, 32, 64):
        wb = bio.well_behaved_diagnostic(build_system(ScenarioRecipe("diagonal", n)), LN2)
        assert wb.Z_phiphi == pytest.approx(Z_PHIPHI_DIAGONAL_PARTIAL[n], rel=1e-15)
        assert wb.Z_psipsi == pytest.approx(Z_PSIPSI_DIAGONAL_PARTIAL[n], rel=1e-15)
        assert prev < wb.Z_phiphi <= Z_PHIPHI_DIAGONAL_LIMIT
        prev = wb.Z_phiphi
        assert wb.converging
    assert abs(wb.Z_psipsi - Z_PSIPSI_DIAGONAL_LIMIT) < 1e-15


def test_quasi_basis():
    assert bio.quasi_basis_residual(build_system(ScenarioRecipe("identity", 8)), 10, 0) <= 1e-13
    assert bio.quasi_basis_residual(build_system(ScenarioRecipe("projector", 8)), 10, 0) <= 1e-12
    for kind in bio.KINDS:
        s = build_system(ScenarioRecipe(kind, 24, seed=3))
        assert bio.quasi_basis_residual(s, 10, 1) <= 24 * 1e-13


def test_growth_sweep_examples():
    g = bio.riesz_growth_sweep(ScenarioRecipe("identity", 8), (8, 16, 32))
    assert all(r.norm_T == pytest.approx(1) and r.norm_T_inv == pytest.approx(1) for r in g.rows)
    assert not g.flagged
    g = bio.riesz_growth_sweep(ScenarioRecipe("diagonal", 8), (8, 16, 32))
    assert [r.norm_T for r in g.rows] == [8.0, 16.0, 32.0]
    assert g.flagged
    g = bio.riesz_growth_sweep(ScenarioRecipe("random_riesz", 8, seed=42), (8, 16, 32))
    assert all(r.norm_T <= 1.3 + 1e-12 and r.norm_T_inv <= 1 / 0.7 + 1e-12 for r in g.rows)
    assert not g.flagged


def test_recipe_validation():
    with pytest.raises(RecipeInvalid):
        ScenarioRecipe("banana", 4)
    with pytest.raises(RecipeInvalid):
        ScenarioRecipe("identity", 4, beta=-1.0)
    with pytest.raises(RecipeInvalid):
        ScenarioRecipe("projector", 4, u_index=4)
    with pytest.raises(RecipeInvalid):
        ScenarioRecipe("projector", 2, u=(1.0, 1.0))
    with pytest.raises(RecipeInvalid):
        ScenarioRecipe("random_riesz", 4, epsilon=1.5)
    with pytest.raises(RecipeInvalid):
        ScenarioRecipe("diagonal", 4, c_rule="cubic")


def test_projector_with_general_unit_vector():
    u = np.array([1, 1j, 0, -1]) / math.sqrt(3)
    s = build_system(ScenarioRecipe("projector", 4, u=tuple(u)))
    assert bio.biorthogonality_residual(s) < 1e-15
    assert operator_norm(s.T) == pytest.approx(math.sqrt(2))


def test_singular_transform_rejected():
    t = np.eye(4, dtype=complex)
    t[2, 2] = 0
    with pytest.raises(SingularMatrix):
        bio.system_from_transform(t)


def test_random_riesz_is_seeded():
    a = build_system(ScenarioRecipe("random_riesz", 8, seed=5))
    b = build_system(ScenarioRecipe("random_riesz", 8, seed=5))
    c = build_system(ScenarioRecipe("random_riesz", 8, seed=6))
    assert np.array_equal(a.T, b.T) and not np.array_equal(a.T, c.T)
