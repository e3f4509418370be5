import math

import numpy as np
import pytest

from biogibbs import dynamics as dyn
from biogibbs.biorthogonal import system_from_transform
from biogibbs.dynamics import EvolutionKind
from biogibbs.hamiltonians import build_triple
from biogibbs.linalg import exp_similar, operator_norm
from biogibbs.sampling import make_rng, random_operator, random_unit_vector
from conftest import scenario

LN2 = math.log(2.0)
KINDS = list(EvolutionKind)


def two_level():
    s = system_from_transform(np.eye(2, dtype=complex), [0.0, 1.0])
    x = np.array([[0, 1], [0, 0]], dtype=complex)
    return s, build_triple(s), x


@pytest.mark.parametrize("kind", KINDS)
def test_time_zero_is_identity_map(kind, riesz16, rng):
    s, t = riesz16
    x = random_operator(rng, 16)
    assert np.allclose(dyn.evolve(kind, t, s, 0.0, x), x, atol=1e-14)


def test_alpha0_phase():
    s, t, x = two_level()
    assert np.allclose(dyn.evolve("alpha0", t, s, 0.8, x), np.exp(-0.8j) * x)
    assert np.allclose(dyn.imaginary_time("alpha0", t, s, LN2, x), 2 * x)


def test_alpha_phi_equals_alpha0_when_T_commutes(projector8, rng):
    s, t = projector8
    for _ in range(5):
        x = random_operator(rng, 8)
        a = dyn.evolve("alpha_phi", t, s, 1.3, x)
        assert operator_norm(a - dyn.evolve("alpha0", t, s, 1.3, x)) < 1e-14


@pytest.mark.parametrize("kind", KINDS)
def test_sandwich_matches_exponential_form(kind, riesz16, rng):
    s, t = riesz16
    x = random_operator(rng, 16)
    for z in (0.4, -2.0, 0.3j):
        a = dyn.evolve(kind, t, s, z, x)
        b = dyn.evolve_exponential_form(kind, t, z, x)
        assert operator_norm(a - b) <= 1e-10 * (1 + operator_norm(a))


def test_imaginary_time_examples(riesz16):
    s, t = riesz16
    assert np.allclose(dyn.imaginary_time("alpha_phi", t, s, 0.5, np.eye(16)), np.eye(16))
    e = exp_similar(t.es_H, -LN2)
    # rounding is amplified by exp(beta * (lambda_max - lambda_min)) = 2^15
    assert operator_norm(dyn.imaginary_time("alpha_phi", t, s, LN2, e) - e) < 2 ** 15 * 1e-15


def test_group_element_examples():
    s, t = scenario("projector", 6)
    assert np.allclose(dyn.group_element(s, t, 0).V, np.eye(6))
    for time in (-2.0, 0.5, 3.0):
        g = dyn.group_element(s, t, time)
        assert g.bound == pytest.approx(math.sqrt(2))
        assert g.within_bound
    s, t = scenario("identity", 6)
    g = dyn.group_element(s, t, 1.7)
    assert g.norm == pytest.approx(1)
    assert operator_norm(g.V.conj().T @ g.V - np.eye(6)) < 1e-14


def test_group_law():
    s, t = scenario("identity", 8)
    assert dyn.group_law_residual(s, t, [(1, 2), (0.5, -0.5)]) <= 1e-13
    s, t = scenario("random_riesz", 16, seed=42)
    pairs = [(1, 2), (0.5, -0.5), (3, -1)]
    assert dyn.group_law_residual(s, t, pairs) <= 1e-11
    fault = np.zeros((16, 16), dtype=complex)
    fault[3, 5] = 1.0

    def faulty(x):
        return exp_similar(t.es_H, 1j * x) + 0.01 * fault

    res = dyn.group_law_residual(s, t, pairs, group=faulty)
    assert 1e-3 < res < 0.1


def test_similar_to_unitary(any_scenario):
    s, t = any_scenario
    assert dyn.similar_to_unitary_check(s, t, [-2, 0.5, 3]) <= 1e-12
    assert dyn.similar_to_unitary_check(s, t, [0.0]) == pytest.approx(0, abs=1e-15)


def test_generator_fd_commuting_input():
    s, t = scenario("random_riesz", 8, seed=1)
    x = exp_similar(t.es_H, -0.3)  # commutes with H
    rep = dyn.generator_fd_check("alpha_phi", t, s, x)
    assert max(rep.errors) <= 1e-12
    assert rep.exact_norm <= 1e-12


def test_generator_fd_two_level():
    s, t, x = two_level()
    rep = dyn.generator_fd_check("alpha0", t, s, x)
    # exact derivative -i X; sin(h)/h - 1 ~ -h^2/6
    for h, err in zip(rep.hs, rep.errors):
        assert err == pytest.approx(h * h / 6, rel=1e-3)
    assert rep.fitted_order == pytest.approx(2.0, abs=1e-3)


@pytest.mark.parametrize("kind", KINDS)
def test_generator_fd_order(kind):
    s, t = scenario("random_riesz", 8, seed=42)
    x = random_operator(make_rng(3), 8)
    rep = dyn.generator_fd_check(kind, t, s, x)
    assert 1.7 <= rep.fitted_order <= 2.3
    assert rep.extrapolated_error < min(rep.errors)


def test_generator_fd_rejects_bad_steps(riesz16):
    s, t = riesz16
    with pytest.raises(ValueError):
        dyn.generator_fd_check("alpha0", t, s, np.eye(16), hs=(1e-3, 1e-2))


def test_rank_one_examples():
    rng = make_rng(11)
    for kind in ("identity", "projector"):
        s, t = scenario(kind, 6)
        phi, psi = random_unit_vector(rng, 6), random_unit_vector(rng, 6)
        r = dyn.rank_one_evolution(s, t, phi, psi, 0.9)
        assert r.operator_residual < 1e-14 and r.deformation < 1e-14
        if kind == "identity":
            assert np.allclose(r.Phi_phit, r.Phi_0t) and np.allclose(r.Psi_psit, r.Psi_0t)
    s, t = scenario("random_riesz", 6, seed=4)
    r = dyn.rank_one_evolution(s, t, random_unit_vector(rng, 6), random_unit_vector(rng, 6), 1.0)
    assert r.operator_residual < 1e-13
    assert r.ket_simplification < 1e-13 and r.bra_simplification < 1e-13
    assert r.deformation > 1e-3
