import math

import numpy as np
import pytest

from biogibbs import hamiltonians as ham
from biogibbs.linalg import operator_norm
from conftest import scenario

LN2 = math.log(2.0)


def _faulty(triple, amount):
    n = triple.H.shape[0]
    off = np.zeros((n, n), dtype=complex)
    off[0, 1] = off[1, 0] = amount
    return ham.HamiltonianTriple(triple.H0, triple.H + off, triple.Hstar, triple.es_H0,
                                 triple.es_H, triple.es_Hstar)


def test_build_triple_examples(riesz16):
    _, t = scenario("identity", 6)
    assert np.allclose(t.H, t.H0) and np.allclose(t.Hstar, t.H0)
    _, t = scenario("projector", 6)
    assert np.allclose(t.H, t.H0, atol=1e-15)
    s, t = riesz16
    assert operator_norm(t.H - t.H0) > 0.1
    assert operator_norm(t.Hstar - t.H.conj().T) < 1e-12


@pytest.mark.parametrize("kind,bound", [("identity", 1e-15), ("projector", 1e-13),
                                        ("diagonal", 1e-13), ("random_riesz", 1e-10)])
def test_eigen_residuals(kind, bound):
    s, t = scenario(kind, 12)
    assert ham.eigen_residuals(t, s).worst <= bound


def test_intertwining(any_scenario):
    s, t = any_scenario
    r = ham.intertwining_residuals(t, s)
    assert r.r1 <= 1e-12 and r.r2 <= 1e-12


def test_intertwining_detects_fault():
    s, t = scenario("random_riesz", 8, seed=1)
    r = ham.intertwining_residuals(_faulty(t, 0.01), s)
    assert 0.2 * 0.01 / 7 < r.r1 < 10 * 0.01


def test_resolution_family_examples():
    s, _ = scenario("identity", 5)
    fam = ham.resolution_family(s)
    assert fam.product_residual == 0 and fam.completeness == 0
    s, _ = scenario("projector", 5)
    r0 = ham.resolution_family(s).members[0]
    assert np.allclose(r0, np.outer(s.phi[:, 0], s.psi[:, 0].conj()))
    assert np.vdot(s.psi[:, 0], s.phi[:, 0]) == pytest.approx(1)
    assert operator_norm(r0 @ r0 - r0) < 1e-15
    s, _ = scenario("random_riesz", 8, seed=42)
    assert ham.resolution_family(s).completeness <= 1e-11


def test_functional_calculus_examples():
    s, t = scenario("identity", 4)
    assert np.allclose(ham.functional_calculus(t, lambda x: np.ones_like(x)), np.eye(4))
    out = ham.functional_calculus(t, lambda x: np.exp(0.7j * x))
    assert np.allclose(out, np.diag(np.exp(0.7j * np.arange(4))))
    s, t = scenario("projector", 3)
    out = ham.functional_calculus(t, lambda x: np.exp(-LN2 * x))
    assert np.allclose(out, np.diag([1, 0.5, 0.25]), atol=1e-15)


def test_functional_calculus_consistency(riesz16):
    s, t = riesz16
    assert ham.functional_calculus_consistency(t, s, lambda x: np.exp(1j * x) / (1 + x)) < 1e-12


def test_spectrum_check():
    s, t = scenario("identity", 6)
    c = ham.spectrum_check(t, s)
    assert c.certified and c.max_residual == 0
    s, t = scenario("random_riesz", 16, seed=42)
    c = ham.spectrum_check(t, s)
    assert c.certified and c.max_residual <= 1e-11
    assert not ham.spectrum_check(_faulty(t, 0.1), s).certified


def test_domain_energy_examples():
    s, _ = scenario("random_riesz", 6, seed=9)
    assert ham.domain_energy(s, s.phi[:, 0]) == pytest.approx(0, abs=1e-25)
    assert ham.domain_energy(s, s.phi[:, 2]) == pytest.approx(4, rel=1e-12)
    assert ham.domain_energy(s, s.phi[:, 0] + s.phi[:, 1]) == pytest.approx(1, rel=1e-12)
