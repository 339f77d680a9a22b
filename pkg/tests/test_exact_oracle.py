import cmath
import math

import numpy as np
import pytest
from scipy.linalg import expm

from cspi.errors import DimensionError, QuadratureError, TruncationError
from cspi.exact_oracle import (
    FockBasis,
    SpinBasis,
    composition_check,
    fock_coherent_vector,
    ho_amplitude_oracle,
    spin_amplitude_oracle,
    spin_coherent_vector,
)
from cspi.states import exact_cs_amplitude, exact_scs_amplitude


@pytest.mark.parametrize("S", [0.5, 1, 5, 20])
def test_spin_commutator(S):
    basis = SpinBasis(S)
    comm = basis.sx @ basis.sy - basis.sy @ basis.sx
    assert np.max(np.abs(comm - 1j * basis.sz)) < 1e-12
    assert np.max(np.abs(np.diag(basis.sz) - basis.m_values)) == 0.0


def test_fock_commutator_truncated():
    basis = FockBasis(n_max=30, hbar=0.7)
    q, p = basis.position(), basis.momentum()
    comm = q @ p - p @ q
    expected = 1j * 0.7 * np.eye(basis.dimension)
    # truncation corrupts only the last level
    assert np.max(np.abs((comm - expected)[:-1, :-1])) < 1e-12


def test_coherent_vector_norms():
    rng = np.random.default_rng(21)
    for _ in range(20):
        xi = complex(rng.normal(0, 0.8), rng.normal(0, 0.8))
        assert np.linalg.norm(spin_coherent_vector(xi, 17)) == pytest.approx(
            1.0, abs=1e-12
        )
        assert np.linalg.norm(fock_coherent_vector(xi, 50)) == pytest.approx(
            1.0, abs=1e-10
        )


def test_spin_coherent_vector_large_s_stable():
    vec = spin_coherent_vector(0.9 + 0.3j, 120)  # log-gamma path, no overflow
    assert np.all(np.isfinite(vec))
    assert np.linalg.norm(vec) == pytest.approx(1.0, abs=1e-11)


def test_spin_oracle_basics():
    t_val = 1.9
    assert spin_amplitude_oracle(0, 0, t_val, 0.5) == pytest.approx(
        cmath.exp(0.5j * t_val), abs=1e-13
    )
    xi = 0.4 - 0.7j
    assert spin_amplitude_oracle(xi, xi, 0.0, 6) == pytest.approx(1.0, abs=1e-13)


def test_spin_oracle_matches_closed_form():
    rng = np.random.default_rng(22)
    for _ in range(40):
        xi_i = complex(rng.normal(0, 0.9), rng.normal(0, 0.9))
        xi_f = complex(rng.normal(0, 0.9), rng.normal(0, 0.9))
        t_val = rng.uniform(0, 2 * math.pi)
        a = spin_amplitude_oracle(xi_i, xi_f, t_val, 3)
        b = exact_scs_amplitude(xi_i, xi_f, t_val, 3)
        assert abs(a - b) < 1e-12


def test_spin_oracle_dimension_guard():
    with pytest.raises(DimensionError):
        spin_amplitude_oracle(0, 0, 1.0, 501)


def test_ho_oracle_values():
    assert ho_amplitude_oracle(0, 0, 2.2, 1).value == pytest.approx(1.0, abs=1e-14)
    value, bound = ho_amplitude_oracle(1, 1, math.pi, 60)
    assert value == pytest.approx(math.exp(-2.0), abs=1e-12)
    assert bound < 1e-12
    value, _ = ho_amplitude_oracle(0.3, 0.2j, 1.0, 40)
    assert abs(value - exact_cs_amplitude(0.3, 0.2j, 1.0)) < 1e-10


def test_ho_oracle_truncation_guards():
    with pytest.raises(TruncationError):
        ho_amplitude_oracle(4.0, 0.1, 1.0, 20)  # |xi|^2 > n_max/4
    with pytest.raises(TruncationError):
        ho_amplitude_oracle(1.4, 1.4, 1.0, 8, tol=1e-12)


def test_ho_truncation_bound_monotone():
    bounds = [ho_amplitude_oracle(1.2, 1.0, 0.7, n).bound for n in (10, 20, 40, 80)]
    assert all(b2 < b1 for b1, b2 in zip(bounds, bounds[1:]))


@pytest.mark.parametrize("S", [0.5, 1, 4])
def test_propagator_unitarity(S):
    basis = SpinBasis(S)
    u = expm(1j * basis.sz * 1.37)
    assert np.max(np.abs(u.conj().T @ u - np.eye(basis.dimension))) < 1e-12


def test_composition_check_spin():
    assert composition_check(0, 0, 0.5, 0.5, model="spin", S=1) < 1e-9
    assert composition_check(0.3 + 0.1j, 0.2j, 0.4, 0.0, model="spin", S=2) < 1e-11
    assert composition_check(0.3, -0.2 + 0.4j, 0.8, 0.5, model="spin", S=2.5) < 1e-9


def test_composition_check_ho():
    assert composition_check(0.3, 0.1 + 0.2j, 0.3, 0.7, model="ho", n_max=40) < 1e-9


def test_composition_check_quadrature_guard():
    with pytest.raises(QuadratureError):
        composition_check(0.1, 0.1, 0.5, 0.5, model="spin", S=3, n_theta=2)
