import cmath
import math

import numpy as np
import pytest

from cspi.errors import PoleError
from cspi.states import (
    HOKernel,
    ModelParams,
    PhasePoint,
    SpherePoint,
    SpinKernel,
    check_kernel_partials,
    cs_overlap,
    ct_stationary_reference,
    exact_cs_amplitude,
    exact_scs_amplitude,
    integer_power,
    scs_overlap,
)


def test_cs_overlap_identity_cases():
    assert cs_overlap(0, 0) == pytest.approx(1.0)
    xi = 0.7 - 0.2j
    assert cs_overlap(xi, xi) == pytest.approx(1.0)


def test_cs_overlap_closed_form_value():
    # direct evaluation of the closed form at (1, 0)
    assert cs_overlap(1, 0) == pytest.approx(math.exp(-0.5), abs=1e-15)


def test_scs_overlap_values():
    assert scs_overlap(0.3 + 0.4j, 0.3 + 0.4j, 7.5) == pytest.approx(1.0)
    assert scs_overlap(0, 1, 0.5) == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-15)
    assert scs_overlap(0, 1 + 0j, 1) == pytest.approx(0.5, abs=1e-15)


def test_scs_overlap_rejects_pole():
    with pytest.raises(PoleError):
        scs_overlap(complex("inf"), 0.1, 1)


def test_exact_cs_amplitude_cases():
    assert exact_cs_amplitude(0, 0, 2.3) == pytest.approx(1.0)
    xi_i, xi_f = 0.4 + 0.2j, -0.1 + 0.6j
    assert exact_cs_amplitude(xi_i, xi_f, 0.0) == pytest.approx(
        cs_overlap(xi_f, xi_i), abs=1e-15
    )
    assert exact_cs_amplitude(1, 1, math.pi) == pytest.approx(
        math.exp(-2.0), abs=1e-15
    )


def test_exact_scs_amplitude_cases():
    t_val = 0.8
    assert exact_scs_amplitude(0, 0, t_val, 0.5) == pytest.approx(
        cmath.exp(0.5j * t_val), abs=1e-15
    )
    xi_i, xi_f = 0.4 - 0.1j, 0.2 + 0.3j
    assert exact_scs_amplitude(xi_i, xi_f, 0.0, 3) == pytest.approx(
        scs_overlap(xi_f, xi_i, 3), abs=1e-14
    )
    assert exact_scs_amplitude(1, 1, 2 * math.pi, 1) == pytest.approx(1.0, abs=1e-12)


def test_reference_curve_endpoints():
    xi_i, xi_f, t_tot = 0.3 + 0.5j, -0.2 + 0.1j, 1.7
    f0, b0 = ct_stationary_reference(0.0, xi_i, xi_f, t_tot)
    assert f0 == pytest.approx(xi_i)
    assert b0 == pytest.approx(xi_f.conjugate() * cmath.exp(-1j * t_tot))
    f1, b1 = ct_stationary_reference(t_tot, xi_i, xi_f, t_tot)
    assert f1 == pytest.approx(xi_i * cmath.exp(-1j * t_tot))
    assert b1 == pytest.approx(xi_f.conjugate())


def test_reference_curve_special_case_is_conjugate():
    # xi_F = xi_I e^{-iT}: the backward curve is the conjugate of the forward
    xi_i, t_tot = 0.6 + 0.2j, 1.3
    xi_f = xi_i * cmath.exp(-1j * t_tot)
    t = np.linspace(0.0, t_tot, 37)
    fwd, bwd = ct_stationary_reference(t, xi_i, xi_f, t_tot)
    assert np.max(np.abs(bwd - fwd.conj())) < 1e-14


@pytest.mark.parametrize("model", ["ho", "spin"])
def test_unitarity_symmetry(model):
    rng = np.random.default_rng(11)
    for _ in range(50):
        xi_i = complex(rng.normal(), rng.normal())
        xi_f = complex(rng.normal(), rng.normal())
        t_val = rng.uniform(0, 6)
        if model == "ho":
            a = exact_cs_amplitude(xi_i, xi_f, t_val)
            b = exact_cs_amplitude(xi_f, xi_i, -t_val)
        else:
            a = exact_scs_amplitude(xi_i, xi_f, t_val, 2.5)
            b = exact_scs_amplitude(xi_f, xi_i, -t_val, 2.5)
        assert abs(a - b.conjugate()) < 1e-12


def test_amplitudes_bounded_by_one():
    rng = np.random.default_rng(12)
    for _ in range(200):
        xi_i = complex(rng.normal(), rng.normal())
        xi_f = complex(rng.normal(), rng.normal())
        t_val = rng.uniform(0, 10)
        assert abs(exact_cs_amplitude(xi_i, xi_f, t_val)) <= 1.0 + 1e-12
        assert abs(exact_scs_amplitude(xi_i, xi_f, t_val, 4)) <= 1.0 + 1e-12


def test_riemann_round_trip_grid():
    rng = np.random.default_rng(13)
    theta = rng.uniform(1e-3, math.pi - 1e-3, size=1000)
    phi = rng.uniform(0, 2 * math.pi, size=1000)
    for th, ph in zip(theta, phi):
        point = SpherePoint(theta=th, phi=ph)
        back = SpherePoint.from_xi(point.xi)
        assert back.theta == pytest.approx(th, abs=1e-12)
        assert cmath.exp(1j * back.phi) == pytest.approx(cmath.exp(1j * ph), abs=1e-12)


def test_phase_point_round_trip():
    rng = np.random.default_rng(14)
    for hbar in (1.0, 0.25, 3.0):
        for _ in range(100):
            p, q = rng.normal(), rng.normal()
            point = PhasePoint(p=p, q=q, hbar=hbar)
            back = PhasePoint.from_xi(point.xi, hbar=hbar)
            assert back.p == pytest.approx(p, rel=1e-14, abs=1e-14)
            assert back.q == pytest.approx(q, rel=1e-14, abs=1e-14)


def test_sphere_point_rejects_south_pole():
    with pytest.raises(PoleError):
        SpherePoint(theta=math.pi, phi=0.0)


@pytest.mark.parametrize(
    "kernel", [HOKernel(), HOKernel(hbar=0.5), SpinKernel(3), SpinKernel(7.5, hbar=2.0)]
)
def test_kernel_partials_match_finite_differences(kernel):
    rng = np.random.default_rng(15)
    for _ in range(10):
        xibar = complex(rng.normal(0, 0.4), rng.normal(0, 0.4))
        xi = complex(rng.normal(0, 0.4), rng.normal(0, 0.4))
        worst = check_kernel_partials(kernel, xibar, xi, step=1e-5, tol=1e-6)
        assert worst < 1e-6


def test_builtin_kernel_values():
    ho = HOKernel(hbar=2.0)
    assert ho.eval(0.3 - 0.1j, 0.2j) == pytest.approx(2.0 * (0.3 - 0.1j) * 0.2j)
    spin = SpinKernel(5, hbar=1.0)
    w = (0.2 + 0.1j) * 0.3
    assert spin.eval(0.2 + 0.1j, 0.3) == pytest.approx(-5.0 * (1 - w) / (1 + w))


def test_model_params_validation():
    with pytest.raises(ValueError):
        ModelParams(hbar=-1.0)
    with pytest.raises(ValueError):
        ModelParams(spin_S=0.7)
    params = ModelParams(spin_S=2.5)
    assert isinstance(params.kernel, SpinKernel)
    assert ModelParams().kernel.__class__ is HOKernel


def test_integer_power_branches():
    rng = np.random.default_rng(16)
    for _ in range(50):
        z = complex(rng.normal(0.2, 0.3), rng.normal(0, 0.3))
        # product branch vs principal exp-log agree away from the cut
        direct = integer_power(1 + z, 40)
        via_log = np.exp(40 * np.log(1 + z))
        assert abs(direct - via_log) / abs(via_log) < 1e-12
    big = integer_power(1.1 + 0.05j, 130)  # falls back to exp-log
    assert abs(big - np.exp(130 * np.log(1.1 + 0.05j))) / abs(big) < 1e-12
    with pytest.raises(ValueError):
        integer_power(1.0, -2)
