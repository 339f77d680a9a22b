import cmath
import math

import numpy as np
import pytest

from cspi.discrete_action import (
    DiscretePath,
    PhasePath,
    TimeGrid,
    dtcs_action,
    dtps_action,
    dtscs_action,
    dtscs_theta_phi_parts,
    path_from_csv,
    path_to_csv,
)
from cspi.errors import BranchError, PoleError, ShapeError
from cspi.states import HOKernel, SpinKernel, cs_overlap, scs_overlap
from cspi.stationary_path import solve_ho_dtcs, solve_spin_dtscs


def random_path(rng, n, t_total=1.0, scale=0.5, honest=False):
    grid = TimeGrid(N=n, T=t_total)
    fwd = scale * (rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1))
    if honest:
        return DiscretePath(grid, fwd)
    bwd = scale * (rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1))
    return DiscretePath(grid, fwd, bwd)


def test_time_grid_basics():
    grid = TimeGrid(N=4, T=2.0)
    assert grid.eps == 0.5
    assert np.allclose(grid.times, [0, 0.5, 1.0, 1.5, 2.0])
    TimeGrid(N=1, T=0.0)  # zero-time overlap limit is allowed
    with pytest.raises(ValueError):
        TimeGrid(N=0, T=1.0)


def test_path_shape_checks():
    grid = TimeGrid(N=4, T=1.0)
    with pytest.raises(ShapeError):
        DiscretePath(grid, np.zeros(3, dtype=complex))
    with pytest.raises(ShapeError):
        DiscretePath(grid, np.zeros(5, dtype=complex), np.zeros(2, dtype=complex))
    # interior-only backward data is accepted and padded by the conventions
    path = DiscretePath(grid, np.ones(5, dtype=complex), np.full(3, 2.0 + 0j))
    assert path.bwd[0] == 1.0
    assert path.bwd[-1] == 1.0
    assert np.all(path.bwd[1:-1] == 2.0)


def test_dtcs_decomposition_identity_random_paths():
    rng = np.random.default_rng(31)
    kernel = HOKernel()
    for k in range(100):
        path = random_path(rng, int(rng.integers(1, 30)), honest=(k % 2 == 0))
        br = dtcs_action(path, kernel)
        assert abs(br.total - br.parts_sum()) <= 1e-12 * max(1.0, abs(br.total))


def test_dtcs_eps_term_sign_on_honest_paths():
    rng = np.random.default_rng(32)
    for _ in range(30):
        path = random_path(rng, 12, honest=True)
        br = dtcs_action(path, HOKernel())
        val = 1j * br.eps_term  # (i/hbar) * eps-term
        assert abs(val.imag) < 1e-12
        assert val.real <= 1e-12


def test_dtcs_global_phase_invariance():
    rng = np.random.default_rng(33)
    path = random_path(rng, 15)
    alpha = 0.83
    rot = DiscretePath(
        path.grid,
        path.fwd * cmath.exp(1j * alpha),
        path.bwd * cmath.exp(-1j * alpha),
    )
    a = dtcs_action(path, HOKernel())
    b = dtcs_action(rot, HOKernel())
    assert abs(a.total - b.total) < 1e-12 * max(1.0, abs(a.total))


def test_dtcs_trivial_and_zero_time():
    grid = TimeGrid(N=6, T=0.9)
    path = DiscretePath(grid, np.zeros(7, dtype=complex))
    assert dtcs_action(path, HOKernel()).total == 0
    xi_i, xi_f = 0.4 + 0.2j, -0.3 + 0.5j
    grid0 = TimeGrid(N=1, T=0.0)
    path0 = DiscretePath(grid0, np.array([xi_i, xi_f]))
    total = dtcs_action(path0, HOKernel()).total
    assert cmath.exp(1j * total) == pytest.approx(cs_overlap(xi_f, xi_i), abs=1e-14)


def test_dtcs_on_stationary_path_matches_exponent():
    n = 10**4
    t_val = 1.0
    xi_i, xi_f = 0.3 + 0.1j, 0.2 - 0.4j
    sol = solve_ho_dtcs(TimeGrid(N=n, T=t_val), xi_i, xi_f)
    i_total = 1j * sol.action.total
    target = -0.5 * (abs(xi_f) ** 2 + abs(xi_i) ** 2) + xi_f.conjugate() * xi_i * cmath.exp(-1j * t_val)
    assert abs(i_total - target) < 5.0 / n


def test_dtscs_constant_zero_path():
    s_val = 3.0
    grid = TimeGrid(N=11, T=1.4)
    path = DiscretePath(grid, np.zeros(12, dtype=complex))
    br = dtscs_action(path, SpinKernel(s_val), s_val)
    assert 1j * br.total == pytest.approx(1j * s_val * grid.T, abs=1e-13)


def test_dtscs_zero_time_overlap():
    xi_i, xi_f, s_val = 0.4 - 0.2j, 0.1 + 0.3j, 2.5
    grid = TimeGrid(N=1, T=0.0)
    path = DiscretePath(grid, np.array([xi_i, xi_f]))
    total = dtscs_action(path, SpinKernel(s_val), s_val).total
    assert cmath.exp(1j * total) == pytest.approx(
        scs_overlap(xi_f, xi_i, s_val), abs=1e-13
    )


def test_dtscs_stationary_action_vs_closed_form():
    n, t_val, s_val = 10**4, 1.0, 20.0
    xi_i, xi_f = 0.35 + 0.1j, 0.25 - 0.3j
    sol = solve_spin_dtscs(TimeGrid(N=n, T=t_val), xi_i, xi_f, s_val)
    r_val = xi_f.conjugate() * xi_i * cmath.exp(-1j * t_val)
    target = s_val * cmath.log(
        (1 + r_val) ** 2 / ((1 + abs(xi_f) ** 2) * (1 + abs(xi_i) ** 2))
    ) + 1j * s_val * t_val
    diff = 1j * sol.action.total - target
    diff -= 2j * math.pi * round(diff.imag / (2 * math.pi))  # log winding
    assert abs(diff) < 10.0 / n


def test_dtscs_branch_guard():
    grid = TimeGrid(N=3, T=0.3)
    fwd = np.array([0.0, 1.0, 1.0, 0.5], dtype=complex)
    bwd = np.array([5.0, -1.9], dtype=complex)
    path = DiscretePath(grid, fwd, bwd)
    with pytest.raises(BranchError):
        dtscs_action(path, SpinKernel(1), 1)


def test_dtscs_pole_guard():
    grid = TimeGrid(N=3, T=0.3)
    fwd = np.array([0.0, 1.0, 1.0, 0.5], dtype=complex)
    bwd = np.array([5.0, -1.0], dtype=complex)  # 1 + xibar_2 xi_1 = 0
    path = DiscretePath(grid, fwd, bwd)
    with pytest.raises(PoleError):
        dtscs_action(path, SpinKernel(1), 1)


def test_dtscs_expanded_mode_parts_sum():
    rng = np.random.default_rng(34)
    s_val = 4.0
    path = random_path(rng, 9, scale=0.3)
    br = dtscs_action(path, SpinKernel(s_val), s_val, mode="second-order-expanded")
    assert br.mode == "second-order-expanded"
    assert abs(br.total - br.parts_sum()) <= 1e-12 * max(1.0, abs(br.total))


def test_eps_term_halves_on_stationary_path():
    xi_i, xi_f, t_val = 0.5 + 0.2j, -0.3 + 0.4j, 1.0
    vals = []
    for n in (2000, 4000):
        sol = solve_ho_dtcs(TimeGrid(N=n, T=t_val), xi_i, xi_f)
        vals.append(abs(sol.action.eps_term))
    ratio = vals[1] / vals[0]
    assert 0.4 <= ratio <= 0.6


def test_theta_phi_parts_constant_path():
    theta = np.full(6, 1.1)
    phi = np.full(6, 0.4)
    parts = dtscs_theta_phi_parts(theta, phi, 3)
    assert all(abs(p) == 0 for p in parts)


def test_theta_phi_two_step_example():
    delta = 0.01
    eps1, eps2, can = dtscs_theta_phi_parts(
        [math.pi / 2, math.pi / 2], [0.0, delta], 1
    )
    # (i/hbar) eps1 = -(S/4) delta^2 with sin(pi/2) = 1
    assert eps1 == pytest.approx((1.0 / 1j) * (-0.25 * delta**2), abs=1e-15)
    assert eps2 == 0
    # canonical term: i S dphi (cos(pi/2) - 1)
    assert 1j * can == pytest.approx(1j * delta * (0.0 - 1.0), abs=1e-15)


def test_theta_phi_pole_guard():
    with pytest.raises(PoleError):
        dtscs_theta_phi_parts([0.0, 0.1], [0.0, 0.1], 1)
    with pytest.raises(PoleError):
        dtscs_theta_phi_parts([1.0, math.pi], [0.0, 0.1], 1)


def test_dtps_zero_and_single_step():
    grid = TimeGrid(N=5, T=1.0)
    path = PhasePath(grid, np.zeros(5), np.zeros(6))
    assert dtps_action(path, lambda p, q: 0.5 * (p**2 + q**2)) == pytest.approx(0.0)
    for hbar in (1.0, 0.3):
        grid1 = TimeGrid(N=1, T=0.25)
        path1 = PhasePath(grid1, np.array([1.0]), np.array([0.0, 0.0]))
        h = lambda p, q: 0.5 * (p**2 + q**2 - hbar)
        assert dtps_action(path1, h) == pytest.approx(
            -grid1.eps * (1.0 - hbar) / 2.0, abs=1e-15
        )


def test_dtps_classical_path_matches_continuum_action():
    from cspi.stationary_path import solve_dtps_classical

    # q(t) = sin t on [0, pi/2]: continuum action = hbar * pi / 4 with hbar = 1
    n = 4000
    grid = TimeGrid(N=n, T=math.pi / 2.0)
    sol = solve_dtps_classical(grid, 0.0, 1.0)
    action = dtps_action(sol.path, lambda p, q: 0.5 * (p**2 + q**2 - 1.0))
    assert action == pytest.approx(math.pi / 4.0, abs=20.0 / n)


def test_path_csv_round_trip():
    rng = np.random.default_rng(35)
    path = random_path(rng, 7, t_total=1.3)
    text = path_to_csv(path)
    back = path_from_csv(text)
    assert back.grid.N == path.grid.N
    assert back.grid.T == pytest.approx(path.grid.T)
    assert np.allclose(back.fwd, path.fwd)
    assert np.allclose(back.bwd, path.bwd)
