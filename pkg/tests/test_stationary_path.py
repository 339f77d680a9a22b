import cmath
import math

import numpy as np
import pytest

from cspi.discrete_action import TimeGrid, dtcs_action, dtscs_action
from cspi.errors import ConvergenceError, DegenerateError, SingularBVPError
from cspi.states import HOKernel, SpinKernel, exact_scs_amplitude
from cspi.stationary_path import (
    action_gradient_fd,
    solve_dtps_classical,
    solve_general_newton,
    solve_ho_dtcs,
    solve_spin_dtscs,
    spin_reduced_residual,
    stationary_action_spin,
)


def test_ho_boundary_and_null_solution():
    grid = TimeGrid(N=50, T=1.0)
    xi_i, xi_f = 0.4 + 0.1j, -0.2 + 0.3j
    sol = solve_ho_dtcs(grid, xi_i, xi_f)
    assert sol.path.fwd[0] == xi_i
    assert sol.path.bwd[-1] == xi_f.conjugate()
    assert sol.residual_inf == 0.0  # cumulative products satisfy the recursion exactly
    null = solve_ho_dtcs(grid, 0.0, 0.3)
    assert np.all(null.path.fwd[:-1] == 0.0)


def test_ho_converges_to_reference_curve():
    n = 10**5
    grid = TimeGrid(N=n, T=1.0)
    xi_i, xi_f = 0.7 - 0.2j, 0.1 + 0.4j
    sol = solve_ho_dtcs(grid, xi_i, xi_f)
    t = grid.times[:-1]
    ref = xi_i * np.exp(-1j * t)
    assert np.max(np.abs(sol.path.fwd[:-1] - ref)) < 10.0 / n


def test_spin_trivial_endpoints():
    grid = TimeGrid(N=40, T=1.0)
    sol = solve_spin_dtscs(grid, 0.0, 0.0, 5)
    assert np.all(sol.path.fwd[:-1] == 0.0)
    assert sol.conserved.R == 0.0
    assert sol.conserved.P == 0.0


def test_spin_special_case_nearly_conjugate():
    # xi_F = xi_I e^{-iT}: real classical precession, honest up to O(eps)
    n, t_val = 4000, 1.0
    xi_i = 0.5 + 0.2j
    xi_f = xi_i * cmath.exp(-1j * t_val)
    sol = solve_spin_dtscs(TimeGrid(N=n, T=t_val), xi_i, xi_f, 3)
    dev = np.max(np.abs(sol.path.bwd[1:-1] - sol.path.fwd[1:-1].conj()))
    assert dev < 20.0 * t_val / n


def test_spin_conserved_value_matches_reference():
    n, t_val = 10**4, 1.0
    xi_i, xi_f = 0.5, 0.4j
    sol = solve_spin_dtscs(TimeGrid(N=n, T=t_val), xi_i, xi_f, 10)
    r_ref = complex(xi_f).conjugate() * xi_i * cmath.exp(-1j * t_val)
    assert abs(sol.conserved.R - r_ref) < 10.0 / n
    assert sol.residual_inf < 1e-9
    # P = (1 + i eps) R + O(eps^2)
    eps = t_val / n
    assert abs(sol.conserved.P - (1 + 1j * eps) * sol.conserved.R) < 10.0 * eps**2
    assert len(sol.conserved.per_step_R) == n - 1
    assert len(sol.conserved.per_step_P) == n


def test_spin_degenerate_guard():
    # 1 + conj(xi_F) xi_I e^{-iT} = 0
    t_val = 1.0
    xi_i = 1.2
    xi_f = (-1.0 / (xi_i * cmath.exp(-1j * t_val))).conjugate()
    with pytest.raises(DegenerateError):
        solve_spin_dtscs(TimeGrid(N=100, T=t_val), xi_i, xi_f, 3)


def test_newton_matches_ho_closed_form():
    grid = TimeGrid(N=200, T=1.0)
    xi_i, xi_f = 0.4 + 0.3j, -0.1 - 0.2j
    newton = solve_general_newton(grid, HOKernel(), xi_i, xi_f, mode="cs")
    closed = solve_ho_dtcs(grid, xi_i, xi_f)
    assert np.max(np.abs(newton.path.fwd - closed.path.fwd)) < 1e-9
    assert np.max(np.abs(newton.path.bwd - closed.path.bwd)) < 1e-9


def test_newton_matches_spin_conserved_solve():
    s_val = 6.0
    grid = TimeGrid(N=150, T=1.0)
    xi_i, xi_f = 0.5 - 0.1j, 0.3 + 0.2j
    newton = solve_general_newton(
        grid, SpinKernel(s_val), xi_i, xi_f, mode="scs", S=s_val
    )
    conserved = solve_spin_dtscs(grid, xi_i, xi_f, s_val)
    assert np.max(np.abs(newton.path.fwd - conserved.path.fwd)) < 1e-8
    assert np.max(np.abs(newton.path.bwd - conserved.path.bwd)) < 1e-8


def test_newton_two_step_is_linear_problem():
    grid = TimeGrid(N=2, T=0.8)
    sol = solve_general_newton(grid, HOKernel(), 0.9 + 0.2j, -0.4 + 0.6j, mode="cs")
    assert sol.newton_iterations == 1
    assert sol.residual_inf < 1e-14


def test_newton_convergence_error_reports_best():
    grid = TimeGrid(N=50, T=1.0)
    with pytest.raises(ConvergenceError) as err:
        solve_general_newton(
            grid, SpinKernel(2), 0.5, 0.2j, mode="scs", S=2, max_iter=0
        )
    assert err.value.best_residual is not None


def test_stationary_action_spin_trivial():
    grid = TimeGrid(N=30, T=1.4)
    sol = solve_spin_dtscs(grid, 0.0, 0.0, 8)
    parts = stationary_action_spin(sol, 8)
    assert parts.total == pytest.approx(1j * 8 * grid.T, abs=1e-13)
    assert parts.discontinuity_sum() == 0
    assert parts.log_term == 0


def test_stationary_action_spin_parts():
    n, t_val, s_val = 10**4, 1.0, 1.0
    xi_i, xi_f = 0.3 - 0.2j, 0.25 + 0.15j
    sol = solve_spin_dtscs(TimeGrid(N=n, T=t_val), xi_i, xi_f, s_val)
    parts = stationary_action_spin(sol, s_val)
    # interior sum alone approaches i S T
    assert abs(parts.interior - 1j * s_val * t_val) < 10.0 / n
    # discontinuity terms approach S ln[(1+R)^4 / ((1+|xi_F|^2)(1+|xi_I|^2))]
    r_val = sol.conserved.R
    target = s_val * (
        4.0 * cmath.log(1 + r_val)
        - math.log((1 + abs(xi_f) ** 2) * (1 + abs(xi_i) ** 2))
    )
    assert abs(parts.discontinuity_sum() - target) < 10.0 / n
    # parts sum to the full action evaluated on the path, and the total
    # reproduces the closed-form amplitude
    assert abs(parts.total - 1j * sol.action.total) < 1e-10
    amp = cmath.exp(parts.total)
    exact = exact_scs_amplitude(xi_i, xi_f, t_val, s_val)
    assert abs(amp / exact - 1.0) < 10.0 / n


def test_action_gradient_vanishes_at_solutions():
    grid = TimeGrid(N=60, T=1.0)
    ho = solve_ho_dtcs(grid, 0.4 + 0.2j, -0.3 + 0.1j)
    kernel = HOKernel()
    assert action_gradient_fd(ho.path, lambda p: dtcs_action(p, kernel).total) < 1e-7
    s_val = 4.0
    spin = solve_spin_dtscs(grid, 0.4, 0.3j, s_val)
    spin_kernel = SpinKernel(s_val)
    grad = action_gradient_fd(
        spin.path, lambda p: dtscs_action(p, spin_kernel, s_val).total
    )
    assert grad < 1e-6


def test_endpoint_discontinuity_persists():
    xi_i, xi_f, t_val = 0.5 + 0.1j, -0.2 + 0.4j, 1.0
    solver = lambda n: solve_ho_dtcs(TimeGrid(N=n, T=t_val), xi_i, xi_f)
    d3 = solver(10**3).final_discontinuity
    d4 = solver(10**4).final_discontinuity
    assert d4 > 0.05  # nonzero limit for generic endpoints
    assert abs(d4 - d3) / d4 < 0.01
    limit = abs(xi_f - xi_i * cmath.exp(-1j * t_val))
    assert d4 == pytest.approx(limit, rel=1e-3)


def test_spin_reduced_residual_on_perturbed_path():
    grid = TimeGrid(N=100, T=1.0)
    sol = solve_spin_dtscs(grid, 0.5, 0.2 + 0.2j, 5)
    assert spin_reduced_residual(sol.path) < 1e-12
    fwd = sol.path.fwd.copy()
    fwd[50] += 1e-3
    from cspi.discrete_action import DiscretePath

    assert spin_reduced_residual(DiscretePath(grid, fwd, sol.path.bwd)) > 1e-6


def test_dtps_zero_path_and_sine_solution():
    grid = TimeGrid(N=100, T=1.0)
    sol = solve_dtps_classical(grid, 0.0, 0.0)
    assert np.max(np.abs(sol.path.q)) == 0.0
    n = 2000
    grid = TimeGrid(N=n, T=math.pi / 2.0)
    sol = solve_dtps_classical(grid, 0.0, 1.0)
    t = grid.times
    assert np.max(np.abs(sol.path.q - np.sin(t))) < 5.0 / n


def test_dtps_residual_small():
    grid = TimeGrid(N=10**4, T=1.0)
    sol = solve_dtps_classical(grid, 0.2, -0.7)
    assert sol.residual_inf < 1e-12


@pytest.mark.parametrize("k", [1, 2])
def test_dtps_conjugate_point_degeneracy(k):
    with pytest.raises(SingularBVPError):
        solve_dtps_classical(TimeGrid(N=500, T=k * math.pi), 0.0, 1.0)


def test_dtps_general_newton_matches_builtin():
    from cspi.stationary_path import _HOPhaseHamiltonian

    grid = TimeGrid(N=300, T=1.2)
    builtin = solve_dtps_classical(grid, 0.1, 0.8)
    general = solve_dtps_classical(grid, 0.1, 0.8, hamiltonian=_HOPhaseHamiltonian())
    assert np.max(np.abs(builtin.path.q - general.path.q)) < 1e-9
    assert np.max(np.abs(builtin.path.p - general.path.p)) < 1e-9
