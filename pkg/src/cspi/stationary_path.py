"""Stationary points of the discrete actions.

The stationary-action equations form 2(N-1) conditions on the interior
forward/backward labels.  For the oscillator the solution is the closed
form xi_n = (1 - i eps)^n xi_I, xibar_n = (1 - i eps)^(N-n) conj(xi_F);
for the constant-field spin the step-invariant bilinears

    P_n = xibar_n xi_{n-1},   R_n = xibar_n xi_n

reduce the nonlinear system to one scalar fixed-point equation for R.  A
damped Newton solver covers general kernels.  Stationary paths are
discontinuous at the endpoints for generic boundary data; those jumps are
first-class outputs.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .discrete_action import (
    ActionBreakdown,
    DiscretePath,
    PhasePath,
    TimeGrid,
    dtcs_action,
    dtscs_action,
    dtps_action,
)
from .errors import ConvergenceError, DegenerateError, SingularBVPError
from .states import HOKernel, SpinKernel, ct_stationary_reference

__all__ = [
    "ConservedPair",
    "StationarySolution",
    "ClassicalPhaseSolution",
    "SpinActionParts",
    "solve_ho_dtcs",
    "solve_spin_dtscs",
    "solve_general_newton",
    "stationary_action_spin",
    "solve_dtps_classical",
    "action_gradient_fd",
    "ho_phase_trace",
    "spin_sphere_trace",
]


@dataclass(frozen=True)
class ConservedPair:
    """Step-invariant bilinears of the spin stationary path."""

    R: complex
    P: complex
    per_step_R: np.ndarray  # R_n = xibar_n xi_n, n = 1..N-1
    per_step_P: np.ndarray  # P_n = xibar_n xi_{n-1}, n = 1..N


@dataclass(frozen=True)
class StationarySolution:
    path: DiscretePath
    residual_inf: float
    action: ActionBreakdown
    conserved: ConservedPair | None = None
    newton_iterations: int = 0

    @property
    def initial_discontinuity(self) -> float:
        return self.path.initial_discontinuity()

    @property
    def final_discontinuity(self) -> float:
        return self.path.final_discontinuity()


@dataclass(frozen=True)
class ClassicalPhaseSolution:
    path: PhasePath
    residual_inf: float
    action: complex


def _cs_residual(path: DiscretePath, kernel, hbar):
    """Residuals of the compact first-order difference equations (both sets)."""
    xi, xb, eps = path.fwd, path.bwd, path.grid.eps
    n = path.grid.N
    if n < 2:
        return np.zeros(0, dtype=complex)
    f1 = (
        xi[1:n]
        - xi[: n - 1]
        + (1j / hbar) * eps * np.asarray(kernel.d_dxibar(xb[1:n], xi[: n - 1]))
    )
    f2 = (
        xb[2 : n + 1]
        - xb[1:n]
        - (1j / hbar) * eps * np.asarray(kernel.d_dxi(xb[2 : n + 1], xi[1:n]))
    )
    return np.concatenate([f1, f2])


def _scs_residual(path: DiscretePath, kernel, S, hbar):
    xi, xb, eps = path.fwd, path.bwd, path.grid.eps
    n = path.grid.N
    if n < 2:
        return np.zeros(0, dtype=complex)
    d1 = 1.0 + xb[1:n] * xi[: n - 1]
    e1 = 1.0 + xb[1:n] * xi[1:n]
    f1 = 2.0 * S * (xi[1:n] - xi[: n - 1]) / (d1 * e1) + (
        1j / hbar
    ) * eps * np.asarray(kernel.d_dxibar(xb[1:n], xi[: n - 1]))
    d2 = 1.0 + xb[2 : n + 1] * xi[1:n]
    e2 = 1.0 + xb[1:n] * xi[1:n]
    f2 = 2.0 * S * (xb[2 : n + 1] - xb[1:n]) / (d2 * e2) - (
        1j / hbar
    ) * eps * np.asarray(kernel.d_dxi(xb[2 : n + 1], xi[1:n]))
    return np.concatenate([f1, f2])


def spin_reduced_residual(path: DiscretePath) -> float:
    """Max violation of the constant-field spin difference equations.

    Checks (xi_n - xi_{n-1})/(1 + xibar_n xi_n) = -i eps xi_{n-1}/(1 + P_n)
    for n = 1..N-1 and its backward partner for n = 2..N.
    """
    xi, xb, eps = path.fwd, path.bwd, path.grid.eps
    n = path.grid.N
    if n < 2:
        return 0.0
    r1 = (xi[1:n] - xi[: n - 1]) / (1.0 + xb[1:n] * xi[1:n]) + 1j * eps * xi[
        : n - 1
    ] / (1.0 + xb[1:n] * xi[: n - 1])
    r2 = (xb[2 : n + 1] - xb[1:n]) / (1.0 + xb[1:n] * xi[1:n]) - 1j * eps * xb[
        2 : n + 1
    ] / (1.0 + xb[2 : n + 1] * xi[1:n])
    return float(max(np.max(np.abs(r1)), np.max(np.abs(r2))))


def solve_ho_dtcs(grid: TimeGrid, xi_I, xi_F, hbar=1.0) -> StationarySolution:
    """Closed-form oscillator stationary path on the discrete grid.

    xi_n = (1 - i eps)^n xi_I and xibar_n = (1 - i eps)^(N-n) conj(xi_F);
    built by cumulative products, so the difference-equation residuals sit
    at the rounding floor (~1e-16) independent of N.
    """
    n, eps = grid.N, grid.eps
    xi_I = complex(xi_I)
    xi_F = complex(xi_F)
    factor = 1.0 - 1j * eps
    fwd = np.empty(n + 1, dtype=complex)
    fwd[0] = xi_I
    for k in range(1, n):
        fwd[k] = factor * fwd[k - 1]
    fwd[n] = xi_F
    bwd = np.empty(n + 1, dtype=complex)
    bwd[n] = xi_F.conjugate()
    for k in range(n - 1, 0, -1):
        bwd[k] = factor * bwd[k + 1]
    bwd[0] = xi_I.conjugate()
    path = DiscretePath(grid, fwd, bwd)
    kernel = HOKernel(hbar)
    residual = _cs_residual(path, kernel, hbar)
    res_inf = float(np.max(np.abs(residual))) if residual.size else 0.0
    action = dtcs_action(path, kernel, hbar)
    return StationarySolution(path=path, residual_inf=res_inf, action=action)


def _spin_quadratic_root(R, eps):
    """Root of P^2 + (1 - R - i eps (1+R)) P - R = 0 closer to R."""
    b = 1.0 - R - 1j * eps * (1.0 + R)
    disc = cmath.sqrt(b * b + 4.0 * R)
    roots = ((-b + disc) / 2.0, (-b - disc) / 2.0)
    return min(roots, key=lambda p: abs(p - R))


def _spin_step_factor(R, eps):
    P = _spin_quadratic_root(R, eps)
    if abs(1.0 + P) < 1e-12:
        raise DegenerateError("1 + P vanished while solving for the conserved pair")
    return 1.0 - 1j * eps * (1.0 + R) / (1.0 + P), P


def solve_spin_dtscs(
    grid: TimeGrid, xi_I, xi_F, S, hbar=1.0, polish="auto", tol=1e-9
) -> StationarySolution:
    """Constant-field spin stationary path via the conserved pair (R, P).

    The interior equations collapse to xi_n = g xi_{n-1} and
    xibar_n = g xibar_{n+1} with g = 1 - i eps (1+R)/(1+P), where P solves a
    quadratic in terms of R and R itself solves the scalar consistency
    condition R = conj(xi_F) xi_I g(R)^N.  The fixed point is contracting
    (|dPhi/dR| = O(T eps)), so plain iteration reaches rounding level in a
    few steps; an optional Newton polish of the full nonlinear system runs
    only if the reduced residual misses ``tol``.
    """
    n, eps = grid.N, grid.eps
    xi_I = complex(xi_I)
    xi_F = complex(xi_F)
    w = xi_F.conjugate() * xi_I
    r0 = w * cmath.exp(-1j * grid.T)
    if abs(1.0 + r0) < 1e-8:
        raise DegenerateError("1 + conj(xi_F) xi_I e^{-iT} is numerically zero")

    R = r0
    P = R
    for _ in range(200):
        g, P = _spin_step_factor(R, eps)
        r_new = w * g**n
        if abs(1.0 + r_new) < 1e-8:
            raise DegenerateError("conserved R drifted onto 1 + R = 0")
        if abs(r_new - R) <= 1e-16 * (1.0 + abs(r_new)):
            R = r_new
            break
        R = r_new
    g, P = _spin_step_factor(R, eps)

    fwd = np.empty(n + 1, dtype=complex)
    fwd[0] = xi_I
    for k in range(1, n):
        fwd[k] = g * fwd[k - 1]
    fwd[n] = xi_F
    bwd = np.empty(n + 1, dtype=complex)
    bwd[n] = xi_F.conjugate()
    for k in range(n - 1, 0, -1):
        bwd[k] = g * bwd[k + 1]
    bwd[0] = xi_I.conjugate()
    path = DiscretePath(grid, fwd, bwd)

    res_inf = spin_reduced_residual(path)
    iterations = 0
    if polish is True or (polish == "auto" and res_inf > tol):
        kernel = SpinKernel(S, hbar)
        sol = solve_general_newton(
            grid,
            kernel,
            xi_I,
            xi_F,
            mode="scs",
            S=S,
            hbar=hbar,
            initial=path,
            tol=min(tol, 1e-10),
        )
        path = sol.path
        iterations = sol.newton_iterations
        res_inf = spin_reduced_residual(path)

    per_step_r = path.bwd[1:n] * path.fwd[1:n]
    per_step_p = path.bwd[1:] * path.fwd[:-1]
    conserved = ConservedPair(
        R=complex(R), P=complex(P), per_step_R=per_step_r, per_step_P=per_step_p
    )
    action = dtscs_action(path, SpinKernel(S, hbar), S, hbar, mode="exact")
    return StationarySolution(
        path=path,
        residual_inf=res_inf,
        action=action,
        conserved=conserved,
        newton_iterations=iterations,
    )


def _newton_residual(mode, path, kernel, S, hbar):
    if mode == "cs":
        return _cs_residual(path, kernel, hbar)
    return _scs_residual(path, kernel, S, hbar)


def _newton_jacobian_bands(mode, path, kernel, S, hbar):
    """Tridiagonal Jacobian in the interleaved ordering.

    Unknowns [xibar_1, xi_1, xibar_2, xi_2, ...]; rows alternate the
    forward equation F1_n and the backward equation F2_n.  Returns the
    (3, 2(N-1)) band matrix for scipy.linalg.solve_banded.
    """
    xi, xb, eps = path.fwd, path.bwd, path.grid.eps
    n = path.grid.N
    m = 2 * (n - 1)
    s = 1j * eps / hbar
    diag = np.zeros(m, dtype=complex)
    sup = np.zeros(m, dtype=complex)  # entries a[r, r+1] stored at sup[r+1]
    sub = np.zeros(m, dtype=complex)  # entries a[r, r-1] stored at sub[r-1]

    xb_n = xb[1:n]
    xi_nm1 = xi[: n - 1]
    xi_n = xi[1:n]
    xb_np1 = xb[2 : n + 1]

    h11 = np.asarray(kernel.d2_dxibar2(xb_n, xi_nm1), dtype=complex)
    h12 = np.asarray(kernel.d2_dxibar_dxi(xb_n, xi_nm1), dtype=complex)
    h21 = np.asarray(kernel.d2_dxibar_dxi(xb_np1, xi_n), dtype=complex)
    h22 = np.asarray(kernel.d2_dxi2(xb_np1, xi_n), dtype=complex)

    if mode == "cs":
        f1_dxb = s * h11
        f1_dxi = np.ones(n - 1, dtype=complex)
        f1_dxim1 = -1.0 + s * h12
        f2_dxbp1 = 1.0 - s * h21
        f2_dxb = -np.ones(n - 1, dtype=complex)
        f2_dxi = -s * h22
    else:
        d1 = 1.0 + xb_n * xi_nm1
        e1 = 1.0 + xb_n * xi_n
        delta1 = xi_n - xi_nm1
        f1_dxi = 2.0 * S * (1.0 / (d1 * e1) - delta1 * xb_n / (d1 * e1**2))
        f1_dxim1 = (
            2.0 * S * (-1.0 / (d1 * e1) - delta1 * xb_n / (d1**2 * e1)) + s * h12
        )
        f1_dxb = (
            -2.0 * S * delta1 * (xi_nm1 / (d1**2 * e1) + xi_n / (d1 * e1**2))
            + s * h11
        )
        d2 = 1.0 + xb_np1 * xi_n
        e2 = 1.0 + xb_n * xi_n
        delta2 = xb_np1 - xb_n
        f2_dxbp1 = 2.0 * S * (1.0 / (d2 * e2) - delta2 * xi_n / (d2**2 * e2)) - s * h21
        f2_dxb = 2.0 * S * (-1.0 / (d2 * e2) - delta2 * xi_n / (d2 * e2**2))
        f2_dxi = (
            -2.0 * S * delta2 * (xb_np1 / (d2**2 * e2) + xb_n / (d2 * e2**2))
            - s * h22
        )

    rows_f1 = 2 * np.arange(n - 1)
    rows_f2 = rows_f1 + 1
    diag[rows_f1] = f1_dxb
    diag[rows_f2] = f2_dxi
    sup[rows_f1 + 1] = f1_dxi  # a[F1_n, xi_n]
    sub[rows_f1[1:] - 1] = f1_dxim1[1:]  # a[F1_n, xi_{n-1}], n >= 2
    sub[rows_f2 - 1] = f2_dxb  # a[F2_n, xibar_n]
    live = rows_f2[:-1] + 1
    sup[live] = f2_dxbp1[:-1]  # a[F2_n, xibar_{n+1}], n <= N-2

    return np.vstack([sup, diag, sub])


def _interleave(path: DiscretePath):
    n = path.grid.N
    x = np.empty(2 * (n - 1), dtype=complex)
    x[0::2] = path.bwd[1:n]
    x[1::2] = path.fwd[1:n]
    return x


def _path_from_vector(grid, xi_I, xi_F, x):
    n = grid.N
    fwd = np.empty(n + 1, dtype=complex)
    bwd = np.empty(n + 1, dtype=complex)
    fwd[0] = xi_I
    fwd[n] = xi_F
    fwd[1:n] = x[1::2]
    bwd[0] = np.conj(xi_I)
    bwd[n] = np.conj(xi_F)
    bwd[1:n] = x[0::2]
    return DiscretePath(grid, fwd, bwd)


def solve_general_newton(
    grid: TimeGrid,
    kernel,
    xi_I,
    xi_F,
    mode="cs",
    S=None,
    hbar=1.0,
    tol=1e-10,
    max_iter=50,
    max_halvings=20,
    initial: DiscretePath | None = None,
) -> StationarySolution:
    """Damped Newton for the full 2(N-1)-variable stationary system.

    Parameters
    ----------
    grid : TimeGrid
    kernel : HamiltonianKernel
        Must supply first and second partials.
    xi_I, xi_F : complex
        Boundary labels.
    mode : {"cs", "scs"}
        Oscillator-type or spin-type equations; "scs" requires ``S``.
    initial : DiscretePath, optional
        Starting guess; defaults to the continuous-time reference curve.

    Raises
    ------
    ConvergenceError
        After ``max_iter`` iterations, with the best residual attached.
    """
    if mode not in ("cs", "scs"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "scs" and S is None:
        raise ValueError("mode 'scs' requires the spin magnitude S")
    xi_I = complex(xi_I)
    xi_F = complex(xi_F)
    n = grid.N
    if n < 2:
        path = DiscretePath(grid, np.array([xi_I, xi_F]))
        action = (
            dtcs_action(path, kernel, hbar)
            if mode == "cs"
            else dtscs_action(path, kernel, S, hbar)
        )
        return StationarySolution(path=path, residual_inf=0.0, action=action)

    if initial is None:
        t = grid.times
        ref_fwd, ref_bwd = ct_stationary_reference(t, xi_I, xi_F, grid.T)
        fwd = ref_fwd.copy()
        fwd[-1] = xi_F
        bwd = ref_bwd.copy()
        bwd[0] = np.conj(xi_I)
        bwd[-1] = np.conj(xi_F)
        initial = DiscretePath(grid, fwd, bwd)

    def interleave_residual(res):
        rows = np.empty_like(res)
        rows[0::2] = res[: n - 1]  # F1_n rows
        rows[1::2] = res[n - 1 :]  # F2_n rows
        return rows

    path = initial
    x = _interleave(path)
    res = _newton_residual(mode, path, kernel, S, hbar)
    res_norm = float(np.max(np.abs(res)))
    best = res_norm
    iterations = 0
    while res_norm > tol and iterations < max_iter:
        bands = _newton_jacobian_bands(mode, path, kernel, S, hbar)
        step = solve_banded((1, 1), bands, -interleave_residual(res))
        scale = 1.0
        for _ in range(max_halvings + 1):
            trial_x = x + scale * step
            trial_path = _path_from_vector(grid, xi_I, xi_F, trial_x)
            trial_res = _newton_residual(mode, trial_path, kernel, S, hbar)
            trial_norm = float(np.max(np.abs(trial_res)))
            if trial_norm < res_norm or trial_norm <= tol:
                break
            scale *= 0.5
        else:
            raise ConvergenceError(
                f"Newton stalled at residual {res_norm:.3e}", best_residual=best
            )
        x, path, res, res_norm = trial_x, trial_path, trial_res, trial_norm
        best = min(best, res_norm)
        iterations += 1
    if res_norm > tol:
        raise ConvergenceError(
            f"Newton did not reach tol {tol:.1e} in {max_iter} iterations "
            f"(residual {res_norm:.3e})",
            best_residual=best,
        )
    action = (
        dtcs_action(path, kernel, hbar)
        if mode == "cs"
        else dtscs_action(path, kernel, S, hbar)
    )
    conserved = None
    if mode == "scs":
        per_step_r = path.bwd[1:n] * path.fwd[1:n]
        per_step_p = path.bwd[1:] * path.fwd[:-1]
        r_val = complex(per_step_r[0]) if per_step_r.size else 0.0j
        p_val = complex(per_step_p[1]) if per_step_p.size > 1 else complex(per_step_p[0])
        conserved = ConservedPair(
            R=r_val, P=p_val, per_step_R=per_step_r, per_step_P=per_step_p
        )
    return StationarySolution(
        path=path,
        residual_inf=res_norm,
        action=action,
        conserved=conserved,
        newton_iterations=iterations,
    )


@dataclass(frozen=True)
class SpinActionParts:
    """Named contributions to the spin stationary action (times i/hbar)."""

    final_discontinuity: complex
    interior: complex
    log_term: complex
    initial_discontinuity: complex
    boundary_dynamical: complex
    total: complex

    def discontinuity_sum(self) -> complex:
        return self.final_discontinuity + self.initial_discontinuity


def stationary_action_spin(sol: StationarySolution, S, hbar=1.0) -> SpinActionParts:
    """Decompose the spin stationary action into its named contributions.

    All values are reported as (i/hbar) * action pieces:
      - final discontinuity  S ln[(1 + conj(xi_F) xi_{N-1})^2 / (1+|xi_F|^2)]
      - interior sum         sum_{n=2}^{N-1} [2 S ln((1+P_n)/(1+R_n))
                                              + i eps S (1-P_n)/(1+P_n)]
      - log term             -2 S ln(1+R)
      - initial discontinuity S ln[(1 + xibar_1 xi_I)^2 / (1+|xi_I|^2)]
    plus the two boundary dynamical O(eps) bits; their sum is the exact
    discrete action evaluated on the path.
    """
    if sol.conserved is None:
        raise ValueError("spin action breakdown requires a spin stationary solution")
    path = sol.path
    n = path.grid.N
    eps = path.grid.eps
    xi_F = path.xi_F
    xi_I = path.xi_I
    p_n = sol.conserved.per_step_P  # P_1..P_N
    r_n = sol.conserved.per_step_R  # R_1..R_{N-1}

    final_disc = S * (2.0 * np.log(1.0 + p_n[-1]) - math.log(1.0 + abs(xi_F) ** 2))
    initial_disc = S * (2.0 * np.log(1.0 + p_n[0]) - math.log(1.0 + abs(xi_I) ** 2))
    if n >= 3:
        interior = np.sum(
            2.0 * S * (np.log(1.0 + p_n[1:-1]) - np.log(1.0 + r_n[1:]))
            + 1j * eps * S * (1.0 - p_n[1:-1]) / (1.0 + p_n[1:-1])
        )
    else:
        interior = 0.0 + 0.0j
    log_term = -S * (np.log(1.0 + r_n[0]) + np.log(1.0 + r_n[-1])) if n >= 2 else 0.0j
    boundary_dyn = 1j * eps * S * (
        (1.0 - p_n[0]) / (1.0 + p_n[0]) + (1.0 - p_n[-1]) / (1.0 + p_n[-1])
    )
    total = final_disc + complex(interior) + complex(log_term) + initial_disc
    total = total + complex(boundary_dyn)
    return SpinActionParts(
        final_discontinuity=complex(final_disc),
        interior=complex(interior),
        log_term=complex(log_term),
        initial_discontinuity=complex(initial_disc),
        boundary_dynamical=complex(boundary_dyn),
        total=total,
    )


class _HOPhaseHamiltonian:
    """H(p, q) = (p^2 + q^2 - hbar)/2 with analytic partials."""

    def __init__(self, hbar=1.0):
        self.hbar = hbar

    def eval(self, p, q):
        return 0.5 * (p**2 + q**2 - self.hbar)

    def d_dp(self, p, q):
        return p + 0.0 * q

    def d_dq(self, p, q):
        return q + 0.0 * p

    def d2_dp2(self, p, q):
        return np.ones_like(np.asarray(p, dtype=float) + 0.0 * q)

    def d2_dq2(self, p, q):
        return np.ones_like(np.asarray(q, dtype=float) + 0.0 * p)

    def d2_dpdq(self, p, q):
        return np.zeros_like(np.asarray(p, dtype=float) + 0.0 * q)


def _dtps_residual(path: PhasePath, ham):
    q, p, eps = path.q, path.p, path.grid.eps
    e1 = q[1:] - q[:-1] - eps * np.asarray(ham.d_dp(p, q[1:]))
    e2 = p[1:] - p[:-1] + eps * np.asarray(ham.d_dq(p[:-1], q[1:-1]))
    return np.concatenate([e1, e2])


def solve_dtps_classical(
    grid: TimeGrid, q_I, q_F, hamiltonian=None, hbar=1.0, tol=1e-10, max_iter=50
) -> ClassicalPhaseSolution:
    """Classical path of the discrete phase-space action.

    Solves q_n - q_{n-1} = eps dH/dp(p_n, q_n) for n=1..N together with
    p_{n+1} - p_n = -eps dH/dq(p_n, q_n) for n=1..N-1, with q endpoints
    pinned and the momenta determined a posteriori.  The built-in
    oscillator is solved in closed form; general Hamiltonians go through
    damped Newton.  Raises SingularBVPError at the oscillator
    conjugate-point degeneracy T = k pi.
    """
    n, eps = grid.N, grid.eps
    if hamiltonian is None:
        ham = _HOPhaseHamiltonian(hbar)
        k = grid.T / math.pi
        if abs(k - round(k)) < 1e-9 and round(k) >= 1:
            raise SingularBVPError(
                f"oscillator boundary-value problem degenerate at T = {grid.T}"
            )
        omega = math.acos(max(-1.0, min(1.0, 1.0 - eps * eps / 2.0)))
        if abs(math.sin(n * omega)) < 1e-12:
            raise SingularBVPError("discrete conjugate point: sin(N omega) = 0")

        # shooting in difference form: d_n = q_n - q_{n-1} = eps p_n obeys
        # d_{n+1} = d_n - eps^2 q_n; running the same float recurrence keeps
        # the equation residuals at rounding level (no 1/eps amplification)
        eps2 = eps * eps

        def march(q0, d1):
            q_arr = np.empty(n + 1)
            d_arr = np.empty(n + 1)  # d_arr[k] = d_k, k = 1..N
            q_arr[0] = q0
            d = d1
            for k in range(1, n + 1):
                d_arr[k] = d
                q_arr[k] = q_arr[k - 1] + d
                d = d - eps2 * q_arr[k]
            return q_arr, d_arr

        q_part, _ = march(q_I, 0.0)
        q_hom, _ = march(0.0, 1.0)
        if abs(q_hom[-1]) < 1e-12:
            raise SingularBVPError("discrete conjugate point: homogeneous shot vanishes")
        d1 = (q_F - q_part[-1]) / q_hom[-1]
        q, d_arr = march(q_I, d1)
        q[-1] = q_F  # endpoint pinned; shooting mismatch is O(1e-14)
        p = d_arr[1:] / eps
        path = PhasePath(grid, p, q)
        res = _dtps_residual(path, ham)
        action = dtps_action(path, lambda pp, qq: ham.eval(pp, qq))
        return ClassicalPhaseSolution(
            path=path, residual_inf=float(np.max(np.abs(res))), action=action
        )

    ham = hamiltonian
    # Newton on [p_1, q_1, p_2, q_2, ..., q_{N-1}, p_N]
    q0 = np.linspace(q_I, q_F, n + 1)
    p0 = np.full(n, (q_F - q_I) / max(grid.T, eps))
    x = np.empty(2 * n - 1)
    x[0::2] = p0
    x[1::2] = q0[1:-1]

    def unpack(vec):
        p = vec[0::2]
        q = np.empty(n + 1)
        q[0], q[-1] = q_I, q_F
        q[1:-1] = vec[1::2]
        return PhasePath(grid, p, q)

    path = unpack(x)
    res = _dtps_residual(path, ham)
    res_norm = float(np.max(np.abs(res)))
    best = res_norm
    iterations = 0
    while res_norm > tol and iterations < max_iter:
        p, q = path.p, path.q
        m = 2 * n - 1
        diag = np.zeros(m)
        sup = np.zeros(m)
        sub = np.zeros(m)
        rows_e1 = 2 * np.arange(n)
        rows_e2 = 2 * np.arange(n - 1) + 1
        hpp = np.asarray(ham.d2_dp2(p, q[1:]))
        hpq = np.asarray(ham.d2_dpdq(p, q[1:]))
        hqq = np.asarray(ham.d2_dq2(p[:-1], q[1:-1]))
        hqp = np.asarray(ham.d2_dpdq(p[:-1], q[1:-1]))
        diag[rows_e1] = -eps * hpp
        sup[rows_e1[:-1] + 1] = 1.0 - eps * hpq[:-1]  # dE1_n/dq_n, n < N
        sub[rows_e1[1:] - 1] = -1.0  # dE1_n/dq_{n-1}, n >= 2
        diag[rows_e2] = eps * hqq
        sup[rows_e2 + 1] = 1.0  # dE2_n/dp_{n+1}
        sub[rows_e2 - 1] = -1.0 + eps * hqp  # dE2_n/dp_n
        bands = np.vstack([sup, diag, sub])
        # reorder residual into row order [E1_1, E2_1, E1_2, ...]
        res_rows = np.empty(m)
        res_rows[rows_e1] = res[:n]
        res_rows[rows_e2] = res[n:]
        step = solve_banded((1, 1), bands, -res_rows)
        scale = 1.0
        for _ in range(21):
            trial = x + scale * step
            trial_path = unpack(trial)
            trial_res = _dtps_residual(trial_path, ham)
            trial_norm = float(np.max(np.abs(trial_res)))
            if trial_norm < res_norm or trial_norm <= tol:
                break
            scale *= 0.5
        else:
            raise ConvergenceError(
                f"phase-space Newton stalled at {res_norm:.3e}", best_residual=best
            )
        x, path, res, res_norm = trial, trial_path, trial_res, trial_norm
        best = min(best, res_norm)
        iterations += 1
    if res_norm > tol:
        raise ConvergenceError(
            f"phase-space Newton did not converge (residual {res_norm:.3e})",
            best_residual=best,
        )
    action = dtps_action(path, lambda pp, qq: ham.eval(pp, qq))
    return ClassicalPhaseSolution(path=path, residual_inf=res_norm, action=action)


def action_gradient_fd(path: DiscretePath, action_total, step=1e-6):
    """Max |d(action)/dz| over all interior xi_n and xibar_n by central FD.

    ``action_total`` maps a DiscretePath to a complex action value; the
    labels are perturbed along the real axis, which determines the full
    holomorphic derivative.
    """
    grid = path.grid
    n = grid.N
    worst = 0.0
    for arr_name in ("fwd", "bwd"):
        base = getattr(path, arr_name).copy()
        for k in range(1, n):
            plus = base.copy()
            plus[k] += step
            minus = base.copy()
            minus[k] -= step
            if arr_name == "fwd":
                a_plus = action_total(DiscretePath(grid, plus, path.bwd))
                a_minus = action_total(DiscretePath(grid, minus, path.bwd))
            else:
                a_plus = action_total(DiscretePath(grid, path.fwd, plus))
                a_minus = action_total(DiscretePath(grid, path.fwd, minus))
            grad = (a_plus - a_minus) / (2.0 * step)
            worst = max(worst, abs(grad))
    return worst


def ho_phase_trace(sol: StationarySolution, hbar=1.0):
    """Rows (n, t, p, q) of the oscillator stationary path in phase space.

    Interior rows carry the generally complex (p_n, q_n); the n = 0 and
    n = N rows carry the real endpoint data, so the endpoint jumps are
    visible in the trace.
    """
    path = sol.path
    grid = path.grid
    t = grid.times
    s = math.sqrt(hbar / 2.0)
    rows = []
    for n in range(grid.N + 1):
        if n == 0 or n == grid.N:
            xi = path.fwd[n]
            p = -1j * s * (xi - xi.conjugate())
            q = s * (xi + xi.conjugate())
        else:
            p = -1j * s * (path.fwd[n] - path.bwd[n])
            q = s * (path.fwd[n] + path.bwd[n])
        rows.append((n, float(t[n]), complex(p), complex(q)))
    return rows


def _formal_unit_vector(xi, xibar):
    denom = 1.0 + xibar * xi
    return (
        (xi + xibar) / denom,
        -1j * (xi - xibar) / denom,
        (1.0 - xibar * xi) / denom,
    )


def spin_sphere_trace(sol: StationarySolution):
    """Rows (n, t, n_x, n_y, n_z) via the formal inverse Riemann projection.

    The projection treats xi_n and xibar_n as independent inputs, so the
    components are complex for generic stationary paths; they reduce to
    the real classical precession when xibar = conj(xi).
    """
    path = sol.path
    grid = path.grid
    t = grid.times
    rows = []
    for n in range(grid.N + 1):
        if n == 0 or n == grid.N:
            nx, ny, nz = _formal_unit_vector(
                path.fwd[n], path.fwd[n].conjugate()
            )
        else:
            nx, ny, nz = _formal_unit_vector(path.fwd[n], path.bwd[n])
        rows.append((n, float(t[n]), complex(nx), complex(ny), complex(nz)))
    return rows
