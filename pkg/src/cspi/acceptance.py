"""Acceptance suite: every criterion at its pinned tolerance.

Each criterion is a function returning CriterionResult objects; run_all
executes them in order and the CLI / pytest print one PASS/FAIL line per
criterion.  All randomness is seeded, so the suite is deterministic.

Criterion 2 carries two parts.  The bound part holds; the 1/S-dominance
part measures how the reconstruction error actually scales and fails by
construction: the discrete stationary action with the exact conserved
pair deviates from the closed-form exponent by O(S/N) (the reduced
equations are S-independent, so the action is exactly proportional to S),
while the Gaussian factor of the proper discretization is exactly unity
(unit-triangular change of variables), leaving no 1/S contribution to
dominate at fixed N.  The suite reports the measured scaling rather than
forcing the test green.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .discrete_action import TimeGrid, dtcs_action, dtscs_action
from .errors import SingularMatrixError
from .exact_oracle import ho_amplitude_oracle, spin_amplitude_oracle
from .fluctuations import (
    brute_force_gaussian_K,
    build_kcs_alt_form,
    build_kscs_form,
    build_semi_eps_form,
    expand_dtcs,
    expand_dtscs,
    gaussian_K,
    kscs_coefficients,
    kscs_det_closed_form,
    kscs_transfer_eigen,
    tridiagonal_det,
)
from .klauder import KlauderParams, solve_kcs_ho, solve_kscs_spin
from .states import (
    HOKernel,
    SpinKernel,
    exact_cs_amplitude,
    exact_scs_amplitude,
)
from .stationary_path import action_gradient_fd, solve_ho_dtcs, solve_spin_dtscs

SEED = 20250809


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str

    def format_line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} - criterion {self.number}: {self.name} ({self.detail})"


def _disk(rng, radius):
    r = radius * math.sqrt(rng.uniform())
    phi = rng.uniform(0.0, 2.0 * math.pi)
    return r * cmath.exp(1j * phi)


def criterion_1():
    """HO exactness: stationary exponent times K reproduces the amplitude."""
    rng = np.random.default_rng(SEED)
    pairs = [(_disk(rng, 1.5), _disk(rng, 1.5)) for _ in range(20)]
    n0 = 10**4
    worst = 0.0
    sums = {}
    for n in (n0, 2 * n0):
        total = 0.0
        for t_val in (0.5, 1.0, 3.0):
            grid = TimeGrid(N=n, T=t_val)
            for xi_i, xi_f in pairs:
                sol = solve_ho_dtcs(grid, xi_i, xi_f)
                k = gaussian_K(expand_dtcs(sol)).K
                amp = cmath.exp(1j * sol.action.total) * k
                err = abs(amp - exact_cs_amplitude(xi_i, xi_f, t_val))
                total += err
                if n == n0:
                    worst = max(worst, err)
                    if err > 10.0 / n:
                        return [
                            CriterionResult(
                                1, "HO exactness", False,
                                f"error {err:.3e} > 10/N at N={n}",
                            )
                        ]
        sums[n] = total
    ratio = sums[2 * n0] / sums[n0]
    ok = 0.4 <= ratio <= 0.6
    return [
        CriterionResult(
            1,
            "HO exactness",
            ok,
            f"max err {worst:.2e} <= {10.0 / n0:.1e}; halving ratio {ratio:.3f}",
        )
    ]


def criterion_2():
    """Spin closed-form reproduction: bound and 1/S-scaling parts."""
    rng = np.random.default_rng(SEED + 1)
    t_val = 1.0
    n = 10**4
    pairs = []
    while len(pairs) < 10:
        xi_i, xi_f = _disk(rng, 1.0), _disk(rng, 1.0)
        r0 = xi_f.conjugate() * xi_i * cmath.exp(-1j * t_val)
        if abs(1.0 + r0) > 0.3:
            pairs.append((xi_i, xi_f))
    spins = (5.0, 20.0, 80.0)
    c1, c2 = 300.0, 2.0
    grid = TimeGrid(N=n, T=t_val)
    mean_err = {}
    bound_ok = True
    bound_detail = ""
    for s_val in spins:
        errs = []
        for xi_i, xi_f in pairs:
            sol = solve_spin_dtscs(grid, xi_i, xi_f, s_val)
            k = gaussian_K(expand_dtscs(sol, s_val)).K
            amp = cmath.exp(1j * sol.action.total) * k
            exact = exact_scs_amplitude(xi_i, xi_f, t_val, s_val)
            err = abs(amp / exact - 1.0)
            errs.append(err)
            if err > c1 / n + c2 / s_val:
                bound_ok = False
                bound_detail = f"err {err:.3e} > {c1}/N + {c2}/S at S={s_val}"
        mean_err[s_val] = float(np.mean(errs))
    if bound_ok:
        bound_detail = (
            "errors "
            + ", ".join(f"S={s:g}: {mean_err[s]:.2e}" for s in spins)
            + f" all <= {c1}/N + {c2}/S"
        )
    results = [
        CriterionResult(2, "spin reproduction bound", bound_ok, bound_detail)
    ]
    r_small = mean_err[spins[0]] / mean_err[spins[1]]
    r_large = mean_err[spins[1]] / mean_err[spins[2]]
    scaling_ok = 2.8 <= r_small <= 5.2 and 2.8 <= r_large <= 5.2
    results.append(
        CriterionResult(
            2,
            "spin error shrinks like 1/S",
            scaling_ok,
            f"err(5)/err(20)={r_small:.3f}, err(20)/err(80)={r_large:.3f}; "
            "expected ~4 if 1/S dominated - measured errors grow like S/N instead "
            "(K=1 exactly; the finite-N action deviation is proportional to S)",
        )
    )
    return results


def criterion_3():
    """Oracle equivalence of closed forms and operator propagation."""
    rng = np.random.default_rng(SEED + 2)
    worst_spin = 0.0
    for s_val in (0.5, 1.0, 5.0, 20.0):
        for _ in range(100):
            xi_i, xi_f = _disk(rng, 2.0), _disk(rng, 2.0)
            t_val = rng.uniform(0.0, 2.0 * math.pi)
            a = exact_scs_amplitude(xi_i, xi_f, t_val, s_val)
            b = spin_amplitude_oracle(xi_i, xi_f, t_val, s_val)
            worst_spin = max(worst_spin, abs(a - b))
    worst_ho = 0.0
    for _ in range(100):
        xi_i, xi_f = _disk(rng, 1.5), _disk(rng, 1.5)
        t_val = rng.uniform(0.0, 2.0 * math.pi)
        a = exact_cs_amplitude(xi_i, xi_f, t_val)
        b = ho_amplitude_oracle(xi_i, xi_f, t_val, 60).value
        worst_ho = max(worst_ho, abs(a - b))
    ok = worst_spin <= 1e-11 and worst_ho <= 1e-10
    return [
        CriterionResult(
            3,
            "oracle equivalence",
            ok,
            f"spin max |diff| {worst_spin:.2e} <= 1e-11 (400 cases); "
            f"ho max |diff| {worst_ho:.2e} <= 1e-10 (n_max=60)",
        )
    ]


def criterion_4():
    """Divergence certifications for the defective discretizations."""
    t_val = 1.0
    worst = 0.0
    for n in range(3, 42, 2):  # odd N
        grid = TimeGrid(N=n, T=t_val)
        form = build_semi_eps_form(grid)
        a = 1.0 - 2j * grid.eps
        det = gaussian_K(form).det
        worst = max(worst, abs(det - a ** ((n - 1) // 2)))
    even_ok = True
    for n in range(2, 41, 2):  # even N: determinant vanishes identically
        grid = TimeGrid(N=n, T=t_val)
        form = build_semi_eps_form(grid)
        if tridiagonal_det(form) != 0:
            even_ok = False
        try:
            gaussian_K(form)
            even_ok = False
        except SingularMatrixError:
            pass
    det_ok = worst <= 1e-12 and even_ok

    def logk_slope(builder, n_values):
        ns, logs = [], []
        for n in n_values:
            res = gaussian_K(builder(TimeGrid(N=n, T=t_val)))
            ns.append(n)
            logs.append(res.log_K.real)
        slope = np.polyfit(ns, logs, 1)[0]
        return float(slope)

    slope_semi = logk_slope(build_semi_eps_form, range(11, 42, 2))
    slope_alt = logk_slope(build_kcs_alt_form, range(11, 32))
    ln2 = math.log(2.0)
    slope_ok = abs(slope_semi - ln2) <= 0.02 * ln2 and abs(slope_alt - ln2) <= 0.02 * ln2
    ok = det_ok and slope_ok
    return [
        CriterionResult(
            4,
            "divergence certification",
            ok,
            f"odd-N det err {worst:.1e} <= 1e-12, even-N det = 0: {even_ok}; "
            f"log|K| slopes {slope_semi:.5f}/{slope_alt:.5f} vs ln2 {ln2:.5f} +-2%",
        )
    ]


def criterion_5():
    """Closed-form determinant of the regulated spin discretization."""
    rng = np.random.default_rng(SEED + 3)
    n = 10**5
    t_val = 1.0
    worst = 0.0
    for _ in range(5):
        r_val = _disk(rng, 0.5)
        grid = TimeGrid(N=n, T=t_val)
        form = build_kscs_form(grid, r_val)
        det = tridiagonal_det(form)
        target = cmath.exp(1j * (1.0 + 2.0 * r_val) * r_val / (1.0 + r_val) ** 2 * t_val)
        worst = max(worst, abs(det - target))
    det_ok = worst <= 20.0 / n
    grid4 = TimeGrid(N=10**4, T=t_val)
    eps = grid4.eps
    rel = 0.0
    for _ in range(5):
        r_val = _disk(rng, 0.5)
        a, b, c = kscs_coefficients(grid4, r_val)
        lam_p, lam_m = kscs_transfer_eigen(a, b, c)
        lam_p_asym = 1.0 + 1j * eps * (1.0 + 2.0 * r_val) * r_val / (1.0 + r_val) ** 2
        lam_m_asym = 1j * eps * r_val / (1.0 + r_val) ** 2
        rel = max(rel, abs(lam_p - lam_p_asym) / abs(lam_p_asym))
        rel = max(rel, abs(lam_m - lam_m_asym) / abs(lam_m_asym))
    lam_ok = rel <= 1e-3
    # independent algorithm cross-check at a moderate size
    grid_c = TimeGrid(N=2000, T=t_val)
    form_c = build_kscs_form(grid_c, 0.2 + 0.1j)
    cross = abs(
        gaussian_K(form_c).det
        - kscs_det_closed_form(form_c.dim, *kscs_coefficients(grid_c, 0.2 + 0.1j))
    )
    ok = det_ok and lam_ok and cross <= 1e-10
    return [
        CriterionResult(
            5,
            "regulated-spin determinant closed form",
            ok,
            f"det err {worst:.2e} <= {20.0 / n:.1e}; lambda+- rel {rel:.2e} <= 1e-3; "
            f"LU/recurrence/closed-form cross {cross:.1e}",
        )
    ]


def criterion_6():
    """Regulated oscillator: action and regulator term are O(epsilon)."""
    xi_i, xi_f, t_val = 0.5, 0.35 + 0.2j, 1.0
    exact = -0.5 * (abs(xi_f) ** 2 + abs(xi_i) ** 2) + complex(
        xi_f
    ).conjugate() * xi_i * cmath.exp(-1j * t_val)
    errs, eps_terms = [], []
    for eps in (1e-2, 1e-3, 1e-4):
        sol = solve_kcs_ho(KlauderParams(epsilon=eps, T=t_val, xi_I=xi_i, xi_F=xi_f))
        err = abs(sol.i_action - exact)
        if err > 10.0 * eps:
            return [
                CriterionResult(6, "regulated HO action", False,
                                f"action err {err:.2e} > 10 eps at eps={eps:g}")
            ]
        term = abs(sol.parts["eps_term"])
        if term > 10.0 * eps:
            return [
                CriterionResult(6, "regulated HO action", False,
                                f"eps-term {term:.2e} > 10 eps at eps={eps:g}")
            ]
        errs.append(err)
        eps_terms.append(term)
    ratios = [errs[0] / errs[1], errs[1] / errs[2],
              eps_terms[0] / eps_terms[1], eps_terms[1] / eps_terms[2]]
    ok = all(7.0 <= r <= 13.0 for r in ratios)
    return [
        CriterionResult(
            6,
            "regulated HO action",
            ok,
            f"errors {errs[0]:.2e}/{errs[1]:.2e}/{errs[2]:.2e} <= 10 eps, "
            f"scaling ratios {', '.join(f'{r:.2f}' for r in ratios)} in [7, 13]",
        )
    ]


def criterion_7():
    """Regulated spin boundary-value problem."""
    xi_i, xi_f, t_val, s_val = 0.5, 0.35 + 0.2j, 1.0, 10.0
    details = []
    ok = True
    for eps in (1e-2, 1e-3):
        sol = solve_kscs_spin(
            KlauderParams(epsilon=eps, T=t_val, xi_I=xi_i, xi_F=xi_f), s_val
        )
        res_ok = sol.residual_sup <= 10.0 * eps
        chi_t = sol.xi[-1] / (xi_i * cmath.exp(-1j * t_val))
        chi_t_exp = xi_f / (xi_i * cmath.exp(-1j * t_val))
        chib_0 = sol.xibar[0] / (complex(xi_f).conjugate() * cmath.exp(-1j * t_val))
        chib_0_exp = complex(xi_i).conjugate() / (
            complex(xi_f).conjugate() * cmath.exp(-1j * t_val)
        )
        rel = max(abs(chi_t / chi_t_exp - 1.0), abs(chib_0 / chib_0_exp - 1.0))
        act_err = abs(sol.i_action - sol.expected_i_action)
        act_ok = act_err <= 20.0 * eps * s_val
        ok = ok and res_ok and rel <= 1e-3 and act_ok
        details.append(
            f"eps={eps:g}: residual {sol.residual_sup:.1e} <= {10 * eps:g}, "
            f"chi rel {rel:.1e} <= 1e-3, action err {act_err:.2e} <= {20 * eps * s_val:g}"
        )
    return [CriterionResult(7, "regulated spin BVP", ok, "; ".join(details))]


def criterion_8():
    """Conservation, stationarity, and endpoint-discontinuity persistence."""
    xi_i, xi_f, t_val, s_val = 0.5, 0.4j, 1.0, 20.0
    c_bound = 1e-6
    spread_ok = True
    details = []
    for n in (10**4, 2 * 10**4):
        grid = TimeGrid(N=n, T=t_val)
        sol = solve_spin_dtscs(grid, xi_i, xi_f, s_val)
        spread = float(
            np.max(np.abs(sol.conserved.per_step_R - sol.conserved.per_step_R[0]))
        )
        if spread > c_bound * grid.eps:
            spread_ok = False
        details.append(f"R_n spread {spread:.1e} <= {c_bound:g}*eps at N={n}")

    grad_grid = TimeGrid(N=2000, T=t_val)
    ho_kernel = HOKernel()
    ho_sol = solve_ho_dtcs(grad_grid, 0.3 + 0.1j, 0.2 - 0.4j)
    grad_ho = action_gradient_fd(
        ho_sol.path, lambda p: dtcs_action(p, ho_kernel).total
    )
    spin_kernel = SpinKernel(s_val)
    spin_sol = solve_spin_dtscs(grad_grid, xi_i, xi_f, s_val)
    grad_spin = action_gradient_fd(
        spin_sol.path, lambda p: dtscs_action(p, spin_kernel, s_val).total
    )
    grad_ok = grad_ho < 1e-6 and grad_spin < 1e-6
    details.append(f"action gradients {grad_ho:.1e}/{grad_spin:.1e} < 1e-6")

    disc_ok = True
    for solver, label in (
        (lambda g: solve_ho_dtcs(g, 0.3 + 0.1j, 0.2 - 0.4j), "ho"),
        (lambda g: solve_spin_dtscs(g, xi_i, xi_f, s_val), "spin"),
    ):
        d1 = solver(TimeGrid(N=10**4, T=t_val)).final_discontinuity
        d2 = solver(TimeGrid(N=10**5, T=t_val)).final_discontinuity
        variation = abs(d2 - d1) / d2
        if d2 < 1e-2 or variation > 0.01:
            disc_ok = False
        details.append(f"{label} |xi_F - xi_(N-1)| -> {d2:.4f} (variation {variation:.2e})")
    ok = spread_ok and grad_ok and disc_ok
    return [CriterionResult(8, "conservation and stationarity", ok, "; ".join(details))]


def criterion_9():
    """Brute-force quadrature vs LU for small convergent forms."""
    rng = np.random.default_rng(SEED + 4)
    provenances = ("DTCS-proper", "DTSCS-proper", "KCS-alt", "KSCS-discretized")
    worst = 0.0
    counted = {}
    for prov in provenances:
        done = 0
        attempts = 0
        while done < 10 and attempts < 60:
            attempts += 1
            n = int(rng.integers(2, 5))
            t_val = float(rng.uniform(0.5, 1.5))
            grid = TimeGrid(N=n, T=t_val)
            try:
                if prov == "DTCS-proper":
                    sol = solve_ho_dtcs(grid, _disk(rng, 1.0), _disk(rng, 1.0))
                    form = expand_dtcs(sol)
                elif prov == "DTSCS-proper":
                    s_val = float(rng.integers(2, 12))
                    sol = solve_spin_dtscs(grid, _disk(rng, 0.6), _disk(rng, 0.6), s_val)
                    form = expand_dtscs(sol, s_val)
                elif prov == "KCS-alt":
                    form = build_kcs_alt_form(grid)
                else:
                    form = build_kscs_form(grid, _disk(rng, 0.4), S=float(rng.integers(2, 12)))
                res = gaussian_K(form)
            except SingularMatrixError:
                continue
            if not res.convergent:
                continue
            k_bf = brute_force_gaussian_K(form)
            worst = max(worst, abs(k_bf - res.K) / abs(res.K))
            done += 1
        counted[prov] = done
    ok = worst <= 1e-6 and all(v == 10 for v in counted.values())
    return [
        CriterionResult(
            9,
            "small-instance Gaussian oracle",
            ok,
            f"max rel diff {worst:.2e} <= 1e-6 over "
            + ", ".join(f"{p}:{c}" for p, c in counted.items()),
        )
    ]


_CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
}


def run_all(criteria=None):
    results = []
    for number in sorted(_CRITERIA):
        if criteria is not None and number not in criteria:
            continue
        results.extend(_CRITERIA[number]())
    return results
