"""Command-line front end: experiments, sweeps, and figure reproductions.

Subcommands: exact, oracle, stationary, klauder, fluct, sweep, figures,
acceptance.  Flags override values from an optional INI-style config file
([run] section).  Exit codes: 0 success, 2 validation error, 3 numerical
failure (the error is serialized to the requested output).
"""

from __future__ import annotations

import argparse
import cmath
import configparser
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from ._csvio import certified, write_csv, write_json
from .discrete_action import TimeGrid
from .errors import CspiError, SingularMatrixError, ValidationError
from .fluctuations import (
    build_kcs_alt_form,
    build_kscs_form,
    build_semi_eps_form,
    expand_dtcs,
    expand_dtscs,
    gaussian_K,
)
from .klauder import KlauderParams, solve_kcs_ho, solve_kscs_spin
from .states import (
    PhasePoint,
    SpherePoint,
    ct_stationary_reference,
    exact_cs_amplitude,
    exact_scs_amplitude,
)
from .stationary_path import (
    ho_phase_trace,
    solve_ho_dtcs,
    solve_spin_dtscs,
    spin_sphere_trace,
)

logger = logging.getLogger("cspi")

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

PROVENANCES = (
    "DTCS-proper",
    "DTCS-semi-eps",
    "KCS-alt",
    "DTSCS-proper",
    "KSCS-discretized",
)

FIGURE_DEFAULTS = {"xi_i": 0.5 + 0.0j, "xi_f": 0.35 + 0.2j, "T": 1.0, "N": 2000, "epsilon": 1e-3}


def _parse_complex(text):
    try:
        return complex(str(text).replace(" ", ""))
    except ValueError as exc:
        raise ValidationError(f"cannot parse complex number {text!r}") from exc


def _parse_int_list(text):
    """'100' | '11,13,15' | '11:31:2' -> list of ints (strictly increasing)."""
    text = str(text)
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        if len(parts) == 2:
            start, stop, step = parts[0], parts[1], 1
        elif len(parts) == 3:
            start, stop, step = parts
        else:
            raise ValidationError(f"bad range {text!r}")
        values = list(range(start, stop + 1, step))
    else:
        values = [int(p) for p in text.split(",")]
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValidationError("sweep values must be strictly increasing")
    if not values:
        raise ValidationError("empty sweep")
    return values

def _parse_float_list(text):
    values = [float(p) for p in str(text).split(",")]
    if not values:
        raise ValidationError("empty sweep")
    return values


_CONFIG_PARSERS = {
    "model": str,
    "spin_S": float,
    "hbar": float,
    "T": float,
    "N": _parse_int_list,
    "epsilon": _parse_float_list,
    "xi_i": _parse_complex,
    "xi_f": _parse_complex,
    "p_i": float,
    "q_i": float,
    "p_f": float,
    "q_f": float,
    "theta_i": float,
    "phi_i": float,
    "theta_f": float,
    "phi_f": float,
    "experiment": str,
    "provenance": str,
    "R": _parse_complex,
    "n_max": int,
    "out": str,
    "format": str,
    "jobs": int,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cspi",
        description="discrete-time (spin-)coherent-state path-integral laboratory",
    )
    parser.add_argument("--version", action="version", version=f"cspi {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="INI config file ([run] section); flags override")
        p.add_argument("--model", choices=("ho", "spin"), dest="model")
        p.add_argument("--spin-S", dest="spin_S", type=float, help="spin magnitude S")
        p.add_argument("--hbar", type=float, dest="hbar")
        p.add_argument("--T", type=float, dest="T")
        p.add_argument("--N", dest="N", help="step count or sweep list (11,13 or 11:31:2)")
        p.add_argument("--epsilon", dest="epsilon", help="regulator (or sweep list)")
        p.add_argument("--xi-i", dest="xi_i", help="initial label, e.g. 0.3+0.1j")
        p.add_argument("--xi-f", dest="xi_f", help="final label")
        p.add_argument("--p-i", dest="p_i", type=float)
        p.add_argument("--q-i", dest="q_i", type=float)
        p.add_argument("--p-f", dest="p_f", type=float)
        p.add_argument("--q-f", dest="q_f", type=float)
        p.add_argument("--theta-i", dest="theta_i", type=float)
        p.add_argument("--phi-i", dest="phi_i", type=float)
        p.add_argument("--theta-f", dest="theta_f", type=float)
        p.add_argument("--phi-f", dest="phi_f", type=float)
        p.add_argument("--experiment", dest="experiment")
        p.add_argument("--provenance", dest="provenance", choices=PROVENANCES)
        p.add_argument("--R", dest="R", help="conserved bilinear for KSCS forms")
        p.add_argument("--n-max", dest="n_max", type=int, help="Fock cutoff")
        p.add_argument("--out", dest="out")
        p.add_argument("--format", dest="format", choices=("csv", "json"))
        p.add_argument("--jobs", dest="jobs", type=int)

    for name, helptext in (
        ("exact", "closed-form amplitude"),
        ("oracle", "operator-oracle amplitude and cross-check"),
        ("stationary", "discrete stationary-action path"),
        ("klauder", "regulated boundary-layer path"),
        ("fluct", "Gaussian fluctuation factor for one discretization"),
        ("sweep", "run an experiment over an N or epsilon sweep"),
        ("figures", "reproduce the three figure traces (CSV + PNG)"),
        ("acceptance", "run the acceptance suite"),
    ):
        p = sub.add_parser(name, help=helptext)
        add_common(p)
        if name == "acceptance":
            p.add_argument("--criteria", help="comma list, e.g. 1,3,4")
    return parser


def apply_config(args):
    if not getattr(args, "config", None):
        return args
    cp = configparser.ConfigParser()
    read = cp.read(args.config)
    if not read:
        raise ValidationError(f"config file {args.config!r} not found")
    section = cp["run"] if cp.has_section("run") else cp[cp.sections()[0]]
    for key, raw in section.items():
        dest = key.strip()
        if dest not in _CONFIG_PARSERS:
            raise ValidationError(f"unknown config key {dest!r}")
        if getattr(args, dest, None) is None:  # flags override the file
            setattr(args, dest, _CONFIG_PARSERS[dest](raw))
    return args


def resolve_endpoints(args, model):
    """Exactly one of the (xi), (p, q), (theta, phi) encodings must be given."""
    enc_xi = args.xi_i is not None or args.xi_f is not None
    enc_pq = any(
        getattr(args, k) is not None for k in ("p_i", "q_i", "p_f", "q_f")
    )
    enc_ang = any(
        getattr(args, k) is not None
        for k in ("theta_i", "phi_i", "theta_f", "phi_f")
    )
    supplied = sum([enc_xi, enc_pq, enc_ang])
    if supplied != 1:
        raise ValidationError(
            f"exactly one endpoint encoding required, got {supplied}"
        )
    hbar = args.hbar if args.hbar is not None else 1.0
    if enc_xi:
        if args.xi_i is None or args.xi_f is None:
            raise ValidationError("both --xi-i and --xi-f are required")
        return _as_complex(args.xi_i), _as_complex(args.xi_f)
    if enc_pq:
        if model == "spin":
            raise ValidationError("(p, q) endpoints apply to the ho model only")
        for k in ("p_i", "q_i", "p_f", "q_f"):
            if getattr(args, k) is None:
                raise ValidationError("all of --p-i --q-i --p-f --q-f are required")
        xi_i = PhasePoint(p=args.p_i, q=args.q_i, hbar=hbar).xi
        xi_f = PhasePoint(p=args.p_f, q=args.q_f, hbar=hbar).xi
        return xi_i, xi_f
    if model == "ho":
        raise ValidationError("(theta, phi) endpoints apply to the spin model only")
    for k in ("theta_i", "phi_i", "theta_f", "phi_f"):
        if getattr(args, k) is None:
            raise ValidationError(
                "all of --theta-i --phi-i --theta-f --phi-f are required"
            )
    xi_i = SpherePoint(theta=args.theta_i, phi=args.phi_i).xi
    xi_f = SpherePoint(theta=args.theta_f, phi=args.phi_f).xi
    return xi_i, xi_f


def _as_complex(value):
    if isinstance(value, complex):
        return value
    return _parse_complex(value)


def _single_n(args, default=None):
    if args.N is None:
        if default is None:
            raise ValidationError("--N is required")
        return default
    values = args.N if isinstance(args.N, list) else _parse_int_list(args.N)
    if len(values) != 1:
        raise ValidationError("this command takes a single --N")
    return values[0]


def _n_list(args):
    if args.N is None:
        raise ValidationError("--N sweep list required")
    return args.N if isinstance(args.N, list) else _parse_int_list(args.N)


def _single_epsilon(args, default=None):
    if args.epsilon is None:
        if default is None:
            raise ValidationError("--epsilon is required")
        return default
    values = (
        args.epsilon
        if isinstance(args.epsilon, list)
        else _parse_float_list(args.epsilon)
    )
    if len(values) != 1:
        raise ValidationError("this command takes a single --epsilon")
    return values[0]


def _require(args, name):
    value = getattr(args, name)
    if value is None:
        flag = "--" + name.replace("_", "-")
        raise ValidationError(f"{flag} is required")
    return value


def _common(args):
    model = args.model or "ho"
    hbar = args.hbar if args.hbar is not None else 1.0
    T = args.T if args.T is not None else 1.0
    return model, hbar, T


def cmd_exact(args):
    model, hbar, T = _common(args)
    xi_i, xi_f = resolve_endpoints(args, model)
    if model == "spin":
        S = _require(args, "spin_S")
        amp = exact_scs_amplitude(xi_i, xi_f, T, S)
    else:
        amp = exact_cs_amplitude(xi_i, xi_f, T, hbar)
    payload = _payload(args, {"amplitude": certified(amp, 1e-15)})
    _emit(args, payload, rows=[["re_amplitude", "im_amplitude"], [amp.real, amp.imag]])
    return EXIT_OK


def cmd_oracle(args):
    from .exact_oracle import ho_amplitude_oracle, spin_amplitude_oracle

    model, hbar, T = _common(args)
    xi_i, xi_f = resolve_endpoints(args, model)
    if model == "spin":
        S = _require(args, "spin_S")
        amp = spin_amplitude_oracle(xi_i, xi_f, T, S)
        closed = exact_scs_amplitude(xi_i, xi_f, T, S)
        results = {
            "amplitude": certified(amp, 1e-12),
            "closed_form": certified(closed, 1e-15),
            "difference": certified(abs(amp - closed), 1e-11),
        }
    else:
        n_max = args.n_max if args.n_max is not None else 60
        value, bound = ho_amplitude_oracle(xi_i, xi_f, T, n_max)
        closed = exact_cs_amplitude(xi_i, xi_f, T, hbar)
        results = {
            "amplitude": certified(value, bound),
            "truncation_bound": certified(bound, 0.0),
            "closed_form": certified(closed, 1e-15),
            "difference": certified(abs(value - closed), bound + 1e-12),
        }
    _emit(args, _payload(args, results))
    return EXIT_OK


def _stationary_solution(args, model, hbar, T, n):
    grid = TimeGrid(N=n, T=T)
    xi_i, xi_f = resolve_endpoints(args, model)
    if model == "spin":
        S = _require(args, "spin_S")
        return solve_spin_dtscs(grid, xi_i, xi_f, S, hbar=hbar), xi_i, xi_f
    return solve_ho_dtcs(grid, xi_i, xi_f, hbar=hbar), xi_i, xi_f


def cmd_stationary(args):
    model, hbar, T = _common(args)
    n = _single_n(args)
    sol, xi_i, xi_f = _stationary_solution(args, model, hbar, T, n)
    fmt_kind = args.format or "csv"
    if fmt_kind == "json":
        results = {
            "action": certified(sol.action.total, 1e-12),
            "i_action": certified(1j * sol.action.total / hbar, 1e-12),
            "residual_inf": certified(sol.residual_inf, 0.0),
            "initial_discontinuity": certified(sol.initial_discontinuity, 1e-12),
            "final_discontinuity": certified(sol.final_discontinuity, 1e-12),
        }
        if sol.conserved is not None:
            results["R"] = certified(sol.conserved.R, 1e-12)
            results["P"] = certified(sol.conserved.P, 1e-12)
        write_json(args.out, _payload(args, results))
        return EXIT_OK
    if model == "spin":
        rows = [
            (n_, t, nx.real, nx.imag, ny.real, ny.imag, nz.real, nz.imag)
            for n_, t, nx, ny, nz in spin_sphere_trace(sol)
        ]
        header = ["n", "t", "re_nx", "im_nx", "re_ny", "im_ny", "re_nz", "im_nz"]
    else:
        rows = [
            (n_, t, p.real, p.imag, q.real, q.imag)
            for n_, t, p, q in ho_phase_trace(sol, hbar)
        ]
        header = ["n", "t", "re_p", "im_p", "re_q", "im_q"]
    write_csv(args.out, header, rows, meta=_meta(args))
    return EXIT_OK


def cmd_klauder(args):
    model, hbar, T = _common(args)
    eps = _single_epsilon(args)
    xi_i, xi_f = resolve_endpoints(args, model)
    params = KlauderParams(epsilon=eps, T=T, xi_I=xi_i, xi_F=xi_f)
    if model == "spin":
        S = _require(args, "spin_S")
        sol = solve_kscs_spin(params, S, hbar=hbar)
        residual = sol.residual_sup
        extra = {"expected_i_action": certified(sol.expected_i_action, 20 * eps * S)}
    else:
        sol = solve_kcs_ho(params, hbar=hbar)
        residual = 0.0  # closed-form solution of the linear BVP
        exact = -0.5 * (
            abs(xi_f) ** 2 + abs(xi_i) ** 2
        ) + xi_f.conjugate() * xi_i * cmath.exp(-1j * T)
        extra = {"expected_i_action": certified(exact, 10 * eps)}
    if (args.format or "csv") == "json":
        results = {
            "action": certified(sol.action, 10 * eps * hbar),
            "i_action": certified(sol.i_action, 10 * eps),
            "residual_sup": certified(residual, 10 * eps),
            "parts": {
                k: certified(v, 10 * eps)
                for k, v in sol.parts.items()
            },
        }
        results.update(extra)
        write_json(args.out, _payload(args, results))
        return EXIT_OK
    prof = sol.chi
    rows = [
        (
            t,
            xi.real,
            xi.imag,
            xb.real,
            xb.imag,
            abs(c - 1.0),
            abs(cb - 1.0),
        )
        for t, xi, xb, c, cb in zip(sol.t, sol.xi, sol.xibar, prof.chi, prof.chibar)
    ]
    header = ["t", "re_xi", "im_xi", "re_xibar", "im_xibar", "abs_chi_m1", "abs_chibar_m1"]
    write_csv(args.out, header, rows, meta=_meta(args))
    return EXIT_OK


def _build_form(args, provenance, n, model, hbar, T):
    grid = TimeGrid(N=n, T=T)
    if provenance == "DTCS-semi-eps":
        return build_semi_eps_form(grid)
    if provenance == "KCS-alt":
        return build_kcs_alt_form(grid)
    if provenance == "DTCS-proper":
        xi_i, xi_f = resolve_endpoints(args, "ho")
        sol = solve_ho_dtcs(grid, xi_i, xi_f, hbar=hbar)
        return expand_dtcs(sol, hbar=hbar)
    if provenance == "DTSCS-proper":
        S = _require(args, "spin_S")
        xi_i, xi_f = resolve_endpoints(args, "spin")
        sol = solve_spin_dtscs(grid, xi_i, xi_f, S, hbar=hbar)
        return expand_dtscs(sol, S, hbar=hbar)
    if provenance == "KSCS-discretized":
        S = args.spin_S if args.spin_S is not None else 10.0
        if args.R is not None:
            r_val = _as_complex(args.R)
        else:
            xi_i, xi_f = resolve_endpoints(args, "spin")
            r_val = xi_f.conjugate() * xi_i * cmath.exp(-1j * T)
        return build_kscs_form(grid, r_val, S=S)
    raise ValidationError(f"unknown provenance {provenance!r}")


def cmd_fluct(args):
    model, hbar, T = _common(args)
    provenance = _require(args, "provenance")
    n = _single_n(args)
    form = _build_form(args, provenance, n, model, hbar, T)
    res = gaussian_K(form)
    results = {
        "provenance": provenance,
        "N": n,
        "dim": form.dim,
        "K": certified(res.K, 1e-12),
        "log_K": certified(res.log_K, 1e-12),
        "det": certified(res.det, 1e-12),
        "convergent": res.convergent,
        "growth_rate": certified(res.growth_rate, 1e-9),
        "min_herm_eig": certified(res.min_herm_eig, 1e-10),
    }
    _emit(args, _payload(args, results))
    return EXIT_OK


def cmd_sweep(args):
    model, hbar, T = _common(args)
    experiment = args.experiment or "fluct"
    jobs = args.jobs if args.jobs is not None else 1
    if experiment == "fluct":
        provenance = _require(args, "provenance")
        n_values = _n_list(args)

        def one(n):
            try:
                form = _build_form(args, provenance, n, model, hbar, T)
                res = gaussian_K(form)
                return (
                    n,
                    provenance,
                    res.log_K.real,
                    res.log_K.imag,
                    res.convergent,
                    res.growth_rate,
                    "",
                )
            except SingularMatrixError as exc:
                return (n, provenance, math.nan, math.nan, False, math.nan, str(exc))

        header = [
            "N",
            "provenance",
            "re_logK",
            "im_logK",
            "convergent",
            "growth_rate",
            "error",
        ]
        rows = _run_parallel(one, n_values, jobs)
    elif experiment == "stationary":
        n_values = _n_list(args)
        xi_i, xi_f = resolve_endpoints(args, model)

        def one(n):
            sol, _, _ = _stationary_solution(args, model, hbar, T, n)
            i_act = 1j * sol.action.total / hbar
            if model == "spin":
                exact = exact_scs_amplitude(xi_i, xi_f, T, args.spin_S)
            else:
                exact = exact_cs_amplitude(xi_i, xi_f, T, hbar)
            amp_err = abs(cmath.exp(i_act) - exact)
            return (
                n,
                sol.residual_inf,
                sol.initial_discontinuity,
                sol.final_discontinuity,
                i_act.real,
                i_act.imag,
                amp_err,
            )

        header = [
            "N",
            "residual",
            "initial_discontinuity",
            "final_discontinuity",
            "re_i_action",
            "im_i_action",
            "amplitude_error",
        ]
        rows = _run_parallel(one, n_values, jobs)
    elif experiment == "klauder":
        eps_values = (
            args.epsilon
            if isinstance(args.epsilon, list)
            else _parse_float_list(_require(args, "epsilon"))
        )
        if any(b <= a for a, b in zip(eps_values, eps_values[1:])):
            raise ValidationError("sweep values must be strictly increasing")
        xi_i, xi_f = resolve_endpoints(args, model)

        def one(eps):
            params = KlauderParams(epsilon=eps, T=T, xi_I=xi_i, xi_F=xi_f)
            if model == "spin":
                S = _require(args, "spin_S")
                sol = solve_kscs_spin(params, S, hbar=hbar)
                err = abs(sol.i_action - sol.expected_i_action)
                residual = sol.residual_sup
            else:
                sol = solve_kcs_ho(params, hbar=hbar)
                exact = -0.5 * (
                    abs(xi_f) ** 2 + abs(xi_i) ** 2
                ) + xi_f.conjugate() * xi_i * cmath.exp(-1j * T)
                err = abs(sol.i_action - exact)
                residual = 0.0
            return (eps, residual, err, abs(sol.parts["eps_term"]))

        header = ["epsilon", "residual", "action_error", "abs_eps_term"]
        rows = _run_parallel(one, eps_values, jobs)
    else:
        raise ValidationError(f"unknown sweep experiment {experiment!r}")
    write_csv(args.out, header, rows, meta=_meta(args))
    return EXIT_OK


def _run_parallel(fn, values, jobs):
    if jobs <= 1:
        return [fn(v) for v in values]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, values))  # map preserves sweep order


def cmd_figures(args):
    from .plots import render_phase_figure, render_sphere_figure

    hbar = args.hbar if args.hbar is not None else 1.0
    T = args.T if args.T is not None else FIGURE_DEFAULTS["T"]
    n = _single_n(args, default=FIGURE_DEFAULTS["N"])
    eps = _single_epsilon(args, default=FIGURE_DEFAULTS["epsilon"])
    xi_i = _as_complex(args.xi_i) if args.xi_i is not None else FIGURE_DEFAULTS["xi_i"]
    xi_f = _as_complex(args.xi_f) if args.xi_f is not None else FIGURE_DEFAULTS["xi_f"]
    outdir = Path(args.out or "figures")
    outdir.mkdir(parents=True, exist_ok=True)
    meta = _meta(args)
    meta.update({"xi_i": xi_i, "xi_f": xi_f, "T": T, "N": n, "epsilon": eps})
    s = math.sqrt(hbar / 2.0)

    # Figure 1: regulated oscillator path, continuous through the layers
    params = KlauderParams(epsilon=eps, T=T, xi_I=xi_i, xi_F=xi_f)
    ksol = solve_kcs_ho(params, hbar=hbar)
    p1 = -1j * s * (ksol.xi - ksol.xibar)
    q1 = s * (ksol.xi + ksol.xibar)
    rows1 = [
        (t, p.real, p.imag, q.real, q.imag)
        for t, p, q in zip(ksol.t, p1, q1)
    ]
    write_csv(outdir / "fig1.csv", ["t", "re_p", "im_p", "re_q", "im_q"], rows1, meta)
    render_phase_figure(
        outdir / "fig1.png", ksol.t, list(p1), list(q1),
        "regulated stationary path (oscillator)",
    )

    # Figure 2: oscillator stationary path (limit curve) with endpoint rows
    t_grid = np.linspace(0.0, T, n + 1)
    fwd, bwd = ct_stationary_reference(t_grid, xi_i, xi_f, T)
    p2 = -1j * s * (fwd - bwd)
    q2 = s * (fwd + bwd)
    p2[0] = -1j * s * (xi_i - xi_i.conjugate())
    q2[0] = s * (xi_i + xi_i.conjugate())
    p2[-1] = -1j * s * (xi_f - xi_f.conjugate())
    q2[-1] = s * (xi_f + xi_f.conjugate())
    rows2 = [
        (k, t, p.real, p.imag, q.real, q.imag)
        for k, (t, p, q) in enumerate(zip(t_grid, p2, q2))
    ]
    write_csv(
        outdir / "fig2.csv", ["n", "t", "re_p", "im_p", "re_q", "im_q"], rows2, meta
    )
    render_phase_figure(
        outdir / "fig2.png", t_grid, list(p2), list(q2),
        "stationary-action path (oscillator)",
    )

    # Figure 3: spin stationary path on the sphere, endpoints included
    denom = 1.0 + bwd * fwd
    nx = (fwd + bwd) / denom
    ny = -1j * (fwd - bwd) / denom
    nz = (1.0 - bwd * fwd) / denom
    for arr, (lo, hi) in (
        (nx, _honest_pair(xi_i, xi_f, "x")),
        (ny, _honest_pair(xi_i, xi_f, "y")),
        (nz, _honest_pair(xi_i, xi_f, "z")),
    ):
        arr[0] = lo
        arr[-1] = hi
    rows3 = [
        (k, t, a.real, a.imag, b.real, b.imag, c.real, c.imag)
        for k, (t, a, b, c) in enumerate(zip(t_grid, nx, ny, nz))
    ]
    write_csv(
        outdir / "fig3.csv",
        ["n", "t", "re_nx", "im_nx", "re_ny", "im_ny", "re_nz", "im_nz"],
        rows3,
        meta,
    )
    render_sphere_figure(
        outdir / "fig3.png", t_grid, [list(nx), list(ny), list(nz)],
        "stationary-action path (spin)",
    )
    if (args.format or "csv") == "json":
        write_json(
            None,
            _payload(args, {"written": [str(outdir / f"fig{i}.{s_}") for i in (1, 2, 3) for s_ in ("csv", "png")]}),
        )
    return EXIT_OK


def _honest_pair(xi_i, xi_f, component):
    def honest(xi):
        d = 1.0 + abs(xi) ** 2
        if component == "x":
            return (xi + xi.conjugate()) / d
        if component == "y":
            return -1j * (xi - xi.conjugate()) / d
        return (1.0 - abs(xi) ** 2) / d

    return honest(xi_i), honest(xi_f)


def cmd_acceptance(args):
    from . import acceptance

    wanted = None
    if getattr(args, "criteria", None):
        wanted = {int(x) for x in str(args.criteria).split(",")}
    results = acceptance.run_all(criteria=wanted)
    for res in results:
        print(res.format_line())
    failed = [r for r in results if not r.passed]
    if failed:
        print(f"{len(failed)} criterion/criteria FAILED")
        return EXIT_NUMERICAL
    print("all criteria passed")
    return EXIT_OK


def _meta(args):
    meta = {}
    for key in (
        "command",
        "model",
        "spin_S",
        "hbar",
        "T",
        "N",
        "epsilon",
        "xi_i",
        "xi_f",
        "provenance",
        "experiment",
    ):
        value = getattr(args, key, None)
        if value is not None:
            meta[key] = value
    return meta


def _payload(args, results):
    return {"tool": "cspi", "version": __version__, "config": _meta(args), "results": results}


def _emit(args, payload, rows=None):
    fmt_kind = args.format or "json"
    if fmt_kind == "json" or rows is None:
        write_json(args.out, payload)
    else:
        write_csv(args.out, rows[0], rows[1:], meta=_meta(args))


_COMMANDS = {
    "exact": cmd_exact,
    "oracle": cmd_oracle,
    "stationary": cmd_stationary,
    "klauder": cmd_klauder,
    "fluct": cmd_fluct,
    "sweep": cmd_sweep,
    "figures": cmd_figures,
    "acceptance": cmd_acceptance,
}


def main(argv=None):
    logging.basicConfig(
        level=os.environ.get("PATHINT_LOG", "WARNING").upper(),
        format="[%(name)s] %(levelname)s %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = apply_config(args)
        if isinstance(getattr(args, "N", None), str):
            args.N = _parse_int_list(args.N)
        if isinstance(getattr(args, "epsilon", None), str):
            args.epsilon = _parse_float_list(args.epsilon)
        return _COMMANDS[args.command](args)
    except ValidationError as exc:
        logger.error("validation error: %s", exc)
        write_json(getattr(args, "out", None), {"error": {"type": "validation", "message": str(exc)}})
        return EXIT_VALIDATION
    except CspiError as exc:
        logger.error("numerical failure: %s", exc)
        write_json(
            getattr(args, "out", None),
            {"error": {"type": type(exc).__name__, "message": str(exc)}},
        )
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
