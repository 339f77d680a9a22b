"""Discrete-time actions and their epsilon/canonical/dynamical decomposition.

A discrete path carries a forward sequence xi_0..xi_N and an independent
backward sequence xibar_0..xibar_N.  The conventions

    xi_0 = xi_I,  xi_N = xi_F,  xibar_N = conj(xi_F),  xibar_0 = conj(xi_I)

pin the boundary data; the free variables are the interior xi_1..xi_{N-1}
and xibar_1..xibar_{N-1}.  Nothing ever enforces xibar_n == conj(xi_n) at
interior times - stationary paths violate it.

With A_n = xibar_n*xi_n, B_n = xibar_n*xi_{n-1} the oscillator-type action
reads

    (i/hbar) S = sum_n [ -(A_n + A_{n-1})/2 + B_n - (i/hbar) eps H_n ],

and splits identically into an epsilon term (quadratic in differences), a
canonical term and a dynamical term.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import BranchError, PoleError, ShapeError

__all__ = [
    "TimeGrid",
    "DiscretePath",
    "PhasePath",
    "ActionBreakdown",
    "dtcs_action",
    "dtscs_action",
    "dtscs_theta_phi_parts",
    "dtps_action",
    "path_to_csv",
    "path_from_csv",
]


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid with N steps covering [0, T]; eps = T/N, t_n = n*eps.

    T = 0 is allowed as the degenerate zero-time grid (overlap limit).
    """

    N: int
    T: float

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.T < 0:
            raise ValueError("T must be >= 0")

    @property
    def eps(self) -> float:
        return self.T / self.N

    @property
    def times(self) -> np.ndarray:
        return self.eps * np.arange(self.N + 1)


class DiscretePath:
    """Forward/backward label sequences on a time grid, endpoints pinned."""

    def __init__(self, grid: TimeGrid, fwd, bwd=None):
        fwd = np.asarray(fwd, dtype=complex)
        if fwd.shape != (grid.N + 1,):
            raise ShapeError(
                f"fwd must have length N+1 = {grid.N + 1}, got {fwd.shape}"
            )
        if bwd is None:  # honest path: backward sequence is the conjugate
            bwd = fwd.conj()
        else:
            bwd = np.asarray(bwd, dtype=complex)
            if bwd.shape == (grid.N - 1,):  # interior only
                full = np.empty(grid.N + 1, dtype=complex)
                full[0] = fwd[0].conjugate()
                full[1:-1] = bwd
                full[-1] = fwd[-1].conjugate()
                bwd = full
            elif bwd.shape != (grid.N + 1,):
                raise ShapeError(
                    f"bwd must have length N+1 or N-1, got {bwd.shape}"
                )
        # boundary conventions are definitions, not data
        bwd = bwd.copy()
        bwd[0] = fwd[0].conjugate()
        bwd[-1] = fwd[-1].conjugate()
        self.grid = grid
        self.fwd = fwd
        self.bwd = bwd
        self.fwd.setflags(write=False)
        self.bwd.setflags(write=False)

    @property
    def xi_I(self) -> complex:
        return complex(self.fwd[0])

    @property
    def xi_F(self) -> complex:
        return complex(self.fwd[-1])

    def initial_discontinuity(self) -> float:
        """|xibar_1 - conj(xi_I)|; nonzero for generic stationary paths."""
        return abs(self.bwd[1] - self.fwd[0].conjugate())

    def final_discontinuity(self) -> float:
        """|xi_F - xi_{N-1}|; nonzero for generic stationary paths."""
        return abs(self.fwd[-1] - self.fwd[-2])


@dataclass(frozen=True)
class PhasePath:
    """Real phase-space path: p_1..p_N and q_0..q_N with pinned q endpoints."""

    grid: TimeGrid
    p: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        q = np.asarray(self.q, dtype=float)
        if p.shape != (self.grid.N,):
            raise ShapeError(f"p must have length N = {self.grid.N}")
        if q.shape != (self.grid.N + 1,):
            raise ShapeError(f"q must have length N+1 = {self.grid.N + 1}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)


@dataclass(frozen=True)
class ActionBreakdown:
    """Total action with its epsilon/canonical/dynamical split.

    In ``second-order-expanded`` mode the parts sum to the total exactly;
    in ``exact`` mode (spin logarithmic action) the parts are diagnostic.
    """

    total: complex
    eps_term: complex
    canonical: complex
    dynamical: complex
    mode: str
    eps2_term: complex | None = None

    def parts_sum(self) -> complex:
        s = self.eps_term + self.canonical + self.dynamical
        if self.eps2_term is not None:
            s += self.eps2_term
        return s


def dtcs_action(path: DiscretePath, kernel, hbar=1.0) -> ActionBreakdown:
    """Oscillator-type discrete action with its exact three-term split."""
    xi = path.fwd
    xb = path.bwd
    eps = path.grid.eps
    a = xb * xi  # A_n, n = 0..N
    b = xb[1:] * xi[:-1]  # B_n, n = 1..N
    c = xb[:-1] * xi[1:]  # C_n, n = 1..N
    h_vals = np.asarray(kernel.eval(xb[1:], xi[:-1]), dtype=complex)

    i_total = np.sum(-0.5 * (a[1:] + a[:-1]) + b) - (1j / hbar) * eps * np.sum(h_vals)
    i_eps = -0.5 * np.sum((xb[1:] - xb[:-1]) * (xi[1:] - xi[:-1]))
    i_can = 0.5 * np.sum(b - c)
    dynamical = -eps * np.sum(h_vals)

    scale = hbar / 1j
    return ActionBreakdown(
        total=scale * complex(i_total),
        eps_term=scale * complex(i_eps),
        canonical=scale * complex(i_can),
        dynamical=complex(dynamical),
        mode="second-order-expanded",
    )


def _step_logs(z, guard=math.pi / 2.0):
    """Principal logs of per-step arguments, guarding consecutive phase jumps."""
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise PoleError("1 + xibar_n xi_{n-1} vanished along the path")
    args = np.angle(z)
    if len(args) > 1:
        jumps = np.abs(np.diff(args))
        if np.any(jumps > guard):
            raise BranchError(
                f"per-step phase jump {jumps.max():.3f} exceeds pi/2; grid too coarse"
            )
    return np.log(z)


def dtscs_action(path: DiscretePath, kernel, S, hbar=1.0, mode="exact"):
    """Spin discrete action, exact (logarithmic) or second-order expanded.

    Exact mode accumulates 2S log(1 + xibar_n xi_{n-1}) per step with
    principal branches and a BranchError guard on per-step phase jumps;
    expanded mode evaluates the four-term small-difference decomposition
    (epsilon-1, epsilon-2, canonical, dynamical), which is known not to
    reproduce amplitudes and is flagged accordingly.
    """
    if mode not in ("exact", "second-order-expanded"):
        raise ValueError(f"unknown mode {mode!r}")
    xi = path.fwd
    xb = path.bwd
    eps = path.grid.eps
    if mode == "exact":
        step = _step_logs(1.0 + xb[1:] * xi[:-1])  # pole/branch guards first
    h_vals = np.asarray(kernel.eval(xb[1:], xi[:-1]), dtype=complex)
    dynamical = -eps * np.sum(h_vals)
    scale = hbar / 1j

    # diagnostic expanded parts (also the return value in expanded mode);
    # may be non-finite for wild paths, which is fine for diagnostics
    one_plus = 1.0 + xb[1:] * xi[1:]  # 1 + A_n at the later index of each step
    d_xi = xi[1:] - xi[:-1]
    d_xb = xb[1:] - xb[:-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        i_eps1 = -S * np.sum(d_xb * d_xi / one_plus**2)
        i_eps2 = (S / 2.0) * np.sum(
            ((xi[1:] * d_xb) ** 2 - (xb[1:] * d_xi) ** 2) / one_plus**2
        )
        i_can = S * np.sum((xi[1:] * d_xb - xb[1:] * d_xi) / one_plus)

    if mode == "second-order-expanded":
        total = scale * complex(i_eps1 + i_eps2 + i_can) + complex(dynamical)
        return ActionBreakdown(
            total=total,
            eps_term=scale * complex(i_eps1),
            eps2_term=scale * complex(i_eps2),
            canonical=scale * complex(i_can),
            dynamical=complex(dynamical),
            mode=mode,
        )

    two_s = 2.0 * S
    norm_arg = 1.0 + xb * xi
    if np.any(norm_arg == 0):
        raise PoleError("1 + xibar_n xi_n vanished along the path")
    norm = np.log(norm_arg)  # principal; |xi|^2-type factors stay near axis
    i_total = np.sum(two_s * step - S * (norm[1:] + norm[:-1])) - (
        1j / hbar
    ) * eps * np.sum(h_vals)
    return ActionBreakdown(
        total=scale * complex(i_total),
        eps_term=scale * complex(i_eps1),
        eps2_term=scale * complex(i_eps2),
        canonical=scale * complex(i_can),
        dynamical=complex(dynamical),
        mode="exact",
    )


def dtscs_theta_phi_parts(theta, phi, S, hbar=1.0):
    """Spin action parts in the (theta, phi) parameterization.

    Returns the tuple (eps1, eps2, canonical) of the expanded spin action
    written in polar/azimuthal differences; used to demonstrate that this
    parameterization assigns inequivalent stationary-action contributions.
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if theta.shape != phi.shape or theta.ndim != 1 or len(theta) < 2:
        raise ShapeError("theta and phi must be equal-length 1-d sequences")
    if np.any(theta <= 0.0) or np.any(theta >= math.pi):
        raise PoleError("theta must lie strictly inside (0, pi)")
    d_t = np.diff(theta)
    d_p = np.diff(phi)
    t_n = theta[1:]
    i_eps1 = -(S / 4.0) * np.sum(d_t**2 + d_p**2 * np.sin(t_n) ** 2)
    i_eps2 = -1j * S * np.sum(d_t * d_p * np.tan(t_n / 2.0) * np.sin(t_n / 2.0) ** 2)
    i_can = 1j * S * np.sum(
        d_p * (np.cos(t_n) - 1.0) + d_t * d_p * np.tan(t_n / 2.0)
    )
    scale = hbar / 1j
    return scale * complex(i_eps1), scale * complex(i_eps2), scale * complex(i_can)


def dtps_action(path: PhasePath, hamiltonian) -> complex:
    """Phase-space discrete action sum_n [(q_n - q_{n-1}) p_n - eps H(p_n, q_n)]."""
    q = path.q
    p = path.p
    eps = path.grid.eps
    h_vals = np.asarray(hamiltonian(p, q[1:]), dtype=float)
    return complex(np.sum((q[1:] - q[:-1]) * p) - eps * np.sum(h_vals))


def path_to_csv(path: DiscretePath, stream=None) -> str:
    """Serialize a path as CSV columns n, t_n, Re/Im xi_n, Re/Im xibar_n."""
    own = stream is None
    if own:
        stream = io.StringIO()
    writer = csv.writer(stream)
    writer.writerow(["n", "t", "re_xi", "im_xi", "re_xibar", "im_xibar"])
    t = path.grid.times
    for n in range(path.grid.N + 1):
        writer.writerow(
            [
                n,
                repr(float(t[n])),
                repr(float(path.fwd[n].real)),
                repr(float(path.fwd[n].imag)),
                repr(float(path.bwd[n].real)),
                repr(float(path.bwd[n].imag)),
            ]
        )
    return stream.getvalue() if own else ""


def path_from_csv(text: str) -> DiscretePath:
    """Inverse of :func:`path_to_csv` (grid recovered from the t column)."""
    rows = list(csv.reader(io.StringIO(text)))
    body = rows[1:]
    n_steps = len(body) - 1
    t_last = float(body[-1][1])
    grid = TimeGrid(N=n_steps, T=t_last)
    fwd = np.array([float(r[2]) + 1j * float(r[3]) for r in body])
    bwd = np.array([float(r[4]) + 1j * float(r[5]) for r in body])
    return DiscretePath(grid, fwd, bwd)
