"""Operator-level oracles in finite Hilbert spaces.

These cross-check the closed-form amplitudes of :mod:`cspi.states` without
sharing any code with them: spin amplitudes come from exponentiating the
diagonal S_z in the |M> basis, oscillator amplitudes from a truncated Fock
ladder.  Dense matrices only; the dimensions involved (2S+1, n_max+1) are
tiny by construction.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import expm
from scipy.special import gammainc, gammaln

from .errors import DimensionError, PoleError, QuadratureError, TruncationError

__all__ = [
    "SpinBasis",
    "FockBasis",
    "spin_coherent_vector",
    "fock_coherent_vector",
    "spin_amplitude_oracle",
    "ho_amplitude_oracle",
    "HOOracleResult",
    "composition_check",
]

MAX_SPIN = 500


def _half_integer(S):
    two_s = 2.0 * S
    if abs(two_s - round(two_s)) > 1e-12 or S < 0.5:
        raise ValueError(f"spin magnitude must be a half-integer >= 1/2, got {S}")
    return round(two_s) / 2.0


@dataclass(frozen=True)
class SpinBasis:
    """Dense spin-S operators in the |M> basis ordered M = S, S-1, ..., -S."""

    S: float

    def __post_init__(self):
        S = _half_integer(self.S)
        if S > MAX_SPIN:
            raise DimensionError(f"dense spin basis limited to S <= {MAX_SPIN}")
        object.__setattr__(self, "S", S)

    @property
    def dimension(self) -> int:
        return round(2 * self.S) + 1

    @property
    def m_values(self) -> np.ndarray:
        return self.S - np.arange(self.dimension)

    @property
    def sz(self) -> np.ndarray:
        return np.diag(self.m_values.astype(complex))

    @property
    def s_plus(self) -> np.ndarray:
        S, m = self.S, self.m_values
        op = np.zeros((self.dimension, self.dimension), dtype=complex)
        for i in range(1, self.dimension):
            # S+ |M_i> = sqrt(S(S+1) - M_i(M_i+1)) |M_i + 1>
            op[i - 1, i] = math.sqrt(S * (S + 1) - m[i] * (m[i] + 1))
        return op

    @property
    def s_minus(self) -> np.ndarray:
        return self.s_plus.conj().T

    @property
    def sx(self) -> np.ndarray:
        return 0.5 * (self.s_plus + self.s_minus)

    @property
    def sy(self) -> np.ndarray:
        return -0.5j * (self.s_plus - self.s_minus)


@dataclass(frozen=True)
class FockBasis:
    """Truncated oscillator ladder on levels 0..n_max."""

    n_max: int
    hbar: float = 1.0

    def __post_init__(self):
        if self.n_max < 1 or self.n_max > 10000:
            raise DimensionError("n_max must lie in [1, 10000]")

    @property
    def dimension(self) -> int:
        return self.n_max + 1

    @property
    def lowering(self) -> np.ndarray:
        op = np.zeros((self.dimension, self.dimension), dtype=complex)
        for n in range(1, self.dimension):
            op[n - 1, n] = math.sqrt(n)
        return op

    @property
    def raising(self) -> np.ndarray:
        return self.lowering.conj().T

    @property
    def number(self) -> np.ndarray:
        return np.diag(np.arange(self.dimension, dtype=complex))

    def position(self) -> np.ndarray:
        return math.sqrt(self.hbar / 2.0) * (self.lowering + self.raising)

    def momentum(self) -> np.ndarray:
        return -1j * math.sqrt(self.hbar / 2.0) * (self.lowering - self.raising)


def spin_coherent_vector(xi, S):
    """Amplitudes of |xi> in the |M> basis (M descending), unit norm.

    Coefficients sqrt((2S)!/((S-M)!(S+M)!)) xi^(S-M) / (1+|xi|^2)^S are
    assembled in log magnitude to stay finite for large S.
    """
    S = _half_integer(S)
    _reject_pole(xi)
    xi = complex(xi)
    two_s = round(2 * S)
    k = np.arange(two_s + 1)  # k = S - M
    log_binom = gammaln(two_s + 1) - gammaln(k + 1) - gammaln(two_s - k + 1)
    if xi == 0:
        vec = np.zeros(two_s + 1, dtype=complex)
        vec[0] = 1.0
        return vec
    log_mag = 0.5 * log_binom + k * math.log(abs(xi)) - S * math.log1p(abs(xi) ** 2)
    return np.exp(log_mag) * np.exp(1j * k * cmath.phase(xi))


def fock_coherent_vector(xi, n_max):
    """Amplitudes e^{-|xi|^2/2} xi^n / sqrt(n!) on levels 0..n_max."""
    xi = complex(xi)
    n = np.arange(n_max + 1)
    if xi == 0:
        vec = np.zeros(n_max + 1, dtype=complex)
        vec[0] = 1.0
        return vec
    log_mag = -0.5 * abs(xi) ** 2 + n * math.log(abs(xi)) - 0.5 * gammaln(n + 1)
    return np.exp(log_mag) * np.exp(1j * n * cmath.phase(xi))


def _reject_pole(*labels):
    for z in labels:
        z = complex(z)
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise PoleError("label encodes theta = pi")


def spin_amplitude_oracle(xi_I, xi_F, T, S):
    """<xi_F| exp(i S_z T) |xi_I> by diagonal exponentiation in the |M> basis."""
    S = _half_integer(S)
    if S > MAX_SPIN:
        raise DimensionError(f"dense spin oracle limited to S <= {MAX_SPIN}")
    _reject_pole(xi_I, xi_F)
    basis = SpinBasis(S)
    c_i = spin_coherent_vector(xi_I, S)
    c_f = spin_coherent_vector(xi_F, S)
    phases = np.exp(1j * basis.m_values * T)
    return complex(np.sum(c_f.conj() * phases * c_i))


class HOOracleResult(NamedTuple):
    value: complex
    bound: float


def ho_truncation_bound(xi_I, xi_F, n_max):
    """Upper bound on the amplitude mass lost to levels above n_max."""
    x = abs(complex(xi_I)) * abs(complex(xi_F))
    pref = math.exp(-0.5 * (abs(complex(xi_I)) ** 2 + abs(complex(xi_F)) ** 2))
    # sum_{n>m} x^n/n! = e^x P(m+1, x) with P the regularized lower gamma
    return float(pref * math.exp(x) * gammainc(n_max + 1, x))


def ho_amplitude_oracle(xi_I, xi_F, T, n_max, tol=None):
    """Truncated-Fock amplitude <xi_F| exp(-i a+a T) |xi_I> with its tail bound.

    Parameters
    ----------
    xi_I, xi_F : complex
        Coherent-state labels; requires |xi|^2 <= n_max / 4.
    T : float
        Evolution time (dimensionless).
    n_max : int
        Fock cutoff.
    tol : float, optional
        When given, raise TruncationError if the tail bound exceeds it.

    Returns
    -------
    HOOracleResult
        ``value`` (complex amplitude) and ``bound`` (truncation bound,
        reported alongside the value).
    """
    xi_I = complex(xi_I)
    xi_F = complex(xi_F)
    if abs(xi_I) ** 2 > n_max / 4.0 or abs(xi_F) ** 2 > n_max / 4.0:
        raise TruncationError("require |xi|^2 <= n_max/4 for a controlled tail")
    bound = ho_truncation_bound(xi_I, xi_F, n_max)
    if tol is not None and bound > tol:
        raise TruncationError(f"truncation bound {bound:.3e} exceeds tol {tol:.3e}")
    c_i = fock_coherent_vector(xi_I, n_max)
    c_f = fock_coherent_vector(xi_F, n_max)
    phases = np.exp(-1j * np.arange(n_max + 1) * T)
    return HOOracleResult(complex(np.sum(c_f.conj() * phases * c_i)), bound)


def _spin_quadrature_nodes(S, n_theta=None, n_phi=None):
    """Exactness-matched product rule for the SU(2) resolution of unity.

    The integrand of a resolution-of-unity insertion between two spin
    coherent vectors has azimuthal degree <= 2S and polar (cos theta)
    degree <= 2S, so Gauss-Legendre with >= S+1 nodes and a uniform
    azimuthal rule with >= 4S+2 points are exact.
    """
    two_s = round(2 * S)
    need_theta = math.ceil((two_s + 1) / 2)
    need_phi = 2 * two_s + 1
    if n_theta is None:
        n_theta = need_theta
    if n_phi is None:
        n_phi = need_phi + 1
    if n_theta < need_theta or n_phi < need_phi:
        raise QuadratureError(
            f"insufficient quadrature degree: need n_theta >= {need_theta}, "
            f"n_phi >= {need_phi}"
        )
    u, w_u = np.polynomial.legendre.leggauss(n_theta)
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    return u, w_u, phi


def composition_check(
    xi_I,
    xi_F,
    T1,
    T2,
    model="spin",
    S=None,
    n_max=40,
    n_theta=None,
    n_phi=None,
):
    """Residual of the composition law U(T1+T2) = U(T1) U(T2).

    For the spin the intermediate resolution of unity is realized by an
    exact-degree quadrature on the sphere; for the oscillator it is
    realized by the dense propagator product in the truncated Fock space.
    Propagators are built with the general scaling-and-squaring matrix
    exponential, not the diagonal shortcut, so this is an independent
    check.  Returns |direct - composed| (a real number).
    """
    if model == "spin":
        if S is None:
            raise ValueError("spin composition check requires S")
        S = _half_integer(S)
        basis = SpinBasis(S)
        u1 = expm(1j * basis.sz * T1)
        u2 = expm(1j * basis.sz * T2)
        c_i = spin_coherent_vector(xi_I, S)
        c_f = spin_coherent_vector(xi_F, S)
        direct = complex(c_f.conj() @ expm(1j * basis.sz * (T1 + T2)) @ c_i)
        u, w_u, phi = _spin_quadrature_nodes(S, n_theta, n_phi)
        bra = u1.conj().T @ c_f  # <xi_F| U1 = (U1^+ c_F)^+
        ket = u2 @ c_i
        total = 0.0 + 0.0j
        # measure (2S+1)/(4 pi) sin(theta) dtheta dphi
        for uu, ww in zip(u, w_u):
            theta = math.acos(uu)
            t = math.tan(theta / 2.0)
            for pp in phi:
                node = t * cmath.exp(1j * pp)
                c_node = spin_coherent_vector(node, S)
                amp1 = complex(bra.conj() @ c_node)
                amp2 = complex(c_node.conj() @ ket)
                total += ww * (2.0 * math.pi / len(phi)) * amp1 * amp2
        total *= (2.0 * S + 1.0) / (4.0 * math.pi)
        return abs(direct - total)
    if model == "ho":
        basis = FockBasis(n_max)
        h = basis.number  # H/hbar = a+ a
        u1 = expm(-1j * h * T1)
        u2 = expm(-1j * h * T2)
        u12 = expm(-1j * h * (T1 + T2))
        c_i = fock_coherent_vector(xi_I, n_max)
        c_f = fock_coherent_vector(xi_F, n_max)
        direct = complex(c_f.conj() @ u12 @ c_i)
        composed = complex(c_f.conj() @ (u1 @ u2) @ c_i)
        return abs(direct - composed)
    raise ValueError(f"unknown model {model!r}")
