"""Coherent-state parameterizations, overlaps, kernels and exact amplitudes.

Conventions: positions and momenta carry dimension hbar^(1/2), time is
dimensionless, and the oscillator label is

    xi = sqrt(1/(2*hbar)) * (q + i*p).

Spin coherent states are labeled by the Riemann projection of the unit
vector n(theta, phi),

    xi = exp(i*phi) * tan(theta/2),

with the south pole theta = pi excluded (single-chart convention).
Everything in this module is a pure function of its arguments; the exact
amplitudes below are the ground truth against which the discrete-time
machinery of the other modules is validated.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PoleError

__all__ = [
    "PhasePoint",
    "SpherePoint",
    "ModelParams",
    "HamiltonianKernel",
    "HOKernel",
    "SpinKernel",
    "cs_overlap",
    "scs_overlap",
    "exact_cs_amplitude",
    "exact_scs_amplitude",
    "ct_stationary_reference",
    "check_kernel_partials",
    "integer_power",
]

#: largest exponent 2S evaluated by repeated multiplication; above this the
#: principal-branch exp(2S*log) form is used instead.
MAX_PRODUCT_POWER = 64


def integer_power(z, n):
    """(1+z)-style integer power by binary multiplication for n <= 64.

    Keeps (1+z)**(2S) single valued for the half-integer spins used here;
    larger exponents fall back to exp(n*Log z) with the principal branch.
    """
    if n != int(n) or n < 0:
        raise ValueError(f"integer_power expects a non-negative integer, got {n}")
    n = int(n)
    if n > MAX_PRODUCT_POWER:
        return np.exp(n * np.log(z))
    result = np.ones_like(np.asarray(z, dtype=complex))
    base = np.asarray(z, dtype=complex).copy()
    while n:
        if n & 1:
            result = result * base
        base = base * base
        n >>= 1
    if result.ndim == 0:
        return complex(result)
    return result


def _require_half_integer_spin(S):
    two_s = 2.0 * S
    if abs(two_s - round(two_s)) > 1e-12 or S < 0.5:
        raise ValueError(f"spin magnitude must be a half-integer >= 1/2, got {S}")
    return round(two_s) / 2.0


@dataclass(frozen=True)
class PhasePoint:
    """Phase-space point (p, q) in hbar^(1/2) units with its complex label."""

    p: float
    q: float
    hbar: float = 1.0

    def __post_init__(self):
        if self.hbar <= 0:
            raise ValueError("hbar must be positive")

    @property
    def xi(self) -> complex:
        return math.sqrt(1.0 / (2.0 * self.hbar)) * (self.q + 1j * self.p)

    @classmethod
    def from_xi(cls, xi: complex, hbar: float = 1.0) -> "PhasePoint":
        s = math.sqrt(2.0 * hbar)
        return cls(p=s * xi.imag, q=s * xi.real, hbar=hbar)


@dataclass(frozen=True)
class SpherePoint:
    """Point on the unit sphere, theta in [0, pi), with Riemann projection."""

    theta: float
    phi: float

    def __post_init__(self):
        if not (0.0 <= self.theta < math.pi):
            raise PoleError(f"theta must lie in [0, pi), got {self.theta}")

    @property
    def xi(self) -> complex:
        return cmath.exp(1j * self.phi) * math.tan(self.theta / 2.0)

    @property
    def zeta(self) -> complex:
        return cmath.exp(1j * self.phi) * self.theta / 2.0

    @classmethod
    def from_xi(cls, xi: complex) -> "SpherePoint":
        theta = 2.0 * math.atan(abs(xi))
        phi = cmath.phase(xi) % (2.0 * math.pi) if xi != 0 else 0.0
        return cls(theta=theta, phi=phi)

    def unit_vector(self):
        st = math.sin(self.theta)
        return np.array(
            [st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)]
        )


class HamiltonianKernel:
    """Normalized coherent-state matrix element H(xi*, xi') and its partials.

    Subclasses (or instances built from callables) must provide the kernel
    as a holomorphic function of the bra label ``xibar`` and the ket label
    ``xi`` separately, plus first and second partial derivatives.  All
    methods accept scalars or numpy arrays.
    """

    def eval(self, xibar, xi):
        raise NotImplementedError

    def d_dxibar(self, xibar, xi):
        raise NotImplementedError

    def d_dxi(self, xibar, xi):
        raise NotImplementedError

    def d2_dxibar2(self, xibar, xi):
        raise NotImplementedError

    def d2_dxi2(self, xibar, xi):
        raise NotImplementedError

    def d2_dxibar_dxi(self, xibar, xi):
        raise NotImplementedError


class HOKernel(HamiltonianKernel):
    """Harmonic oscillator: H(xi*, xi') = hbar * xi* * xi'."""

    def __init__(self, hbar=1.0):
        self.hbar = float(hbar)

    def eval(self, xibar, xi):
        return self.hbar * xibar * xi

    def d_dxibar(self, xibar, xi):
        return self.hbar * (xi + 0.0 * xibar)

    def d_dxi(self, xibar, xi):
        return self.hbar * (xibar + 0.0 * xi)

    def d2_dxibar2(self, xibar, xi):
        return 0.0 * xibar * xi

    def d2_dxi2(self, xibar, xi):
        return 0.0 * xibar * xi

    def d2_dxibar_dxi(self, xibar, xi):
        return self.hbar * np.ones_like(np.asarray(xibar * xi, dtype=complex))


class SpinKernel(HamiltonianKernel):
    """Spin in a constant field: H(xi*, xi') = -hbar*S*(1 - xi*xi')/(1 + xi*xi')."""

    def __init__(self, S, hbar=1.0):
        self.S = _require_half_integer_spin(S)
        self.hbar = float(hbar)

    def eval(self, xibar, xi):
        w = xibar * xi
        return -self.hbar * self.S * (1.0 - w) / (1.0 + w)

    def d_dxibar(self, xibar, xi):
        return 2.0 * self.hbar * self.S * xi / (1.0 + xibar * xi) ** 2

    def d_dxi(self, xibar, xi):
        return 2.0 * self.hbar * self.S * xibar / (1.0 + xibar * xi) ** 2

    def d2_dxibar2(self, xibar, xi):
        return -4.0 * self.hbar * self.S * xi**2 / (1.0 + xibar * xi) ** 3

    def d2_dxi2(self, xibar, xi):
        return -4.0 * self.hbar * self.S * xibar**2 / (1.0 + xibar * xi) ** 3

    def d2_dxibar_dxi(self, xibar, xi):
        w = xibar * xi
        return 2.0 * self.hbar * self.S * (1.0 - w) / (1.0 + w) ** 3


@dataclass(frozen=True)
class ModelParams:
    """Global physical constants: hbar, spin magnitude, Hamiltonian kernel."""

    hbar: float = 1.0
    spin_S: float | None = None
    kernel: HamiltonianKernel = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.hbar <= 0:
            raise ValueError("hbar must be positive")
        if self.spin_S is not None:
            object.__setattr__(self, "spin_S", _require_half_integer_spin(self.spin_S))
        if self.kernel is None:
            kernel = (
                SpinKernel(self.spin_S, self.hbar)
                if self.spin_S is not None
                else HOKernel(self.hbar)
            )
            object.__setattr__(self, "kernel", kernel)


def _check_finite(*labels):
    for z in labels:
        z = complex(z)
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise PoleError("input label encodes theta = pi (xi at infinity)")


def cs_overlap(xi, xi_prime):
    """Oscillator coherent-state overlap <xi|xi'>.

    Returns exp[-(|xi|^2 + |xi'|^2)/2 + conj(xi)*xi'];  entire in both
    labels, equal to 1 on the diagonal and bounded by 1 in modulus.
    """
    xi = complex(xi)
    xi_prime = complex(xi_prime)
    return cmath.exp(
        -0.5 * (abs(xi) ** 2 + abs(xi_prime) ** 2) + xi.conjugate() * xi_prime
    )


def scs_overlap(xi, xi_prime, S):
    """Spin coherent-state overlap <xi|xi'> for spin magnitude S.

    Returns (1 + conj(xi)*xi')^(2S) / [(1+|xi|^2)^S (1+|xi'|^2)^S].
    Raises PoleError if either label encodes the south pole.
    """
    S = _require_half_integer_spin(S)
    _check_finite(xi, xi_prime)
    xi = complex(xi)
    xi_prime = complex(xi_prime)
    num = integer_power(1.0 + xi.conjugate() * xi_prime, round(2 * S))
    den = ((1.0 + abs(xi) ** 2) * (1.0 + abs(xi_prime) ** 2)) ** S
    return num / den


def exact_cs_amplitude(xi_I, xi_F, T, hbar=1.0):
    """Exact oscillator amplitude <xi_F| exp(-i H T / hbar) |xi_I>, H = hbar a+a.

    The closed form exp[-(|xi_F|^2+|xi_I|^2)/2 + conj(xi_F) xi_I e^{-iT}]
    does not involve hbar; the argument is accepted for interface symmetry.
    """
    del hbar
    xi_I = complex(xi_I)
    xi_F = complex(xi_F)
    return cmath.exp(
        -0.5 * (abs(xi_F) ** 2 + abs(xi_I) ** 2)
        + xi_F.conjugate() * xi_I * cmath.exp(-1j * T)
    )


def exact_scs_amplitude(xi_I, xi_F, T, S):
    """Exact spin amplitude <xi_F| exp(-i H T / hbar) |xi_I>, H = -hbar S_z.

    Returns (1 + conj(xi_F) xi_I e^{-iT})^(2S) e^{iST}
            / [(1+|xi_F|^2)^S (1+|xi_I|^2)^S].
    """
    S = _require_half_integer_spin(S)
    _check_finite(xi_I, xi_F)
    xi_I = complex(xi_I)
    xi_F = complex(xi_F)
    num = integer_power(
        1.0 + xi_F.conjugate() * xi_I * cmath.exp(-1j * T), round(2 * S)
    )
    den = ((1.0 + abs(xi_F) ** 2) * (1.0 + abs(xi_I) ** 2)) ** S
    return num / den * cmath.exp(1j * S * T)


def ct_stationary_reference(t, xi_I, xi_F, T):
    """Continuous-time stationary reference curve (xi(t), xibar(t)).

    xi(t) = xi_I e^{-it} and xibar(t) = conj(xi_F) e^{i(t-T)}.  Valid for
    both the oscillator and the constant-field spin; the two components are
    independent and in general not complex conjugates of each other.
    """
    t = np.asarray(t, dtype=float)
    fwd = complex(xi_I) * np.exp(-1j * t)
    bwd = complex(xi_F).conjugate() * np.exp(1j * (t - T))
    if t.ndim == 0:
        return complex(fwd), complex(bwd)
    return fwd, bwd


def check_kernel_partials(kernel, xibar, xi, step=1e-5, tol=1e-6):
    """Validate kernel partial derivatives against central finite differences.

    Returns the worst relative error found; raises ValueError when it
    exceeds ``tol``.
    """
    xibar = complex(xibar)
    xi = complex(xi)

    def fd(f, z, dz):
        return (f(z + dz) - f(z - dz)) / (2.0 * dz)

    pairs = [
        (kernel.d_dxibar(xibar, xi), fd(lambda z: kernel.eval(z, xi), xibar, step)),
        (kernel.d_dxi(xibar, xi), fd(lambda z: kernel.eval(xibar, z), xi, step)),
        (
            kernel.d2_dxibar2(xibar, xi),
            fd(lambda z: kernel.d_dxibar(z, xi), xibar, step),
        ),
        (kernel.d2_dxi2(xibar, xi), fd(lambda z: kernel.d_dxi(xibar, z), xi, step)),
        (
            kernel.d2_dxibar_dxi(xibar, xi),
            fd(lambda z: kernel.d_dxi(z, xi), xibar, step),
        ),
    ]
    worst = 0.0
    for analytic, numeric in pairs:
        scale = max(abs(complex(analytic)), abs(complex(numeric)), 1.0)
        worst = max(worst, abs(complex(analytic) - complex(numeric)) / scale)
    if worst > tol:
        raise ValueError(f"kernel partials disagree with finite differences: {worst}")
    return worst
