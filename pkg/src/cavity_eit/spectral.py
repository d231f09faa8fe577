"""Frequency-domain response of the double cavity.

All functions accept a scalar or an ndarray of vacuum wavenumbers ``k`` and
broadcast over it.  Near resonance several quantities are small differences
of O(1) terms (the horizontal-cavity denominator is ~2 R2 at k0); those are
evaluated in a cancellation-free form so that unitarity survives R2 ~ 1e-8.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .constants import C, TWO_PI
from .device import require_valid
from .errors import (DegenerateWarning, NoSplitResonanceError, SingularityWarning,
                     ValidityWarning)

SINGULAR_B4 = 1e-14


@dataclass(frozen=True)
class BFactors:
    """Round-trip reflection of the BS2 sub-system seen from BS1, ``b = (b1+b2+b3)/b4``."""
    b: complex
    b1: complex
    b2: complex
    b3: complex
    b4: complex
    singular: bool = False


@dataclass(frozen=True)
class GMatrix:
    g11: complex
    g12: complex
    g21: complex
    g22: complex
    singular: bool = False

    def column_a(self):
        """Outputs (a', b') for unit input a."""
        return self.g11, self.g21

    def apply(self, a, b=0.0):
        return self.g11 * a + self.g12 * b, self.g21 * a + self.g22 * b

    def as_array(self):
        return np.array([[self.g11, self.g12], [self.g21, self.g22]])


# 2 pi split so that n * _2PI_A and n * _2PI_B are exact for |n| < 2**22
_2PI_A = 6.283185303211212
_2PI_B = 3.9683743166540886e-09
_2PI_C = 2.068073192717642e-18


def reduce_angle(x):
    """``x`` reduced to [-pi, pi] without the ``n * (2 pi - fl(2 pi))`` drift.

    Subtracting ``n * TWO_PI`` in plain floating point shifts the result by
    about n * 2.4e-16, which on a resonance with quality factor 1e5 is a
    visible error.  The three-part constant keeps the subtraction exact
    for |x| up to about 1.3e7, far beyond any round-trip phase here.
    """
    x = np.asarray(x, dtype=float)
    n = np.round(x / TWO_PI)
    return ((x - n * _2PI_A) - n * _2PI_B) - n * _2PI_C


def _reduced_round_trip_phases(geometry, k):
    """``2 k L_j`` for j = 1..5 reduced to (-pi, pi]; shape (5,) + k.shape.

    Every composite phase is built as a sum of these, so a rounding error in
    k L_j is a consistent perturbation of one segment length, not a broken
    network.
    """
    k = np.asarray(k, dtype=float)
    out = []
    for length in geometry.lengths:
        out.append(reduce_angle(2.0 * k * length))
    return np.array(out)


def _one_minus_rotation(log_mag, theta):
    """``1 - exp(log_mag + i theta)`` without cancellation for small results."""
    em1 = np.expm1(log_mag)
    s = np.sin(0.5 * theta)
    re = 2.0 * s * s - em1 * np.cos(theta)
    im = -np.exp(log_mag) * np.sin(theta)
    return re + 1j * im


def _log1m(x):
    with np.errstate(divide="ignore"):
        return np.log1p(-np.asarray(x, dtype=float))


def _scalar(x):
    x = np.asarray(x)
    return x.item() if x.ndim == 0 else x


def _b_terms(params, k):
    """Raw terms plus cancellation-free numerator and b4."""
    bs2 = params.bs2
    A1m, A2m, A3m, _ = (m.A for m in params.mirrors)
    m1, m2, m3 = (math.sqrt(1.0 - a) for a in (A1m, A2m, A3m))
    d1, d2, d3, d4, _ = _reduced_round_trip_phases(params.geometry, k)
    R2, T2, A2 = bs2.R, bs2.T, bs2.A
    e14 = np.exp(1j * (d1 + d4))
    dH = d2 + d3

    b1 = (1.0 - A2) ** 2 * math.sqrt((1 - A1m) * (1 - A2m) * (1 - A3m)) * np.exp(1j * (d1 + d4 + dH))
    b2 = -T2 * m2 * e14
    b3 = R2 * m3 * np.exp(1j * (d1 + d2))
    b4_direct = 1.0 - m1 * (T2 * m3 * np.exp(1j * dH) - R2 * m2 * np.exp(1j * (d3 + d4)))

    # b4 = [1 - m1 m3 T2 e^{i dH}] + m1 m2 R2 e^{i(d3+d4)}, with T2 = 1 - R2 - A2
    log_x = 0.5 * _log1m(A1m) + 0.5 * _log1m(A3m) + _log1m(R2 + A2)
    b4 = _one_minus_rotation(log_x, dH) + m1 * m2 * R2 * np.exp(1j * (d3 + d4))
    # b1 + b2 = m2 e14 [(1 - T2) - (1 - (1-A2)^2 m1 m3 e^{i dH})]
    log_xp = 2.0 * _log1m(A2) + 0.5 * _log1m(A1m) + 0.5 * _log1m(A3m)
    numerator = m2 * e14 * ((R2 + A2) - _one_minus_rotation(log_xp, dH)) + b3
    if m1 == 0.0 or m3 == 0.0 or not np.isfinite(log_x).all():
        # fully absorbing horizontal mirror: no cancellation possible
        b4 = b4_direct
        numerator = b1 + b2 + b3
    limit = -(1.0 - A2) * m2 * e14
    return b1, b2, b3, b4, numerator, limit


def b_factor(params, k):
    """B-factor and its constituent terms at wavenumber(s) ``k``.

    When ``|b4| < 1e-14`` (lossless horizontal cavity with R2 = 0 exactly on
    its resonance) the algebraic limit ``-(1-A2) sqrt(1-A_M2) e^{2ik(L1+L4)}``
    is returned and a :class:`SingularityWarning` is emitted.
    """
    require_valid(params)
    b1, b2, b3, b4, numerator, limit = _b_terms(params, k)
    singular = np.abs(b4) < SINGULAR_B4
    with np.errstate(divide="ignore", invalid="ignore"):
        b = np.where(singular, limit, numerator / np.where(singular, 1.0, b4))
    if np.any(singular):
        warnings.warn("removable singularity |B4| < 1e-14; algebraic limit used",
                      SingularityWarning, stacklevel=2)
    return BFactors(_scalar(b), _scalar(b1), _scalar(b2), _scalar(b3), _scalar(b4),
                    _scalar(singular))


def _g_from_b(params, k, bf):
    bs1 = params.bs1
    m4 = params.m4.amplitude
    d5 = _reduced_round_trip_phases(params.geometry, k)[4]
    loop = m4 * np.exp(1j * d5)
    denom = 1.0 + bs1.T * loop * bf.b
    g11 = bs1.t * (1.0 + (1.0 - bs1.A) * loop * bf.b) / denom
    g12 = -bs1.R * bf.b / denom
    g21 = bs1.R * loop / denom
    return GMatrix(_scalar(g11), _scalar(g12), _scalar(g21), _scalar(g11), bf.singular)


def g_matrix(params, k):
    """Input-output matrix ``(a', b') = G (a, b)`` at wavenumber(s) ``k``."""
    bf = b_factor(params, k)
    return _g_from_b(params, k, bf)


@dataclass(frozen=True)
class SpectralGrid:
    k_min: float
    k_max: float
    points: int

    def __post_init__(self):
        if self.points < 1:
            raise ValueError("grid needs at least one point")
        if self.points == 1 and self.k_min != self.k_max:
            raise ValueError("single-point grid needs k_min == k_max")
        if self.points > 1 and not self.k_max > self.k_min:
            raise ValueError("grid must be strictly increasing")

    @classmethod
    def around(cls, k0, half_width, points):
        return cls(k0 - half_width, k0 + half_width, points)

    @property
    def k(self):
        return np.linspace(self.k_min, self.k_max, self.points)


SWEEP_HEADER = ("k_rad_per_m", "delta_k_over_k0", "re_g11", "im_g11", "abs_g11",
                "abs_g12", "abs_g21", "p_absorb_a")


@dataclass(frozen=True)
class SweepTable:
    k: np.ndarray
    k0: float
    g: GMatrix

    @property
    def p_absorb_a(self):
        return 1.0 - np.abs(self.g.g11) ** 2 - np.abs(self.g.g12) ** 2

    def columns(self):
        g = self.g
        return np.column_stack([
            self.k, (self.k - self.k0) / self.k0, np.real(g.g11), np.imag(g.g11),
            np.abs(g.g11), np.abs(g.g12), np.abs(g.g21), self.p_absorb_a,
        ])

    def __len__(self):
        return len(self.k)


def response_sweep(params, grid):
    """G matrix and absorption probability on every point of ``grid``."""
    k = grid.k
    g = g_matrix(params, k)
    g = GMatrix(*(np.atleast_1d(x) for x in (g.g11, g.g12, g.g21, g.g22)),
                singular=np.atleast_1d(g.singular))
    return SweepTable(k=k, k0=params.k0, g=g)


def splitting_estimate(params):
    """Half-separation of the split resonances, sqrt(R2 / (L_H L_V)), in rad/m."""
    R2 = params.bs2.R
    if R2 <= 0.0:
        warnings.warn("R2 = 0: resonance is not split", DegenerateWarning, stacklevel=2)
        return 0.0
    g = params.geometry
    return math.sqrt(R2 / (g.L_H * g.L_V))


def find_transmission_zeros(params, scan_points=10_000, span=5.0):
    """Wavenumbers ``(k-, k+)`` of the minima of |g11| nearest to k0.

    A coarse scan over ``k0 +- span * splitting_estimate`` brackets the minima,
    each refined by golden-section search in the detuning.
    """
    require_valid(params)
    k0 = params.k0
    dk_est = splitting_estimate(params) if params.bs2.R > 0 else 0.0
    if dk_est == 0.0 or params.bs1.R == 0.0:
        raise NoSplitResonanceError("no split resonance (R1 = 0 or R2 = 0)")
    delta = np.linspace(-span * dk_est, span * dk_est, scan_points)
    mag = np.abs(g_matrix(params, k0 + delta).g11)
    inner = mag[1:-1]
    is_min = (inner < mag[:-2]) & (inner < mag[2:])
    # a genuine dip, not ripple on a flat response
    is_min &= inner < (1.0 - 1e-6) * mag.max()
    idx = np.nonzero(is_min)[0] + 1
    left = idx[delta[idx] < 0]
    right = idx[delta[idx] > 0]
    if left.size == 0 or right.size == 0:
        raise NoSplitResonanceError("no split resonance: |g11| has no minima on both sides of k0")

    def refine(i):
        f = lambda d: float(np.abs(g_matrix(params, k0 + d).g11))
        res = minimize_scalar(f, bracket=(delta[i - 1], delta[i], delta[i + 1]),
                              method="golden", tol=1e-12)
        return k0 + res.x

    return refine(left[-1]), refine(right[0])


def delay_length(params):
    """L_D = R1 L_H / (2 R2); infinite (with a warning) for R2 = 0."""
    R2 = params.bs2.R
    if R2 <= 0.0:
        warnings.warn("R2 = 0: infinite delay", DegenerateWarning, stacklevel=2)
        return math.inf
    return params.bs1.R * params.geometry.L_H / (2.0 * R2)


def delay_time(params):
    return delay_length(params) / C


def g11_quadratic_approx(params, dk):
    """Second-order expansion ``exp(i L_D dk - L_D^2 dk^2 / 2)`` of g11 about k0."""
    LD = delay_length(params)
    x = np.asarray(dk, dtype=float) * LD
    if np.any(np.abs(x) >= 1.0):
        warnings.warn("|dk| L_D >= 1: quadratic expansion of g11 not valid",
                      ValidityWarning, stacklevel=2)
    return _scalar(np.exp(1j * x - 0.5 * x * x))


@dataclass(frozen=True)
class SingleCavityResponse:
    q: complex  # reflected amplitude
    p: complex  # transmitted amplitude
    transmission_resonant: float
    reflection_resonant: float
    linewidth: float
    lorentz_transmission: float
    lorentz_reflection: float


def single_cavity_response(R, T, A, L, k):
    """Conventional two-mirror cavity with mirror matrix ``[[it, -r], [-r, it]]``.

    Returns the exact amplitudes together with the near-resonance Lorentzian
    forms (evaluated at ``k`` relative to the nearest resonance ``k0 L = n pi``).
    """
    if abs(R + T + A - 1.0) > 1e-12:
        raise ValueError("R + T + A must equal 1")
    k = np.asarray(k, dtype=float)
    r = math.sqrt(R)
    e2 = np.exp(2j * k * L)
    denom = 1.0 - R * e2
    q = r * ((1.0 - A) * e2 - 1.0) / denom
    p = -T * np.exp(1j * k * L) / denom
    linewidth = (T + A) / (2.0 * math.sqrt(R) * L)
    k_res = np.round(k * L / math.pi) * math.pi / L
    u = ((k - k_res) / linewidth) ** 2
    lorentz_t = T * T / (T + A) ** 2 / (1.0 + u)
    lorentz_r = A * A * R / (T + A) ** 2 / (1.0 + u) + (1.0 - A) * u / (1.0 + u)
    return SingleCavityResponse(
        q=_scalar(q), p=_scalar(p),
        transmission_resonant=T * T / (T + A) ** 2,
        reflection_resonant=A * A * R / (T + A) ** 2,
        linewidth=linewidth,
        lorentz_transmission=_scalar(lorentz_t),
        lorentz_reflection=_scalar(lorentz_r),
    )


def moving_phase_shift(params, v):
    """Phase acquired when the device moves at speed ``v`` along the signal path."""
    return params.geometry.omega0 * delay_time(params) * v / C
