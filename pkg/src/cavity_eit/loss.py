"""Absorption probabilities, their small-loss expansion and wave-packet averages."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .conditions import much_less
from .constants import C
from .device import MirrorSpec, require_valid
from .errors import ValidityWarning
from .spectral import delay_length, delay_time, g_matrix

LOSS_HEADER = ("A_value", "which_mirrors", "P_bar")

MIRROR_SETS = {
    "H": ("m1", "m3"),   # horizontal cavity mirrors
    "V": ("m2", "m4"),   # vertical cavity mirrors
    "M1": ("m1",), "M2": ("m2",), "M3": ("m3",), "M4": ("m4",),
}


@dataclass(frozen=True)
class LossReport:
    P_a: float
    P_b: float
    expansion: float
    conditions: tuple = ()


def monochromatic_absorption(params, k):
    """``(P_a, P_b) = (1 - |G11|^2 - |G12|^2, 1 - |G22|^2 - |G21|^2)``.

    Note that ``P_b`` (the column sum) is the absorbed fraction of a photon
    entering through port a; ``P_a`` is the row sum.  They coincide to first
    order in the absorptions but not beyond.
    """
    require_valid(params)
    g = g_matrix(params, k)
    p_a = 1.0 - np.abs(g.g11) ** 2 - np.abs(g.g12) ** 2
    p_b = 1.0 - np.abs(g.g22) ** 2 - np.abs(g.g21) ** 2
    if np.ndim(p_a) == 0:
        return float(p_a), float(p_b)
    return p_a, p_b


def absorbed_fraction(params, k):
    """Fraction of a monochromatic photon entering port a that is absorbed."""
    g = g_matrix(params, k)
    out = 1.0 - np.abs(g.g11) ** 2 - np.abs(g.g21) ** 2
    return float(out) if np.ndim(out) == 0 else out


def absorption_expansion(params, dk, max_x=0.3, max_absorption=1e-3):
    """Second-order small-loss expansion of the absorption probability about k0.

    Warns (ValidityWarning) when ``|dk| L_D >= max_x`` or when any absorption
    exceeds ``max_absorption``.
    """
    R1, R2 = params.bs1.R, params.bs2.R
    A1, A2 = params.bs1.A, params.bs2.A
    AM1, AM2, AM3, AM4 = (m.A for m in params.mirrors)
    LD = delay_length(params)
    x = np.asarray(dk, dtype=float) * LD
    if np.any(np.abs(x) >= max_x):
        warnings.warn(f"|dk| L_D >= {max_x}: loss expansion outside its range",
                      ValidityWarning, stacklevel=2)
    if max(A1, A2, AM1, AM2, AM3, AM4) > max_absorption:
        warnings.warn("absorption not small: loss expansion unreliable",
                      ValidityWarning, stacklevel=2)
    horizontal = (AM1 + AM3 + A2) * R1 / (4.0 * R2)
    p = (A1 + AM4 * R1 / 4.0 + horizontal * (1.0 - R1 * R1 / 4.0)
         + x * x * ((2.0 * A1 + AM2 + AM4) / R1 - horizontal * (1.0 + R1)))
    return float(p) if np.ndim(p) == 0 else p


def _gaussian_nodes(tau_s, n_sigma=12.0, points=20001):
    # |spectrum|^2 of exp(-t^2/4 tau^2) is exp(-2 nu^2 tau^2): sigma_nu = 1/(2 tau)
    sigma = 0.5 / tau_s
    nu = np.linspace(-n_sigma * sigma, n_sigma * sigma, points)
    w = np.exp(-0.5 * (nu / sigma) ** 2)
    w[0] *= 0.5
    w[-1] *= 0.5
    return nu, w / w.sum()


def wavepacket_absorption(params, pulse=None, points=20001):
    """Absorption probability of a photon in a Gaussian wave packet.

    ``1 - (transmitted + reflected)/input`` by quadrature of the exact G matrix
    over the packet's power spectrum.  The default packet has half-width
    ``tau_D`` and is centred on k0.
    """
    require_valid(params)
    if pulse is None:
        carrier, tau_s = params.k0, delay_time(params)
    else:
        carrier, tau_s = pulse.carrier, pulse.tau_s
    nu, w = _gaussian_nodes(tau_s, points=points)
    absorbed = absorbed_fraction(params, carrier - nu / C)
    return float(np.sum(w * absorbed))


def with_absorption(params, which, value):
    """Copy of ``params`` with the mirrors of set ``which`` at absorption ``value``."""
    try:
        names = MIRROR_SETS[which]
    except KeyError:
        raise KeyError(f"unknown mirror set {which!r}; choose from "
                       f"{', '.join(MIRROR_SETS)}") from None
    return replace(params, **{name: MirrorSpec(value) for name in names})


def loss_sweep(params, which, values, tau_s=None):
    """``(A, P_bar)`` rows for the mirror set ``which`` swept over ``values``.

    ``tau_s`` defaults to the delay time of ``params`` itself, so every point of
    the sweep uses the same wave packet.
    """
    from .pulse import PulseSpec

    if tau_s is None:
        tau_s = delay_time(params)
    pulse = PulseSpec(params.k0, tau_s)
    return [(float(v), wavepacket_absorption(with_absorption(params, which, v), pulse))
            for v in values]


def loss_negligibility(params):
    """Margins of ``A1, A_M2, A_M4 << R1`` and ``A2, A_M1, A_M3 << R2/R1``."""
    R1, R2 = params.bs1.R, params.bs2.R
    scale_h = R2 / R1 if R1 > 0 else math.inf
    return (
        much_less("A1 << R1", params.bs1.A, R1),
        much_less("A_M2 << R1", params.m2.A, R1),
        much_less("A_M4 << R1", params.m4.A, R1),
        much_less("A2 << R2/R1", params.bs2.A, scale_h),
        much_less("A_M1 << R2/R1", params.m1.A, scale_h),
        much_less("A_M3 << R2/R1", params.m3.A, scale_h),
    )


def loss_report(params, dk=0.0):
    p_a, p_b = monochromatic_absorption(params, params.k0 + dk)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ValidityWarning)
        expansion = absorption_expansion(params, dk)
    return LossReport(P_a=p_a, P_b=p_b, expansion=expansion,
                      conditions=loss_negligibility(params))


@dataclass(frozen=True)
class IfmFractions:
    transmitted: float
    reflected: float
    lost: float
    exact_transmitted: float
    exact_reflected: float
    exact_lost: float


def ifm_fractions(params):
    """Resonant fractions with an absorber in the horizontal cavity.

    Closed forms ``4 T1 R2^2/R1^2``, ``1 - 4 T1 R2/R1`` and
    ``4 T1 R2 (R1 - R2)/R1^2`` next to the exact values at k0.
    """
    require_valid(params)
    if params.m1.A != 1.0 and params.m3.A != 1.0:
        warnings.warn("neither horizontal mirror is fully absorbing",
                      ValidityWarning, stacklevel=2)
    R1, T1, R2 = params.bs1.R, params.bs1.T, params.bs2.R
    g = g_matrix(params, params.k0)
    t_ex = abs(g.g11) ** 2
    r_ex = abs(g.g21) ** 2
    return IfmFractions(
        transmitted=4.0 * T1 * R2 * R2 / (R1 * R1),
        reflected=1.0 - 4.0 * T1 * R2 / R1,
        lost=4.0 * T1 * R2 * (R1 - R2) / (R1 * R1),
        exact_transmitted=t_ex, exact_reflected=r_ex, exact_lost=1.0 - t_ex - r_ex,
    )
