"""Four-level EIT medium and the conditional phase shift of a probe.

The signal photon is stored in the horizontal cavity of the double-cavity
device; the probe crosses the EIT medium placed there.  All formulas are the
fourth-order perturbative expressions; nothing is propagated through the atoms.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.integrate import quad

from .conditions import at_least, at_most, much_greater, much_less
from .constants import C, EPSILON_0, HBAR
from .device import require_valid
from .errors import ValidityWarning
from .intracavity import HORIZONTAL, SEGMENT_LENGTH_INDEX
from .spectral import delay_time, g_matrix


@dataclass(frozen=True)
class EitMediumParams:
    """Medium constants, SI units throughout (N in m^-3, rates in s^-1)."""
    N: float
    mu13: float
    mu24: float
    gamma3: float
    gamma4: float
    rabi: float       # |Omega| of the coupling field
    Delta: float      # signal detuning from |2> - |4>
    delta: float      # probe detuning from |1> - |3>
    wavelength: float
    L: float          # medium length
    S: float          # beam cross-section
    tau_p: float      # probe duration

    def __post_init__(self):
        bad = [f"{k}={v!r}" for k, v in asdict(self).items()
               if not (isinstance(v, (int, float)) and v > 0)]
        if bad:
            raise ValueError("medium parameters must be positive: " + ", ".join(bad))
        if self.Delta <= self.gamma4:
            warnings.warn("Delta <= gamma4: two-photon absorption comparable to the phase shift",
                          ValidityWarning, stacklevel=2)

    @property
    def k_p(self):
        return 2.0 * math.pi / self.wavelength

    def scaled(self, **changes):
        return replace(self, **changes)


def rubidium_medium(device=None, **overrides):
    """Cold rubidium gas at 795 nm; ``L`` defaults to the horizontal cavity length."""
    L = device.geometry.L_H if device is not None else 30 * 795e-9
    values = dict(N=1e20, mu13=1e-29, mu24=1e-29, gamma3=1e6, gamma4=1e6, rabi=1e9,
                  Delta=1e8, delta=1e9, wavelength=795e-9, L=L, S=1e-10, tau_p=1e-9)
    values.update(overrides)
    return EitMediumParams(**values)


def kerr_index(medium, Es2):
    """Kerr refractive index felt by the probe for squared signal field ``Es2`` (V^2/m^2)."""
    m = medium
    return (m.N * m.mu13 ** 2 * m.mu24 ** 2 * np.asarray(Es2)
            / (8.0 * EPSILON_0 * HBAR ** 3 * m.rabi ** 2 * m.Delta))


def group_velocity(medium):
    m = medium
    return EPSILON_0 * HBAR * m.wavelength * m.rabi ** 2 / (4.0 * math.pi * m.N * m.mu13 ** 2)


def alpha1(medium):
    """Single-photon probe absorption coefficient (1/m)."""
    m = medium
    return (32.0 * math.pi ** 2 * m.N * m.mu13 ** 2 * m.gamma3 * m.delta ** 2
            / (EPSILON_0 * HBAR * m.wavelength * m.rabi ** 4))


def alpha2(medium, Es2):
    """Two-photon (probe + signal) absorption coefficient (1/m)."""
    m = medium
    return (math.pi ** 2 * m.N * m.mu13 ** 2 * m.mu24 ** 2 * m.gamma4 * np.asarray(Es2)
            / (2.0 * EPSILON_0 * HBAR ** 3 * m.wavelength * m.rabi ** 2 * m.Delta ** 2))


def single_photon_field2(omega, S, tau_s):
    """Squared peak field ``E0^2`` of a single-photon Gaussian pulse."""
    return math.sqrt(2.0 / math.pi) * HBAR * omega / (C * EPSILON_0 * S * tau_s)


def broadening_factor(tau_d, tau_s):
    """``(1 + tau_D^2 / 2 tau_s^2)^(-1/2)``."""
    return 1.0 / math.sqrt(1.0 + tau_d ** 2 / (2.0 * tau_s ** 2))


def tau_s_for_factor(tau_d, factor):
    """Signal half-width giving the requested broadening factor (0 < factor < 1)."""
    if not 0.0 < factor < 1.0:
        raise ValueError("factor must lie in (0, 1)")
    return tau_d / math.sqrt(2.0 * (factor ** -2 - 1.0))


def _ratio(device):
    R2 = device.bs2.R
    if R2 <= 0.0:
        raise ValueError("R2 must be positive")
    return device.bs1.R / R2


def horizontal_signal_field2(t, device, tau_s, S):
    """|E_{s,H}(t)|^2 of the Gaussian-approximated intracavity signal."""
    tau_d = delay_time(device)
    f = broadening_factor(tau_d, tau_s)
    e02 = single_photon_field2(device.geometry.omega0, S, tau_s)
    t = np.asarray(t, dtype=float)
    return 0.25 * e02 * _ratio(device) * f * f * np.exp(-((t - tau_d) ** 2) * f * f
                                                      / (2.0 * tau_s ** 2))


@dataclass(frozen=True)
class EnergyIntegral:
    value: float
    quadrature: float
    rel_diff: float


def signal_energy_integral(device, tau_s, medium, check=False):
    """Time integral of the cavity-averaged squared signal field (V^2 m^-2 s).

    With ``check=True`` returns an :class:`EnergyIntegral` that also holds a
    direct quadrature of ``2 |E_{s,H}(t)|^2`` over +-10 (tau_s + tau_D).
    """
    tau_d = delay_time(device)
    f = broadening_factor(tau_d, tau_s)
    value = (_ratio(device) * 2.0 * math.pi * HBAR
             / (EPSILON_0 * device.geometry.wavelength * medium.S) * f)
    if not check:
        return value
    span = 10.0 * (tau_s + tau_d)
    g = lambda t: 2.0 * float(horizontal_signal_field2(t, device, tau_s, medium.S))
    q, _ = quad(g, tau_d - span, tau_d + span, points=[tau_d], epsabs=0.0, epsrel=1e-12,
                limit=200)
    return EnergyIntegral(value, q, abs(q - value) / value)


def _time_condition(device, medium, tau_s):
    tau_d = delay_time(device)
    return at_least("L/v_g >~ 4 sqrt(tau_s^2 + tau_D^2/2)",
                    medium.L / group_velocity(medium),
                    4.0 * math.sqrt(tau_s ** 2 + 0.5 * tau_d ** 2))


def phase_shift(device, medium, tau_s):
    """Closed-form conditional phase shift of the probe (rad)."""
    cond = _time_condition(device, medium, tau_s)
    if cond.status != "satisfied":
        warnings.warn("probe transit shorter than the signal's time in the cavity "
                      f"(ratio {cond.ratio:.3g})", ValidityWarning, stacklevel=2)
    f = broadening_factor(delay_time(device), tau_s)
    return (math.pi / 8.0 * _ratio(device) * medium.mu24 ** 2
            / (EPSILON_0 * HBAR * device.geometry.wavelength * medium.S * medium.Delta) * f)


def phase_from_energy(medium, energy_integral):
    """``mu24^2 / (16 hbar^2 Delta) * integral |E_s|^2 dt``."""
    return medium.mu24 ** 2 / (16.0 * HBAR ** 2 * medium.Delta) * energy_integral


def phase_shift_numeric(device, medium, pulse, grid=None):
    """Phase shift from the exact intracavity envelope of ``pulse``.

    The cavity-averaged squared field is the length-weighted sum of both
    travelling directions in each horizontal arm, scaled by the single-photon
    ``E0^2``; its integral over the whole grid replaces the Gaussian estimate.
    """
    from .pulse import propagate_pulse

    rec = propagate_pulse(device, pulse, grid, segments=True)
    lengths = device.geometry.lengths
    mean2 = np.zeros(len(rec.t))
    for name in HORIZONTAL:
        mean2 += lengths[SEGMENT_LENGTH_INDEX[name]] * np.abs(rec.segments[name]) ** 2
    mean2 /= device.geometry.L_H
    mean2 /= abs(pulse.amplitude) ** 2
    e02 = single_photon_field2(device.geometry.omega0, medium.S, pulse.tau_s)
    integral = e02 * float(np.sum(mean2) * rec.dt)
    return phase_from_energy(medium, integral)


def two_photon_probability(device, medium, tau_s):
    f = broadening_factor(delay_time(device), tau_s)
    return (math.pi ** 2 / 4.0 * medium.mu24 ** 2 * medium.gamma4
            / (EPSILON_0 * HBAR * medium.S * device.geometry.wavelength * medium.Delta ** 2)
            * _ratio(device) * f)


@dataclass(frozen=True)
class FreeMediumComparison:
    """Co-propagating signal and probe without a cavity."""
    beam_diameter: float
    linewidth: float
    field2: float
    n_kerr: float
    length_for_pi: float
    switching_time: float
    rayleigh_length: float
    length_over_rayleigh: float
    switching_ratio: float  # free-medium over cavity switching time


def free_medium_comparison(device, medium, beam_diameter=10e-6, linewidth=1e6):
    """Kerr index of a free single-photon signal and the length needed for pi."""
    S = beam_diameter ** 2
    e02 = single_photon_field2(device.geometry.omega0, S, 1.0 / linewidth)
    n_k = float(kerr_index(medium, e02))
    length = medium.wavelength / (2.0 * n_k) if n_k > 0 else math.inf
    v_g = group_velocity(medium)
    l_r = beam_diameter ** 2 / medium.wavelength
    return FreeMediumComparison(
        beam_diameter=beam_diameter, linewidth=linewidth, field2=e02, n_kerr=n_k,
        length_for_pi=length, switching_time=length / v_g, rayleigh_length=l_r,
        length_over_rayleigh=length / l_r,
        switching_ratio=(length / v_g) / (device.geometry.L_H / v_g),
    )


@dataclass(frozen=True)
class XpmReport:
    delta_phi: float
    v_g: float
    alpha1: float
    alpha1_L: float
    P2: float
    P2_over_delta_phi: float
    energy_integral: float
    tau_D: float
    tau_s: float
    broadening_factor: float
    switching_time: float
    conditions: tuple
    # resonant signal transmission/reflection, expansion next to exact
    g11_expansion: float
    g21_expansion: float
    reflection_probability: float
    g11_exact: complex
    g21_exact: complex
    target_phase: float
    scale_to_target: float
    R1_over_R2: float
    R1_over_R2_for_target: float
    free_medium: FreeMediumComparison = field(default=None)

    def as_dict(self):
        out = {}
        for key, value in asdict(self).items():
            if key == "conditions":
                value = [c.as_dict() for c in self.conditions]
            elif isinstance(value, complex):
                value = {"re": value.real, "im": value.imag, "abs": abs(value)}
            out[key] = value
        return out


def feasibility_report(device, medium, tau_s=None, target_phase=math.pi):
    """Every parameter condition with both sides and the margin ratio.

    ``tau_s`` defaults to the width that makes the broadening factor 1/2.
    """
    require_valid(device)
    tau_d = delay_time(device)
    if tau_s is None:
        tau_s = tau_s_for_factor(tau_d, 0.5)
    m = medium
    R1, R2 = device.bs1.R, device.bs2.R
    v_g = group_velocity(m)
    a1 = alpha1(m)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ValidityWarning)
        dphi = phase_shift(device, m, tau_s)
    p2 = two_photon_probability(device, m, tau_s)
    lam = m.wavelength
    conditions = (
        _time_condition(device, m, tau_s),
        at_most("v_g <~ (sqrt6/8)(R2/R1) c", v_g, math.sqrt(6.0) / 8.0 * R2 / R1 * C),
        at_most("|Omega|^2 <~ (sqrt6 pi/2)(R2/R1) c mu13^2 N/(eps0 hbar lambda)",
                m.rabi ** 2, math.sqrt(6.0) * math.pi / 2.0 * R2 / R1 * C * m.mu13 ** 2
                * m.N / (EPSILON_0 * HBAR * lam)),
        much_less("P2 << 1", p2, 1.0),
        much_less("P2/dphi = 2 pi gamma4/Delta << 1", 2.0 * math.pi * m.gamma4 / m.Delta, 1.0),
        much_less("alpha1 L << 1", a1 * m.L, 1.0),
        much_less("1/delta << L/v_g", 1.0 / m.delta, m.L / v_g),
        much_greater("N >> 2 eps0 hbar lambda gamma3/(mu13^2 L)", m.N,
                     2.0 * EPSILON_0 * HBAR * lam * m.gamma3 / (m.mu13 ** 2 * m.L)),
        much_less("delta << |Omega|^2/(8 pi gamma3)", m.delta,
                  m.rabi ** 2 / (8.0 * math.pi * m.gamma3)),
    )
    g = g_matrix(device, device.k0)
    scale = target_phase / dphi if dphi > 0 else math.inf
    return XpmReport(
        delta_phi=dphi, v_g=v_g, alpha1=a1, alpha1_L=a1 * m.L, P2=p2,
        P2_over_delta_phi=p2 / dphi, energy_integral=signal_energy_integral(device, tau_s, m),
        tau_D=tau_d, tau_s=tau_s, broadening_factor=broadening_factor(tau_d, tau_s),
        switching_time=m.L / v_g, conditions=conditions,
        g11_expansion=1.0 - R1 * R1 / 8.0, g21_expansion=R1 / 2.0,
        reflection_probability=R1 * R1 / 4.0,
        g11_exact=complex(g.g11), g21_exact=complex(g.g21),
        target_phase=target_phase, scale_to_target=scale, R1_over_R2=R1 / R2,
        R1_over_R2_for_target=R1 / R2 * scale,
        free_medium=free_medium_comparison(device, m),
    )
