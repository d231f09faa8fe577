"""Time-domain pulses by spectral synthesis.

Fields are slowly varying envelopes around the carrier: the full field is
``env(t) exp(-i omega_c t)``.  An envelope component ``exp(+i nu t)`` therefore
sits at angular frequency ``omega_c - nu``, i.e. at wavenumber ``k_c - nu/c``,
and is multiplied by the exact frequency-domain response there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from .constants import C
from .device import require_valid
from .errors import NumericalGuardError
from .intracavity import HORIZONTAL, SEGMENT_LENGTH_INDEX, SEGMENTS, VERTICAL, segment_amplitudes
from .spectral import delay_time, g_matrix

# segment amplitudes referenced at the arrival face (see intracavity)
_ARRIVAL_REFERENCED = ("a21", "aM41", "aM12", "aM22", "aM32")

PULSE_HEADER = ("t_s", "abs2_in", "abs2_out_a", "abs2_out_b",
                "frac_front", "frac_H", "frac_V", "frac_behind")


@dataclass(frozen=True)
class PulseSpec:
    """Gaussian envelope ``amplitude * exp(-(t - center)^2 / (4 tau_s^2))``.

    ``tau_s`` is the amplitude half-width, so the intensity has standard
    deviation ``tau_s``.  ``carrier`` is the carrier wavenumber in rad/m.
    """
    carrier: float
    tau_s: float
    amplitude: complex = 1.0
    center: float = 0.0

    def __post_init__(self):
        if not self.tau_s > 0:
            raise ValueError(f"tau_s must be positive, got {self.tau_s!r}")

    def envelope(self, t):
        t = np.asarray(t, dtype=float)
        return self.amplitude * np.exp(-((t - self.center) ** 2) / (4.0 * self.tau_s ** 2))

    @property
    def energy(self):
        """Integral of |envelope|^2 over all time."""
        return abs(self.amplitude) ** 2 * math.sqrt(2.0 * math.pi) * self.tau_s


@dataclass(frozen=True)
class TimeGrid:
    start: float
    stop: float
    n: int = 2 ** 16

    def __post_init__(self):
        if self.n < 2 or self.n & (self.n - 1):
            raise ValueError(f"sample count must be a power of two, got {self.n}")
        if not self.stop > self.start:
            raise ValueError("grid stop must exceed start")

    @classmethod
    def default_for(cls, params, pulse, n=2 ** 16):
        """[-8, +24] max(tau_s, tau_D) around the input peak."""
        T = max(pulse.tau_s, delay_time(params) if params.bs2.R > 0 else 0.0)
        return cls(pulse.center - 8.0 * T, pulse.center + 24.0 * T, n)

    @property
    def dt(self):
        return (self.stop - self.start) / self.n

    @property
    def t(self):
        return self.start + self.dt * np.arange(self.n)

    @property
    def nu(self):
        """Angular envelope frequencies in FFT order."""
        return 2.0 * math.pi * np.fft.fftfreq(self.n, self.dt)

    def check(self, params, pulse):
        """Raise ValueError if the grid cannot hold the pulse and its response."""
        tau_d = delay_time(params) if params.bs2.R > 0 else 0.0
        span = self.stop - self.start
        if span < 8.0 * max(pulse.tau_s, tau_d):
            raise ValueError(f"grid span {span:.3g} s < 8 max(tau_s, tau_D)")
        if 2.0 * math.pi / self.dt < 20.0 / pulse.tau_s:
            raise ValueError("grid bandwidth below 20/tau_s; use more samples")
        inside = trapezoid(np.abs(pulse.envelope(self.t)) ** 2, dx=self.dt)
        if abs(pulse.energy - inside) > 1e-6 * pulse.energy:
            raise ValueError("input pulse not contained in the grid "
                             f"(missing energy fraction {1 - inside / pulse.energy:.2e})")


@dataclass(frozen=True)
class FieldRecord:
    """Sampled envelopes at BS1 and inside the device, plus energy fractions.

    Fractions are normalised to the total input energy.  ``front`` counts the
    incident light that has not reached BS1 yet plus everything reflected so
    far, ``behind`` everything transmitted so far.
    """
    t: np.ndarray
    a_in: np.ndarray
    a_out: np.ndarray
    b_out: np.ndarray
    a_h: np.ndarray  # BS2 -> M1 amplitude
    frac_front: np.ndarray
    frac_h: np.ndarray
    frac_v: np.ndarray
    frac_behind: np.ndarray
    input_energy: float
    segments: dict = field(default=None, repr=False)

    @property
    def dt(self):
        return self.t[1] - self.t[0]

    @property
    def frac_total(self):
        return self.frac_front + self.frac_h + self.frac_v + self.frac_behind

    def energy(self, x):
        return float(np.sum(np.abs(x) ** 2) * self.dt)

    @property
    def transmitted(self):
        return self.energy(self.a_out) / self.input_energy

    @property
    def reflected(self):
        return self.energy(self.b_out) / self.input_energy

    def rows(self):
        """Columns of ``PULSE_HEADER``; intensities relative to the input peak."""
        peak = np.max(np.abs(self.a_in)) ** 2
        return np.column_stack([
            self.t, np.abs(self.a_in) ** 2 / peak, np.abs(self.a_out) ** 2 / peak,
            np.abs(self.b_out) ** 2 / peak, self.frac_front, self.frac_h,
            self.frac_v, self.frac_behind,
        ])


def _edge_fraction(x, edge):
    p = np.abs(x) ** 2
    total = p.sum()
    if total == 0.0:
        return 0.0
    return (p[:edge].sum() + p[-edge:].sum()) / total


def propagate_pulse(params, pulse, grid=None, segments=True, edge_tol=1e-4):
    """Transmitted, reflected and intracavity envelopes for input ``a = pulse``.

    Raises NumericalGuardError("aliasing") if more than ``edge_tol`` of the
    output energy sits in the outer 1/32 of the grid on either side, which
    means the response wrapped around the periodic FFT window.
    """
    require_valid(params)
    if grid is None:
        grid = TimeGrid.default_for(params, pulse)
    grid.check(params, pulse)
    t = grid.t
    dt = grid.dt
    a_in = pulse.envelope(t).astype(complex)
    spec = np.fft.fft(a_in)
    nu = grid.nu
    k = pulse.carrier - nu / C

    g = g_matrix(params, k)
    a_out = np.fft.ifft(spec * g.g11)
    b_out = np.fft.ifft(spec * g.g21)

    edge = grid.n // 32
    worst = max(_edge_fraction(a_out, edge), _edge_fraction(b_out, edge))
    if worst > edge_tol:
        raise NumericalGuardError(
            "aliasing", f"{worst:.2e} of the output energy is at the grid edges; "
            "enlarge the time grid")

    e_in = float(np.sum(np.abs(a_in) ** 2) * dt)
    p_in = np.abs(a_in) ** 2
    arrived = cumulative_trapezoid(p_in, dx=dt, initial=0.0)
    refl = cumulative_trapezoid(np.abs(b_out) ** 2, dx=dt, initial=0.0)
    trans = cumulative_trapezoid(np.abs(a_out) ** 2, dx=dt, initial=0.0)
    # trapezoid total, so that "not yet arrived" is exactly consistent
    total_in = arrived[-1] + 0.5 * dt * (p_in[0] + p_in[-1])
    front = (total_in - arrived + refl) / total_in
    behind = trans / total_in

    seg_env = {}
    e_h = np.zeros(grid.n)
    e_v = np.zeros(grid.n)
    if segments:
        seg = segment_amplitudes(params, k)
        lengths = params.geometry.lengths
        for name in SEGMENTS:
            length = lengths[SEGMENT_LENGTH_INDEX[name]]
            transfer = np.asarray(getattr(seg, name))
            env = np.fft.ifft(spec * transfer)
            seg_env[name] = env
            # energy stored in the segment now ~ departure envelope at the
            # segment midpoint time, times the transit time
            shift = -0.5 * length / C if name not in _ARRIVAL_REFERENCED else 0.5 * length / C
            mid = np.fft.ifft(spec * transfer * np.exp(1j * nu * shift))
            stored = np.abs(mid) ** 2 * length / C
            if name in HORIZONTAL:
                e_h += stored
            else:
                e_v += stored
    frac_h = e_h / total_in
    frac_v = e_v / total_in

    return FieldRecord(
        t=t, a_in=a_in, a_out=a_out, b_out=b_out,
        a_h=seg_env.get("a2M1", np.full(grid.n, np.nan + 0j)),
        frac_front=front, frac_h=frac_h, frac_v=frac_v, frac_behind=behind,
        input_energy=e_in, segments=seg_env or None,
    )


@dataclass(frozen=True)
class EnergyFractions:
    t: np.ndarray
    front: np.ndarray
    inside_h: np.ndarray
    inside_v: np.ndarray
    behind: np.ndarray
    intensity_in: np.ndarray
    intensity_out: np.ndarray


def energy_fractions(params, pulse, grid=None):
    """Fig. 3 style energy bookkeeping; intensities relative to the input peak."""
    rec = propagate_pulse(params, pulse, grid)
    peak = np.max(np.abs(rec.a_in)) ** 2
    return EnergyFractions(
        t=rec.t, front=rec.frac_front, inside_h=rec.frac_h, inside_v=rec.frac_v,
        behind=rec.frac_behind, intensity_in=np.abs(rec.a_in) ** 2 / peak,
        intensity_out=np.abs(rec.a_out) ** 2 / peak,
    )


def gaussian_response_approx(tau, params):
    """Gaussian impulse response ``exp(-(tau - tau_D)^2 / 2 tau_D^2) / (sqrt(2 pi) tau_D)``."""
    tau_d = delay_time(params)
    tau = np.asarray(tau, dtype=float)
    out = np.exp(-((tau - tau_d) ** 2) / (2.0 * tau_d ** 2)) / (math.sqrt(2.0 * math.pi) * tau_d)
    return out if out.ndim else float(out)


def convolve_gaussian_response(params, pulse, grid):
    """Input envelope convolved with the Gaussian kernel (spectrally, exact)."""
    tau_d = delay_time(params)
    nu = grid.nu
    spec = np.fft.fft(pulse.envelope(grid.t).astype(complex))
    # Fourier transform of the kernel for components exp(+i nu t)
    kernel = np.exp(-1j * nu * tau_d - 0.5 * (nu * tau_d) ** 2)
    return np.fft.ifft(spec * kernel)


def _centroid(t, x):
    w = np.abs(x) ** 2
    return float(np.sum(t * w) / np.sum(w))


def _variance(t, x):
    w = np.abs(x) ** 2
    m = np.sum(t * w) / np.sum(w)
    return float(np.sum((t - m) ** 2 * w) / np.sum(w))


def output_centroid_delay(record):
    """Centroid of |a'(t)|^2 minus centroid of |a(t)|^2."""
    if not np.any(record.a_out):
        raise ValueError("no transmitted energy")
    return _centroid(record.t, record.a_out) - _centroid(record.t, record.a_in)


def output_broadening(record):
    """Growth of the squared amplitude width, ``2 (var_out - var_in)``.

    The variances are those of the intensity profiles.  For Gaussian envelopes
    the amplitude width is sqrt(2) times the intensity width, so this is the
    quantity that equals tau_D^2 when the envelope is broadened by tau_D.
    """
    return 2.0 * (_variance(record.t, record.a_out) - _variance(record.t, record.a_in))
