"""Brute-force reference solutions built only from the local scattering rules.

Nothing here uses the closed-form G matrix or the B-factor: ``steady_state``
iterates the ten directed segment fields until the network settles, and
``time_stepping`` pushes sampled envelopes through explicit delay lines.
Both are slow on purpose and exist to certify the closed forms.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .constants import C
from .device import require_valid
from .errors import NumericalGuardError
from .intracavity import SegmentAmplitudes


@dataclass
class NetworkState:
    """Departure-face amplitude of every directed segment."""
    s1M4: complex = 0j
    sM41: complex = 0j
    s12: complex = 0j
    s21: complex = 0j
    s2M1: complex = 0j
    sM12: complex = 0j
    s2M2: complex = 0j
    sM22: complex = 0j
    s2M3: complex = 0j
    sM32: complex = 0j
    iteration: int = 0

    def values(self):
        return (self.s1M4, self.sM41, self.s12, self.s21, self.s2M1, self.sM12,
                self.s2M2, self.sM22, self.s2M3, self.sM32)


@dataclass(frozen=True)
class SteadyState:
    a_out: complex
    b_out: complex
    segments: SegmentAmplitudes
    iterations: int
    error_estimate: float
    trace: np.ndarray = None  # |a'| at the end of every convergence block


def _local_constants(params):
    bs1, bs2 = params.bs1, params.bs2
    return (math.sqrt(bs1.R), math.sqrt(bs1.T), math.sqrt(bs2.R), math.sqrt(bs2.T),
            *(math.sqrt(1.0 - m.A) for m in params.mirrors))


def _smooth_step(x):
    # C-infinity switch-on from 0 to 1 on [0, 1]
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    f0 = math.exp(-1.0 / x)
    f1 = math.exp(-1.0 / (1.0 - x))
    return f0 / (f0 + f1)


def _jacobi_kernel():
    from numba import njit

    smooth = njit(_smooth_step)

    @njit(cache=True)
    def run(coef, phases, a_full, b_full, tol, max_iter, window, ramp):
        r1, t1, r2, t2 = coef[0], coef[1], coef[2], coef[3]
        m1, m2, m3, m4 = coef[4], coef[5], coef[6], coef[7]
        p1, p2, p3, p4, p5 = phases[0], phases[1], phases[2], phases[3], phases[4]
        ir1 = 1j * r1
        ir2 = 1j * r2
        x = np.zeros(12, np.complex128)  # ten segments, then a', b'
        y = np.zeros(12, np.complex128)
        acc = np.zeros(12, np.complex128)
        mean_prev = np.zeros(12, np.complex128)
        noise = 64.0 * 2.220446049250313e-16
        hist = np.zeros(max_iter // window + 2)
        trace = np.zeros(max_iter // window + 2)
        rho = 1.0
        err = np.inf
        d = 0.0
        n = 0
        blocks = 0
        status = 1
        while n < max_iter:
            n += 1
            w = smooth(n / ramp) if n < ramp else 1.0
            a = a_full * w
            b = b_full * w
            arr_21 = x[3] * p1
            arr_M41 = x[1] * p5
            c = x[2] * p1
            y1 = x[5] * p3
            y2 = x[7] * p4
            y3 = x[9] * p2
            y[0] = ir1 * a + t1 * arr_21
            y[1] = -m4 * (x[0] * p5)
            y[2] = ir1 * b + t1 * arr_M41
            y[3] = t2 * y2 + ir2 * y3
            y[4] = ir2 * y2 + t2 * y3
            y[5] = -m1 * (x[4] * p3)
            y[6] = t2 * c + ir2 * y1
            y[7] = -m2 * (x[6] * p4)
            y[8] = ir2 * c + t2 * y1
            y[9] = -m3 * (x[8] * p2)
            y[10] = t1 * a + ir1 * arr_21
            y[11] = t1 * b + ir1 * arr_M41
            same = True
            for j in range(12):
                if y[j] != x[j]:
                    same = False
                x[j] = y[j]
            if n < ramp:
                continue
            if same:
                # exact fixed point reached one iteration ago
                n -= 1
                err = 0.0
                status = 0
                break
            for j in range(12):
                acc[j] += x[j]
            if n % window != 0:
                continue
            # compare block means of the outputs: rotating (detuned) modes
            # average out, the slow resonant transient shows up as a drift
            d = 0.0
            for j in range(12):
                m = acc[j] / window
                if j >= 10:
                    change = abs(m - mean_prev[j]) / max(1.0, abs(m))
                    if change > d:
                        d = change
                mean_prev[j] = m
                acc[j] = 0.0
            d /= window  # per-iteration drift
            hist[blocks] = d
            trace[blocks] = abs(x[10])
            blocks += 1
            if blocks < 4:
                continue
            if d == 0.0:
                err = 0.0
                status = 0
                break
            # contraction over the second half of the run so far; short
            # baselines are dominated by noise in d
            half = blocks // 2
            d_then = hist[half - 1]
            if d < 0.5 * d_then:
                rho_new = (d / d_then) ** (1.0 / (window * (blocks - half)))
                if rho_new < 1.0:
                    rho = rho_new
                    err = d * rho / (1.0 - rho)
                    if err < tol:
                        status = 0
                        break
            elif d <= noise:
                # no decrease over half the run at rounding level: the
                # transient is below the noise that keeps the detuned
                # modes ringing
                if rho < 1.0:
                    err = d * rho / (1.0 - rho)
                else:
                    err = d * window * blocks
                status = 0
                break
        return x, n, err, d, status, trace[:blocks]

    return run


_JACOBI = None


def steady_state(params, k, a=1.0, b=0.0, tol=1e-12, max_iter=10_000_000, window=64,
                 ramp=4096):
    """Iterate all local beam-splitter/mirror rules until the outputs settle.

    One iteration moves every segment field across its segment once (Jacobi
    sweep, no acceleration).  The outputs are averaged over blocks of
    ``window`` iterations; the drift ``d`` of the block means estimates the
    slow resonant transient, while far-detuned modes (which only ring at
    rounding level) average out.  Segment fields are returned as they stand
    when the outputs have settled.  The contraction ``rho`` is measured against the block half
    way back in the run.  Iteration stops when ``d rho / (1 - rho) < tol``, or
    when ``d`` has stopped decreasing at rounding level.

    The drive is switched on smoothly over ``ramp`` iterations.  A sudden
    switch-on excites far-detuned horizontal-cavity modes that leak out only
    through R2 per pass and would dominate the iteration count; the fixed point
    is unaffected.
    """
    global _JACOBI
    require_valid(params)
    if tol <= 0:
        raise ValueError("tol must be positive")
    coef = np.array(_local_constants(params), dtype=float)
    k = float(k)
    phases = np.array([cmath.exp(1j * k * length) for length in params.geometry.lengths])
    if _JACOBI is None:
        _JACOBI = _jacobi_kernel()
    if params.bs1.R == 0.0:
        ramp = 0  # decoupled cavity: nothing to excite
    x, n, err, d, status, trace = _JACOBI(coef, phases, complex(a), complex(b), float(tol),
                                   int(max_iter), int(window), float(ramp))
    if status != 0:
        raise NumericalGuardError(
            "non-convergence",
            f"round-trip iteration did not converge in {max_iter} iterations "
            f"(last change {d:.3g}); exact lossless resonance of a decoupled sub-cavity?")
    p1, p2, p3, p4, p5 = phases
    x = [complex(v) for v in x]
    segments = SegmentAmplitudes(
        a12=x[2], a21=x[3] * p1, a1M4=x[0], aM41=x[1] * p5,
        a2M1=x[4], aM12=x[5] * p3, a2M2=x[6], aM22=x[7] * p4,
        a2M3=x[8], aM32=x[9] * p2, b5=complex("nan"),
    )
    return SteadyState(a_out=x[10], b_out=x[11], segments=segments, iterations=int(n),
                       error_estimate=float(err), trace=trace.copy())


# ---------------------------------------------------------------------------
# time domain

def _snap_delays(params, dt, max_change=1e-3):
    steps = []
    for i, length in enumerate(params.geometry.lengths, start=1):
        exact = length / (C * dt)
        n = max(1, int(round(exact)))
        if abs(n - exact) > max_change * exact:
            raise NumericalGuardError(
                "lattice-snapping",
                f"L{i}={length!r} m is not a multiple of c*dt within {max_change:g} "
                f"(n={exact:.6f})")
        steps.append(n)
    return steps


def _delay_line_kernel():
    from numba import njit

    @njit(cache=True)
    def run(inp_a, steps, coef, phases, record_every):
        # coef: r1, t1, r2, t2, m1, m2, m3, m4 ; phases: e^{i k0 L_j} for j = 1..5
        n1, n2, n3, n4, n5 = steps[0], steps[1], steps[2], steps[3], steps[4]
        r1, t1, r2, t2 = coef[0], coef[1], coef[2], coef[3]
        m1, m2, m3, m4 = coef[4], coef[5], coef[6], coef[7]
        p1, p2, p3, p4, p5 = phases[0], phases[1], phases[2], phases[3], phases[4]
        ir1 = 1j * r1
        ir2 = 1j * r2
        # ring buffers for the ten directed segments
        b1M4 = np.zeros(n5, np.complex128)
        bM41 = np.zeros(n5, np.complex128)
        b12 = np.zeros(n1, np.complex128)
        b21 = np.zeros(n1, np.complex128)
        b2M1 = np.zeros(n3, np.complex128)
        bM12 = np.zeros(n3, np.complex128)
        b2M2 = np.zeros(n4, np.complex128)
        bM22 = np.zeros(n4, np.complex128)
        b2M3 = np.zeros(n2, np.complex128)
        bM32 = np.zeros(n2, np.complex128)
        n_total = inp_a.shape[0]
        n_rec = (n_total + record_every - 1) // record_every
        out_a = np.zeros(n_rec, np.complex128)
        out_b = np.zeros(n_rec, np.complex128)
        out_h = np.zeros(n_rec, np.complex128)
        energy = np.zeros(3)  # sums of |in|^2, |a'|^2, |b'|^2 over every step
        for n in range(n_total):
            i5 = n % n5
            i1 = n % n1
            i3 = n % n3
            i4 = n % n4
            i2 = n % n2
            # fields arriving now (entered their segment one delay ago)
            arr_21 = b21[i1] * p1
            arr_M41 = bM41[i5] * p5
            c = b12[i1] * p1
            y1 = bM12[i3] * p3
            y2 = bM22[i4] * p4
            y3 = bM32[i2] * p2
            at_m4 = b1M4[i5] * p5
            at_m1 = b2M1[i3] * p3
            at_m2 = b2M2[i4] * p4
            at_m3 = b2M3[i2] * p2
            a_in = inp_a[n]
            b1M4[i5] = ir1 * a_in + t1 * arr_21
            b12[i1] = t1 * arr_M41
            bM41[i5] = -m4 * at_m4
            b21[i1] = t2 * y2 + ir2 * y3
            b2M1[i3] = ir2 * y2 + t2 * y3
            b2M2[i4] = t2 * c + ir2 * y1
            b2M3[i2] = ir2 * c + t2 * y1
            bM12[i3] = -m1 * at_m1
            bM22[i4] = -m2 * at_m2
            bM32[i2] = -m3 * at_m3
            oa = t1 * a_in + ir1 * arr_21
            ob = ir1 * arr_M41
            energy[0] += a_in.real ** 2 + a_in.imag ** 2
            energy[1] += oa.real ** 2 + oa.imag ** 2
            energy[2] += ob.real ** 2 + ob.imag ** 2
            if n % record_every == 0:
                j = n // record_every
                out_a[j] = oa
                out_b[j] = ob
                out_h[j] = b2M1[i3]
        return out_a, out_b, out_h, energy

    return run


_KERNEL = None


@dataclass(frozen=True)
class TimeSeries:
    t: np.ndarray
    a_in: np.ndarray
    a_out: np.ndarray
    b_out: np.ndarray
    a_h: np.ndarray  # BS2 -> M1 departure amplitude
    dt: float
    steps: tuple
    energy_in: float = 0.0  # fine-step sums times dt
    energy_out_a: float = 0.0
    energy_out_b: float = 0.0


def time_stepping(params, pulse, dt, duration, start=None, record_every=1):
    """Explicit delay-line simulation of the slowly varying envelopes.

    Every segment is a FIFO of ``L_j / (c dt)`` samples (lengths must sit on
    the ``c dt`` lattice to within 1e-3); each sample crossing a segment picks
    up the carrier phase ``exp(i k0 L_j)``.  The cavity starts empty at
    ``start`` (default ``-8 tau_s``).  Outputs are kept every ``record_every``
    steps.
    """
    global _KERNEL
    require_valid(params)
    steps = _snap_delays(params, dt)
    if start is None:
        start = -8.0 * pulse.tau_s
    n_total = int(round(duration / dt))
    t_fine = start + dt * np.arange(n_total)
    inp = np.asarray(pulse.envelope(t_fine), dtype=np.complex128)
    k0 = pulse.carrier
    phases = np.array([np.exp(1j * k0 * length) for length in params.geometry.lengths])
    coef = np.array(_local_constants(params), dtype=float)
    if _KERNEL is None:
        _KERNEL = _delay_line_kernel()
    out_a, out_b, out_h, energy = _KERNEL(inp, np.array(steps, dtype=np.int64), coef, phases,
                                   int(record_every))
    idx = np.arange(0, n_total, record_every)
    return TimeSeries(t=t_fine[idx], a_in=inp[idx], a_out=out_a, b_out=out_b, a_h=out_h,
                      dt=dt, steps=tuple(steps), energy_in=float(energy[0] * dt),
                      energy_out_a=float(energy[1] * dt), energy_out_b=float(energy[2] * dt))


def lattice_step(params, tol=1e-9):
    """Largest ``dt`` with every segment an integer number of steps.

    Works when the lengths are integer multiples of half the reference
    wavelength; otherwise raises NumericalGuardError("lattice-snapping").
    """
    half = params.geometry.wavelength / 2.0
    counts = []
    for i, length in enumerate(params.geometry.lengths, start=1):
        n = length / half
        if abs(n - round(n)) > tol * max(1.0, n):
            raise NumericalGuardError(
                "lattice-snapping", f"L{i} is not a multiple of lambda0/2; pass dt explicitly")
        counts.append(int(round(n)))
    return math.gcd(*counts) * half / C


@dataclass(frozen=True)
class PulseComparison:
    rms_a: float  # RMS deviation relative to the RMS transmitted envelope
    rms_b: float
    energy_error: float  # (out - in)/in of the time-stepped energies
    series: TimeSeries


def compare_with_spectral(params, pulse, n=2 ** 16, dt=None):
    """Time-step ``pulse`` and compare with spectral synthesis on the same samples."""
    from .pulse import TimeGrid, propagate_pulse

    if dt is None:
        dt = lattice_step(params)
    base = TimeGrid.default_for(params, pulse, n)
    every = max(1, math.ceil((base.stop - base.start) / (n * dt)))
    grid = TimeGrid(base.start, base.start + n * every * dt, n)
    rec = propagate_pulse(params, pulse, grid, segments=False)
    ts = time_stepping(params, pulse, dt, n * every * dt, start=grid.start, record_every=every)

    def rms(x, ref):
        return float(np.sqrt(np.mean(np.abs(x - ref) ** 2) / np.mean(np.abs(ref) ** 2)))

    e_out = ts.energy_out_a + ts.energy_out_b
    return PulseComparison(rms_a=rms(ts.a_out, rec.a_out), rms_b=rms(ts.b_out, rec.b_out),
                           energy_error=(e_out - ts.energy_in) / ts.energy_in, series=ts)
