"""Complex amplitudes on the ten directed internal segments.

Naming: ``a_XY`` travels from element X to element Y.  Amplitudes leaving an
element are referenced at that element's face; amplitudes returning from a
mirror (``aM41``, ``aM12``, ``aM22``, ``aM32``) and ``a21`` are referenced at
their arrival face, so they already carry the round-trip phase.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, fields

import numpy as np

from .device import require_valid
from .errors import DegenerateWarning, SingularityWarning, ValidityWarning
from .spectral import (_b_terms, _log1m, _one_minus_rotation, _reduced_round_trip_phases,
                       reduce_angle,
                       _scalar, b_factor, delay_length, SINGULAR_B4)

SEGMENTS = ("a12", "a21", "a1M4", "aM41", "a2M1", "aM12", "a2M2", "aM22", "a2M3", "aM32")

# one-way length of each directed segment, by index into geometry.lengths
SEGMENT_LENGTH_INDEX = {
    "a12": 0, "a21": 0, "a1M4": 4, "aM41": 4, "a2M1": 2, "aM12": 2,
    "a2M2": 3, "aM22": 3, "a2M3": 1, "aM32": 1,
}
HORIZONTAL = ("a2M1", "aM12", "a2M3", "aM32")
VERTICAL = ("a12", "a21", "a1M4", "aM41", "a2M2", "aM22")


@dataclass(frozen=True)
class SegmentAmplitudes:
    a12: complex
    a21: complex
    a1M4: complex
    aM41: complex
    a2M1: complex
    aM12: complex
    a2M2: complex
    aM22: complex
    a2M3: complex
    aM32: complex
    b5: complex
    singular: bool = False

    def items(self):
        return [(name, getattr(self, name)) for name in SEGMENTS]


def _one_way_phase(length, k):
    return np.exp(1j * reduce_angle(np.asarray(k, dtype=float) * length))


def segment_amplitudes(params, k, a=1.0, b=0.0):
    """Field amplitudes on every internal segment for inputs ``a`` and ``b``.

    The closed forms are the standard successive-scattering solution.  The
    BS2 -> M3 amplitude carries the sign produced by the local beam-splitter
    rule ``x = i r2 c + t2 y``; this is the sign that makes all ten amplitudes
    satisfy the node equations simultaneously (checked against the
    round-trip oracle).
    """
    require_valid(params)
    bs1, bs2 = params.bs1, params.bs2
    m1, m2, m3, m4 = (m.amplitude for m in params.mirrors)
    A2 = bs2.A
    d1, d2, d3, d4, d5 = _reduced_round_trip_phases(params.geometry, k)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SingularityWarning)
        bf = b_factor(params, k)
    B = np.asarray(bf.b)
    b4 = _b_terms(params, k)[3]
    b5 = b4  # identical to B4 term by term: e^{2ikL3} e^{2ikL2} = e^{2ikL_H}
    e5 = np.exp(1j * d5)
    denom = 1.0 + bs1.T * m4 * e5 * B

    a12 = 1j * bs1.r * (-bs1.t * m4 * e5 * a + b) / denom
    a21 = B * a12
    a1M4 = 1j * bs1.r * (a + bs1.t * B * b) / denom
    aM41 = -m4 * e5 * a1M4

    ek1 = _one_way_phase(params.geometry.L1, k)
    c = ek1 * a12  # field arriving at BS2 from BS1
    singular = (np.abs(b5) < SINGULAR_B4) | (np.abs(denom) < SINGULAR_B4)
    safe_b5 = np.where(singular, 1.0, b5)

    num_1 = -1j * bs2.r * bs2.t * (m3 * np.exp(1j * d2) + m2 * np.exp(1j * d4))
    log_x = 0.5 * _log1m(params.m1.A) + 0.5 * _log1m(params.m3.A) + _log1m(A2)
    if m1 == 0.0 or m3 == 0.0 or A2 == 1.0:
        num_2 = bs2.t * (1.0 - m1 * m3 * (1.0 - A2) * np.exp(1j * (d2 + d3)))
    else:
        num_2 = bs2.t * _one_minus_rotation(log_x, d2 + d3)
    num_3 = 1j * bs2.r * (1.0 + m1 * m2 * (1.0 - A2) * np.exp(1j * (d3 + d4)))

    a2M1 = num_1 / safe_b5 * c
    a2M2 = num_2 / safe_b5 * c
    a2M3 = num_3 / safe_b5 * c
    if np.any(singular):
        warnings.warn("singular intracavity denominator (|B5| or BS1 denominator < 1e-14)",
                      SingularityWarning, stacklevel=2)
        if bs2.R == 0.0:
            # decoupled horizontal cavity: the R2 -> 0 limit
            a2M1 = np.where(singular, 0.0, a2M1)
            a2M3 = np.where(singular, 0.0, a2M3)
            a2M2 = np.where(singular, bs2.t * c, a2M2)
        else:
            nan = complex(np.nan, np.nan)
            a2M1, a2M2, a2M3 = (np.where(singular, nan, x) for x in (a2M1, a2M2, a2M3))

    aM12 = -m1 * np.exp(1j * d3) * a2M1
    aM22 = -m2 * np.exp(1j * d4) * a2M2
    aM32 = -m3 * np.exp(1j * d2) * a2M3
    values = [a12, a21, a1M4, aM41, a2M1, aM12, a2M2, aM22, a2M3, aM32, b5]
    return SegmentAmplitudes(*(_scalar(np.asarray(v)) for v in values),
                             singular=_scalar(singular))


def outputs_from_segments(params, seg, a=1.0, b=0.0):
    """Reconstruct ``(a', b')`` at BS1 from the returning segment fields."""
    bs1 = params.bs1
    a_out = bs1.t * a + 1j * bs1.r * np.asarray(seg.a21)
    b_out = bs1.t * b + 1j * bs1.r * np.asarray(seg.aM41)
    return _scalar(a_out), _scalar(b_out)


def horizontal_mean_intensity(params, seg):
    """|field|^2 averaged along the horizontal cavity (standing-wave average)."""
    g = params.geometry
    arm3 = np.abs(seg.a2M1) ** 2 + np.abs(seg.aM12) ** 2
    arm2 = np.abs(seg.a2M3) ** 2 + np.abs(seg.aM32) ** 2
    return _scalar((g.L3 * arm3 + g.L2 * arm2) / g.L_H)


def horizontal_field_approx(params, dk, a=1.0):
    """Leading-order horizontal-cavity amplitude near k0 (lossless, small R)."""
    R1, R2 = params.bs1.R, params.bs2.R
    x = np.asarray(dk, dtype=float) * delay_length(params)
    if np.any(np.abs(x) >= 1.0):
        warnings.warn("|dk| L_D >= 1: horizontal-field expansion not valid",
                      ValidityWarning, stacklevel=2)
    return _scalar(0.5 * math.sqrt(R1 / R2) * (1.0 + 1j * x - x * x) * a)


def vertical_field_approx(params, a=1.0):
    """Leading-order vertical-cavity amplitude at resonance, ``i a sqrt(R1) / 2``.

    Matches ``a1M4`` (and ``a12`` up to sign and a factor t1) at k0.
    """
    return 0.5j * math.sqrt(params.bs1.R) * a


def enhancement_factor(params):
    """Resonant horizontal-cavity intensity relative to the input, R1/(4 R2)."""
    R2 = params.bs2.R
    if R2 <= 0.0:
        warnings.warn("R2 = 0: horizontal cavity decoupled", DegenerateWarning, stacklevel=2)
        return math.inf
    return params.bs1.R / (4.0 * R2)


def segment_rows(seg, a=1.0, b=0.0):
    """(segment, re, im, |x|^2 / input power) rows for tabular output."""
    p_in = abs(a) ** 2 + abs(b) ** 2
    rows = []
    for name, value in seg.items():
        value = complex(value)
        rows.append((name, value.real, value.imag, abs(value) ** 2 / p_in))
    return rows


def field_names():
    return [f.name for f in fields(SegmentAmplitudes)]
