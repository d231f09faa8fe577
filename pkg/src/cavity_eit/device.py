"""Parameters of the Michelson-like double cavity.

Layout (one-way distances)::

            M4
            |  L5
    a --> [BS1] --> a'          (b enters from the a' side, b' leaves on the a side)
            |  L1
    M1 -L3-[BS2]-L2- M3         (horizontal cavity, L_H = L2 + L3)
            |  L4
            M2                  (vertical cavity, L_V = L1 + L4 + L5)

Beam splitters act as ``[[t, i r], [i r, t]]`` on amplitudes, mirrors reflect
with amplitude ``-sqrt(1 - A_M)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .constants import C, TWO_PI
from .errors import ConfigError, ValidationError, ValidityWarning

PARTITION_TOL = 1e-12
RESONANCE_TOL = 1e-9


@dataclass(frozen=True)
class BeamSplitterSpec:
    R: float
    T: float
    A: float = 0.0

    @classmethod
    def from_reflectivity(cls, R, A=0.0):
        """Beam splitter with transmissivity fixed by ``R + T + A = 1``."""
        return cls(R=R, T=1.0 - R - A, A=A)

    @property
    def r(self):
        return math.sqrt(self.R)

    @property
    def t(self):
        return math.sqrt(self.T)


@dataclass(frozen=True)
class MirrorSpec:
    A: float = 0.0

    @property
    def R(self):
        return 1.0 - self.A

    @property
    def amplitude(self):
        # magnitude of the reflection amplitude
        return math.sqrt(1.0 - self.A)


@dataclass(frozen=True)
class GeometrySpec:
    L1: float
    L2: float
    L3: float
    L4: float
    L5: float
    wavelength: float = 795e-9

    @classmethod
    def from_half_waves(cls, wavelength, half_waves):
        """Lengths given as integer numbers of half wavelengths (L = n lambda/2),
        which makes every segment resonant at ``k0`` without rounding drift."""
        n1, n2, n3, n4, n5 = half_waves
        h = wavelength / 2.0
        return cls(n1 * h, n2 * h, n3 * h, n4 * h, n5 * h, wavelength)

    @property
    def lengths(self):
        return (self.L1, self.L2, self.L3, self.L4, self.L5)

    @property
    def L_V(self):
        return self.L1 + self.L4 + self.L5

    @property
    def L_H(self):
        return self.L2 + self.L3

    @property
    def k0(self):
        return TWO_PI / self.wavelength

    @property
    def omega0(self):
        return C * self.k0

    def mode_numbers(self):
        """(n_V, n_H) with k0 L = n pi, as floats (integers when resonant)."""
        return self.k0 * self.L_V / math.pi, self.k0 * self.L_H / math.pi


@dataclass(frozen=True)
class DeviceParams:
    bs1: BeamSplitterSpec
    bs2: BeamSplitterSpec
    m1: MirrorSpec = field(default_factory=MirrorSpec)
    m2: MirrorSpec = field(default_factory=MirrorSpec)
    m3: MirrorSpec = field(default_factory=MirrorSpec)
    m4: MirrorSpec = field(default_factory=MirrorSpec)
    geometry: GeometrySpec = None

    @property
    def mirrors(self):
        return (self.m1, self.m2, self.m3, self.m4)

    @property
    def k0(self):
        return self.geometry.k0

    def with_mirror_absorption(self, A1=None, A2=None, A3=None, A4=None):
        """Copy with the given mirror absorptions replaced."""
        new = {}
        for name, value in (("m1", A1), ("m2", A2), ("m3", A3), ("m4", A4)):
            if value is not None:
                new[name] = MirrorSpec(value)
        return replace(self, **new)

    def lossless(self):
        """Copy with every absorption set to zero (R kept, T adjusted)."""
        return DeviceParams(
            bs1=BeamSplitterSpec.from_reflectivity(self.bs1.R),
            bs2=BeamSplitterSpec.from_reflectivity(self.bs2.R),
            geometry=self.geometry,
        )

    @property
    def is_lossless(self):
        return (self.bs1.A == 0 and self.bs2.A == 0
                and all(m.A == 0 for m in self.mirrors))


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple = ()

    @property
    def ok(self):
        return not self.violations

    def __bool__(self):
        return self.ok

    def raise_if_failed(self):
        if self.violations:
            raise ValidationError(self.violations)


def validate(params, require_resonance=False):
    """Check all invariants of ``params``; never raises."""
    problems = []
    for name in ("bs1", "bs2"):
        bs = getattr(params, name)
        total = bs.R + bs.T + bs.A
        if abs(total - 1.0) > PARTITION_TOL:
            problems.append(f"{name}: R+T+A=1 violated (R={bs.R!r}, T={bs.T!r}, "
                            f"A={bs.A!r}, sum={total!r})")
        for coef in ("R", "T", "A"):
            value = getattr(bs, coef)
            if not (0.0 <= value <= 1.0) or math.isnan(value):
                problems.append(f"{name}.{coef}={value!r} outside [0, 1]")
    for i, mirror in enumerate(params.mirrors, start=1):
        if not (0.0 <= mirror.A <= 1.0) or math.isnan(mirror.A):
            problems.append(f"mirror{i}.A={mirror.A!r} outside [0, 1]")
    geom = params.geometry
    if geom is None:
        problems.append("geometry missing")
        return ValidationReport(tuple(problems))
    for i, length in enumerate(geom.lengths, start=1):
        if not length > 0.0:
            problems.append(f"geometry.L{i}={length!r}: lengths > 0 violated")
    if not geom.wavelength > 0.0:
        problems.append(f"geometry.wavelength={geom.wavelength!r} must be > 0")
    if require_resonance and not problems:
        for label, n in zip(("L_V", "L_H"), geom.mode_numbers()):
            if abs(n - round(n)) > RESONANCE_TOL * max(1.0, abs(n)):
                problems.append(f"{label}: k0*{label}/pi={n!r} not an integer")
    return ValidationReport(tuple(problems))


def require_valid(params):
    validate(params).raise_if_failed()


# Fig. 2 geometry: L_V = 120 lambda0 (n_V = 240), L_H = 30 lambda0 (n_H = 60),
# split as L1 = L4 = L5 = 40 lambda0, L2 = L3 = 15 lambda0.
_FIG_HALF_WAVES = (80, 30, 30, 80, 80)
_WAVELENGTH = 795e-9


def _figure_device(R2, mirror_A):
    geometry = GeometrySpec.from_half_waves(_WAVELENGTH, _FIG_HALF_WAVES)
    mirrors = [MirrorSpec(mirror_A) for _ in range(4)]
    return DeviceParams(
        bs1=BeamSplitterSpec.from_reflectivity(0.1),
        bs2=BeamSplitterSpec.from_reflectivity(R2),
        m1=mirrors[0], m2=mirrors[1], m3=mirrors[2], m4=mirrors[3],
        geometry=geometry,
    )


PRESETS = {
    "fig2a": lambda: _figure_device(1e-6, 1e-6),
    "fig2b": lambda: _figure_device(1e-5, 1e-6),
    "fig3": lambda: _figure_device(1e-6, 0.0),
    "fig4": lambda: _figure_device(1e-6, 0.0),
    # R1/R2 = 1e5 resonator; the phase-shift estimate assumes no absorption
    "rubidium-xpm": lambda: _figure_device(1e-6, 0.0),
}


def preset(name):
    """Device parameters of a named preset (see ``PRESETS``)."""
    try:
        return PRESETS[name]()
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from "
                       f"{', '.join(sorted(PRESETS))}") from None


def thin_plate_reflectivity(n, d, k, warn_kd=0.1):
    """Reflectivity of a thin dielectric plate in vacuum, valid for ``k d << 1``.

    Parameters
    ----------
    n : float
        Refractive index of the plate (>= 1).
    d : float
        Plate thickness in metres.
    k : float
        Vacuum wavenumber in rad/m.
    """
    if d < 0 or n < 1:
        raise ValueError(f"need d >= 0 and n >= 1, got d={d!r}, n={n!r}")
    kd = k * d
    if kd > warn_kd:
        warnings.warn(f"k*d={kd:.3g} is not small; thin-plate estimate unreliable",
                      ValidityWarning, stacklevel=2)
    return ((n * n - 1.0) / math.sqrt(2.0) * kd) ** 2


# ---------------------------------------------------------------------------
# configuration files

_GEOMETRY_KEYS = {f"geometry.L{i}_m": f"L{i}" for i in range(1, 6)}
_GEOMETRY_KEYS["geometry.wavelength_m"] = "wavelength"
_BS_KEYS = {f"{bs}.{c}": (bs, c) for bs in ("bs1", "bs2") for c in ("R", "T", "A")}
_MIRROR_KEYS = {f"mirror{i}.A": f"m{i}" for i in range(1, 5)}
DEVICE_KEYS = tuple(_GEOMETRY_KEYS) + tuple(_BS_KEYS) + tuple(_MIRROR_KEYS)


def parse_config_text(text):
    """Parse ``key = value`` lines (``#`` comments) into a dict of floats."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in values:
            raise ConfigError("duplicate key", key=key)
        try:
            values[key] = float(value)
        except ValueError:
            raise ConfigError(f"not a number: {value!r}", key=key) from None
    return values


def device_from_mapping(values, extra_prefixes=("medium.",)):
    """Build and validate :class:`DeviceParams` from a flat key mapping."""
    for key in values:
        if key not in DEVICE_KEYS and not key.startswith(tuple(extra_prefixes)):
            raise ConfigError("unknown key", key=key)
    missing = [key for key in DEVICE_KEYS if key not in values]
    if missing:
        raise ConfigError("missing key", key=missing[0])
    geometry = GeometrySpec(**{attr: values[key] for key, attr in _GEOMETRY_KEYS.items()})
    splitters = {"bs1": {}, "bs2": {}}
    for key, (bs, coef) in _BS_KEYS.items():
        splitters[bs][coef] = values[key]
    mirrors = {attr: MirrorSpec(values[key]) for key, attr in _MIRROR_KEYS.items()}
    params = DeviceParams(
        bs1=BeamSplitterSpec(**splitters["bs1"]),
        bs2=BeamSplitterSpec(**splitters["bs2"]),
        geometry=geometry,
        **mirrors,
    )
    require_valid(params)
    return params


def device_to_mapping(params):
    values = {}
    for key, attr in _GEOMETRY_KEYS.items():
        values[key] = getattr(params.geometry, attr)
    for key, (bs, coef) in _BS_KEYS.items():
        values[key] = getattr(getattr(params, bs), coef)
    for key, attr in _MIRROR_KEYS.items():
        values[key] = getattr(params, attr).A
    return values


def format_config(values, header=None):
    lines = []
    if header:
        lines.extend(f"# {line}" for line in header.splitlines())
    lines.extend(f"{key} = {value!r}" for key, value in values.items())
    return "\n".join(lines) + "\n"


def load_config(path):
    text = Path(path).read_text(encoding="utf-8")
    return device_from_mapping(parse_config_text(text))


def save_config(params, path, extra=None):
    """Write ``params`` (and optional extra keys, e.g. ``medium.*``) to ``path``."""
    values = device_to_mapping(params)
    if extra:
        values.update(extra)
    Path(path).write_text(format_config(values, header="double-cavity device, SI units"),
                          encoding="utf-8")


def as_dict(params):
    """Nested plain-dict view, for manifests and JSON reports."""
    out = {}
    for f in fields(params):
        value = getattr(params, f.name)
        out[f.name] = {g.name: getattr(value, g.name) for g in fields(value)}
    return out
