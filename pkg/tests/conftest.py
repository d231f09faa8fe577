import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cavity_eit import BeamSplitterSpec, DeviceParams, GeometrySpec, MirrorSpec, preset

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

WAVELENGTH = 795e-9


def make_device(R1, R2, mirror_A=(0.0, 0.0, 0.0, 0.0), A1=0.0, A2=0.0, geometry=None):
    """Device on the figure geometry (or ``geometry``) with the given coefficients."""
    if geometry is None:
        geometry = preset("fig2a").geometry
    return DeviceParams(
        bs1=BeamSplitterSpec.from_reflectivity(R1, A1),
        bs2=BeamSplitterSpec.from_reflectivity(R2, A2),
        m1=MirrorSpec(mirror_A[0]), m2=MirrorSpec(mirror_A[1]),
        m3=MirrorSpec(mirror_A[2]), m4=MirrorSpec(mirror_A[3]),
        geometry=geometry,
    )


def random_device(rng, lossy=False, resonant=True):
    """Random device; lengths are either on the figure lattice or arbitrary."""
    R1 = 10 ** rng.uniform(-3, -0.3)
    R2 = 10 ** rng.uniform(-6, -1)
    if resonant:
        geometry = preset("fig2a").geometry
    else:
        geometry = GeometrySpec(*rng.uniform(1e-6, 1e-4, 5), WAVELENGTH)
    if lossy:
        A = rng.uniform(0.0, 1.0, 6) * 10 ** rng.uniform(-8, 0, 6)
        A1 = min(A[4], 1.0 - R1)
        A2 = min(A[5], 1.0 - R2)
        return make_device(R1, R2, tuple(A[:4]), A1, A2, geometry)
    return make_device(R1, R2, geometry=geometry)


@pytest.fixture
def fig2a():
    return preset("fig2a")


@pytest.fixture
def fig2a_lossless():
    return preset("fig2a").lossless()


@pytest.fixture
def fig3():
    return preset("fig3")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def rel(a, b):
    return abs(a - b) / abs(b) if b else math.inf


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
