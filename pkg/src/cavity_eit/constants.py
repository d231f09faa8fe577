"""Physical constants (SI). Values pinned rather than taken from scipy so
that reported numbers do not drift with CODATA revisions."""

import math

C = 299_792_458.0  # m/s, exact
EPSILON_0 = 8.8541878128e-12  # F/m
HBAR = 1.054571817e-34  # J s

TWO_PI = 2.0 * math.pi
