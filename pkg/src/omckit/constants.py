"""Physical constants and the Hz <-> rad/s boundary."""

import math

from scipy import constants as _c

HBAR = _c.hbar
C0 = _c.c
K_B = _c.k
TWO_PI = 2.0 * math.pi


def to_angular(f_hz):
    """Cyclic frequency (Hz) to angular frequency (rad/s)."""
    return TWO_PI * f_hz


def to_cyclic(omega):
    """Angular frequency (rad/s) to cyclic frequency (Hz)."""
    return omega / TWO_PI
