"""Phase-protected operating window of a clamped optomechanical crystal.

A mechanical mode at wavevector ``k_m = 2 k_o`` is guided when its frequency
sits below the substrate surface-acoustic-wave line ``omega_saw = k_m v_saw``;
the optical mode is guided when its effective index exceeds the cladding
index. Angular units internally, Hz at the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import TWO_PI

V_SAW_SIO2 = 3400.0  # m/s
N_SIO2 = 1.45


@dataclass(frozen=True)
class SubstrateModel:
    v_saw: float = V_SAW_SIO2
    n_cladding: float = N_SIO2

    def __post_init__(self):
        if not self.v_saw > 0:
            raise ValueError(f"v_saw must be positive, got {self.v_saw}")
        if not self.n_cladding >= 1:
            raise ValueError(f"n_cladding must be >= 1, got {self.n_cladding}")


@dataclass(frozen=True)
class OperatingPoint:
    n_eff: float
    a: float
    lambda0: float = 1550e-9

    def __post_init__(self):
        for name in ("n_eff", "a", "lambda0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True)
class WindowVerdict:
    guided_optics: bool
    guided_mechanics: bool
    in_first_bz: bool
    margin_hz: float

    @property
    def passes(self) -> bool:
        """Both modes phase-protected. The Brillouin-zone flag is advisory only."""
        return self.guided_optics and self.guided_mechanics


def optical_wavevector(p: OperatingPoint) -> float:
    """k_o = 2 pi n_eff / lambda0 in rad/m."""
    return TWO_PI * p.n_eff / p.lambda0


def mechanical_wavevector(p: OperatingPoint) -> float:
    """Phase-matched mechanical wavevector for counter-propagating optics, 2 k_o."""
    return 2.0 * optical_wavevector(p)


def saw_cutoff_frequency(p: OperatingPoint, s: SubstrateModel) -> float:
    """Angular SAW frequency at the phase-matched wavevector, 2 k_o v_saw."""
    return mechanical_wavevector(p) * s.v_saw


def saw_cutoff_hz(p: OperatingPoint, s: SubstrateModel) -> float:
    """Closed cyclic form 2 n_eff v_saw / lambda0."""
    return 2.0 * p.n_eff * s.v_saw / p.lambda0


def saw_cutoff_xpoint_hz(a: float, s: SubstrateModel) -> float:
    """SAW frequency at the zone edge k_m = pi/a, i.e. v_saw / (2a).

    This is the alternative convention in which the mechanical mode is pinned
    to the X point rather than to twice the optical wavevector.
    """
    if not a > 0:
        raise ValueError("a must be positive")
    return s.v_saw / (2.0 * a)


def star_point_neff(f_saw_hz: float, s: SubstrateModel, lambda0: float = 1550e-9) -> float:
    """Effective index that puts the SAW cutoff at ``f_saw_hz``."""
    return f_saw_hz * lambda0 / (2.0 * s.v_saw)


def window_check(p: OperatingPoint, s: SubstrateModel, omega_m: float) -> WindowVerdict:
    if not omega_m > 0:
        raise ValueError(f"omega_m must be positive, got {omega_m}")
    omega_saw = saw_cutoff_frequency(p, s)
    return WindowVerdict(
        guided_optics=p.n_eff > s.n_cladding,
        guided_mechanics=omega_m < omega_saw,
        in_first_bz=mechanical_wavevector(p) <= math.pi / p.a,
        margin_hz=(omega_saw - omega_m) / TWO_PI,
    )


@dataclass(frozen=True)
class WindowMap:
    n_eff: np.ndarray  # (n,)
    a: np.ndarray  # (m,)
    f_saw_hz: np.ndarray  # (n, m)
    in_window: np.ndarray  # (n, m) bool
    in_first_bz: np.ndarray  # (n, m) bool

    def rows(self):
        """Row-major (n_eff outer, a inner) records."""
        for i, ne in enumerate(self.n_eff):
            for j, a in enumerate(self.a):
                yield ne, a, self.f_saw_hz[i, j], bool(self.in_window[i, j])

    def to_csv(self) -> str:
        lines = ["n_eff,a_m,f_saw_hz,in_window"]
        for ne, a, f, ok in self.rows():
            lines.append(f"{float(ne)!r},{float(a)!r},{float(f)!r},{str(ok).lower()}")
        return "\n".join(lines) + "\n"


def window_map(n_eff, a, lambda0: float, s: SubstrateModel, omega_m: float) -> WindowMap:
    """Evaluate the SAW cutoff and window mask on an (n_eff, a) grid."""
    n_eff = np.atleast_1d(np.asarray(n_eff, dtype=float))
    a = np.atleast_1d(np.asarray(a, dtype=float))
    if n_eff.size == 0 or a.size == 0:
        raise ValueError("n_eff and a ranges must be non-empty")
    for name, arr in (("n_eff", n_eff), ("a", a)):
        if arr.size > 1 and not np.all(np.diff(arr) > 0):
            raise ValueError(f"{name} range must be strictly increasing")
        if np.any(arr <= 0):
            raise ValueError(f"{name} values must be positive")
    f = np.empty((n_eff.size, a.size))
    mask = np.empty_like(f, dtype=bool)
    bz = np.empty_like(mask)
    for i, ne in enumerate(n_eff):
        for j, aj in enumerate(a):
            p = OperatingPoint(float(ne), float(aj), lambda0)
            v = window_check(p, s, omega_m)
            f[i, j] = saw_cutoff_frequency(p, s) / TWO_PI
            mask[i, j] = v.passes
            bz[i, j] = v.in_first_bz
    return WindowMap(n_eff, a, f, mask, bz)
