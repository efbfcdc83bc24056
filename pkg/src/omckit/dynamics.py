"""Linearised cavity optomechanics.

All rates are angular (rad/s). Detuning is Delta = omega_L - omega_o, so a
blue-detuned pump has Delta > 0. The cavity is single-sided: one bus port
both drives and collects, with external rate kappa_e out of the total
kappa.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import C0, HBAR, K_B, TWO_PI
from .spectrum import Spectrum

FORMS = ("full", "asymptotic")


@dataclass(frozen=True)
class CavityParams:
    omega_o: float
    omega_m: float
    kappa: float
    kappa_e: float
    gamma: float
    g0: float

    def __post_init__(self):
        for name in ("omega_o", "omega_m", "kappa", "kappa_e", "gamma"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.g0 < 0:
            raise ValueError("g0 must be non-negative")
        if self.kappa_e > self.kappa:
            raise ValueError("kappa_e cannot exceed kappa")

    @classmethod
    def from_hz(cls, omega_o_hz, omega_m_hz, kappa_hz, kappa_e_hz, gamma_hz, g0_hz) -> "CavityParams":
        return cls(*(TWO_PI * v for v in (omega_o_hz, omega_m_hz, kappa_hz, kappa_e_hz, gamma_hz, g0_hz)))

    @classmethod
    def from_dict(cls, d: dict) -> "CavityParams":
        """Build from the cyclic-Hz JSON keys ``omega_o_hz, omega_m_hz, ...``."""
        keys = ("omega_o_hz", "omega_m_hz", "kappa_hz", "kappa_e_hz", "gamma_hz", "g0_hz")
        missing = [k for k in keys if k not in d]
        if missing:
            raise KeyError(f"cavity parameters missing {missing}")
        return cls.from_hz(*(float(d[k]) for k in keys))

    def to_dict(self) -> dict:
        return {
            "omega_o_hz": self.omega_o / TWO_PI,
            "omega_m_hz": self.omega_m / TWO_PI,
            "kappa_hz": self.kappa / TWO_PI,
            "kappa_e_hz": self.kappa_e / TWO_PI,
            "gamma_hz": self.gamma / TWO_PI,
            "g0_hz": self.g0 / TWO_PI,
        }

    def replace(self, **kw) -> "CavityParams":
        d = dict(self.__dict__)
        d.update(kw)
        return CavityParams(**d)

    @property
    def sideband_resolution(self) -> float:
        """omega_m / kappa."""
        return self.omega_m / self.kappa


@dataclass(frozen=True)
class DriveCondition:
    p_in: float  # W, on chip in the bus waveguide
    delta: float  # rad/s
    lambda0: float = 1550e-9

    def __post_init__(self):
        if self.p_in < 0:
            raise ValueError("p_in must be non-negative")
        if not self.lambda0 > 0:
            raise ValueError("lambda0 must be positive")

    @classmethod
    def from_dict(cls, d: dict) -> "DriveCondition":
        return cls(float(d["p_in_w"]), TWO_PI * float(d["delta_hz"]), float(d.get("lambda0_m", 1550e-9)))

    @property
    def photon_flux(self) -> float:
        """Input photons per second, P / (hbar omega_L)."""
        return self.p_in / (HBAR * TWO_PI * C0 / self.lambda0)


def _lorentz(kappa, x):
    return kappa / ((kappa / 2.0) ** 2 + x**2)


def intracavity_photons(c: CavityParams, d: DriveCondition):
    """Mean intracavity photon number kappa_e * flux / ((kappa/2)^2 + Delta^2)."""
    return c.kappa_e * d.photon_flux / ((c.kappa / 2.0) ** 2 + np.asarray(d.delta) ** 2)


def input_power(c: CavityParams, n_cav: float, delta: float, lambda0: float = 1550e-9) -> float:
    """On-chip power that produces ``n_cav`` photons at detuning ``delta``."""
    flux = n_cav * ((c.kappa / 2.0) ** 2 + delta**2) / c.kappa_e
    return flux * HBAR * TWO_PI * C0 / lambda0


def _branch_sign(branch: str) -> float:
    if branch == "blue":
        return 1.0
    if branch == "red":
        return -1.0
    raise ValueError(f"branch must be 'blue' or 'red', got {branch!r}")


def optical_damping(c: CavityParams, n_cav, delta=None, branch: str = "blue", form: str = "full"):
    """Backaction damping rate Gamma_opt (positive cools, negative amplifies).

    full:       g0^2 n [kappa/((kappa/2)^2+(Delta+w_m)^2) - kappa/((kappa/2)^2+(Delta-w_m)^2)]
    asymptotic: -/+ 4 g0^2 n / kappa for blue/red at Delta = +/- w_m
    """
    n_cav = np.asarray(n_cav, dtype=float)
    if np.any(n_cav < 0):
        raise ValueError("n_cav must be non-negative")
    if form == "asymptotic":
        sign = _branch_sign(branch) if delta is None else np.sign(delta)
        return -sign * 4.0 * c.g0**2 * n_cav / c.kappa
    if form != "full":
        raise ValueError(f"form must be one of {FORMS}")
    if delta is None:
        delta = _branch_sign(branch) * c.omega_m
    delta = np.asarray(delta, dtype=float)
    return c.g0**2 * n_cav * (_lorentz(c.kappa, delta + c.omega_m) - _lorentz(c.kappa, delta - c.omega_m))


def effective_linewidth(c: CavityParams, n_cav, delta=None, branch: str = "blue", form: str = "full"):
    """gamma_eff = gamma + Gamma_opt.

    When ``delta`` is omitted it defaults to +omega_m (blue) or -omega_m (red).
    A non-positive result under blue drive marks the self-oscillation regime;
    see :func:`is_lasing`.
    """
    return c.gamma + optical_damping(c, n_cav, delta, branch, form)


def is_lasing(gamma_eff) -> bool:
    return bool(np.all(np.asarray(gamma_eff) <= 0))


def backaction_slope(c: CavityParams) -> float:
    """|d gamma_eff / d n_cav| = 4 g0^2 / kappa in the resolved-sideband limit."""
    return 4.0 * c.g0**2 / c.kappa


def single_photon_cooperativity(c: CavityParams) -> float:
    return 4.0 * c.g0**2 / (c.kappa * c.gamma)


def cooperativity(c: CavityParams, n_cav):
    return np.asarray(n_cav, dtype=float) * single_photon_cooperativity(c)


@dataclass(frozen=True)
class Threshold:
    n_cav: float
    p_in: float  # W at Delta = +omega_m


def lasing_threshold(c: CavityParams, lambda0: float = 1550e-9) -> Threshold:
    """Photon number and on-chip power at unit cooperativity, blue pump at Delta = omega_m."""
    if c.g0 <= 0:
        return Threshold(math.inf, math.inf)
    n = c.kappa * c.gamma / (4.0 * c.g0**2)
    return Threshold(n, input_power(c, n, c.omega_m, lambda0))


def cavity_reflection(c: CavityParams, detuning):
    """Bare single-sided reflection r = 1 - kappa_e / (kappa/2 - i detuning).

    ``detuning`` is the optical frequency minus omega_o (rad/s).
    """
    return 1.0 - c.kappa_e / (c.kappa / 2.0 - 1j * np.asarray(detuning, dtype=float))


def _chi_c(c, delta, omega):
    return 1.0 / (c.kappa / 2.0 - 1j * (delta + omega))


def _chi_c_bar(c, delta, omega):
    return 1.0 / (c.kappa / 2.0 - 1j * (omega - delta))


def self_energy(c: CavityParams, n_cav: float, delta: float, omega):
    """Optomechanical self-energy G^2 (chi_c(w) - conj(chi_c(-w))) at probe offset ``omega``.

    Its real part is half the backaction damping; the imaginary part is the
    optical-spring shift of the mechanical resonance.
    """
    G2 = c.g0**2 * n_cav
    omega = np.asarray(omega, dtype=float)
    return G2 * (_chi_c(c, delta, omega) - _chi_c_bar(c, delta, omega))


def _sideband_outputs(c, delta, n_cav, omega, s_minus, s_plus_conj):
    """Output sideband amplitudes for unit pump, full linearised model.

    ``s_minus`` drives the upper sideband (omega_L + omega), ``s_plus_conj``
    the conjugate of the lower sideband amplitude.
    """
    G = c.g0 * math.sqrt(n_cav)
    chi = _chi_c(c, delta, omega)
    chib = _chi_c_bar(c, delta, omega)
    chi_x = 1.0 / (c.gamma / 2.0 - 1j * (omega - c.omega_m)) - 1.0 / (c.gamma / 2.0 - 1j * (omega + c.omega_m))
    sqk = math.sqrt(c.kappa_e)
    drive = sqk * (chi * s_minus + chib * s_plus_conj)
    X = -1j * G * drive / (1.0 / chi_x + G**2 * (chi - chib))
    a_minus = chi * (sqk * s_minus - 1j * G * X)
    a_plus_conj = chib * (sqk * s_plus_conj + 1j * G * X)
    return s_minus - sqk * a_minus, s_plus_conj - sqk * a_plus_conj


def probe_reflection(c: CavityParams, delta: float, n_cav: float, omega):
    """Reflection of a weak probe at omega_L + omega (single sideband)."""
    omega = np.asarray(omega, dtype=float)
    out_minus, _ = _sideband_outputs(c, delta, n_cav, omega, 1.0, 0.0)
    return out_minus


def s11_response(c: CavityParams, delta: float, n_cav: float, omega):
    """Intensity-modulation response seen by a network analyser.

    Both modulation sidebands beat with the reflected pump:
    s11 = (conj(r_L) out_upper + r_L conj(out_lower)) / 2, normalised so an
    empty cavity far off resonance gives Re(r_L).
    """
    omega = np.asarray(omega, dtype=float)
    r_L = cavity_reflection(c, delta)
    out_minus, out_plus_conj = _sideband_outputs(c, delta, n_cav, omega, 1.0, 1.0)
    return 0.5 * (np.conj(r_L) * out_minus + r_L * out_plus_conj)


@dataclass(frozen=True)
class OmitWindow:
    center: float  # rad/s, probe offset
    width: float  # rad/s, FWHM
    depth_parameter: float  # C = 4 G^2 / (kappa gamma)


def omit_window(c: CavityParams, d: DriveCondition, n_cav: float | None = None) -> OmitWindow:
    """Lorentzian parameters of the transparency window.

    The mechanical response inside the s11/probe expressions is
    1 / (gamma/2 - i(w - w_m) + Sigma(w)); evaluating the self-energy at
    w = w_m gives the window centre and full width.
    """
    n = intracavity_photons(c, d) if n_cav is None else n_cav
    sigma = complex(self_energy(c, n, d.delta, c.omega_m))
    return OmitWindow(c.omega_m + sigma.imag, c.gamma + 2.0 * sigma.real, float(cooperativity(c, n)))


def omit_response(
    c: CavityParams,
    d: DriveCondition,
    freq_hz,
    n_cav: float | None = None,
    mode: str = "s11",
) -> Spectrum:
    """Complex response over modulation (probe offset) frequencies in Hz."""
    n = intracavity_photons(c, d) if n_cav is None else n_cav
    omega = TWO_PI * np.asarray(freq_hz, dtype=float)
    if mode == "s11":
        values = s11_response(c, d.delta, n, omega)
    elif mode == "probe":
        values = probe_reflection(c, d.delta, n, omega)
    else:
        raise ValueError("mode must be 's11' or 'probe'")
    return Spectrum(
        np.asarray(freq_hz, float),
        np.asarray(values, complex),
        detuning_hz=d.delta / TWO_PI,
        label=f"omit-{mode}",
        meta={"n_cav": float(n)},
    )


def thermal_occupancy(omega_m: float, T: float) -> float:
    """High-temperature phonon number k_B T / (hbar omega_m)."""
    if not T > 0:
        raise ValueError("temperature must be positive")
    return K_B * T / (HBAR * omega_m)


@dataclass(frozen=True)
class MechanicalMode:
    omega_m: float
    gamma_eff: float
    g0_rel2: float = 1.0  # relative g0^2 weight


def lorentzian_area(mode: MechanicalMode, T: float, gain: float = 1.0) -> float:
    """Integrated (over Hz) power of one mode: gain * g0_rel2 * n_th / gamma_eff."""
    return gain * mode.g0_rel2 * thermal_occupancy(mode.omega_m, T) / mode.gamma_eff


def thermal_spectrum(modes, freq_hz, T: float = 295.0, gain: float = 1.0, floor: float = 0.0) -> Spectrum:
    """Sum of Lorentzians, one per mode, plus a flat ``floor``.

    Each mode contributes area g0_rel2 * n_th / gamma_eff (times ``gain``)
    spread over a Lorentzian of FWHM gamma_eff. The optical transfer function
    is taken as flat across each narrow mechanical line.
    """
    modes = list(modes)
    if not modes:
        raise ValueError("need at least one mechanical mode")
    f = np.asarray(freq_hz, dtype=float)
    out = np.full(f.shape, float(floor))
    for m in modes:
        if not m.gamma_eff > 0:
            raise ValueError("thermal spectrum needs gamma_eff > 0")
        f0 = m.omega_m / TWO_PI
        hw = m.gamma_eff / (2.0 * TWO_PI)
        out += lorentzian_area(m, T, gain) * (hw / math.pi) / ((f - f0) ** 2 + hw**2)
    return Spectrum(f, out, label="thermal", meta={"temperature_k": T})
