"""Builtin parameter sets (cyclic Hz unless noted)."""

from __future__ import annotations

from .dynamics import CavityParams

# Measured device; kappa from the optical resonance sweep.
DEVICE = CavityParams.from_hz(
    omega_o_hz=193.1e12,
    omega_m_hz=5.365e9,
    kappa_hz=1.41e9,
    kappa_e_hz=600e6,
    gamma_hz=6.32e6,
    g0_hz=0.50e6,
)

# Same device with the rounded values of the comparison table (kappa = 1.5 GHz).
DEVICE_TABLE = CavityParams.from_hz(
    omega_o_hz=193.1e12,
    omega_m_hz=5.37e9,
    kappa_hz=1.5e9,
    kappa_e_hz=600e6,
    gamma_hz=6.3e6,
    g0_hz=0.50e6,
)

PRESETS = {"device": DEVICE, "device-table": DEVICE_TABLE}

# Clamped optomechanical structures: g0 (Hz), omega_m (Hz), kappa (Hz), gamma (Hz),
# with the printed omega_m/kappa and C0 columns kept for comparison.
TABLE1 = (
    {"label": "Liu et al. (est.)", "g0_hz": 87e3, "omega_m_hz": 7.5e9, "kappa_hz": 9.7e9, "gamma_hz": 16e6,
     "printed_resolution": 0.77, "printed_c0": 2.0e-7},
    {"label": "Zhang et al.", "g0_hz": 51e3, "omega_m_hz": 0.66e9, "kappa_hz": 4.9e9, "gamma_hz": 0.6e6,
     "printed_resolution": 0.14, "printed_c0": 3.5e-6},
    {"label": "Sarabalis et al.", "g0_hz": 290e3, "omega_m_hz": 0.48e9, "kappa_hz": 8.2e9, "gamma_hz": 2.6e6,
     "printed_resolution": 0.058, "printed_c0": 1.6e-5},
    {"label": "X-point clamped OMC", "g0_hz": 500e3, "omega_m_hz": 5.37e9, "kappa_hz": 1.5e9, "gamma_hz": 6.3e6,
     "printed_resolution": 3.6, "printed_c0": 1.1e-4},
)

# Bold entries of the printed table, per column.
TABLE1_BOLD = {
    "g0_hz": ("X-point clamped OMC",),
    "omega_m_hz": ("Liu et al. (est.)", "X-point clamped OMC"),
    "kappa_hz": ("X-point clamped OMC",),
    "gamma_hz": ("Zhang et al.",),
    "resolution": ("X-point clamped OMC",),
    "c0": ("X-point clamped OMC",),
}

# Fundamental mode plus two higher-order modes, for synthetic thermal spectra.
# Only the fundamental frequency is a measured value; the others are illustrative.
THERMAL_TRIPLET_HZ = (5.365e9, 5.405e9, 5.452e9)
THERMAL_TRIPLET_WEIGHTS = (1.0, 0.35, 0.2)

RBW_HZ = 250e3
