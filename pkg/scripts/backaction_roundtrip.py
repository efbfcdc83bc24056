"""Simulate a blue/red power series for the reference device and recover g0."""

import numpy as np

from omckit import analysis, dynamics, presets
from omckit.constants import TWO_PI

if __name__ == "__main__":
    dev = presets.DEVICE
    powers = np.linspace(20e-6, 300e-6, 8)
    series = analysis.simulate_power_series(dev, powers, seed=1)
    fit = analysis.extract_g0(series, dev)
    th = dynamics.lasing_threshold(dev)
    print(f"g0/2pi     = {fit['g0'] / TWO_PI / 1e6:.4f} +/- {fit.error('g0') / TWO_PI / 1e6:.4f} MHz")
    print(f"gamma/2pi  = {fit['gamma'] / TWO_PI / 1e6:.3f} MHz")
    for br, b in fit.extra["branches"].items():
        print(f"{br:<5} intercept {b['intercept'] / TWO_PI / 1e6:.3f} MHz, slope {b['slope_per_photon'] / TWO_PI:.1f} Hz/photon")
    print(f"threshold  n = {th.n_cav:.1f}, P_in = {th.p_in * 1e6:.1f} uW")
