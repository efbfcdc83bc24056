import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import trapezoid
from scipy.signal import find_peaks

from omckit import dynamics as D
from omckit import presets

from conftest import TWO_PI, rel

DEVICE = presets.DEVICE
# frozen oracles for the reference device
N_THRESHOLD = 8911.2
P_THRESHOLD_W = 3.5017458577245726e-4
SLOPE_HZ_PER_PHOTON = 709.2


class TestParams:
    def test_from_hz_round_trip(self):
        d = DEVICE.to_dict()
        assert D.CavityParams.from_dict(d) == DEVICE
        assert d["kappa_hz"] == pytest.approx(1.41e9)

    def test_kappa_e_bounded(self):
        with pytest.raises(ValueError):
            D.CavityParams.from_hz(193e12, 5e9, 1e9, 1.1e9, 1e6, 1e5)
        with pytest.raises(ValueError):
            D.CavityParams.from_hz(193e12, 5e9, 1e9, 0.5e9, -1e6, 1e5)

    def test_negative_power(self):
        with pytest.raises(ValueError):
            D.DriveCondition(-1.0, 0.0)


class TestPhotons:
    def test_zero_power(self):
        assert D.intracavity_photons(DEVICE, D.DriveCondition(0.0, DEVICE.omega_m)) == 0.0

    def test_far_detuned(self):
        n = D.intracavity_photons(DEVICE, D.DriveCondition(1e-3, 1e6 * DEVICE.kappa))
        assert n < 1e-6

    def test_operating_point_near_threshold(self):
        n = D.intracavity_photons(DEVICE, D.DriveCondition(375e-6, DEVICE.omega_m))
        assert n == pytest.approx(9543.0, rel=1e-3)
        assert 0.5 < n / D.lasing_threshold(DEVICE).n_cav < 2.0

    def test_input_power_inverts(self):
        d = D.DriveCondition(2.5e-4, 0.7 * DEVICE.omega_m)
        n = D.intracavity_photons(DEVICE, d)
        assert rel(D.input_power(DEVICE, n, d.delta), d.p_in) < 1e-12

    @settings(max_examples=50, deadline=None)
    @given(delta=st.floats(0, 1e11), extra=st.floats(1e3, 1e11))
    def test_even_and_decreasing(self, delta, extra):
        n = lambda dl: float(D.intracavity_photons(DEVICE, D.DriveCondition(1e-4, dl)))  # noqa: E731
        assert n(delta) == n(-delta)
        assert n(delta + extra) < n(delta)


class TestBackaction:
    def test_no_photons(self):
        assert D.effective_linewidth(DEVICE, 0.0) == DEVICE.gamma

    def test_slope_per_photon(self):
        assert D.backaction_slope(DEVICE) / TWO_PI == pytest.approx(SLOPE_HZ_PER_PHOTON, rel=1e-3)

    def test_branch_signs(self):
        blue = D.effective_linewidth(DEVICE, 1000.0, branch="blue")
        red = D.effective_linewidth(DEVICE, 1000.0, branch="red")
        assert blue < DEVICE.gamma < red

    @settings(max_examples=40, deadline=None)
    @given(n=st.floats(0, 1e5))
    def test_asymptotic_reflection(self, n):
        b = D.effective_linewidth(DEVICE, n, branch="blue", form="asymptotic")
        r = D.effective_linewidth(DEVICE, n, branch="red", form="asymptotic")
        assert b + r == pytest.approx(2 * DEVICE.gamma, rel=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(n=st.floats(1.0, 1e5), branch=st.sampled_from(["blue", "red"]))
    def test_forms_agree_when_resolved(self, n, branch):
        assert DEVICE.sideband_resolution > 3
        full = D.optical_damping(DEVICE, n, branch=branch, form="full")
        asym = D.optical_damping(DEVICE, n, branch=branch, form="asymptotic")
        assert rel(full, asym) < 0.01

    def test_cooperativity_unity_identity(self):
        th = D.lasing_threshold(DEVICE)
        g = D.effective_linewidth(DEVICE, th.n_cav, branch="blue", form="asymptotic")
        assert abs(g) <= 1e-12 * DEVICE.gamma
        assert D.is_lasing(D.effective_linewidth(DEVICE, 1.01 * th.n_cav, form="asymptotic"))

    def test_negative_photons(self):
        with pytest.raises(ValueError):
            D.effective_linewidth(DEVICE, -1.0)

    def test_bad_branch_and_form(self):
        with pytest.raises(ValueError):
            D.effective_linewidth(DEVICE, 1.0, branch="green")
        with pytest.raises(ValueError):
            D.effective_linewidth(DEVICE, 1.0, form="exact")


class TestCooperativity:
    def test_device_value(self):
        assert D.single_photon_cooperativity(DEVICE) == pytest.approx(1.13e-4, rel=0.01)

    @pytest.mark.parametrize("row", presets.TABLE1[:3], ids=lambda r: r["label"].split()[0])
    def test_literature_rows(self, row):
        c = D.CavityParams.from_hz(193e12, row["omega_m_hz"], row["kappa_hz"], row["kappa_hz"] / 2, row["gamma_hz"], row["g0_hz"])
        assert rel(D.single_photon_cooperativity(c), row["printed_c0"]) < 0.05

    def test_zero_coupling(self):
        assert D.single_photon_cooperativity(DEVICE.replace(g0=0.0)) == 0.0
        assert D.lasing_threshold(DEVICE.replace(g0=0.0)).n_cav == math.inf

    def test_linear_in_photons(self):
        assert D.cooperativity(DEVICE, 1e4) == pytest.approx(1e4 * D.single_photon_cooperativity(DEVICE))


class TestThreshold:
    def test_frozen(self):
        th = D.lasing_threshold(DEVICE)
        assert th.n_cav == pytest.approx(N_THRESHOLD, rel=1e-4)
        assert th.p_in == pytest.approx(P_THRESHOLD_W, rel=1e-9)

    def test_operating_power_within_factor_two(self):
        assert 0.5 < 375e-6 / D.lasing_threshold(DEVICE).p_in < 2.0

    def test_doubling_g0_quarters(self):
        n1 = D.lasing_threshold(DEVICE).n_cav
        n2 = D.lasing_threshold(DEVICE.replace(g0=2 * DEVICE.g0)).n_cav
        assert n2 == pytest.approx(n1 / 4, rel=1e-12)


class TestOmit:
    def test_no_coupling_is_bare_cavity(self):
        c = DEVICE.replace(g0=0.0)
        w = TWO_PI * np.linspace(5.3e9, 5.45e9, 101)
        r = D.probe_reflection(c, -c.omega_m, 1e4, w)
        assert np.allclose(r, D.cavity_reflection(c, -c.omega_m + w), rtol=1e-12)

    @pytest.mark.parametrize("branch", ["red", "blue"])
    def test_width_equals_effective_linewidth(self, branch):
        sign = 1.0 if branch == "blue" else -1.0
        d = D.DriveCondition(1e-4, sign * DEVICE.omega_m)
        n = float(D.intracavity_photons(DEVICE, d))
        win = D.omit_window(DEVICE, d)
        assert rel(win.width, D.effective_linewidth(DEVICE, n, d.delta)) < 1e-6

    def test_numerical_window_width(self):
        d = D.DriveCondition(1e-4, -DEVICE.omega_m)
        n = 3000.0
        ge = D.effective_linewidth(DEVICE, n, d.delta)
        w = np.linspace(DEVICE.omega_m - 20 * ge, DEVICE.omega_m + 20 * ge, 40001)
        y = np.abs(D.probe_reflection(DEVICE, d.delta, n, w) - D.probe_reflection(DEVICE.replace(g0=0.0), d.delta, n, w)) ** 2
        above = w[y >= 0.5 * y.max()]
        assert rel(above[-1] - above[0], ge) < 0.01

    def test_transparency_at_large_cooperativity(self):
        c = DEVICE.replace(g0=math.sqrt(1e6 * DEVICE.kappa * DEVICE.gamma / 4))
        r = abs(D.probe_reflection(c, -c.omega_m, 1.0, c.omega_m))
        bare = abs(D.cavity_reflection(c, 0.0))
        assert bare < 0.2
        assert abs(r - 1.0) < 0.01

    @settings(max_examples=30, deadline=None)
    @given(s=st.floats(0.01, 100.0))
    def test_depth_depends_on_g2n_only(self, s):
        n = 2000.0
        ref = D.s11_response(DEVICE, -DEVICE.omega_m, n, DEVICE.omega_m)
        c = DEVICE.replace(g0=DEVICE.g0 / math.sqrt(s))
        assert abs(D.s11_response(c, -DEVICE.omega_m, n * s, DEVICE.omega_m) - ref) < 1e-9 * abs(ref)

    def test_spectrum_metadata(self):
        d = D.DriveCondition(1e-4, DEVICE.omega_m)
        spec = D.omit_response(DEVICE, d, np.linspace(5.3e9, 5.4e9, 11))
        assert spec.is_complex
        assert spec.meta["n_cav"] == pytest.approx(float(D.intracavity_photons(DEVICE, d)))
        with pytest.raises(ValueError):
            D.omit_response(DEVICE, d, [1e9, 2e9], mode="phase")


class TestThermal:
    def test_single_mode_fwhm(self):
        m = D.MechanicalMode(TWO_PI * 5.365e9, TWO_PI * 6e6)
        f = np.linspace(5.3e9, 5.43e9, 130001)
        y = D.thermal_spectrum([m], f).values
        above = f[y >= 0.5 * y.max()]
        assert above[-1] - above[0] == pytest.approx(6e6, rel=1e-3)

    def test_area_ratio(self):
        modes = [
            D.MechanicalMode(TWO_PI * f, TWO_PI * g, w)
            for f, g, w in zip(presets.THERMAL_TRIPLET_HZ, (6e6, 4e6, 9e6), presets.THERMAL_TRIPLET_WEIGHTS)
        ]
        f = np.linspace(4.0e9, 7.0e9, 600001)
        for m in modes:
            y = D.thermal_spectrum([m], f).values
            assert rel(trapezoid(y, f), D.lorentzian_area(m, 295.0)) < 0.01
        a0, a1 = (D.lorentzian_area(m, 295.0) for m in modes[:2])
        expected = (modes[0].g0_rel2 / modes[0].gamma_eff / modes[0].omega_m) / (
            modes[1].g0_rel2 / modes[1].gamma_eff / modes[1].omega_m
        )
        assert a0 / a1 == pytest.approx(expected, rel=1e-12)

    def test_triplet_peaks(self):
        modes = [D.MechanicalMode(TWO_PI * f, TWO_PI * 6e6, w) for f, w in zip(presets.THERMAL_TRIPLET_HZ, presets.THERMAL_TRIPLET_WEIGHTS)]
        f = np.arange(5.3e9, 5.5e9, presets.RBW_HZ)
        y = D.thermal_spectrum(modes, f).values
        idx, _ = find_peaks(y)
        assert len(idx) == 3
        assert np.argmax(y) == idx[0]

    def test_errors(self):
        with pytest.raises(ValueError):
            D.thermal_spectrum([], [1.0, 2.0])
        with pytest.raises(ValueError):
            D.thermal_occupancy(1e9, 0.0)
        with pytest.raises(ValueError):
            D.thermal_spectrum([D.MechanicalMode(1e9, -1.0)], [1.0, 2.0])
