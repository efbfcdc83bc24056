import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import trapezoid

from omckit import analysis as A
from omckit import dynamics as D
from omckit import presets
from omckit.spectrum import Spectrum

from conftest import TWO_PI, rel

DEVICE = presets.DEVICE
F_O = 193.1e12
KAPPA_HZ, KAPPA_E_HZ = 1.41e9, 0.6e9


def resonance_trace(noise=0.0, seed=0, n=401, half_span=5e9, fo=F_O):
    f = np.linspace(fo - half_span, fo + half_span, n)
    y = A.reflection_dip(f, fo, KAPPA_HZ, KAPPA_E_HZ)
    y = y + noise * np.random.default_rng(seed).standard_normal(n)
    return Spectrum(f, y)


def s11_trace(c, delta, n_cav=0.0, freqs=None):
    f = np.linspace(0.1e9, 12e9, 240) if freqs is None else freqs
    return Spectrum(f, D.s11_response(c, delta, n_cav, TWO_PI * f))


# --------------------------------------------------------------------------- background


class TestBackground:
    def floor(self, f):
        return Spectrum(f, 1e-9 * (1 + 0.2 * (f - f[0]) / (f[-1] - f[0])))

    def test_identical_gives_zero(self):
        f = np.linspace(5e9, 6e9, 101)
        out = A.subtract_background(self.floor(f), self.floor(f))
        assert np.all(out.values == 0.0)
        assert out.meta["clamped"] == 0

    def test_recovers_injected_area(self):
        f = np.linspace(5.2e9, 5.5e9, 3001)
        bg = self.floor(f)
        peak = A.lorentzians(f, [5.365e9], [6.32e6], [4e-8])
        out = A.subtract_background(Spectrum(f, peak + bg.values), bg)
        area = trapezoid(out.values, out.freq)
        hw = 3.16e6
        injected = 4e-8 * hw * (math.atan((f[-1] - 5.365e9) / hw) - math.atan((f[0] - 5.365e9) / hw))
        assert rel(area, injected) < 0.01

    def test_db_equivalent_to_linear(self):
        f = np.linspace(5e9, 6e9, 51)
        sig = Spectrum(f, 2e-9 + 1e-9 * np.cos(f / 1e8) ** 2)
        bg = self.floor(f)
        lin = A.subtract_background(sig, bg)
        db = A.subtract_background(sig.to_db(), bg.to_db())
        assert np.allclose(db.values, lin.values, rtol=1e-9, atol=1e-22)

    def test_interpolates_and_clamps(self):
        f = np.linspace(5e9, 6e9, 101)
        bg = Spectrum(np.linspace(4.9e9, 6.1e9, 7), np.full(7, 1e-9))
        out = A.subtract_background(Spectrum(f, np.full(101, 0.5e-9)), bg)
        assert out.meta["clamped"] == 101
        assert np.all(out.values == 0.0)

    def test_disjoint(self):
        with pytest.raises(ValueError, match="overlap"):
            A.subtract_background(self.floor(np.linspace(1, 2, 5)), self.floor(np.linspace(3, 4, 5)))

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_re_add_round_trip(self, seed):
        rng = np.random.default_rng(seed)
        f = np.linspace(1e9, 2e9, 64)
        bg = Spectrum(f, rng.uniform(0.5, 1.0, f.size))
        sig = Spectrum(f, bg.values + rng.uniform(0.0, 2.0, f.size))
        out = A.subtract_background(sig, bg)
        assert out.meta["clamped"] == 0
        assert np.allclose(out.values + bg.values, sig.values, rtol=1e-12, atol=0)


# --------------------------------------------------------------------------- optical resonance


class TestOpticalResonance:
    def test_noiseless_exact(self):
        r = A.fit_optical_resonance(resonance_trace())
        assert r.converged, r.message
        assert rel(r["omega_o"], TWO_PI * F_O) < 1e-12
        assert rel(r["kappa"], TWO_PI * KAPPA_HZ) < 1e-6
        assert rel(r["kappa_e"], TWO_PI * KAPPA_E_HZ) < 1e-6

    def test_one_percent_noise(self):
        r = A.fit_optical_resonance(resonance_trace(noise=0.01, seed=3))
        assert r.converged
        assert rel(r["kappa"], TWO_PI * KAPPA_HZ) < 0.02
        assert rel(r["kappa_e"], TWO_PI * KAPPA_E_HZ) < 0.02

    def test_over_coupled_root_reported(self):
        r = A.fit_optical_resonance(resonance_trace())
        assert r.extra["alternate_kappa_e"] == pytest.approx(TWO_PI * (KAPPA_HZ - KAPPA_E_HZ), rel=1e-6)

    def test_flat_trace_not_converged(self):
        f = np.linspace(F_O - 5e9, F_O + 5e9, 401)
        y = 1.0 + 0.01 * np.random.default_rng(0).standard_normal(f.size)
        r = A.fit_optical_resonance(Spectrum(f, y))
        assert not r.converged
        assert "no resolvable dip" in r.message

    def test_short_span_flagged(self):
        r = A.fit_optical_resonance(resonance_trace(half_span=1e9))
        assert not r.converged
        assert "3 linewidths" in r.message

    def test_uncertainties_non_negative(self):
        r = A.fit_optical_resonance(resonance_trace(noise=0.01))
        assert np.all(r.errors >= 0) and math.isfinite(r.residual_norm)

    def test_monte_carlo_coverage(self):
        hits = {"kappa": 0, "kappa_e": 0}
        truth = {"kappa": TWO_PI * KAPPA_HZ, "kappa_e": TWO_PI * KAPPA_E_HZ}
        trials = 200
        for seed in range(trials):
            r = A.fit_optical_resonance(resonance_trace(noise=0.01, seed=seed))
            for k in hits:
                lo, hi = r.interval(k, 0.95)
                hits[k] += lo <= truth[k] <= hi
        for k, v in hits.items():
            assert v / trials >= 0.90, (k, v)


# --------------------------------------------------------------------------- s11


class TestS11:
    def test_blue_detuning_recovered(self):
        delta = TWO_PI * 5.4e9
        r = A.fit_s11_detuning(s11_trace(DEVICE, delta), DEVICE)
        assert rel(abs(r["delta"]), delta) < 0.01
        assert rel(r["kappa_e"], DEVICE.kappa_e) < 0.01
        signs = {math.copysign(1, d) for d, _ in r.extra["candidates"]}
        assert signs == {1.0, -1.0}
        assert r.extra["sign_ambiguous"]

    def test_zero_detuning_unique(self):
        r = A.fit_s11_detuning(s11_trace(DEVICE, 0.0), DEVICE)
        assert abs(r["delta"]) < 1e-3 * DEVICE.kappa
        assert len(r.extra["candidates"]) == 1
        assert not r.extra["sign_ambiguous"]

    def test_window_matches_mechanics(self):
        delta = DEVICE.omega_m
        f = np.concatenate([np.linspace(0.1e9, 5.3e9, 120), np.linspace(5.33e9, 5.40e9, 281), np.linspace(5.45e9, 12e9, 120)])
        r = A.fit_s11_detuning(s11_trace(DEVICE, delta, 2000.0, f), DEVICE, n_cav=2000.0)
        assert rel(r["delta"], delta) < 1e-3
        win = D.omit_window(DEVICE, D.DriveCondition(0.0, r["delta"]), 2000.0)
        assert r.extra["window_center"] == pytest.approx(win.center, rel=1e-9)
        assert abs(r.extra["window_center"] - DEVICE.omega_m) < 0.01 * DEVICE.omega_m


# --------------------------------------------------------------------------- mechanical modes


class TestMechanical:
    def test_single_mode_20db(self):
        f = np.linspace(5.30e9, 5.43e9, 521)
        y = A.lorentzians(f, [5.365e9], [6.32e6], [1.0], 0.01)
        y = y + 0.01 * np.random.default_rng(7).standard_normal(f.size)
        (r,) = A.fit_mechanical_modes(Spectrum(f, y), 1)
        assert rel(r["gamma"], TWO_PI * 6.32e6) < 0.02
        assert rel(r["omega_m"], TWO_PI * 5.365e9) < 1e-5

    def test_triplet_within_rbw(self):
        f = np.arange(5.30e9, 5.50e9, presets.RBW_HZ)
        y = A.lorentzians(f, presets.THERMAL_TRIPLET_HZ, [6.3e6, 5e6, 8e6], presets.THERMAL_TRIPLET_WEIGHTS, 0.01)
        fits = A.fit_mechanical_modes(Spectrum(f, y), 3)
        got = [r["omega_m"] / TWO_PI for r in fits]
        assert np.all(np.abs(np.array(got) - presets.THERMAL_TRIPLET_HZ) < presets.RBW_HZ)
        assert not any(r.extra["merged"] for r in fits)

    def test_zero_amplitude_peak(self):
        f = np.linspace(5.30e9, 5.50e9, 801)
        y = A.lorentzians(f, [5.365e9, 5.45e9], [6e6, 6e6], [1.0, 0.0], 0.01)
        y = y + 0.005 * np.random.default_rng(2).standard_normal(f.size)
        fits = A.fit_mechanical_modes(Spectrum(f, y), 2, guesses=[5.365e9, 5.45e9])
        zero = fits[1]
        assert abs(zero["amplitude"]) <= 3 * zero.error("amplitude")

    def test_merged_warning(self):
        f = np.linspace(5.30e9, 5.43e9, 401)
        y = A.lorentzians(f, [5.365e9, 5.366e9], [6e6, 6e6], [1.0, 1.0])
        with pytest.warns(A.MergedPeakWarning):
            A.fit_mechanical_modes(Spectrum(f, y), 2)

    def test_bad_peak_count(self):
        with pytest.raises(ValueError):
            A.fit_mechanical_modes(Spectrum([1.0, 2.0, 3.0], [0.0, 1.0, 0.0]), 0)


# --------------------------------------------------------------------------- g0 extraction


POWERS = np.linspace(20e-6, 300e-6, 8)


class TestExtractG0:
    def test_noiseless_round_trip(self):
        s = A.simulate_power_series(DEVICE, POWERS, noise=0.0)
        assert s.sigma is None
        r = A.extract_g0(s, DEVICE.replace(g0=0.0))
        assert rel(r["g0"], DEVICE.g0) < 1e-6
        assert rel(r["gamma"], DEVICE.gamma) < 1e-6

    def test_reference_device(self):
        r = A.extract_g0(A.simulate_power_series(DEVICE, POWERS, seed=1), DEVICE)
        assert abs(r["g0"] - DEVICE.g0) <= 3 * r.error("g0")
        assert r["g0"] / TWO_PI == pytest.approx(0.50e6, abs=0.01e6)
        assert r.extra["slopes_consistent"]

    def test_zero_power_only(self):
        s = A.PowerSeries(np.zeros(4), np.nan, np.full(4, DEVICE.gamma), ("blue", "blue", "red", "red"))
        with pytest.raises(ValueError, match="insufficient span"):
            A.extract_g0(s, DEVICE)

    def test_single_branch_with_known_gamma(self):
        s = A.simulate_power_series(DEVICE, POWERS, branches=("red",), noise=0.0)
        r = A.extract_g0(s, DEVICE, gamma_known=DEVICE.gamma)
        assert rel(r["g0"], DEVICE.g0) < 1e-6

    def test_power_systematic_half(self):
        s = A.simulate_power_series(DEVICE, POWERS, seed=4)
        r = A.extract_g0(s, DEVICE, power_systematic=0.1)
        assert r.extra["g0_sys_error"] == pytest.approx(0.05 * r["g0"], rel=1e-12)
        assert r.error("g0") == pytest.approx(math.hypot(r.extra["g0_stat_error"], r.extra["g0_sys_error"]))

    def test_inconsistent_slopes_flagged(self):
        s = A.simulate_power_series(DEVICE, POWERS, noise=0.001, seed=0)
        g = s.gamma_eff.copy()
        red = np.array(s.branch) == "red"
        g[red] = DEVICE.gamma + 3 * (g[red] - DEVICE.gamma)
        r = A.extract_g0(A.PowerSeries(s.p_in, s.delta, g, s.branch, s.sigma), DEVICE)
        assert not r.extra["slopes_consistent"]
        assert "3 sigma" in r.message

    def test_nan_delta_falls_back(self):
        s = A.simulate_power_series(DEVICE, POWERS, noise=0.0)
        s2 = A.PowerSeries(s.p_in, np.nan, s.gamma_eff, s.branch)
        r = A.extract_g0(s2, DEVICE)
        assert rel(r["g0"], DEVICE.g0) < 1e-6

    def test_csv_round_trip(self):
        s = A.simulate_power_series(DEVICE, POWERS, seed=2)
        back = A.PowerSeries.from_csv(s.to_csv())
        assert np.allclose(back.gamma_eff, s.gamma_eff, rtol=1e-15)
        assert back.branch == s.branch
        assert s.to_csv().splitlines()[0] == "p_in_w,delta_hz,branch,gamma_eff_hz,sigma_hz"

    @settings(max_examples=20, deadline=None)
    @given(s=st.floats(0.2, 1.0))
    def test_invariant_under_power_kappa_e_rescaling(self, s):
        series = A.simulate_power_series(DEVICE, POWERS, seed=5)
        base = A.extract_g0(series, DEVICE)
        scaled = A.PowerSeries(series.p_in / s, series.delta, series.gamma_eff, series.branch, series.sigma)
        r = A.extract_g0(scaled, DEVICE.replace(kappa_e=DEVICE.kappa_e * s))
        assert rel(r["g0"], base["g0"]) < 1e-9
        assert rel(r["gamma"], base["gamma"]) < 1e-9

    def test_monte_carlo_coverage(self):
        trials, hits = 200, 0
        for seed in range(trials):
            r = A.extract_g0(A.simulate_power_series(DEVICE, POWERS, seed=seed), DEVICE)
            lo, hi = r.interval("g0", 0.95)
            hits += lo <= DEVICE.g0 <= hi
        assert hits / trials >= 0.90


# --------------------------------------------------------------------------- comparison table


class TestTable1:
    def test_c0_column(self):
        rep = A.table1_report(presets.TABLE1)
        for label, e in rep.relative_errors().items():
            assert e["c0"] < 0.05, label

    def test_this_work_resolution(self):
        rep = A.table1_report(presets.TABLE1)
        row = rep.rows[-1]
        assert row.resolution == pytest.approx(3.58, abs=0.005)

    def test_bold_pattern(self):
        rep = A.table1_report(presets.TABLE1)
        for col, labels in presets.TABLE1_BOLD.items():
            assert set(rep.bold[col]) == set(labels), col

    def test_single_row_all_best(self):
        rep = A.table1_report([presets.TABLE1[0]])
        assert all(rep.bold[c] == (presets.TABLE1[0]["label"],) for c in A.COLUMNS)

    def test_kappa_variant_surfaces(self):
        label = presets.TABLE1[-1]["label"]
        text = A.table1_report(presets.TABLE1, {label: 1.41e9}).format()
        assert "kappa variant" in text and "1.41 GHz" in text

    def test_cavity_params_entries(self):
        rep = A.table1_report([("device", DEVICE)])
        assert rep.rows[0].c0 == pytest.approx(D.single_photon_cooperativity(DEVICE), rel=1e-12)

    def test_missing_key(self):
        with pytest.raises(KeyError):
            A.table1_report([{"label": "x", "g0_hz": 1.0}])


class TestFitResult:
    def test_interval_student_t_wider(self):
        r = A.FitResult(("a",), [1.0], [0.1], 0.0, True, dof=3)
        lo, hi = r.interval("a")
        known = A.FitResult(("a",), [1.0], [0.1], 0.0, True)
        klo, khi = known.interval("a")
        assert hi - lo > khi - klo
        assert khi - 1.0 == pytest.approx(0.196, abs=1e-3)

    def test_unknown_name(self):
        r = A.FitResult(("a",), [1.0], [0.1], 0.0, True)
        with pytest.raises(KeyError):
            r["b"]

    def test_to_dict_plain(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            d = A.fit_optical_resonance(resonance_trace()).to_dict()
        assert set(d["parameters"]) == {"omega_o", "kappa", "kappa_e"}
        assert d["converged"] is True
