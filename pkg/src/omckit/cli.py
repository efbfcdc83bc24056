"""``omc`` command-line entry point.

Every external frequency is cyclic Hz; conversion to angular units happens
here and in the file parsers. Exit codes: 0 success, 1 user error (bad
arguments or inputs), 2 numerical failure.
"""

from __future__ import annotations

import argparse
import io as _io
import logging
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import analysis, bands, dynamics, fields, optimizer, phasematch, presets, window
from .constants import C0, TWO_PI
from .geometry import UnitCellGeometry, defect_cell, mirror_cell
from .io import InputError, atomic_write, dumps, load_json, read_text
from .spectrum import Spectrum, read_spectrum_csv, write_spectrum_csv

EXIT_OK, EXIT_USER, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


@dataclass
class Output:
    csv: str | None = None
    data: dict | None = None
    summary: str = ""
    status: int = 0  # EXIT_NUMERIC when a fit reports non-convergence


# --------------------------------------------------------------------------- loaders


def _cavity(arg: str) -> dynamics.CavityParams:
    if arg in presets.PRESETS:
        return presets.PRESETS[arg]
    try:
        return dynamics.CavityParams.from_dict(load_json(arg))
    except (KeyError, TypeError) as e:
        raise InputError(f"{arg}: {e}") from None


def _drive(arg: str | None, c: dynamics.CavityParams, branch: str, p_in: float | None) -> dynamics.DriveCondition:
    if arg is not None:
        try:
            return dynamics.DriveCondition.from_dict(load_json(arg))
        except (KeyError, TypeError) as e:
            raise InputError(f"{arg}: missing key {e}") from None
    sign = 1.0 if branch == "blue" else -1.0
    return dynamics.DriveCondition(100e-6 if p_in is None else p_in, sign * c.omega_m)


def _cell(arg: str | None) -> UnitCellGeometry:
    if arg is None or arg == "defect":
        return defect_cell()
    if arg == "mirror":
        return mirror_cell()
    try:
        return UnitCellGeometry.from_dict(load_json(arg))
    except (KeyError, TypeError) as e:
        raise InputError(f"{arg}: missing key {e}") from None


def _trace(path: str) -> Spectrum:
    try:
        return read_spectrum_csv(read_text(path), label=path)
    except ValueError as e:
        raise InputError(f"{path}: {e}") from None


def _linspace(spec: str, name: str) -> np.ndarray:
    """Parse ``start:stop:count``."""
    try:
        lo, hi, n = spec.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise UsageError(f"{name} must look like start:stop:count, got {spec!r}") from None
    if n < 1:
        raise UsageError(f"{name} count must be >= 1")
    return np.linspace(lo, hi, n)


# --------------------------------------------------------------------------- commands


def cmd_window(args) -> Output:
    s = window.SubstrateModel(args.v_saw, args.n_cladding)
    out = {}
    if args.star_hz is not None:
        out["star_point_n_eff"] = window.star_point_neff(args.star_hz, s, args.lambda0)
    if args.point:
        # single operating point: one CSV row instead of the map
        n_eff, a = args.point
        p = window.OperatingPoint(n_eff, a, args.lambda0)
        v = window.window_check(p, s, TWO_PI * args.f_m)
        row = {
            "n_eff": n_eff,
            "a_m": a,
            "f_saw_hz": window.saw_cutoff_hz(p, s),
            "margin_hz": v.margin_hz,
            "guided_optics": v.guided_optics,
            "guided_mechanics": v.guided_mechanics,
            "in_first_bz": v.in_first_bz,
            "passes": v.passes,
        }
        out.update(row)
        csv = ",".join(row) + "\n" + ",".join(_csv_value(x) for x in row.values()) + "\n"
        summary = f"{'inside' if v.passes else 'outside'} the window, margin {v.margin_hz / 1e9:.3f} GHz"
        return Output(csv, out, summary)
    if args.steps < 1:
        raise UsageError("--steps must be >= 1")
    n_eff = np.linspace(args.neff_min, args.neff_max, args.steps)
    a = np.linspace(args.a_min, args.a_max, args.steps)
    m = window.window_map(n_eff, a, args.lambda0, s, TWO_PI * args.f_m)
    out["fraction_in_window"] = float(m.in_window.mean())
    summary = f"{m.in_window.sum()} of {m.in_window.size} grid points inside the window"
    if "star_point_n_eff" in out:
        summary += f"; star point n_eff = {out['star_point_n_eff']:.4f}"
    data = dict(out, rows=[{"n_eff": r[0], "a_m": r[1], "f_saw_hz": r[2], "in_window": r[3]} for r in m.rows()])
    return Output(m.to_csv(), data, summary)


def _csv_value(x) -> str:
    if isinstance(x, bool):
        return str(x).lower()
    return repr(float(x))


def _fields_source(args):
    if args.fields:
        doc = load_json(args.fields)
        try:
            opt = tuple(fields.field_from_dict(f) for f in fields._listify(doc["optical"]))
            mech = tuple(fields.field_from_dict(f) for f in fields._listify(doc["mechanical"]))
        except (KeyError, TypeError) as e:
            raise InputError(f"{args.fields}: missing key {e}") from None
        return doc, opt, mech, doc.get("a_m")
    cell = defect_cell()
    cav = fields.synth_cavity(args.synthetic, cell, math.pi / (2 * cell.a), math.pi / cell.a)
    doc = fields.cavity_to_document(cav, C0 / 1550e-9, 5.365e9)
    return doc, cav.optical, cav.mechanical, cell.a


def cmd_fft(args) -> Output:
    _, opt, mech, a = _fields_source(args)
    so = fields.spatial_spectrum(opt, args.pad, a)
    sm = fields.spatial_spectrum(mech, args.pad, a)
    ko, km = fields.peak_wavevector(so), fields.peak_wavevector(sm)
    buf = _io.StringIO()
    buf.write("k_rad_per_m," + ("k_over_pi_a," if a else "") + "optical,mechanical\n")
    for k, vo, vm in zip(so.freq, so.values, sm.values):
        ka = f"{float(k * a / math.pi)!r}," if a else ""
        buf.write(f"{float(k)!r},{ka}{float(vo)!r},{float(vm)!r}\n")
    data = {
        "optical_peak_rad_per_m": ko,
        "mechanical_peak_rad_per_m": km,
        "ratio": km / ko if ko else math.nan,
        "bin_rad_per_m": so.meta["bin_rad_per_m"],
    }
    if a:
        data["optical_peak_pi_over_a"] = ko * a / math.pi
        data["mechanical_peak_pi_over_a"] = km * a / math.pi
    return Output(buf.getvalue(), data, f"peaks: optical {ko:.4e}, mechanical {km:.4e} rad/m (ratio {data['ratio']:.4f})")


def cmd_g0(args) -> Output:
    doc, *_ = _fields_source(args)
    try:
        r = fields.g0_from_document(doc)
    except (KeyError, TypeError) as e:
        raise InputError(f"fields document: missing key {e}") from None
    data = {"g0_hz": r.magnitude / TWO_PI, "g0_signed_hz": r.signed / TWO_PI}
    return Output(None, data, f"g0/2pi = {data['g0_hz'] / 1e6:.4f} MHz")


def cmd_phasematch(args) -> Output:
    if args.a is not None:
        w = phasematch.zone_edge_wavevectors(args.a, args.n_cells)
    else:
        if None in (args.k_o, args.k_m, args.length):
            raise UsageError("give --a (with --n-cells) or all of --k-o, --k-m, --length")
        w = phasematch.WavevectorSet.standing(args.k_o, args.k_m, args.length)
    cls = phasematch.classify_interaction(w, args.threshold)
    rep = cls.report
    buf = _io.StringIO()
    buf.write("term,delta_k_rad_per_m,delta_k_L,suppression,envelope,matched\n")
    for e in rep.entries:
        buf.write(f"{e.term},{e.delta_k!r},{e.phase!r},{float(e.suppression)!r},{float(e.envelope)!r},{str(e.matched).lower()}\n")
    data = dict(rep.to_dict(), kind=cls.kind, ambiguous=cls.ambiguous, branches=list(cls.branches))
    return Output(buf.getvalue(), data, rep.table() + f"\nchannel: {cls.kind}" + (" (ambiguous)" if cls.ambiguous else ""))


def cmd_bands(args) -> Output:
    if args.sweep:
        path = bands.PerturbationPath(_cell(args.cell), _cell(args.mirror))
        r = bands.perturbation_sweep(path, args.sweep, n_bands=args.n_bands, n_harmonics=args.harmonics)
        buf = _io.StringIO()
        buf.write("t,band_index,optical_x_hz,mechanical_x_hz,mechanical_gap_open\n")
        for i, t in enumerate(r.t):
            for b in range(args.n_bands):
                buf.write(f"{float(t)!r},{b},{float(r.optical_x[i, b])!r},{float(r.mechanical_x[i, b])!r},{str(bool(r.mechanical_gap_open[i])).lower()}\n")
        data = {
            "t": r.t,
            "optical_x_hz": r.optical_x,
            "mechanical_x_hz": r.mechanical_x,
            "mechanical_gap_fraction": r.mechanical_gap_fraction,
            "optical_gap_fraction": r.optical_gap_fraction,
        }
        return Output(buf.getvalue(), data, f"mechanical gap open over {r.mechanical_gap_fraction:.0%} of the path")
    cell = _cell(args.cell)
    k = bands.k_path(cell.a, args.n_k)
    solver = bands.optical_bands if args.kind == "optical" else bands.mechanical_bands
    mat = bands.OpticalMaterial() if args.kind == "optical" else bands.MechanicalMaterial()
    d = solver(cell, mat, k, args.n_bands, args.harmonics, check_convergence=True)
    data = {"kind": d.kind, "k_over_pi_a": d.k * d.a / math.pi, "freq_hz": d.freqs, "convergence": d.convergence}
    return Output(d.to_csv(), data, f"{d.kind} bands, X-point band 0 at {d.freqs[-1, 0] / 1e9:.4f} GHz")


def _freq_axis(args, c):
    if args.freq:
        return _linspace(args.freq, "--freq")
    f_m = c.omega_m / TWO_PI
    return np.linspace(f_m - 30e6, f_m + 30e6, 1201)


def cmd_simulate(args) -> Output:
    c = _cavity(args.params)
    d = _drive(args.drive, c, args.branch, args.p_in)
    n = float(dynamics.intracavity_photons(c, d))
    if args.what == "omit":
        f = _freq_axis(args, c)
        spec = dynamics.omit_response(c, d, f, mode=args.mode)
        win = dynamics.omit_window(c, d)
        mag = np.abs(spec.values)
        data = {
            "n_cav": n,
            "window_center_hz": win.center / TWO_PI,
            "window_width_hz": win.width / TWO_PI,
            "cooperativity": win.depth_parameter,
            "min_hz": float(f[np.argmin(mag)]),
            "freq_hz": f,
            "re": spec.values.real,
            "im": spec.values.imag,
        }
        return Output(write_spectrum_csv(spec), data, f"n_cav = {n:.0f}; window at {data['window_center_hz'] / 1e9:.6f} GHz, width {data['window_width_hz'] / 1e6:.3f} MHz")
    if args.what == "thermal":
        f = _freq_axis(args, c) if args.freq else np.arange(5.30e9, 5.52e9, presets.RBW_HZ / 2)
        g_eff = float(dynamics.effective_linewidth(c, n, d.delta))
        if g_eff <= 0:
            raise FloatingPointError("drive is above the self-oscillation threshold; no thermal spectrum")
        base = c.omega_m / TWO_PI
        modes = [
            dynamics.MechanicalMode(TWO_PI * (fm - presets.THERMAL_TRIPLET_HZ[0] + base), g_eff if i == 0 else c.gamma, wgt)
            for i, (fm, wgt) in enumerate(zip(presets.THERMAL_TRIPLET_HZ, presets.THERMAL_TRIPLET_WEIGHTS))
        ]
        spec = dynamics.thermal_spectrum(modes, f, T=args.temperature)
        spec = Spectrum(spec.freq, spec.values, rbw_hz=presets.RBW_HZ, detuning_hz=d.delta / TWO_PI, label="thermal")
        data = {"n_cav": n, "gamma_eff_hz": g_eff / TWO_PI, "freq_hz": f, "value": spec.values}
        return Output(write_spectrum_csv(spec), data, f"fundamental linewidth {g_eff / TWO_PI / 1e6:.3f} MHz")
    # backaction
    powers = _linspace(args.powers, "--powers")
    series = analysis.simulate_power_series(c, powers, noise=args.noise, seed=args.seed, lambda0=d.lambda0)
    th = dynamics.lasing_threshold(c, d.lambda0)
    data = {
        "threshold_n_cav": th.n_cav,
        "threshold_p_in_w": th.p_in,
        "p_in_w": series.p_in,
        "delta_hz": series.delta / TWO_PI,
        "branch": list(series.branch),
        "gamma_eff_hz": series.gamma_eff / TWO_PI,
    }
    return Output(series.to_csv(), data, f"threshold: {th.n_cav:.0f} photons, {th.p_in * 1e6:.1f} uW")


def cmd_fit(args) -> Output:
    if args.what == "g0":
        series = analysis.PowerSeries.from_csv(read_text(args.series))
        c = _cavity(args.params)
        r = analysis.extract_g0(series, c, form=args.form, power_systematic=args.power_systematic)
        data = {
            "g0_hz": r["g0"] / TWO_PI,
            "g0_error_hz": r.error("g0") / TWO_PI,
            "gamma_hz": r["gamma"] / TWO_PI,
            "gamma_error_hz": r.error("gamma") / TWO_PI,
            "slopes_consistent": r.extra["slopes_consistent"],
            "branches": {
                b: {"intercept_hz": v["intercept"] / TWO_PI, "slope_hz_per_photon": v["slope_per_photon"] / TWO_PI}
                for b, v in r.extra["branches"].items()
            },
            "converged": r.converged,
            "message": r.message,
        }
        summary = f"g0/2pi = {data['g0_hz'] / 1e6:.4f} +/- {data['g0_error_hz'] / 1e6:.4f} MHz"
        return Output(None, data, summary, 0 if r.converged else EXIT_NUMERIC)
    trace = _trace(args.trace)
    if args.what == "resonance":
        r = analysis.fit_optical_resonance(trace, fit_offset=args.fit_offset)
        data = {
            "omega_o_hz": r["omega_o"] / TWO_PI,
            "kappa_hz": r["kappa"] / TWO_PI,
            "kappa_e_hz": r["kappa_e"] / TWO_PI,
            "errors_hz": {n: r.error(n) / TWO_PI for n in r.names},
            "alternate_kappa_e_hz": r.extra["alternate_kappa_e"] / TWO_PI,
            "converged": r.converged,
            "message": r.message,
        }
        summary = f"kappa/2pi = {data['kappa_hz'] / 1e9:.4f} GHz, kappa_e/2pi = {data['kappa_e_hz'] / 1e6:.1f} MHz"
        return Output(None, data, summary, 0 if r.converged else EXIT_NUMERIC)
    if args.what == "s11":
        c = _cavity(args.params)
        r = analysis.fit_s11_detuning(trace, c, n_cav=args.n_cav)
        data = {
            "delta_hz": r["delta"] / TWO_PI,
            "delta_error_hz": r.error("delta") / TWO_PI,
            "kappa_e_hz": r["kappa_e"] / TWO_PI,
            "candidates": [{"delta_hz": d / TWO_PI, "residual": e} for d, e in r.extra["candidates"]],
            "sign_ambiguous": r.extra["sign_ambiguous"],
            "converged": r.converged,
        }
        return Output(None, data, f"Delta/2pi = {data['delta_hz'] / 1e9:.4f} GHz" + (" (sign ambiguous)" if data["sign_ambiguous"] else ""))
    fits = analysis.fit_mechanical_modes(trace, args.n_peaks)
    data = {
        "modes": [
            {
                "omega_m_hz": r["omega_m"] / TWO_PI,
                "omega_m_error_hz": r.error("omega_m") / TWO_PI,
                "gamma_hz": r["gamma"] / TWO_PI,
                "gamma_error_hz": r.error("gamma") / TWO_PI,
                "amplitude": r["amplitude"],
                "merged": r.extra["merged"],
            }
            for r in fits
        ]
    }
    buf = _io.StringIO()
    buf.write("omega_m_hz,omega_m_error_hz,gamma_hz,gamma_error_hz,amplitude\n")
    for m in data["modes"]:
        buf.write(f"{m['omega_m_hz']!r},{m['omega_m_error_hz']!r},{m['gamma_hz']!r},{m['gamma_error_hz']!r},{m['amplitude']!r}\n")
    return Output(buf.getvalue(), data, "; ".join(f"{m['omega_m_hz'] / 1e9:.4f} GHz ({m['gamma_hz'] / 1e6:.2f} MHz)" for m in data["modes"]))


def cmd_table1(args) -> Output:
    if args.entries == "builtin":
        entries = presets.TABLE1
        variants = {presets.TABLE1[-1]["label"]: presets.DEVICE.kappa / TWO_PI}
    else:
        doc = load_json(args.entries)
        entries = doc["entries"] if isinstance(doc, dict) else doc
        variants = {}
    try:
        rep = analysis.table1_report(entries, variants)
    except (KeyError, TypeError) as e:
        raise InputError(f"{args.entries}: {e}") from None
    buf = _io.StringIO()
    buf.write("label,g0_hz,omega_m_hz,kappa_hz,gamma_hz,omega_m_over_kappa,c0,bold\n")
    for row in rep.to_dict()["rows"]:
        buf.write(
            f"{row['label']},{row['g0_hz']!r},{row['omega_m_hz']!r},{row['kappa_hz']!r},{row['gamma_hz']!r},"
            f"{row['resolution']!r},{row['c0']!r},{'|'.join(row['bold'])}\n"
        )
    return Output(buf.getvalue(), rep.to_dict(), rep.format())


def cmd_optimize(args) -> Output:
    start = _cell(args.start)
    obj = optimizer.DesignObjective.from_dict(load_json(args.objective)) if args.objective else optimizer.DesignObjective()
    opts = optimizer.NelderMeadOptions(max_iter=args.max_iter, tol_f=args.tol_f, tol_x=args.tol_x)
    res = optimizer.optimize_cell(start, obj, opts)
    if args.trace:
        atomic_write(args.trace, res.optimizer.trace_csv())
    data = res.to_dict()
    p = data["parameters_m"]
    summary = (
        f"a = {p['a'] * 1e9:.1f} nm, w = {p['w'] * 1e9:.1f} nm, value {res.value:.6g}, "
        + ("feasible" if res.feasible else "best point is infeasible")
    )
    return Output(res.optimizer.trace_csv(), data, summary)


# --------------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", help="output file (written atomically); default stdout")
    common.add_argument("--format", choices=("csv", "json"), default=None, help="output format (default csv where available)")
    common.add_argument("--quiet", action="store_true", help="suppress the summary on stderr")

    p = _Parser(prog="omc", description="Clamped optomechanical crystal toolkit. Frequencies in cyclic Hz, lengths in m.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    w = sub.add_parser("window", parents=[common], help="SAW operating-window map")
    w.add_argument("--neff-min", type=float, default=1.0, help="smallest effective index (dimensionless)")
    w.add_argument("--neff-max", type=float, default=3.5, help="largest effective index (dimensionless)")
    w.add_argument("--a-min", type=float, default=100e-9, help="smallest lattice constant (m)")
    w.add_argument("--a-max", type=float, default=400e-9, help="largest lattice constant (m)")
    w.add_argument("--steps", type=int, default=51, help="grid points along each axis (count)")
    w.add_argument("--lambda0", type=float, default=1550e-9, help="vacuum wavelength (m)")
    w.add_argument("--vsaw", "--v-saw", dest="v_saw", type=float, default=window.V_SAW_SIO2, help="substrate SAW velocity (m/s)")
    w.add_argument("--ncl", "--n-cladding", dest="n_cladding", type=float, default=window.N_SIO2, help="cladding refractive index (dimensionless)")
    w.add_argument("--omega-m", "--f-m", dest="f_m", type=float, default=5.4e9, help="mechanical frequency omega_m/2pi (Hz)")
    w.add_argument("--point", type=float, nargs=2, metavar=("N_EFF", "A"), help="single operating point: n_eff (dimensionless) and a (m)")
    w.add_argument("--star-hz", type=float, help="back-solve n_eff for this SAW cutoff (Hz)")
    w.set_defaults(func=cmd_window)

    for name, func, helptext in (("fft", cmd_fft, "spatial Fourier spectra of cavity fields"), ("g0", cmd_g0, "moving-boundary g0 from fields")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        g = s.add_mutually_exclusive_group()
        g.add_argument("--fields", help="fields JSON document (positions m, wavevectors rad/m, frequencies Hz)")
        g.add_argument("--synthetic", type=int, default=31, help="build a synthetic cavity with this many cells (count)")
        if name == "fft":
            s.add_argument("--pad", type=int, default=8, help="zero-padding factor (count)")
        s.set_defaults(func=func)

    ph = sub.add_parser("phasematch", parents=[common], help="six-term phase-matching report")
    ph.add_argument("--a", type=float, help="lattice constant (m); uses k_o = pi/(2a), k_m = pi/a")
    ph.add_argument("--N", "--n-cells", dest="n_cells", type=int, default=31, help="cavity length in cells (count)")
    ph.add_argument("--ko", "--k-o", dest="k_o", type=float, help="optical wavevector (rad/m)")
    ph.add_argument("--km", "--k-m", dest="k_m", type=float, help="mechanical wavevector (rad/m)")
    ph.add_argument("--length", type=float, help="cavity length (m)")
    ph.add_argument("--threshold", type=float, default=phasematch.DEFAULT_THRESHOLD, help="matched if |sinc| exceeds this (dimensionless)")
    ph.set_defaults(func=cmd_phasematch)

    b = sub.add_parser("bands", parents=[common], help="1-D plane-wave band surrogate")
    b.add_argument("--type", "--kind", dest="kind", choices=("optical", "mechanical"), default="mechanical", help="which bands (frequencies in Hz)")
    b.add_argument("--cell", help="cell JSON (lengths m) or 'defect'/'mirror'; default defect")
    b.add_argument("--mirror", default="mirror", help="end cell for --sweep, JSON (m) or 'mirror'")
    b.add_argument("--n-k", type=int, default=41, help="k samples from 0 to pi/a (count)")
    b.add_argument("--n-bands", type=int, default=4, help="bands to report (count)")
    b.add_argument("--harmonics", type=int, default=32, help="plane-wave harmonics M, 2M+1 waves (count)")
    b.add_argument("--sweep", type=int, help="perturbation sweep steps from cell to mirror (count)")
    b.set_defaults(func=cmd_bands)

    sim = sub.add_parser("simulate", parents=[common], help="generate model spectra")
    sim.add_argument("what", choices=("omit", "thermal", "backaction"), help="omit (s11/probe vs modulation Hz), thermal (PSD vs Hz), backaction (linewidth vs power)")
    sim.add_argument("--params", default="device", help="cavity JSON (cyclic Hz keys) or preset: " + ", ".join(presets.PRESETS))
    sim.add_argument("--drive", help="drive JSON with p_in_w (W), delta_hz (Hz), lambda0_m (m)")
    sim.add_argument("--branch", choices=("blue", "red"), default="blue", help="without --drive: pump at +/- omega_m (Hz)")
    sim.add_argument("--p-in", type=float, help="without --drive: on-chip power (W), default 100e-6")
    sim.add_argument("--freq", help="frequency grid start:stop:count (Hz)")
    sim.add_argument("--mode", choices=("s11", "probe"), default="s11", help="omit observable (dimensionless response)")
    sim.add_argument("--temperature", type=float, default=295.0, help="bath temperature (K)")
    sim.add_argument("--powers", default="20e-6:300e-6:10", help="backaction power grid start:stop:count (W)")
    sim.add_argument("--noise", type=float, default=0.0, help="relative linewidth noise (fraction)")
    sim.add_argument("--seed", type=int, default=0, help="noise seed (integer)")
    sim.set_defaults(func=cmd_simulate)

    fit = sub.add_parser("fit", parents=[common], help="fit measured or synthetic data")
    fit.add_argument("what", choices=("resonance", "s11", "mech", "g0"), help="resonance/s11/mech take --trace CSV (Hz axis); g0 takes --series")
    fit.add_argument("--trace", help="spectrum CSV: freq_hz plus value or re,im columns (Hz)")
    fit.add_argument("--series", help="power series CSV: p_in_w (W), delta_hz (Hz), branch, gamma_eff_hz (Hz)")
    fit.add_argument("--params", default="device", help="cavity JSON (cyclic Hz) or preset name")
    fit.add_argument("--n-cav", type=float, default=0.0, help="s11: intracavity photons during the sweep (count)")
    fit.add_argument("--n-peaks", type=int, default=1, help="mech: number of Lorentzians (count)")
    fit.add_argument("--fit-offset", action="store_true", help="resonance: fit an additive offset (trace units)")
    fit.add_argument("--form", choices=dynamics.FORMS, default="full", help="g0: backaction form (full or asymptotic)")
    fit.add_argument("--power-systematic", type=float, default=0.0, help="g0: fractional power uncertainty (fraction)")
    fit.set_defaults(func=cmd_fit)

    t = sub.add_parser("table1", parents=[common], help="comparison table of clamped optomechanical structures")
    t.add_argument("--entries", default="builtin", help="'builtin' or JSON list with label, g0_hz, omega_m_hz, kappa_hz, gamma_hz (Hz)")
    t.set_defaults(func=cmd_table1)

    o = sub.add_parser("optimize", parents=[common], help="Nelder-Mead over the surrogate design objective")
    o.add_argument("--start", default="defect", help="start cell JSON (m) or 'defect'")
    o.add_argument("--objective", help="objective JSON: weights, bounds_m (m), margin_hz (Hz), g0_ref_hz (Hz)")
    o.add_argument("--max-iter", type=int, default=200, help="iteration cap (count)")
    o.add_argument("--tol-f", type=float, default=1e-9, help="value-spread tolerance (objective units)")
    o.add_argument("--tol-x", type=float, default=1e-6, help="simplex diameter tolerance (fraction of bound range)")
    o.add_argument("--trace", help="write the iteration trace CSV here")
    o.set_defaults(func=cmd_optimize)
    return p


def _check_inputs(args):
    """Fail fast on missing input files before any computation."""
    for attr in ("params", "drive", "cell", "mirror", "start", "objective", "trace_in", "series", "fields", "entries"):
        val = getattr(args, attr, None)
        if val is None or val in presets.PRESETS or val in ("builtin", "defect", "mirror"):
            continue
        read_text(val)
    if getattr(args, "command", None) == "fit":
        if args.what == "g0" and not args.series:
            raise UsageError("fit g0 needs --series")
        if args.what != "g0":
            if not args.trace:
                raise UsageError(f"fit {args.what} needs --trace")
            read_text(args.trace)


def _emit(out: Output, args):
    fmt = args.format or ("csv" if out.csv is not None else "json")
    if fmt == "csv" and out.csv is None:
        raise UsageError(f"{args.command} has no CSV output; use --format json")
    text = out.csv if fmt == "csv" else dumps(out.data if out.data is not None else {})
    if args.out:
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    if not args.quiet and out.summary:
        print(out.summary, file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            print("omc: error: a subcommand is required", file=sys.stderr)
            return EXIT_USER
        logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING, format="%(message)s")
        _check_inputs(args)
        out = args.func(args)
        _emit(out, args)
        if out.status:
            print("omc: fit did not converge; diagnostics written with the output", file=sys.stderr)
        return out.status
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USER
    except (InputError, ValueError, KeyError) as e:
        print(f"omc: error: {e}", file=sys.stderr)
        return EXIT_USER
    except (bands.BandSolverError, np.linalg.LinAlgError, FloatingPointError, ZeroDivisionError, ArithmeticError, RuntimeError) as e:
        print(f"omc: numerical failure: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except BrokenPipeError:
        return EXIT_OK
    except SystemExit as e:  # --help
        return int(e.code or 0)


if __name__ == "__main__":
    sys.exit(main())
