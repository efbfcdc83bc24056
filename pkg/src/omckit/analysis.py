"""Measurement reduction: background subtraction, resonance fits, g0 regression.

Every fit here inverts a generator in :mod:`omckit.dynamics`; the round-trip
tests are what define correctness. Fitted rates come back angular (rad/s)
while trace axes stay in cyclic Hz.
"""

from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize, signal, stats

from .constants import TWO_PI
from .dynamics import (
    CavityParams,
    DriveCondition,
    effective_linewidth,
    intracavity_photons,
    omit_window,
    optical_damping,
    s11_response,
)
from .spectrum import Spectrum

LS_TOL = 1e-14


class MergedPeakWarning(UserWarning):
    """Two fitted mechanical lines sit closer than their linewidth."""


@dataclass
class FitResult:
    """Point estimates with 1-sigma errors.

    ``dof`` is None when the data carried known absolute errors, in which
    case intervals use the normal quantile; otherwise Student t.
    """

    names: tuple
    values: np.ndarray
    errors: np.ndarray
    residual_norm: float
    converged: bool
    message: str = ""
    covariance: np.ndarray | None = None
    dof: int | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.errors = np.abs(np.asarray(self.errors, dtype=float))

    def _index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(name) from None

    def __getitem__(self, name: str) -> float:
        return float(self.values[self._index(name)])

    def error(self, name: str) -> float:
        return float(self.errors[self._index(name)])

    def interval(self, name: str, level: float = 0.95) -> tuple:
        q = 0.5 + level / 2.0
        z = stats.norm.ppf(q) if self.dof is None else stats.t.ppf(q, max(self.dof, 1))
        v, e = self[name], self.error(name)
        return v - z * e, v + z * e

    def to_dict(self) -> dict:
        out = {
            "converged": self.converged,
            "message": self.message,
            "residual_norm": self.residual_norm,
            "parameters": {n: {"value": float(v), "error": float(e)} for n, v, e in zip(self.names, self.values, self.errors)},
        }
        for k, v in self.extra.items():
            if isinstance(v, (int, float, str, bool)) or v is None:
                out[k] = v
        return out


def _covariance(jac, resid, known_sigma: bool):
    """Jacobian covariance; scaled by the reduced chi-square unless errors are known."""
    n, p = jac.shape
    # column scaling keeps pinv from truncating parameters of very different size
    d = np.linalg.norm(jac, axis=0)
    d[d == 0] = 1.0
    js = jac / d
    jtj_inv = np.linalg.pinv(js.T @ js) / np.outer(d, d)
    if known_sigma:
        return jtj_inv
    dof = max(n - p, 1)
    return jtj_inv * float(resid @ resid) / dof


# --------------------------------------------------------------------------- background


def subtract_background(signal_: Spectrum, background: Spectrum) -> Spectrum:
    """Linear-power subtraction with the background interpolated onto the signal axis.

    Negative differences are clamped to zero; ``meta['clamped']`` counts them.
    """
    s = signal_.linear()
    b = background.linear()
    lo, hi = max(s.freq[0], b.freq[0]), min(s.freq[-1], b.freq[-1])
    if lo > hi:
        raise ValueError("signal and background frequency ranges do not overlap")
    inside = (s.freq >= lo) & (s.freq <= hi)
    f = s.freq[inside]
    diff = np.asarray(s.values, float)[inside] - np.interp(f, b.freq, np.asarray(b.values, float))
    clamped = int(np.count_nonzero(diff < 0))
    meta = dict(s.meta)
    meta["clamped"] = clamped
    return replace(s, freq=f, values=np.maximum(diff, 0.0), units="linear", meta=meta)


# --------------------------------------------------------------------------- optical resonance


def reflection_dip(f_hz, f0_hz, kappa_hz, kappa_e_hz, scale=1.0, offset=0.0):
    """G |1 - kappa_e / (kappa/2 - i delta)|^2 + offset over a cyclic-Hz axis."""
    d = np.asarray(f_hz, float) - f0_hz
    return scale * ((kappa_hz / 2 - kappa_e_hz) ** 2 + d**2) / ((kappa_hz / 2) ** 2 + d**2) + offset


def _fwhm_guess(x, y, i_min, base):
    half = base - 0.5 * (base - y[i_min])
    below = np.nonzero(y < half)[0]
    if below.size < 2:
        return None
    return float(x[below[-1]] - x[below[0]])


def fit_optical_resonance(trace: Spectrum, fit_offset: bool = False, n_starts: int = 5) -> FitResult:
    """Fit a single-sided reflection dip for (omega_o, kappa, kappa_e).

    The offset is held at zero by default: with a free offset the dip depth
    and kappa_e trade off and kappa_e is not identifiable. The dip is symmetric
    under kappa_e -> kappa - kappa_e; the under-coupled root is returned and
    the other one is kept in ``extra['alternate_kappa_e']``.
    """
    t = trace.linear()
    y = np.asarray(t.values, float)
    if t.is_complex or y.size < 8:
        raise ValueError("need a real trace with at least 8 samples")
    f_ref = 0.5 * (t.freq[0] + t.freq[-1])
    x = t.freq - f_ref
    span = float(x[-1] - x[0])
    base = float(np.median(np.concatenate([y[: max(y.size // 10, 1)], y[-max(y.size // 10, 1):]])))
    if not base > 0:
        base = float(np.max(np.abs(y))) or 1.0
    i_min = int(np.argmin(y))
    kappa0 = _fwhm_guess(x, y, i_min, base) or span / 10.0
    kappa0 = min(max(kappa0, span / 1000.0), span)

    def model(p):
        off = p[4] if fit_offset else 0.0
        return reflection_dip(x, p[0], p[1], p[2], p[3], off)

    lower = [x[0] - span, span * 1e-6, 0.0, 0.0] + ([-np.inf] if fit_offset else [])
    upper = [x[-1] + span, 10.0 * span, 10.0 * span, np.inf] + ([np.inf] if fit_offset else [])
    starts = [x[i_min]] + list(np.linspace(x[0], x[-1], n_starts + 2)[1:-1])
    best = None
    for f0 in starts:
        p0 = [f0, kappa0, 0.25 * kappa0, base] + ([0.0] if fit_offset else [])
        p0 = np.clip(p0, lower, upper)
        try:
            r = optimize.least_squares(
                lambda p: model(p) - y, p0, bounds=(lower, upper), x_scale="jac",
                ftol=LS_TOL, xtol=LS_TOL, gtol=LS_TOL, max_nfev=4000,
            )
        except ValueError:
            continue
        if best is None or r.cost < best.cost:
            best = r
    if best is None:
        return FitResult(("omega_o", "kappa", "kappa_e"), [np.nan] * 3, [np.nan] * 3, math.inf, False, "no start converged")

    p = best.x.copy()
    cov = _covariance(best.jac, best.fun, known_sigma=False)
    f0, kappa, kappa_e = p[0], p[1], p[2]
    var_ke = cov[2, 2]
    folded = kappa_e > kappa / 2
    if folded:
        var_ke = cov[1, 1] + cov[2, 2] - 2 * cov[1, 2]
        kappa_e = kappa - kappa_e
    resid_rms = float(np.sqrt(np.mean(best.fun**2)))
    depth = 4.0 * p[3] * (kappa_e / kappa) * (1 - kappa_e / kappa)
    msgs = []
    if not best.success:
        msgs.append(best.message)
    if depth <= max(5.0 * resid_rms, 1e-9 * abs(p[3])):
        msgs.append("no resolvable dip")
    if kappa_e < 0 or kappa_e > kappa:
        msgs.append("kappa_e outside [0, kappa]")
    if not (x[0] <= f0 <= x[-1]):
        msgs.append("resonance outside trace")
    if span < 3 * kappa:
        msgs.append("trace spans fewer than 3 linewidths")
    converged = not msgs
    values = TWO_PI * np.array([f_ref + f0, kappa, kappa_e])
    errors = TWO_PI * np.sqrt(np.maximum([cov[0, 0], cov[1, 1], var_ke], 0.0))
    extra = {
        "scale": float(p[3]),
        "offset": float(p[4]) if fit_offset else 0.0,
        "alternate_kappa_e": TWO_PI * float(kappa - kappa_e),
        "depth": float(depth),
        "nfev": int(best.nfev),
    }
    return FitResult(
        ("omega_o", "kappa", "kappa_e"), values, errors, float(np.linalg.norm(best.fun)), converged,
        "; ".join(msgs), cov, dof=y.size - p.size, extra=extra,
    )


# --------------------------------------------------------------------------- s11 detuning


def fit_s11_detuning(
    s11: Spectrum,
    c: CavityParams,
    n_cav: float = 0.0,
    fit_kappa_e: bool = True,
    n_starts: int = 4,
    n_grid: int = 96,
) -> FitResult:
    """Fit |s11| over modulation frequency for the pump detuning.

    kappa comes from ``c``; kappa_e is re-estimated unless ``fit_kappa_e`` is
    False. Magnitude data only fixes |Delta| when mechanics is absent, so both
    signs are evaluated and ranked in ``extra['candidates']`` as
    (Delta rad/s, residual norm), best first.
    """
    if not s11.is_complex:
        mag = np.abs(np.asarray(s11.values, float))
    else:
        mag = np.abs(s11.values)
    om = TWO_PI * s11.freq
    w_max = float(om[-1])
    nk = 1 if fit_kappa_e else 0

    def magnitude(delta, ke, scale):
        return scale * np.abs(s11_response(c.replace(kappa_e=ke), delta, n_cav, om))

    def resid(p, sign):
        ke = p[1] if fit_kappa_e else c.kappa_e
        return magnitude(sign * p[0], ke, p[1 + nk]) - mag

    lower = [0.0] + ([1e-6 * c.kappa] if fit_kappa_e else []) + [0.0]
    upper = [4.0 * w_max + 2.0 * c.kappa] + ([c.kappa] if fit_kappa_e else []) + [np.inf]

    def run(p0, sign):
        p0 = np.clip(p0, lower, np.minimum(upper, 1e300))
        return optimize.least_squares(
            resid, p0, args=(sign,), bounds=(lower, upper), x_scale="jac",
            ftol=LS_TOL, xtol=LS_TOL, gtol=LS_TOL, max_nfev=400,
        )

    # coarse scan in |Delta| with the scale solved in closed form, then refine the best few
    grid = np.linspace(0.0, upper[0], n_grid)
    scan = []
    for sign in (1.0, -1.0):
        for d0 in grid:
            m = np.abs(s11_response(c, sign * d0, n_cav, om))
            a = float(m @ mag) / max(float(m @ m), 1e-300)
            scan.append((float(np.sum((a * m - mag) ** 2)), d0, sign, a))
    scan.sort(key=lambda t: t[0])
    best = None
    for _, d0, sign, a in scan[:n_starts]:
        p0 = [d0] + ([c.kappa_e] if fit_kappa_e else []) + [a]
        r = run(p0, sign)
        if best is None or r.cost < best[0].cost * (1 - 1e-12):
            best = (r, sign)
    r, sign = best
    # rank both signs at the optimum (refit the mirror image from the same point)
    mirror = run(r.x, -sign)
    cands = sorted(
        [(sign * r.x[0], float(np.linalg.norm(r.fun))), (-sign * mirror.x[0], float(np.linalg.norm(mirror.fun)))],
        key=lambda t: t[1],
    )
    cov = _covariance(r.jac, r.fun, known_sigma=False)
    errs = np.sqrt(np.maximum(np.diag(cov), 0.0))
    delta = sign * r.x[0]
    unique = abs(r.x[0]) <= max(2.0 * errs[0], 1e-9 * c.kappa)
    ambiguous = (not unique) and abs(cands[0][1] - cands[1][1]) <= 1e-6 * max(cands[0][1], 1e-300) + 1e-15
    ke = r.x[1] if fit_kappa_e else c.kappa_e
    names = ("delta",) + (("kappa_e",) if fit_kappa_e else ()) + ("scale",)
    values = [delta] + ([ke] if fit_kappa_e else []) + [r.x[-1]]
    extra = {
        "candidates": [cands[0]] if unique else cands,
        "sign_ambiguous": bool(ambiguous),
        "n_cav": float(n_cav),
    }
    if n_cav > 0 and c.g0 > 0:
        d = DriveCondition(0.0, delta)
        extra["window_center"] = omit_window(c.replace(kappa_e=ke), d, n_cav).center
    return FitResult(
        names, values, errs, float(np.linalg.norm(r.fun)), bool(r.success), r.message, cov,
        dof=mag.size - r.x.size, extra=extra,
    )


# --------------------------------------------------------------------------- mechanical modes


def lorentzians(f_hz, centers, fwhms, heights, background=0.0):
    f = np.asarray(f_hz, float)[:, None]
    hw = 0.5 * np.asarray(fwhms, float)
    return (np.asarray(heights) * hw**2 / ((f - np.asarray(centers)) ** 2 + hw**2)).sum(axis=1) + background


def fit_mechanical_modes(spec: Spectrum, n_peaks: int, guesses=None, background: bool = True) -> list:
    """Multi-Lorentzian least squares on a (linearised) power spectrum.

    Initial centres are the ``n_peaks`` most prominent local maxima unless
    ``guesses`` (centre frequencies in Hz) are given. Each returned FitResult
    carries omega_m and gamma (FWHM) in rad/s and the peak height in the
    trace's linear units; the shared background is in ``extra``.
    """
    if n_peaks < 1:
        raise ValueError("n_peaks must be >= 1")
    s = spec.linear()
    y = np.asarray(s.values, float)
    f_ref = float(s.freq[0])
    x = s.freq - f_ref
    df = float(np.median(np.diff(x)))
    span = float(x[-1] - x[0])
    floor = float(np.percentile(y, 10)) if background else 0.0

    if guesses is not None:
        guesses = list(guesses)
        if len(guesses) != n_peaks:
            raise ValueError("need one guess per peak")
        idx = np.searchsorted(s.freq, guesses).clip(0, y.size - 1)
        widths = np.full(n_peaks, max(span / (20 * n_peaks), 3 * df))
    else:
        peaks, props = signal.find_peaks(y, prominence=0)
        if peaks.size < n_peaks:
            warnings.warn(f"found {peaks.size} peaks, expected {n_peaks}", MergedPeakWarning, stacklevel=2)
            extra_pts = np.linspace(0, y.size - 1, n_peaks - peaks.size + 2)[1:-1].astype(int)
            peaks = np.concatenate([peaks, extra_pts])
            props = {"prominences": np.concatenate([props["prominences"], np.zeros(extra_pts.size)])}
        order = np.argsort(props["prominences"])[::-1][:n_peaks]
        idx = np.sort(peaks[order])
        with warnings.catch_warnings():
            # padded starts have zero prominence; their width falls back to the clip below
            warnings.simplefilter("ignore", RuntimeWarning)
            widths = signal.peak_widths(y, idx, rel_height=0.5)[0] * df
        widths = np.clip(widths, 2 * df, span)
    c0 = x[idx].astype(float)
    if guesses is not None:
        c0 = np.asarray(guesses, float) - f_ref
    h0 = np.maximum(y[idx] - floor, 0.0)

    def unpack(p):
        k = n_peaks
        return p[:k], p[k:2 * k], p[2 * k:3 * k], (p[3 * k] if background else 0.0)

    def resid(p):
        cen, fw, h, b = unpack(p)
        return lorentzians(x, cen, fw, h, b) - y

    p0 = np.concatenate([c0, widths, h0] + ([[floor]] if background else []))
    lower = np.concatenate([np.full(n_peaks, x[0]), np.full(n_peaks, df / 100), np.full(n_peaks, -np.inf)] + ([[-np.inf]] if background else []))
    upper = np.concatenate([np.full(n_peaks, x[-1]), np.full(n_peaks, 2 * span), np.full(n_peaks, np.inf)] + ([[np.inf]] if background else []))
    p0 = np.clip(p0, lower, upper)
    r = optimize.least_squares(resid, p0, bounds=(lower, upper), x_scale="jac", ftol=LS_TOL, xtol=LS_TOL, gtol=LS_TOL, max_nfev=20000)
    cov = _covariance(r.jac, r.fun, known_sigma=False)
    err = np.sqrt(np.maximum(np.diag(cov), 0.0))
    cen, fw, h, b = unpack(r.x)

    merged = set()
    for i in range(n_peaks):
        for j in range(i + 1, n_peaks):
            if abs(cen[i] - cen[j]) < max(fw[i], fw[j]):
                merged.update((i, j))
    if merged:
        warnings.warn("fitted peaks overlap within one linewidth; assignment is not unique", MergedPeakWarning, stacklevel=2)

    out = []
    norm = float(np.linalg.norm(r.fun))
    k = n_peaks
    for i in np.argsort(cen):
        sub = np.ix_([i, k + i, 2 * k + i], [i, k + i, 2 * k + i])
        out.append(
            FitResult(
                ("omega_m", "gamma", "amplitude"),
                [TWO_PI * (cen[i] + f_ref), TWO_PI * fw[i], h[i]],
                [TWO_PI * err[i], TWO_PI * err[k + i], err[2 * k + i]],
                norm, bool(r.success), r.message, cov[sub], dof=y.size - r.x.size,
                extra={
                    "background": float(b),
                    "area": float(h[i] * math.pi * fw[i] / 2.0),
                    "merged": i in merged,
                },
            )
        )
    return out


# --------------------------------------------------------------------------- power series and g0


@dataclass(frozen=True)
class PowerSeries:
    """Fitted mechanical linewidths across pump powers.

    ``delta`` entries that are NaN fall back to +/- omega_m by branch.
    ``sigma`` holds known 1-sigma errors on ``gamma_eff`` (rad/s) or is None.
    """

    p_in: np.ndarray  # W
    delta: np.ndarray  # rad/s
    gamma_eff: np.ndarray  # rad/s
    branch: tuple
    sigma: np.ndarray | None = None

    def __post_init__(self):
        p = np.atleast_1d(np.asarray(self.p_in, float))
        object.__setattr__(self, "p_in", p)
        object.__setattr__(self, "delta", np.broadcast_to(np.asarray(self.delta, float), p.shape).copy())
        object.__setattr__(self, "gamma_eff", np.asarray(self.gamma_eff, float))
        object.__setattr__(self, "branch", tuple(self.branch))
        if self.sigma is not None:
            object.__setattr__(self, "sigma", np.asarray(self.sigma, float))
            if self.sigma.shape != p.shape or not np.all(self.sigma > 0):
                raise ValueError("sigma must be positive with one entry per point")
        if not (self.gamma_eff.shape == p.shape and len(self.branch) == p.size):
            raise ValueError("power series columns must have equal length")
        if any(b not in ("blue", "red") for b in self.branch):
            raise ValueError("branch entries must be 'blue' or 'red'")
        if np.any(p < 0):
            raise ValueError("powers must be non-negative")

    def __len__(self):
        return self.p_in.size

    def resolved_delta(self, omega_m: float) -> np.ndarray:
        sign = np.where(np.array(self.branch) == "blue", 1.0, -1.0)
        return np.where(np.isnan(self.delta), sign * omega_m, self.delta)

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = "p_in_w,delta_hz,branch,gamma_eff_hz" + (",sigma_hz" if self.sigma is not None else "")
        buf.write(cols + "\n")
        for i in range(len(self)):
            d = "" if np.isnan(self.delta[i]) else repr(float(self.delta[i] / TWO_PI))
            row = [repr(float(self.p_in[i])), d, self.branch[i], repr(float(self.gamma_eff[i] / TWO_PI))]
            if self.sigma is not None:
                row.append(repr(float(self.sigma[i] / TWO_PI)))
            buf.write(",".join(row) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "PowerSeries":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        if not lines:
            raise ValueError("empty power series")
        header = [h.strip() for h in lines[0].split(",")]
        need = ["p_in_w", "delta_hz", "branch", "gamma_eff_hz"]
        if header[:4] != need:
            raise ValueError(f"power series header must start with {','.join(need)}")
        has_sigma = "sigma_hz" in header
        p, d, b, g, s = [], [], [], [], []
        for ln in lines[1:]:
            cells = [c.strip() for c in ln.split(",")]
            p.append(float(cells[0]))
            d.append(TWO_PI * float(cells[1]) if cells[1] else np.nan)
            b.append(cells[2])
            g.append(TWO_PI * float(cells[3]))
            if has_sigma:
                s.append(TWO_PI * float(cells[header.index("sigma_hz")]))
        return cls(np.array(p), np.array(d), np.array(g), tuple(b), np.array(s) if has_sigma else None)


def simulate_power_series(
    c: CavityParams,
    powers,
    branches=("blue", "red"),
    noise: float = 0.01,
    seed: int | None = 0,
    lambda0: float = 1550e-9,
    form: str = "full",
) -> PowerSeries:
    """Linewidth series from :func:`effective_linewidth` with relative Gaussian noise.

    Each branch is pumped at Delta = +/- omega_m. The known per-point sigma is
    ``noise * |gamma_eff|``; with ``noise=0`` no sigma is attached.
    """
    rng = np.random.default_rng(seed)
    powers = np.asarray(powers, float)
    p_all, d_all, g_all, b_all = [], [], [], []
    for br in branches:
        delta = (1.0 if br == "blue" else -1.0) * c.omega_m
        n = intracavity_photons(c, DriveCondition(1.0, delta, lambda0)) * powers
        g_all.append(effective_linewidth(c, n, delta, br, form))
        p_all.append(powers)
        d_all.append(np.full(powers.shape, delta))
        b_all += [br] * powers.size
    g = np.concatenate(g_all)
    sigma = noise * np.abs(g)
    g_noisy = g + sigma * rng.standard_normal(g.size)
    return PowerSeries(np.concatenate(p_all), np.concatenate(d_all), g_noisy, tuple(b_all), sigma if noise > 0 else None)


def _regressor(c: CavityParams, n, delta, branch, form):
    """h such that gamma_eff = gamma + g0^2 h."""
    unit = c.replace(g0=1.0)
    return np.array([float(optical_damping(unit, ni, di, bi, form)) for ni, di, bi in zip(n, delta, branch)])


def _wls(h, y, w):
    A = np.column_stack([np.ones_like(h), h])
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(A * sw[:, None], y * sw, rcond=None)
    r = (y - A @ coef) * sw
    return coef, A * sw[:, None], r


def extract_g0(
    series: PowerSeries,
    c: CavityParams,
    form: str = "full",
    power_systematic: float = 0.0,
    lambda0: float = 1550e-9,
    gamma_known: float | None = None,
) -> FitResult:
    """Regress gamma_eff on photon number for g0 and the intrinsic linewidth.

    The regressor is the backaction rate per unit g0^2, so a single slope
    (g0^2) is shared by both branches: blue and red slopes in gamma_eff vs n
    are equal and opposite by construction. Each branch is also fitted on its
    own; ``extra['slopes_consistent']`` is False when they differ by more than
    3 sigma. ``power_systematic`` is a fractional on-chip power uncertainty,
    added to the g0 error as half its relative value. ``c.g0`` is ignored.
    """
    branches = sorted(set(series.branch))
    for br in branches:
        sel = np.array(series.branch) == br
        if np.unique(series.p_in[sel][series.p_in[sel] > 0]).size < (1 if gamma_known is not None else 2):
            raise ValueError(f"insufficient span: {br} branch needs at least two distinct non-zero powers")
    delta = series.resolved_delta(c.omega_m)
    n = np.array([float(intracavity_photons(c, DriveCondition(p, d, lambda0))) for p, d in zip(series.p_in, delta)])
    h = _regressor(c, n, delta, series.branch, form)
    y = series.gamma_eff
    known = series.sigma is not None
    w = 1.0 / series.sigma**2 if known else np.ones_like(y)

    if gamma_known is not None:
        y = y - gamma_known
        A = (h * np.sqrt(w))[:, None]
        coef, *_ = np.linalg.lstsq(A, y * np.sqrt(w), rcond=None)
        r = y * np.sqrt(w) - A @ coef
        cov1 = _covariance(A, r, known)
        coef = np.array([gamma_known, coef[0]])
        cov = np.array([[0.0, 0.0], [0.0, cov1[0, 0]]])
        jac = A
    else:
        coef, jac, r = _wls(h, y, w)
        if np.linalg.matrix_rank(jac) < 2:
            raise ValueError("insufficient span: design matrix is degenerate")
        cov = _covariance(jac, r, known)
    gamma0, g2 = coef
    dof = None if known else max(y.size - jac.shape[1], 1)

    per_branch = {}
    for br in branches:
        sel = np.array(series.branch) == br
        if gamma_known is None:
            cb, jb, rb = _wls(h[sel], series.gamma_eff[sel], w[sel])
            covb = _covariance(jb, rb, known)
        else:
            cb = np.array([gamma_known, g2])
            covb = cov
        pos = sel & (n > 0)
        mean_h_per_n = float(np.mean(h[pos] / n[pos])) if pos.any() else 0.0
        per_branch[br] = {
            "intercept": float(cb[0]),
            "intercept_error": float(math.sqrt(max(covb[0, 0], 0.0))),
            "g0_squared": float(cb[1]),
            "g0_squared_error": float(math.sqrt(max(covb[1, 1], 0.0))),
            "slope_per_photon": float(cb[1] * mean_h_per_n),
        }
    consistent = True
    if len(per_branch) == 2 and gamma_known is None:
        b_, r_ = per_branch["blue"], per_branch["red"]
        z = abs(b_["g0_squared"] - r_["g0_squared"]) / math.hypot(b_["g0_squared_error"], r_["g0_squared_error"]) if (b_["g0_squared_error"] or r_["g0_squared_error"]) else 0.0
        consistent = z <= 3.0

    msgs = []
    if g2 <= 0:
        msgs.append("non-positive backaction slope")
    g0 = math.sqrt(max(g2, 0.0))
    stat = math.sqrt(max(cov[1, 1], 0.0)) / (2 * g0) if g0 > 0 else math.inf
    sys_ = 0.5 * power_systematic * g0
    g0_err = math.hypot(stat, sys_)
    if not consistent:
        msgs.append("blue and red slopes differ by more than 3 sigma")
    return FitResult(
        ("g0", "gamma"),
        [g0, gamma0],
        [g0_err, math.sqrt(max(cov[0, 0], 0.0))],
        float(np.linalg.norm(r)),
        g2 > 0,
        "; ".join(msgs),
        cov,
        dof=dof,
        extra={
            "branches": per_branch,
            "slopes_consistent": consistent,
            "n_cav": n,
            "g0_stat_error": stat,
            "g0_sys_error": sys_,
            "form": form,
        },
    )


# --------------------------------------------------------------------------- comparison table

QUBIT_BAND_HZ = (4e9, 8e9)
COLUMNS = ("g0_hz", "omega_m_hz", "kappa_hz", "gamma_hz", "resolution", "c0")


@dataclass(frozen=True)
class TableRow:
    label: str
    g0_hz: float
    omega_m_hz: float
    kappa_hz: float
    gamma_hz: float
    printed_resolution: float | None = None
    printed_c0: float | None = None

    @property
    def resolution(self) -> float:
        return self.omega_m_hz / self.kappa_hz

    @property
    def c0(self) -> float:
        return 4.0 * self.g0_hz**2 / (self.kappa_hz * self.gamma_hz)


@dataclass(frozen=True)
class Table1Report:
    rows: tuple
    bold: dict  # column -> tuple of labels
    kappa_variants: dict

    def relative_errors(self) -> dict:
        out = {}
        for r in self.rows:
            e = {}
            if r.printed_c0:
                e["c0"] = abs(r.c0 - r.printed_c0) / r.printed_c0
            if r.printed_resolution:
                e["resolution"] = abs(r.resolution - r.printed_resolution) / r.printed_resolution
            out[r.label] = e
        return out

    def format(self) -> str:
        head = f"{'structure':<22}{'g0/2pi (kHz)':>14}{'wm/2pi (GHz)':>14}{'k/2pi (GHz)':>13}{'g/2pi (MHz)':>13}{'wm/k':>9}{'C0':>11}"
        lines = [head, "-" * len(head)]
        for r in self.rows:
            def cell(col, text, width):
                mark = "*" if r.label in self.bold.get(col, ()) else " "
                return f"{text + mark:>{width}}"
            lines.append(
                f"{r.label:<22}"
                + cell("g0_hz", f"{r.g0_hz / 1e3:.0f}", 14)
                + cell("omega_m_hz", f"{r.omega_m_hz / 1e9:.2f}", 14)
                + cell("kappa_hz", f"{r.kappa_hz / 1e9:.2f}", 13)
                + cell("gamma_hz", f"{r.gamma_hz / 1e6:.2f}", 13)
                + cell("resolution", f"{r.resolution:.3g}", 9)
                + cell("c0", f"{r.c0:.2e}", 11)
            )
        lines.append("* best in column (omega_m: within the 4-8 GHz qubit band)")
        errs = self.relative_errors()
        for r in self.rows:
            e = errs[r.label]
            if e:
                parts = [f"{k} {v * 100:.1f}%" for k, v in e.items()]
                lines.append(f"vs printed, {r.label}: " + ", ".join(parts))
        for label, k_hz in self.kappa_variants.items():
            r = next(x for x in self.rows if x.label == label)
            alt = TableRow(label, r.g0_hz, r.omega_m_hz, k_hz, r.gamma_hz)
            lines.append(
                f"kappa variant, {label}: kappa/2pi = {k_hz / 1e9:.2f} GHz gives wm/k = {alt.resolution:.3g}, C0 = {alt.c0:.3e}"
            )
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "rows": [
                {
                    "label": r.label, "g0_hz": r.g0_hz, "omega_m_hz": r.omega_m_hz, "kappa_hz": r.kappa_hz,
                    "gamma_hz": r.gamma_hz, "resolution": r.resolution, "c0": r.c0,
                    "bold": [c for c in COLUMNS if r.label in self.bold.get(c, ())],
                }
                for r in self.rows
            ],
            "kappa_variants_hz": dict(self.kappa_variants),
        }


def _as_row(entry) -> TableRow:
    if isinstance(entry, TableRow):
        return entry
    if isinstance(entry, tuple) and len(entry) == 2 and isinstance(entry[1], CavityParams):
        label, c = entry
        return TableRow(label, c.g0 / TWO_PI, c.omega_m / TWO_PI, c.kappa / TWO_PI, c.gamma / TWO_PI)
    d = dict(entry)
    missing = [k for k in ("label", "g0_hz", "omega_m_hz", "kappa_hz", "gamma_hz") if k not in d]
    if missing:
        raise KeyError(f"table entry missing {missing}")
    for k in ("g0_hz", "omega_m_hz", "kappa_hz", "gamma_hz"):
        if not float(d[k]) > 0:
            raise ValueError(f"{k} must be positive in entry {d['label']!r}")
    return TableRow(
        str(d["label"]), float(d["g0_hz"]), float(d["omega_m_hz"]), float(d["kappa_hz"]), float(d["gamma_hz"]),
        d.get("printed_resolution"), d.get("printed_c0"),
    )


def table1_report(entries, kappa_variants: dict | None = None) -> Table1Report:
    """Compute omega_m/kappa and C0 per row and mark the best entry of each column.

    Entries are mappings with ``label, g0_hz, omega_m_hz, kappa_hz, gamma_hz``
    (cyclic Hz), ``(label, CavityParams)`` pairs, or :class:`TableRow`.
    Larger is better for g0, omega_m/kappa and C0; smaller for kappa and gamma.
    Mechanical frequencies are marked when they fall in the 4-8 GHz band used
    by superconducting qubits, falling back to the largest value.
    """
    rows = tuple(_as_row(e) for e in entries)
    if not rows:
        raise ValueError("no table entries")

    def pick(values, better):
        best = better(values)
        return tuple(r.label for r, v in zip(rows, values) if math.isclose(v, best, rel_tol=1e-12))

    bold = {
        "g0_hz": pick([r.g0_hz for r in rows], max),
        "kappa_hz": pick([r.kappa_hz for r in rows], min),
        "gamma_hz": pick([r.gamma_hz for r in rows], min),
        "resolution": pick([r.resolution for r in rows], max),
        "c0": pick([r.c0 for r in rows], max),
    }
    in_band = tuple(r.label for r in rows if QUBIT_BAND_HZ[0] <= r.omega_m_hz <= QUBIT_BAND_HZ[1])
    bold["omega_m_hz"] = in_band or pick([r.omega_m_hz for r in rows], max)
    return Table1Report(rows, bold, dict(kappa_variants or {}))
