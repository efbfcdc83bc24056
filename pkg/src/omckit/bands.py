"""One-dimensional band-structure surrogates.

Optics: scalar Helmholtz equation -E'' = (w/c)^2 eps(x) E.
Mechanics: longitudinal rod -(S(x) u')' = w^2 m(x) u, with S the stiffness
times cross-section and m the mass per length, both proportional to the
local fill.

Both are solved by plane-wave expansion with 2M+1 harmonics. Fourier
coefficients of the piecewise-constant profiles are analytic, so empty
lattices are exact. The stiffness uses the inverse rule (Toeplitz matrix of
1/S, inverted), which converges much faster than direct Laurent products for
discontinuous S.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.optimize import brentq

from .constants import C0, TWO_PI
from .geometry import UnitCellGeometry
from .window import N_SIO2, V_SAW_SIO2

DEFAULT_HARMONICS = 64


class BandSolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class OpticalMaterial:
    n_hi: float = 2.25
    n_lo: float = 1.45
    n_cladding: float = N_SIO2

    def __post_init__(self):
        if not self.n_hi > self.n_lo >= 1.0:
            raise ValueError("need n_hi > n_lo >= 1")

    def permittivity(self, fills) -> np.ndarray:
        e_lo = self.n_lo**2
        return e_lo + np.asarray(fills, float) * (self.n_hi**2 - e_lo)


@dataclass(frozen=True)
class MechanicalMaterial:
    """Solid and etched-region properties of the rod model.

    ``stiffness`` is an effective Young's modulus; passing a reduced value is
    how geometrical softening enters. The defaults put the lowest X-point
    mode of the default defect cell near 5.4 GHz.
    """

    rho: float = 2329.0
    stiffness: float = 15.4e9
    rho_etched: float = 0.0
    stiffness_etched: float = 0.0
    v_saw: float = V_SAW_SIO2

    def density(self, fills) -> np.ndarray:
        return self.rho_etched + np.asarray(fills, float) * (self.rho - self.rho_etched)

    def modulus(self, fills) -> np.ndarray:
        return self.stiffness_etched + np.asarray(fills, float) * (self.stiffness - self.stiffness_etched)

    @property
    def velocity(self) -> float:
        return math.sqrt(self.stiffness / self.rho)


@dataclass(frozen=True)
class BandDiagram:
    kind: str  # "optical" | "mechanical"
    k: np.ndarray  # rad/m
    freqs: np.ndarray  # (n_k, n_bands), Hz, ascending per row
    continuum: np.ndarray  # (n_k,), Hz
    a: float
    convergence: float | None = None  # max relative change on doubling M

    @property
    def above_continuum(self) -> np.ndarray:
        return self.freqs > self.continuum[:, None]

    def rows(self):
        for i, k in enumerate(self.k):
            for b in range(self.freqs.shape[1]):
                yield k * self.a / math.pi, b, self.freqs[i, b], bool(self.above_continuum[i, b])

    def to_csv(self) -> str:
        lines = ["k_over_pi_a,band_index,freq_hz,above_continuum"]
        for kk, b, f, above in self.rows():
            lines.append(f"{float(kk)!r},{b},{float(f)!r},{str(above).lower()}")
        return "\n".join(lines) + "\n"


def k_path(a: float, n: int = 41) -> np.ndarray:
    """Uniform samples of [0, pi/a]."""
    return np.linspace(0.0, math.pi / a, n)


def _merge(edges, values):
    """Drop boundaries between segments of equal value."""
    keep_e, keep_v = [edges[0]], []
    for i, v in enumerate(values):
        if keep_v and v == keep_v[-1]:
            keep_e[-1] = edges[i + 1]
        else:
            keep_v.append(v)
            keep_e.append(edges[i + 1])
    return np.array(keep_e), np.array(keep_v)


def fourier_coefficients(edges, values, a: float, m_max: int) -> np.ndarray:
    """Coefficients c_m, m = -m_max..m_max, of a piecewise-constant periodic function."""
    edges, values = _merge(np.asarray(edges, float), np.asarray(values, float))
    m = np.arange(-m_max, m_max + 1)
    out = np.zeros(m.size, dtype=complex)
    if values.size == 1:
        out[m_max] = values[0]
        return out
    G = TWO_PI * m / a
    nz = m != 0
    lengths = np.diff(edges)
    out[~nz] = np.sum(values * lengths) / a
    ph = np.exp(-1j * np.outer(G[nz], edges))  # (n_m, n_edges)
    out[nz] = (ph[:, 1:] - ph[:, :-1]) @ values / (-1j * G[nz] * a)
    return out


def toeplitz_matrix(coeffs: np.ndarray, n_harm: int) -> np.ndarray:
    """Matrix T[i, j] = c(m_i - m_j) for m in -n_harm..n_harm."""
    m_max = (coeffs.size - 1) // 2
    idx = np.arange(-n_harm, n_harm + 1)
    diff = idx[:, None] - idx[None, :]
    return coeffs[diff + m_max]


def _solve_generalized(A, B, n_bands, kind, k):
    try:
        w, _ = _eigh(A, B)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        cond = np.linalg.cond(B)
        raise BandSolverError(f"{kind} expansion failed at k={k:.4e} rad/m (cond(B)={cond:.3e}): {exc}") from exc
    # round-off around the k=0 zero mode
    w = np.where(np.abs(w) < 1e-12 * np.max(np.abs(w)), 0.0, w)
    return w[:n_bands]


def _eigh(A, B):
    cond = np.linalg.cond(B)
    if not np.isfinite(cond) or cond > 1e12:
        raise np.linalg.LinAlgError(f"ill-conditioned mass matrix, cond={cond:.3e}")
    return scipy.linalg.eigh(A, B)


class _Expansion:
    """Matrices of one cell, reused across k."""

    def __init__(self, cell, weight_values, stiff_values, n_harm, inverse_rule):
        self.a = cell.a
        self.n_harm = n_harm
        edges = cell.edges
        self.G = TWO_PI * np.arange(-n_harm, n_harm + 1) / cell.a
        self.B = toeplitz_matrix(fourier_coefficients(edges, weight_values, cell.a, 2 * n_harm), n_harm)
        if stiff_values is None:
            self.S = None
        elif inverse_rule:
            inv = toeplitz_matrix(fourier_coefficients(edges, 1.0 / np.asarray(stiff_values), cell.a, 2 * n_harm), n_harm)
            self.S = np.linalg.inv(inv)
            self.S = 0.5 * (self.S + self.S.conj().T)
        else:
            self.S = toeplitz_matrix(fourier_coefficients(edges, stiff_values, cell.a, 2 * n_harm), n_harm)

    def operator(self, k):
        kg = k + self.G
        if self.S is None:
            return np.diag(kg**2).astype(complex)
        return kg[:, None] * self.S * kg[None, :]


def _optical_eigs(cell, mat, k_samples, n_bands, n_harm):
    eps = mat.permittivity(cell.fills)
    if np.any(eps <= 0):
        raise BandSolverError("non-positive permittivity in cell")
    ex = _Expansion(cell, eps, None, n_harm, False)
    out = np.empty((len(k_samples), n_bands))
    for i, k in enumerate(k_samples):
        lam = _solve_generalized(ex.operator(k), ex.B, n_bands, "optical", k)
        out[i] = C0 * np.sqrt(np.clip(lam, 0.0, None)) / TWO_PI
    return out


def _mechanical_eigs(cell, mat, k_samples, n_bands, n_harm):
    rho = mat.density(cell.fills)
    E = mat.modulus(cell.fills)
    if np.any(rho <= 0) or np.any(E <= 0):
        raise BandSolverError("density and stiffness must be positive everywhere in the cell")
    ex = _Expansion(cell, rho, E, n_harm, True)
    out = np.empty((len(k_samples), n_bands))
    for i, k in enumerate(k_samples):
        lam = _solve_generalized(ex.operator(k), ex.B, n_bands, "mechanical", k)
        out[i] = np.sqrt(np.clip(lam, 0.0, None)) / TWO_PI
    return out


def _check_bands(n_bands, n_harm):
    if n_bands < 1:
        raise ValueError("n_bands must be >= 1")
    if 2 * n_harm + 1 < n_bands:
        raise ValueError("too few harmonics for the requested bands")


def optical_bands(
    cell: UnitCellGeometry,
    mat: OpticalMaterial,
    k_samples=None,
    n_bands: int = 4,
    n_harmonics: int = DEFAULT_HARMONICS,
    check_convergence: bool = False,
) -> BandDiagram:
    """Scalar photonic bands of the periodic fill profile; frequencies in Hz."""
    _check_bands(n_bands, n_harmonics)
    k = k_path(cell.a) if k_samples is None else np.asarray(k_samples, float)
    f = _optical_eigs(cell, mat, k, n_bands, n_harmonics)
    conv = None
    if check_convergence:
        f2 = _optical_eigs(cell, mat, k, n_bands, 2 * n_harmonics)
        conv = _relative_change(f, f2)
    light = C0 * k / (TWO_PI * mat.n_cladding)
    return BandDiagram("optical", k, f, light, cell.a, conv)


def mechanical_bands(
    cell: UnitCellGeometry,
    mat: MechanicalMaterial,
    k_samples=None,
    n_bands: int = 4,
    n_harmonics: int = DEFAULT_HARMONICS,
    check_convergence: bool = False,
) -> BandDiagram:
    """Longitudinal phonon bands of the periodic rod; frequencies in Hz."""
    _check_bands(n_bands, n_harmonics)
    k = k_path(cell.a) if k_samples is None else np.asarray(k_samples, float)
    f = _mechanical_eigs(cell, mat, k, n_bands, n_harmonics)
    conv = None
    if check_convergence:
        f2 = _mechanical_eigs(cell, mat, k, n_bands, 2 * n_harmonics)
        conv = _relative_change(f, f2)
    sound = mat.v_saw * k / TWO_PI
    return BandDiagram("mechanical", k, f, sound, cell.a, conv)


def _relative_change(f, f2) -> float:
    scale = np.where(f2 > 0, f2, 1.0)
    return float(np.max(np.abs(f - f2) / scale))


def bloch_mode(
    cell: UnitCellGeometry,
    mat,
    k: float,
    band: int = 0,
    samples: int = 64,
    n_harmonics: int = DEFAULT_HARMONICS,
):
    """Periodic part of an eigenmode on ``samples`` points across one cell.

    Returns ``(x, bloch, freq_hz)`` with the total field bloch * exp(i k x).
    The mode is normalised to unit peak magnitude and its phase fixed so the
    largest sample is real and positive.
    """
    if isinstance(mat, OpticalMaterial):
        ex = _Expansion(cell, mat.permittivity(cell.fills), None, n_harmonics, False)
        scale = C0
    else:
        ex = _Expansion(cell, mat.density(cell.fills), mat.modulus(cell.fills), n_harmonics, True)
        scale = 1.0
    w, v = _eigh(ex.operator(k), ex.B)
    coeffs = v[:, band]
    x = np.linspace(0.0, cell.a, samples, endpoint=False)
    bloch = np.exp(1j * np.outer(x, ex.G)) @ coeffs
    i = int(np.argmax(np.abs(bloch)))
    bloch = bloch * np.exp(-1j * np.angle(bloch[i])) / np.abs(bloch[i])
    return x, bloch, scale * math.sqrt(max(w[band], 0.0)) / TWO_PI


@dataclass(frozen=True)
class PerturbationPath:
    """Linear morph from the defect cell (t=0) to the mirror cell (t=1)."""

    defect: UnitCellGeometry
    mirror: UnitCellGeometry

    def at(self, t: float) -> UnitCellGeometry:
        return self.defect.interpolate(self.mirror, t)


@dataclass(frozen=True)
class SweepResult:
    t: np.ndarray
    optical_x: np.ndarray  # (steps, n_bands) Hz
    mechanical_x: np.ndarray
    optical_continuum_x: np.ndarray  # (steps,) Hz
    mechanical_continuum_x: np.ndarray
    mechanical_gap_open: np.ndarray  # (steps,) bool
    optical_gap_open: np.ndarray
    mechanical_target_hz: float
    optical_target_hz: float

    @property
    def mechanical_gap_fraction(self) -> float:
        return float(np.mean(self.mechanical_gap_open))

    @property
    def optical_gap_fraction(self) -> float:
        return float(np.mean(self.optical_gap_open))


def _in_gap(freqs_x, target, continuum, gap_index):
    lo = freqs_x[gap_index]
    hi = freqs_x[gap_index + 1]
    return bool(lo < target < hi and target < continuum)


def perturbation_sweep(
    path: PerturbationPath,
    steps: int,
    optical: OpticalMaterial = OpticalMaterial(),
    mechanical: MechanicalMaterial = MechanicalMaterial(),
    n_bands: int = 4,
    mechanical_target_hz: float | None = None,
    optical_target_hz: float | None = None,
    gap_index: int = 0,
    n_harmonics: int = 32,
) -> SweepResult:
    """X-point frequencies along the defect -> mirror morph.

    A step counts as gap-open when the target lies strictly between bands
    ``gap_index`` and ``gap_index + 1`` at the X point and below the
    continuum line there. Targets default to the defect cell's X-point
    frequency of band ``gap_index + 1`` for optics (the air band edge) and
    of band ``gap_index`` for mechanics.
    """
    if steps < 2:
        raise ValueError("steps must be >= 2")
    if gap_index + 1 >= n_bands:
        raise ValueError("gap_index must leave a band above it")
    ts = np.linspace(0.0, 1.0, steps)
    ox = np.empty((steps, n_bands))
    mx = np.empty((steps, n_bands))
    oc = np.empty(steps)
    mc = np.empty(steps)
    for i, t in enumerate(ts):
        cell = path.at(float(t))
        kx = np.array([math.pi / cell.a])
        ox[i] = _optical_eigs(cell, optical, kx, n_bands, n_harmonics)[0]
        mx[i] = _mechanical_eigs(cell, mechanical, kx, n_bands, n_harmonics)[0]
        oc[i] = C0 * kx[0] / (TWO_PI * optical.n_cladding)
        mc[i] = mechanical.v_saw * kx[0] / TWO_PI
    m_target = mx[0, gap_index] if mechanical_target_hz is None else mechanical_target_hz
    o_target = ox[0, gap_index + 1] if optical_target_hz is None else optical_target_hz
    m_open = np.array([_in_gap(mx[i], m_target, mc[i], gap_index) for i in range(steps)])
    o_open = np.array([_in_gap(ox[i], o_target, np.inf, gap_index) for i in range(steps)])
    return SweepResult(ts, ox, mx, oc, mc, m_open, o_open, float(m_target), float(o_target))


def optical_gap_at_x(cell: UnitCellGeometry, mat: OpticalMaterial, n_harmonics: int = DEFAULT_HARMONICS) -> float:
    """Width (Hz) of the first X-point gap."""
    f = _optical_eigs(cell, mat, [math.pi / cell.a], 2, n_harmonics)[0]
    return float(f[1] - f[0])


def mechanical_gap_at_x(cell: UnitCellGeometry, mat: MechanicalMaterial, n_harmonics: int = DEFAULT_HARMONICS) -> float:
    f = _mechanical_eigs(cell, mat, [math.pi / cell.a], 2, n_harmonics)[0]
    return float(f[1] - f[0])


def effective_index(cell: UnitCellGeometry, mat: OpticalMaterial, lambda0: float, n_harmonics: int = 32):
    """Effective index k c / w of the lowest band at vacuum wavelength ``lambda0``.

    Returns ``(n_eff, k)``. Raises BandSolverError if the frequency lies above
    the first band at the zone edge (inside the gap or higher).
    """
    f0 = C0 / lambda0
    kx = math.pi / cell.a
    fx = _optical_eigs(cell, mat, [kx], 1, n_harmonics)[0, 0]
    if f0 > fx:
        raise BandSolverError(f"{f0:.4e} Hz is above the first band edge {fx:.4e} Hz")
    g = lambda k: _optical_eigs(cell, mat, [k], 1, n_harmonics)[0, 0] - f0  # noqa: E731
    k = brentq(g, 1e-9 * kx, kx, xtol=1e-12 * kx)
    return k * C0 / (TWO_PI * f0), k
