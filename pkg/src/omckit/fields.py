"""Discretised cavity fields and the moving-boundary coupling integral.

Fields follow the Bloch-times-envelope form

    E(x) = (E_f(x) exp(i k_of x) + E_b(x) exp(i k_ob x)) f_o(x)

sampled on a uniform longitudinal grid. The transverse structure is lumped
into boundary patches: for each patch the caller supplies the Bloch value of
the tangential E and normal D (optics) or of u.n (mechanics), plus the patch
area and the permittivities on either side. Volume integrals use the
trapezoidal rule along x times a transverse mode area.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .constants import HBAR, TWO_PI
from .geometry import UnitCellGeometry
from .spectrum import Spectrum, is_uniform

ENVELOPES = ("uniform", "cosine", "gaussian")


@dataclass(frozen=True)
class BlochField:
    """One travelling component of a cavity field.

    ``patch_bloch`` has shape ``(P,)`` for mechanics (u.n) or ``(P, 2)`` for
    optics (E tangential, D normal); it is aligned with the patch positions in
    :class:`MaterialData`.
    """

    x: np.ndarray
    bloch: np.ndarray
    k: float
    envelope: np.ndarray
    patch_bloch: np.ndarray = field(default_factory=lambda: np.zeros(0, complex))

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        bloch = np.asarray(self.bloch, dtype=complex)
        env = np.asarray(self.envelope, dtype=float)
        if x.ndim != 1 or bloch.shape != x.shape or env.shape != x.shape:
            raise ValueError("x, bloch and envelope must be 1-D arrays of equal length")
        if not is_uniform(x):
            raise ValueError("field grid must be uniform")
        if np.any(env < 0):
            raise ValueError("envelope must be non-negative")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "bloch", bloch)
        object.__setattr__(self, "envelope", env)
        object.__setattr__(self, "patch_bloch", np.asarray(self.patch_bloch, dtype=complex))

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    def samples(self) -> np.ndarray:
        """Total complex field on the grid."""
        return self.bloch * np.exp(1j * self.k * self.x) * self.envelope

    def at_patches(self, patch_x) -> np.ndarray:
        patch_x = np.asarray(patch_x, dtype=float)
        env = np.interp(patch_x, self.x, self.envelope)
        phase = np.exp(1j * self.k * patch_x) * env
        if self.patch_bloch.ndim == 2:
            return self.patch_bloch * phase[:, None]
        return self.patch_bloch * phase

    def scaled(self, c: complex) -> "BlochField":
        return BlochField(self.x, self.bloch * c, self.k, self.envelope, self.patch_bloch * c)


@dataclass(frozen=True)
class MaterialData:
    """Boundary patches and bulk material for the coupling integral.

    Permittivities are relative; the vacuum permittivity cancels between the
    surface and energy integrals. Normal D is given as eps_r * E_normal.
    ``eps_bulk`` may be a scalar or one value per optical grid sample.
    """

    patch_x: np.ndarray
    dA: np.ndarray
    eps_in: np.ndarray
    eps_out: np.ndarray
    rho: float
    eps_bulk: object = 1.0
    mode_area: float = 1.0
    hbar: float = HBAR

    def __post_init__(self):
        arrs = {}
        for name in ("patch_x", "dA", "eps_in", "eps_out"):
            arrs[name] = np.atleast_1d(np.asarray(getattr(self, name), dtype=float))
            object.__setattr__(self, name, arrs[name])
        n = arrs["patch_x"].size
        if any(a.size != n for a in arrs.values()):
            raise ValueError("patch arrays must all have the same length")
        if np.any(arrs["dA"] <= 0):
            raise ValueError("patch areas dA must be positive")
        if np.any(arrs["eps_in"] <= 0) or np.any(arrs["eps_out"] <= 0):
            raise ValueError("permittivities must be positive")
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if not self.mode_area > 0:
            raise ValueError("mode_area must be positive")

    @property
    def delta_eps(self) -> np.ndarray:
        return self.eps_in - self.eps_out

    @property
    def delta_inv_eps(self) -> np.ndarray:
        return 1.0 / self.eps_in - 1.0 / self.eps_out


@dataclass(frozen=True)
class CavityAssembly:
    n_defect: int
    cell: UnitCellGeometry
    optical: tuple
    mechanical: tuple
    material: MaterialData

    def __post_init__(self):
        if self.n_defect < 1:
            raise ValueError("need at least one defect cell")

    @property
    def length(self) -> float:
        return self.n_defect * self.cell.a


@dataclass(frozen=True)
class CouplingResult:
    value: complex  # rad/s
    surface_integral: complex
    mechanical_norm: float
    optical_energy: float

    @property
    def magnitude(self) -> float:
        return abs(self.value)

    @property
    def signed(self) -> float:
        return float(self.value.real)


def _as_tuple(fields) -> tuple:
    if isinstance(fields, BlochField):
        return (fields,)
    fields = tuple(fields)
    if not fields:
        raise ValueError("need at least one field component")
    return fields


def total_samples(fields) -> np.ndarray:
    fields = _as_tuple(fields)
    x0 = fields[0].x
    for f in fields[1:]:
        if f.x.shape != x0.shape or not np.allclose(f.x, x0, rtol=0, atol=1e-12 * abs(x0[-1] - x0[0])):
            raise ValueError("field components must share a grid")
    return sum(f.samples() for f in fields)


def _envelope(kind: str, x: np.ndarray, L: float) -> np.ndarray:
    if kind == "uniform":
        return np.ones_like(x)
    if kind == "cosine":
        return np.clip(np.sin(math.pi * x / L), 0.0, None)
    if kind == "gaussian":
        sigma = L / 6.0
        return np.exp(-0.5 * ((x - 0.5 * L) / sigma) ** 2)
    raise ValueError(f"unsupported envelope {kind!r}; choose from {ENVELOPES}")


def synth_standing_wave(
    k: float,
    envelope_kind: str,
    n_cells: int,
    a: float,
    samples_per_cell: int = 32,
    bloch=None,
    patch_x=None,
    patch_bloch=None,
):
    """Forward/backward pair with k_f = +k, k_b = -k and a shared envelope.

    ``bloch`` is an optional callable giving the periodic Bloch function on
    the grid (default 1). The backward component uses its complex conjugate,
    as time reversal requires. ``patch_bloch`` likewise applies to both
    components (conjugated for the backward one).
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    if n_cells < 1:
        raise ValueError("need at least one cell")
    L = n_cells * a
    x = np.linspace(0.0, L, n_cells * samples_per_cell + 1)
    env = _envelope(envelope_kind, x, L)
    b = np.ones_like(x, dtype=complex) if bloch is None else np.asarray(bloch(x), dtype=complex)
    pb = np.zeros(0, complex) if patch_bloch is None else np.asarray(patch_bloch, dtype=complex)
    fwd = BlochField(x, b, k, env, pb)
    bwd = BlochField(x, np.conj(b), -k, env, np.conj(pb))
    return fwd, bwd


def spatial_spectrum(fields, pad_factor: int = 8, a: float | None = None) -> Spectrum:
    """Normalised |FFT| of the total field over wavevector (rad/m).

    Zero-padded to ``pad_factor`` times the sample count with a flat window.
    When ``a`` is given, ``meta["k_over_pi_a"]`` holds the axis in units of pi/a.
    """
    fields = _as_tuple(fields)
    x = fields[0].x
    if x.size < 8:
        raise ValueError("need at least 8 samples for a spatial spectrum")
    if not is_uniform(x):
        raise ValueError("spatial spectrum requires a uniform grid")
    if pad_factor < 1:
        raise ValueError("pad_factor must be >= 1")
    y = total_samples(fields)
    n_pad = int(pad_factor) * x.size
    dx = float(x[1] - x[0])
    spec = np.abs(np.fft.fftshift(np.fft.fft(y, n_pad)))
    k = np.fft.fftshift(np.fft.fftfreq(n_pad, dx)) * TWO_PI
    peak = spec.max()
    if peak > 0:
        spec = spec / peak
    meta = {"bin_rad_per_m": TWO_PI / (n_pad * dx)}
    if a is not None:
        meta["k_over_pi_a"] = k * a / math.pi
    return Spectrum(k, spec, axis="wavevector", meta=meta)


def peak_wavevector(spec: Spectrum, positive: bool = True) -> float:
    """Location of the largest peak; restricted to k > 0 by default."""
    k, v = spec.freq, np.asarray(spec.values, float)
    if positive:
        sel = k > 0
        k, v = k[sel], v[sel]
    return float(k[np.argmax(v)])


def peak_width(spec: Spectrum, positive: bool = True) -> float:
    """Full width at half maximum of the dominant peak, counted in whole bins."""
    k, v = spec.freq, np.asarray(spec.values, float)
    if positive:
        sel = k > 0
        k, v = k[sel], v[sel]
    i = int(np.argmax(v))
    half = 0.5 * v[i]
    lo = i
    while lo > 0 and v[lo - 1] >= half:
        lo -= 1
    hi = i
    while hi < v.size - 1 and v[hi + 1] >= half:
        hi += 1
    return float(k[hi] - k[lo]) + float(k[1] - k[0])


def moving_boundary_g0(
    u_n,
    e_par2,
    d_perp2,
    eps_in,
    eps_out,
    dA,
    mech_norm2: float,
    optical_energy: float,
    omega_o: float,
    omega_m: float,
    hbar: float = HBAR,
) -> CouplingResult:
    """Coupling rate from already-evaluated patch values and volume integrals.

    ``mech_norm2`` is the integral of rho |u|^2 and ``optical_energy`` the
    integral of eps_r |E|^2, both over the mode volume.
    """
    if not mech_norm2 > 0:
        raise ZeroDivisionError("mechanical mode has zero norm")
    if not optical_energy > 0:
        raise ZeroDivisionError("optical mode has zero energy")
    if not (omega_m > 0 and omega_o > 0):
        raise ValueError("omega_o and omega_m must be positive")
    eps_in = np.asarray(eps_in, float)
    eps_out = np.asarray(eps_out, float)
    d_eps = eps_in - eps_out
    d_inv = 1.0 / eps_in - 1.0 / eps_out
    integrand = np.asarray(u_n) * (d_eps * np.asarray(e_par2, float) - d_inv * np.asarray(d_perp2, float))
    surface = complex(np.sum(integrand * np.asarray(dA, float)))
    mech_norm = math.sqrt(mech_norm2)
    g0 = math.sqrt(hbar / (2.0 * omega_m)) * (omega_o / 2.0) * surface / (mech_norm * optical_energy)
    return CouplingResult(complex(g0), surface, mech_norm, float(optical_energy))


def mechanical_norm2(mechanical, m: MaterialData) -> float:
    u = total_samples(mechanical)
    x = _as_tuple(mechanical)[0].x
    return float(m.rho * m.mode_area * trapezoid(np.abs(u) ** 2, x))


def optical_energy(optical, m: MaterialData) -> float:
    E = total_samples(optical)
    x = _as_tuple(optical)[0].x
    eps = np.broadcast_to(np.asarray(m.eps_bulk, float), x.shape)
    return float(m.mode_area * trapezoid(eps * np.abs(E) ** 2, x))


def g0_moving_boundary(optical, mechanical, m: MaterialData, omega_o: float, omega_m: float) -> CouplingResult:
    """Zero-point moving-boundary coupling of discretised standing-wave fields.

    The result is complex in general (a global phase on u carries through);
    ``.magnitude`` is the rate and ``.signed`` its real part.
    """
    optical = _as_tuple(optical)
    mechanical = _as_tuple(mechanical)
    if optical[0].x.shape != mechanical[0].x.shape or not np.allclose(optical[0].x, mechanical[0].x):
        raise ValueError("optical and mechanical fields must share a grid")
    n_patch = m.patch_x.size
    for f in optical:
        if f.patch_bloch.shape != (n_patch, 2):
            raise ValueError(f"optical patch data must have shape ({n_patch}, 2)")
    for f in mechanical:
        if f.patch_bloch.shape != (n_patch,):
            raise ValueError(f"mechanical patch data must have shape ({n_patch},)")
    opt_p = sum(f.at_patches(m.patch_x) for f in optical)
    u_n = sum(f.at_patches(m.patch_x) for f in mechanical)
    return moving_boundary_g0(
        u_n,
        np.abs(opt_p[:, 0]) ** 2,
        np.abs(opt_p[:, 1]) ** 2,
        m.eps_in,
        m.eps_out,
        m.dA,
        mechanical_norm2(mechanical, m),
        optical_energy(optical, m),
        omega_o,
        omega_m,
        m.hbar,
    )


def g0_cavity_scaling(g0_uc: float, n_cells: int) -> float:
    """Upper-bound cavity coupling g0_uc / sqrt(N) from a unit-cell rate.

    Assumes the cavity fields are N copies of the unit-cell fields; imperfect
    optical/mechanical overlap in a real cavity only lowers the value.
    """
    if n_cells < 1:
        raise ValueError("N must be >= 1")
    if not g0_uc > 0:
        raise ValueError("g0_uc must be positive")
    return g0_uc / math.sqrt(n_cells)


def hole_edge_patches(n_cells: int, cell: UnitCellGeometry, eps_solid: float, eps_hole: float):
    """Patch positions, normals and permittivities at every segment boundary.

    Each internal edge of the fill profile becomes one patch whose outward
    normal points from the higher-fill side to the lower-fill side. Returns
    ``(x, normal_sign, eps_in, eps_out, dA)``.
    """
    edges = cell.edges[1:-1]
    fills = cell.fills
    xs, signs, ein, eout = [], [], [], []
    for j in range(n_cells):
        for i, xe in enumerate(edges):
            f_left, f_right = fills[i], fills[i + 1]
            if f_left == f_right:
                continue
            e_left = eps_hole + f_left * (eps_solid - eps_hole)
            e_right = eps_hole + f_right * (eps_solid - eps_hole)
            xs.append(j * cell.a + xe)
            if f_left > f_right:
                signs.append(1.0)
                ein.append(e_left)
                eout.append(e_right)
            else:
                signs.append(-1.0)
                ein.append(e_right)
                eout.append(e_left)
    dA = np.full(len(xs), cell.w * cell.thickness)
    return np.array(xs), np.array(signs), np.array(ein), np.array(eout), dA


def synth_cavity(
    n_cells: int,
    cell: UnitCellGeometry,
    k_o: float,
    k_m: float,
    envelope_kind: str = "cosine",
    samples_per_cell: int = 32,
    eps_solid: float = 12.1,
    eps_hole: float = 1.0,
    rho: float = 2329.0,
    optical_phase: float = -math.pi / 4,
    optical_bloch=None,
    mechanical_bloch=None,
) -> CavityAssembly:
    """Synthetic standing-wave cavity with patches on every fill edge.

    Optics is a transverse field, so it is tangential on the x-normal hole
    walls (D normal = 0); mechanics is longitudinal, u.n = +/- u_x. The Bloch
    callables default to constants; the default optical Bloch constant
    exp(i optical_phase) shifts the standing-wave pattern to 2 cos(k_o x + phase).
    With the default phase and k_m = 2 k_o the intensity antinodes sit on the
    hole centres of a symmetric cell, where a pinch-like u_x couples.
    """
    ob = optical_bloch or (lambda x: np.full(np.shape(x), np.exp(1j * optical_phase)))
    mb = mechanical_bloch or (lambda x: np.ones_like(x, dtype=complex))
    px, sgn, ein, eout, dA = hole_edge_patches(n_cells, cell, eps_solid, eps_hole)
    opt_patch = np.stack([ob(px), np.zeros(px.size, complex)], axis=1)
    mech_patch = sgn * mb(px)
    optical = synth_standing_wave(k_o, envelope_kind, n_cells, cell.a, samples_per_cell, ob, px, opt_patch)
    mechanical = synth_standing_wave(k_m, envelope_kind, n_cells, cell.a, samples_per_cell, mb, px, mech_patch)
    x = optical[0].x
    eps_bulk = eps_hole + cell.fill_at(x) * (eps_solid - eps_hole)
    material = MaterialData(px, dA, ein, eout, rho, eps_bulk=eps_bulk, mode_area=cell.w * cell.thickness)
    return CavityAssembly(n_cells, cell, optical, mechanical, material)


def field_to_dict(f: BlochField) -> dict:
    d = {
        "x_m": f.x.tolist(),
        "re": f.bloch.real.tolist(),
        "im": f.bloch.imag.tolist(),
        "envelope": f.envelope.tolist(),
        "k_rad_per_m": f.k,
    }
    return d


def field_from_dict(d: dict) -> BlochField:
    x = np.asarray(d["x_m"], float)
    re = np.asarray(d["re"], float)
    im = np.asarray(d.get("im", np.zeros_like(re)), float)
    env = np.asarray(d.get("envelope", np.ones_like(re)), float)
    return BlochField(x, re + 1j * im, float(d.get("k_rad_per_m", 0.0)), env)


def g0_from_document(doc: dict) -> CouplingResult:
    """Evaluate g0 from a fields JSON document with evaluated patch records.

    Patch records carry total-field values ``uDotN``, ``Epar2``, ``Dperp2``
    plus ``epsIn``, ``epsOut`` and ``dA``. Volume integrals come from the
    ``optical`` and ``mechanical`` field lists.
    """
    optical = tuple(field_from_dict(f) for f in _listify(doc["optical"]))
    mechanical = tuple(field_from_dict(f) for f in _listify(doc["mechanical"]))
    patches = doc["patches"]
    if not patches:
        raise ValueError("fields document has no boundary patches")
    col = lambda key: np.array([p[key] for p in patches], dtype=float)  # noqa: E731
    area = float(doc.get("mode_area_m2", 1.0))
    rho = float(doc.get("rho_kg_per_m3", 2329.0))
    x = optical[0].x
    eps = np.broadcast_to(np.asarray(doc.get("eps_bulk", 1.0), float), x.shape)
    mech2 = rho * area * float(trapezoid(np.abs(total_samples(mechanical)) ** 2, mechanical[0].x))
    energy = area * float(trapezoid(eps * np.abs(total_samples(optical)) ** 2, x))
    return moving_boundary_g0(
        col("uDotN"),
        col("Epar2"),
        col("Dperp2"),
        col("epsIn"),
        col("epsOut"),
        col("dA"),
        mech2,
        energy,
        TWO_PI * float(doc["omega_o_hz"]),
        TWO_PI * float(doc["omega_m_hz"]),
    )


def cavity_to_document(cav: CavityAssembly, omega_o_hz: float, omega_m_hz: float) -> dict:
    """Fields JSON with patch values evaluated from the Bloch data."""
    m = cav.material
    opt_p = sum(f.at_patches(m.patch_x) for f in cav.optical)
    u_n = sum(f.at_patches(m.patch_x) for f in cav.mechanical)
    patches = [
        {
            "x_m": float(m.patch_x[i]),
            "uDotN": float(u_n[i].real),
            "Epar2": float(abs(opt_p[i, 0]) ** 2),
            "Dperp2": float(abs(opt_p[i, 1]) ** 2),
            "epsIn": float(m.eps_in[i]),
            "epsOut": float(m.eps_out[i]),
            "dA": float(m.dA[i]),
        }
        for i in range(m.patch_x.size)
    ]
    eps = np.broadcast_to(np.asarray(m.eps_bulk, float), cav.optical[0].x.shape)
    return {
        "omega_o_hz": omega_o_hz,
        "omega_m_hz": omega_m_hz,
        "a_m": cav.cell.a,
        "rho_kg_per_m3": m.rho,
        "mode_area_m2": m.mode_area,
        "eps_bulk": eps.tolist(),
        "optical": [field_to_dict(f) for f in cav.optical],
        "mechanical": [field_to_dict(f) for f in cav.mechanical],
        "patches": patches,
    }


def _listify(obj) -> list:
    return obj if isinstance(obj, list) else [obj]
