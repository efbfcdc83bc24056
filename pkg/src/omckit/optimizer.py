"""Nelder-Mead simplex search and a surrogate unit-cell design objective.

The simplex follows the standard ordering: reflect, expand, outside or
inside contraction, shrink, with coefficients (1, 2, 0.5, 0.5) and ties
broken by insertion order. Bounds are enforced by projecting every trial
point. A NaN objective is replaced by a large penalty so the vertex loses
every comparison.
"""

from __future__ import annotations

import io
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import bands, fields, phasematch, window
from .constants import C0, TWO_PI
from .geometry import UnitCellGeometry

log = logging.getLogger(__name__)

RHO, CHI, PSI, SIGMA = 1.0, 2.0, 0.5, 0.5


@dataclass(frozen=True)
class NelderMeadOptions:
    max_iter: int = 2000
    tol_f: float = 1e-14  # value spread across the simplex
    tol_x: float = 1e-10  # simplex diameter
    lower: tuple | None = None
    upper: tuple | None = None
    initial_step: tuple | None = None
    penalty: float = 1e100  # substitute for NaN objective values


@dataclass(frozen=True)
class SimplexState:
    iteration: int
    n_eval: int
    vertices: np.ndarray  # (n+1, n), best first
    values: np.ndarray  # (n+1,)
    step: str

    @property
    def diameter(self) -> float:
        return float(np.max(np.linalg.norm(self.vertices - self.vertices[0], axis=1)))

    @property
    def spread(self) -> float:
        return float(self.values[-1] - self.values[0])

    @property
    def best_x(self) -> np.ndarray:
        return self.vertices[0]

    @property
    def best_f(self) -> float:
        return float(self.values[0])


@dataclass
class NelderMeadResult:
    x: np.ndarray
    fun: float
    n_iter: int
    n_eval: int
    converged: bool
    reason: str
    trace: list = field(default_factory=list)
    rejected: int = 0  # NaN evaluations replaced by the penalty

    def trace_csv(self) -> str:
        return trace_to_csv(self.trace)


def trace_to_csv(trace) -> str:
    """One row per iteration: best vertex, its value and the convergence metrics."""
    buf = io.StringIO()
    n = trace[0].vertices.shape[1] if trace else 0
    buf.write("iteration,n_eval,step,best_f,spread,diameter," + ",".join(f"x{i}" for i in range(n)) + "\n")
    for s in trace:
        row = [str(s.iteration), str(s.n_eval), s.step, repr(s.best_f), repr(s.spread), repr(s.diameter)]
        row += [repr(float(v)) for v in s.best_x]
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def _initial_steps(x0, lower, upper, given):
    if given is not None:
        return np.asarray(given, float) * np.ones_like(x0)
    steps = 0.05 * np.maximum(np.abs(x0), 1.0)
    if lower is not None and upper is not None:
        rng = upper - lower
        finite = np.isfinite(rng)
        steps = np.where(finite, 0.05 * rng, steps)
    return steps


def nelder_mead(f, x0, options: NelderMeadOptions | None = None) -> NelderMeadResult:
    """Minimise ``f`` from ``x0``.

    Stops when the simplex diameter drops below ``tol_x``, or when the value
    spread drops below ``tol_f`` and the centroid agrees with the vertices to
    the same tolerance (so a simplex straddling a minimum is not mistaken for
    a flat one), or after ``max_iter`` iterations.
    """
    opt = options or NelderMeadOptions()
    x0 = np.atleast_1d(np.asarray(x0, float))
    n = x0.size
    lower = None if opt.lower is None else np.asarray(opt.lower, float) * np.ones(n)
    upper = None if opt.upper is None else np.asarray(opt.upper, float) * np.ones(n)
    if lower is not None and upper is not None and np.any(lower > upper):
        raise ValueError("lower bound exceeds upper bound")

    def project(x):
        if lower is not None:
            x = np.maximum(x, lower)
        if upper is not None:
            x = np.minimum(x, upper)
        return x

    counter = {"n": 0, "rejected": 0}

    def evaluate(x):
        counter["n"] += 1
        v = float(f(x))
        if math.isnan(v):
            counter["rejected"] += 1
            log.info("objective returned NaN at %s; vertex penalised", np.array2string(x))
            return opt.penalty
        return v

    x0 = project(x0)
    f0 = evaluate(x0)
    if not math.isfinite(f0) or f0 >= opt.penalty:
        raise ValueError("objective is not finite at the initial point")
    steps = _initial_steps(x0, lower, upper, opt.initial_step)
    verts = [x0]
    for i in range(n):
        v = x0.copy()
        v[i] += steps[i]
        if upper is not None and v[i] > upper[i]:
            v[i] = x0[i] - steps[i]
        verts.append(project(v))
    verts = np.array(verts)
    vals = np.array([f0] + [evaluate(v) for v in verts[1:]])
    if np.linalg.matrix_rank(verts[1:] - verts[0]) < n:
        raise ValueError("initial simplex is degenerate; adjust initial_step or bounds")

    def ordered(verts, vals):
        idx = np.argsort(vals, kind="stable")
        return verts[idx], vals[idx]

    verts, vals = ordered(verts, vals)
    trace = [SimplexState(0, counter["n"], verts.copy(), vals.copy(), "init")]
    reason, converged, it = "max_iter", False, 0

    def flat(verts, vals):
        if vals[-1] - vals[0] > opt.tol_f:
            return False
        fc = evaluate(project(verts.mean(axis=0)))
        return abs(fc - vals[0]) <= opt.tol_f

    while True:
        st = trace[-1]
        if st.diameter <= opt.tol_x:
            reason, converged = "tol_x", True
            break
        if flat(verts, vals):
            reason, converged = "tol_f", True
            break
        if it >= opt.max_iter:
            break
        it += 1
        centroid = verts[:-1].mean(axis=0)
        xr = project(centroid + RHO * (centroid - verts[-1]))
        fr = evaluate(xr)
        step = None
        if vals[0] <= fr < vals[-2]:
            new, fnew, step = xr, fr, "reflect"
        elif fr < vals[0]:
            xe = project(centroid + CHI * (xr - centroid))
            fe = evaluate(xe)
            new, fnew, step = (xe, fe, "expand") if fe < fr else (xr, fr, "reflect")
        elif fr < vals[-1]:
            xc = project(centroid + PSI * (xr - centroid))
            fc = evaluate(xc)
            if fc <= fr:
                new, fnew, step = xc, fc, "contract_out"
        else:
            xcc = project(centroid + PSI * (verts[-1] - centroid))
            fcc = evaluate(xcc)
            if fcc < vals[-1]:
                new, fnew, step = xcc, fcc, "contract_in"
        if step is None:
            step = "shrink"
            for i in range(1, n + 1):
                verts[i] = project(verts[0] + SIGMA * (verts[i] - verts[0]))
                vals[i] = evaluate(verts[i])
        else:
            # insert after any vertices with equal value (Lagarias tie rule)
            verts, vals = verts[:-1], vals[:-1]
            pos = int(np.searchsorted(vals, fnew, side="right"))
            verts = np.insert(verts, pos, new, axis=0)
            vals = np.insert(vals, pos, fnew)
        verts, vals = ordered(verts, vals)
        trace.append(SimplexState(it, counter["n"], verts.copy(), vals.copy(), step))

    return NelderMeadResult(verts[0].copy(), float(vals[0]), it, counter["n"], converged, reason, trace, counter["rejected"])


# --------------------------------------------------------------------------- design objective

PARAMETERS = ("a", "w", "hole_x", "hole_y")


def cell_parameters(cell: UnitCellGeometry) -> dict:
    """Recover (a, w, hole_x, hole_y) from a three-segment elliptic-hole cell."""
    if len(cell.segments) != 3:
        raise ValueError("design parameters need a three-segment elliptic-hole cell")
    hole_x, fill = cell.segments[1]
    return {"a": cell.a, "w": cell.w, "hole_x": hole_x, "hole_y": (1.0 - fill) * 4.0 * cell.w / math.pi}


def build_cell(params: dict, thickness: float) -> UnitCellGeometry:
    return UnitCellGeometry.elliptic_hole(params["a"], params["w"], thickness, params["hole_x"], params["hole_y"])


def synthetic_coupling(cell: UnitCellGeometry, n_cells: int, omega_o: float, omega_m: float) -> float:
    """g0 (rad/s) of a synthetic quarter-zone / zone-edge cavity built on ``cell``."""
    cav = fields.synth_cavity(n_cells, cell, math.pi / (2 * cell.a), math.pi / cell.a)
    return fields.g0_moving_boundary(cav.optical, cav.mechanical, cav.material, omega_o, omega_m).magnitude


@dataclass(frozen=True)
class DesignObjective:
    """Weighted surrogate figure of merit (minimised).

    coupling: -g0 / g0_ref, from ``coupling(cell, omega_o, omega_m)`` or the
        synthetic cavity surrogate.
    window:   hinge on the SAW margin (GHz below ``margin_hz``) plus a hinge on
        optical guiding (index units times 10).
    phase:    1 - |sinc| of the counter-propagating mismatch k_m - 2 k_o over
        the cavity length, with k_m at the zone edge.
    """

    bounds: dict = field(
        default_factory=lambda: {
            "a": (120e-9, 370e-9),
            "w": (450e-9, 900e-9),
            "hole_x": (40e-9, 200e-9),
            "hole_y": (150e-9, 500e-9),
        }
    )
    params: tuple = PARAMETERS
    w_coupling: float = 1.0
    w_window: float = 1.0
    w_phase: float = 1.0
    coupling: object = None
    g0_ref: float = TWO_PI * 0.5e6
    margin_hz: float = 1e9
    n_cells: int = 31
    lambda0: float = 1550e-9
    substrate: window.SubstrateModel = field(default_factory=window.SubstrateModel)
    optical: bands.OpticalMaterial = field(default_factory=bands.OpticalMaterial)
    mechanical: bands.MechanicalMaterial = field(default_factory=bands.MechanicalMaterial)

    def __post_init__(self):
        weights = (self.w_coupling, self.w_window, self.w_phase)
        if any(w < 0 for w in weights):
            raise ValueError("weights must be non-negative")
        if not any(w > 0 for w in weights):
            raise ValueError("at least one objective term must be active")
        unknown = [p for p in self.params if p not in PARAMETERS]
        if unknown:
            raise ValueError(f"unknown design parameters {unknown}")
        for p in self.params:
            lo, hi = self.bounds[p]
            if not lo < hi:
                raise ValueError(f"empty bounds for {p}")

    @classmethod
    def from_dict(cls, d: dict) -> "DesignObjective":
        kw = {}
        if "bounds_m" in d:
            kw["bounds"] = {k: tuple(v) for k, v in d["bounds_m"].items()}
        if "params" in d:
            kw["params"] = tuple(d["params"])
        for key in ("w_coupling", "w_window", "w_phase", "margin_hz", "lambda0_m", "n_cells"):
            if key in d:
                kw["lambda0" if key == "lambda0_m" else key] = d[key]
        if "g0_ref_hz" in d:
            kw["g0_ref"] = TWO_PI * float(d["g0_ref_hz"])
        return cls(**kw)

    def terms(self, cell: UnitCellGeometry) -> dict:
        """Per-term breakdown (unweighted) plus the physical quantities behind it."""
        n_eff, _ = bands.effective_index(cell, self.optical, self.lambda0)
        f_m = float(bands.mechanical_bands(cell, self.mechanical, [math.pi / cell.a], n_bands=1, n_harmonics=32).freqs[0, 0])
        omega_m = TWO_PI * f_m
        op = window.OperatingPoint(n_eff, cell.a, self.lambda0)
        verdict = window.window_check(op, self.substrate, omega_m)
        win = max(0.0, self.margin_hz - verdict.margin_hz) / 1e9 + 10.0 * max(0.0, self.substrate.n_cladding - n_eff)
        k_o = window.optical_wavevector(op)
        dk = math.pi / cell.a - 2.0 * k_o
        phase = 1.0 - float(phasematch.suppression_factor(dk, self.n_cells * cell.a))
        out = {
            "n_eff": n_eff,
            "f_m_hz": f_m,
            "margin_hz": verdict.margin_hz,
            "feasible": verdict.passes,
            "window": win,
            "phase": phase,
            "coupling": 0.0,
            "g0_hz": None,
        }
        if self.w_coupling > 0:
            omega_o = TWO_PI * C0 / self.lambda0
            if self.coupling is None:
                g0 = synthetic_coupling(cell, self.n_cells, omega_o, omega_m)
            else:
                g0 = float(self.coupling(cell, omega_o, omega_m))
            out["coupling"] = -g0 / self.g0_ref
            out["g0_hz"] = g0 / TWO_PI
        out["total"] = self.w_coupling * out["coupling"] + self.w_window * win + self.w_phase * phase
        return out

    def lower(self):
        return np.array([self.bounds[p][0] for p in self.params])

    def upper(self):
        return np.array([self.bounds[p][1] for p in self.params])


@dataclass
class DesignResult:
    cell: UnitCellGeometry
    value: float
    report: dict
    feasible: bool
    best_infeasible: bool
    optimizer: NelderMeadResult

    def to_dict(self) -> dict:
        rep = {k: (bool(v) if isinstance(v, (bool, np.bool_)) else v) for k, v in self.report.items()}
        return {
            "cell": self.cell.to_dict(),
            "parameters_m": cell_parameters(self.cell),
            "value": self.value,
            "feasible": self.feasible,
            "best_infeasible": self.best_infeasible,
            "terms": rep,
            "iterations": self.optimizer.n_iter,
            "evaluations": self.optimizer.n_eval,
            "converged": self.optimizer.converged,
            "reason": self.optimizer.reason,
        }


def optimize_cell(start: UnitCellGeometry, obj: DesignObjective, options: NelderMeadOptions | None = None) -> DesignResult:
    """Run Nelder-Mead over the objective's parameters in bound-normalised coordinates."""
    base = cell_parameters(start)
    lo, hi = obj.lower(), obj.upper()
    x_start = np.array([base[p] for p in obj.params])
    if np.any(x_start < lo) or np.any(x_start > hi):
        raise ValueError("start geometry lies outside the objective bounds")
    span = hi - lo

    def to_cell(u):
        params = dict(base)
        params.update(zip(obj.params, lo + u * span))
        return build_cell(params, start.thickness)

    def f(u):
        try:
            return obj.terms(to_cell(u))["total"]
        except (ValueError, bands.BandSolverError):
            return math.nan

    opt = options or NelderMeadOptions(max_iter=200, tol_f=1e-9, tol_x=1e-6)
    opt = NelderMeadOptions(opt.max_iter, opt.tol_f, opt.tol_x, (0.0,) * len(lo), (1.0,) * len(lo), opt.initial_step, opt.penalty)
    res = nelder_mead(f, (x_start - lo) / span, opt)
    cell = to_cell(res.x)
    report = obj.terms(cell)
    feasible = bool(report["feasible"])
    return DesignResult(cell, float(res.fun), report, feasible, not feasible, res)
