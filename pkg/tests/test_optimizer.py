import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from omckit import optimizer as O
from omckit.geometry import UnitCellGeometry, defect_cell

WIDE = {"a": (80e-9, 370e-9), "w": (450e-9, 900e-9), "hole_x": (20e-9, 200e-9), "hole_y": (150e-9, 500e-9)}


def rosenbrock(x):
    return (1 - x[0]) ** 2 + 100 * (x[1] - x[0] ** 2) ** 2


class TestNelderMead:
    def test_quadratic(self):
        r = O.nelder_mead(lambda x: (x[0] - 3.0) ** 2, [0.0])
        assert r.converged
        assert abs(r.x[0] - 3.0) < 1e-6
        assert r.n_iter < 100

    def test_rosenbrock(self):
        r = O.nelder_mead(rosenbrock, [-1.2, 1.0])
        assert r.converged
        assert np.allclose(r.x, [1.0, 1.0], atol=1e-4)

    def test_constant_stops_immediately(self):
        r = O.nelder_mead(lambda x: 4.0, [0.3, -2.0])
        assert r.converged and r.n_iter == 0
        assert "tol_f" in r.reason

    def test_max_iter(self):
        r = O.nelder_mead(rosenbrock, [-1.2, 1.0], O.NelderMeadOptions(max_iter=5))
        assert not r.converged and r.n_iter == 5

    def test_nan_rejected_with_penalty(self):
        f = lambda x: math.nan if x[0] > 0.5 else (x[0] - 0.4) ** 2  # noqa: E731
        r = O.nelder_mead(f, [0.0], O.NelderMeadOptions(initial_step=(0.3,)))
        assert r.rejected > 0
        assert abs(r.x[0] - 0.4) < 1e-5

    def test_non_finite_start(self):
        with pytest.raises(ValueError):
            O.nelder_mead(lambda x: math.inf, [0.0])

    def test_bounds_projection(self):
        opt = O.NelderMeadOptions(lower=(2.0, -1.0), upper=(5.0, 1.0))
        r = O.nelder_mead(lambda x: (x[0] - 0.0) ** 2 + x[1] ** 2, [4.0, 0.5], opt)
        assert r.x[0] == pytest.approx(2.0, abs=1e-8)
        for s in r.trace:
            assert np.all(s.vertices >= [2.0, -1.0]) and np.all(s.vertices <= [5.0, 1.0])

    def test_simplex_shape(self):
        r = O.nelder_mead(rosenbrock, [0.0, 0.0], O.NelderMeadOptions(max_iter=3))
        assert all(s.vertices.shape == (3, 2) and s.values.shape == (3,) for s in r.trace)

    def test_deterministic_trace(self):
        a = O.nelder_mead(rosenbrock, [-1.2, 1.0]).trace_csv()
        b = O.nelder_mead(rosenbrock, [-1.2, 1.0]).trace_csv()
        assert a == b
        assert a.splitlines()[0] == "iteration,n_eval,step,best_f,spread,diameter,x0,x1"

    @settings(max_examples=30, deadline=None)
    @given(
        x0=st.lists(st.floats(-3, 3), min_size=2, max_size=3),
        scale=st.floats(0.1, 10.0),
    )
    def test_best_value_monotone(self, x0, scale):
        f = lambda x: scale * float(np.sum((np.asarray(x) - 0.7) ** 2)) + math.sin(5 * x[0])  # noqa: E731
        r = O.nelder_mead(f, x0, O.NelderMeadOptions(max_iter=150))
        best = [s.best_f for s in r.trace]
        assert all(b2 <= b1 for b1, b2 in zip(best, best[1:]))
        assert r.fun == best[-1]


class TestObjective:
    def test_weights_validated(self):
        with pytest.raises(ValueError):
            O.DesignObjective(w_coupling=-1.0)
        with pytest.raises(ValueError):
            O.DesignObjective(w_coupling=0.0, w_window=0.0, w_phase=0.0)
        with pytest.raises(ValueError):
            O.DesignObjective(params=("a", "depth"))

    def test_parameters_round_trip(self):
        cell = defect_cell()
        again = O.build_cell(O.cell_parameters(cell), cell.thickness)
        assert O.cell_parameters(again) == pytest.approx(O.cell_parameters(cell), rel=1e-12)

    def test_zero_weight_coupling_ignores_fields(self):
        calls = []

        def coupling(cell, wo, wm):
            calls.append(cell)
            return 1e6

        obj0 = O.DesignObjective(w_coupling=0.0, coupling=coupling)
        obj1 = O.DesignObjective(w_coupling=0.0, coupling=lambda *a: 5e9)
        t0, t1 = obj0.terms(defect_cell()), obj1.terms(defect_cell())
        assert not calls
        assert t0["total"] == t1["total"]

    def test_custom_coupling_used(self):
        obj = O.DesignObjective(coupling=lambda cell, wo, wm: 2 * math.pi * 1e6, w_window=0.0, w_phase=0.0)
        assert obj.terms(defect_cell())["coupling"] == pytest.approx(-2.0)

    def test_from_dict(self):
        obj = O.DesignObjective.from_dict({"params": ["a"], "w_phase": 0.0, "margin_hz": 5e8, "g0_ref_hz": 1e6})
        assert obj.params == ("a",) and obj.margin_hz == 5e8
        assert obj.g0_ref == pytest.approx(2 * math.pi * 1e6)


class TestOptimizeCell:
    def test_window_only_enters_window(self):
        obj = O.DesignObjective(bounds=WIDE, w_coupling=0.0, w_phase=0.0)
        start = UnitCellGeometry.elliptic_hole(100e-9, 643e-9, 220e-9, 50e-9, 400e-9)
        assert not obj.terms(start)["feasible"]
        # grid-scan oracle: a feasible period exists inside the bounds
        assert any(obj.terms(start.with_period(a))["feasible"] for a in np.linspace(110e-9, 300e-9, 5))
        r = O.optimize_cell(start, obj)
        assert r.feasible and not r.best_infeasible
        assert r.report["margin_hz"] >= obj.margin_hz

    def test_start_outside_bounds(self):
        obj = O.DesignObjective(w_coupling=0.0)
        with pytest.raises(ValueError, match="outside"):
            O.optimize_cell(UnitCellGeometry.elliptic_hole(100e-9, 643e-9, 220e-9, 50e-9, 400e-9), obj)

    def test_full_objective_near_reference(self):
        obj = O.DesignObjective()
        r = O.optimize_cell(defect_cell(), obj, O.NelderMeadOptions(max_iter=40, tol_f=1e-9, tol_x=1e-6))
        assert r.feasible
        assert r.cell.a < 375e-9
        assert {"coupling", "window", "phase", "total"} <= set(r.report)
        best = [s.best_f for s in r.optimizer.trace]
        assert all(b2 <= b1 for b1, b2 in zip(best, best[1:]))
        assert r.value <= obj.terms(defect_cell())["total"]

    def test_deterministic(self):
        obj = O.DesignObjective(w_coupling=0.0)
        opt = O.NelderMeadOptions(max_iter=15, tol_f=1e-9, tol_x=1e-6)
        a = O.optimize_cell(defect_cell(), obj, opt)
        b = O.optimize_cell(defect_cell(), obj, opt)
        assert a.optimizer.trace_csv() == b.optimizer.trace_csv()
        assert a.cell == b.cell
