"""Push an out-of-window cell into the guided window with Nelder-Mead."""

from omckit import optimizer
from omckit.geometry import UnitCellGeometry

BOUNDS = {"a": (80e-9, 370e-9), "w": (450e-9, 900e-9), "hole_x": (20e-9, 200e-9), "hole_y": (150e-9, 500e-9)}

if __name__ == "__main__":
    start = UnitCellGeometry.elliptic_hole(100e-9, 643e-9, 220e-9, 50e-9, 400e-9)
    obj = optimizer.DesignObjective(bounds=BOUNDS, w_coupling=0.0, w_phase=0.0)
    r = optimizer.optimize_cell(start, obj)
    print(f"feasible: {r.feasible}, iterations: {r.optimizer.n_iter}")
    print(f"a = {r.cell.a * 1e9:.1f} nm, margin = {r.report['margin_hz'] / 1e9:.2f} GHz")
