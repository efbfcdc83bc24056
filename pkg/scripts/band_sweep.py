"""Track X-point frequencies while morphing the defect cell into the mirror cell."""

import numpy as np

from omckit import bands
from omckit.geometry import defect_cell, mirror_cell

if __name__ == "__main__":
    r = bands.perturbation_sweep(bands.PerturbationPath(defect_cell(), mirror_cell()), 11)
    print("t,mech_x_hz,opt_x_hz")
    for t, fm, fo in zip(np.linspace(0, 1, 11), r.mechanical_x[:, 0], r.optical_x[:, 0]):
        print(f"{t:.2f},{fm:.6e},{fo:.6e}")
    print(f"# mechanical gap open over {r.mechanical_gap_fraction * 100:.0f}% of the path")
