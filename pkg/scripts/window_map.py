"""Scan the guided-mode window over effective index and lattice period."""

import argparse
import sys

import numpy as np

from omckit import window
from omckit.constants import TWO_PI


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--neff", nargs=2, type=float, default=(1.4, 3.0))
    p.add_argument("--a", nargs=2, type=float, default=(100e-9, 400e-9))
    p.add_argument("--steps", type=int, default=33)
    p.add_argument("--fm", type=float, default=5.4e9, help="mechanical frequency (Hz)")
    args = p.parse_args(argv)
    m = window.window_map(
        np.linspace(*args.neff, args.steps),
        np.linspace(*args.a, args.steps),
        1550e-9,
        window.SubstrateModel(),
        TWO_PI * args.fm,
    )
    sys.stdout.write(m.to_csv())
    print(f"{m.in_window.mean() * 100:.1f}% of the grid is inside the window", file=sys.stderr)


if __name__ == "__main__":
    main()
