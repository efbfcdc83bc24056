"""Unit-cell geometry shared by the band surrogates, fields and optimizer."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class UnitCellGeometry:
    """A periodic cell described by a piecewise fill profile along x.

    ``segments`` is a tuple of ``(length_m, fill)`` pairs laid out left to
    right; ``fill`` is the fraction of the cross-section occupied by the
    device material (1 = solid, 0 = fully etched).
    """

    a: float
    w: float
    thickness: float
    segments: tuple

    def __post_init__(self):
        segs = tuple((float(l), float(f)) for l, f in self.segments)
        object.__setattr__(self, "segments", segs)
        if not self.a > 0:
            raise ValueError(f"period must be positive, got {self.a}")
        if not (self.w > 0 and self.thickness > 0):
            raise ValueError("width and thickness must be positive")
        if len(segs) < 2:
            raise ValueError("fill profile needs at least two segments")
        if any(l < 0 for l, _ in segs):
            raise ValueError("segment lengths must be non-negative")
        if any(not 0.0 <= f <= 1.0 for _, f in segs):
            raise ValueError("fill fractions must lie in [0, 1]")
        total = sum(l for l, _ in segs)
        if abs(total - self.a) > 1e-9 * self.a:
            raise ValueError(f"segment lengths sum to {total}, expected a={self.a}")

    @classmethod
    def elliptic_hole(cls, a, w, thickness, hole_x, hole_y) -> "UnitCellGeometry":
        """Cell with a centred elliptical hole of full axes ``hole_x`` (along the beam) and ``hole_y``.

        Across the hole the mean chord of an ellipse is pi/4 of its height,
        which sets the fill of the middle segment.
        """
        if not 0 <= hole_x < a:
            raise ValueError("hole_x must lie in [0, a)")
        if not 0 <= hole_y <= w:
            raise ValueError("hole_y must lie in [0, w]")
        fill = 1.0 - math.pi * hole_y / (4.0 * w)
        side = 0.5 * (a - hole_x)
        return cls(a, w, thickness, ((side, 1.0), (hole_x, fill), (a - side - hole_x, 1.0)))

    @property
    def fractions(self) -> np.ndarray:
        return np.array([l for l, _ in self.segments]) / self.a

    @property
    def fills(self) -> np.ndarray:
        return np.array([f for _, f in self.segments])

    @property
    def edges(self) -> np.ndarray:
        """Segment boundaries in [0, a], including both ends."""
        return np.concatenate([[0.0], np.cumsum([l for l, _ in self.segments])])

    def fill_at(self, x) -> np.ndarray:
        xm = np.mod(np.asarray(x, dtype=float), self.a)
        idx = np.searchsorted(self.edges[1:-1], xm, side="right")
        return self.fills[idx]

    def scaled(self, s: float) -> "UnitCellGeometry":
        return UnitCellGeometry(
            self.a * s, self.w * s, self.thickness * s, tuple((l * s, f) for l, f in self.segments)
        )

    def with_period(self, a: float) -> "UnitCellGeometry":
        """Same relative profile, new period."""
        return UnitCellGeometry(a, self.w, self.thickness, tuple((fr * a, f) for fr, f in zip(self.fractions, self.fills)))

    def supercell(self, n: int) -> "UnitCellGeometry":
        return UnitCellGeometry(self.a * n, self.w, self.thickness, self.segments * n)

    def interpolate(self, other: "UnitCellGeometry", t: float) -> "UnitCellGeometry":
        """Linear morph toward ``other`` in (a, w, thickness, fractions, fills)."""
        if len(other.segments) != len(self.segments):
            raise ValueError("cells must have the same number of segments to interpolate")
        if not 0.0 <= t <= 1.0:
            raise ValueError("t must lie in [0, 1]")
        if t == 0.0:
            return self
        if t == 1.0:
            return other
        lerp = lambda p, q: (1.0 - t) * p + t * q  # noqa: E731
        a = lerp(self.a, other.a)
        fr = lerp(self.fractions, other.fractions)
        fills = lerp(self.fills, other.fills)
        lengths = fr * a
        lengths[-1] = a - lengths[:-1].sum()
        return UnitCellGeometry(
            a, lerp(self.w, other.w), lerp(self.thickness, other.thickness), tuple(zip(lengths, fills))
        )

    def to_dict(self) -> dict:
        return {
            "a_m": self.a,
            "w_m": self.w,
            "thickness_m": self.thickness,
            "segments": [{"length_m": l, "fill": f} for l, f in self.segments],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "UnitCellGeometry":
        if "hole_x_m" in d:
            return cls.elliptic_hole(d["a_m"], d["w_m"], d["thickness_m"], d["hole_x_m"], d["hole_y_m"])
        segs = tuple((s["length_m"], s["fill"]) for s in d["segments"])
        return cls(d["a_m"], d["w_m"], d["thickness_m"], segs)


def defect_cell() -> UnitCellGeometry:
    """Defect cell near the reported operating point: a = 188 nm, w = 643 nm, 220 nm silicon."""
    return UnitCellGeometry.elliptic_hole(188e-9, 643e-9, 220e-9, 94e-9, 400e-9)


def mirror_cell() -> UnitCellGeometry:
    """Mirror cell at roughly twice the defect period."""
    return UnitCellGeometry.elliptic_hole(375e-9, 643e-9, 220e-9, 187.5e-9, 400e-9)
