"""Phase matching of the six standing-wave coupling terms.

With forward/backward optical and mechanical components the moving-boundary
overlap splits into six terms whose integrands oscillate as exp(i dk x).
Over a cavity of length L each is suppressed by |sin(dk L) / (dk L)|.

Terms (i) and (iv) carry only the mechanical wavevector; they survive for
co-propagating optics (pump and sideband travelling the same way). The four
cross terms (ii), (iii), (v), (vi) carry k_of - k_ob and are the
counter-propagating channel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TERMS = ("i", "ii", "iii", "iv", "v", "vi")
CO_PROPAGATING = ("i", "iv")
COUNTER_PROPAGATING = ("ii", "iii", "v", "vi")
# sign of k_m = +/-(k_of - k_ob) that zeroes each cross term, for k_mf = -k_mb = k_m
SIGN_BRANCH = {"ii": "-", "iii": "+", "v": "+", "vi": "-"}

SERIES_CUTOFF = 1e-8
DEFAULT_THRESHOLD = 0.5


@dataclass(frozen=True)
class WavevectorSet:
    k_of: float
    k_ob: float
    k_mf: float
    k_mb: float
    L: float

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"cavity length must be positive, got {self.L}")

    @classmethod
    def standing(cls, k_o: float, k_m: float, L: float) -> "WavevectorSet":
        """Counter-propagating standing waves, k_of = -k_ob = k_o and k_mf = -k_mb = k_m."""
        return cls(k_o, -k_o, k_m, -k_m, L)

    def swapped(self) -> "WavevectorSet":
        """Relabel forward <-> backward on both optics and mechanics."""
        return WavevectorSet(self.k_ob, self.k_of, self.k_mb, self.k_mf, self.L)


@dataclass(frozen=True)
class TermEntry:
    term: str
    delta_k: float
    phase: float  # delta_k * L
    suppression: float  # |sinc(delta_k L)|
    envelope: float  # min(1, 1/|delta_k L|)
    matched: bool


@dataclass(frozen=True)
class TermReport:
    entries: tuple
    threshold: float

    def __getitem__(self, term: str) -> TermEntry:
        for e in self.entries:
            if e.term == term:
                return e
        raise KeyError(term)

    def matched_terms(self):
        return tuple(e.term for e in self.entries if e.matched)

    def table(self) -> str:
        lines = [f"{'term':>5} {'dk (rad/m)':>14} {'dk*L':>12} {'|sinc|':>10} {'1/|dkL|':>10} matched"]
        for e in self.entries:
            lines.append(
                f"{e.term:>5} {e.delta_k:>14.6e} {e.phase:>12.4f} {e.suppression:>10.3e} "
                f"{e.envelope:>10.3e} {'yes' if e.matched else 'no'}"
            )
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "terms": [
                {
                    "term": e.term,
                    "delta_k_rad_per_m": e.delta_k,
                    "delta_k_L": e.phase,
                    "suppression": e.suppression,
                    "envelope": e.envelope,
                    "matched": e.matched,
                }
                for e in self.entries
            ],
        }


def sinc_abs(x):
    """|sin(x)/x| with the removable singularity handled by its series."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    small = ax < SERIES_CUTOFF
    safe = np.where(small, 1.0, ax)
    out = np.where(small, 1.0 - ax**2 / 6.0, np.abs(np.sin(safe)) / safe)
    return out if out.ndim else float(out)


def suppression_factor(delta_k, L: float):
    """|sin(dk L)/(dk L)| for a term with phase mismatch ``delta_k`` over length ``L``."""
    if not L > 0:
        raise ValueError(f"L must be positive, got {L}")
    return sinc_abs(np.asarray(delta_k, dtype=float) * L)


def envelope_factor(delta_k, L: float):
    """Upper envelope min(1, 1/|dk L|) of the sinc suppression."""
    if not L > 0:
        raise ValueError(f"L must be positive, got {L}")
    x = np.abs(np.asarray(delta_k, dtype=float) * L)
    with np.errstate(divide="ignore"):
        out = np.where(x > 1.0, 1.0 / np.maximum(x, 1.0), 1.0)
    return out if out.ndim else float(out)


def mismatches(w: WavevectorSet) -> dict:
    dk_opt = w.k_of - w.k_ob
    return {
        "i": w.k_mf,
        "ii": w.k_mf + dk_opt,
        "iii": w.k_mf - dk_opt,
        "iv": w.k_mb,
        "v": w.k_mb + dk_opt,
        "vi": w.k_mb - dk_opt,
    }


def term_mismatches(w: WavevectorSet, threshold: float = DEFAULT_THRESHOLD) -> TermReport:
    entries = []
    for term, dk in mismatches(w).items():
        s = suppression_factor(dk, w.L)
        entries.append(
            TermEntry(
                term=term,
                delta_k=dk,
                phase=dk * w.L,
                suppression=s,
                envelope=envelope_factor(dk, w.L),
                matched=s > threshold,
            )
        )
    return TermReport(tuple(entries), threshold)


@dataclass(frozen=True)
class Classification:
    kind: str  # "counter_propagating" | "co_propagating" | "none"
    ambiguous: bool
    dominant: tuple
    branches: tuple  # sign branches of the matched cross terms
    report: TermReport


def classify_interaction(w: WavevectorSet, threshold: float = DEFAULT_THRESHOLD) -> Classification:
    """Decide which interaction channel the wavevectors support.

    When both channels pass the threshold the result is flagged ambiguous and
    ``kind`` names the channel with the larger summed suppression factor.
    """
    if not 0 < threshold < 1:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    rep = term_mismatches(w, threshold)
    matched = rep.matched_terms()
    co = [t for t in matched if t in CO_PROPAGATING]
    counter = [t for t in matched if t in COUNTER_PROPAGATING]
    ambiguous = bool(co and counter)
    if ambiguous:
        s_co = sum(rep[t].suppression for t in co)
        s_counter = sum(rep[t].suppression for t in counter)
        kind = "co_propagating" if s_co > s_counter else "counter_propagating"
    elif counter:
        kind = "counter_propagating"
    elif co:
        kind = "co_propagating"
    else:
        kind = "none"
    branches = tuple(sorted({SIGN_BRANCH[t] for t in counter}))
    return Classification(kind, ambiguous, tuple(matched), branches, rep)


def zone_edge_wavevectors(a: float, n_cells: int) -> WavevectorSet:
    """Quarter-zone optics with zone-edge mechanics: k_o = pi/(2a), k_m = pi/a, L = N a."""
    return WavevectorSet.standing(math.pi / (2 * a), math.pi / a, n_cells * a)
