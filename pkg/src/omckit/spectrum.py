"""Sampled spectra and their CSV representation.

A trace on disk looks like::

    # units: dbm, rbw_hz: 250000, detuning_hz: 5.365e9
    freq_hz,value
    5.30e9,-92.1
    ...

Complex traces (s11 responses) use ``freq_hz,re,im`` columns instead.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field, replace

import numpy as np

UNITS = ("linear", "dbm", "db")


@dataclass(frozen=True)
class Spectrum:
    """A (frequency, value) trace.

    ``freq`` is in Hz for frequency-domain traces and in rad/m for spatial
    spectra (``axis="wavevector"``). Values may be complex.
    """

    freq: np.ndarray
    values: np.ndarray
    units: str = "linear"
    rbw_hz: float | None = None
    detuning_hz: float | None = None
    label: str = ""
    axis: str = "frequency"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        freq = np.asarray(self.freq, dtype=float)
        values = np.asarray(self.values)
        if freq.ndim != 1 or values.shape != freq.shape:
            raise ValueError("freq and values must be 1-D arrays of equal length")
        if freq.size > 1 and not np.all(np.diff(freq) > 0):
            raise ValueError("frequency axis must be strictly increasing")
        if self.units not in UNITS:
            raise ValueError(f"unknown units {self.units!r}, expected one of {UNITS}")
        object.__setattr__(self, "freq", freq)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.freq.size

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)

    def linear(self) -> "Spectrum":
        """Return the trace in linear power units (dB values converted)."""
        if self.units == "linear":
            return self
        if self.is_complex:
            raise ValueError("complex traces cannot be in dB units")
        return replace(self, values=10.0 ** (np.asarray(self.values, float) / 10.0), units="linear")

    def to_db(self) -> "Spectrum":
        if self.units != "linear":
            return self
        with np.errstate(divide="ignore"):
            return replace(self, values=10.0 * np.log10(np.abs(self.values)), units="dbm")


def is_uniform(x, rtol=1e-9) -> bool:
    """True when the samples in ``x`` are equally spaced to relative ``rtol``."""
    x = np.asarray(x, dtype=float)
    if x.size < 3:
        return True
    d = np.diff(x)
    return bool(np.all(np.abs(d - d.mean()) <= rtol * abs(d.mean())))


def _fmt(v) -> str:
    return repr(float(v))


def write_spectrum_csv(spec: Spectrum) -> str:
    """Serialise a spectrum; the return value is the full file text."""
    out = io.StringIO()
    head = [f"units: {spec.units}"]
    if spec.rbw_hz is not None:
        head.append(f"rbw_hz: {_fmt(spec.rbw_hz)}")
    if spec.detuning_hz is not None:
        head.append(f"detuning_hz: {_fmt(spec.detuning_hz)}")
    out.write("# " + ", ".join(head) + "\n")
    if spec.is_complex:
        out.write("freq_hz,re,im\n")
        for f, v in zip(spec.freq, spec.values):
            out.write(f"{_fmt(f)},{_fmt(v.real)},{_fmt(v.imag)}\n")
    else:
        out.write("freq_hz,value\n")
        for f, v in zip(spec.freq, spec.values):
            out.write(f"{_fmt(f)},{_fmt(v)}\n")
    return out.getvalue()


def _parse_header(line: str) -> dict:
    meta = {}
    for part in line.lstrip("#").split(","):
        if ":" not in part:
            continue
        key, val = (s.strip() for s in part.split(":", 1))
        meta[key] = val
    return meta


def read_spectrum_csv(text: str, label: str = "") -> Spectrum:
    """Parse the text produced by :func:`write_spectrum_csv` (or by hand)."""
    meta = {}
    columns = None
    rows = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            meta.update(_parse_header(line))
            continue
        if columns is None and not _is_number(line.split(",")[0]):
            columns = [c.strip() for c in line.split(",")]
            continue
        rows.append([float(v) for v in line.split(",")])
    if not rows:
        raise ValueError("spectrum file contains no data rows")
    data = np.array(rows, dtype=float)
    columns = columns or (["freq_hz", "value"] if data.shape[1] == 2 else ["freq_hz", "re", "im"])
    if columns[:3] == ["freq_hz", "re", "im"]:
        values = data[:, 1] + 1j * data[:, 2]
    elif columns[:2] == ["freq_hz", "value"]:
        values = data[:, 1]
    else:
        raise ValueError(f"unrecognised spectrum columns {columns}")
    units = meta.get("units", "linear").lower()
    return Spectrum(
        freq=data[:, 0],
        values=values,
        units=units,
        rbw_hz=_opt_float(meta.get("rbw_hz")),
        detuning_hz=_opt_float(meta.get("detuning_hz")),
        label=label,
    )


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def _opt_float(s):
    if s is None or s.lower() in ("", "none", "nan"):
        return None
    return float(s)
