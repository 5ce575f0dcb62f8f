"""Classical post-processing of sampled correlation series.

The transform is the plain exponential sum over the sampling grid
t_j = j*dt (j = 1..M), evaluated at the grid frequencies
eta_l = 2*pi*l/(M*dt); no FFT normalization conventions are involved,
and frequencies are reported wrapped into (-nu_c/2, nu_c/2] with
nu_c = 2*pi/dt so that negative eigenvalues land where they belong.

Peak positions are refined off the bin grid from the ratio of the two
neighboring transform values; the first-order correction is accurate as
long as peaks sit a couple of bins apart, so near-degenerate peaks are
flagged instead of refined.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TimeSeries",
    "Spectrum",
    "Peak",
    "dft",
    "refine_peak",
    "find_peaks",
    "peak_report",
    "error_bars",
    "series_to_csv",
    "series_from_csv",
    "spectrum_to_csv",
    "peaks_to_json",
]


@dataclass
class TimeSeries:
    """Complex samples S(t_j) on the uniform grid t_j = j*dt, j = 1..M."""

    dt: float
    values: np.ndarray
    sigma: float | None = None  # per-point standard deviation of each sample

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim != 1 or len(self.values) < 2:
            raise ValueError("need at least two samples")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.sigma is not None and self.sigma < 0:
            raise ValueError("sigma must be non-negative")

    @property
    def n_samples(self) -> int:
        return len(self.values)

    def times(self) -> np.ndarray:
        return self.dt * np.arange(1, self.n_samples + 1)


@dataclass
class Spectrum:
    """Transform values on the frequency grid eta_l = 2*pi*l/(M*dt)."""

    dt: float
    n_samples: int
    values: np.ndarray  # index l = 0..M-1
    peaks: list = field(default_factory=list)

    @property
    def bin_width(self) -> float:
        return 2 * np.pi / (self.n_samples * self.dt)

    def frequency(self, l: int) -> float:
        """Unwrapped grid frequency of bin l."""
        return self.bin_width * (l % self.n_samples)

    def wrapped_frequency(self, l: int) -> float:
        """Grid frequency folded into (-nu_c/2, nu_c/2]."""
        eta = self.frequency(l)
        nu_c = 2 * np.pi / self.dt
        return eta - nu_c if eta > nu_c / 2 else eta

    def wrap(self, value: float) -> float:
        nu_c = 2 * np.pi / self.dt
        out = np.mod(value, nu_c)
        return out - nu_c if out > nu_c / 2 else out


@dataclass
class Peak:
    bin_index: int
    frequency: float          # refined, wrapped
    weight: float             # estimated |gamma|^2
    refined: bool
    err_frequency: float | None = None
    err_amplitude: float | None = None


def dft(series: TimeSeries) -> Spectrum:
    """S~(eta_l) = dt * sum_j S(t_j) exp(i eta_l t_j)."""
    m = series.n_samples
    t = series.times()
    eta = 2 * np.pi * np.arange(m) / (m * series.dt)
    phases = np.exp(1j * np.outer(eta, t))
    vals = series.dt * phases @ series.values
    return Spectrum(series.dt, m, vals)


def refine_peak(spec: Spectrum, l: int,
                denom_rtol: float = 1e-9) -> tuple[float, bool]:
    """Off-grid frequency of the peak seeded at bin l.

    Returns (frequency, refined).  The correction is
    -(2*pi/(M*dt)) * Re[S~(l+1) / (S~(l) - S~(l+1))]; when the
    denominator is tiny the refinement is declined and the wrapped bin
    center is returned with refined = False.
    """
    m = spec.n_samples
    here = spec.values[l % m]
    nxt = spec.values[(l + 1) % m]
    denom = here - nxt
    if abs(denom) < denom_rtol * np.abs(spec.values).max():
        return spec.wrapped_frequency(l), False
    delta = -spec.bin_width * np.real(nxt / denom)
    return spec.wrap(spec.frequency(l) + delta), True


def find_peaks(spec: Spectrum, rel_threshold: float = 0.1,
               min_separation_bins: int = 2) -> list[Peak]:
    """Local maxima of |S~| above rel_threshold * max, refined off-grid.

    Peaks with another peak closer than `min_separation_bins` are kept
    but not refined (the single-peak correction is invalid there).
    """
    mags = np.abs(spec.values)
    floor = rel_threshold * mags.max()
    m = spec.n_samples
    seeds = [l for l in range(m)
             if mags[l] >= floor
             and mags[l] >= mags[(l - 1) % m]
             and mags[l] > mags[(l + 1) % m]]
    peaks = []
    for l in seeds:
        crowded = any(_circdist(l, o, m) < min_separation_bins
                      for o in seeds if o != l)
        if crowded:
            freq, refined = spec.wrapped_frequency(l), False
        else:
            freq, refined = refine_peak(spec, l)
        weight = _weight_estimate(spec, l, freq)
        peaks.append(Peak(l, freq, weight, refined))
    peaks.sort(key=lambda p: p.frequency)
    spec.peaks = peaks
    return peaks


def _circdist(a: int, b: int, m: int) -> int:
    d = abs(a - b) % m
    return min(d, m - d)


def _weight_estimate(spec: Spectrum, l: int, freq: float) -> float:
    """|gamma|^2 from the peak height corrected by the grid window."""
    delta = spec.wrap(spec.frequency(l) - freq)
    m = spec.n_samples
    x = delta * spec.dt / 2
    if abs(x) < 1e-12:
        window = float(m)
    else:
        window = abs(np.sin(m * x) / np.sin(x))
    return float(abs(spec.values[l]) / (spec.dt * window))


def error_bars(series: TimeSeries) -> tuple[float, float]:
    """(E_St, E_eta): transform and frequency error scales.

    With a constant per-sample deviation sigma the 1/M-normalized
    transform bins inherit sigma/sqrt(M); the frequency uncertainty is
    bounded by one grid bin 2*pi/(M*dt).
    """
    if series.sigma is None:
        raise ValueError("series carries no per-point deviation")
    m = series.n_samples
    return series.sigma / np.sqrt(m), 2 * np.pi / (m * series.dt)


def peak_report(spec: Spectrum, series: TimeSeries | None = None) -> list[dict]:
    """JSON-ready peak list with error bars when the series has them."""
    err_amp = err_freq = None
    if series is not None and series.sigma is not None:
        err_amp, err_freq = error_bars(series)
    out = []
    for p in (spec.peaks or find_peaks(spec)):
        out.append({
            "lambda": p.frequency,
            "weight": p.weight,
            "err_freq": err_freq,
            "err_amp": err_amp,
            "refined": p.refined,
        })
    return out


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

def series_to_csv(series: TimeSeries) -> str:
    lines = ["t,re_S,im_S"]
    for t, v in zip(series.times(), series.values):
        lines.append(f"{t:.12e},{v.real:.12e},{v.imag:.12e}")
    return "\n".join(lines) + "\n"


def series_from_csv(text: str, sigma: float | None = None) -> TimeSeries:
    rows = [r for r in text.strip().splitlines() if r and not r.startswith("t,")]
    ts, vals = [], []
    for r in rows:
        t, re, im = (float(x) for x in r.split(","))
        ts.append(t)
        vals.append(complex(re, im))
    ts = np.array(ts)
    dts = np.diff(ts)
    if len(ts) < 2 or np.abs(dts - dts[0]).max() > 1e-9 * dts[0]:
        raise ValueError("time grid is not uniform")
    return TimeSeries(float(dts[0]), np.array(vals), sigma=sigma)


def spectrum_to_csv(spec: Spectrum) -> str:
    lines = ["eta,re_Stilde,im_Stilde"]
    order = sorted(range(spec.n_samples), key=spec.wrapped_frequency)
    for l in order:
        v = spec.values[l]
        lines.append(f"{spec.wrapped_frequency(l):.12e},{v.real:.12e},{v.imag:.12e}")
    return "\n".join(lines) + "\n"


def peaks_to_json(spec: Spectrum, series: TimeSeries | None = None) -> str:
    return json.dumps(peak_report(spec, series), indent=1)
