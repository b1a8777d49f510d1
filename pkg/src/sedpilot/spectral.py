"""Spectral peak extraction for sampled pilot-wave snapshots."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ResolutionError
from .fields import Grid1D, SampledField

MIN_SAMPLES = 16
# peaks must be this many bins apart to count as two distinct lines
MIN_SEPARATION_BINS = 4.0
# second peak below this fraction of the first is treated as leakage
MIN_PEAK_RATIO = 0.1


@dataclass(frozen=True)
class SpectrumPeak:
    wavenumber: float
    power: float
    bin_width: float


def _windowed_spectrum(field: SampledField):
    if field.ndim != 1:
        raise DomainError("spectral analysis needs a 1D field")
    n = field.values.size
    if n < MIN_SAMPLES:
        raise DomainError(f"need at least {MIN_SAMPLES} samples, got {n}")
    y = field.values - field.values.mean()
    w = np.hanning(n)
    spec = np.fft.rfft(w * y)
    h = field.spacing[0]
    k = 2.0 * np.pi * np.fft.rfftfreq(n, d=h)
    return w * y, spec, k, 2.0 * np.pi / (n * h)


def windowed_power(field: SampledField) -> tuple[float, float]:
    """Signal power of the windowed field and the same power summed in k-space.

    Both sides use the one-sided spectrum with the usual doubling of the
    interior bins, so the two numbers agree to rounding (Parseval).
    """
    yw, spec, _, _ = _windowed_spectrum(field)
    n = yw.size
    p = np.abs(spec) ** 2
    weights = np.full(p.size, 2.0)
    weights[0] = 1.0
    if n % 2 == 0:
        weights[-1] = 1.0
    return float(np.sum(yw ** 2)), float(np.sum(weights * p) / n)


def _parabolic_offset(lm, l0, lp):
    denom = lm - 2.0 * l0 + lp
    if denom >= 0.0:
        return 0.0
    return min(0.5, max(-0.5, 0.5 * (lm - lp) / denom))


def dominant_wavenumbers(field: SampledField, count: int = 2) -> list[SpectrumPeak]:
    """The ``count`` strongest spectral lines of a Hann-windowed snapshot.

    Local maxima of the one-sided power spectrum are ranked by power; each
    location is refined by a 3-point parabola through log-power. The DC bin
    never counts as a peak and a constant field returns no peaks.
    """
    if count < 1:
        raise DomainError("count must be positive")
    _, spec, k, dk = _windowed_spectrum(field)
    if np.ptp(field.values) == 0.0:
        return []
    p = np.abs(spec) ** 2
    pmax = p.max()
    if not pmax > 0.0:
        return []
    floor = pmax * 1e-24
    interior = np.arange(1, p.size - 1)
    is_peak = (p[interior] > p[interior - 1]) & (p[interior] >= p[interior + 1]) & (p[interior] > floor)
    idx = interior[is_peak]
    idx = idx[np.argsort(p[idx], kind="stable")[::-1]][:count]
    logp = np.log(np.maximum(p, floor))
    peaks = []
    for i in idx:
        off = _parabolic_offset(logp[i - 1], logp[i], logp[i + 1])
        peaks.append(SpectrumPeak(float(k[i] + off * dk), float(p[i]), float(dk)))
    return peaks


def measure_de_broglie(field: SampledField) -> float:
    """Modulation wavelength 2 pi / k_B from the two Doppler lines.

    k_B is half the separation of the two strongest lines.
    """
    peaks = dominant_wavenumbers(field, 2)
    if not peaks:
        raise ResolutionError("field has no spectral content")
    dk = peaks[0].bin_width
    k_main = peaks[0].wavenumber
    # lines at gamma k_c (1 +- beta) separate by > 4 bins once beta > 2 dk / k
    beta_min = MIN_SEPARATION_BINS * dk / (2.0 * k_main) if k_main > 0 else math.inf
    if len(peaks) < 2 or peaks[1].power < MIN_PEAK_RATIO * peaks[0].power:
        raise ResolutionError(f"fewer than two distinguishable peaks; minimum resolvable beta ~ {beta_min:.3g} "
                              f"for this window")
    k_hi, k_lo = sorted((peaks[0].wavenumber, peaks[1].wavenumber), reverse=True)
    if k_hi - k_lo <= MIN_SEPARATION_BINS * dk:
        beta_min = MIN_SEPARATION_BINS * dk / (k_hi + k_lo)
        raise ResolutionError(f"peaks {k_hi - k_lo:.3g} apart, need > {MIN_SEPARATION_BINS:g} bins "
                              f"({MIN_SEPARATION_BINS * dk:.3g}); minimum resolvable beta ~ {beta_min:.3g}")
    return 2.0 * np.pi / (0.5 * (k_hi - k_lo))


def recommended_grid(params, beat_periods: int = 16, samples_per_carrier: int = 32,
                     slow_periods: int = 16):
    """Grid for :func:`measure_de_broglie`.

    Spans ``beat_periods`` modulation wavelengths, and at least
    ``slow_periods`` wavelengths of the slow Doppler line so that it stays
    clear of the DC bin at large beta. The fastest line gets
    ``samples_per_carrier`` samples per wavelength.
    """
    if not params.k_b > 0:
        raise ResolutionError("no modulation for a particle at rest")
    span = max(beat_periods * params.lambda_b, slow_periods * 2.0 * np.pi / params.k_minus)
    h = 2.0 * np.pi / params.k_plus / samples_per_carrier
    n = int(math.ceil(span / h))
    return Grid1D(0.0, n * h, n + 1)
