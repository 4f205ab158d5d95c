"""FFT parallel code-phase search and the two acquisition pipelines:
delay-product + variable-length accumulation, and the non-coherent baseline.
Also the post-detection carrier-frequency estimator."""

import csv
import json
import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from .codes import (CHIP_RATE, gen_ranging_code, make_dam_reference,
                    samples_per_period, upsample_code)
from .dam import delay_multiply
from .vlda import compensate_and_accumulate

DEFAULT_CARRIER_STEP = 500.0
DEFAULT_CARRIER_SPAN = 5000.0


@dataclass(frozen=True)
class DetectionThreshold:
    gamma: float
    target_pfa: float | None = None


@dataclass(frozen=True)
class AcquisitionResult:
    prn: int
    detected: bool
    code_phase: int
    code_doppler: float | None
    carrier_doppler: float | None
    peak: float
    second_peak: float
    ratio: float


class PeakMetrics(NamedTuple):
    peak: float
    second_peak: float
    ratio: float
    code_phase: int


@dataclass(frozen=True)
class CarrierEstimate:
    frequency_hz: float
    significance: float
    reliable: bool


# Peak magnitude must stand this far above the median spectral magnitude for
# a carrier estimate to count as reliable; noise-only data stays below ~30.
CARRIER_SIGNIFICANCE = 50.0

_dam_ref_cache = {}
_nch_code_cache = {}


def _dam_reference(prn, delay_samples, fs):
    key = (prn, delay_samples, fs)
    ref = _dam_ref_cache.get(key)
    if ref is None:
        ref = make_dam_reference(gen_ranging_code(prn), delay_samples, fs)
        _dam_ref_cache[key] = ref
    return ref


def _nch_code_spectrum(prn, fs):
    key = (prn, fs)
    spec = _nch_code_cache.get(key)
    if spec is None:
        up = upsample_code(gen_ranging_code(prn), fs).astype(np.float64)
        spec = np.conj(np.fft.fft(up))
        _nch_code_cache[key] = spec
    return spec


def exclusion_zone(fs, chip_rate=CHIP_RATE):
    """Second-peak exclusion: one chip either side of the main peak."""
    return int(math.ceil(fs / chip_rate))


def circular_correlate(block, reference):
    """Circular cross-correlation via real FFTs: index k holds the
    correlation at code phase k.  ``reference`` may be a DamReference, a real
    sample sequence, or a precomputed rfft spectrum."""
    block = np.asarray(block, dtype=np.float64)
    m = len(block)
    if hasattr(reference, "spectrum"):
        spec = reference.spectrum
    else:
        reference = np.asarray(reference)
        spec = reference if np.iscomplexobj(reference) \
            else np.fft.rfft(reference.astype(np.float64))
    if len(spec) != m // 2 + 1:
        raise ValueError("block and reference lengths differ")
    return np.fft.irfft(np.fft.rfft(block) * np.conj(spec), n=m)


def peak_metrics(correlation, zone):
    """Largest |correlation|, the largest outside +/-zone (circular) of it,
    their ratio, and the peak index.  All-zero input yields ratio nan, which
    never passes a threshold."""
    c = np.abs(np.asarray(correlation))
    m = len(c)
    if m <= 2 * zone:
        raise ValueError("exclusion zone swallows the whole correlation")
    phase = int(np.argmax(c))
    peak = float(c[phase])
    if peak == 0.0:
        return PeakMetrics(0.0, 0.0, math.nan, phase)
    idx = (phase + np.arange(-zone, zone + 1)) % m
    saved = c[idx]
    c[idx] = 0.0
    second = float(c.max())
    c[idx] = saved
    ratio = peak / second if second > 0.0 else math.inf
    return PeakMetrics(peak, second, ratio, phase)


def _gamma(threshold):
    if threshold is None:
        return -math.inf
    if isinstance(threshold, DetectionThreshold):
        return threshold.gamma
    return float(threshold)


def acquire_vlda(signal, prns, dam_config, grid, threshold=None,
                 duration=None, carrier_window=None):
    """Delay-multiply once, then for every candidate code Doppler compensate
    and accumulate, correlate each PRN's delay-product reference, and keep
    the (bin, phase) with the best peak ratio per PRN.

    Reported code phase refers to the input signal (the +delta_n alignment
    shift of the product stream is undone).  With ``carrier_window`` set,
    detected PRNs get a carrier-Doppler estimate over that many seconds.
    """
    if duration is not None:
        need = int(round(duration * signal.fs))
        if len(signal) < need:
            raise ValueError("signal shorter than the requested duration")
        signal = _truncate(signal, need)
    m = samples_per_period(signal.fs)
    dn = dam_config.delay_samples
    zone = exclusion_zone(signal.fs)
    prns = sorted(prns)
    xd = delay_multiply(signal, dn)

    best = {p: (-math.inf, None, None) for p in prns}
    for cand in np.asarray(grid.bins if hasattr(grid, "bins") else grid):
        block = compensate_and_accumulate(xd, float(cand), m=m)
        block_fft = np.fft.rfft(block.samples)
        for prn in prns:
            ref = _dam_reference(prn, dn, signal.fs)
            corr = np.fft.irfft(block_fft * np.conj(ref.spectrum), n=m)
            pm = peak_metrics(corr, zone)
            if not math.isnan(pm.ratio) and pm.ratio > best[prn][0]:
                best[prn] = (pm.ratio, pm, float(cand))

    gamma = _gamma(threshold)
    results = []
    for prn in prns:
        ratio, pm, cand = best[prn]
        if pm is None:
            results.append(AcquisitionResult(prn, False, 0, None, None,
                                             0.0, 0.0, math.nan))
            continue
        detected = ratio > gamma
        carrier = None
        if carrier_window and detected:
            est = estimate_carrier(signal, (pm.code_phase + dn) % m,
                                   gen_ranging_code(prn), carrier_window)
            carrier = est.frequency_hz - signal.f_if if est.reliable else None
        results.append(AcquisitionResult(
            prn=prn, detected=detected, code_phase=(pm.code_phase + dn) % m,
            code_doppler=cand, carrier_doppler=carrier,
            peak=pm.peak, second_peak=pm.second_peak, ratio=ratio))
    return results


def acquire_nch(signal, prns, n_nch, carrier_grid=None, threshold=None):
    """Non-coherent baseline: wipe each candidate carrier, correlate the
    original code per 1 ms block, accumulate squared magnitudes over n_nch
    blocks, and pick the best carrier bin per PRN."""
    m = samples_per_period(signal.fs)
    if len(signal) < n_nch * m:
        raise ValueError(f"need at least {n_nch} code periods of signal")
    if carrier_grid is None:
        carrier_grid = np.arange(-DEFAULT_CARRIER_SPAN,
                                 DEFAULT_CARRIER_SPAN + DEFAULT_CARRIER_STEP / 2,
                                 DEFAULT_CARRIER_STEP)
    zone = exclusion_zone(signal.fs)
    prns = sorted(prns)
    x = signal.samples[:n_nch * m].astype(np.float64)
    t = np.arange(n_nch * m) / signal.fs

    best = {p: (-math.inf, None, None) for p in prns}
    for dopp in np.asarray(carrier_grid, dtype=np.float64):
        mixed = x * np.exp(-2j * np.pi * (signal.f_if + dopp) * t)
        block_ffts = np.fft.fft(mixed.reshape(n_nch, m), axis=1)
        for prn in prns:
            spec = _nch_code_spectrum(prn, signal.fs)
            acc = np.zeros(m)
            for k in range(n_nch):
                corr = np.fft.ifft(block_ffts[k] * spec)
                acc += corr.real ** 2 + corr.imag ** 2
            pm = peak_metrics(acc, zone)
            if not math.isnan(pm.ratio) and pm.ratio > best[prn][0]:
                best[prn] = (pm.ratio, pm, float(dopp))

    gamma = _gamma(threshold)
    results = []
    for prn in prns:
        ratio, pm, dopp = best[prn]
        if pm is None:
            results.append(AcquisitionResult(prn, False, 0, None, None,
                                             0.0, 0.0, math.nan))
            continue
        results.append(AcquisitionResult(
            prn=prn, detected=ratio > gamma, code_phase=pm.code_phase,
            code_doppler=None, carrier_doppler=dopp,
            peak=pm.peak, second_peak=pm.second_peak, ratio=ratio))
    return results


def estimate_carrier(signal, code_phase, code, window, search_band=6000.0):
    """Carrier frequency from a detected code phase: wipe the code, keep the
    analytic band around f_if, square (the data signs cancel), and read the
    doubled-Doppler line off the spectrum.  Resolution is below 1/window.

    Returns a CarrierEstimate; ``reliable`` is False when the line does not
    stand out of the background (noise-only data)."""
    m = samples_per_period(signal.fs)
    w = int(round(window * signal.fs))
    if w > len(signal):
        raise ValueError("window longer than the signal")
    if w < m:
        raise ValueError("window must cover at least one code period")
    up = upsample_code(code, signal.fs).astype(np.float64)
    replica = up[(np.arange(w) - code_phase) % m]
    y = signal.samples[:w].astype(np.float64) * replica

    spec = np.fft.fft(y)
    freqs = np.fft.fftfreq(w, 1.0 / signal.fs)
    guard = 2.0 * signal.fs / w
    band = (freqs >= signal.f_if - search_band - guard) \
        & (freqs <= signal.f_if + search_band + guard)
    spec[~band] = 0.0
    z = np.fft.ifft(spec)  # analytic, band-limited around +f_if
    z *= np.exp(-2j * np.pi * signal.f_if * np.arange(w) / signal.fs)

    s2 = np.abs(np.fft.fft(z * z))
    f2 = np.fft.fftfreq(w, 1.0 / signal.fs)
    search = np.abs(f2) <= 2.0 * search_band
    mags = s2[search]
    peak_i = int(np.argmax(mags))
    background = float(np.median(mags))
    significance = mags[peak_i] / background if background > 0 else math.inf
    freq = signal.f_if + f2[search][peak_i] / 2.0
    return CarrierEstimate(frequency_hz=freq, significance=significance,
                           reliable=significance >= CARRIER_SIGNIFICANCE)


def _truncate(signal, n):
    from dataclasses import replace
    return replace(signal, samples=signal.samples[:n])


# --- result serialization ---------------------------------------------------

CSV_COLUMNS = ["prn", "detected", "peak", "second_peak", "ratio",
               "code_phase", "code_doppler_hz", "carrier_doppler_hz"]


def results_to_rows(results):
    rows = []
    for r in results:
        d = asdict(r)
        d["code_doppler_hz"] = d.pop("code_doppler")
        d["carrier_doppler_hz"] = d.pop("carrier_doppler")
        rows.append({k: d[k] for k in CSV_COLUMNS})
    return rows


def write_results_csv(results, fileobj):
    w = csv.DictWriter(fileobj, fieldnames=CSV_COLUMNS)
    w.writeheader()
    for row in results_to_rows(results):
        w.writerow(row)


def results_to_json(results):
    return json.dumps(results_to_rows(results), indent=2)
