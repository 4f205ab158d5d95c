"""BeiDou B1I ranging codes, the NH secondary code, delay-product reference
codes, and correlation-quality metrics.

The B1I ranging code is a balanced Gold-type sequence: two 11-stage shift
registers (feedback taps G1: 1,7,8,9,10,11 and G2: 1,2,3,4,5,8,9,11, both
seeded with 01010101010), output G1 stage 11 xor a per-PRN selection of G2
taps, truncated to 2046 chips.  Codes are validated behaviorally through
their correlation properties rather than against chip dumps.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

CHIP_RATE = 2.046e6
CODE_LENGTH = 2046
CODE_PERIOD = CODE_LENGTH / CHIP_RATE  # 1 ms
NUM_PRN = 63

NH_BITS = (0, 0, 0, 0, 0, 1, 0, 0, 1, 1, 0, 1, 0, 1, 0, 0, 1, 1, 1, 0)
NH_RATE = 1000.0  # chips/s, one NH chip per ranging-code period
NAV_BIT_RATE = 50.0  # bits/s (D1), 20 code periods per bit

# G2 phase selection per PRN.  Pairs cover PRN 1..37, triples 38..63.
_G2_TAPS = {
    1: (1, 3), 2: (1, 4), 3: (1, 5), 4: (1, 6), 5: (1, 8), 6: (1, 9),
    7: (1, 10), 8: (1, 11), 9: (2, 7), 10: (3, 4), 11: (3, 5), 12: (3, 6),
    13: (3, 8), 14: (3, 9), 15: (3, 10), 16: (3, 11), 17: (4, 5),
    18: (4, 6), 19: (4, 8), 20: (4, 9), 21: (4, 10), 22: (4, 11),
    23: (5, 6), 24: (5, 8), 25: (5, 9), 26: (5, 10), 27: (5, 11),
    28: (6, 8), 29: (6, 9), 30: (6, 10), 31: (6, 11), 32: (8, 9),
    33: (8, 10), 34: (8, 11), 35: (9, 10), 36: (9, 11), 37: (10, 11),
    38: (1, 2, 7), 39: (1, 3, 4), 40: (1, 3, 6), 41: (1, 3, 8),
    42: (1, 3, 10), 43: (1, 3, 11), 44: (1, 4, 5), 45: (1, 4, 9),
    46: (1, 5, 6), 47: (1, 5, 8), 48: (1, 5, 10), 49: (1, 5, 11),
    50: (1, 6, 9), 51: (1, 6, 10), 52: (1, 6, 11), 53: (1, 8, 9),
    54: (1, 8, 10), 55: (1, 8, 11), 56: (1, 9, 10), 57: (1, 9, 11),
    58: (1, 10, 11), 59: (2, 3, 7), 60: (3, 4, 5), 61: (3, 4, 9),
    62: (3, 5, 6), 63: (3, 5, 8),
}


@dataclass(frozen=True)
class RangingCode:
    """One satellite's spreading sequence, chips in {+1, -1}."""
    prn: int
    chips: np.ndarray
    chip_rate: float = CHIP_RATE

    def __post_init__(self):
        if not np.all(np.abs(self.chips) == 1):
            raise ValueError("chips must be +/-1")

    @property
    def period(self):
        return len(self.chips) / self.chip_rate


@dataclass(frozen=True)
class NhCode:
    chips: np.ndarray
    rate: float = NH_RATE


@dataclass(frozen=True)
class DamReference:
    """Delay-product code sampled over one period, with its cached spectrum.

    samples[n] = up[n] * up[(n - delay_samples) mod M] where up is the
    upsampled ranging code; spectrum is the forward rfft of samples.
    """
    prn: int
    delay_samples: int
    fs: float
    samples: np.ndarray
    spectrum: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class CorrelationReport:
    tau: float
    k_auto: float
    k_cross: float | None


def gen_ranging_code(prn):
    """Generate the 2046-chip B1I ranging code for PRN 1..63, values +/-1."""
    if prn not in _G2_TAPS:
        raise ValueError(f"unknown PRN {prn}; expected 1..{NUM_PRN}")
    r1 = [0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0]
    r2 = list(r1)
    taps = _G2_TAPS[prn]
    bits = np.empty(CODE_LENGTH, dtype=np.int8)
    for i in range(CODE_LENGTH):
        g2 = 0
        for t in taps:
            g2 ^= r2[t - 1]
        bits[i] = r1[10] ^ g2
        fb1 = r1[0] ^ r1[6] ^ r1[7] ^ r1[8] ^ r1[9] ^ r1[10]
        fb2 = r2[0] ^ r2[1] ^ r2[2] ^ r2[3] ^ r2[4] ^ r2[7] ^ r2[8] ^ r2[10]
        r1 = [fb1] + r1[:-1]
        r2 = [fb2] + r2[:-1]
    return RangingCode(prn=prn, chips=(1 - 2 * bits).astype(np.int8))


def gen_nh_code():
    """The 20-chip Neumann-Hoffman secondary code at 1 kchip/s."""
    return NhCode(chips=(1 - 2 * np.array(NH_BITS, dtype=np.int8)))


def samples_per_period(fs, period=CODE_PERIOD):
    return int(round(fs * period))


def upsample_code(code, fs):
    """Sample the chip waveform at fs; sample n carries chip
    floor(n*chip_rate/fs) mod L.  Returns +/-1 int8 of length round(fs*period).
    """
    if fs < code.chip_rate:
        raise ValueError(f"fs={fs} is below the chip rate {code.chip_rate}")
    m = samples_per_period(fs, code.period)
    idx = (np.arange(m) * (code.chip_rate / fs)).astype(np.int64)
    return code.chips[idx % len(code.chips)]


def make_dam_reference(code, delay_samples, fs):
    """Product of the upsampled code with its circular shift by delay_samples."""
    up = upsample_code(code, fs)
    m = len(up)
    if not 0 <= delay_samples < m:
        raise ValueError(f"delay_samples must be in [0, {m})")
    prod = (up * np.roll(up, delay_samples)).astype(np.int8)
    spectrum = np.fft.rfft(prod.astype(np.float64))
    return DamReference(prn=code.prn, delay_samples=delay_samples, fs=fs,
                        samples=prod, spectrum=spectrum)


def _main_lobe_zone(fs, chip_rate):
    # one chip either side of the peak: excludes the correlation main lobe
    return int(np.ceil(fs / chip_rate))


def correlation_metrics(code_set, delay_samples, fs):
    """Normalized peak-to-second-peak autocorrelation margin (worst over the
    set) and peak-to-max-cross margin (worst over pairs), evaluated on the
    delay-product codes at all integer-sample lags of one period.

    delay_samples=0 scores the original codes (the reference values).  The
    autocorrelation second peak excludes +/-1 chip around zero lag; cross
    maxima are absolute values over all lags.  k_cross is None for a single
    code.
    """
    if not code_set:
        raise ValueError("empty code set")
    if delay_samples == 0:
        seqs = [upsample_code(c, fs).astype(np.float64) for c in code_set]
    else:
        seqs = [make_dam_reference(c, delay_samples, fs).samples.astype(np.float64)
                for c in code_set]
    m = len(seqs[0])
    zone = _main_lobe_zone(fs, code_set[0].chip_rate)
    specs = [np.fft.rfft(s) for s in seqs]

    k_auto = np.inf
    for s, sp in zip(seqs, specs):
        r = np.fft.irfft(sp * np.conj(sp), n=m) / m
        r0 = r[0]
        mask = np.ones(m, dtype=bool)
        mask[:zone + 1] = False
        mask[m - zone:] = False
        k_auto = min(k_auto, r0 / np.max(np.abs(r[mask])))

    k_cross = None
    if len(seqs) > 1:
        k_cross = np.inf
        for i in range(len(seqs)):
            for j in range(i + 1, len(seqs)):
                r = np.fft.irfft(specs[i] * np.conj(specs[j]), n=m) / m
                k_cross = min(k_cross, 1.0 / np.max(np.abs(r)))
    return CorrelationReport(tau=delay_samples / fs, k_auto=float(k_auto),
                             k_cross=None if k_cross is None else float(k_cross))


def tau_performance_sweep(code_set, tau_min, tau_max, fs):
    """One CorrelationReport per integer-sample delay in [tau_min, tau_max]."""
    period = code_set[0].period
    if not 0 <= tau_min <= tau_max < period:
        raise ValueError("tau range must lie within [0, code period)")
    n_lo = int(np.ceil(tau_min * fs - 1e-9))
    n_hi = int(np.floor(tau_max * fs + 1e-9))
    return [correlation_metrics(code_set, dn, fs) for dn in range(n_lo, n_hi + 1)]


def write_sweep_csv(reports, fs, fileobj):
    """CSV columns: delay_samples, tau_us, k_auto, k_cross."""
    w = csv.writer(fileobj)
    w.writerow(["delay_samples", "tau_us", "k_auto", "k_cross"])
    for rep in reports:
        w.writerow([int(round(rep.tau * fs)), f"{rep.tau * 1e6:.6f}",
                    f"{rep.k_auto:.6f}",
                    "" if rep.k_cross is None else f"{rep.k_cross:.6f}"])
