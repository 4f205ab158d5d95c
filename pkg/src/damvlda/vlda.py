"""Variable-length data accumulation: cancel the code-Doppler period drift by
inserting or deleting single samples, then fold the stream into one
code-period block sum; plus the Doppler search-grid planner."""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .codes import CHIP_RATE


@dataclass(frozen=True)
class DopplerGrid:
    f_min: float
    f_max: float
    step: float
    bins: np.ndarray

    def __len__(self):
        return len(self.bins)


@dataclass(frozen=True)
class AccumulatedBlock:
    samples: np.ndarray  # float64, length M
    n_blocks: int
    candidate_doppler: float
    adjustments_applied: int  # +insertions / -deletions


def n_per(code_rate, delta_f):
    """Samples between single-sample adjustments, f_R/|delta_f|; infinite
    (no compensation) for delta_f = 0."""
    if code_rate <= 0:
        raise ValueError("code_rate must be positive")
    if delta_f == 0:
        return math.inf
    return code_rate / abs(delta_f)


def compensate_and_accumulate(signal, candidate_doppler, code_rate=CHIP_RATE,
                              m=None):
    """Hypothesizing a received code rate f_R + candidate, stretch or shrink
    the stream back to the nominal period: a positive candidate shortens the
    received periods, so one sample is duplicated every n_per consumed
    samples; a negative one is compensated by deleting.  The compensated
    stream is summed into consecutive M-sample blocks (trailing partial block
    dropped).
    """
    if m is None:
        m = int(round(signal.fs * 1e-3))
    x = signal.samples
    if len(x) < m:
        raise ValueError("signal shorter than one code period")
    per = n_per(code_rate, candidate_doppler)
    step = 0.0 if math.isinf(per) else 1.0 / per
    insert = candidate_doppler > 0
    acc, n_blocks, n_adjust = _kernels.accumulate_compensated(x, step, insert, m)
    signed = n_adjust if insert else -n_adjust
    return AccumulatedBlock(samples=acc, n_blocks=n_blocks,
                            candidate_doppler=candidate_doppler,
                            adjustments_applied=signed)


def doppler_grid(duration, f_min, f_max):
    """Candidate code-Doppler bins with the empirical step 1/(2T), endpoints
    inclusive so the true value always has a bin within half a step."""
    if duration <= 0:
        raise ValueError("duration must be positive")
    if f_max < f_min:
        raise ValueError("f_max must be >= f_min")
    step = 1.0 / (2.0 * duration)
    n_bins = int(math.floor((f_max - f_min) / step + 1e-9)) + 1
    bins = f_min + step * np.arange(n_bins)
    return DopplerGrid(f_min=f_min, f_max=f_max, step=step, bins=bins)
