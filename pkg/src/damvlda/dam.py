"""Delay-and-multiply transform, optimal-delay selection, and the analytic
product-noise / link-budget models.

Multiplying the IF stream by a delayed copy of itself strips the carrier and
data-sign transitions, leaving the delay-product code at twice the SNR cost:
the dominant noise term is the product of two Gaussians (variance sigma^4,
density K0-shaped).
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import k0

BOLTZMANN = 1.38e-23
SPEED_OF_LIGHT = 2.998e8

_TRIG_TOL = 1e-9  # absorbs float representation of fs/f_if ratios


@dataclass(frozen=True)
class DamConfig:
    delay_samples: int
    tau: float
    fs: float
    f_if: float
    bandwidth: float


@dataclass(frozen=True)
class LinkBudget:
    received_power_dbw: float
    noise_temperature_k: float
    bandwidth_hz: float
    snr_db: float
    snr_after_dam_db: float
    min_coherent_length_s: float

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def select_delay(fs, f_if, bandwidth, code_period=2046 / 2.046e6):
    """Smallest delay (in samples) that keeps the carrier term at full
    magnitude, lands on a zero of the band-noise autocorrelation, and stays
    far below the code period:

        |cos(2 pi f_if tau)| = 1,  sin(pi B tau) = 0,  tau <= period/100,

    with tau = delta_n / fs.  Correlation-quality margins (codes.correlation_
    metrics) are the caller's check.  Raises if no delay qualifies.
    """
    if fs <= 0 or f_if <= 0 or bandwidth <= 0:
        raise ValueError("fs, f_if and bandwidth must be positive")
    max_dn = int(math.floor(fs * code_period / 100.0))
    best_cos_miss = best_sin_miss = None
    for dn in range(1, max_dn + 1):
        tau = dn / fs
        cos_ok = abs(math.cos(2 * math.pi * f_if * tau)) >= 1 - _TRIG_TOL
        sin_ok = abs(math.sin(math.pi * bandwidth * tau)) <= _TRIG_TOL
        if cos_ok and sin_ok:
            return DamConfig(delay_samples=dn, tau=tau, fs=fs, f_if=f_if,
                             bandwidth=bandwidth)
        miss_c = 1 - abs(math.cos(2 * math.pi * f_if * tau))
        miss_s = abs(math.sin(math.pi * bandwidth * tau))
        if cos_ok and (best_sin_miss is None or miss_s < best_sin_miss):
            best_sin_miss = miss_s
        if sin_ok and (best_cos_miss is None or miss_c < best_cos_miss):
            best_cos_miss = miss_c
    raise ValueError(
        f"no delay up to {max_dn} samples satisfies the carrier/noise-zero "
        f"criteria (closest carrier-magnitude miss {best_cos_miss}, closest "
        f"noise-zero miss {best_sin_miss})")


def delay_multiply(signal, delay_samples):
    """out[n] = in[n + delta_n] * in[n]; the carrier is removed, so the
    f_if metadata is cleared.  Output keeps the first N - delta_n alignment:
    the code phase found downstream is that of the later factor, i.e. the
    original code phase minus delta_n."""
    if delay_samples < 1:
        raise ValueError("delay_samples must be >= 1")
    x = signal.samples
    if len(x) <= delay_samples:
        raise ValueError("signal shorter than the delay")
    out = x[delay_samples:] * x[:-delay_samples]
    return replace(signal, samples=out, f_if=None)


def bandlimited_noise_acf(tau, n0, bandwidth, f_if):
    """Autocorrelation of ideal band-limited noise,
    N0*B*sinc(B tau)*cos(2 pi f tau)."""
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    return n0 * bandwidth * np.sinc(bandwidth * np.asarray(tau)) \
        * np.cos(2 * np.pi * f_if * np.asarray(tau))


def product_noise_pdf(u, sigma):
    """Density of the product of two independent zero-mean Gaussians with
    variance sigma^2: K0(|u|/sigma^2) / (pi sigma^2).  Diverges
    (logarithmically, integrably) at u = 0, where +inf is returned."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    u = np.asarray(u, dtype=np.float64)
    with np.errstate(divide="ignore"):
        return k0(np.abs(u) / sigma ** 2) / (np.pi * sigma ** 2)


def link_budget(received_power_dbw, noise_temperature_k, bandwidth_hz,
                required_baseband_snr_db=14.0):
    """Receiver SNR before and after delay-multiplication, and the shortest
    coherent integration meeting the required baseband SNR.

    snr = P_rx - 10 log10(k Te B); the delay-product SNR is exactly twice
    that in dB.  The integration-length solve uses the after-product figure
    rounded to the whole dB it would be quoted at, so the budget reads
    -25 dB -> -50 dB -> 10 log10(B Tc) >= 64 dB.
    """
    if bandwidth_hz <= 0 or noise_temperature_k <= 0:
        raise ValueError("bandwidth and temperature must be positive")
    snr = received_power_dbw - 10 * math.log10(
        BOLTZMANN * noise_temperature_k * bandwidth_hz)
    snr_after = 2 * snr
    needed_db = required_baseband_snr_db - round(snr_after)
    tc = 10 ** (needed_db / 10.0) / bandwidth_hz
    return LinkBudget(received_power_dbw=received_power_dbw,
                      noise_temperature_k=noise_temperature_k,
                      bandwidth_hz=bandwidth_hz, snr_db=snr,
                      snr_after_dam_db=snr_after, min_coherent_length_s=tc)


def max_code_doppler(v_sat, r_earth, r_sat, code_rate):
    """Worst-case ranging-code Doppler, v * (Re/Rsat) * (f_R/c)."""
    if min(v_sat, r_earth, r_sat, code_rate) < 0 or r_sat <= r_earth:
        raise ValueError("expected positive arguments with r_sat > r_earth")
    return v_sat * r_earth * code_rate / (r_sat * SPEED_OF_LIGHT)
