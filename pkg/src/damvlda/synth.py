"""Synthesize sampled B1I-style IF signals (code + secondary code + nav data
+ carrier, optional AWGN and quantization) and read/write raw IF capture
files (headerless i8 / little-endian i16)."""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .codes import (CHIP_RATE, CODE_LENGTH, CODE_PERIOD, gen_nh_code,
                    gen_ranging_code, samples_per_period)

IF_FORMATS = {"i8": np.int8, "i16-le": np.dtype("<i2")}

_PERIODS_PER_BIT = 20
_CHIP_BIAS = _PERIODS_PER_BIT * CODE_LENGTH  # keeps chip counters non-negative


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to synthesize one deterministic signal."""
    prn: int = 1
    cn0_dbhz: float = math.inf
    fs: float = 10e6
    f_if: float = 2.5e6
    carrier_doppler: float = 0.0
    code_doppler: float = 0.0
    carrier_phase: float = 0.0
    code_phase_offset: float = 0.0
    duration: float = 1.0
    nav_seed: int = 0
    noise_seed: int = 1
    nh_enabled: bool = True
    signal_power: float = 1.0

    def validate(self):
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        if self.fs <= 2 * (self.f_if + self.carrier_doppler):
            raise ValueError("fs must exceed twice the carrier frequency")
        m = samples_per_period(self.fs)
        if not 0 <= self.code_phase_offset < m:
            raise ValueError(f"code_phase_offset must be in [0, {m})")
        return self


@dataclass(frozen=True)
class SampledSignal:
    """Real-valued IF sample stream (float32) with its sampling metadata.

    f_if is None once the carrier has been stripped.
    """
    samples: np.ndarray
    fs: float
    f_if: float | None
    origin: dict = field(default_factory=dict, repr=False)

    def __len__(self):
        return len(self.samples)

    @property
    def duration(self):
        return len(self.samples) / self.fs


def nav_bit_stream(n_bits, seed):
    """Seeded random +/-1 message bits, one per 20 ms."""
    rng = np.random.default_rng(seed)
    return rng.choice(np.array([-1.0, 1.0]), size=n_bits)


def synth_if_signal(config, code_chips=None, modulate_data=True):
    """Noise-free sampled IF signal

        s[n] = sqrt(2 Ps) * D(t_n) * C(t_n) * cos(2 pi (f_if + fd) t_n + phi)

    with the ranging code clocked at chip_rate + code_doppler and the data
    sign D (nav bit x NH chip, NH omitted in GEO/D2 mode) locked to code
    periods.  ``code_chips``/``modulate_data`` replace the code or drop the
    data modulation for test scenarios.
    """
    config.validate()
    n = int(round(config.duration * config.fs))
    if code_chips is None:
        code_chips = gen_ranging_code(config.prn).chips
    chips = np.ascontiguousarray(code_chips, dtype=np.float64)

    ratio = (CHIP_RATE + config.code_doppler) / config.fs
    max_chip = int(np.floor((n - config.code_phase_offset) * ratio)) + _CHIP_BIAS
    n_periods = max_chip // CODE_LENGTH + 2
    per = np.arange(n_periods)
    if modulate_data:
        nav = nav_bit_stream(n_periods // _PERIODS_PER_BIT + 1, config.nav_seed)
        data = nav[per // _PERIODS_PER_BIT]
        if config.nh_enabled:
            data = data * gen_nh_code().chips[per % _PERIODS_PER_BIT]
    else:
        data = np.ones(n_periods)

    samples = _kernels.code_modulated_carrier(
        chips, np.ascontiguousarray(data, dtype=np.float64),
        float(config.code_phase_offset), ratio,
        2 * np.pi * (config.f_if + config.carrier_doppler) / config.fs,
        float(config.carrier_phase), math.sqrt(2 * config.signal_power),
        _CHIP_BIAS, n)
    return SampledSignal(samples=samples, fs=config.fs, f_if=config.f_if,
                         origin={"kind": "synthetic", "config": config})


def add_awgn(signal, cn0_dbhz, seed):
    """Add white Gaussian noise for a carrier-to-noise-density ratio, the
    noise power spread over the Nyquist band: sigma^2 = Ps*fs / (2*10^(c/10)).
    Infinite C/N0 is a no-op.  Deterministic per seed."""
    if math.isinf(cn0_dbhz):
        return signal
    ps = _signal_power(signal)
    sigma = math.sqrt(ps * signal.fs / (2.0 * 10 ** (cn0_dbhz / 10.0)))
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(len(signal), dtype=np.float32)
    out = signal.samples + np.float32(sigma) * noise
    return replace(signal, samples=out)


def add_frontend_awgn(signal, cn0_dbhz, bandwidth, seed):
    """Add noise band-limited to the RF front end: flat one-sided PSD
    N0 = Ps/10^(c/10) over [f_if - B/2, f_if + B/2], zero elsewhere."""
    if math.isinf(cn0_dbhz):
        return signal
    ps = _signal_power(signal)
    n0 = ps / 10 ** (cn0_dbhz / 10.0)
    noise = bandlimited_noise(len(signal), signal.fs, signal.f_if,
                              bandwidth, n0, seed)
    return replace(signal, samples=signal.samples + noise)


def bandlimited_noise(n, fs, f_center, bandwidth, n0, seed):
    """Gaussian noise with one-sided PSD n0 over [f_center - B/2,
    f_center + B/2] (ideal band edges), synthesized in the frequency domain.
    Total power n0*B; float32."""
    rng = np.random.default_rng(seed)
    k_lo = max(1, int(np.ceil((f_center - bandwidth / 2) * n / fs)))
    k_hi = min(n // 2 - 1, int(np.floor((f_center + bandwidth / 2) * n / fs)))
    nb = k_hi - k_lo + 1
    g = rng.standard_normal(2 * nb)
    amp = math.sqrt(n0 * bandwidth * n * n / (4.0 * nb))
    spec = np.zeros(n // 2 + 1, dtype=np.complex128)
    spec[k_lo:k_hi + 1] = amp * (g[:nb] + 1j * g[nb:])
    return np.fft.irfft(spec, n=n).astype(np.float32)


def _signal_power(signal):
    cfg = signal.origin.get("config")
    return cfg.signal_power if cfg is not None else 1.0


def quantize_samples(signal, bits, full_scale):
    """Uniform mid-tread quantization clamped to +/-full_scale; the output
    stays real-valued on the quantizer's reconstruction levels."""
    if bits not in (8, 16):
        raise ValueError("bits must be 8 or 16")
    if full_scale <= 0:
        raise ValueError("full_scale must be positive")
    step = full_scale / 2 ** (bits - 1)
    codes = np.clip(np.rint(signal.samples / step),
                    -(2 ** (bits - 1)), 2 ** (bits - 1) - 1)
    return replace(signal, samples=(codes * step).astype(np.float32))


def write_if_file(signal, path, fmt):
    """Raw headerless sample dump; i16 is little-endian.  Samples must
    already sit on representable integer values."""
    dtype = _if_dtype(fmt)
    info = np.iinfo(dtype)
    rounded = np.rint(np.asarray(signal.samples, dtype=np.float64))
    if rounded.size and (rounded.max() > info.max or rounded.min() < info.min):
        raise ValueError(f"samples exceed the {fmt} range [{info.min}, {info.max}]")
    rounded.astype(dtype).tofile(path)


def read_if_file(path, fmt, fs, f_if):
    dtype = _if_dtype(fmt)
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) % dtype.itemsize:
        raise ValueError(f"{path}: size {len(raw)} is not a multiple of "
                         f"the {fmt} sample size")
    samples = np.frombuffer(raw, dtype=dtype).astype(np.float32)
    return SampledSignal(samples=samples, fs=fs, f_if=f_if,
                         origin={"kind": "file", "path": str(path), "format": fmt})


def _if_dtype(fmt):
    try:
        return np.dtype(IF_FORMATS[fmt])
    except KeyError:
        raise ValueError(f"unsupported IF format {fmt!r}; "
                         f"expected one of {sorted(IF_FORMATS)}") from None


# --- scenario files: one "key = value" per line, # comments ----------------

_SCENARIO_FIELDS = {
    "prn": int, "cn0_dbhz": float, "fs_hz": float, "if_hz": float,
    "carrier_doppler_hz": float, "code_doppler_hz": float,
    "carrier_phase_rad": float, "code_phase_samples": float,
    "duration_s": float, "nav_seed": int, "noise_seed": int,
    "nh_enabled": lambda s: s.lower() in ("1", "true", "yes"),
    "signal_power": float,
}

_FIELD_TO_ATTR = {
    "fs_hz": "fs", "if_hz": "f_if", "carrier_doppler_hz": "carrier_doppler",
    "code_doppler_hz": "code_doppler", "carrier_phase_rad": "carrier_phase",
    "code_phase_samples": "code_phase_offset", "duration_s": "duration",
}


def load_scenario(path, **overrides):
    """Parse a scenario config file; keyword arguments override file values."""
    values = {}
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, val = line.partition("=")
            key = key.strip()
            if key not in _SCENARIO_FIELDS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            values[_FIELD_TO_ATTR.get(key, key)] = _SCENARIO_FIELDS[key](val.strip())
    values.update(overrides)
    return ScenarioConfig(**values).validate()


def save_scenario(config, path):
    attr_to_field = {v: k for k, v in _FIELD_TO_ATTR.items()}
    with open(path, "w") as f:
        for name in ScenarioConfig.__dataclass_fields__:
            value = getattr(config, name)
            if isinstance(value, bool):
                value = int(value)
            f.write(f"{attr_to_field.get(name, name)} = {value}\n")
