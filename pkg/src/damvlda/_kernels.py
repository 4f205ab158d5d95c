"""Hot inner loops: compensated accumulation and code-modulated carrier fill.

Each kernel has a numba @njit build and a pure-numpy fallback.  The numpy
path is selected when numba is unavailable or when the environment variable
``DAMVLDA_NO_NUMBA`` is set to a non-empty value (checked per call, so tests
can toggle it).  Both accumulation paths perform the per-output-sample
additions in identical order, so their results agree bit for bit; the
carrier fill differs only by libm-vs-SIMD cosine rounding.

``benchmarks/bench_kernels.py`` times both paths.
"""

import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f
        return wrap


def numba_enabled():
    return HAS_NUMBA and not os.environ.get("DAMVLDA_NO_NUMBA")


# ---------------------------------------------------------------------------
# compensated accumulation
#
# Walk the input stream; after every n_per = 1/step consumed samples either
# duplicate the sample just consumed (insert=True) or skip one (insert=False),
# then fold the compensated stream into one block of M elementwise sums.
# Adjustment j lands after input sample ceil(j/step)-1, which is the exact
# non-drifting form of adding the fractional step per sample.  The trailing
# partial block is never accumulated.


def _accum_plan(n, step, insert, m):
    n_adjust = int(np.floor(n * step)) if step > 0.0 else 0
    out_len = n + n_adjust if insert else n - n_adjust
    n_blocks = out_len // m
    return n_adjust, n_blocks, n_blocks * m


def _accumulate_numpy(x, step, insert, m, used, n_adjust):
    acc = np.zeros(m, dtype=np.float64)

    def add_run(a, b, o):
        """Fold x[a:b] in at output position o; returns the logical length."""
        full = b - a
        if full <= 0:
            return 0
        run = full
        if o >= used:
            return full
        if o + run > used:
            run = used - o
            b = a + run
        j = o % m
        head = min(m - j, run)
        acc[j:j + head] += x[a:a + head]
        a += head
        rem = run - head
        for r in range(rem // m):
            acc[:] += x[a + r * m:a + (r + 1) * m]
        tail = rem % m
        if tail:
            acc[:tail] += x[b - tail:b]
        return full

    n = len(x)
    o = 0
    a = 0
    for j in range(1, n_adjust + 1):
        p = int(np.ceil(j / step)) - 1
        if insert:
            o += add_run(a, p + 1, o)
            if o < used:
                acc[o % m] += x[p]
            o += 1
        else:
            o += add_run(a, p, o)
        a = p + 1
    add_run(a, n, o)
    return acc


@njit(cache=True)
def _accumulate_numba(x, step, insert, m, used, n_adjust):  # pragma: no cover
    acc = np.zeros(m, dtype=np.float64)
    n = len(x)
    o = 0
    a = 0
    for j in range(1, n_adjust + 2):
        if j <= n_adjust:
            p = int(np.ceil(j / step)) - 1
            b = p + 1 if insert else p
        else:
            p = n
            b = n
        run = b - a
        if run > 0 and o < used:
            r = run
            if o + r > used:
                r = used - o
            oj = o % m
            for i in range(r):
                acc[oj] += x[a + i]
                oj += 1
                if oj == m:
                    oj = 0
        if run > 0:
            o += run
        if j <= n_adjust:
            if insert:
                if o < used:
                    acc[o % m] += x[p]
                o += 1
            a = p + 1
    return acc


def accumulate_compensated(x, step, insert, m):
    """Fold ``x`` into an M-sample block sum with one sample inserted
    (duplicated) or deleted every 1/step consumed samples.

    Returns (block, n_blocks, n_adjust) where n_adjust counts the
    adjustments falling inside the full input stream.
    """
    n = len(x)
    n_adjust, n_blocks, used = _accum_plan(n, step, insert, m)
    if n_adjust == 0:
        acc = np.zeros(m, dtype=np.float64)
        for r in range(n_blocks):
            acc += x[r * m:(r + 1) * m]
        return acc, n_blocks, 0
    if numba_enabled():
        acc = _accumulate_numba(x, step, insert, m, used, n_adjust)
    else:
        acc = _accumulate_numpy(x, step, insert, m, used, n_adjust)
    return acc, n_blocks, n_adjust


# ---------------------------------------------------------------------------
# code-modulated carrier fill
#
# out[i] = amp * data[k // L] * chips[k % L] * cos(w*i + phi),
# k = floor((i - offset) * ratio) + bias, with bias chosen by the caller so
# k is never negative.  ``data`` is the per-code-period sign (nav bit times
# secondary chip), already expanded by the caller.


def _carrier_numpy(chips, data, offset, ratio, w, phi, amp, bias, n):
    i = np.arange(n, dtype=np.float64)
    k = np.floor((i - offset) * ratio).astype(np.int64) + bias
    code = chips[k % len(chips)].astype(np.float64)
    sign = data[k // len(chips)]
    return (amp * sign * code * np.cos(w * i + phi)).astype(np.float32)


@njit(cache=True)
def _carrier_numba(chips, data, offset, ratio, w, phi, amp, bias, n):  # pragma: no cover
    out = np.empty(n, dtype=np.float32)
    L = len(chips)
    for i in range(n):
        k = int(np.floor((i - offset) * ratio)) + bias
        out[i] = amp * data[k // L] * chips[k % L] * np.cos(w * i + phi)
    return out


def code_modulated_carrier(chips, data, offset, ratio, w, phi, amp, bias, n):
    """Sample a data- and code-modulated cosine; float32 output."""
    if numba_enabled():
        return _carrier_numba(chips, data, offset, ratio, w, phi, amp, bias, n)
    return _carrier_numpy(chips, data, offset, ratio, w, phi, amp, bias, n)
