"""Pure-numpy implementations of the hot kernels.

Drop-in fallback for the compiled module ``onesided._kernels_cy``; both
expose the same three functions with bit-identical integer outputs and
float outputs agreeing to rounding order. Selected by ``onesided._backend``.
"""

import numpy as np

NAME = "python"

_INV53 = 1.0 / 9007199254740992.0  # 2^-53


def uniforms_from_raw(raw):
    """Map raw 64-bit generator words to doubles in [0, 1).

    Convention (fixed so test vectors are portable): keep the top 53 bits,
    u = (raw >> 11) * 2^-53.
    """
    raw = np.asarray(raw, dtype=np.uint64)
    return (raw >> np.uint64(11)).astype(np.float64) * _INV53


def inverse_cdf_lookup(cdf, u):
    """Index of the first cdf entry strictly greater than each u.

    Standard inverse-CDF draw over a tabulated distribution. Indices are
    clamped to the last table entry; callers that need exact handling of
    u >= cdf[-1] (truncated tables) must treat those draws separately.
    """
    cdf = np.asarray(cdf, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, len(cdf) - 1).astype(np.int64)


def hockey_stick_pair(probs, shift, epsilon):
    """Both directional positive-part sums sum_i max(0, p[i] - e^eps * q[i]).

    q is the same table shifted up (``low``: violations collect at the low
    end of the support) or down (``high``). Returns (delta_low, delta_high).
    """
    p = np.asarray(probs, dtype=np.float64)
    e = float(np.exp(epsilon))
    shift = int(shift)
    n = len(p)
    if shift >= n:
        total = float(p.sum())
        return total, total
    up = np.concatenate((np.zeros(shift), p[: n - shift]))
    down = np.concatenate((p[shift:], np.zeros(shift)))
    d_low = float(np.maximum(p - e * up, 0.0).sum())
    d_high = float(np.maximum(p - e * down, 0.0).sum())
    return d_low, d_high
