"""Shared statistical test helpers."""

import numpy as np
from scipy import integrate


def piecewise_quad(fn, breakpoints):
    """Integrate fn over consecutive breakpoint intervals (kink-safe)."""
    total = 0.0
    for a, b in zip(breakpoints, breakpoints[1:]):
        val, _ = integrate.quad(fn, a, b, limit=200)
        total += val
    return total


def merge_small_bins(observed, expected, min_expected=10.0):
    """Pool bins with tiny expected counts so per-bin z-tests are meaningful.

    Scans left to right, accumulating until the expected mass reaches the
    threshold; any unfinished remainder joins the last emitted bin.
    """
    obs_out, exp_out = [], []
    acc_o, acc_e = 0.0, 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            obs_out.append(acc_o)
            exp_out.append(acc_e)
            acc_o, acc_e = 0.0, 0.0
    if exp_out:
        obs_out[-1] += acc_o
        exp_out[-1] += acc_e
    else:
        obs_out, exp_out = [acc_o], [acc_e]
    return np.asarray(obs_out), np.asarray(exp_out)


def assert_bins_within_sigma(draws, probs, origin=0, k_sigma=6.0, min_expected=10.0):
    """Each (pooled) bin count within k_sigma of its binomial expectation."""
    draws = np.asarray(draws)
    n = len(draws)
    counts = np.bincount(draws - origin, minlength=len(probs))
    assert len(counts) == len(probs), "draw outside the table support"
    obs, exp = merge_small_bins(counts, np.asarray(probs) * n, min_expected)
    p = exp / n
    sigma = np.sqrt(n * p * (1.0 - p))
    worst = np.max(np.abs(obs - exp) / np.maximum(sigma, 1e-300))
    assert worst <= k_sigma, f"worst bin deviation {worst:.2f} sigma > {k_sigma}"
