"""Shared numerical helpers: seeded RNG streams, log-log regression, formatting."""

import os

import numpy as np

__version__ = "0.1.0"

_U64 = (1 << 64) - 1


def rng_stream(seed, *key):
    """Deterministic generator for (seed, key...) -> independent PCG64 stream.

    Replica k of a Monte Carlo run uses rng_stream(seed, k); nested stages
    append further integers. The same tuple always yields the same stream,
    independent of worker count or call order.
    """
    entropy = [int(seed) & _U64] + [int(k) & _U64 for k in key]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def worker_count(flag=None):
    """Worker bound: explicit flag wins, then MULTIFRAC_THREADS, then cpu count."""
    if flag is not None and flag > 0:
        return flag
    env = os.environ.get("MULTIFRAC_THREADS")
    if env:
        try:
            value = int(env)
            if value > 0:
                return value
        except ValueError:
            pass
    return os.cpu_count() or 1


def ols_line(x, y):
    """Least-squares fit y ~ a + b*x. Returns (slope, intercept, slope_stderr).

    With fewer than 3 points the stderr is reported as inf.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two points for a slope")
    xm = x - x.mean()
    den = float(xm @ xm)
    if den == 0.0:
        raise ValueError("degenerate abscissa in regression")
    slope = float(xm @ (y - y.mean())) / den
    intercept = float(y.mean() - slope * x.mean())
    if x.size < 3:
        return slope, intercept, float("inf")
    resid = y - (intercept + slope * x)
    s2 = float(resid @ resid) / (x.size - 2)
    return slope, intercept, float(np.sqrt(s2 / den))


def fmt17(value):
    """17-significant-digit decimal rendering used by all CSV outputs."""
    return format(float(value), ".17g")


def dyadic_scales(j_min, j_max):
    if j_max < j_min:
        raise ValueError(f"empty scale range [{j_min}, {j_max}]")
    return list(range(int(j_min), int(j_max) + 1))
