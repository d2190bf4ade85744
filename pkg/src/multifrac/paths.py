"""Levy path synthesis on [0,1] via the Levy-Ito decomposition, plus path IO.

The truncated compensated jump part keeps every jump of size in (eps, 1]
explicitly (Poisson times, inverse-CDF sizes) and subtracts the matching
compensation line.  Jumps below eps are either dropped (their compensated sum
has mean zero) or replaced by a variance-matched Gaussian walk.  Jumps above 1
belong to the compound-Poisson component and are excluded unless asked for;
they do not affect regularity.
"""

import io
import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import measures
from .measures import (
    AtomicSymmetric,
    GeneratingTriplet,
    StablePower,
    TabulatedTail,
    compensator_drift,
    is_infinite,
    sample_jump_sizes,
    small_jump_variance,
    tail_mass,
    triplet_to_config,
)
from .util import __version__, fmt17, rng_stream

RECORD_FLOOR = 2.0 ** -40  # jump records below this are never retained


class JumpRecord(NamedTuple):
    time: float
    size: float


@dataclass
class SamplePath:
    """Process values on a uniform grid over [t0, t1] plus retained jumps.

    values has n+1 entries; jump times are strictly increasing (exact ties are
    merged at construction).  Jump arrays are plain float arrays so that paths
    with millions of retained jumps stay cheap; the `jumps` property gives the
    record view.
    """

    n: int
    values: np.ndarray
    t0: float = 0.0
    t1: float = 1.0
    jump_times: np.ndarray = field(default_factory=lambda: np.empty(0))
    jump_sizes: np.ndarray = field(default_factory=lambda: np.empty(0))
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.jump_times = np.asarray(self.jump_times, dtype=float)
        self.jump_sizes = np.asarray(self.jump_sizes, dtype=float)
        if self.values.shape != (self.n + 1,):
            raise ValueError(f"values must have n+1={self.n + 1} entries")
        if self.jump_times.shape != self.jump_sizes.shape:
            raise ValueError("jump times/sizes must align")
        if self.t1 <= self.t0:
            raise ValueError("need t1 > t0")
        if self.jump_times.size:
            order = np.argsort(self.jump_times, kind="stable")
            times = self.jump_times[order]
            sizes = self.jump_sizes[order]
            if times.size > 1 and np.any(np.diff(times) == 0.0):
                uniq, inverse = np.unique(times, return_inverse=True)
                merged = np.zeros(uniq.size)
                np.add.at(merged, inverse, sizes)
                times, sizes = uniq, merged
            self.jump_times, self.jump_sizes = times, sizes

    @property
    def dt(self):
        return (self.t1 - self.t0) / self.n

    def times(self):
        return self.t0 + self.dt * np.arange(self.n + 1)

    @property
    def jumps(self):
        return [JumpRecord(t, s) for t, s in zip(self.jump_times, self.jump_sizes)]

    def value_at(self, t):
        """Value at the nearest grid node."""
        idx = int(round((t - self.t0) / self.dt))
        return float(self.values[min(max(idx, 0), self.n)])

    def index_of(self, t):
        return int(round((t - self.t0) / self.dt))


@dataclass(frozen=True)
class SynthesisConfig:
    """Controls one synthesis run; seed is mandatory and fully determines it."""

    n: int
    eps: float
    seed: int
    small_jump_mode: str = "gaussian_approx"
    include_big_jumps: bool = False
    jump_record_floor: float = 0.0
    max_recorded_jumps: int = 1 << 26
    chunk_size: int = 1 << 24

    def __post_init__(self):
        if self.n < (1 << 10) or (self.n & (self.n - 1)) != 0:
            raise ValueError("n must be a power of two >= 2^10")
        if not self.eps > 0:
            raise ValueError("eps must be positive (eps=0 means infinite jump rate)")
        if self.small_jump_mode not in ("compensate_only", "gaussian_approx"):
            raise ValueError(f"unknown small_jump_mode {self.small_jump_mode!r}")
        if self.seed is None:
            raise ValueError("seed is mandatory")


def _validate_eps_support(measure, eps):
    if isinstance(measure, AtomicSymmetric) and eps >= float(measure.sizes.max()):
        raise ValueError("eps must be smaller than the largest atom")
    if isinstance(measure, TabulatedTail) and eps >= measure.radii[-1]:
        raise ValueError("eps must lie inside the tabulated tail support")


def simulate_levy(
    triplet: GeneratingTriplet,
    cfg: SynthesisConfig,
    t_span=(0.0, 1.0),
    anchor_zero=False,
) -> SamplePath:
    """Synthesize one path of the Levy process with the given triplet.

    The output decomposes exactly (at grid nodes) into
    drift + Brownian part + retained jumps - compensation + small-jump surrogate.
    The retained-jump list honours cfg.jump_record_floor; synthesis refuses
    upfront if the expected record count would exceed cfg.max_recorded_jumps.

    cfg.n is the number of cells per unit time; t_span widens the domain (its
    length must make the cell count integral).  With anchor_zero the path is
    shifted so L(0) = 0, as the fractional representations require.
    """
    measure = triplet.measure
    t0, t1 = float(t_span[0]), float(t_span[1])
    span = t1 - t0
    n = int(round(cfg.n * span))
    if abs(n - cfg.n * span) > 1e-9:
        raise ValueError("t_span length must give an integer cell count")
    dt = 1.0 / cfg.n
    if measure is not None:
        _validate_eps_support(measure, cfg.eps)
        rate = tail_mass(measure, cfg.eps, 1.0)
        if is_infinite(rate):
            raise ValueError("infinite jump rate above eps")
    else:
        rate = 0.0
    record_floor = max(cfg.jump_record_floor, RECORD_FLOOR)
    expected_records = rate if record_floor <= cfg.eps or measure is None else tail_mass(
        measure, record_floor, 1.0
    )
    if expected_records * span > cfg.max_recorded_jumps:
        raise ValueError(
            f"expected ~{expected_records * span:.3g} jump records; raise "
            f"jump_record_floor or max_recorded_jumps"
        )

    grid_t = dt * np.arange(n + 1)  # time since t0
    values = triplet.drift_a * grid_t

    rng_gauss = rng_stream(cfg.seed, 0)
    if triplet.gaussian_q > 0:
        steps = rng_gauss.standard_normal(n) * math.sqrt(triplet.gaussian_q * dt)
        values[1:] += np.cumsum(steps)

    comp = compensator_drift(measure, cfg.eps, 1.0) if measure is not None else 0.0
    if is_infinite(comp):
        raise ValueError("divergent compensation drift")
    values -= comp * grid_t

    rng_jump = rng_stream(cfg.seed, 1)
    total = int(rng_jump.poisson(rate * span)) if rate > 0 else 0
    cells = np.zeros(n + 1)
    rec_times, rec_sizes = [], []
    left = total
    while left > 0:
        m = min(left, cfg.chunk_size)
        pos = rng_jump.random(m)  # fraction of the span
        sizes = sample_jump_sizes(measure, cfg.eps, 1.0, m, rng_jump)
        idx = (pos * n).astype(np.int64) + 1
        cells += np.bincount(idx, weights=sizes, minlength=n + 1)[: n + 1]
        if record_floor <= cfg.eps:
            rec_times.append(pos)
            rec_sizes.append(sizes)
        else:
            keep = np.abs(sizes) >= record_floor
            if keep.any():
                rec_times.append(pos[keep])
                rec_sizes.append(sizes[keep])
        left -= m

    if cfg.include_big_jumps:
        big_rate = _mass_above_one(measure) * span
        n_big = int(rng_jump.poisson(big_rate)) if big_rate > 0 else 0
        if n_big:
            pos = rng_jump.random(n_big)
            sizes = _sample_big_jumps(measure, n_big, rng_jump)
            idx = (pos * n).astype(np.int64) + 1
            cells += np.bincount(idx, weights=sizes, minlength=n + 1)[: n + 1]
            rec_times.append(pos)
            rec_sizes.append(sizes)

    values += np.cumsum(cells)

    surrogate_var = 0.0
    if cfg.small_jump_mode == "gaussian_approx" and measure is not None:
        surrogate_var = small_jump_variance(measure, cfg.eps)
        if surrogate_var > 0:
            steps = rng_gauss.standard_normal(n) * math.sqrt(surrogate_var * dt)
            values[1:] += np.cumsum(steps)

    if anchor_zero:
        if not t0 <= 0.0 <= t1:
            raise ValueError("anchor_zero needs 0 inside t_span")
        values -= values[int(round(-t0 / dt))]

    times = np.concatenate(rec_times) if rec_times else np.empty(0)
    sizes = np.concatenate(rec_sizes) if rec_sizes else np.empty(0)
    meta = {
        "kind": "levy",
        "seed": cfg.seed,
        "n": n,
        "eps": cfg.eps,
        "small_jump_mode": cfg.small_jump_mode,
        "comp_rate": float(comp),
        "surrogate_variance": float(surrogate_var),
        "jump_record_floor": record_floor,
        "triplet": triplet_to_config(triplet),
        "version": __version__,
    }
    return SamplePath(
        n=n,
        values=values,
        t0=t0,
        t1=t1,
        jump_times=t0 + span * times if times.size else times,
        jump_sizes=sizes,
        meta=meta,
    )


def _mass_above_one(measure):
    if isinstance(measure, StablePower):
        return (measure.c_plus + measure.c_minus) / measure.alpha
    if isinstance(measure, AtomicSymmetric):
        return float(2.0 * measure.masses[measure.sizes > 1.0].sum())
    return 0.0  # tabulated tails carry no mass above their largest radius


def _sample_big_jumps(measure, count, rng):
    if isinstance(measure, StablePower):
        mag = rng.random(count) ** (-1.0 / measure.alpha)
        p_plus = measure.c_plus / (measure.c_plus + measure.c_minus)
        return mag * np.where(rng.random(count) < p_plus, 1.0, -1.0)
    sizes, masses = measure.sizes, measure.masses
    keep = sizes > 1.0
    probs = masses[keep] / masses[keep].sum()
    mag = rng.choice(sizes[keep], size=count, p=probs)
    return mag * np.where(rng.random(count) < 0.5, 1.0, -1.0)


def simulate_stable_increments(alpha, skew, n, seed, step=None):
    """n i.i.d. strictly stable increments via the Chambers-Mallows-Stuck sampler.

    Each increment is distributed as M_{alpha,skew}((0, step]) with Lebesgue
    control measure (step defaults to 1/n), so partial sums match the stable
    random measure of subintervals in law.  alpha=1 requires skew=0.
    """
    if not (0.0 < alpha <= 2.0):
        raise ValueError("alpha must lie in (0, 2]")
    if not (-1.0 <= skew <= 1.0):
        raise ValueError("skew must lie in [-1, 1]")
    if alpha == 1.0 and skew != 0.0:
        raise ValueError("alpha=1 requires skew=0")
    if step is None:
        step = 1.0 / n
    rng = rng_stream(seed, 7)
    u = rng.random(n)
    w = rng.standard_exponential(n)
    theta = np.pi * (u - 0.5)
    if alpha == 1.0:
        std = np.tan(theta)
    else:
        tan_half = math.tan(math.pi * alpha / 2.0)
        b = math.atan(skew * tan_half) / alpha
        s = (1.0 + (skew * tan_half) ** 2) ** (1.0 / (2.0 * alpha))
        std = (
            s
            * np.sin(alpha * (theta + b))
            / np.cos(theta) ** (1.0 / alpha)
            * (np.cos(theta - alpha * (theta + b)) / w) ** ((1.0 - alpha) / alpha)
        )
    return std * step ** (1.0 / alpha)


def levy_from_increments(increments, t0, t1, alpha, seed=None, meta=None):
    """Cumulate increments into a stable Levy path anchored at L(0) = 0."""
    increments = np.asarray(increments, dtype=float)
    n = increments.size
    values = np.concatenate(([0.0], np.cumsum(increments)))
    if t0 < 0 < t1:
        zero_idx = int(round(-t0 / (t1 - t0) * n))
        values = values - values[zero_idx]
    full_meta = {"kind": "stable_levy", "alpha": alpha, "version": __version__}
    if seed is not None:
        full_meta["seed"] = seed
    if meta:
        full_meta.update(meta)
    return SamplePath(n=n, values=values, t0=t0, t1=t1, meta=full_meta)


def integrate_path(path: SamplePath) -> SamplePath:
    """Cumulative trapezoidal integral on the same grid; jump list carried over."""
    v = path.values
    dt = path.dt
    inner = np.cumsum((v[1:] + v[:-1]) * (dt / 2.0))
    values = np.concatenate(([0.0], inner))
    meta = dict(path.meta)
    meta["integrated"] = int(meta.get("integrated", 0)) + 1
    return SamplePath(
        n=path.n,
        values=values,
        t0=path.t0,
        t1=path.t1,
        jump_times=path.jump_times.copy(),
        jump_sizes=path.jump_sizes.copy(),
        meta=meta,
    )


# ---------------------------------------------------------------------------
# serialization: CSV for the grid values, JSON sidecar for jumps + metadata


def write_path_csv(path: SamplePath, fileobj):
    close = False
    if isinstance(fileobj, str):
        fileobj = open(fileobj, "w", encoding="utf-8")
        close = True
    try:
        fileobj.write("t,value\n")
        for t, v in zip(path.times(), path.values):
            fileobj.write(f"{fmt17(t)},{fmt17(v)}\n")
    finally:
        if close:
            fileobj.close()


def write_path_sidecar(path: SamplePath, fileobj):
    payload = {
        "t0": path.t0,
        "t1": path.t1,
        "n": path.n,
        "meta": path.meta,
        "jumps": {
            "time": path.jump_times.tolist(),
            "size": path.jump_sizes.tolist(),
        },
    }
    close = False
    if isinstance(fileobj, str):
        fileobj = open(fileobj, "w", encoding="utf-8")
        close = True
    try:
        json.dump(payload, fileobj)
        fileobj.write("\n")
    finally:
        if close:
            fileobj.close()


def save_path(path: SamplePath, prefix):
    write_path_csv(path, f"{prefix}.csv")
    write_path_sidecar(path, f"{prefix}.json")
    return f"{prefix}.csv", f"{prefix}.json"


def load_path(csv_file, sidecar_file=None) -> SamplePath:
    if isinstance(csv_file, str):
        with open(csv_file, "r", encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = csv_file.read()
    rows = text.strip().splitlines()[1:]
    data = np.loadtxt(io.StringIO("\n".join(rows)), delimiter=",")
    t, v = data[:, 0], data[:, 1]
    meta, jt, js = {}, np.empty(0), np.empty(0)
    if sidecar_file is not None:
        with open(sidecar_file, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        meta = payload.get("meta", {})
        jt = np.asarray(payload["jumps"]["time"], dtype=float)
        js = np.asarray(payload["jumps"]["size"], dtype=float)
    return SamplePath(
        n=len(v) - 1,
        values=v,
        t0=float(t[0]),
        t1=float(t[-1]),
        jump_times=jt,
        jump_sizes=js,
        meta=meta,
    )
