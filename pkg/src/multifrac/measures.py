"""Analytic Levy measures: tail masses, moments, compensators, example constructions.

A measure spec is one of StablePower, AtomicSymmetric or TabulatedTail; the
measure always lives on the line (d = 1).  All masses are jump intensities per
unit time.  Quantities that can be infinite (total mass near zero) are returned
as the tagged Infinite value, never as a sentinel float.
"""

import math
from dataclasses import dataclass

import numpy as np

from .util import ols_line


class EstimationError(RuntimeError):
    """Raised when a numeric estimator has too little usable data."""


class Infinite:
    """Tagged infinite quantity (signed). Compares against floats the obvious way."""

    __slots__ = ("sign",)

    def __init__(self, sign=1):
        if sign not in (-1, 1):
            raise ValueError("sign must be +1 or -1")
        self.sign = sign

    def __repr__(self):
        return "Infinite(+)" if self.sign > 0 else "Infinite(-)"

    def __float__(self):
        return math.inf * self.sign

    def __eq__(self, other):
        if isinstance(other, Infinite):
            return self.sign == other.sign
        return False

    def __hash__(self):
        return hash(("Infinite", self.sign))

    def __gt__(self, other):
        return self.sign > 0 and not (isinstance(other, Infinite) and other.sign > 0)

    def __lt__(self, other):
        return self.sign < 0 and not (isinstance(other, Infinite) and other.sign < 0)


INFINITE = Infinite(1)


def is_infinite(value):
    return isinstance(value, Infinite)


@dataclass(frozen=True)
class StablePower:
    """Two-sided power-law density c_plus*x^(-1-alpha) on x>0, c_minus on x<0."""

    alpha: float
    c_plus: float
    c_minus: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise ValueError(f"alpha must lie in (0,2), got {self.alpha}")
        if self.c_plus < 0 or self.c_minus < 0 or self.c_plus + self.c_minus <= 0:
            raise ValueError("need c_plus, c_minus >= 0 with c_plus + c_minus > 0")


def symmetric_stable(alpha, c_total=1.0):
    """Symmetric power measure with total density scale c_total split over signs."""
    return StablePower(alpha, c_total / 2.0, c_total / 2.0)


@dataclass(frozen=True)
class AtomicSymmetric:
    """Symmetric purely atomic measure: each (size, mass) atom sits at +size and -size.

    Masses are per sign, so an atom (s, m) contributes total rate 2*m.
    Sizes must be strictly decreasing.
    """

    atoms: tuple

    def __post_init__(self):
        atoms = tuple((float(s), float(m)) for s, m in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        sizes = [s for s, _ in atoms]
        if not atoms:
            raise ValueError("need at least one atom")
        if any(s <= 0 for s in sizes):
            raise ValueError("atom sizes must be positive")
        if any(m <= 0 for _, m in atoms):
            raise ValueError("atom masses must be positive")
        if any(a <= b for a, b in zip(sizes, sizes[1:])):
            raise ValueError("atom sizes must be strictly decreasing")

    @property
    def sizes(self):
        return np.array([s for s, _ in self.atoms])

    @property
    def masses(self):
        return np.array([m for _, m in self.atoms])


@dataclass(frozen=True)
class TabulatedTail:
    """Symmetric measure given by samples of the tail function r -> pi(D(r, r_max)).

    radii are strictly increasing, tails strictly decreasing and positive except
    possibly the last entry.  Between samples the tail is interpolated linearly
    in log-log coordinates; below the smallest radius it is extrapolated with
    the first segment's slope.  No mass lives above the largest radius.
    """

    radii: tuple
    tails: tuple

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        tails = tuple(float(t) for t in self.tails)
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "tails", tails)
        if len(radii) != len(tails) or len(radii) < 2:
            raise ValueError("need matching radii/tails with at least two samples")
        if any(r <= 0 for r in radii) or any(a >= b for a, b in zip(radii, radii[1:])):
            raise ValueError("radii must be positive and strictly increasing")
        if any(t < 0 for t in tails) or any(a < b for a, b in zip(tails, tails[1:])):
            raise ValueError("tails must be nonnegative and nonincreasing")
        if any(t <= 0 for t in tails[:-1]):
            raise ValueError("interior tail samples must be positive")

    def _segments(self):
        """Power segments (lo, hi, T_lo, slope): T(r) = T_lo * (r/lo)^(-slope) on [lo,hi]."""
        segs = []
        r, t = self.radii, self.tails
        for i in range(len(r) - 1):
            if t[i + 1] > 0:
                slope = math.log(t[i] / t[i + 1]) / math.log(r[i + 1] / r[i])
                segs.append((r[i], r[i + 1], t[i], slope))
            else:
                # mass t[i] spread as an atom pair at r[i] closes the support
                segs.append((r[i], r[i + 1], t[i], None))
        return segs

    def tail(self, radius):
        """Interpolated tail pi(D(radius, r_max)); Infinite when extrapolation diverges."""
        r, t = self.radii, self.tails
        if radius >= r[-1]:
            return 0.0
        if radius <= 0:
            first = self._segments()[0]
            if first[3] is None or first[3] > 0:
                return INFINITE
            return t[0]
        if radius < r[0]:
            first = self._segments()[0]
            slope = first[3] if first[3] is not None else 0.0
            return t[0] * (radius / r[0]) ** (-slope)
        idx = int(np.searchsorted(np.asarray(r), radius, side="right")) - 1
        lo, hi, t_lo, slope = self._segments()[min(idx, len(r) - 2)]
        if slope is None:
            return t_lo if radius < hi else 0.0
        return t_lo * (radius / lo) ** (-slope)


LevyMeasureSpec = StablePower | AtomicSymmetric | TabulatedTail


@dataclass(frozen=True)
class GeneratingTriplet:
    """Levy triplet (a, Q, pi); measure=None means no jump part at all."""

    drift_a: float = 0.0
    gaussian_q: float = 0.0
    measure: LevyMeasureSpec | None = None

    def __post_init__(self):
        if self.gaussian_q < 0:
            raise ValueError("gaussian_q must be >= 0")


def _require_band(a, b):
    if not (0 <= a < b):
        raise ValueError(f"need 0 <= a < b, got a={a}, b={b}")


def tail_mass(measure, a, b):
    """Mass pi(D(a,b)) of the annulus a < |x| <= b.

    Returns INFINITE for a == 0 when the measure has infinite total mass.
    """
    _require_band(a, b)
    if isinstance(measure, StablePower):
        if a == 0.0:
            return INFINITE
        c = measure.c_plus + measure.c_minus
        return c * (a ** -measure.alpha - b ** -measure.alpha) / measure.alpha
    if isinstance(measure, AtomicSymmetric):
        sizes, masses = measure.sizes, measure.masses
        keep = (sizes > a) & (sizes <= b)
        return float(2.0 * masses[keep].sum())
    if isinstance(measure, TabulatedTail):
        lo = measure.tail(a)
        hi = measure.tail(b)
        if is_infinite(lo):
            return INFINITE
        return max(lo - hi, 0.0)
    raise TypeError(f"not a measure spec: {measure!r}")


def _stable_signed_moment(measure, p, a, b):
    """(c_plus - c_minus) * integral_a^b x^p x^(-1-alpha) dx for signed p=1."""
    alpha = measure.alpha
    exponent = p - alpha
    if exponent == 0:
        return math.log(b / a)
    return (b ** exponent - a ** exponent) / exponent


def compensator_drift(measure, a, b):
    """Signed integral of x over D(a,b): the compensation drift per unit time.

    For a == 0 this diverges when the Blumenthal-Getoor exponent is >= 1;
    an Infinite value with the sign of the dominating side is returned.
    """
    _require_band(a, b)
    if isinstance(measure, StablePower):
        skew = measure.c_plus - measure.c_minus
        if a == 0.0:
            if measure.alpha >= 1.0:
                if skew == 0.0:
                    return 0.0  # symmetric principal value
                return Infinite(1 if skew > 0 else -1)
            exponent = 1.0 - measure.alpha
            return skew * (b ** exponent) / exponent
        return skew * _stable_signed_moment(measure, 1, a, b)
    if isinstance(measure, (AtomicSymmetric, TabulatedTail)):
        return 0.0  # symmetric by construction
    raise TypeError(f"not a measure spec: {measure!r}")


def quadratic_mass(measure, a, b):
    """Integral of x^2 over D(a,b) (both signs)."""
    _require_band(a, b)
    if isinstance(measure, StablePower):
        c = measure.c_plus + measure.c_minus
        exponent = 2.0 - measure.alpha
        return c * (b ** exponent - a ** exponent) / exponent
    if isinstance(measure, AtomicSymmetric):
        sizes, masses = measure.sizes, measure.masses
        keep = (sizes > a) & (sizes <= b)
        return float(2.0 * (masses[keep] * sizes[keep] ** 2).sum())
    if isinstance(measure, TabulatedTail):
        total = 0.0
        for lo, hi, t_lo, slope in measure._segments():
            s0, s1 = max(lo, a), min(hi, b)
            if s0 >= s1:
                continue
            if slope is None:
                continue
            coef = slope * t_lo * lo ** slope  # density coef * r^(-slope-1)
            exponent = 2.0 - slope
            if exponent == 0:
                total += coef * math.log(s1 / s0)
            else:
                total += coef * (s1 ** exponent - s0 ** exponent) / exponent
        # extrapolated mass below the table
        first = measure._segments()[0]
        lo0, _, t0, slope0 = first
        s1 = min(lo0, b)
        if a < s1 and slope0 is not None and slope0 < 2.0:
            coef = slope0 * t0 * lo0 ** slope0
            exponent = 2.0 - slope0
            total += coef * (s1 ** exponent - max(a, 0.0) ** exponent) / exponent
        return total
    raise TypeError(f"not a measure spec: {measure!r}")


def small_jump_variance(measure, eps):
    """Variance budget of neglected jumps: integral of x^2 over D(0, eps)."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return quadratic_mass(measure, 0.0, eps)


def blumenthal_getoor(measure, j_min=6, j_max=20):
    """Blumenthal-Getoor exponent beta, clamped to [0, 2].

    Exact for StablePower.  Otherwise a least-squares slope of
    log2 tail_mass(r, 1) against -log2 r over dyadic scales 2^-j,
    j in [j_min, j_max]; atomic measures are sampled just below their atom
    sizes so sparse tails regress on the scales where they actually move.
    """
    if isinstance(measure, StablePower):
        return measure.alpha
    if isinstance(measure, AtomicSymmetric):
        sizes = measure.sizes
        lo, hi = 2.0 ** -j_max, 2.0 ** -j_min
        radii = [s * (1.0 - 1e-12) for s in sizes if lo <= s <= hi]
        if len(radii) < 4:
            # finite-below-range measures regress flat scales (slope 0)
            smallest = float(sizes.min())
            radii += [
                2.0 ** -j
                for j in range(j_min, j_max + 1)
                if 2.0 ** -j < smallest
            ]
    elif isinstance(measure, TabulatedTail):
        lo = max(2.0 ** -j_max, measure.radii[0])
        hi = min(2.0 ** -j_min, measure.radii[-1] * (1 - 1e-12))
        radii = [2.0 ** -j for j in range(j_min, j_max + 1) if lo <= 2.0 ** -j <= hi]
    else:
        raise TypeError(f"not a measure spec: {measure!r}")
    points = []
    for r in radii:
        t = tail_mass(measure, r, max(1.0, r * 2))
        if not is_infinite(t) and t > 0:
            points.append((-math.log2(r), math.log2(t)))
    if len(points) < 4:
        raise EstimationError(
            f"only {len(points)} usable scales in [2^-{j_max}, 2^-{j_min}]; need 4"
        )
    xs, ys = zip(*points)
    slope, _, _ = ols_line(xs, ys)
    return min(max(slope, 0.0), 2.0)


def example2_measure(beta, alpha_ex, delta_ex, gamma_ex, j0, n_max):
    """Symmetric dyadic-atom measure with geometrically thinning scales.

    Atoms sit at sizes 2^-j_n with per-sign mass 2^(j_n*beta), where
    j_{n+1} = (j_n*delta_ex + 1) / (2*beta - 2*gamma_ex + alpha_ex) for
    n = 0..n_max-1.  Its Blumenthal-Getoor exponent is beta and the measure
    is built to make the frontier anomalous at h = 1/delta_ex.
    """
    if not 0.0 < beta < 1.0:
        raise ValueError(f"violated: 0 < beta < 1 (beta={beta})")
    if not beta < alpha_ex:
        raise ValueError(f"violated: beta < alpha_ex ({beta} !< {alpha_ex})")
    if not alpha_ex < delta_ex:
        raise ValueError(f"violated: alpha_ex < delta_ex ({alpha_ex} !< {delta_ex})")
    if not delta_ex < gamma_ex:
        raise ValueError(f"violated: delta_ex < gamma_ex ({delta_ex} !< {gamma_ex})")
    if not gamma_ex < 2.0 * beta:
        raise ValueError(f"violated: gamma_ex < 2*beta ({gamma_ex} !< {2 * beta})")
    denom = 2.0 * beta - 2.0 * gamma_ex + alpha_ex
    if not denom > 0.0:
        raise ValueError(f"violated: 2*beta - 2*gamma_ex + alpha_ex > 0 (got {denom})")
    if j0 < 1:
        raise ValueError(f"violated: j0 >= 1 (j0={j0})")
    if n_max < 0:
        raise ValueError(f"violated: n_max >= 0 (n_max={n_max})")
    j = float(j0)
    atoms = []
    for _ in range(int(n_max) + 1):
        atoms.append((2.0 ** -j, 2.0 ** (j * beta)))
        j = (j * delta_ex + 1.0) / denom
    return AtomicSymmetric(tuple(atoms))


def one_sided(measure):
    """Drop the negative side of a StablePower measure (Example-1 style)."""
    if not isinstance(measure, StablePower):
        raise TypeError("one_sided applies to StablePower measures")
    return StablePower(measure.alpha, measure.c_plus, 0.0)


def sample_jump_sizes(measure, a, b, count, rng):
    """Draw `count` signed jump sizes from the normalized restriction to D(a,b)."""
    _require_band(a, b)
    if count == 0:
        return np.empty(0)
    if isinstance(measure, StablePower):
        alpha = measure.alpha
        hi = a ** -alpha
        lo = b ** -alpha
        mag = (hi - rng.random(count) * (hi - lo)) ** (-1.0 / alpha)
        p_plus = measure.c_plus / (measure.c_plus + measure.c_minus)
        sign = np.where(rng.random(count) < p_plus, 1.0, -1.0)
        return mag * sign
    if isinstance(measure, AtomicSymmetric):
        sizes, masses = measure.sizes, measure.masses
        keep = (sizes > a) & (sizes <= b)
        sizes, masses = sizes[keep], masses[keep]
        if sizes.size == 0:
            raise ValueError("no atoms inside the requested band")
        probs = masses / masses.sum()
        mag = rng.choice(sizes, size=count, p=probs)
        sign = np.where(rng.random(count) < 0.5, 1.0, -1.0)
        return mag * sign
    if isinstance(measure, TabulatedTail):
        # inverse CDF of the restricted tail, solved by bisection in log radius
        t_a = measure.tail(a)
        t_b = measure.tail(b)
        if is_infinite(t_a):
            raise ValueError("infinite mass band; raise the truncation radius")
        u = rng.random(count)
        targets = t_b + u * (t_a - t_b)  # tail values to invert
        mag = np.empty(count)
        for i, target in enumerate(targets):
            mag[i] = _invert_tabulated_tail(measure, target, a, b)
        sign = np.where(rng.random(count) < 0.5, 1.0, -1.0)
        return mag * sign
    raise TypeError(f"not a measure spec: {measure!r}")


def _invert_tabulated_tail(measure, target, a, b):
    lo, hi = a, b
    for _ in range(80):
        mid = math.sqrt(lo * hi)
        t = measure.tail(mid)
        t = float(t) if not is_infinite(t) else math.inf
        if t > target:
            lo = mid
        else:
            hi = mid
    return math.sqrt(lo * hi)


# ---------------------------------------------------------------------------
# key=value config serialization


def measure_to_config(measure):
    if measure is None:
        return "kind=none"
    if isinstance(measure, StablePower):
        return (
            f"kind=stable\nalpha={measure.alpha!r}\n"
            f"c_plus={measure.c_plus!r}\nc_minus={measure.c_minus!r}"
        )
    if isinstance(measure, AtomicSymmetric):
        atoms = ",".join(f"{s!r}:{m!r}" for s, m in measure.atoms)
        return f"kind=atomic\natoms={atoms}"
    if isinstance(measure, TabulatedTail):
        radii = ",".join(repr(r) for r in measure.radii)
        tails = ",".join(repr(t) for t in measure.tails)
        return f"kind=tabulated\nradii={radii}\ntails={tails}"
    raise TypeError(f"not a measure spec: {measure!r}")


def parse_config_pairs(text):
    pairs = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"bad config line (expected key=value): {line!r}")
        key, value = line.split("=", 1)
        pairs[key.strip()] = value.strip()
    return pairs


def measure_from_config(text_or_pairs):
    pairs = (
        parse_config_pairs(text_or_pairs)
        if isinstance(text_or_pairs, str)
        else dict(text_or_pairs)
    )
    kind = pairs.get("kind", "stable").lower()
    if kind == "none":
        return None
    if kind == "stable":
        return StablePower(
            float(pairs["alpha"]),
            float(pairs.get("c_plus", 0.5)),
            float(pairs.get("c_minus", 0.5)),
        )
    if kind == "atomic":
        atoms = []
        for item in pairs["atoms"].split(","):
            size, mass = item.split(":")
            atoms.append((float(size), float(mass)))
        return AtomicSymmetric(tuple(atoms))
    if kind == "tabulated":
        radii = [float(x) for x in pairs["radii"].split(",")]
        tails = [float(x) for x in pairs["tails"].split(",")]
        return TabulatedTail(tuple(radii), tuple(tails))
    if kind == "example2":
        return example2_measure(
            float(pairs["beta"]),
            float(pairs["alpha_ex"]),
            float(pairs["delta_ex"]),
            float(pairs["gamma_ex"]),
            float(pairs["j0"]),
            int(pairs["n_max"]),
        )
    raise ValueError(f"unknown measure kind: {kind!r}")


def triplet_to_config(triplet):
    return (
        f"drift={triplet.drift_a!r}\ngaussian={triplet.gaussian_q!r}\n"
        + measure_to_config(triplet.measure)
    )


def triplet_from_config(text):
    pairs = parse_config_pairs(text)
    drift = float(pairs.pop("drift", 0.0))
    gaussian = float(pairs.pop("gaussian", 0.0))
    return GeneratingTriplet(drift, gaussian, measure_from_config(pairs))
