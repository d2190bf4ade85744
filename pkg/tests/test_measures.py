import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multifrac.measures import (
    INFINITE,
    AtomicSymmetric,
    EstimationError,
    GeneratingTriplet,
    StablePower,
    TabulatedTail,
    blumenthal_getoor,
    compensator_drift,
    example2_measure,
    is_infinite,
    measure_from_config,
    measure_to_config,
    one_sided,
    quadratic_mass,
    sample_jump_sizes,
    small_jump_variance,
    symmetric_stable,
    tail_mass,
    triplet_from_config,
    triplet_to_config,
)
from multifrac.util import rng_stream


def brute_tail(measure, a, b, n=2_000_000):
    """Quadrature oracle for the power-density tail mass."""
    x = np.linspace(a, b, n)
    if isinstance(measure, StablePower):
        dens = (measure.c_plus + measure.c_minus) * x[1:] ** (-1 - measure.alpha)
        return float(np.trapezoid(np.concatenate(([dens[0]], dens)), x))
    raise TypeError


class TestTailMass:
    def test_stable_closed_form(self):
        m = StablePower(1.0, 1.0, 1.0)
        assert tail_mass(m, 0.5, 1.0) == pytest.approx(2.0, rel=1e-14)

    def test_stable_against_quadrature(self):
        m = StablePower(1.3, 0.7, 0.2)
        got = tail_mass(m, 0.1, 0.9)
        assert got == pytest.approx(brute_tail(m, 0.1, 0.9), rel=1e-6)

    def test_atomic_counts_both_signs(self):
        m = AtomicSymmetric(((0.5, 3.0),))
        assert tail_mass(m, 0.25, 1.0) == 6.0

    def test_infinite_total_mass_flag(self):
        m = StablePower(1.2, 0.5, 0.5)
        assert is_infinite(tail_mass(m, 0.0, 1.0))
        assert tail_mass(m, 0.0, 1.0) == INFINITE

    def test_additivity(self):
        m = StablePower(0.7, 0.4, 1.1)
        whole = tail_mass(m, 0.01, 1.0)
        parts = tail_mass(m, 0.01, 0.2) + tail_mass(m, 0.2, 1.0)
        assert parts == pytest.approx(whole, rel=1e-12)

    @given(
        alpha=st.floats(0.1, 1.9),
        a=st.floats(1e-4, 0.3),
        mid=st.floats(0.35, 0.6),
        b=st.floats(0.65, 1.0),
    )
    @settings(max_examples=50, deadline=None)
    def test_additivity_property(self, alpha, a, mid, b):
        m = StablePower(alpha, 1.0, 0.5)
        whole = tail_mass(m, a, b)
        assert tail_mass(m, a, mid) + tail_mass(m, mid, b) == pytest.approx(
            whole, rel=1e-12
        )

    def test_preconditions(self):
        m = symmetric_stable(1.0)
        with pytest.raises(ValueError):
            tail_mass(m, 0.5, 0.5)
        with pytest.raises(ValueError):
            tail_mass(m, -0.1, 0.5)


class TestCompensator:
    def test_symmetric_is_zero(self):
        assert compensator_drift(symmetric_stable(1.5), 0.25, 1.0) == 0.0
        assert compensator_drift(AtomicSymmetric(((0.5, 3.0),)), 0.1, 1.0) == 0.0

    def test_one_sided_closed_form(self):
        m = StablePower(1.5, 1.0, 0.0)
        assert compensator_drift(m, 0.25, 1.0) == pytest.approx(2.0, rel=1e-14)

    def test_one_sided_quadrature(self):
        m = StablePower(0.8, 1.0, 0.0)
        x = np.linspace(0.05, 1.0, 2_000_001)
        oracle = np.trapezoid(x ** (-0.8), x)
        assert compensator_drift(m, 0.05, 1.0) == pytest.approx(oracle, rel=1e-8)

    def test_divergence_flag(self):
        m = StablePower(1.2, 1.0, 0.0)
        flag = compensator_drift(m, 0.0, 1.0)
        assert is_infinite(flag) and flag.sign == 1

    def test_alpha_below_one_converges_at_zero(self):
        m = StablePower(0.5, 1.0, 0.0)
        # integral of x^(-0.5) over (0,1] = 2
        assert compensator_drift(m, 0.0, 1.0) == pytest.approx(2.0, rel=1e-14)


class TestSmallJumpVariance:
    def test_stable_closed_form(self):
        assert small_jump_variance(StablePower(1.0, 1.0, 1.0), 1.0) == pytest.approx(
            2.0, rel=1e-14
        )

    def test_monotone_limit(self):
        m = symmetric_stable(1.4)
        assert small_jump_variance(m, 1e-6) < 1e-3
        assert small_jump_variance(m, 1e-6) > 0

    def test_atomic_no_atoms_below(self):
        assert small_jump_variance(AtomicSymmetric(((0.5, 3.0),)), 0.25) == 0.0

    def test_additivity(self):
        m = StablePower(1.1, 0.3, 0.9)
        lhs = small_jump_variance(m, 0.125) + quadratic_mass(m, 0.125, 1.0)
        assert lhs == pytest.approx(small_jump_variance(m, 1.0), rel=1e-12)


class TestBlumenthalGetoor:
    def test_stable_exact(self):
        assert blumenthal_getoor(StablePower(1.2, 1.0, 1.0)) == 1.2

    def test_tabulated_from_stable_samples(self):
        m = symmetric_stable(1.4)
        radii = [2.0 ** -j for j in range(20, 3, -1)]
        tails = [tail_mass(m, r, 1.0) for r in radii]
        tab = TabulatedTail(tuple(radii), tuple(tails))
        est = blumenthal_getoor(tab, j_min=4, j_max=20)
        assert est == pytest.approx(1.4, abs=0.02)

    def test_example2_regression(self):
        m = example2_measure(0.5, 0.6, 0.62, 0.65, j0=2, n_max=5)
        est = blumenthal_getoor(m, j_min=4, j_max=200)
        assert est == pytest.approx(0.5, abs=0.05)

    def test_single_atom_is_zero(self):
        m = AtomicSymmetric(((0.5, 3.0),))
        assert blumenthal_getoor(m) == pytest.approx(0.0, abs=0.01)

    def test_too_few_scales(self):
        tab = TabulatedTail((0.25, 0.5), (4.0, 1.0))
        with pytest.raises(EstimationError):
            blumenthal_getoor(tab, j_min=1, j_max=2)


class TestExample2:
    def test_recursion_value(self):
        m = example2_measure(0.5, 0.6, 0.62, 0.65, j0=2, n_max=1)
        j1 = (2 * 0.62 + 1.0) / 0.3
        assert j1 == pytest.approx(7.46666666666667)
        assert m.atoms[1][0] == pytest.approx(2.0 ** -j1, rel=1e-12)
        assert m.atoms[1][1] == pytest.approx(2.0 ** (j1 * 0.5), rel=1e-12)

    def test_single_pair(self):
        m = example2_measure(0.5, 0.6, 0.62, 0.65, j0=2, n_max=0)
        assert m.atoms == ((0.25, 2.0),)

    def test_violated_denominator(self):
        with pytest.raises(ValueError, match="2\\*beta - 2\\*gamma_ex \\+ alpha_ex"):
            example2_measure(0.5, 0.6, 0.7, 0.9, j0=2, n_max=3)

    def test_violated_ordering(self):
        with pytest.raises(ValueError, match="alpha_ex < delta_ex"):
            example2_measure(0.5, 0.7, 0.65, 0.72, j0=2, n_max=3)


class TestOneSided:
    def test_drops_negative_side(self):
        m = one_sided(StablePower(1.2, 0.7, 0.4))
        assert m.c_minus == 0.0 and m.c_plus == 0.7 and m.alpha == 1.2

    def test_idempotent(self):
        m = one_sided(one_sided(StablePower(0.9, 1.0, 1.0)))
        assert m.c_minus == 0.0

    def test_rejects_atomic(self):
        with pytest.raises(TypeError):
            one_sided(AtomicSymmetric(((0.5, 1.0),)))


class TestSampling:
    def test_stable_band_law(self):
        m = symmetric_stable(1.2)
        rng = rng_stream(5, 11)
        x = sample_jump_sizes(m, 0.01, 1.0, 200_000, rng)
        assert np.all((np.abs(x) > 0.01) & (np.abs(x) <= 1.0))
        # empirical band mass vs normalized tail over a sub-band
        frac = np.mean(np.abs(x) > 0.1)
        expect = tail_mass(m, 0.1, 1.0) / tail_mass(m, 0.01, 1.0)
        assert frac == pytest.approx(expect, abs=0.01)
        assert abs(np.mean(np.sign(x))) < 0.01

    def test_atomic_rates(self):
        m = AtomicSymmetric(((0.5, 3.0), (0.125, 1.0)))
        rng = rng_stream(6, 11)
        x = sample_jump_sizes(m, 0.1, 1.0, 100_000, rng)
        assert set(np.unique(np.abs(x))) == {0.125, 0.5}
        assert np.mean(np.abs(x) == 0.5) == pytest.approx(0.75, abs=0.01)

    def test_tabulated_matches_interpolated_tail(self):
        m = symmetric_stable(1.1)
        radii = [2.0 ** -j for j in range(16, 0, -1)]
        tails = [tail_mass(m, r, 1.0) for r in radii]
        tab = TabulatedTail(tuple(radii), tuple(tails))
        rng = rng_stream(7, 11)
        x = sample_jump_sizes(tab, 0.01, 0.5, 50_000, rng)
        frac = np.mean(np.abs(x) > 0.1)
        expect = tail_mass(tab, 0.1, 0.5) / tail_mass(tab, 0.01, 0.5)
        assert frac == pytest.approx(expect, abs=0.015)


class TestConfig:
    @pytest.mark.parametrize(
        "measure",
        [
            StablePower(1.2, 0.5, 0.25),
            AtomicSymmetric(((0.5, 3.0), (0.25, 1.5))),
            TabulatedTail((0.01, 0.1, 1.0), (50.0, 4.0, 0.0)),
            None,
        ],
    )
    def test_measure_roundtrip(self, measure):
        assert measure_from_config(measure_to_config(measure)) == measure

    def test_triplet_roundtrip(self):
        trip = GeneratingTriplet(0.5, 2.0, symmetric_stable(0.8))
        assert triplet_from_config(triplet_to_config(trip)) == trip

    def test_documented_example(self):
        m = measure_from_config("kind=stable\nalpha=1.2\nc_plus=1.0\nc_minus=1.0")
        assert m == StablePower(1.2, 1.0, 1.0)
