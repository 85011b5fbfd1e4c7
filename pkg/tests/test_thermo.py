import math

import numpy as np
import pytest
from scipy import integrate as sp_integrate

from thirdlaw.errors import ArgumentError, NumericalError, ValidationError
from thirdlaw.spectra import Level, box, custom, degenerate_ground, harmonic, levels_at, two_level
from thirdlaw.thermo import (EntropySurface, ThermalState, entropy, entropy_via_integral, gibbs_populations,
                             nernst_check, partition_function, planck_check, specific_heat, thermal_state)

from conftest import (LN2, harmonic_entropy, two_level_entropy, two_level_heat_capacity,
                      two_level_populations)

TWO = (Level(0.0), Level(1.0))


class TestThermalState:
    def test_populations_must_sum_to_one(self):
        with pytest.raises(ValidationError):
            ThermalState(np.array([0.5, 0.4]), TWO)

    def test_negative_population(self):
        with pytest.raises(ValidationError):
            ThermalState(np.array([1.2, -0.2]), TWO)

    def test_populations_are_read_only(self):
        state = gibbs_populations(TWO, 1.0)
        with pytest.raises(ValueError):
            state.populations[0] = 0.0


class TestPartitionFunction:
    def test_two_level(self):
        assert partition_function(TWO, 1.0) == pytest.approx(1.0 + math.exp(-1.0), rel=1e-15)
        assert partition_function(TWO, 1.0) == pytest.approx(1.367879, abs=1e-6)

    def test_high_temperature_counts_microstates(self):
        levels = levels_at(degenerate_ground(3), 1.0, 5)
        assert partition_function(levels, 1e15) == pytest.approx(3 + 4, rel=1e-12)

    def test_degenerate_ground(self):
        levels = levels_at(degenerate_ground(2), 1.0, 2)
        assert partition_function(levels, 1.0) == pytest.approx(2.0 + math.exp(-1.0), rel=1e-15)

    def test_zero_temperature_rejected(self):
        with pytest.raises(ArgumentError):
            partition_function(TWO, 0.0)


class TestGibbs:
    def test_two_level_closed_form(self):
        np.testing.assert_allclose(gibbs_populations(TWO, 1.0).populations, two_level_populations(1.0, 1.0),
                                   rtol=1e-15)
        np.testing.assert_allclose(gibbs_populations(TWO, 1.0).populations, [0.731059, 0.268941], atol=1e-6)

    def test_infinite_temperature_limit(self):
        np.testing.assert_allclose(gibbs_populations(TWO, 1e300).populations, [0.5, 0.5], rtol=1e-15)

    def test_zero_temperature_is_ground_only(self):
        levels = levels_at(harmonic(), 1.0, 6)
        assert gibbs_populations(levels, 0.0).populations.tolist() == [1.0, 0, 0, 0, 0, 0]

    @pytest.mark.parametrize("model,x", [(two_level(), 0.7), (harmonic(), 1.3), (box(), 0.8),
                                         (degenerate_ground(3), 1.0)])
    @pytest.mark.parametrize("T", [0.1, 1.0, 10.0])
    def test_boltzmann_ratios_per_microstate(self, model, x, T):
        state = thermal_state(model, x, T)
        p, g, e = state.populations, state.degeneracies, state.energies
        keep = p > 1e-300
        ratios = (p[keep] / g[keep]) / (p[0] / g[0])
        np.testing.assert_allclose(ratios, np.exp(-e[keep] / T), rtol=1e-10)

    def test_negative_temperature(self):
        with pytest.raises(ArgumentError):
            gibbs_populations(TWO, -1.0)


class TestEntropy:
    def test_pure_ground(self):
        assert entropy(gibbs_populations(TWO, 0.0)) == 0.0

    def test_degenerate_ground_at_zero(self):
        assert entropy(gibbs_populations(levels_at(degenerate_ground(2), 1.0, 3), 0.0)) == math.log(2)

    def test_two_level(self):
        s = entropy(gibbs_populations(TWO, 1.0))
        assert s == pytest.approx(two_level_entropy(1.0, 1.0), rel=1e-14)
        assert s == pytest.approx(0.582203, abs=1e-6)

    def test_harmonic_closed_form(self):
        assert entropy(thermal_state(harmonic(), 1.0, 1.0)) == pytest.approx(harmonic_entropy(1.0, 1.0), rel=1e-14)


class TestSpecificHeat:
    def test_schottky(self):
        assert specific_heat(TWO, 1.0) == pytest.approx(two_level_heat_capacity(1.0, 1.0), rel=1e-14)
        assert specific_heat(TWO, 1.0) == pytest.approx(0.196612, abs=1e-6)

    def test_limits(self):
        assert specific_heat(TWO, 1e8) < 1e-15
        assert specific_heat(TWO, 1e-3) == 0.0

    def test_zero_temperature_rejected(self):
        with pytest.raises(ArgumentError):
            specific_heat(TWO, 0.0)


class TestEntropyViaIntegral:
    def test_zero_temperature(self):
        surf = EntropySurface.from_model(degenerate_ground(2), 1.0)
        assert entropy_via_integral(surf, 0.0) == math.log(2)

    def test_two_level_matches_direct(self):
        surf = EntropySurface(TWO)
        assert entropy_via_integral(surf, 1.0) == pytest.approx(entropy(gibbs_populations(TWO, 1.0)), abs=1e-9)

    def test_harmonic_matches_closed_form(self):
        # closed form -ln(1 - e^-1) + e^-1 / (1 - e^-1) evaluates to 1.0406518...
        surf = EntropySurface.from_model(harmonic(), 1.0)
        assert harmonic_entropy(1.0, 1.0) == pytest.approx(1.0406518522564083, rel=1e-15)
        assert entropy_via_integral(surf, 1.0) == pytest.approx(harmonic_entropy(1.0, 1.0), abs=1e-9)

    def test_heat_integral_against_scipy(self):
        surf = EntropySurface(levels_at(box(), 1.0, 6))
        e = np.array([lv.energy for lv in surf.levels])

        def c_over_t(t):
            w = np.exp(-e / t)
            p = w / w.sum()
            return (p @ e ** 2 - (p @ e) ** 2) / t ** 3

        expected, _ = sp_integrate.quad(c_over_t, 1e-3, 5.0, epsabs=1e-14, epsrel=1e-13, limit=200)
        value, err = surf.heat_integral(1e-3, 5.0)
        assert value == pytest.approx(expected, rel=1e-10)

    def test_tolerance_unreachable(self):
        surf = EntropySurface.from_model(harmonic(), 1.0)
        with pytest.raises(NumericalError):
            entropy_via_integral(surf, 1.0, quad_tol=1e-30)

    def test_negative_temperature(self):
        with pytest.raises(ArgumentError):
            entropy_via_integral(EntropySurface(TWO), -1.0)


class TestEntropySurface:
    def test_merges_coincident_energies(self):
        surf = EntropySurface([Level(0.0), Level(0.0), Level(1.0, 2)])
        assert surf.ground_degeneracy == 2
        assert surf.zero_entropy == LN2
        assert surf.distinct_energies == 2

    @pytest.mark.parametrize("T", [0.3, 1.0, 7.0])
    def test_excess_matches_direct(self, T):
        levels = levels_at(degenerate_ground(2), 0.5, 60)
        surf = EntropySurface(levels)
        direct = entropy(gibbs_populations(levels, T)) - math.log(2)
        assert surf.excess(T) == pytest.approx(direct, rel=1e-12)

    def test_excess_survives_cancellation(self):
        # S - ln 2 rounds to 0 here; first order in x = e^(-D/T) / 2 gives x (1 + D/T)
        surf = EntropySurface(levels_at(degenerate_ground(2), 0.5, 60))
        x = math.exp(-50.0) / 2
        assert entropy(gibbs_populations(surf.levels, 0.01)) - math.log(2) == 0.0
        assert surf.excess(0.01) == pytest.approx(x * 51.0, rel=1e-15 + 51 * x)

    @pytest.mark.parametrize("beta", [2.0, 20.0, 200.0, 600.0])
    def test_log_excess_matches_excess(self, beta):
        surf = EntropySurface(levels_at(harmonic(), 1.0, 40))
        assert surf.log_excess(math.log(beta)) == pytest.approx(math.log(surf.excess(1.0 / beta)), rel=1e-12)

    def test_log_excess_beyond_double_range(self):
        # deep branch: ln a - b D + ln(1 + b D) with D = 1, a = 1
        surf = EntropySurface(TWO)
        b = 1e6
        assert surf.log_excess(math.log(b)) == pytest.approx(-b + math.log1p(b), rel=1e-15)

    def test_entropy_is_increasing(self):
        surf = EntropySurface(levels_at(box(), 1.0, 20))
        s = [surf.entropy(t) for t in np.geomspace(0.05, 50, 80)]
        assert all(b > a for a, b in zip(s, s[1:]))


class TestNernstPlanck:
    def test_harmonic_holds(self):
        assert nernst_check(harmonic(), 0.5, 3.0)

    def test_constructed_violation(self):
        model = degenerate_ground([(0.0, 1), (2.0, 2)], domain=(0.5, 4.0))
        report = nernst_check(model, 1.0, 3.0)
        assert not report
        assert (report.entropy_first, report.entropy_second) == (0.0, math.log(2))

    def test_identity_case(self):
        assert nernst_check(two_level(), 1.0, 1.0)

    def test_custom_uses_tolerance(self):
        model = custom([(0.0, [(0, 2), (1, 1)]), (1.0, [(0, 2), (2, 1)])])
        assert nernst_check(model, 0.0, 1.0)

    def test_planck(self):
        assert planck_check(harmonic(), 1.0)
        assert not planck_check(degenerate_ground(2), 1.0)
        assert planck_check(box(), 1.0)

    def test_domain_checked(self):
        with pytest.raises(Exception):
            nernst_check(harmonic(), -1.0, 1.0)
