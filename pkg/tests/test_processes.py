import math

import numpy as np
import pytest

from thirdlaw.errors import ArgumentError, DomainError, ProtocolError, StructureError
from thirdlaw.processes import (TRACE_COLUMNS, Adiabatic, Isothermal, Measure, Thermalize, apply_adiabatic,
                                apply_isothermal, ratio_temperature, run_protocol, staircase,
                                write_staircase_csv)
from thirdlaw.spectra import custom, degenerate_ground, harmonic, levels_at, two_level
from thirdlaw.thermo import EntropySurface, entropy, gibbs_populations, thermal_state

from conftest import LN2, harmonic_crossing, harmonic_entropy


def two_level_surface(gap):
    return EntropySurface.from_model(two_level(), gap)


class TestApplyAdiabatic:
    def test_harmonic_scale_down(self):
        state = thermal_state(harmonic(), 1.0, 1.0)
        after = apply_adiabatic(state, 0.5)
        assert after.temperature == 0.5
        expected = gibbs_populations(levels_at(harmonic(), 0.5, len(state.levels)), 0.5)
        np.testing.assert_allclose(after.populations, expected.populations, rtol=1e-12, atol=1e-300)

    def test_two_level_scale_up(self):
        state = thermal_state(two_level(), 1.0, 1.0)
        after = apply_adiabatic(state, 2.0)
        assert after.temperature == 2.0
        np.testing.assert_allclose(after.populations, gibbs_populations(after.levels, 2.0).populations,
                                   rtol=1e-12)

    def test_populations_bit_identical(self):
        state = thermal_state(harmonic(), 1.0, 0.7)
        assert np.array_equal(apply_adiabatic(state, 3.0).populations, state.populations)

    def test_ground_state_stays_ground(self):
        state = thermal_state(harmonic(), 1.0, 0.0)
        after = apply_adiabatic(state, 4.0)
        assert after.temperature == 0.0
        assert after.populations[0] == 1.0

    def test_non_scale_step_has_no_temperature(self):
        model = custom([(0.0, [(0, 1), (1, 1), (3, 1)]), (1.0, [(0, 1), (2, 1), (3, 1)])])
        after = apply_adiabatic(thermal_state(model, 0.0, 1.0), 1.0)
        assert after.temperature is None
        # diagnostic only: first-gap ratio temperature is 2 because E_1 doubled
        assert ratio_temperature(after) == pytest.approx(2.0, rel=1e-14)

    def test_degeneracy_change_rejected(self):
        model = degenerate_ground([(0.0, 1), (2.0, 2)], domain=(0.5, 4.0))
        with pytest.raises(StructureError):
            apply_adiabatic(thermal_state(model, 1.0, 1.0), 3.0)

    def test_target_outside_domain(self):
        with pytest.raises(DomainError):
            apply_adiabatic(thermal_state(harmonic(), 1.0, 1.0), -2.0)


class TestApplyIsothermal:
    def test_two_level_closed_form(self):
        after = apply_isothermal(thermal_state(two_level(), 1.0, 1.0), 2.0, 1.0)
        w = math.exp(-2.0)
        np.testing.assert_allclose(after.populations, [1 / (1 + w), w / (1 + w)], rtol=1e-15)

    def test_no_op(self):
        state = thermal_state(two_level(), 1.0, 1.0)
        trace = run_protocol(two_level(), state, [Isothermal(1.0, 1.0)])
        assert trace[-1].heat == 0.0
        assert np.array_equal(trace.final_state.populations, state.populations)

    def test_zero_temperature_bath(self):
        state = thermal_state(degenerate_ground(2), 1.0, 1.0)
        after = apply_isothermal(state, 1.0, 0.0)
        assert after.populations[0] == 1.0
        assert entropy(state) - entropy(after) == pytest.approx(entropy(state) - LN2, abs=0)


class TestStaircase:
    def test_scale_pair_geometric_law(self):
        result = staircase(two_level_surface(1.0), two_level_surface(2.0), 1.0, 1e-3)
        assert result.steps == math.ceil(math.log2(1000)) == 10
        assert not result.reached_zero
        n = np.arange(len(result.temperatures))
        np.testing.assert_allclose(result.temperatures, 2.0 ** -n, rtol=1e-10)

    def test_temperatures_strictly_decrease(self):
        result = staircase(two_level_surface(1.0), two_level_surface(1.5), 2.0, 0.0, max_steps=300)
        logs = np.array(result.log_temperatures)
        assert np.all(np.diff(logs) < 0)

    def test_nernst_pair_never_reaches_zero(self):
        result = staircase(two_level_surface(1.0), two_level_surface(3.0), 1.0, 0.0, max_steps=100)
        assert result.steps == 100
        assert not result.reached_zero
        assert result.final_log_temperature > -math.inf

    def test_survives_ten_thousand_rounds(self):
        upper = EntropySurface.from_model(harmonic(), 1.0)
        lower = EntropySurface.from_model(harmonic(), 1.1)
        result = staircase(upper, lower, 1.0, 0.0, max_steps=10_000, record_trace=False)
        assert result.steps == 10_000 and not result.reached_zero
        assert math.isfinite(result.final_log_temperature)

    def test_violating_pair_reaches_exact_zero(self):
        upper = EntropySurface.from_model(degenerate_ground(2), 1.0)
        lower = EntropySurface.from_model(harmonic(), 1.0)
        t_star = harmonic_crossing()
        result = staircase(upper, lower, 1.0, 0.0)
        assert result.reached_zero
        assert result.final_temperature == 0.0
        assert result.trace[-1].temperature == 0.0
        # the last isotherm is the first one at or below the crossing S_B(T*) = ln 2
        iso = [r.temperature for r in result.trace if r.kind == "isothermal"]
        assert iso[-1] <= t_star * (1 + 1e-12)
        assert all(t > t_star for t in iso[:-1])
        assert harmonic_entropy(1.0, t_star) == pytest.approx(LN2, rel=1e-14)

    def test_crossed_curves_rejected(self):
        with pytest.raises(ProtocolError):
            staircase(two_level_surface(2.0), two_level_surface(1.0), 1.0, 1e-3)

    def test_lower_curve_with_more_zero_entropy_rejected(self):
        with pytest.raises(ProtocolError):
            staircase(EntropySurface.from_model(harmonic(), 1.0), EntropySurface.from_model(degenerate_ground(2), 1.0),
                      1.0, 0.0)

    @pytest.mark.parametrize("t0,target,steps", [(0.0, 0.0, 5), (1.0, 2.0, 5), (1.0, 0.0, 0)])
    def test_bad_arguments(self, t0, target, steps):
        with pytest.raises(ArgumentError):
            staircase(two_level_surface(1.0), two_level_surface(2.0), t0, target, steps)

    def test_trace_bookkeeping(self):
        upper, lower = two_level_surface(1.0), two_level_surface(2.0)
        result = staircase(upper, lower, 1.0, 0.1)
        for rec in result.trace:
            if rec.kind == "adiabatic":
                assert rec.heat == 0.0
                assert rec.entropy == pytest.approx(upper.entropy(rec.temperature), rel=1e-12)
            if rec.kind == "isothermal":
                assert rec.heat == pytest.approx(rec.temperature * (lower.entropy(rec.temperature)
                                                                    - upper.entropy(rec.temperature)), rel=1e-12)

    def test_csv(self, tmp_path):
        result = staircase(two_level_surface(1.0), two_level_surface(2.0), 1.0, 1e-3)
        path = write_staircase_csv(result, tmp_path / "s.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == "step,temperature,entropy,heat"
        assert len(lines) == 11
        assert float(lines[-1].split(",")[1]) == pytest.approx(2.0 ** -10, rel=1e-10)

    def test_csv_keeps_underflowed_temperatures(self, tmp_path):
        upper = EntropySurface.from_model(harmonic(), 1.0)
        lower = EntropySurface.from_model(harmonic(), 2.0)
        result = staircase(upper, lower, 1.0, 0.0, max_steps=1200)
        assert result.temperatures[-1] == 0.0 and math.isfinite(result.final_log_temperature)
        last = (tmp_path / "s.csv")
        write_staircase_csv(result, last)
        mantissa, exponent = last.read_text().splitlines()[-1].split(",")[1].split("e")
        assert float(mantissa) > 0 and int(exponent) < -320
        assert int(exponent) == math.floor(result.final_log_temperature / math.log(10))


class TestRunProtocol:
    def test_empty(self):
        state = thermal_state(two_level(), 1.0, 1.0)
        trace = run_protocol(two_level(), state, [])
        assert len(trace) == 1 and trace[0].kind == "initial"

    def test_one_staircase_round(self):
        state = thermal_state(two_level(), 1.0, 1.0)
        trace = run_protocol(two_level(), state, [Isothermal(2.0), Adiabatic(1.0)])
        assert trace.final_state.temperature == pytest.approx(0.5, rel=1e-15)
        iso = trace[1]
        assert iso.heat == pytest.approx(1.0 * (iso.entropy - trace[0].entropy), rel=1e-14)
        assert trace[2].heat == 0.0 and trace[2].entropy == iso.entropy

    def test_measure_collapses(self):
        state = thermal_state(harmonic(), 1.0, 1.0)
        trace = run_protocol(harmonic(), state, [Measure(seed=11)])
        final = trace.final_state.populations
        assert sorted(final.tolist())[-1] == 1.0 and np.count_nonzero(final) == 1
        assert trace[-1].heat == 0.0

    def test_thermalize_heat_is_energy_change(self):
        state = thermal_state(harmonic(), 1.0, 1.0)
        trace = run_protocol(harmonic(), state, [Thermalize(0.5)])
        assert trace[-1].heat == pytest.approx(trace.final_state.mean_energy - state.mean_energy, rel=1e-14)
        assert trace[-1].work == 0.0

    def test_failure_carries_partial_trace(self):
        state = thermal_state(harmonic(), 1.0, 1.0)
        with pytest.raises(DomainError) as info:
            run_protocol(harmonic(), state, [Adiabatic(2.0), Adiabatic(-1.0)])
        assert len(info.value.partial_trace) == 2

    def test_csv_columns(self, tmp_path):
        state = thermal_state(two_level(), 1.0, 1.0)
        trace = run_protocol(two_level(), state, [Isothermal(2.0), Adiabatic(1.0)])
        text = trace.to_csv(tmp_path / "t.csv")
        assert text.splitlines()[0] == ",".join(TRACE_COLUMNS)
        assert (tmp_path / "t.csv").read_bytes() == text.encode()
