"""Cooling protocols.

Two layers live here. The microscopic one moves level populations around:
an adiabatic step copies populations onto the new spectrum, an isothermal
step re-thermalises at the bath temperature. The thermodynamic one runs the
isotherm/adiabat staircase between two entropy curves ``S_A(T)`` (the
"expanded" parameter, upper curve) and ``S_B(T)`` (the "compressed" one).

The staircase tracks ``ln T`` rather than ``T``: with a Nernst-respecting
pair the temperature falls geometrically and leaves the double range after
a few hundred rounds, long before a 10**4-round budget is spent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ArgumentError, NumericalError, ProtocolError, StructureError, ThirdLawError
from .numerics import bisect
from .spectra import SpectrumModel, levels_at
from .tables import csv_text, fmt_temperature, write_csv
from .thermo import EntropySurface, ThermalState, entropy, gibbs_populations

ZERO_ENTROPY_SLACK = 1e-15
ORDERING_GRID = 64
ORDERING_FLOOR = 1e-6
_MIN_LOG_T = -700.0  # below this exp(ln T) is no longer a normal double


@dataclass(frozen=True)
class Adiabatic:
    target: float


@dataclass(frozen=True)
class Isothermal:
    """Move to ``target`` in contact with a bath; ``temperature=None`` keeps the current one."""

    target: float
    temperature: float | None = None


@dataclass(frozen=True)
class Thermalize:
    temperature: float


@dataclass(frozen=True)
class Measure:
    seed: int


ProtocolStep = Adiabatic | Isothermal | Thermalize | Measure


@dataclass(frozen=True)
class TraceRecord:
    step_index: int
    kind: str
    parameter: float | None
    temperature: float | None
    entropy: float
    heat: float
    work: float
    log_temperature: float | None = None


TRACE_COLUMNS = ("step_index", "kind", "parameter", "temperature", "entropy", "heat", "work")


@dataclass(frozen=True)
class ProtocolTrace:
    records: tuple[TraceRecord, ...] = ()
    final_state: ThermalState | None = None

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, item):
        return self.records[item]

    def rows(self):
        for r in self.records:
            yield (r.step_index, r.kind, r.parameter,
                   fmt_temperature(r.temperature, r.log_temperature),
                   r.entropy, r.heat, r.work)

    def to_csv(self, path=None):
        """CSV text of the trace; also written to ``path`` when given."""
        if path is not None:
            write_csv(path, TRACE_COLUMNS, self.rows())
        return csv_text(TRACE_COLUMNS, self.rows())


@dataclass(frozen=True)
class StaircaseResult:
    steps: int
    reached_zero: bool
    final_temperature: float
    trace: ProtocolTrace
    final_log_temperature: float
    log_temperatures: tuple[float, ...] = field(default=(), repr=False)

    @property
    def temperatures(self) -> np.ndarray:
        """Temperature after each round, starting with ``T0`` (underflows to 0.0 when very deep)."""
        return np.exp(np.array(self.log_temperatures))


# -- microscopic steps -------------------------------------------------------

def _target_levels(state: ThermalState, target: float):
    if state.model is None:
        raise ArgumentError("state carries no spectrum model; build it with thermal_state()")
    return levels_at(state.model, target, len(state.levels))


def _scale_factor(source, target):
    e_src = np.array([lv.energy for lv in source])
    e_tgt = np.array([lv.energy for lv in target])
    nz = e_src > 0
    if not nz.any():
        return None
    s = e_tgt[nz][0] / e_src[nz][0]
    if np.all(e_tgt[~nz] == 0) and np.allclose(e_tgt, s * e_src, rtol=1e-12, atol=0.0):
        return float(s)
    return None


def apply_adiabatic(state: ThermalState, target: float) -> ThermalState:
    """Quasi-static, heat-free change of parameter: populations are carried over unchanged.

    The result is labelled ``T * s`` only when the new spectrum is an exact
    scale ``s`` of the old one and the input was a Gibbs state at ``T``.
    """
    new_levels = _target_levels(state, target)
    if [lv.degeneracy for lv in new_levels] != [lv.degeneracy for lv in state.levels]:
        raise StructureError(
            f"degeneracies change between parameters {state.parameter} and {target}; "
            "populations cannot be carried over level by level"
        )
    temperature = None
    if state.temperature == 0:
        temperature = 0.0
    elif state.temperature is not None:
        s = _scale_factor(state.levels, new_levels)
        if s is not None:
            temperature = state.temperature * s
    return ThermalState(state.populations, new_levels, temperature, state.model, target)


def apply_isothermal(state: ThermalState, target: float, bath_temperature: float) -> ThermalState:
    """Change parameter in contact with a bath: the result is the Gibbs state of the target spectrum."""
    if not bath_temperature >= 0:
        raise ArgumentError(f"bath temperature must be nonnegative, got {bath_temperature!r}")
    return gibbs_populations(_target_levels(state, target), bath_temperature, state.model, target)


def ratio_temperature(state: ThermalState) -> float | None:
    """Diagnostic ``-E_1 / ln((p_1/g_1) / (p_0/g_0))``; a reporting aid, not a state label."""
    p, g, e = state.populations, state.degeneracies, state.energies
    if e.size < 2 or p[0] == 0:
        return None
    if p[1] == 0:
        return 0.0
    ratio = (p[1] / g[1]) / (p[0] / g[0])
    if ratio >= 1:
        return None
    return float(-e[1] / math.log(ratio))


# -- staircase on entropy curves --------------------------------------------

def _excess_at(surface: EntropySurface, log_t: float) -> float:
    if log_t > _MIN_LOG_T:
        return surface.excess(math.exp(log_t))
    return math.exp(surface.log_excess(-log_t))


def _energy_at(surface: EntropySurface, log_t: float) -> float:
    return surface.mean_energy(math.exp(log_t)) if log_t > _MIN_LOG_T else 0.0


def check_ordering(upper: EntropySurface, lower: EntropySurface, t_low: float, t_high: float):
    """Raise ``ProtocolError`` unless ``S_lower(T) < S_upper(T)`` on a log grid over [t_low, t_high]."""
    ds0 = upper.zero_entropy - lower.zero_entropy
    if ds0 < 0:
        raise ProtocolError(
            f"lower curve has the larger zero-temperature entropy ({lower.zero_entropy:.6g} > "
            f"{upper.zero_entropy:.6g}); the curves must cross near T = 0"
        )
    for T in np.geomspace(t_low, t_high, ORDERING_GRID):
        if ds0 > 0:
            ok = lower.entropy(T) < upper.entropy(T)
        else:
            ok = lower.log_excess(-math.log(T)) < upper.log_excess(-math.log(T))
        if not ok:
            raise ProtocolError(f"entropy curves are not ordered at T={T:.6g}: S_B >= S_A")


def _deep_step(upper: EntropySurface, lower: EntropySurface, log_t: float):
    """Closed-form adiabat landing when only the first excited level matters to double precision.

    Solves ``ln a_A - D_A b' + ln(1 + D_A b') = ln a_B - D_B b + ln(1 + D_B b)``
    for ``b' = rho * b`` and returns ``ln T' = ln T - ln rho``.
    """
    da, db = upper.first_gap, lower.first_gap
    log_ratio_a = float(upper._exc_lng[0] - lower._exc_lng[0])
    u = math.exp(log_t) if log_t > _MIN_LOG_T else 0.0
    rho = db / da
    for _ in range(60):
        new = (db + u * (log_ratio_a + math.log(da * rho / db)
                         + math.log1p(u / (da * rho)) - math.log1p(u / db))) / da
        if new == rho:
            break
        rho = new
    return log_t - math.log(rho)


def _adiabat_solve(upper: EntropySurface, lower: EntropySurface, log_t: float, ds0: float):
    """``ln T'`` with ``S_A(T') = S_B(T)``, given that the landing is above ``T = 0``."""
    if ds0 > 0:
        target = _excess_at(lower, log_t) - ds0

        def f(s):
            return upper.excess(math.exp(s)) - target
    else:
        lam = -log_t
        beta = math.exp(lam) if lam < 709.0 else math.inf
        if beta >= lower.deep_beta and beta >= upper.deep_beta and lower.first_gap >= upper.first_gap:
            landed = _deep_step(upper, lower, log_t)
            landed_beta = math.exp(-landed) if -landed < 709.0 else math.inf
            if landed_beta >= upper.deep_beta:
                return landed
        target = lower.log_excess(lam)

        def f(s):
            return upper.log_excess(-s) - target

    hi = log_t
    if not f(hi) > 0:
        raise ProtocolError(f"entropy curves are not ordered at ln T={log_t:.6g}")
    width = 0.5
    lo = hi - width
    while f(lo) > 0:
        width *= 2.0
        lo = hi - width
        if width > 1e6:
            raise NumericalError("could not bracket the adiabat landing temperature")
    # relative 1e-12 on T is an absolute 1e-12 on ln T; bisect to full precision
    return bisect(f, lo, hi, xtol=1e-15, rtol=1e-16)


def staircase(upper: EntropySurface, lower: EntropySurface, t0: float, t_target: float = 0.0,
              max_steps: int = 10_000, record_trace: bool = True) -> StaircaseResult:
    """Alternate isotherms (A -> B at fixed T) and adiabats (B -> A at fixed S).

    Each round drops the entropy to ``S_B(T)`` and then returns to curve A at
    that entropy. If ``S_B(T)`` is already at or below ``S_A(0)`` the adiabat
    ends exactly at ``T = 0``; this is possible only when ``S_A(0) > S_B(0)``.

    Stops when ``T <= t_target`` or after ``max_steps`` rounds.
    """
    if not t0 > 0:
        raise ArgumentError(f"T0 must be positive, got {t0!r}")
    if not 0 <= t_target < t0:
        raise ArgumentError(f"need 0 <= T_target < T0, got {t_target!r}")
    if int(max_steps) != max_steps or max_steps < 1:
        raise ArgumentError("max_steps must be a positive integer")
    check_ordering(upper, lower, t_target if t_target > 0 else ORDERING_FLOOR, t0)

    ds0 = upper.zero_entropy - lower.zero_entropy
    stop_log = math.log(t_target) if t_target > 0 else -math.inf
    log_t = math.log(t0)
    logs = [log_t]
    records = []
    if record_trace:
        records.append(TraceRecord(0, "initial", upper.parameter, t0, upper.entropy(t0), 0.0, 0.0, log_t))
    reached = False
    steps = 0
    while steps < max_steps:
        steps += 1
        T = math.exp(log_t)
        ex_lower = _excess_at(lower, log_t)
        s_lower = lower.zero_entropy + ex_lower
        if record_trace:
            s_upper = upper.zero_entropy + _excess_at(upper, log_t)
            heat = T * (s_lower - s_upper)
            work = _energy_at(lower, log_t) - _energy_at(upper, log_t) - heat
            records.append(TraceRecord(steps, "isothermal", lower.parameter, T, s_lower, heat, work, log_t))
        if ds0 > 0 and ex_lower - ds0 <= ZERO_ENTROPY_SLACK:
            reached = True
            new_log_t = -math.inf
            s_new = upper.zero_entropy
        else:
            new_log_t = _adiabat_solve(upper, lower, log_t, ds0)
            if not new_log_t < log_t:
                raise ProtocolError(f"adiabat did not lower the temperature at ln T={log_t:.17g}")
            s_new = s_lower
        if record_trace:
            work = _energy_at(upper, new_log_t) - _energy_at(lower, log_t)
            t_new = math.exp(new_log_t)
            records.append(TraceRecord(steps, "adiabatic", upper.parameter, t_new, s_new, 0.0, work, new_log_t))
        log_t = new_log_t
        logs.append(log_t)
        if reached or log_t <= stop_log:
            break
    final_t = 0.0 if reached else math.exp(log_t)
    return StaircaseResult(steps, reached, final_t, ProtocolTrace(tuple(records)), log_t, tuple(logs))


def write_staircase_csv(result: StaircaseResult, path):
    """One row per round: temperature and entropy after the adiabat, heat of the isotherm."""
    iso = [r for r in result.trace if r.kind == "isothermal"]
    adia = [r for r in result.trace if r.kind == "adiabatic"]
    rows = [(a.step_index, fmt_temperature(a.temperature, a.log_temperature), a.entropy, i.heat)
            for i, a in zip(iso, adia)]
    return write_csv(path, ("step", "temperature", "entropy", "heat"), rows)


# -- sequencer ---------------------------------------------------------------

def run_protocol(model: SpectrumModel, initial: ThermalState, steps) -> ProtocolTrace:
    """Apply ``steps`` in order and record entropy, heat and work for each.

    Heat is ``T * dS`` on isotherms, zero on adiabats and ``dU`` on
    fixed-parameter thermalisation; work is the remaining energy change.
    A measurement exchanges no heat and its energy change is booked as work.

    A failing step re-raises its error with ``partial_trace`` attached.
    """
    from .measurement import sample_measurement

    state = initial
    if state.model is None:
        state = replace(state, model=model)
    records = [TraceRecord(0, "initial", state.parameter, state.temperature, entropy(state), 0.0, 0.0)]
    for index, step in enumerate(steps, start=1):
        try:
            s_before, u_before = entropy(state), state.mean_energy
            if isinstance(step, Adiabatic):
                new = apply_adiabatic(state, step.target)
                heat = 0.0
                kind = "adiabatic"
            elif isinstance(step, Isothermal):
                bath = step.temperature if step.temperature is not None else state.temperature
                if bath is None:
                    raise ProtocolError("isothermal step needs a bath temperature; the state has none")
                new = apply_isothermal(state, step.target, bath)
                heat = bath * (entropy(new) - s_before)
                kind = "isothermal"
            elif isinstance(step, Thermalize):
                new = apply_isothermal(state, state.parameter, step.temperature)
                heat = new.mean_energy - u_before
                kind = "thermalize"
            elif isinstance(step, Measure):
                record = sample_measurement(state, step.seed)
                new = record.post_state
                heat = 0.0
                kind = "measure"
            else:
                raise ArgumentError(f"unknown protocol step {step!r}")
        except ThirdLawError as exc:
            exc.partial_trace = ProtocolTrace(tuple(records), state)
            raise
        work = new.mean_energy - u_before - heat
        records.append(TraceRecord(index, kind, new.parameter, new.temperature, entropy(new), heat, work))
        state = new
    return ProtocolTrace(tuple(records), state)
