"""Projective energy measurement.

States are either pure (:class:`StateVector`, one amplitude per microstate)
or energy-diagonal thermal states, which are measured through their
populations. The measurement resolves the energy *level*: a collapse onto a
``g``-fold level keeps the projected pure vector inside that subspace, while
a thermal input collapses to the uniform mixture over the level (entropy
``ln g``).

Randomness: trial ``t`` of an ensemble seeded with ``seed`` draws from
``SeedSequence(seed, spawn_key=(t,))``, so outcomes do not depend on how
trials are scheduled or split across workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from .errors import ArgumentError, ProjectionError, ValidationError
from .spectra import Level, SpectrumModel, spectrum_arrays
from .tables import write_csv
from .thermo import ThermalState, entropy, thermal_state

NORM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray
    levels: tuple[Level, ...]

    def __post_init__(self):
        c = np.array(self.amplitudes, dtype=complex)
        dims = sum(lv.degeneracy for lv in self.levels)
        if c.ndim != 1 or c.size != dims:
            raise ValidationError(f"{c.size} amplitudes for a {dims}-dimensional space")
        norm = float(np.sum(np.abs(c) ** 2))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValidationError(f"state is not normalised: <psi|psi> = {norm!r}")
        c.setflags(write=False)
        object.__setattr__(self, "amplitudes", c)
        object.__setattr__(self, "levels", tuple(self.levels))

    @classmethod
    def eigenstate(cls, levels: Sequence[Level], level: int, microstate: int = 0) -> "StateVector":
        c = np.zeros(sum(lv.degeneracy for lv in levels), dtype=complex)
        c[_level_slices(levels)[level].start + microstate] = 1.0
        return cls(c, tuple(levels))

    @property
    def level_index(self) -> np.ndarray:
        """Level of each microstate."""
        return np.repeat(np.arange(len(self.levels)), [lv.degeneracy for lv in self.levels])


def _level_slices(levels):
    edges = np.concatenate([[0], np.cumsum([lv.degeneracy for lv in levels])])
    return [slice(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:])]


@dataclass(frozen=True)
class EnergyProjector:
    """Projector onto the microstates of one energy level."""

    level: int
    levels: tuple[Level, ...]

    @property
    def support(self) -> slice:
        return _level_slices(self.levels)[self.level]

    def apply(self, amplitudes: np.ndarray) -> np.ndarray:
        out = np.zeros_like(np.asarray(amplitudes, dtype=complex))
        out[self.support] = np.asarray(amplitudes)[self.support]
        return out

    def matrix(self) -> np.ndarray:
        dims = sum(lv.degeneracy for lv in self.levels)
        diag = np.zeros(dims)
        diag[self.support] = 1.0
        return np.diag(diag)


def projectors(levels: Sequence[Level]) -> list[EnergyProjector]:
    return [EnergyProjector(i, tuple(levels)) for i in range(len(levels))]


def born_probabilities(state: StateVector | ThermalState) -> np.ndarray:
    """Outcome probabilities per energy level."""
    if isinstance(state, ThermalState):
        return np.array(state.populations)
    if not isinstance(state, StateVector):
        raise ValidationError(f"cannot measure {type(state).__name__}")
    weights = np.abs(state.amplitudes) ** 2
    return np.bincount(state.level_index, weights=weights, minlength=len(state.levels))


def project(state: StateVector, level: int) -> StateVector:
    """Collapse onto ``level``: ``P_i psi / sqrt(<psi|P_i|psi>)``."""
    if not 0 <= level < len(state.levels):
        raise ArgumentError(f"level {level} out of range")
    projected = EnergyProjector(level, state.levels).apply(state.amplitudes)
    prob = float(np.sum(np.abs(projected) ** 2))
    if prob == 0.0:
        raise ProjectionError(f"outcome {level} has zero probability")
    return StateVector(projected / math.sqrt(prob), state.levels)


@dataclass(frozen=True)
class MeasurementRecord:
    outcome: int
    energy: float
    probability: float
    post_state: StateVector | ThermalState
    entropy_before: float
    entropy_after: float
    temperature: float | None
    level_state: ThermalState

    @property
    def ground(self) -> bool:
        return self.outcome == 0


def trial_seed(seed, trial: int) -> np.random.SeedSequence:
    """The independent stream of trial ``trial`` under master ``seed``."""
    return np.random.SeedSequence(int(seed), spawn_key=(int(trial),))


def _uniform(seed) -> float:
    return float(np.random.default_rng(seed).random())


def _draw(probabilities: np.ndarray, u: float) -> int:
    cumulative = np.cumsum(probabilities)
    k = int(np.searchsorted(cumulative, u * cumulative[-1], side="right"))
    if k >= probabilities.size:
        k = int(np.nonzero(probabilities)[0][-1])
    return k


def _level_state(state, outcome: int) -> ThermalState:
    levels = state.levels
    p = np.zeros(len(levels))
    p[outcome] = 1.0
    energies = spectrum_arrays(levels)[0]
    temperature = 0.0 if energies[outcome] == energies[0] else None
    model = getattr(state, "model", None)
    parameter = getattr(state, "parameter", None)
    return ThermalState(p, levels, temperature, model, parameter)


def _record(state, outcome: int) -> MeasurementRecord:
    q = born_probabilities(state)
    level_state = _level_state(state, outcome)
    if isinstance(state, ThermalState):
        post = level_state
        before, after = entropy(state), entropy(level_state)
    else:
        post = project(state, outcome)
        before = after = 0.0
    return MeasurementRecord(outcome, state.levels[outcome].energy, float(q[outcome]), post,
                             before, after, level_state.temperature, level_state)


def sample_measurement(state: StateVector | ThermalState, seed) -> MeasurementRecord:
    """Draw one Born-rule outcome with a seeded generator and collapse onto it.

    A ground-level outcome is labelled with temperature 0.
    """
    q = born_probabilities(state)
    if abs(float(q.sum()) - 1.0) > NORM_TOL:
        raise ValidationError("state is not normalised")
    return _record(state, _draw(q, _uniform(seed)))


def _outcome_chunk(args):
    q, seed, start, stop = args
    return [_draw(q, _uniform(trial_seed(seed, t))) for t in range(start, stop)]


def sample_outcomes(state, n_trials: int, seed, workers: int = 1) -> np.ndarray:
    """Outcome levels of ``n_trials`` independent measurements of copies of ``state``."""
    if n_trials < 0:
        raise ArgumentError("n_trials must be nonnegative")
    q = born_probabilities(state)
    if workers <= 1 or n_trials < 1000:
        return np.array(_outcome_chunk((q, seed, 0, n_trials)), dtype=np.int64)
    bounds = np.linspace(0, n_trials, workers + 1).astype(int)
    jobs = [(q, seed, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]
    with ProcessPoolExecutor(workers) as pool:
        chunks = list(pool.map(_outcome_chunk, jobs))
    return np.array([k for chunk in chunks for k in chunk], dtype=np.int64)


def measure_ensemble(state, n_trials: int, seed, workers: int = 1) -> list[MeasurementRecord]:
    """Full records for an ensemble; trial ``t`` equals ``sample_measurement(state, trial_seed(seed, t))``."""
    return [_record(state, int(k)) for k in sample_outcomes(state, n_trials, seed, workers)]


@dataclass(frozen=True)
class AttainmentReport:
    temperature: float
    n_trials: int
    hits: int
    frequency: float
    q0_exact: float
    ci_low: float
    ci_high: float
    sigma: float
    table: tuple[tuple[float, float], ...]
    monotone: bool

    @property
    def within_3sigma(self) -> bool:
        return abs(self.frequency - self.q0_exact) <= 3 * self.sigma


def ground_probability(model: SpectrumModel, x: float, T: float) -> float:
    """Exact Born probability ``g_0 / Z`` of finding the ground level in the Gibbs state."""
    return float(thermal_state(model, x, T).populations[0])


def ground_state_attainment(model: SpectrumModel, x: float, T: float, n_trials: int, seed,
                            t_grid=None, confidence: float = 0.95, workers: int = 1) -> AttainmentReport:
    """Ground-hit statistics of projective energy measurements on ``Gibbs(T)``.

    The report also tabulates the exact ground probability over ``t_grid``
    (default: 16 temperatures log-spaced across two decades around ``T``) and
    whether it decreases strictly with temperature.
    """
    if not T > 0:
        raise ArgumentError("temperature must be positive")
    if n_trials < 1:
        raise ArgumentError("n_trials must be at least 1")
    state = thermal_state(model, x, T)
    outcomes = sample_outcomes(state, n_trials, seed, workers)
    hits = int(np.count_nonzero(outcomes == 0))
    q0 = float(state.populations[0])
    ci = stats.binomtest(hits, n_trials).proportion_ci(confidence, method="exact")
    if t_grid is None:
        t_grid = np.geomspace(T / 10.0, T * 10.0, 16)
    table = tuple((float(t), ground_probability(model, x, float(t))) for t in sorted(t_grid))
    values = [q for _, q in table]
    monotone = all(b < a for a, b in zip(values[:-1], values[1:]))
    return AttainmentReport(T, n_trials, hits, hits / n_trials, q0, float(ci.low), float(ci.high),
                            math.sqrt(q0 * (1.0 - q0) / n_trials), table, monotone)


@dataclass(frozen=True)
class EntropyReduction:
    entropy_before: float
    mean_entropy_after: float
    expected_entropy_after: float
    drop: float
    satisfied: bool


def entropy_reduction(pre: StateVector | ThermalState, records: Sequence[MeasurementRecord]) -> EntropyReduction:
    """Compare the pre-measurement entropy with the mean entropy after collapse."""
    if isinstance(pre, ThermalState):
        s_pre = entropy(pre)
        q = born_probabilities(pre)
        expected = float(np.sum(q * np.log(pre.degeneracies)))
    else:
        s_pre = expected = 0.0
    mean_after = float(np.mean([r.entropy_after for r in records])) if records else expected
    return EntropyReduction(s_pre, mean_after, expected, s_pre - mean_after, mean_after <= s_pre)


ENSEMBLE_COLUMNS = ("trial", "outcome_level", "outcome_energy", "post_entropy")


def write_ensemble_csv(state, outcomes: np.ndarray, path):
    energies, g = spectrum_arrays(state.levels)
    if isinstance(state, ThermalState):
        post = np.log(g)
    else:
        post = np.zeros(len(state.levels))
    rows = ((t, int(k), float(energies[k]), float(post[k])) for t, k in enumerate(outcomes))
    return write_csv(path, ENSEMBLE_COLUMNS, rows)

