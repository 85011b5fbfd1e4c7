"""Equilibrium thermodynamics of a truncated discrete spectrum.

Conventions: k = 1, ground energy 0, populations are per *level* (degeneracy
included) and the entropy is the microstate entropy
``S = -sum_i p_i ln(p_i / g_i)``, so a zero-temperature state carries
``S = ln g_0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ArgumentError, NumericalError, ValidationError
from .numerics import bisect, integrate
from .spectra import Level, SpectrumModel, levels_at, spectrum_arrays, truncation_count

DEFAULT_QUAD_TOL = 1e-9
# the integrand bound below the quadrature cutoff
CUTOFF_INTEGRAND = 1e-18
# relative size of a neglected correction that no longer changes a double
_NEGLIGIBLE = 41.5  # -ln(1e-18)


@dataclass(frozen=True, eq=False)
class ThermalState:
    """Level populations, optionally labelled with a temperature.

    ``temperature`` is ``None`` when the populations are not a Gibbs
    distribution of ``levels`` (e.g. after a non-scaling adiabatic step).
    """

    populations: np.ndarray
    levels: tuple[Level, ...]
    temperature: float | None = None
    model: SpectrumModel | None = None
    parameter: float | None = None

    def __post_init__(self):
        p = np.array(self.populations, dtype=float)
        if p.ndim != 1 or p.size != len(self.levels):
            raise ValidationError(f"{p.size} populations for {len(self.levels)} levels")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValidationError("populations must be finite and nonnegative")
        if abs(math.fsum(p) - 1.0) > 1e-12:
            raise ValidationError(f"populations sum to {math.fsum(p)!r}, not 1")
        if self.temperature is not None and self.temperature < 0:
            raise ValidationError("temperature label must be nonnegative")
        p.setflags(write=False)
        object.__setattr__(self, "populations", p)
        object.__setattr__(self, "levels", tuple(self.levels))

    @property
    def energies(self) -> np.ndarray:
        return spectrum_arrays(self.levels)[0]

    @property
    def degeneracies(self) -> np.ndarray:
        return spectrum_arrays(self.levels)[1]

    @property
    def ground_degeneracy(self) -> int:
        energies, g = spectrum_arrays(self.levels)
        return int(g[energies == energies[0]].sum())

    @property
    def mean_energy(self) -> float:
        return float(self.populations @ self.energies)


def _check_levels(levels):
    if len(levels) == 0:
        raise ArgumentError("level list is empty")
    energies, g = spectrum_arrays(levels)
    if np.any(np.diff(energies) < 0):
        raise ArgumentError("levels must be sorted ascending by energy")
    if energies[0] != 0.0:
        raise ArgumentError(f"ground energy must be 0, got {energies[0]!r}")
    return energies, g


def partition_function(levels: Sequence[Level], T: float) -> float:
    """``Z = sum_i g_i exp(-E_i / T)`` with the ground term (E = 0) factored out."""
    if not T > 0:
        raise ArgumentError(f"partition function needs T > 0, got {T!r}")
    energies, g = _check_levels(levels)
    return float(np.sum(g * np.exp(-energies / T)))


def gibbs_populations(levels: Sequence[Level], T: float, model=None, parameter=None) -> ThermalState:
    """Gibbs state of ``levels`` at ``T``; at ``T = 0`` all mass sits on the ground level."""
    if not T >= 0:
        raise ArgumentError(f"temperature must be nonnegative, got {T!r}")
    energies, g = _check_levels(levels)
    if T == 0:
        weights = np.where(energies == energies[0], g, 0.0)
    else:
        weights = g * np.exp(-energies / T)
    return ThermalState(weights / weights.sum(), tuple(levels), float(T), model, parameter)


def thermal_state(model: SpectrumModel, x: float, T: float, count: int | None = None,
                  tail_tolerance: float = 1e-15) -> ThermalState:
    """Gibbs state of ``model`` at ``x``, truncated by ``truncation_count`` unless ``count`` is given."""
    if count is None:
        count = truncation_count(model, x, T, tail_tolerance) if T > 0 else (model.size or 2)
    return gibbs_populations(levels_at(model, x, count), T, model, x)


def entropy(state: ThermalState) -> float:
    p = state.populations
    g = state.degeneracies
    mask = p > 0
    # sum p (ln g - ln p): a pure ground level gives ln g_0 with no rounding
    return float(np.sum(p[mask] * (np.log(g[mask]) - np.log(p[mask]))))


def _specific_heat(energies, g, t):
    """Vectorised ``Var(E) / t**2`` over an array of temperatures."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    w = g[:, None] * np.exp(-energies[:, None] / t[None, :])
    z = w.sum(axis=0)
    mean = (energies[:, None] * w).sum(axis=0) / z
    var = (((energies[:, None] - mean[None, :]) ** 2) * w).sum(axis=0) / z
    return var / (t * t)


def specific_heat(levels: Sequence[Level], T: float) -> float:
    """Heat capacity from the Gibbs energy variance, ``C = Var(E) / T**2``."""
    if not T > 0:
        raise ArgumentError(f"specific heat needs T > 0, got {T!r}")
    energies, g = _check_levels(levels)
    return float(_specific_heat(energies, g, T)[0])


class EntropySurface:
    """``S(T)`` of a fixed spectrum, i.e. one curve of constant parameter.

    Besides the plain entropy the surface offers the *excess* entropy
    ``S(T) - S(0)`` computed without cancellation and its logarithm as a
    function of ``ln(1/T)``, which stays meaningful far below the smallest
    representable temperature.
    """

    def __init__(self, levels: Sequence[Level], model: SpectrumModel | None = None,
                 parameter: float | None = None, label: str | None = None):
        energies, g = _check_levels(levels)
        # merge coincident energies into single levels
        uniq, inverse = np.unique(energies, return_inverse=True)
        merged = np.zeros(uniq.size)
        np.add.at(merged, inverse, g)
        self.levels = tuple(levels)
        self.model = model
        self.parameter = parameter
        self.label = label if label is not None else _default_label(model, parameter)
        self.energies = uniq
        self.degeneracies = merged
        self.ground_degeneracy = int(merged[0])
        self.zero_entropy = math.log(self.ground_degeneracy)
        self._exc_e = uniq[1:]
        self._exc_lng = np.log(merged[1:]) - math.log(merged[0])
        self.deep_beta = self._deep_threshold()

    @classmethod
    def from_model(cls, model: SpectrumModel, x: float, t_max: float = 100.0,
                   tail_tolerance: float = 1e-15, count: int | None = None) -> "EntropySurface":
        """Surface of ``model`` at ``x`` truncated for temperatures up to ``t_max``."""
        if count is None:
            count = truncation_count(model, x, t_max, tail_tolerance)
        return cls(levels_at(model, x, count), model, x)

    def __repr__(self):
        return (f"EntropySurface({self.label}, levels={len(self.energies)}, "
                f"W={self.ground_degeneracy})")

    @property
    def distinct_energies(self) -> int:
        return int(self.energies.size)

    @property
    def first_gap(self) -> float:
        return float(self._exc_e[0]) if self._exc_e.size else math.inf

    def _deep_threshold(self) -> float:
        if self._exc_e.size == 0:
            return math.inf
        gap = self._exc_e[0]
        beta = (_NEGLIGIBLE + max(self._exc_lng[0], 0.0)) / gap
        if self._exc_e.size > 1:
            higher = self._exc_e[1:]
            rel = (_NEGLIGIBLE + math.log(self._exc_e.size)
                   + np.maximum(self._exc_lng[1:] - self._exc_lng[0], 0.0)
                   + np.log(higher / gap))
            beta = max(beta, float(np.max(rel / (higher - gap))))
        return max(beta, 1.0)

    # -- direct evaluation -------------------------------------------------

    def excess(self, T: float) -> float:
        """``S(T) - S(0)``, accurate even when it is far below machine epsilon times S(0)."""
        if T < 0:
            raise ArgumentError(f"temperature must be nonnegative, got {T!r}")
        if T == 0 or self._exc_e.size == 0:
            return 0.0
        r = np.exp(self._exc_lng - self._exc_e / T)
        x = float(r.sum())
        return math.log1p(x) + float(np.sum(r * self._exc_e)) / T / (1.0 + x)

    def entropy(self, T: float) -> float:
        return self.zero_entropy + self.excess(T)

    def log_excess(self, log_beta: float) -> float:
        """``ln(S(T) - S(0))`` as a function of ``ln(1/T)``."""
        if self._exc_e.size == 0:
            return -math.inf
        if log_beta >= 709.0:
            return -math.inf
        beta = math.exp(log_beta)
        if beta >= self.deep_beta:
            scaled = float(self._exc_e[0]) * beta
            if math.isinf(scaled):
                return -math.inf
            return float(self._exc_lng[0]) - scaled + math.log1p(scaled)
        a = self._exc_e * beta
        lw = self._exc_lng - a
        lx = _logsumexp(lw)
        if lx < -20.0:
            x = math.exp(lx)
            ln_log1p = lx + math.log1p(-0.5 * x + x * x / 3.0)
        else:
            ln_log1p = math.log(math.log1p(math.exp(lx)))
        ln_ut = _logsumexp(lw + np.log(a)) - math.log1p(math.exp(lx))
        return float(np.logaddexp(ln_log1p, ln_ut))

    def mean_energy(self, T: float) -> float:
        if T <= 0 or self._exc_e.size == 0:
            return 0.0
        r = np.exp(self._exc_lng - self._exc_e / T)
        return float(np.sum(r * self._exc_e)) / (1.0 + float(r.sum()))

    def specific_heat(self, T):
        return _specific_heat(self.energies, self.degeneracies, T)

    # -- heat-capacity integral ----------------------------------------------

    def _integrand_bound(self, t: float) -> float:
        """Upper bound on ``C(t)/t``, increasing for ``t < E_1 / 3``."""
        return float(np.sum(np.exp(self._exc_lng + 2 * np.log(self._exc_e) - self._exc_e / t))) / t ** 3

    def cutoff(self, floor: float = CUTOFF_INTEGRAND) -> float:
        """Temperature below which ``C(t)/t < floor``; the neglected integral is below ``floor * cutoff``."""
        if self._exc_e.size == 0:
            return math.inf
        top = self._exc_e[0] / 3.0
        if self._integrand_bound(top) <= floor:
            return top
        lo = math.log(self._exc_e[0] / 800.0)
        hi = math.log(top)
        u = bisect(lambda s: self._integrand_bound(math.exp(s)) - floor, lo, hi, xtol=1e-6, rtol=0.0)
        return math.exp(u)

    def heat_integral(self, a: float, b: float, abs_tol: float = 1e-12, rel_tol: float = 1e-12,
                      floor: float = CUTOFF_INTEGRAND) -> tuple[float, float]:
        """``int_a^b C(t)/t dt`` and its error estimate, integrated in ``ln t``."""
        lo = max(a, self.cutoff(floor))
        if not b > lo:
            return 0.0, 0.0
        u0, u1 = math.log(lo), math.log(b)
        breaks = np.arange(math.ceil(u0), u1)
        return integrate(lambda u: self.specific_heat(np.exp(u)), u0, u1,
                         abs_tol=abs_tol, rel_tol=rel_tol, breakpoints=breaks)


def _logsumexp(values: np.ndarray) -> float:
    top = float(values.max())
    if top == -math.inf:
        return top
    return top + math.log(float(np.exp(values - top).sum()))


def _default_label(model, parameter):
    if model is None:
        return "spectrum"
    if parameter is None:
        return model.family
    return f"{model.family}({parameter:g})"


def entropy_via_integral(surface: EntropySurface, T: float, quad_tol: float = DEFAULT_QUAD_TOL) -> float:
    """``S(0) + int_0^T C(t)/t dt`` by adaptive quadrature."""
    if not quad_tol > 0:
        raise ArgumentError("quad_tol must be positive")
    if T < 0:
        raise ArgumentError(f"temperature must be nonnegative, got {T!r}")
    if T == 0:
        return surface.zero_entropy
    value, err = surface.heat_integral(0.0, T, abs_tol=0.1 * quad_tol, rel_tol=0.0)
    if err > quad_tol:
        raise NumericalError(f"entropy integral error {err:.3e} exceeds {quad_tol:.1e}", estimate=err)
    return surface.zero_entropy + value


@dataclass(frozen=True)
class NernstReport:
    holds: bool
    entropy_first: float
    entropy_second: float

    def __bool__(self):
        return self.holds


def nernst_check(model: SpectrumModel, x1: float, x2: float) -> NernstReport:
    """Whether the zero-temperature entropy is the same at ``x1`` and ``x2``."""
    levels_at(model, x1, 2), levels_at(model, x2, 2)  # domain validation
    w1 = model.ground_degeneracy_at(x1)
    w2 = model.ground_degeneracy_at(x2)
    s1, s2 = math.log(w1), math.log(w2)
    if model.family == "custom":
        holds = abs(s1 - s2) <= 1e-12
    else:
        holds = w1 == w2
    return NernstReport(holds, s1, s2)


def planck_check(model: SpectrumModel, x: float) -> bool:
    """Whether the zero-temperature entropy vanishes (nondegenerate ground)."""
    levels_at(model, x, 2)
    return model.ground_degeneracy_at(x) == 1
