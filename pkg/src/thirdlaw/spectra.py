"""Parameterised discrete spectra.

Every built-in family is shifted so that its ground energy is exactly zero;
energies and temperatures share one dimensionless unit (k = hbar = 1).

Families
--------
two_level           gap ``x`` above a single ground state
harmonic            ladder ``E_n = n * x``
box                 particle in a box of width ``x``, ``E_n = (n**2 - 1) / x**2``
degenerate_ground   ground degeneracy ``W(x)`` with a ladder of spacing ``x`` above it
custom              explicit level table, energies interpolated linearly in ``x``
"""
from __future__ import annotations

import bisect as _bisect
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ArgumentError, DomainError, TruncationError, ValidationError

FAMILIES = ("two_level", "harmonic", "box", "degenerate_ground", "custom")
DEFAULT_DOMAIN = (1e-6, 1e6)
DEFAULT_MAX_LEVELS = 10_000


@dataclass(frozen=True)
class Level:
    energy: float
    degeneracy: int = 1

    def __post_init__(self):
        if not math.isfinite(self.energy):
            raise ValidationError(f"level energy must be finite, got {self.energy!r}")
        if int(self.degeneracy) != self.degeneracy or self.degeneracy < 1:
            raise ValidationError(f"degeneracy must be a positive integer, got {self.degeneracy!r}")
        object.__setattr__(self, "degeneracy", int(self.degeneracy))


@dataclass(frozen=True)
class SpectrumModel:
    """A deterministic map from an external parameter to a sorted level list.

    ``ground_degeneracy`` is only read by ``degenerate_ground``; it is either
    a constant or a tuple of ``(start, W)`` breakpoints, W(x) being the value
    of the last breakpoint with ``start <= x``.
    ``table`` is only read by ``custom``: a tuple of ``(parameter, levels)``
    pairs sorted by parameter.
    """

    family: str
    domain: tuple[float, float] = DEFAULT_DOMAIN
    ground_degeneracy: int | tuple[tuple[float, int], ...] = 1
    table: tuple[tuple[float, tuple[Level, ...]], ...] = ()
    max_levels: int = DEFAULT_MAX_LEVELS

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ArgumentError(f"unknown spectrum family {self.family!r}")
        lo, hi = self.domain
        if not lo <= hi:
            raise ArgumentError(f"empty parameter domain {self.domain}")
        if self.family == "custom":
            if not self.table:
                raise ArgumentError("custom family needs a non-empty level table")
            sizes = {len(levels) for _, levels in self.table}
            if len(sizes) != 1 or sizes.pop() < 2:
                raise ArgumentError("every custom table entry must list the same number (>= 2) of levels")
            params = [p for p, _ in self.table]
            if params != sorted(params) or len(set(params)) != len(params):
                raise ArgumentError("custom table parameters must be strictly increasing")
        if self.family == "degenerate_ground":
            for w in self._breakpoint_values():
                if int(w) != w or w < 1:
                    raise ArgumentError(f"ground degeneracy must be a positive integer, got {w!r}")

    def _breakpoint_values(self):
        if isinstance(self.ground_degeneracy, tuple):
            return [w for _, w in self.ground_degeneracy]
        return [self.ground_degeneracy]

    @property
    def size(self) -> int | None:
        """Number of levels for finite families, ``None`` for infinite ones."""
        if self.family == "two_level":
            return 2
        if self.family == "custom":
            return len(self.table[0][1])
        return None

    def ground_degeneracy_at(self, x: float) -> int:
        if self.family == "degenerate_ground":
            gd = self.ground_degeneracy
            if not isinstance(gd, tuple):
                return int(gd)
            starts = [s for s, _ in gd]
            idx = _bisect.bisect_right(starts, x) - 1
            return int(gd[max(idx, 0)][1])
        if self.family == "custom":
            energies, degs = _custom_arrays(self, x)
            return int(degs[energies == energies[0]].sum())
        return 1


def two_level(domain=DEFAULT_DOMAIN) -> SpectrumModel:
    return SpectrumModel("two_level", tuple(domain))


def harmonic(domain=DEFAULT_DOMAIN, max_levels=DEFAULT_MAX_LEVELS) -> SpectrumModel:
    return SpectrumModel("harmonic", tuple(domain), max_levels=max_levels)


def box(domain=DEFAULT_DOMAIN, max_levels=DEFAULT_MAX_LEVELS) -> SpectrumModel:
    return SpectrumModel("box", tuple(domain), max_levels=max_levels)


def degenerate_ground(ground_degeneracy=2, domain=DEFAULT_DOMAIN, max_levels=DEFAULT_MAX_LEVELS) -> SpectrumModel:
    """Ladder of spacing ``x`` above a ``W``-fold ground level.

    ``ground_degeneracy`` may be an int or a sequence of ``(start, W)`` pairs,
    which makes the zero-temperature entropy depend on the parameter.
    """
    if not isinstance(ground_degeneracy, (int, np.integer)):
        ground_degeneracy = tuple(sorted((float(s), int(w)) for s, w in ground_degeneracy))
    return SpectrumModel("degenerate_ground", tuple(domain), ground_degeneracy, max_levels=max_levels)


def custom(table, domain=None) -> SpectrumModel:
    """Build a ``custom`` model from ``[(parameter, [Level | (E, g) | {energy, degeneracy}]), ...]``."""
    entries = []
    for parameter, levels in sorted(table, key=lambda item: item[0]):
        entries.append((float(parameter), tuple(_as_level(lv) for lv in levels)))
    if domain is None:
        domain = (entries[0][0], entries[-1][0])
    return SpectrumModel("custom", tuple(domain), table=tuple(entries))


def _as_level(item) -> Level:
    if isinstance(item, Level):
        return item
    if isinstance(item, dict):
        return Level(float(item["energy"]), int(item.get("degeneracy", 1)))
    energy, degeneracy = item
    return Level(float(energy), int(degeneracy))


def _check_parameter(model: SpectrumModel, x: float):
    lo, hi = model.domain
    if not (math.isfinite(x) and lo <= x <= hi):
        raise DomainError(f"parameter {x!r} outside {model.family} domain [{lo}, {hi}]")


def _custom_arrays(model: SpectrumModel, x: float):
    params = [p for p, _ in model.table]
    raw = np.array([[lv.energy for lv in levels] for _, levels in model.table])
    degs = np.array([[lv.degeneracy for lv in levels] for _, levels in model.table])
    if len(params) == 1 or x <= params[0]:
        k, energies = 0, raw[0]
    elif x >= params[-1]:
        k = len(params) - 1
        energies = raw[-1]
    else:
        k = _bisect.bisect_right(params, x) - 1
        w = (x - params[k]) / (params[k + 1] - params[k])
        energies = (1.0 - w) * raw[k] + w * raw[k + 1]
    # degeneracies step at listed parameters only
    g = degs[k]
    order = np.argsort(energies, kind="stable")
    energies = energies[order] - energies[order][0]
    return energies, g[order]


def _arrays(model: SpectrumModel, x: float, count: int):
    """Energies and degeneracies of the lowest ``count`` levels as arrays."""
    n = np.arange(count, dtype=float)
    g = np.ones(count, dtype=np.int64)
    if model.family == "two_level":
        energies = n * x
    elif model.family == "harmonic":
        energies = n * x
    elif model.family == "box":
        energies = ((n + 1.0) ** 2 - 1.0) / (x * x)
    elif model.family == "degenerate_ground":
        energies = n * x
        g[0] = model.ground_degeneracy_at(x)
    else:
        energies, g = _custom_arrays(model, x)
        energies, g = energies[:count], g[:count]
    return energies, g


def levels_at(model: SpectrumModel, x: float, count: int) -> tuple[Level, ...]:
    """The lowest ``count`` levels of ``model`` at parameter ``x``, ascending."""
    if int(count) != count or count < 2:
        raise ArgumentError(f"count must be an integer >= 2, got {count!r}")
    count = int(count)
    _check_parameter(model, x)
    size = model.size
    if size is not None and count > size:
        raise ArgumentError(f"{model.family} spectrum has only {size} levels, {count} requested")
    if count > model.max_levels:
        raise ArgumentError(f"count {count} exceeds the truncation cap {model.max_levels}")
    energies, g = _arrays(model, float(x), count)
    return tuple(Level(float(e), int(d)) for e, d in zip(energies, g))


def truncation_count(model: SpectrumModel, x: float, temperature: float,
                     tail_tolerance: float = 1e-15, cap: int | None = None) -> int:
    """Smallest ``N`` whose level ``N`` has population ratio to the ground below tolerance.

    Keeping levels ``0 .. N-1`` therefore drops only levels individually
    weighted below ``tail_tolerance``. Finite families return their size.

    Raises
    ------
    TruncationError
        when level ``cap`` is still above tolerance; carries its weight.
    """
    if not 0.0 < tail_tolerance < 1.0:
        raise ArgumentError(f"tail_tolerance must lie in (0, 1), got {tail_tolerance!r}")
    if not temperature > 0:
        raise ArgumentError(f"temperature must be positive, got {temperature!r}")
    _check_parameter(model, x)
    if model.size is not None:
        return model.size
    cap = model.max_levels if cap is None else int(cap)
    energies, g = _arrays(model, float(x), cap + 1)
    weights = g / g[0] * np.exp(-energies / temperature)
    below = np.nonzero(weights[1:] < tail_tolerance)[0]
    if below.size == 0:
        raise TruncationError(
            f"{model.family} at x={x}, T={temperature}: level {cap} still has weight {weights[cap]:.3e}",
            tail_weight=float(weights[cap]),
        )
    return max(int(below[0]) + 1, 2)


def spectrum_arrays(levels: Sequence[Level]):
    """``(energies, degeneracies)`` numpy arrays of a level list."""
    energies = np.array([lv.energy for lv in levels], dtype=float)
    degs = np.array([lv.degeneracy for lv in levels], dtype=float)
    return energies, degs
