"""Numerical checks linking the heat theorem to adiabatic unattainability.

Forward direction: with equal zero-temperature entropies an adiabat from
``(T2, beta)`` can only land at ``T1 = 0`` if ``int_0^T2 C/t dt <= 0``,
which the strictly positive heat capacity forbids.

Reverse direction: an adiabat from ``(T1, alpha)`` ends at ``T = 0`` on
curve ``beta`` whenever ``int_0^T1 C_alpha/t dt <= S(0, beta) - S(0, alpha)``;
solvable for some ``T1 > 0`` exactly when the right-hand side is positive.

"Adiabatically unattainable" is operationalised as: no solution of that
inequality and a staircase that never lands on ``T = 0`` within its budget.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, ModelError, NumericalError, ProtocolError
from .processes import check_ordering, staircase
from .spectra import Level, SpectrumModel
from .tables import csv_text, write_csv
from .thermo import CUTOFF_INTEGRAND, EntropySurface

SECOND_LAW_TOL = 1e-12
B2_RESIDUAL_TOL = 1e-8
DEFAULT_BRACKET_MAX = 1e3
DEFAULT_MAX_STEPS = 10_000
BRACKET_NOTE = "bracket exhausted"


@dataclass(frozen=True)
class AdiabatCheck:
    """An adiabatic transition from ``(T2, beta, S2)`` to ``(T1, alpha, S1)``."""

    t1: float
    alpha: object
    s1: float
    t2: float
    beta: object
    s2: float
    satisfied: bool


def second_law_check(before, after) -> AdiabatCheck:
    """Is the transition ``before -> after`` (each a ``(surface, T)`` pair) entropy non-decreasing?"""
    surf_b, t2 = before
    surf_a, t1 = after
    if t1 < 0 or t2 < 0:
        raise ArgumentError("temperatures must be nonnegative")
    s2 = surf_b.entropy(t2)
    s1 = surf_a.entropy(t1)
    return AdiabatCheck(t1, surf_a.parameter, s1, t2, surf_b.parameter, s2, s1 >= s2 - SECOND_LAW_TOL)


def forward_contradiction(surface_beta: EntropySurface, t2: float) -> float:
    """``int_0^T2 C_beta(t)/t dt``, which must be strictly positive.

    Raises
    ------
    ModelError
        for a spectrum with a single distinct energy (C vanishes identically).
    NumericalError
        if the integrand underflows to zero at ``t2``, so that positivity
        cannot be witnessed in double precision.
    """
    if not t2 > 0:
        raise ArgumentError(f"T2 must be positive, got {t2!r}")
    if surface_beta.distinct_energies < 2:
        raise ModelError("a single-level spectrum has zero heat capacity; the integral vanishes")
    c_top = float(surface_beta.specific_heat(t2)[0])
    if c_top == 0.0:
        raise NumericalError(f"heat capacity underflows at T2={t2!r}; the integral is below double range")
    # keep the neglected piece below the integral itself for tiny T2
    floor = CUTOFF_INTEGRAND * min(1.0, c_top * t2 / surface_beta.first_gap)
    value, _ = surface_beta.heat_integral(0.0, t2, abs_tol=0.0, rel_tol=1e-12, floor=floor)
    if not value > 0:
        raise ModelError(f"non-positive heat-capacity integral {value!r} at T2={t2!r}")
    return value


@dataclass(frozen=True)
class B2Solution:
    """Largest start temperature on ``alpha`` whose adiabat reaches ``T = 0`` on ``beta``.

    ``t1`` is None when ``delta_s0 <= 0`` (no start works) or when every
    start inside the bracket works (``note == "bracket exhausted"``).
    """

    delta_s0: float
    t1: float | None
    residual: float
    note: str = ""
    direct_residual: float | None = None

    @property
    def attainable(self) -> bool:
        return self.delta_s0 > 0


def b2_solve(surf_a: EntropySurface, surf_b: EntropySurface, bracket_max: float = DEFAULT_BRACKET_MAX,
             tol: float = 1e-12) -> B2Solution:
    """Solve ``int_0^T1 C_a(t)/t dt = S_b(0) - S_a(0)`` for ``T1`` by bisection.

    The integral is accumulated piecewise: each bisection step integrates
    only from the current lower end to the midpoint.
    """
    if not bracket_max > 0:
        raise ArgumentError("bracket_max must be positive")
    if surf_a.ground_degeneracy == surf_b.ground_degeneracy:
        ds0 = 0.0
    else:
        ds0 = surf_b.zero_entropy - surf_a.zero_entropy
    if ds0 <= 0:
        return B2Solution(ds0, None, 0.0, "no solution: S(0, beta) <= S(0, alpha)")
    if surf_a.distinct_energies < 2:
        return B2Solution(ds0, None, ds0, BRACKET_NOTE)

    def piece(t_lo, t_hi):
        value, _ = surf_a.heat_integral(t_lo, t_hi, abs_tol=tol, rel_tol=0.0)
        return value

    total = piece(0.0, bracket_max)
    if total < ds0:
        return B2Solution(ds0, None, ds0 - total, BRACKET_NOTE)

    lo = math.log(min(surf_a.cutoff(), bracket_max))
    hi = math.log(bracket_max)
    i_lo, i_hi = 0.0, total
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi or hi - lo <= 1e-15 * max(1.0, abs(mid)):
            break
        i_mid = i_lo + piece(math.exp(lo), math.exp(mid))
        if i_mid < ds0:
            lo, i_lo = mid, i_mid
        else:
            hi, i_hi = mid, i_mid
    if abs(i_lo - ds0) <= abs(i_hi - ds0):
        t1, value = math.exp(lo), i_lo
    else:
        t1, value = math.exp(hi), i_hi
    residual = abs(value - ds0)
    if residual > B2_RESIDUAL_TOL:
        raise NumericalError(f"b2 residual {residual:.3e} exceeds {B2_RESIDUAL_TOL}", estimate=residual)
    direct = abs(surf_a.excess(t1) - ds0)
    return B2Solution(ds0, t1, residual, "", direct)


# -- deduction over a parameter grid -------------------------------------------

@dataclass(frozen=True)
class DeductionReport:
    holds: bool
    zero_entropies: tuple[tuple[float, float], ...]
    attainable: tuple[tuple[float, float, str], ...] = ()

    def __bool__(self):
        return self.holds


def _b2_oracle(bracket_max):
    def oracle(surf_alpha, surf_beta):
        sol = b2_solve(surf_alpha, surf_beta, bracket_max)
        if sol.t1 is not None:
            return f"T1={sol.t1:.17g}"
        return sol.note if sol.attainable else None
    return oracle


def deduce_nernst(model: SpectrumModel, x_grid, oracle=None, t_max: float = 100.0,
                  bracket_max: float = DEFAULT_BRACKET_MAX) -> DeductionReport:
    """Deduce equal zero-temperature entropies from two-way unattainability across a grid.

    ``oracle(surf_alpha, surf_beta)`` answers whether ``T = 0`` on ``beta`` is
    adiabatically reachable from some temperature on ``alpha``; a truthy
    answer (a description) is reported, a falsy one counts as unattainable.
    """
    x_grid = [float(x) for x in x_grid]
    if len(x_grid) < 2:
        raise ArgumentError("the parameter grid needs at least two points")
    oracle = oracle or _b2_oracle(bracket_max)
    surfaces = [EntropySurface.from_model(model, x, t_max=t_max) for x in x_grid]
    found = []
    for i, a in enumerate(surfaces):
        for j, b in enumerate(surfaces):
            if i == j:
                continue
            answer = oracle(a, b)
            if answer:
                found.append((x_grid[i], x_grid[j], str(answer)))
    deduced = all(a.zero_entropy == b.zero_entropy for a in surfaces for b in surfaces)
    zero = tuple((x, s.zero_entropy) for x, s in zip(x_grid, surfaces))
    return DeductionReport(not found and deduced, zero, tuple(found))


# -- randomized equivalence harness -----------------------------------------

GROUND_DEGENERACIES = (1, 2, 4)
GAP_RANGE = (0.1, 10.0)
LEVEL_RANGE = (2, 20)
T0_CANDIDATES = tuple(np.geomspace(1.0, 1e-3, 31))


def random_surface(rng: np.random.Generator, ground_degeneracy: int | None = None,
                   label: str | None = None) -> EntropySurface:
    """Random finite spectrum: 2-20 levels, gaps uniform in [0.1, 10], ground degeneracy in {1, 2, 4}."""
    n = int(rng.integers(LEVEL_RANGE[0], LEVEL_RANGE[1] + 1))
    gaps = rng.uniform(*GAP_RANGE, size=n - 1)
    if ground_degeneracy is None:
        ground_degeneracy = int(rng.choice(GROUND_DEGENERACIES))
    energies = np.concatenate([[0.0], np.cumsum(gaps)])
    levels = [Level(0.0, ground_degeneracy)] + [Level(float(e), 1) for e in energies[1:]]
    return EntropySurface(levels, label=label)


def random_pair(seed, model_id: int, nernst: bool | None = None):
    """The two surfaces of harness model ``model_id``; ``nernst`` forces or forbids equal ground degeneracy."""
    rng = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(model_id),)))
    first = random_surface(rng, label=f"m{model_id}:x")
    if nernst is None:
        w = None
    elif nernst:
        w = first.ground_degeneracy
    else:
        w = int(rng.choice([g for g in GROUND_DEGENERACIES if g != first.ground_degeneracy]))
    second = random_surface(rng, ground_degeneracy=w, label=f"m{model_id}:y")
    return first, second


def staircase_orientation(x: EntropySurface, y: EntropySurface):
    """``(upper, lower)``: the curve with more entropy near ``T = 0`` is the upper one."""
    if x.zero_entropy != y.zero_entropy:
        return (x, y) if x.zero_entropy > y.zero_entropy else (y, x)
    key_x = (-x.first_gap, x._exc_lng[0])
    key_y = (-y.first_gap, y._exc_lng[0])
    return (x, y) if key_x > key_y else (y, x)


def constructed_staircase(x: EntropySurface, y: EntropySurface, max_steps: int = DEFAULT_MAX_STEPS,
                          record_trace: bool = False):
    """Staircase to ``T = 0`` between the pair, from the highest ``T0 <= 1`` where the curves are ordered."""
    upper, lower = staircase_orientation(x, y)
    for t0 in T0_CANDIDATES:
        try:
            check_ordering(upper, lower, 1e-6, t0)
        except ProtocolError:
            continue
        return staircase(upper, lower, float(t0), 0.0, max_steps, record_trace=record_trace)
    raise ProtocolError("no starting temperature in [1e-3, 1] with ordered entropy curves")


@dataclass(frozen=True)
class HarnessRow:
    model_id: int
    nernst_holds: bool
    b2_forward: str
    b2_reverse: str
    staircase_reached_zero: bool
    steps: int
    counterexample: bool
    description: str = field(default="", repr=False)


HARNESS_COLUMNS = ("model_id", "nernst_holds", "b2_forward", "b2_reverse", "staircase_reached_zero", "steps")


def _b2_text(sol: B2Solution) -> str:
    if sol.t1 is not None:
        return f"{sol.t1:.17g}"
    return "bracket" if sol.note == BRACKET_NOTE else "none"


def _describe(surface: EntropySurface) -> str:
    levels = ";".join(f"{e:.17g}x{int(g)}" for e, g in zip(surface.energies, surface.degeneracies))
    return f"{surface.label}[{levels}]"


def check_pair(x: EntropySurface, y: EntropySurface, model_id: int = 0,
               max_steps: int = DEFAULT_MAX_STEPS, bracket_max: float = DEFAULT_BRACKET_MAX) -> HarnessRow:
    """Classify one pair and test both implications of the equivalence on it."""
    nernst = x.ground_degeneracy == y.ground_degeneracy
    fwd = b2_solve(x, y, bracket_max)
    rev = b2_solve(y, x, bracket_max)
    try:
        run = constructed_staircase(x, y, max_steps)
        reached, steps, finite = run.reached_zero, run.steps, run.final_log_temperature > -math.inf
    except ProtocolError:
        reached, steps, finite = None, 0, False
    if nernst:
        ok = (not fwd.attainable and not rev.attainable and fwd.t1 is None and rev.t1 is None
              and reached is False and steps == max_steps and finite)
    else:
        one_way = fwd.attainable != rev.attainable
        ok = one_way and reached is True
    description = "" if ok else f"{_describe(x)} | {_describe(y)}"
    return HarnessRow(model_id, nernst, _b2_text(fwd), _b2_text(rev), bool(reached), steps, not ok, description)


def _check_chunk(args):
    seed, ids, max_steps, bracket_max = args
    return [check_pair(*random_pair(seed, i), model_id=i, max_steps=max_steps, bracket_max=bracket_max)
            for i in ids]


@dataclass(frozen=True)
class HarnessReport:
    rows: tuple[HarnessRow, ...]
    seed: int

    @property
    def counterexamples(self) -> tuple[HarnessRow, ...]:
        return tuple(r for r in self.rows if r.counterexample)

    @property
    def passed(self) -> bool:
        return not self.counterexamples

    def statistics(self) -> dict:
        nernst = [r for r in self.rows if r.nernst_holds]
        violating = [r for r in self.rows if not r.nernst_holds]
        zero_steps = [r.steps for r in violating if r.staircase_reached_zero]
        return {
            "models": len(self.rows),
            "nernst_holds": len(nernst),
            "nernst_fails": len(violating),
            "counterexamples": len(self.counterexamples),
            "b2_solved": sum(1 for r in violating if r.b2_forward not in ("none", "bracket")
                             or r.b2_reverse not in ("none", "bracket")),
            "b2_bracket": sum(1 for r in violating if "bracket" in (r.b2_forward, r.b2_reverse)),
            "mean_steps_to_zero": float(np.mean(zero_steps)) if zero_steps else None,
            "max_steps_to_zero": max(zero_steps) if zero_steps else None,
        }

    def summary(self) -> str:
        st = self.statistics()
        lines = [
            f"equivalence harness: seed={self.seed} models={st['models']}",
            f"  Nernst holds: {st['nernst_holds']} (no adiabatic route to T=0 expected)",
            f"  Nernst fails: {st['nernst_fails']} (b2 solved {st['b2_solved']}, bracket {st['b2_bracket']})",
            f"  steps to T=0 when violated: mean {st['mean_steps_to_zero']} max {st['max_steps_to_zero']}",
            f"  counterexamples: {st['counterexamples']}",
        ]
        for r in self.counterexamples:
            lines.append(f"  COUNTEREXAMPLE model {r.model_id}: {r.description}")
        return "\n".join(lines)

    def rows_for_csv(self):
        return ((r.model_id, r.nernst_holds, r.b2_forward, r.b2_reverse, r.staircase_reached_zero, r.steps)
                for r in self.rows)

    def to_csv(self, path=None) -> str:
        if path is not None:
            write_csv(path, HARNESS_COLUMNS, self.rows_for_csv())
        return csv_text(HARNESS_COLUMNS, self.rows_for_csv())


def equivalence_harness(n_models: int, seed, workers: int = 1, max_steps: int = DEFAULT_MAX_STEPS,
                        bracket_max: float = DEFAULT_BRACKET_MAX) -> HarnessReport:
    """Check "Nernst <=> no adiabatic route to T = 0" on ``n_models`` random pairs.

    Model ``i`` is generated from ``SeedSequence(seed, spawn_key=(i,))``;
    rows are returned sorted by model id, so the report does not depend on
    ``workers``.
    """
    if n_models < 0:
        raise ArgumentError("n_models must be nonnegative")
    ids = list(range(n_models))
    if workers <= 1 or n_models < 2:
        rows = _check_chunk((seed, ids, max_steps, bracket_max))
    else:
        chunks = [ids[k::workers] for k in range(workers)]
        with ProcessPoolExecutor(workers) as pool:
            parts = pool.map(_check_chunk, [(seed, c, max_steps, bracket_max) for c in chunks])
            rows = [row for part in parts for row in part]
    rows.sort(key=lambda r: r.model_id)
    return HarnessReport(tuple(rows), int(seed))
