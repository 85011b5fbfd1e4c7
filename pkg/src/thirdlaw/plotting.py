"""Figures written next to the CSV outputs of the command-line tool."""
from __future__ import annotations

import math
from contextlib import contextmanager
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

GOLDEN = (math.sqrt(5) - 1.0) / 2.0

_RC = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "lines.linewidth": 1.2,
    "axes.linewidth": 0.6,
    "xtick.direction": "in",
    "ytick.direction": "in",
    "savefig.dpi": 150,
}


@contextmanager
def _figure(path, width=5.0, nrows=1, ncols=1):
    with matplotlib.rc_context(_RC):
        fig, axes = plt.subplots(nrows, ncols, figsize=(width, width * GOLDEN * nrows / ncols * 1.2))
        try:
            yield fig, axes
            fig.tight_layout()
            Path(path).parent.mkdir(parents=True, exist_ok=True)
            fig.savefig(path, metadata={"Software": None})
        finally:
            plt.close(fig)


def plot_thermo_table(temperatures, s_direct, s_integral, heat_capacity, path, title=""):
    t = np.asarray(temperatures, dtype=float)
    keep = t > 0
    with _figure(path, nrows=2) as (fig, (ax_s, ax_c)):
        ax_s.plot(t[keep], np.asarray(s_direct)[keep], "k-", label="direct")
        ax_s.plot(t[keep], np.asarray(s_integral)[keep], "o", mfc="none", ms=4, label="heat integral")
        ax_s.set_xscale("log")
        ax_s.set_ylabel("S")
        ax_s.legend(frameon=False)
        if title:
            ax_s.set_title(title)
        ax_c.plot(t[keep], np.asarray(heat_capacity, dtype=float)[keep], "k-")
        ax_c.set_xscale("log")
        ax_c.set_xlabel("T")
        ax_c.set_ylabel("C")


def plot_staircase(upper, lower, result, path):
    """Both entropy curves in the (T, S) plane with the isotherm/adiabat path drawn over them."""
    t0 = float(np.exp(result.log_temperatures[0]))
    grid = np.linspace(0.0, t0 * 1.05, 400)
    with _figure(path) as (fig, ax):
        ax.plot(grid, [upper.entropy(t) for t in grid], "b-", label=f"A: {upper.label}")
        ax.plot(grid, [lower.entropy(t) for t in grid], "b--", label=f"B: {lower.label}")
        path_t, path_s = [], []
        for rec in result.trace:
            path_t.append(rec.temperature if rec.temperature is not None else 0.0)
            path_s.append(rec.entropy)
        ax.plot(path_t, path_s, "r-", lw=0.9, label="protocol")
        ax.set_xlabel("T")
        ax.set_ylabel("S")
        state = "reached T = 0" if result.reached_zero else "T > 0"
        ax.set_title(f"{result.steps} rounds, {state}")
        ax.set_xlim(left=0.0)
        ax.legend(frameon=False, loc="lower right")


def plot_attainment(report, path):
    t = np.array([row[0] for row in report.table])
    q = np.array([row[1] for row in report.table])
    with _figure(path) as (fig, ax):
        ax.plot(t, q, "k-", label="exact ground probability")
        ax.errorbar([report.temperature], [report.frequency],
                    yerr=[[report.frequency - report.ci_low], [report.ci_high - report.frequency]],
                    fmt="o", color="r", ms=4, capsize=3, label=f"sampled ({report.n_trials} trials)")
        ax.set_xscale("log")
        ax.set_xlabel("T")
        ax.set_ylabel("P(ground)")
        ax.set_ylim(0.0, 1.02)
        ax.legend(frameon=False)


def plot_harness(report, path):
    rows = report.rows
    with _figure(path, ncols=2, width=7.0) as (fig, (ax_cls, ax_steps)):
        nernst = sum(r.nernst_holds for r in rows)
        labels = ["Nernst holds", "Nernst fails", "counterexamples"]
        ax_cls.bar(labels, [nernst, len(rows) - nernst, len(report.counterexamples)], color=["0.4", "0.7", "r"])
        ax_cls.set_ylabel("models")
        ax_cls.tick_params(axis="x", labelrotation=20)
        steps = [r.steps for r in rows if r.staircase_reached_zero]
        if steps:
            ax_steps.hist(steps, bins=np.arange(0.5, max(steps) + 1.5), color="0.5")
        ax_steps.set_xlabel("rounds to reach T = 0")
        ax_steps.set_ylabel("models")
