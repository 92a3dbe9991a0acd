"""Static SVG figures built from the CSV tables of a run."""
from __future__ import annotations

from pathlib import Path
from typing import Iterable, Mapping

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .hazards import SeriesTable  # noqa: E402

# plot name -> tables it reads
REQUIRES = {
    "compartments": ("trajectory",),
    "classes": ("trajectory",),
    "empirical_forces": ("hazards",),
    "forces_survival": ("hazards",),
    "force_comparison": ("hazards",),
    "reserve": ("reserve_sweep",),
}

LABELS = {
    "s": "s(t) susceptible", "e": "e(t) exposed", "i": "i(t) symptomatic",
    "a": "a(t) asymptomatic", "r": "r(t) recovered", "d": "d(t) deceased",
}
TIME_LABEL = "t [day]"


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    # no date and fixed ids so identical data gives identical bytes
    with matplotlib.rc_context({"svg.hashsalt": "epiact", "svg.fonttype": "none"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def _compartments(tables, path):
    traj = tables["trajectory"]
    fig, axes = plt.subplots(2, 3, figsize=(12, 6.5), sharex=True)
    for ax, name in zip(axes.flat, ("s", "e", "i", "a", "r", "d")):
        ax.plot(traj.times, traj[name], lw=1.6)
        ax.set_title(LABELS[name])
        ax.set_ylabel(f"{name}(t) [fraction]")
        ax.grid(alpha=0.3)
    for ax in axes[-1]:
        ax.set_xlabel(TIME_LABEL)
    return _save(fig, path)


def _classes(tables, path):
    traj = tables["trajectory"]
    fig, (left, right) = plt.subplots(1, 2, figsize=(12, 4.5))
    for name in ("s", "e", "r"):
        left.plot(traj.times, traj[name], label=LABELS[name])
    for name in ("i", "a", "d"):
        right.plot(traj.times, traj[name], label=LABELS[name])
    left.set_title("premium-paying classes")
    right.set_title("benefit-receiving classes")
    for ax in (left, right):
        ax.set_xlabel(TIME_LABEL)
        ax.set_ylabel("fraction of population")
        ax.legend()
        ax.grid(alpha=0.3)
    return _save(fig, path)


def _empirical_forces(tables, path):
    hz = tables["hazards"]
    fig, axes = plt.subplots(1, 3, figsize=(14, 4.2))
    axes[0].plot(hz.times, hz["mu_se"], color="darkred")
    axes[0].set_ylabel(r"$\mu^{s+e}_t$ [1/day]")
    axes[0].set_title("force of infection (empirical)")
    axes[1].plot(hz.times, hz["mu_ia"], color="darkgreen")
    axes[1].axhline(0.0, color="grey", lw=0.8)
    axes[1].set_ylabel(r"$\mu^{i+a}_t$ [1/day]")
    axes[1].set_title("force of removal")
    axes[2].plot(hz.times, hz["mu_se"], color="darkred", label=r"$\mu^{s+e}_t$")
    axes[2].plot(hz.times, hz["mu_ia"], color="darkgreen", label=r"$\mu^{i+a}_t$")
    axes[2].set_ylabel("rate [1/day]")
    axes[2].legend()
    for ax in axes:
        ax.set_xlabel(TIME_LABEL)
        ax.grid(alpha=0.3)
    return _save(fig, path)


def _forces_survival(tables, path):
    hz = tables["hazards"]
    fig, axes = plt.subplots(2, 3, figsize=(14, 7.5))
    axes[0, 0].plot(hz.times, hz["lambda"], color="darkblue")
    axes[0, 0].set_ylabel(r"$\lambda(t)$ [1/day]")
    axes[0, 1].plot(hz.times, hz["mu_d"], color="black")
    axes[0, 1].set_ylabel(r"$\mu^d(t)$ [1/day]")
    axes[0, 2].semilogy(hz.times, hz["lambda"], color="darkblue", label=r"$\lambda(t)$")
    axes[0, 2].semilogy(hz.times, hz["mu_d"], color="black", label=r"$\mu^d(t)$")
    axes[0, 2].set_ylabel("rate [1/day] (log)")
    axes[0, 2].legend()
    axes[1, 0].plot(hz.times, hz["p_s"], color="darkblue")
    axes[1, 0].set_ylabel(r"$p_s(t)$ [probability]")
    axes[1, 1].plot(hz.times, hz["p_l"], color="black")
    axes[1, 1].set_ylabel(r"$p_l(t)$ [probability]")
    axes[1, 2].plot(hz.times, hz["p_s"], color="darkblue", label=r"$p_s(t)$")
    axes[1, 2].plot(hz.times, hz["p_l"], color="black", label=r"$p_l(t)$")
    axes[1, 2].set_ylabel("probability")
    axes[1, 2].legend()
    for ax in axes.flat:
        ax.set_xlabel(TIME_LABEL)
        ax.grid(alpha=0.3)
    return _save(fig, path)


def _force_comparison(tables, path):
    hz = tables["hazards"]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(hz.times, hz["mu_se"], color="darkred", label=r"$\mu^{s+e}_t$ (empirical)")
    ax.plot(hz.times, hz["lambda"], color="darkblue", label=r"$\lambda(t)$ (mechanistic)")
    ax.set_xlabel(TIME_LABEL)
    ax.set_ylabel("force of infection [1/day]")
    ax.legend()
    ax.grid(alpha=0.3)
    return _save(fig, path)


def _reserve(tables, path):
    sweep = tables["reserve_sweep"]
    names = sweep.names
    n = len(names) + 1
    cols = 2 if n > 1 else 1
    rows = -(-n // cols)
    fig, axes = plt.subplots(rows, cols, figsize=(6 * cols, 4 * rows), squeeze=False)
    flat = list(axes.flat)
    for ax, name in zip(flat, names):
        ax.plot(sweep.times, sweep[name])
        ax.set_title(f"V(t), premium = {name.removeprefix('V_x')} x pi*")
    for name in names:
        flat[len(names)].plot(sweep.times, sweep[name], label=name.removeprefix("V_x") + " x pi*")
    flat[len(names)].set_title("comparison")
    flat[len(names)].legend()
    for ax in flat[: n]:
        ax.axhline(0.0, color="grey", lw=0.8)
        ax.set_xlabel(TIME_LABEL)
        ax.set_ylabel("V(t) [currency/person]")
        ax.grid(alpha=0.3)
    for ax in flat[n:]:
        ax.set_visible(False)
    return _save(fig, path)


_RENDERERS = {
    "compartments": _compartments,
    "classes": _classes,
    "empirical_forces": _empirical_forces,
    "forces_survival": _forces_survival,
    "force_comparison": _force_comparison,
    "reserve": _reserve,
}


def render_plots(tables: Mapping[str, SeriesTable], out_dir, plots: Iterable[str]) -> list[Path]:
    """Write ``<plot>.svg`` for every requested plot and return the paths."""
    out_dir = Path(out_dir)
    written = []
    for plot in plots:
        if plot not in _RENDERERS:
            raise ValueError(f"unknown plot {plot!r}")
        missing = [name for name in REQUIRES[plot] if name not in tables]
        if missing:
            raise ValueError(f"plot {plot!r} needs table(s) {', '.join(missing)}")
        written.append(_RENDERERS[plot](tables, out_dir / f"{plot}.svg"))
    return written
