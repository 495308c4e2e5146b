"""Frozen run configurations for each reproducible figure.

Identifiers never change meaning; new parameter choices get a new identifier.
"""
from __future__ import annotations

import time
from pathlib import Path

from . import io
from .errors import UsageError
from .runner import RunConfig, run

_N900 = {"N": 900}
_COH10 = {"kind": "coherent", "mean": 10.0}
_THERM10 = {"kind": "thermal", "mean": 10.0}


def _steps(N: int, span: float, approx: int) -> int:
    """Smallest step count >= approx whose spacing advances the fast oscillation (period 1/(4N) in tau)
    by roughly half a cycle, so a moving window sees well-spread phases instead of an aliased one."""
    s = approx
    if span / (s - 1) * 4 * N < 0.35:
        return s  # already several samples per fast cycle; aliasing is not a concern
    while not 0.35 <= (span / (s - 1) * 4 * N) % 1.0 <= 0.65:
        s += 1
    return s


def _series(dist, solver, lo, hi, steps, model=_N900, **options):
    steps = _steps(model["N"], hi - lo, steps)
    return {"model": dict(model), "distribution": dict(dist), "branch": "down", "solver": solver,
            "grid": {"tau_min": lo, "tau_max": hi, "steps": steps}, "options": options}


def _q_panel(tau):
    return {"model": dict(_N900), "distribution": {"kind": "coherent", "mean": 10.0}, "branch": "down",
            "solver": "mta", "observable": "q", "alpha_grid": {"tau": tau, "resolution": 201}, "options": {"N_cap": 30}}


FIGURES: dict[str, dict] = {
    "fig1a": _series(_COH10, "exact", 0.0, 5.5, 2001),
    "fig1b": _series(_COH10, "mta", 0.0, 5.5, 2001, corrected=True),
    "fig2a": _series(_THERM10, "exact", 0.0, 5.5, 2001),
    "fig2b": _series(_THERM10, "mta", 0.0, 5.5, 2001, corrected=True),
    "fig3a": _series(_COH10, "exact", 0.0, 1.5, 3001),
    "fig3b": _series(_THERM10, "exact", 0.0, 1.5, 3001),
    "fig4a": _series(_COH10, "exact", 0.0, 20.0, 4001, model={"N": 169}),
    "fig4b": _series(_COH10, "exact", 0.0, 50.0, 10001, model={"N": 1600}),
    "fig5a": _series(_COH10, "exact", 0.0, 5.5, 2001),
    "fig5b": _series(_COH10, "refined", 0.0, 5.5, 2001),
    "fig6": _series(_COH10, "refined", 0.0, 800.0, 80001),
    "fig7a": _series(_COH10, "exact", 190.0, 290.0, 20001),
    "fig7b": _series(_COH10, "refined", 190.0, 290.0, 20001),
    "fig8": _series(_COH10, "exact", 665.0, 765.0, 20001),
    "fig9a": _series(_THERM10, "exact", 0.0, 10.0, 2001),
    "fig9b": _series(_THERM10, "refined", 0.0, 20.0, 4001),
    "fig9c": _series(_THERM10, "refined", 0.0, 800.0, 80001),
    "fig10": {**_series(_COH10, "exact", 0.0, 2.0, 4001), "observable": "entropy"},
    "fig11": _series(_COH10, "exact", 0.0, 2.0, 4001),
    "table6a": _q_panel(0.0),
    "table6b": _q_panel(1.0),
    "table6c": _q_panel(0.5),
    "table6d": _q_panel(0.25),
    "table6e": _q_panel(0.125),
    "table6f": _q_panel(1.0 / 6.0),
}


def figure_config(fig_id: str, threads: int = 1) -> RunConfig:
    if fig_id not in FIGURES:
        raise UsageError("unknown figure id", id=fig_id, known=sorted(FIGURES))
    return RunConfig.from_dict({**FIGURES[fig_id], "threads": threads})


def reproduce(fig_id: str, out_dir, *, threads: int = 1, svg: bool = False):
    """Write <out_dir>/<fig_id>/<fig_id>.csv with its manifest; returns the run result."""
    cfg = figure_config(fig_id, threads)
    target = Path(out_dir) / fig_id
    t0 = time.perf_counter()
    result = run(cfg, target / f"{fig_id}.csv", svg=svg, report=cfg.observable == "series",
                 manifest_extra={"figure": fig_id})
    io.write_json({"figure": fig_id, "config": cfg.to_dict(), "files": [f.name for f in result.files],
                   "runtime_s": {"compute": result.runtime, "total": time.perf_counter() - t0}},
                  target / "manifest.json")
    return result
