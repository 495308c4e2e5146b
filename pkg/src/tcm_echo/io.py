"""CSV, JSON manifest and optional SVG output.

CSV files are the contract: fixed column order, a header row and floats written
with 17 significant digits so identical arrays give identical bytes.
"""
from __future__ import annotations

import hashlib
import json
import math
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import TimeSeries
from .entropy import EntropySeries
from .qfunction import QRaster

FLOAT_FORMAT = "%.17g"


def _write_columns(path, header: str, columns) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        np.savetxt(fh, data, fmt=FLOAT_FORMAT, delimiter=",")
    return path


def write_series_csv(series: TimeSeries, path) -> Path:
    """Columns tau,value."""
    return _write_columns(path, "tau,value", [series.taus, series.values])


def write_entropy_csv(series: EntropySeries, path) -> Path:
    """Columns tau,S,deltaS."""
    return _write_columns(path, "tau,S,deltaS", [series.taus, series.values, series.delta])


def write_raster_csv(raster: QRaster, path) -> Path:
    """Columns re,im,q, one row per grid node in row-major order (Im alpha outer)."""
    re = np.broadcast_to(raster.re[None, :], raster.values.shape).ravel()
    im = np.broadcast_to(raster.im[:, None], raster.values.shape).ravel()
    return _write_columns(path, "re,im,q", [re, im, raster.values.ravel()])


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def config_hash(config: dict) -> str:
    """sha256 of the canonical JSON form of a configuration."""
    text = json.dumps(_jsonable(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def manifest(config: dict, solver: str, *, meta: dict | None = None, tolerances: dict | None = None,
             runtimes: dict | None = None, files: list | None = None) -> dict:
    return _jsonable({
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "library": "tcm_echo",
        "version": __version__,
        "config": config,
        "config_sha256": config_hash(config),
        "solver": solver,
        "tolerances": tolerances or {},
        "meta": meta or {},
        "runtimes_s": runtimes or {},
        "files": [str(f) for f in files or []],
    })


def write_json(obj: dict, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def write_svg(obj, path) -> Path:
    """Line plot of a series or heat map of a raster. Needs matplotlib."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(7, 4) if isinstance(obj, TimeSeries) else (5, 5))
    if isinstance(obj, QRaster):
        ax.imshow(obj.values, origin="lower", cmap="viridis",
                  extent=(obj.re[0], obj.re[-1], obj.im[0], obj.im[-1]))
        ax.set_xlabel("Re alpha")
        ax.set_ylabel("Im alpha")
        ax.set_title(f"tau = {obj.tau:g}")
    else:
        ax.plot(obj.taus, obj.values, lw=0.4)
        ax.set_xlabel("tau" if obj.meta.get("time_scale") != "absolute" else "t")
        ax.set_ylabel(obj.meta.get("observable", "S"))
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path
