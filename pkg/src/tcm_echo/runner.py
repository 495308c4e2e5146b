"""Run configuration and execution shared by the CLI and figure reproduction."""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import analysis, approx, dynamics, entropy, io, qfunction
from .errors import ResolutionError, UsageError
from .model import BRANCHES, ModelParams, make_model, make_weights, model_with_detuning

SOLVERS = ("exact", "alternate", "closed", "afa", "mta", "refined")
OBSERVABLES = ("series", "entropy", "q")
SERIES_SOLVERS = {
    "down": ("exact", "alternate", "closed", "mta", "refined"),
    "up": ("exact", "closed", "afa", "refined"),
}
Q_SOLVERS = {"down": ("exact", "mta"), "up": ("exact", "afa")}


@dataclass(frozen=True)
class RunConfig:
    model: dict
    distribution: dict
    branch: str = "down"
    solver: str = "exact"
    observable: str = "series"
    grid: dict | None = None
    alpha_grid: dict | None = None
    outputs: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)
    threads: int = 1

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        if not isinstance(d, dict):
            raise UsageError("configuration must be a JSON object")
        known = set(cls.__dataclass_fields__) | {"deterministic"}
        extra = sorted(set(d) - known)
        if extra:
            raise UsageError("unknown configuration keys", keys=extra)
        for key in ("model", "distribution"):
            if not isinstance(d.get(key), dict):
                raise UsageError(f"'{key}' section is required and must be an object")
        if d.get("deterministic", True) is not True:
            raise UsageError("runs are always deterministic; 'deterministic' cannot be disabled")
        cfg = cls(**{k: v for k, v in d.items() if k != "deterministic"})
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return {**asdict(self), "deterministic": True}

    def validate(self) -> None:
        if self.branch not in BRANCHES:
            raise UsageError("branch must be 'up' or 'down'", branch=self.branch)
        if self.solver not in SOLVERS:
            raise UsageError("unknown solver", solver=self.solver, choices=list(SOLVERS))
        if self.observable not in OBSERVABLES:
            raise UsageError("unknown observable", observable=self.observable, choices=list(OBSERVABLES))
        if not isinstance(self.threads, int) or self.threads < 1:
            raise UsageError("threads must be a positive integer", threads=self.threads)
        if self.observable == "series" and self.solver not in SERIES_SOLVERS[self.branch]:
            raise UsageError("solver is not available on this branch", solver=self.solver, branch=self.branch)
        if self.observable == "entropy" and self.solver != "exact":
            raise UsageError("entropy is computed from exact eigensystems only", solver=self.solver)
        if self.observable == "q":
            if self.solver not in Q_SOLVERS[self.branch]:
                raise UsageError("solver is not available for the Q function on this branch",
                                 solver=self.solver, branch=self.branch)
            if self.distribution.get("kind") != "coherent":
                raise UsageError("the Q function needs a coherent initial field")
            g = self.alpha_grid or {}
            if "tau" not in g:
                raise UsageError("Q runs need alpha_grid.tau")
            if int(g.get("resolution", 201)) < 2:
                raise UsageError("alpha_grid.resolution must be at least 2")
        else:
            g = self.grid or {}
            for k in ("tau_min", "tau_max", "steps"):
                if k not in g:
                    raise UsageError(f"grid.{k} is required")
            if int(g["steps"]) < 2:
                raise UsageError("grid.steps must be at least 2", steps=g["steps"])
            if not g["tau_max"] >= g["tau_min"]:
                raise UsageError("grid.tau_max must not be below grid.tau_min")
        m = self.model
        if "N" not in m:
            raise UsageError("model.N is required")
        if "Delta" in m and "omega" in m:
            raise UsageError("give either model.omega or model.Delta, not both")

    def params(self) -> ModelParams:
        m = self.model
        try:
            if "Delta" in m:
                return model_with_detuning(int(m["N"]), float(m["Delta"]), gamma=float(m.get("gamma", 1.0)),
                                           Omega=float(m.get("Omega", 1.0)))
            return make_model(int(m["N"]), gamma=float(m.get("gamma", 1.0)), Omega=float(m.get("Omega", 1.0)),
                              omega=float(m.get("omega", 1.0)))
        except (TypeError, ValueError) as exc:
            raise UsageError(f"invalid model: {exc}") from exc

    def weights(self):
        d = self.distribution
        try:
            return make_weights(d["kind"], float(d["mean"]), d.get("n_max"))
        except KeyError as exc:
            raise UsageError(f"distribution needs {exc}") from exc
        except ValueError as exc:
            raise UsageError(f"invalid distribution: {exc}") from exc

    def taus(self) -> np.ndarray:
        g = self.grid
        return np.linspace(float(g["tau_min"]), float(g["tau_max"]), int(g["steps"]))


@dataclass
class RunResult:
    kind: str
    data: object
    solver: str
    files: list
    runtime: float
    report: dict | None = None


def _series(cfg: RunConfig, params: ModelParams, weights, taus):
    opt, t, s = cfg.options, cfg.threads, cfg.solver
    if cfg.branch == "down":
        if s == "exact":
            return dynamics.s4_exact(params, weights, taus, threads=t)
        if s == "alternate":
            return dynamics.s4_alternate(params, weights, taus, threads=t)
        if s == "closed":
            return dynamics.s4_closed_form(params.N, weights, taus, params.Delta, gamma=params.gamma,
                                           time_scale=opt.get("time_scale", "down"))
        if s == "mta":
            return approx.s4_mta(params, weights, taus, corrected=bool(opt.get("corrected", True)), threads=t)
        return approx.s4_refined(params, weights, taus, threads=t)
    if s == "exact":
        return dynamics.s1_exact(params, weights, taus, threads=t)
    if s == "closed":
        return dynamics.s1_closed_form(params.N, weights, taus, params.Delta, gamma=params.gamma)
    if s == "afa":
        return approx.s1_afa(params, weights, taus, threads=t)
    return approx.s1_refined(params, weights, taus, experimental=bool(opt.get("experimental", False)), threads=t)


def compute(cfg: RunConfig):
    """Evaluate the configured observable; returns (kind, data)."""
    params = cfg.params()
    if cfg.observable == "q":
        g = cfg.alpha_grid
        nbar = float(cfg.distribution["mean"])
        absorption = cfg.branch == "down"
        op = ("absorption_" if absorption else "emission_") + ("exact" if cfg.solver == "exact" else "approx")
        return "q", qfunction.q_raster(op, params, nbar, float(g["tau"]), resolution=int(g.get("resolution", 201)),
                                       half_width=g.get("half_width"), theta=float(g.get("theta", 0.0)),
                                       N_cap=int(cfg.options.get("N_cap", 30)), threads=cfg.threads)
    weights = cfg.weights()
    taus = cfg.taus()
    if cfg.observable == "entropy":
        diag = entropy.field_diagonal(params, weights, taus, cfg.branch, threads=cfg.threads)
        return "entropy", entropy.shannon_entropy(diag, weights)
    return "series", _series(cfg, params, weights, taus)


def run(cfg: RunConfig, csv_path=None, *, svg: bool | None = None, report: bool | None = None,
        manifest_extra: dict | None = None) -> RunResult:
    """Compute and write the CSV, its JSON manifest and the optional SVG and revival report."""
    out = cfg.outputs
    csv_path = Path(csv_path or out.get("csv") or "tcm_echo_run.csv")
    svg = bool(out.get("svg", False)) if svg is None else svg
    report = bool(out.get("report", False)) if report is None else report
    t0 = time.perf_counter()
    kind, data = compute(cfg)
    runtime = time.perf_counter() - t0
    files = []
    if kind == "q":
        files.append(io.write_raster_csv(data, csv_path))
    elif kind == "entropy":
        files.append(io.write_entropy_csv(data, csv_path))
    else:
        files.append(io.write_series_csv(data, csv_path))
    rep = None
    if report and kind == "series":
        try:
            rep = analysis.detect_revivals(data).to_dict()
        except ResolutionError as exc:
            rep = {"error": exc.to_dict()}
        files.append(io.write_json(rep, csv_path.with_name(csv_path.stem + ".report.json")))
    if svg:
        files.append(io.write_svg(data, csv_path.with_suffix(".svg")))
    solver = data.meta.get("solver", cfg.solver) if kind != "q" else data.meta["op"]
    tol = {"truncation": 1e-8, "entropy_mass": entropy.MASS_TOLERANCE, "q_tail": qfunction.TAIL_TOLERANCE}
    man = io.manifest(cfg.to_dict(), solver, meta={**data.meta, **(manifest_extra or {})}, tolerances=tol,
                      runtimes={"compute": runtime}, files=[f.name for f in files])
    io.write_json(man, io.sidecar_path(csv_path))
    return RunResult(kind, data, solver, files, runtime, rep)
