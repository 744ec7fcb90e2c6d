"""Monte-Carlo harness: the l_inf simulation grid and the rate study.

Each trial is identified by ``(r_index, n_index, rep)``; its data seed is
``derive_seed(master_seed, r_index, n_index, rep)``, and every estimator in
the trial sees the same dataset. Results are sorted by
``(r, n, rep, estimator)`` before writing, so ``jobs`` never changes output.
Per-trial excess risk is exact (closed form on the fitted direction); there
is no test-set noise.
"""

from __future__ import annotations

import configparser
import csv
import io
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .errors import InvalidInputError, ParseError, SingularCovarianceError
from .estimators import ESTIMATORS, fit
from .model import GaussianMixture, derive_seed, figure1_mean, sample
from .norms import LINF_BALL, LpBall, parse_ball
from .risk import LinearClassifier, phi_bar, robust_risk_linear, robust_shift
from .linalg import mahalanobis_sq
from .svgplot import write_loglog_svg

TRIALS_HEADER = ["r", "n", "rep", "seed", "estimator", "excess_risk", "robust_risk", "solver_iters", "wall_ms"]
AGGREGATE_HEADER = ["r", "n", "estimator", "mean_excess", "stderr_excess"]
SLOPES_HEADER = ["r", "estimator", "slope", "n_min", "n_max", "points"]
INSTANCES_HEADER = ["r", "r_fig", "adv_snr", "optimal_robust_risk", "baseline_plateau_excess"]

FIG1_R = (0.5, 1.0, 2.0)
FIG1_N = (50, 100, 200, 400, 800, 1600, 3200, 6400, 12800)


@dataclass(frozen=True)
class ExperimentConfig:
    """Simulation grid. Defaults reproduce the d=50, l_inf, eps=0.1 study."""

    r_set: tuple = FIG1_R
    n_set: tuple = FIG1_N
    reps: int = 10
    d: int = 50
    ball: LpBall = LINF_BALL
    eps: float = 0.1
    master_seed: int = 0
    estimators: tuple = ("plugin", "mean_baseline")
    ridge: float = 0.0
    # used only when the sample covariance is singular and ridge == 0
    fallback_ridge: float = 1e-3
    output_dir: str = "results"
    jobs: int = 1
    timing: bool = False
    # slope is fitted over n in [max(n) / slope_span, max(n)]
    slope_span: float = 16.0

    def __post_init__(self):
        object.__setattr__(self, "r_set", tuple(float(r) for r in self.r_set))
        object.__setattr__(self, "n_set", tuple(int(n) for n in self.n_set))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        if not self.r_set or any(not (r > 0 and math.isfinite(r)) for r in self.r_set):
            raise InvalidInputError("r values must be positive")
        if not self.n_set or any(n < 1 for n in self.n_set):
            raise InvalidInputError("n values must be >= 1")
        if self.reps < 1 or self.d < 1 or self.jobs < 1:
            raise InvalidInputError("reps, d and jobs must be >= 1")
        if not (self.eps >= 0 and math.isfinite(self.eps)):
            raise InvalidInputError("eps must be >= 0")
        if self.ridge < 0 or self.fallback_ridge < 0:
            raise InvalidInputError("ridge values must be >= 0")
        if not 0 <= self.master_seed < 2**64:
            raise InvalidInputError("master_seed must be an unsigned 64-bit integer")
        bad = [e for e in self.estimators if e not in ESTIMATORS]
        if bad or not self.estimators:
            raise InvalidInputError(f"unknown estimators {bad}; choose from {', '.join(ESTIMATORS)}")
        if not self.slope_span > 1:
            raise InvalidInputError("slope_span must be > 1")

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def _split(value, conv):
    return tuple(conv(v) for v in value.replace(";", ",").split(",") if v.strip())


_CONVERTERS = {
    "r_set": lambda v: _split(v, float),
    "n_set": lambda v: _split(v, int),
    "reps": int,
    "d": int,
    "ball": parse_ball,
    "eps": float,
    "master_seed": int,
    "estimators": lambda v: _split(v, str.strip),
    "ridge": float,
    "fallback_ridge": float,
    "output_dir": str,
    "jobs": int,
    "timing": lambda v: v.strip().lower() in ("1", "true", "yes", "on"),
    "slope_span": float,
}


def parse_config(text: str, path=None, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Parse ``key = value`` lines (an optional ``[experiment]`` header is allowed).

    Lists are comma separated; ``#`` and ``;`` start comments.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), comment_prefixes=("#", ";"))
    body = text if text.lstrip().startswith("[") else "[experiment]\n" + text
    try:
        cp.read_string(body)
    except configparser.Error as exc:
        raise ParseError(str(exc).splitlines()[0], path) from None
    if not cp.has_section("experiment"):
        raise ParseError("missing [experiment] section", path)
    values = {}
    for key, raw in cp.items("experiment"):
        if key not in _CONVERTERS:
            raise ParseError(f"unknown key {key!r}", path)
        try:
            values[key] = _CONVERTERS[key](raw)
        except (ValueError, ParseError) as exc:
            raise ParseError(f"bad value for {key}: {exc}", path) from None
    try:
        return replace(base or ExperimentConfig(), **values)
    except InvalidInputError as exc:
        raise ParseError(str(exc), path) from None


def read_config(path, base=None) -> ExperimentConfig:
    path = Path(path)
    return parse_config(path.read_text(), path, base)


@dataclass(frozen=True)
class TrialRecord:
    r: float
    n: int
    rep: int
    seed: int
    estimator: str
    excess_risk: float
    robust_risk: float
    solver_iters: int
    wall_ms: float

    def row(self):
        return [repr(self.r), self.n, self.rep, self.seed, self.estimator, repr(self.excess_risk),
                repr(self.robust_risk), self.solver_iters, repr(self.wall_ms)]


@dataclass(frozen=True)
class Instance:
    """Population quantities for one value of r."""

    r: float
    model: GaussianMixture
    r_fig: float
    optimal_risk: float
    baseline_plateau: float

    @property
    def adv_snr(self) -> float:
        return 2.0 * self.r_fig


def build_instance(r: float, cfg: ExperimentConfig) -> Instance:
    model = GaussianMixture.isotropic(figure1_mean(r, cfg.eps, cfg.d))
    cert = robust_shift(model, cfg.ball, cfg.eps, tol=1e-12)
    r_fig = math.sqrt(mahalanobis_sq(model.mu - cert.z, model.sigma))
    opt = phi_bar(r_fig)
    plateau = robust_risk_linear(LinearClassifier(model.mu), model, cfg.ball, cfg.eps) - opt
    return Instance(r, model, r_fig, opt, plateau)


def _run_trial(args):
    cfg, inst, n, ri, ni, rep = args
    seed = derive_seed(cfg.master_seed, ri, ni, rep)
    data = sample(inst.model, n, seed)
    out = []
    for name in cfg.estimators:
        t0 = time.perf_counter()
        try:
            res = fit(name, data, cfg.ball, cfg.eps, sigma=inst.model.sigma, ridge=cfg.ridge)
        except SingularCovarianceError:
            if cfg.fallback_ridge <= 0:
                raise
            res = fit(name, data, cfg.ball, cfg.eps, sigma=inst.model.sigma, ridge=cfg.fallback_ridge)
        risk = robust_risk_linear(res.classifier, inst.model, cfg.ball, cfg.eps)
        wall = (time.perf_counter() - t0) * 1e3 if cfg.timing else 0.0
        out.append(TrialRecord(inst.r, n, rep, seed, name, risk - inst.optimal_risk, risk,
                               res.solver.iterations, round(wall, 3)))
    return out


def run_trials(cfg: ExperimentConfig, instances=None):
    instances = instances or [build_instance(r, cfg) for r in cfg.r_set]
    jobs = [(cfg, inst, n, ri, ni, rep)
            for ri, inst in enumerate(instances)
            for ni, n in enumerate(cfg.n_set)
            for rep in range(cfg.reps)]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            chunks = list(pool.map(_run_trial, jobs, chunksize=max(1, len(jobs) // (4 * cfg.jobs))))
    else:
        chunks = [_run_trial(j) for j in jobs]
    order = {e: i for i, e in enumerate(cfg.estimators)}
    records = [rec for chunk in chunks for rec in chunk]
    records.sort(key=lambda t: (t.r, t.n, t.rep, order[t.estimator]))
    return records, instances


def aggregate(records, estimators):
    """Mean and standard error of excess risk per (r, n, estimator)."""
    groups = {}
    for t in records:
        groups.setdefault((t.r, t.n, t.estimator), []).append(t.excess_risk)
    order = {e: i for i, e in enumerate(estimators)}
    rows = []
    for (r, n, est) in sorted(groups, key=lambda k: (k[0], k[1], order[k[2]])):
        vals = np.array(groups[(r, n, est)])
        se = float(np.std(vals, ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else float("nan")
        rows.append({"r": r, "n": n, "estimator": est, "mean_excess": float(np.mean(vals)), "stderr_excess": se})
    return rows


def loglog_slope(ns, values):
    """Least-squares slope of log(value) on log(n); NaN if any value is non-positive."""
    ns, values = np.asarray(ns, dtype=float), np.asarray(values, dtype=float)
    if len(ns) < 2 or np.any(values <= 0):
        return float("nan")
    return float(np.polyfit(np.log(ns), np.log(values), 1)[0])


def slopes(agg_rows, cfg: ExperimentConfig):
    n_hi = max(cfg.n_set)
    n_lo = n_hi / cfg.slope_span
    out = []
    for r in cfg.r_set:
        for est in cfg.estimators:
            pts = [(a["n"], a["mean_excess"]) for a in agg_rows
                   if a["r"] == r and a["estimator"] == est and a["n"] >= n_lo - 1e-9]
            ns = [p[0] for p in pts]
            out.append({"r": r, "estimator": est, "slope": loglog_slope(ns, [p[1] for p in pts]),
                        "n_min": min(ns) if ns else 0, "n_max": max(ns) if ns else 0, "points": len(ns)})
    return out


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def prepare_output_dir(path) -> Path:
    """Create ``path`` and prove it is writable before any computation starts."""
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    probe = out / f".write-probe-{os.getpid()}"
    probe.write_text("")
    probe.unlink()
    return out


@dataclass
class StudyResult:
    config: ExperimentConfig
    records: list
    aggregates: list
    instances: list
    slopes: list = field(default_factory=list)
    files: dict = field(default_factory=dict)

    def aggregate_for(self, r, n, estimator):
        for a in self.aggregates:
            if a["r"] == r and a["n"] == n and a["estimator"] == estimator:
                return a
        raise KeyError((r, n, estimator))

    def slope_for(self, r, estimator):
        for s in self.slopes:
            if s["r"] == r and s["estimator"] == estimator:
                return s["slope"]
        raise KeyError((r, estimator))


def _write_common(out: Path, res: StudyResult):
    files = {
        "trials": out / "trials.csv",
        "aggregate": out / "aggregate.csv",
        "instances": out / "instances.csv",
    }
    files["trials"].write_text(_csv_text(TRIALS_HEADER, (t.row() for t in res.records)))
    files["aggregate"].write_text(_csv_text(AGGREGATE_HEADER, ([a[k] for k in AGGREGATE_HEADER] for a in res.aggregates)))
    files["instances"].write_text(_csv_text(
        INSTANCES_HEADER,
        ([i.r, i.r_fig, i.adv_snr, i.optimal_risk, i.baseline_plateau] for i in res.instances)))
    return files


def run_figure1(cfg: ExperimentConfig | None = None) -> StudyResult:
    """Excess robust risk vs n for each r and estimator; writes CSVs and ``figure1.svg``."""
    cfg = cfg or ExperimentConfig()
    out = prepare_output_dir(cfg.output_dir)
    records, instances = run_trials(cfg)
    res = StudyResult(cfg, records, aggregate(records, cfg.estimators), instances)
    res.slopes = slopes(res.aggregates, cfg)
    res.files = _write_common(out, res)
    panels = []
    for inst in instances:
        series = {}
        for est in cfg.estimators:
            rows = [a for a in res.aggregates if a["r"] == inst.r and a["estimator"] == est]
            series[est] = ([a["n"] for a in rows], [a["mean_excess"] for a in rows])
        panels.append((f"r = {inst.r:g} (AdvSNR {inst.adv_snr:g})", series))
    res.files["svg"] = out / "figure1.svg"
    write_loglog_svg(res.files["svg"], panels,
                     title=f"excess robust risk, d={cfg.d}, {cfg.ball}, eps={cfg.eps:g}, {cfg.reps} reps")
    return res


def run_rate_study(cfg: ExperimentConfig | None = None) -> StudyResult:
    """Mean and standard error per (r, n) plus fitted log-log slopes.

    Writes ``trials.csv``, ``aggregate.csv`` (also copied to ``rate.csv``),
    ``instances.csv`` and ``slopes.csv``.
    """
    cfg = cfg or ExperimentConfig(estimators=("plugin", "known_sigma"))
    out = prepare_output_dir(cfg.output_dir)
    records, instances = run_trials(cfg)
    res = StudyResult(cfg, records, aggregate(records, cfg.estimators), instances)
    res.slopes = slopes(res.aggregates, cfg)
    res.files = _write_common(out, res)
    res.files["rate"] = out / "rate.csv"
    res.files["rate"].write_text(res.files["aggregate"].read_text())
    res.files["slopes"] = out / "slopes.csv"
    res.files["slopes"].write_text(_csv_text(SLOPES_HEADER, ([s[k] for k in SLOPES_HEADER] for s in res.slopes)))
    return res


def config_fields():
    return [f.name for f in fields(ExperimentConfig)]
