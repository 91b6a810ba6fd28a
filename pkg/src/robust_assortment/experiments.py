"""Reproducible experiment suites with CSV outputs.

Each experiment writes one detail CSV and one summary CSV.  Replication
streams are derived from (seed, experiment, cell, replication) so results are
byte-identical across reruns and independent of worker scheduling; the only
non-deterministic output line is the generated-at header comment, which
consumers are expected to ignore when comparing files.
"""
from __future__ import annotations

import csv
import datetime
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .estimation import point_and_lcb, rank_breaking
from .learning import LearnConfig, _plan_on_estimate, learn_robust_assortment, suboptimality
from .model import MnlModel, nominal_expected_revenue
from .planning import plan, plan_unconstrained
from .radius import ConstantRadius, VaryingRadius
from .simulate import (
    generate_dataset,
    instance_cardinality,
    instance_sample_efficiency,
    perturb_prior,
    prior_of,
    random_schedule,
    shift_metrics,
)

SCHEMA = "robust-assort/1"
ENV_THREADS = "ROBUST_ASSORT_THREADS"

EXPERIMENT_NAMES = ("exp1", "exp2", "exp3", "fig1-demo", "fig2-demo")


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative experiment inputs; defaults follow the study protocols."""

    name: str
    seed: int
    replications: int = 25
    n_grid: tuple[int, ...] = (12000, 60000, 180000)
    rho_grid: tuple[float, ...] = (0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5)
    rho0_grid: tuple[float, ...] = (0.05, 0.075, 0.1, 0.125, 0.15, 0.175)
    k_grid: tuple[int, ...] = (1, 2, 3, 4, 5, 6, 7, 8, 9, 10)
    n_effect: int = 1000
    rho_exp3: float = 0.1
    rho0_exp3: float = 0.005
    n_items_exp2: int = 50
    n_dataset_exp2: int = 20000
    perturbations_per_bucket: int = 10000
    rho_grid_exp2: tuple[float, ...] = tuple(round(0.1 * i, 2) for i in range(11))
    rho0_grid_exp2: tuple[float, ...] = tuple(round(0.02 * i, 2) for i in range(11))
    delta: float = None  # type: ignore[assignment]  # default 0.1/N at use site
    eps_plan: float | None = None
    out_dir: str = "."
    workers: int | None = None

    def rng_for(self, *path) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence((self.seed, hash_path(path))))

    def to_dict(self) -> dict:
        payload = {}
        for key, value in self.__dict__.items():
            payload[key] = list(value) if isinstance(value, tuple) else value
        return payload


def hash_path(path) -> int:
    """Stable small integer from a tuple of strings/ints (for seed spawning)."""
    acc = 0
    for part in path:
        for ch in str(part):
            acc = (acc * 131 + ord(ch)) % (2 ** 61 - 1)
        acc = (acc * 131 + 7) % (2 ** 61 - 1)
    return acc


def default_config(name: str, seed: int, out_dir: str = ".", **overrides) -> ExperimentConfig:
    if name not in EXPERIMENT_NAMES:
        raise ValueError(f"unknown experiment {name!r}; choose from {EXPERIMENT_NAMES}")
    base = ExperimentConfig(name=name, seed=seed, out_dir=out_dir)
    return replace(base, **overrides) if overrides else base


@dataclass
class ResultTable:
    """Detail and summary rows plus their column names, CSV-serializable."""

    detail_columns: tuple[str, ...]
    detail_rows: list[tuple]
    summary_columns: tuple[str, ...]
    summary_rows: list[tuple]

    def write(self, out_dir, name: str, config: ExperimentConfig) -> list[str]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for kind, cols, rows in (
            ("detail", self.detail_columns, self.detail_rows),
            ("summary", self.summary_columns, self.summary_rows),
        ):
            path = out / f"{name}_{kind}.csv"
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(f"# schema: {SCHEMA}\n")
                fh.write(f"# experiment: {name} seed: {config.seed}\n")
                fh.write(f"# generated: {datetime.datetime.now().isoformat()}\n")
                writer = csv.writer(fh)
                writer.writerow(cols)
                for row in sorted(rows, key=lambda r: tuple(str(x) for x in r)):
                    writer.writerow(row)
            written.append(str(path))
        return written


def _worker_count(cfg: ExperimentConfig) -> int:
    if cfg.workers is not None:
        return max(1, cfg.workers)
    env = os.environ.get(ENV_THREADS)
    return max(1, int(env)) if env else 1


def _map_tasks(fn, tasks: list, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [fn(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


# ---------------------------------------------------------------------------
# Experiment 1: sample efficiency of double pessimism vs the plug-in baseline
# ---------------------------------------------------------------------------

def _exp1_cell(task) -> list[tuple]:
    cfg, family, rho, n, rep = task
    model, schedule_factory = instance_sample_efficiency()
    spec = ConstantRadius(rho) if family == "constant" else VaryingRadius(rho, model.v_tot)
    delta = cfg.delta if cfg.delta is not None else 0.1 / model.n_items
    rng = cfg.rng_for("exp1", family, rho, n, rep)
    schedule = schedule_factory(n, rng)
    dataset = generate_dataset(model, schedule, rng)
    counts = rank_breaking(dataset, model.n_items)
    estimate = point_and_lcb(counts, delta)
    star = plan(model, 3, spec).value
    rows = []
    for method, pessimism in (("pessimistic", True), ("plugin", False)):
        learn_cfg = LearnConfig(
            k=3, delta=delta, spec=spec, revenues=tuple(model.revenues),
            r_max=model.r_max, eps_plan=cfg.eps_plan, pessimism=pessimism,
        )
        v_used = estimate.v_lcb if pessimism else estimate.v_hat
        items, _ = _plan_on_estimate(np.asarray(v_used, dtype=float), learn_cfg)
        gap = suboptimality(model, spec, items, 3, eps=learn_cfg.resolved_eps(),
                            star_value=star)
        rows.append((method, family, rho, n, rep, gap))
    return rows


def run_exp_sample_efficiency(cfg: ExperimentConfig) -> ResultTable:
    """Suboptimality of the pessimistic learner vs the plug-in baseline."""
    tasks = []
    for family, grid in (("constant", cfg.rho_grid), ("varying", cfg.rho0_grid)):
        for rho in grid:
            for n in cfg.n_grid:
                for rep in range(cfg.replications):
                    tasks.append((cfg, family, rho, n, rep))
    chunks = _map_tasks(_exp1_cell, tasks, _worker_count(cfg))
    detail = [row for chunk in chunks for row in chunk]
    summary = _summarize(detail, key=lambda r: (r[0], r[1], r[2], r[3]), value_index=5)
    return ResultTable(
        detail_columns=("method", "family", "rho", "n", "replication", "suboptimality"),
        detail_rows=detail,
        summary_columns=("method", "family", "rho", "n", "mean_suboptimality", "replications"),
        summary_rows=summary,
    )


# ---------------------------------------------------------------------------
# Experiment 2: robustness of the learned assortments under prior shifts
# ---------------------------------------------------------------------------

def _exp2_instance(cfg: ExperimentConfig) -> tuple[MnlModel, float]:
    rng = cfg.rng_for("exp2", "instance")
    n = cfg.n_items_exp2
    # keep the total attraction moderate so the full prior-budget grid is valid
    v = rng.uniform(0.5, 1.5, size=n) * (2.0 / n)
    r = rng.uniform(0.1, 1.0, size=n)
    model = MnlModel(attractions=v, revenues=r, r_max=1.0)
    rho0_bound = math.log1p(1.0 / model.v_tot)
    return model, rho0_bound


def run_exp_robustness(cfg: ExperimentConfig) -> ResultTable:
    """Revenue gains of radius-indexed assortments under random prior shifts."""
    model, rho0_bound = _exp2_instance(cfg)
    n_items = model.n_items
    delta = cfg.delta if cfg.delta is not None else 0.1 / n_items
    rng = cfg.rng_for("exp2", "dataset")
    schedule = random_schedule(cfg.n_dataset_exp2, n_items, rng)
    dataset = generate_dataset(model, schedule, rng)

    grids = {
        "constant": [float(r) for r in cfg.rho_grid_exp2],
        "varying": [float(r) for r in cfg.rho0_grid_exp2 if r < 0.95 * rho0_bound],
    }
    learned: dict[str, dict[float, tuple[int, ...]]] = {}
    for family, grid in grids.items():
        learned[family] = {}
        for rho in grid:
            spec = (ConstantRadius(rho) if family == "constant"
                    else VaryingRadius(rho, model.v_tot))
            learn_cfg = LearnConfig(k=n_items, delta=delta, spec=spec,
                                    revenues=tuple(model.revenues), r_max=model.r_max,
                                    eps_plan=cfg.eps_plan)
            items, _ = learn_robust_assortment(dataset, n_items, learn_cfg)
            learned[family][rho] = items

    buckets = (("small", (0.0, 1.0)), ("large", (1.0, math.inf)))
    detail = []
    for bucket_name, bucket in buckets:
        models = []
        for sample in range(cfg.perturbations_per_bucket):
            sample_rng = cfg.rng_for("exp2", "perturb", bucket_name, sample)
            shifted, kl = perturb_prior(model, bucket, sample_rng)
            models.append((sample, shifted, kl))
        for family, grid in grids.items():
            gains, rel_gains, best_radii = shift_metrics(
                learned[family], [m for _, m, _ in models], grid
            )
            for (sample, _, kl), gain, rel, rho_star in zip(
                models, gains, rel_gains, best_radii
            ):
                detail.append((sample, bucket_name, family, kl, gain, rel, rho_star))

    summary = []
    for family in grids:
        for bucket_name, _ in buckets:
            rows = [r for r in detail if r[1] == bucket_name and r[2] == family]
            gains = np.array([r[4] for r in rows])
            rels = np.array([r[5] for r in rows])
            radii = np.array([r[6] for r in rows])
            summary.append((
                family, bucket_name, len(rows), float(gains.mean()),
                float(np.nanmean(rels)) if np.any(~np.isnan(rels)) else math.nan,
                float(radii.mean()),
            ))
    return ResultTable(
        detail_columns=("sample_id", "bucket", "family", "kl", "delta", "delta_rel", "rho_star"),
        detail_rows=detail,
        summary_columns=("family", "bucket", "samples", "mean_delta", "mean_delta_rel",
                         "mean_rho_star"),
        summary_rows=summary,
    )


# ---------------------------------------------------------------------------
# Experiment 3: cardinality constraints and the learning rate
# ---------------------------------------------------------------------------

def _exp3_cell(task) -> list[tuple]:
    cfg, mode, family, k, rep = task
    uniform = mode == "uniform"
    model, schedule = instance_cardinality(k, cfg.n_effect, uniform)
    rho = cfg.rho_exp3 if family == "constant" else cfg.rho0_exp3
    spec = ConstantRadius(rho) if family == "constant" else VaryingRadius(rho, model.v_tot)
    # per-item budget without the 1/N union scaling: these instances pin the
    # per-item duel counts near n_effect, where a scaled budget floors every
    # lower confidence bound at zero and nothing can be learned
    delta = cfg.delta if cfg.delta is not None else 0.1
    eps = cfg.eps_plan if cfg.eps_plan is not None else 1e-5 * model.r_max
    star = plan(model, k, spec, eps=eps).value
    rng = cfg.rng_for("exp3", mode, family, k, rep)
    dataset = generate_dataset(model, schedule, rng)
    learn_cfg = LearnConfig(k=k, delta=delta, spec=spec, revenues=tuple(model.revenues),
                            r_max=model.r_max, eps_plan=eps)
    items, _ = learn_robust_assortment(dataset, model.n_items, learn_cfg)
    gap = suboptimality(model, spec, items, k, eps=eps, star_value=star)
    return [(mode, family, k, rep, gap)]


def run_exp_cardinality(cfg: ExperimentConfig) -> ResultTable:
    """Log-log slope of mean suboptimality against the cardinality cap."""
    tasks = []
    for mode in ("uniform", "nonuniform"):
        for family in ("constant", "varying"):
            for k in cfg.k_grid:
                for rep in range(cfg.replications):
                    tasks.append((cfg, mode, family, k, rep))
    chunks = _map_tasks(_exp3_cell, tasks, _worker_count(cfg))
    detail = [row for chunk in chunks for row in chunk]
    means = _summarize(detail, key=lambda r: (r[0], r[1], r[2]), value_index=4)
    slopes = {}
    for mode in ("uniform", "nonuniform"):
        for family in ("constant", "varying"):
            pts = [(row[2], row[3]) for row in means
                   if row[0] == mode and row[1] == family and row[2] >= 2 and row[3] > 0.0]
            slopes[(mode, family)] = _loglog_slope(pts)
    summary = [
        (row[0], row[1], row[2], row[3], row[4], slopes[(row[0], row[1])])
        for row in means
    ]
    return ResultTable(
        detail_columns=("mode", "family", "k", "replication", "suboptimality"),
        detail_rows=detail,
        summary_columns=("mode", "family", "k", "mean_suboptimality", "replications",
                         "loglog_slope"),
        summary_rows=summary,
    )


def _loglog_slope(points: list[tuple[float, float]]) -> float:
    """OLS slope of log(mean) on log(k); NaN with fewer than two points."""
    if len(points) < 2:
        return math.nan
    xs = np.log([p[0] for p in points])
    ys = np.log([p[1] for p in points])
    slope, _ = np.polyfit(xs, ys, 1)
    return float(slope)


def _summarize(detail, key, value_index: int) -> list[tuple]:
    groups: dict[tuple, list[float]] = {}
    for row in detail:
        groups.setdefault(key(row), []).append(float(row[value_index]))
    return [
        (*group_key, float(np.mean(vals)), len(vals))
        for group_key, vals in sorted(groups.items(), key=lambda kv: tuple(map(str, kv[0])))
    ]


# ---------------------------------------------------------------------------
# Demos
# ---------------------------------------------------------------------------

def run_fig2_demo(cfg: ExperimentConfig) -> ResultTable:
    """Optimal-assortment cardinality under matched constant vs varying budgets."""
    detail = []
    for instance in range(5):
        rng = cfg.rng_for("fig2", instance)
        n = 8
        model = MnlModel(
            attractions=rng.uniform(0.05, 0.35, size=n),
            revenues=rng.uniform(0.2, 1.0, size=n),
            r_max=1.0,
        )
        bound = math.log1p(1.0 / model.v_tot)
        for frac in (0.1, 0.25, 0.4, 0.55, 0.7):
            rho = frac * bound
            size_const = len(plan_unconstrained(model, ConstantRadius(rho)).assortment)
            size_vary = len(
                plan_unconstrained(model, VaryingRadius(rho, model.v_tot)).assortment
            )
            detail.append((instance, rho, size_const, size_vary))
    mean_const = float(np.mean([r[2] for r in detail]))
    mean_vary = float(np.mean([r[3] for r in detail]))
    return ResultTable(
        detail_columns=("instance", "rho", "size_constant", "size_varying"),
        detail_rows=detail,
        summary_columns=("mean_size_constant", "mean_size_varying", "cells"),
        summary_rows=[(mean_const, mean_vary, len(detail))],
    )


def run_fig1_demo(cfg: ExperimentConfig) -> ResultTable:
    """Revenue surface of robust vs non-robust assortments under two shift axes."""
    n = 6
    # risky high-revenue low-attraction items alongside safe low-revenue ones,
    # so the robust and nominal plans genuinely differ
    model = MnlModel(
        attractions=np.array([0.15, 0.2, 0.25, 0.8, 1.0, 1.2]),
        revenues=np.array([1.0, 0.95, 0.9, 0.45, 0.4, 0.35]),
        r_max=1.0,
    )
    bound = math.log1p(1.0 / model.v_tot)
    spec = VaryingRadius(0.5 * bound, model.v_tot)
    s_robust = plan_unconstrained(model, spec).assortment
    s_nominal = plan(model, n, ConstantRadius(0.0)).assortment

    p0 = prior_of(model)
    # two adversarial tilt directions: toward no purchase, toward low revenue
    d1 = np.zeros(n + 1)
    d1[0] = 1.0
    d2 = np.concatenate(([0.0], model.r_max - model.revenues))

    def shifted_model(a1: float, a2: float) -> MnlModel:
        logits = np.log(p0) + a1 * d1 + a2 * d2
        prior = np.exp(logits - logits.max())
        prior /= prior.sum()
        from .simulate import model_from_prior

        return model_from_prior(prior, model.revenues, model.r_max)

    # scale the axes so the corner shifts stay within KL 0.1 of nominal
    from .simulate import kl_between_priors

    scale = 1.0
    for _ in range(60):
        corner = prior_of(shifted_model(scale, scale))
        if kl_between_priors(corner, p0) <= 0.1:
            break
        scale *= 0.8
    detail = []
    grid = np.linspace(0.0, 1.0, 11)
    for a1 in grid:
        for a2 in grid:
            shifted = shifted_model(scale * a1, scale * a2)
            detail.append((
                round(float(a1), 3), round(float(a2), 3),
                nominal_expected_revenue(shifted, s_nominal),
                nominal_expected_revenue(shifted, s_robust),
            ))
    worst_nominal = min(r[2] for r in detail)
    worst_robust = min(r[3] for r in detail)
    return ResultTable(
        detail_columns=("alpha1", "alpha2", "revenue_nominal_plan", "revenue_robust_plan"),
        detail_rows=detail,
        summary_columns=("worst_revenue_nominal_plan", "worst_revenue_robust_plan", "cells"),
        summary_rows=[(worst_nominal, worst_robust, len(detail))],
    )


RUNNERS = {
    "exp1": run_exp_sample_efficiency,
    "exp2": run_exp_robustness,
    "exp3": run_exp_cardinality,
    "fig1-demo": run_fig1_demo,
    "fig2-demo": run_fig2_demo,
}


def run_experiment(cfg: ExperimentConfig) -> list[str]:
    """Run one experiment and write its CSVs; returns the written paths."""
    table = RUNNERS[cfg.name](cfg)
    return table.write(cfg.out_dir, cfg.name.replace("-", "_"), cfg)
