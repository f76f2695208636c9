"""Desk-scale rebuild of the experimental protocol: fixture construction,
task grid, metrics, and the gamma sweep.

The default grid is 16 models x 55 platform prompts x 18
evaluation prompts x 10 seeds = 2880 tasks. Everything is a pure
function of the config's master seed: geometry, prompt draws, and every
task's noise come from named substreams, so reports are bit-identical
across runs and machines.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

import numpy as np

from gmi.bench.generators import make_confounded_generators, substream
from gmi.errors import ValidationError
from gmi.identification import (
    ScoringStrategy,
    build_cache,
    cache_key,
    identify,
)
from gmi.kernel import KernelParams
from gmi.requirement import build_requirement
from gmi.spec import build_spec

__all__ = [
    "DEFAULT_GAMMA_GRID",
    "BenchmarkConfig",
    "BenchmarkTask",
    "MetricsReport",
    "build_benchmark",
    "run_benchmark",
    "gamma_sweep",
    "report_table",
    "report_json",
    "sweep_csv",
]

# the tuning grid; [0.01, 0.05] is the robustness window quoted over it
DEFAULT_GAMMA_GRID = (0.005, 0.006, 0.007, 0.008, 0.009,
                    0.01, 0.02, 0.03, 0.04, 0.05)

DEFAULT_STRATEGIES = ("download", "rkme-embed", "weighted")


@dataclass(frozen=True)
class BenchmarkConfig:
    n_models: int = 16
    n_platform_prompts: int = 55
    n_eval_prompts: int = 18
    n_seeds: int = 10
    image_dim: int = 16
    prompt_dim: int = 8
    noise_sigma: float = 0.05
    pseudo_prompt_sigma: float = 0.05
    pair_radius: float = 5.0
    master_seed: int = 0

    def __post_init__(self):
        for name in ("n_platform_prompts", "n_eval_prompts", "n_seeds"):
            if int(getattr(self, name)) < 1:
                raise ValidationError(f"{name} must be >= 1")
        if float(self.noise_sigma) < 0 or float(self.pseudo_prompt_sigma) < 0:
            raise ValidationError("noise sigmas must be >= 0")
        # n_models/image_dim/prompt_dim are checked by the generator factory

    @property
    def n_tasks(self) -> int:
        return self.n_models * self.n_eval_prompts * self.n_seeds


@dataclass(frozen=True)
class BenchmarkTask:
    query_image: np.ndarray
    query_prompt: np.ndarray
    true_model_id: str
    eval_prompt_index: int
    seed: int


@dataclass(frozen=True)
class MetricsReport:
    """Aggregated metrics for one strategy on one task set.

    top_k holds accuracies for k = 1..M (position of the true model after
    the deterministic tie-break sort); mean_rank uses the tie-averaged
    convention, so a strategy that ties everything lands at (M+1)/2.
    """

    strategy: str
    gamma: float
    n_tasks: int
    top_k: tuple
    mean_rank: float

    def top_k_accuracy(self, k: int) -> float:
        if not 1 <= int(k) <= len(self.top_k):
            raise ValidationError(f"k must be in [1, {len(self.top_k)}]")
        return self.top_k[int(k) - 1]

    def as_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "gamma": self.gamma,
            "n_tasks": self.n_tasks,
            "top_k": list(self.top_k),
            "mean_rank": self.mean_rank,
        }


def build_benchmark(config: BenchmarkConfig = BenchmarkConfig()):
    """Build the registry fixture (list of specs) and the task grid.

    Platform prompts are shared by all models; evaluation prompts are a
    separate draw and must not collide with them. Download counts are
    distinct by construction so the requirement-blind baseline has a
    fixed, tie-free ordering.
    """
    gens = make_confounded_generators(
        n_models=config.n_models, image_dim=config.image_dim,
        prompt_dim=config.prompt_dim, noise_sigma=config.noise_sigma,
        pair_radius=config.pair_radius, master_seed=config.master_seed)

    platform = substream(config.master_seed, 2).uniform(
        -1.0, 1.0, config.n_platform_prompts)
    evals = substream(config.master_seed, 3).uniform(
        -1.0, 1.0, config.n_eval_prompts)
    if set(platform.tolist()) & set(evals.tolist()):
        raise ValidationError("platform and evaluation prompts overlap")

    specs = []
    for m, gen in enumerate(gens):
        rng = substream(config.master_seed, 10, m)
        images = gen.sample(platform, rng)
        prompts = gen.prompt_embedding(platform)
        specs.append(build_spec(
            gen.generator_id, images, prompts,
            metadata={"pair": m // 2, "swapped": bool(m % 2)},
            download_count=10 * (config.n_models - m)))

    tasks = []
    n_eval, n_seeds = config.n_eval_prompts, config.n_seeds
    for m, gen in enumerate(gens):
        for e in range(n_eval):
            for s in range(n_seeds):
                idx = (m * n_eval + e) * n_seeds + s
                rng = substream(config.master_seed, 20, idx)
                image = gen.sample(evals[e], rng)
                prompt = gen.prompt_embedding(evals[e])
                if config.pseudo_prompt_sigma > 0.0:
                    prompt = prompt + rng.normal(
                        scale=config.pseudo_prompt_sigma, size=config.prompt_dim)
                tasks.append(BenchmarkTask(
                    query_image=image, query_prompt=prompt,
                    true_model_id=gen.generator_id,
                    eval_prompt_index=e, seed=s))
    return specs, tasks


def _as_strategy(item, gamma: float) -> ScoringStrategy:
    if isinstance(item, ScoringStrategy):
        return item
    return ScoringStrategy(variant=str(item), kernel=KernelParams(gamma))


def run_benchmark(specs, tasks, strategies=DEFAULT_STRATEGIES,
                  gamma: float = 0.02) -> dict:
    """Score every task under every strategy; one MetricsReport each.

    ``strategies`` entries are variant strings (given the shared gamma)
    or ready ScoringStrategy values. On synthetic fixtures rkme-basic and
    rkme-embed run in the same space and coincide; they still get their
    own rows when both are requested. Tasks are independent, so any
    execution order produces the same reports.
    """
    specs = list(specs)
    tasks = list(tasks)
    if not specs or not tasks:
        raise ValidationError("need at least one spec and one task")
    known = {s.model_id for s in specs}
    missing = {t.true_model_id for t in tasks} - known
    if missing:
        raise ValidationError(f"tasks reference unknown models: {sorted(missing)}")

    chosen = [_as_strategy(s, gamma) for s in strategies]
    labels = [s.variant for s in chosen]
    if len(set(labels)) != len(labels):
        raise ValidationError(f"duplicate strategy labels: {labels}")

    m = len(specs)
    cache_pool: dict[tuple, dict] = {}
    reports = {}
    for label, strat in zip(labels, chosen):
        key = cache_key(strat)
        if key not in cache_pool:
            cache_pool[key] = {s.model_id: build_cache(s, strat) for s in specs}
        caches = cache_pool[key]
        position_hits = np.zeros(m, dtype=np.int64)
        rank_sum = 0.0
        for task in tasks:
            req = build_requirement(task.query_image, task.query_prompt)
            ranking = identify(specs, req, strat, caches=caches)
            position_hits[ranking.entry_for(task.true_model_id).rank - 1] += 1
            rank_sum += ranking.tie_averaged_rank(task.true_model_id)
        top_k = tuple((np.cumsum(position_hits) / len(tasks)).tolist())
        reports[label] = MetricsReport(
            strategy=label, gamma=strat.kernel.gamma, n_tasks=len(tasks),
            top_k=top_k, mean_rank=rank_sum / len(tasks))
    return reports


def gamma_sweep(specs, tasks, strategy="weighted", gammas=DEFAULT_GAMMA_GRID) -> list:
    """One report per gamma for a single strategy; duplicates in
    ``gammas`` simply repeat identical reports."""
    gammas = list(gammas)
    if not gammas:
        raise ValidationError("gammas must be nonempty")
    out = []
    for g in gammas:
        if isinstance(strategy, ScoringStrategy):
            strat = dataclasses.replace(strategy, kernel=KernelParams(g))
        else:
            strat = _as_strategy(strategy, float(g))
        report = run_benchmark(specs, tasks, strategies=(strat,),
                               gamma=float(g))[strat.variant]
        out.append((float(g), report))
    return out


def report_table(reports: dict, max_k: int = 4) -> str:
    """Fixed-width table over the reports, top-1..top-max_k plus rank."""
    ks = list(range(1, max_k + 1))
    header = ["strategy"] + [f"top-{k}" for k in ks] + ["mean-rank", "tasks"]
    rows = [header]
    for label, rep in reports.items():
        rows.append([label]
                    + [f"{rep.top_k_accuracy(min(k, len(rep.top_k))):.3f}" for k in ks]
                    + [f"{rep.mean_rank:.3f}", str(rep.n_tasks)])
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    lines = []
    for i, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)))
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def report_json(reports: dict, extra: dict | None = None) -> str:
    doc = {"reports": [rep.as_dict() for rep in reports.values()]}
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2)


def sweep_csv(sweep, max_k: int = 4) -> str:
    """Plot-ready accuracy-vs-gamma data, one row per gamma."""
    ks = list(range(1, max_k + 1))
    lines = ["gamma," + ",".join(f"top{k}" for k in ks) + ",mean_rank"]
    for g, rep in sweep:
        cells = [f"{g}"] + [f"{rep.top_k_accuracy(min(k, len(rep.top_k)))}" for k in ks]
        cells.append(f"{rep.mean_rank}")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
