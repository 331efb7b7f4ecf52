"""Concept identification: maximize the CQM over the ellipsoid genome with CMA-ES."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import kernels
from .cmaes import CMAES
from .cqm import CqmConfig, CqmReport, evaluate, quality_from_counts
from .dataset import Dataset, DescriptionSpacePartition, PreferenceSet
from .regions import RegionGrid, decode, genome_length, inverse_softplus

log = logging.getLogger(__name__)

INITIAL_AXIS_FRACTION = 0.25


class OptimizerError(RuntimeError):
    pass


@dataclass(frozen=True)
class OptimizerConfig:
    """CMA-ES budget and seeding. Defaults follow the airfoil experiments."""

    n_concepts: int = 3
    population: int = 200
    generations: int = 320
    initial_sigma: float = 0.15
    seed: int = 0
    restarts: int = 1
    threads: int = 1

    def __post_init__(self):
        if self.population < 4:
            raise ValueError("population must be at least 4")
        if self.generations < 1:
            raise ValueError("generations must be at least 1")
        if not self.initial_sigma > 0:
            raise ValueError("initial_sigma must be positive")
        if self.n_concepts < 1:
            raise ValueError("n_concepts must be at least 1")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")


@dataclass(frozen=True)
class GenerationRecord:
    generation: int
    best_q: float
    generation_best_q: float
    mean_q: float
    sigma: float

    def to_json_dict(self) -> dict:
        return {
            "generation": self.generation,
            "best_q": self.best_q,
            "generation_best_q": self.generation_best_q,
            "mean_q": self.mean_q,
            "sigma": self.sigma,
        }


@dataclass(eq=False)
class OptimizationTrace:
    seed: int
    genome_length: int
    records: list[GenerationRecord] = field(default_factory=list)
    best_genome: np.ndarray | None = None
    report: CqmReport | None = None

    @property
    def best_q(self) -> float:
        return self.records[-1].best_q if self.records else 0.0


@dataclass(eq=False)
class IdentificationResult:
    grid: RegionGrid
    report: CqmReport
    trace: OptimizationTrace

    @property
    def q(self) -> float:
        return self.report.total_q

    @property
    def seed(self) -> int:
        return self.trace.seed


class GenomeObjective:
    """Q of a genome on a fixed dataset/partition. Thread-safe; holds no mutable state."""

    def __init__(self, d: Dataset, partition: DescriptionSpacePartition, prefs: PreferenceSet | None,
                 cqm_cfg: CqmConfig, n_concepts: int):
        self.xs = partition.project(d)
        self.dims = np.array(partition.dims, dtype=np.int64)
        self.n_concepts = n_concepts
        self.n_samples = d.n_samples
        self.cfg = cqm_cfg
        self.pref_idx = prefs.validate(d).as_array() if prefs is not None else np.empty(0, dtype=np.int64)
        self.length = genome_length(partition.dims, n_concepts)

    def __call__(self, genome: np.ndarray) -> float:
        return self.score(genome)[0]

    def score(self, genome: np.ndarray) -> tuple[float, float]:
        """``(Q, plateau score)``; the second value only ranks genomes with equal Q."""
        labels = np.empty(self.n_samples, dtype=np.int64)
        cand, members = kernels.genome_counts(np.ascontiguousarray(genome, dtype=np.float64),
                                              self.xs, self.dims, self.n_concepts, labels)
        if self.pref_idx.size:
            hits = labels[self.pref_idx]
            pref_members = np.bincount(hits[hits >= 0], minlength=self.n_concepts)
        else:
            pref_members = np.zeros(self.n_concepts, dtype=np.int64)
        q = quality_from_counts(cand, members, pref_members, self.n_samples, self.pref_idx.size, self.cfg)
        if not math.isfinite(q):
            return -math.inf, -math.inf
        return q, plateau_score(cand, members)


def plateau_score(cand: np.ndarray, members: np.ndarray) -> float:
    """Number of nonempty concepts plus a fractional membership term.

    Stays informative where Q is flat at zero, e.g. while some concept has no
    exclusive members. The integer part never trades a concept away; the
    fraction, ``sum(log(1 + |C_alpha|))`` scaled below 1, favors more and more
    evenly spread members.
    """
    n = max(int(cand.max(initial=0)), 1)
    frac = np.sum(np.log1p(members)) / (members.size * math.log1p(n) + 1.0)
    return float(np.count_nonzero(members)) + float(frac)


def _space_extents(xs: np.ndarray, partition: DescriptionSpacePartition) -> list[np.ndarray]:
    out = []
    for k in range(partition.n_spaces):
        block = xs[:, partition.space_slice(k)]
        span = block.max(axis=0) - block.min(axis=0)
        # a constant feature has no extent; fall back to the unit interval
        out.append(np.where(span > 0, span, 1.0))
    return out


def _seed_rows(xs: np.ndarray, n_concepts: int, rng: np.random.Generator) -> list[int]:
    n = xs.shape[0]
    if n_concepts > n:
        return rng.choice(n, size=n_concepts, replace=True).tolist()
    rows = [int(rng.integers(n))]
    d2 = np.sum((xs - xs[rows[0]]) ** 2, axis=1)
    for _ in range(1, n_concepts):
        w = d2.copy()
        w[rows] = 0.0
        if w.sum() > 0:
            row = int(rng.choice(n, p=w / w.sum()))
        else:
            # every remaining sample duplicates a chosen one
            row = int(rng.choice(np.setdiff1d(np.arange(n), rows)))
        rows.append(row)
        d2 = np.minimum(d2, np.sum((xs - xs[row]) ** 2, axis=1))
    return rows


def initialize_population(d: Dataset, partition: DescriptionSpacePartition, n_concepts: int,
                          seed: int) -> np.ndarray:
    """Initial CMA-ES mean.

    Concept centers sit on distinct random samples, drawn k-means++ style
    (probability proportional to squared distance from the centers already
    chosen, over all description-space features). With fewer samples than
    concepts, rows are drawn uniformly with replacement. Semi-axes are a
    quarter of each feature's range; rotation angles are zero.
    """
    rng = np.random.default_rng(seed)
    xs = partition.project(d)
    rows = _seed_rows(xs, n_concepts, rng)
    extents = _space_extents(xs, partition)
    parts = []
    for row in rows:
        for k, n in enumerate(partition.dims):
            parts.append(xs[row, partition.space_slice(k)])
            parts.append(inverse_softplus(INITIAL_AXIS_FRACTION * extents[k]))
            parts.append(np.zeros(n * (n - 1) // 2))
    return np.concatenate(parts)


def _check_degenerate(d: Dataset, partition: DescriptionSpacePartition, n_concepts: int) -> None:
    xs = partition.project(d)
    if n_concepts > 1 and np.all(xs.max(axis=0) == xs.min(axis=0)):
        raise OptimizerError("all description-space features have zero variance; "
                             "no region can tell samples apart, so multiple concepts cannot be separated")


def identify_concepts(d: Dataset, partition: DescriptionSpacePartition, prefs: PreferenceSet | None,
                      cqm_cfg: CqmConfig, opt_cfg: OptimizerConfig,
                      on_generation: Callable[[GenerationRecord], None] | None = None) -> IdentificationResult:
    """One seeded CMA-ES run maximizing Q. Returns the best grid ever evaluated."""
    _check_degenerate(d, partition, opt_cfg.n_concepts)
    objective = GenomeObjective(d, partition, prefs, cqm_cfg, opt_cfg.n_concepts)
    mean = initialize_population(d, partition, opt_cfg.n_concepts, opt_cfg.seed)
    if mean.shape[0] != objective.length:
        raise OptimizerError(f"initial genome has {mean.shape[0]} parameters, expected {objective.length}")
    es = CMAES(mean, opt_cfg.initial_sigma, opt_cfg.population, np.random.default_rng([opt_cfg.seed, 1]))
    trace = OptimizationTrace(seed=opt_cfg.seed, genome_length=objective.length)

    best_genome = mean.copy()
    best_q = objective(mean)
    pool = ThreadPoolExecutor(max_workers=opt_cfg.threads) if opt_cfg.threads > 1 else None
    try:
        for gen in range(opt_cfg.generations):
            x = es.ask()
            if pool is None:
                scores = [objective.score(row) for row in x]
            else:
                # map() preserves input order, so selection does not depend on scheduling
                scores = list(pool.map(objective.score, x))
            qs = np.array([sc[0] for sc in scores])
            soft = np.array([sc[1] for sc in scores])
            i = int(np.argmax(qs))
            if qs[i] > best_q:
                best_q = float(qs[i])
                best_genome = x[i].copy()
            # rank by Q; the plateau score only separates exact ties
            es.tell(x, -qs, -soft)
            rec = GenerationRecord(gen, best_q, float(qs[i]), float(np.mean(qs)), es.sigma)
            trace.records.append(rec)
            if on_generation is not None:
                on_generation(rec)
            if best_q >= 1.0 or es.max_step < 1e-12:
                break
    finally:
        if pool is not None:
            pool.shutdown()

    grid = decode(best_genome, partition, opt_cfg.n_concepts)
    report = evaluate(grid, d, partition, prefs, cqm_cfg)
    if report.total_q != best_q:
        log.warning("re-evaluated Q %r differs from tracked best %r", report.total_q, best_q)
    trace.best_genome = best_genome
    trace.report = report
    log.info("seed %d: Q=%.4f after %d generations", opt_cfg.seed, report.total_q, len(trace.records))
    return IdentificationResult(grid, report, trace)


@dataclass(eq=False)
class MultiRestartResult:
    best: IdentificationResult
    results: list[IdentificationResult]


def multi_restart(d: Dataset, partition: DescriptionSpacePartition, prefs: PreferenceSet | None,
                  cqm_cfg: CqmConfig, opt_cfg: OptimizerConfig,
                  on_generation: Callable[[int, GenerationRecord], None] | None = None) -> MultiRestartResult:
    """Independent runs with seeds ``seed, seed+1, ...``, ranked by Q (ties: lower seed first)."""
    results = []
    for r in range(opt_cfg.restarts):
        cfg = OptimizerConfig(**{**opt_cfg.__dict__, "seed": opt_cfg.seed + r, "restarts": 1})
        cb = None if on_generation is None else (lambda rec, _r=r: on_generation(_r, rec))
        results.append(identify_concepts(d, partition, prefs, cqm_cfg, cfg, cb))
    ranked = sorted(results, key=lambda res: (-res.q, res.seed))
    return MultiRestartResult(ranked[0], ranked)
