"""Exclusive concept assignment and the concept quality measure (CQM).

Concept indices are 0-based here; ``-1`` marks a sample assigned to no
concept. Serialized reports and label files use 1-based concept numbers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import Dataset, DescriptionSpacePartition, PreferenceSet
from .regions import RegionGrid, candidate_sets

NONE = -1


@dataclass(frozen=True)
class CqmConfig:
    """Size scaling ``s`` and preference scaling ``p``, both in [0, 1/2]."""

    s: float = 0.01
    p: float = 0.01

    def __post_init__(self):
        for name in ("s", "p"):
            v = getattr(self, name)
            if not (0.0 <= v <= 0.5):
                raise ValueError(f"{name} must lie in [0, 0.5], got {v}")


@dataclass(frozen=True, eq=False)
class ConceptAssignment:
    labels: np.ndarray            # (N_D,) concept index or -1
    candidate_counts: np.ndarray  # (N_C, N_DS) sizes of the candidate sets

    @property
    def n_concepts(self) -> int:
        return self.candidate_counts.shape[0]

    @property
    def n_spaces(self) -> int:
        return self.candidate_counts.shape[1]

    @property
    def concept_sets(self) -> list[list[int]]:
        return [np.flatnonzero(self.labels == a).tolist() for a in range(self.n_concepts)]

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels[self.labels >= 0], minlength=self.n_concepts)


@dataclass(frozen=True)
class ConceptRecord:
    concept: int
    q_alpha: float
    geometric_mean_term: float
    size_factor: float
    preference_factor: float
    n_members: int
    candidate_counts: tuple[int, ...]
    n_preferences: int

    def to_json_dict(self) -> dict:
        return {
            "concept": self.concept + 1,
            "n_members": self.n_members,
            "q_alpha": self.q_alpha,
            "geometric_mean_term": self.geometric_mean_term,
            "size_factor": self.size_factor,
            "preference_factor": self.preference_factor,
            "candidate_counts": list(self.candidate_counts),
            "n_preferences": self.n_preferences,
        }


@dataclass(frozen=True, eq=False)
class CqmReport:
    total_q: float
    per_concept: tuple[ConceptRecord, ...]
    assignment: ConceptAssignment
    n_samples: int
    n_preferences: int
    config: CqmConfig

    @property
    def labels(self) -> np.ndarray:
        return self.assignment.labels

    def to_json_dict(self) -> dict:
        return {
            "total_q": self.total_q,
            "n_samples": self.n_samples,
            "n_unassigned": int(np.sum(self.labels == NONE)),
            "n_preferences": self.n_preferences,
            "s": self.config.s,
            "p": self.config.p,
            "concepts": [r.to_json_dict() for r in self.per_concept],
        }


def assign(candidates: np.ndarray) -> ConceptAssignment:
    """Exclusive assignment from a boolean membership tensor ``[N_C, N_DS, N_D]``.

    Sample i joins concept a iff it is inside every region of a and inside no
    region of any other concept, in any space.
    """
    cand = np.asarray(candidates, dtype=bool)
    if cand.ndim != 3:
        raise ValueError(f"membership tensor must be 3-D, got shape {cand.shape}")
    any_in = cand.any(axis=1)
    all_in = cand.all(axis=1)
    exclusive = any_in.sum(axis=0) == 1
    hit = np.argmax(any_in, axis=0)
    ok = exclusive & all_in[hit, np.arange(cand.shape[2])]
    labels = np.where(ok, hit, NONE).astype(np.int64)
    return ConceptAssignment(labels, cand.sum(axis=2).astype(np.int64))


def scaling_f(x: float, y: float) -> float:
    """Penalty for a fraction ``x`` that falls within ``y`` of 0 or 1.

    Quarter-ellipse ramps on [0, y) and (1-y, 1]; 1 in between. ``y = 0``
    disables the penalty.
    """
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"fraction must lie in [0, 1], got {x}")
    if not (0.0 <= y <= 0.5):
        raise ValueError(f"scaling parameter must lie in [0, 0.5], got {y}")
    if y == 0.0:
        return 1.0
    # compare 1 - x with y rather than x with 1 - y, which rounds to 1 for tiny y
    u = 1.0 - x
    if x < y:
        t = (x - y) / y
    elif u < y:
        t = (y - u) / y
    else:
        return 1.0
    return math.sqrt(max(0.0, 1.0 - t * t))


def _factors(n_members: int, cand_counts: Sequence[int], n_pref_members: int,
             n_samples: int, n_prefs: int, cfg: CqmConfig) -> tuple[float, float, float, float]:
    if min(cand_counts) == 0:
        # empty candidate region: degenerate concept
        geo = 0.0
    else:
        ratio = 1.0
        for c in cand_counts:
            ratio *= n_members / c
        geo = ratio ** (1.0 / len(cand_counts))
    size = scaling_f(n_members / n_samples, cfg.s)
    pref = scaling_f(n_pref_members / n_prefs, cfg.p) if n_prefs else 1.0
    return geo * size * pref, geo, size, pref


def concept_quality(a: ConceptAssignment, alpha: int, n_total: int,
                    prefs: PreferenceSet | None, cfg: CqmConfig) -> ConceptRecord:
    if not 0 <= alpha < a.n_concepts:
        raise IndexError(f"concept {alpha} out of range")
    members = a.labels == alpha
    n_members = int(members.sum())
    pref_idx = prefs.as_array() if prefs is not None else np.empty(0, dtype=np.int64)
    n_pref_members = int(members[pref_idx].sum()) if pref_idx.size else 0
    cand = tuple(int(c) for c in a.candidate_counts[alpha])
    q, geo, size, pref = _factors(n_members, cand, n_pref_members, n_total, len(pref_idx), cfg)
    return ConceptRecord(alpha, q, geo, size, pref, n_members, cand, n_pref_members)


def total_quality(per_concept: Sequence[ConceptRecord]) -> float:
    if not per_concept:
        raise ValueError("need at least one concept record")
    return math.prod(r.q_alpha for r in per_concept)


def quality_from_counts(cand_counts: np.ndarray, members: np.ndarray, pref_members: np.ndarray,
                        n_samples: int, n_prefs: int, cfg: CqmConfig) -> float:
    """Total Q straight from kernel counts; same arithmetic as :func:`evaluate`."""
    q = 1.0
    for a in range(cand_counts.shape[0]):
        q *= _factors(int(members[a]), cand_counts[a].tolist(), int(pref_members[a]),
                      n_samples, n_prefs, cfg)[0]
    return q


def report_from_assignment(a: ConceptAssignment, n_samples: int, prefs: PreferenceSet | None,
                           cfg: CqmConfig) -> CqmReport:
    records = tuple(concept_quality(a, alpha, n_samples, prefs, cfg) for alpha in range(a.n_concepts))
    n_prefs = len(prefs) if prefs is not None else 0
    return CqmReport(total_quality(records), records, a, n_samples, n_prefs, cfg)


def evaluate(grid: RegionGrid, d: Dataset, partition: DescriptionSpacePartition,
             prefs: PreferenceSet | None = None, cfg: CqmConfig | None = None) -> CqmReport:
    """Candidate sets, exclusive assignment and the full factor breakdown for one grid."""
    cfg = cfg or CqmConfig()
    if prefs is not None:
        prefs.validate(d)
    a = assign(candidate_sets(grid, d, partition))
    return report_from_assignment(a, d.n_samples, prefs, cfg)
