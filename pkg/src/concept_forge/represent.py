"""Archetype selection: one representative sample per concept."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .cqm import ConceptAssignment
from .dataset import Dataset, DescriptionSpacePartition

log = logging.getLogger(__name__)

GEOMETRIC = "geometric-mean"
ARITHMETIC = "arithmetic-mean"
METHODS = (GEOMETRIC, ARITHMETIC)

# shift that keeps log() finite for normalized features that are exactly 0
GEO_EPS = 1e-9


@dataclass(frozen=True, eq=False)
class Representative:
    concept: int
    sample_index: int
    distance: float
    centroid: np.ndarray
    space: int
    method: str

    def to_json_dict(self) -> dict:
        return {
            "sample_index": self.sample_index,
            "centroid": self.centroid.tolist(),
            "distance": self.distance,
            "method": self.method,
            "space": self.space,
        }


@dataclass(eq=False)
class RepresentativeSelection:
    chosen: dict[int, Representative] = field(default_factory=dict)
    empty: list[int] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "concepts": {str(a + 1): r.to_json_dict() for a, r in sorted(self.chosen.items())},
            "empty_concepts": [a + 1 for a in self.empty],
        }


def centroid(points: np.ndarray, method: str = GEOMETRIC) -> np.ndarray:
    """Component-wise geometric or arithmetic mean of the rows of ``points``."""
    points = np.asarray(points, dtype=np.float64)
    if method == ARITHMETIC:
        return points.mean(axis=0)
    if method == GEOMETRIC:
        if np.any(points + GEO_EPS <= 0):
            raise ValueError("geometric mean needs non-negative coordinates; use the arithmetic mean")
        return np.exp(np.mean(np.log(points + GEO_EPS), axis=0)) - GEO_EPS
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def select_representatives(a: ConceptAssignment, d: Dataset, partition: DescriptionSpacePartition,
                           space_index: int = 0, method: str = GEOMETRIC) -> RepresentativeSelection:
    """Member closest (Euclidean) to its concept's centroid in one description space.

    Ties go to the lowest sample index. Empty concepts are listed in
    ``empty`` and skipped.
    """
    if not 0 <= space_index < partition.n_spaces:
        raise IndexError(f"space {space_index} out of range for {partition.n_spaces} spaces")
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    proj = d.samples[:, list(partition.spaces[space_index])]
    out = RepresentativeSelection()
    for alpha, members in enumerate(a.concept_sets):
        if not members:
            log.warning("concept %d is empty; no representative selected", alpha + 1)
            out.empty.append(alpha)
            continue
        pts = proj[members]
        c = centroid(pts, method)
        dist = np.linalg.norm(pts - c, axis=1)
        # members are ascending, so argmin's first hit is the lowest index
        j = int(np.argmin(dist))
        out.chosen[alpha] = Representative(alpha, members[j], float(dist[j]), c, space_index, method)
    return out


def random_representatives(a: ConceptAssignment, n_per_concept: int, seed: int) -> dict:
    """Seeded uniform draw of ``n_per_concept`` members per concept.

    Draws without replacement, or with replacement when the concept is
    smaller than ``n_per_concept``. Returns ``{"concepts": {alpha: [...]}, "empty": [...]}``.
    """
    if n_per_concept < 1:
        raise ValueError("n_per_concept must be at least 1")
    rng = np.random.default_rng(seed)
    picks: dict[int, list[int]] = {}
    empty = []
    for alpha, members in enumerate(a.concept_sets):
        if not members:
            empty.append(alpha)
            continue
        replace = len(members) < n_per_concept
        picks[alpha] = sorted(int(i) for i in rng.choice(members, size=n_per_concept, replace=replace))
    return {"concepts": picks, "empty": empty}
