"""Synthetic datasets: the ten-sample walkthrough, the cost/quality demo, and blob surrogates."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .dataset import Dataset, DescriptionSpacePartition, normalize, partition_features
from .regions import EllipsoidRegion, RegionGrid

INCONSISTENT = -1

# Raw 2-D coordinates of x1..x10 in each of the three spaces. With the three
# unit circles below they realize the candidate sets
#   C11={x1..x5}  C12={x2..x6,x9}  C13={x1..x6}
#   C21={x6..x9}  C22={x4,x7,x8}   C23={x1,x5..x9}
#   C31={x8,x10}  C32={x5,x9,x10}  C33={x4,x10}
_FIG1_POINTS = (
    [[-0.36, -0.22], [-0.32, -0.25], [-0.28, -0.28], [-0.24, -0.31], [-0.20, -0.34],
     [1.56, -0.22], [1.60, -0.25], [1.16, 0.67], [1.64, -0.28], [0.60, 1.46]],
    [[1.80, 1.30], [-0.36, -0.22], [-0.32, -0.25], [0.60, -0.29], [0.04, 0.67],
     [-0.28, -0.28], [1.56, -0.22], [1.60, -0.25], [0.08, 0.64], [0.60, 1.46]],
    [[0.60, -0.29], [-0.36, -0.22], [-0.32, -0.25], [0.04, 0.67], [0.64, -0.32],
     [0.68, -0.35], [1.56, -0.22], [1.60, -0.25], [1.64, -0.28], [0.60, 1.46]],
)
_FIG1_CIRCLES = ((0.0, 0.0), (1.2, 0.0), (0.6, 1.04))
_FIG1_RADIUS = 1.0


def _normalized_ellipse(center, radius, norm, features) -> EllipsoidRegion:
    """Axis-aligned ellipsoid that a raw-space ball becomes after min-max scaling."""
    lo = np.array([norm[j][0] for j in features])
    span = np.array([norm[j][1] - norm[j][0] for j in features])
    return EllipsoidRegion((np.asarray(center) - lo) / span, radius / span, np.zeros(len(features) * (len(features) - 1) // 2))


def figure1_fixture() -> tuple[Dataset, DescriptionSpacePartition, RegionGrid]:
    """Ten samples, six features in three 2-D spaces, and a three-concept grid.

    Evaluated with s = 0.15 and no preferences this gives the concepts
    {x2, x3}, {x7}, {x10} and Q close to 0.033.
    """
    raw = np.hstack([np.array(p) for p in _FIG1_POINTS])
    names = tuple(f"f{j + 1}" for j in range(6))
    d = normalize(Dataset(raw, names))
    partition = partition_features(d, [["f1", "f2"], ["f3", "f4"], ["f5", "f6"]])
    grid = RegionGrid(tuple(
        tuple(_normalized_ellipse(_FIG1_CIRCLES[a], _FIG1_RADIUS, d.normalization, partition.spaces[k])
              for k in range(3))
        for a in range(3)
    ))
    return d, partition, grid


def cost_quality_demo(n: int = 200, seed: int = 0) -> tuple[Dataset, dict[str, DescriptionSpacePartition]]:
    """Two elongated groups along the cost/quality diagonal with overlapping marginals.

    Returns the normalized dataset and two partitions: ``"joint"`` (one 2-D
    space) and ``"separate"`` (cost and quality as 1-D spaces).
    """
    if n < 4:
        raise ValueError("need at least 4 samples")
    rng = np.random.default_rng(seed)
    group = np.arange(n) % 2
    along = np.where(group == 0, 0.3, 0.7) + rng.uniform(-0.22, 0.22, n)
    across = rng.normal(0.0, 0.06, n)
    diag = np.array([1.0, 1.0]) / np.sqrt(2)
    perp = np.array([1.0, -1.0]) / np.sqrt(2)
    pts = np.sqrt(2) * along[:, None] * diag + across[:, None] * perp
    d = normalize(Dataset(pts, ("cost", "quality")))
    return d, {
        "joint": partition_features(d, [["cost", "quality"]]),
        "separate": partition_features(d, [["cost"], ["quality"]]),
    }


@dataclass(frozen=True)
class BlobSpec:
    """Blobs drawn uniformly inside balls, one ball per blob per description space.

    ``centers[b][k]`` and ``spreads[b][k]`` give blob b's ball in space k (raw
    coordinates). A fraction ``1 - consistency`` of samples gets blob
    identities that disagree across spaces.
    """

    dims: tuple[int, ...]
    n_blobs: int
    centers: tuple[tuple[tuple[float, ...], ...], ...]
    spreads: tuple[tuple[float, ...], ...]
    n_samples: int = 300
    consistency: float = 1.0
    seed: int = 0
    feature_names: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.dims or any(n < 1 for n in self.dims):
            raise ValueError("every description space needs dimension >= 1")
        if self.n_blobs < 1:
            raise ValueError("need at least one blob")
        if not 0.0 <= self.consistency <= 1.0:
            raise ValueError("consistency must lie in [0, 1]")
        if self.n_samples < 1:
            raise ValueError("need at least one sample")
        if len(self.centers) != self.n_blobs or len(self.spreads) != self.n_blobs:
            raise ValueError("centers and spreads need one entry per blob")
        for b in range(self.n_blobs):
            if len(self.centers[b]) != len(self.dims) or len(self.spreads[b]) != len(self.dims):
                raise ValueError(f"blob {b} needs one center and spread per space")
            for k, n in enumerate(self.dims):
                if len(self.centers[b][k]) != n:
                    raise ValueError(f"blob {b} center in space {k} has wrong dimension")
                if not self.spreads[b][k] > 0:
                    raise ValueError("spreads must be positive")
        if self.feature_names is not None and len(self.feature_names) != sum(self.dims):
            raise ValueError("need one feature name per feature")

    @property
    def n_spaces(self) -> int:
        return len(self.dims)

    @classmethod
    def separated(cls, dims: Sequence[int], n_blobs: int = 3, n_samples: int = 300,
                  consistency: float = 1.0, seed: int = 0, spread: float | None = None,
                  feature_names: Sequence[str] | None = None) -> "BlobSpec":
        """Blob balls with non-overlapping placement in [0, 1]^n (gap of at least half a spread)."""
        dims = tuple(int(n) for n in dims)
        spread = spread if spread is not None else 0.3 / n_blobs
        rng = np.random.default_rng([seed, 7])
        per_space = []
        for n in dims:
            for _ in range(10_000):
                c = rng.uniform(spread, 1 - spread, size=(n_blobs, n))
                dist = np.linalg.norm(c[:, None] - c[None], axis=2)
                if n_blobs == 1 or dist[np.triu_indices(n_blobs, 1)].min() > 2.5 * spread:
                    break
            else:
                # fall back to evenly spaced points on the diagonal
                c = np.repeat(((np.arange(n_blobs) + 0.5) / n_blobs)[:, None], n, axis=1)
            per_space.append(c)
        centers = tuple(tuple(tuple(per_space[k][b].tolist()) for k in range(len(dims))) for b in range(n_blobs))
        spreads = tuple(tuple(spread for _ in dims) for _ in range(n_blobs))
        names = tuple(feature_names) if feature_names is not None else None
        return cls(dims, n_blobs, centers, spreads, n_samples, consistency, seed, names)

    def to_json_dict(self) -> dict:
        return {
            "dims": list(self.dims),
            "n_blobs": self.n_blobs,
            "centers": [[list(c) for c in row] for row in self.centers],
            "spreads": [list(s) for s in self.spreads],
            "n_samples": self.n_samples,
            "consistency": self.consistency,
            "seed": self.seed,
        }


class BlobSample(NamedTuple):
    dataset: Dataset
    partition: DescriptionSpacePartition
    labels: np.ndarray       # intended blob, or INCONSISTENT
    identities: np.ndarray   # (N_D, N_DS) blob actually used in each space


def _uniform_ball(rng: np.random.Generator, m: int, n: int) -> np.ndarray:
    v = rng.standard_normal((m, n))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v * rng.uniform(0.0, 1.0, (m, 1)) ** (1.0 / n)


def _draw_identities(rng: np.random.Generator, spec: BlobSpec) -> tuple[np.ndarray, np.ndarray]:
    m, k = spec.n_samples, spec.n_spaces
    intended = rng.integers(spec.n_blobs, size=m)
    identities = np.repeat(intended[:, None], k, axis=1)
    can_disagree = spec.n_blobs > 1 and k > 1
    flip = (rng.random(m) >= spec.consistency) & can_disagree
    rows = np.flatnonzero(flip)
    while rows.size:
        identities[rows] = rng.integers(spec.n_blobs, size=(rows.size, k))
        # redraw until the spaces really disagree
        rows = rows[np.all(identities[rows] == identities[rows, :1], axis=1)]
    labels = np.where(flip, INCONSISTENT, intended)
    return labels, identities


def blobs(spec: BlobSpec) -> BlobSample:
    """Draw a normalized blob dataset with ground-truth labels."""
    rng = np.random.default_rng(spec.seed)
    labels, identities = _draw_identities(rng, spec)
    cols = []
    for k, n in enumerate(spec.dims):
        centers = np.array([spec.centers[b][k] for b in range(spec.n_blobs)])
        spreads = np.array([spec.spreads[b][k] for b in range(spec.n_blobs)])
        ids = identities[:, k]
        cols.append(centers[ids] + spreads[ids, None] * _uniform_ball(rng, spec.n_samples, n))
    names = spec.feature_names or tuple(f"s{k + 1}_f{j + 1}" for k, n in enumerate(spec.dims) for j in range(n))
    d = normalize(Dataset(np.hstack(cols), names))
    groups, pos = [], 0
    for n in spec.dims:
        groups.append(list(names[pos:pos + n]))
        pos += n
    return BlobSample(d, partition_features(d, groups), labels, identities)


def enclosing_grid(spec: BlobSpec, d: Dataset, margin: float = 1e-9) -> RegionGrid:
    """One concept per blob whose region in each space is that blob's (normalized) ball."""
    if not d.is_normalized:
        raise ValueError("enclosing_grid expects the normalized dataset produced by blobs()")
    rows, pos = [], 0
    feats = []
    for n in spec.dims:
        feats.append(list(range(pos, pos + n)))
        pos += n
    for b in range(spec.n_blobs):
        rows.append(tuple(
            _normalized_ellipse(spec.centers[b][k], spec.spreads[b][k] * (1 + margin), d.normalization, feats[k])
            for k in range(spec.n_spaces)
        ))
    return RegionGrid(tuple(rows))


AIRFOIL_SETUPS = {
    "two-spaces": (4, 6),
    "four-spaces": (4, 2, 2, 2),
    "five-spaces": (4, 5, 2, 2, 2),
}


def _airfoil_names(dims: tuple[int, ...]) -> tuple[str, ...]:
    design = [f"p{i + 1}" for i in range(4)]
    camber = [f"y{i + 1}" for i in range(5)]
    objectives = [f"{c}_a{a}" for a in (0, 1, 3) for c in ("cd", "cl")]
    if dims == (4, 6) or dims == (4, 2, 2, 2):
        return tuple(design + objectives)
    if dims == (4, 5, 2, 2, 2):
        return tuple(design + camber + objectives)
    return tuple(f"s{k + 1}_f{j + 1}" for k, n in enumerate(dims) for j in range(n))


def airfoil_surrogate(dims: Sequence[int] = (4, 2, 2, 2), n_samples: int = 2503, n_blobs: int = 3,
                      consistency: float = 0.8, seed: int = 0) -> BlobSample:
    """Blob stand-in for the airfoil data with the same feature counts per space.

    With a 5-D second space (the camber-line layout) those features are a
    fixed linear image of the design parameters plus small noise.
    """
    dims = tuple(int(n) for n in dims)
    spec = BlobSpec.separated(dims, n_blobs, n_samples, consistency, seed, feature_names=_airfoil_names(dims))
    sample = blobs(spec)
    if len(dims) > 1 and dims[0] == 4 and dims[1] == 5:
        rng = np.random.default_rng([seed, 11])
        x = sample.dataset.samples.copy()
        design = x[:, 0:4]
        mix = rng.uniform(0.0, 1.0, (4, 5))
        x[:, 4:9] = design @ mix + rng.normal(0.0, 0.02, (n_samples, 5))
        raw = Dataset(x, sample.dataset.feature_names)
        d = normalize(raw)
        groups, pos = [], 0
        for n in dims:
            groups.append(list(d.feature_names[pos:pos + n]))
            pos += n
        identities = sample.identities.copy()
        identities[:, 1] = identities[:, 0]
        sample = BlobSample(d, partition_features(d, groups), sample.labels, identities)
    return sample
