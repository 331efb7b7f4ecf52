"""Hyper-ellipsoid candidate regions and the genome that encodes them.

Genome layout, per concept then per description space of dimension n::

    center (n) | raw semi-axes (n) | Givens angles (n(n-1)/2)

Raw semi-axes pass through ``softplus(v) + 1e-6``, so every real genome
decodes to a valid region. Angles rotate the planes (i, j), i < j, in
lexicographic order.
"""
from __future__ import annotations

import abc
import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from . import kernels
from .dataset import Dataset, DatasetError, DescriptionSpacePartition


class RegionError(ValueError):
    pass


def n_region_params(n: int) -> int:
    """Parameters of an n-dimensional hyper-ellipsoid: n(n+3)/2."""
    return n * (n + 3) // 2


def genome_length(dims: Sequence[int], n_concepts: int) -> int:
    return n_concepts * sum(n_region_params(n) for n in dims)


def inverse_softplus(axes: np.ndarray) -> np.ndarray:
    """Raw genome values that decode to ``axes``."""
    y = np.asarray(axes, dtype=np.float64) - kernels.AXIS_FLOOR
    if np.any(y <= 0):
        raise RegionError(f"semi-axes must exceed {kernels.AXIS_FLOOR}")
    # log(expm1(y)) rewritten to stay finite for large y
    return y + np.log(-np.expm1(-y))


class Region(abc.ABC):
    """A simply connected candidate region in one description space."""

    dim: int

    @abc.abstractmethod
    def contains(self, x) -> bool: ...

    @abc.abstractmethod
    def to_json_dict(self) -> dict: ...


@dataclass(frozen=True, eq=False)
class EllipsoidRegion(Region):
    """Closed hyper-ellipsoid ``{x : |S^-1 R^T (x - center)| <= 1}``."""

    center: np.ndarray
    semi_axes: np.ndarray
    rotation_angles: np.ndarray

    def __post_init__(self):
        c = np.array(self.center, dtype=np.float64).ravel()
        a = np.array(self.semi_axes, dtype=np.float64).ravel()
        t = np.array(self.rotation_angles, dtype=np.float64).ravel()
        n = c.shape[0]
        if n < 1:
            raise RegionError("region dimension must be at least 1")
        if a.shape[0] != n:
            raise RegionError(f"{a.shape[0]} semi-axes for a {n}-dimensional region")
        if t.shape[0] != n * (n - 1) // 2:
            raise RegionError(f"{t.shape[0]} rotation angles for a {n}-dimensional region, "
                              f"expected {n * (n - 1) // 2}")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(a)) and np.all(np.isfinite(t))):
            raise RegionError("region parameters must be finite")
        if np.any(a <= 0):
            raise RegionError("semi-axes must be positive")
        for name, v in (("center", c), ("semi_axes", a), ("rotation_angles", t)):
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    @property
    def n_params(self) -> int:
        return n_region_params(self.dim)

    @cached_property
    def transform(self) -> np.ndarray:
        """``S^-1 R^T``: maps offsets from the center onto the unit ball."""
        t = kernels.inverse_transform(self.semi_axes, self.rotation_angles)
        t.setflags(write=False)
        return t

    def rotation(self) -> np.ndarray:
        return (self.transform * self.semi_axes[:, None]).T

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=np.float64).ravel()
        if x.shape[0] != self.dim:
            raise RegionError(f"point of dimension {x.shape[0]} tested against a {self.dim}-dimensional region")
        z = self.transform @ (x - self.center)
        return bool(z @ z <= 1.0)

    def to_json_dict(self) -> dict:
        return {
            "center": self.center.tolist(),
            "semi_axes": self.semi_axes.tolist(),
            "rotation_angles": self.rotation_angles.tolist(),
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "EllipsoidRegion":
        return cls(doc["center"], doc["semi_axes"], doc["rotation_angles"])

    @classmethod
    def ball(cls, center, radius: float) -> "EllipsoidRegion":
        c = np.asarray(center, dtype=np.float64).ravel()
        n = c.shape[0]
        return cls(c, np.full(n, float(radius)), np.zeros(n * (n - 1) // 2))


def contains(r: Region, x) -> bool:
    return r.contains(x)


@dataclass(frozen=True, eq=False)
class RegionGrid:
    """N_C x N_DS grid of regions; ``regions[a][k]`` lives in description space k."""

    regions: tuple[tuple[EllipsoidRegion, ...], ...]

    def __post_init__(self):
        grid = tuple(tuple(row) for row in self.regions)
        if not grid or not grid[0]:
            raise RegionError("a region grid needs at least one concept and one space")
        dims = tuple(r.dim for r in grid[0])
        for a, row in enumerate(grid):
            if tuple(r.dim for r in row) != dims:
                raise RegionError(f"concept {a} has space dimensions {tuple(r.dim for r in row)}, expected {dims}")
        object.__setattr__(self, "regions", grid)

    @property
    def n_concepts(self) -> int:
        return len(self.regions)

    @property
    def n_spaces(self) -> int:
        return len(self.regions[0])

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(r.dim for r in self.regions[0])

    def __getitem__(self, idx):
        return self.regions[idx]

    @cached_property
    def packed(self) -> tuple[np.ndarray, np.ndarray]:
        """Centers (N_C, sum n) and flattened transforms (N_C, sum n^2) for the kernels."""
        centers = np.array([np.concatenate([r.center for r in row]) for row in self.regions])
        transforms = np.array([np.concatenate([r.transform.ravel() for r in row]) for row in self.regions])
        return np.ascontiguousarray(centers), np.ascontiguousarray(transforms)

    def check_partition(self, partition: DescriptionSpacePartition) -> None:
        if self.dims != partition.dims:
            raise RegionError(f"region grid dimensions {self.dims} do not match partition {partition.dims}")

    def to_json_dict(self) -> dict:
        return {
            "n_concepts": self.n_concepts,
            "dims": list(self.dims),
            "concepts": [[r.to_json_dict() for r in row] for row in self.regions],
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "RegionGrid":
        try:
            grid = cls(tuple(tuple(EllipsoidRegion.from_json_dict(c) for c in row) for row in doc["concepts"]))
        except (KeyError, TypeError) as exc:
            raise RegionError(f"malformed region grid: {exc}") from None
        if "dims" in doc and list(grid.dims) != list(doc["dims"]):
            raise RegionError("declared dims do not match the regions")
        return grid


def save_grid(grid: RegionGrid, path, partition: DescriptionSpacePartition | None = None) -> None:
    doc = grid.to_json_dict()
    if partition is not None:
        doc["spaces"] = partition.named_groups()
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_grid(path) -> RegionGrid:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise RegionError(f"{path}: cannot read region grid ({exc})") from None
    return RegionGrid.from_json_dict(doc)


def _dims_of(partition) -> tuple[int, ...]:
    if isinstance(partition, DescriptionSpacePartition):
        return partition.dims
    return tuple(int(n) for n in partition)


def decode(genome, partition, n_concepts: int) -> RegionGrid:
    """Turn a flat genome into a region grid. ``partition`` may also be a dims tuple."""
    dims = _dims_of(partition)
    g = np.asarray(genome, dtype=np.float64).ravel()
    expected = genome_length(dims, n_concepts)
    if g.shape[0] != expected:
        raise RegionError(f"genome has {g.shape[0]} parameters, expected {expected} "
                          f"for {n_concepts} concepts in spaces {dims}")
    pos = 0
    rows = []
    for _ in range(n_concepts):
        row = []
        for n in dims:
            center = g[pos:pos + n]
            axes = kernels.softplus_axes(g[pos + n:pos + 2 * n])
            angles = g[pos + 2 * n:pos + n_region_params(n)]
            row.append(EllipsoidRegion(center, axes, angles))
            pos += n_region_params(n)
        rows.append(tuple(row))
    return RegionGrid(tuple(rows))


def encode(grid: RegionGrid) -> np.ndarray:
    """Inverse of :func:`decode` (up to floating-point round-off in the axes)."""
    parts = []
    for row in grid.regions:
        for r in row:
            parts.extend([r.center, inverse_softplus(r.semi_axes), r.rotation_angles])
    return np.concatenate(parts)


def candidate_sets(grid: RegionGrid, d: Dataset, partition: DescriptionSpacePartition) -> np.ndarray:
    """Boolean membership tensor ``[N_C, N_DS, N_D]``."""
    grid.check_partition(partition)
    try:
        xs = partition.project(d)
    except DatasetError as exc:
        raise RegionError(str(exc)) from None
    centers, transforms = grid.packed
    dims = np.array(grid.dims, dtype=np.int64)
    return np.asarray(kernels.candidate_tensor(xs, dims, centers, transforms), dtype=bool)
