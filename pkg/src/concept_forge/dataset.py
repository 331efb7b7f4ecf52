"""Samples, feature names, description-space partitions and preference sets."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class DatasetError(ValueError):
    """Raised for malformed data files or inconsistent dataset arguments."""

    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        super().__init__(message)
        self.row = row
        self.column = column


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """N_D samples by N_F named features.

    ``normalization`` is ``None`` for raw data, otherwise one ``(min, max)``
    pair per feature as recorded by :func:`normalize`.
    """

    samples: np.ndarray
    feature_names: tuple[str, ...]
    normalization: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 2 or samples.shape[0] < 1 or samples.shape[1] < 1:
            raise DatasetError(f"samples must be a non-empty 2-D array, got shape {samples.shape}")
        if not np.all(np.isfinite(samples)):
            raise DatasetError("samples contain non-finite values")
        names = tuple(str(n) for n in self.feature_names)
        if len(names) != samples.shape[1]:
            raise DatasetError(f"{len(names)} feature names for {samples.shape[1]} columns")
        if len(set(names)) != len(names):
            raise DatasetError(f"duplicate feature names: {_duplicates(names)}")
        object.__setattr__(self, "samples", _frozen(samples))
        object.__setattr__(self, "feature_names", names)
        if self.normalization is not None:
            norm = tuple((float(lo), float(hi)) for lo, hi in self.normalization)
            if len(norm) != len(names):
                raise DatasetError("normalization metadata does not match feature count")
            object.__setattr__(self, "normalization", norm)

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def n_features(self) -> int:
        return self.samples.shape[1]

    @property
    def is_normalized(self) -> bool:
        return self.normalization is not None

    def feature_index(self, name: str) -> int:
        try:
            return self.feature_names.index(name)
        except ValueError:
            raise DatasetError(f"unknown feature {name!r}") from None

    def to_json_dict(self) -> dict:
        return {"features": list(self.feature_names), "rows": self.samples.tolist()}


def _duplicates(names: Iterable[str]) -> list[str]:
    seen, dup = set(), []
    for n in names:
        if n in seen and n not in dup:
            dup.append(n)
        seen.add(n)
    return dup


def _parse_cell(text: str, row: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise DatasetError(f"row {row}, column {column!r}: cannot parse {text!r} as a number",
                           row=row, column=column) from None
    if not math.isfinite(value):
        raise DatasetError(f"row {row}, column {column!r}: non-finite value {text!r}", row=row, column=column)
    return value


def _load_csv(path: Path) -> Dataset:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if not header or any(h == "" for h in header):
            raise DatasetError(f"{path}: header must name every column", row=1)
        if len(set(header)) != len(header):
            raise DatasetError(f"{path}: duplicate column names {_duplicates(header)}", row=1)
        rows = []
        # row numbers are file line numbers; the header is row 1
        for lineno, record in enumerate(reader, start=2):
            if not record or all(c.strip() == "" for c in record):
                continue
            if len(record) != len(header):
                raise DatasetError(f"{path}: row {lineno} has {len(record)} cells, expected {len(header)}",
                                   row=lineno)
            rows.append([_parse_cell(c.strip(), lineno, header[j]) for j, c in enumerate(record)])
    if not rows:
        raise DatasetError(f"{path}: no data rows")
    return Dataset(np.array(rows), tuple(header))


def _load_json(path: Path) -> Dataset:
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{path}: invalid JSON ({exc})") from None
    if isinstance(doc, list):
        # array of named-field objects
        if not doc:
            raise DatasetError(f"{path}: empty file")
        names = [str(k) for k in doc[0]]
        rows = []
        for i, obj in enumerate(doc):
            if not isinstance(obj, dict) or [str(k) for k in obj] != names:
                raise DatasetError(f"{path}: record {i} does not match the fields of record 0", row=i)
            rows.append([_parse_cell(str(obj[n]), i, n) for n in names])
    elif isinstance(doc, dict) and "features" in doc and "rows" in doc:
        names = [str(n) for n in doc["features"]]
        if len(set(names)) != len(names):
            raise DatasetError(f"{path}: duplicate column names {_duplicates(names)}")
        rows = []
        for i, r in enumerate(doc["rows"]):
            if len(r) != len(names):
                raise DatasetError(f"{path}: row {i} has {len(r)} values, expected {len(names)}", row=i)
            rows.append([_parse_cell(str(v), i, names[j]) for j, v in enumerate(r)])
    else:
        raise DatasetError(f"{path}: expected {{'features': [...], 'rows': [...]}} or a list of objects")
    if not rows:
        raise DatasetError(f"{path}: no data rows")
    return Dataset(np.array(rows), tuple(names))


def load_dataset(path, format: str | None = None) -> Dataset:
    """Read a raw dataset from CSV (with header) or JSON.

    ``format`` is ``"csv"`` or ``"json"``; when omitted it is inferred from the
    file suffix. Sample index equals row order.
    """
    path = Path(path)
    if format is None:
        format = "json" if path.suffix.lower() == ".json" else "csv"
    if not path.exists():
        raise DatasetError(f"{path}: no such file")
    if path.stat().st_size == 0:
        raise DatasetError(f"{path}: empty file")
    if format == "csv":
        return _load_csv(path)
    if format == "json":
        return _load_json(path)
    raise DatasetError(f"unsupported format {format!r}")


def save_csv(d: Dataset, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(d.feature_names)
        for row in d.samples:
            w.writerow([repr(float(v)) for v in row])


def save_json(d: Dataset, path) -> None:
    Path(path).write_text(json.dumps(d.to_json_dict()) + "\n", encoding="utf-8")


def normalize(d: Dataset) -> Dataset:
    """Min-max scale every feature to [0, 1]; constant features become 0.5.

    Already normalized datasets are returned unchanged.
    """
    if d.is_normalized:
        return d
    x = d.samples
    lo = x.min(axis=0)
    hi = x.max(axis=0)
    span = hi - lo
    const = span == 0
    out = np.where(const, 0.5, (x - lo) / np.where(const, 1.0, span))
    return Dataset(out, d.feature_names, tuple(zip(lo.tolist(), hi.tolist())))


@dataclass(frozen=True)
class DescriptionSpacePartition:
    """Ordered feature-index groups (description spaces) plus the unused remainder."""

    spaces: tuple[tuple[int, ...], ...]
    remainder: tuple[int, ...] = ()
    feature_names: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        spaces = tuple(tuple(int(i) for i in s) for s in self.spaces)
        remainder = tuple(sorted(int(i) for i in self.remainder))
        if not spaces:
            raise DatasetError("a partition needs at least one description space")
        if any(len(s) == 0 for s in spaces):
            raise DatasetError("description spaces must be non-empty")
        flat = [i for s in spaces for i in s]
        if len(set(flat)) != len(flat):
            raise DatasetError("description spaces must be pairwise disjoint")
        if set(flat) & set(remainder):
            raise DatasetError("remainder overlaps a description space")
        if any(i < 0 for i in flat + list(remainder)):
            raise DatasetError("negative feature index")
        object.__setattr__(self, "spaces", spaces)
        object.__setattr__(self, "remainder", remainder)

    @property
    def n_spaces(self) -> int:
        return len(self.spaces)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.spaces)

    @property
    def feature_order(self) -> np.ndarray:
        """All space feature indices concatenated in space order."""
        return np.array([i for s in self.spaces for i in s], dtype=np.int64)

    def project(self, d: Dataset) -> np.ndarray:
        """Contiguous (N_D, sum of dims) array of the space features in space order."""
        order = self.feature_order
        if order.max() >= d.n_features:
            raise DatasetError("partition references features beyond the dataset")
        return np.ascontiguousarray(d.samples[:, order])

    def space_slice(self, k: int) -> slice:
        start = sum(self.dims[:k])
        return slice(start, start + self.dims[k])

    def named_groups(self) -> list[list[str]]:
        if self.feature_names is None:
            return [[str(i) for i in s] for s in self.spaces]
        return [[self.feature_names[i] for i in s] for s in self.spaces]


def partition_features(d: Dataset, groups: Sequence[Sequence[str]]) -> DescriptionSpacePartition:
    """Build a partition from named feature groups; unnamed features go to the remainder."""
    seen: set[str] = set()
    spaces = []
    for group in groups:
        idx = []
        for name in group:
            if name in seen:
                raise DatasetError(f"feature {name!r} appears in more than one group")
            seen.add(name)
            idx.append(d.feature_index(name))
        spaces.append(tuple(idx))
    used = {i for s in spaces for i in s}
    remainder = tuple(i for i in range(d.n_features) if i not in used)
    return DescriptionSpacePartition(tuple(spaces), remainder, d.feature_names)


def load_partition(source, d: Dataset) -> DescriptionSpacePartition:
    """Partition from a JSON file (list of name lists, or ``{"spaces": ...}``) or an
    inline spec like ``"f1,f2;f3,f4"``."""
    text = str(source)
    p = Path(text)
    if p.suffix.lower() == ".json" or p.exists():
        try:
            doc = json.loads(p.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise DatasetError(f"{p}: cannot read partition ({exc})") from None
        groups = doc["spaces"] if isinstance(doc, dict) else doc
    else:
        groups = [[n.strip() for n in g.split(",") if n.strip()] for g in text.split(";") if g.strip()]
    if not isinstance(groups, list) or not all(isinstance(g, list) for g in groups):
        raise DatasetError("partition must be a list of feature-name lists")
    return partition_features(d, groups)


def save_partition(partition: DescriptionSpacePartition, path) -> None:
    Path(path).write_text(json.dumps({"spaces": partition.named_groups()}, indent=2) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class PreferenceSet:
    """Row indices of user-preferred samples."""

    indices: tuple[int, ...] = ()

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if len(set(idx)) != len(idx):
            raise DatasetError("duplicate preference indices")
        if any(i < 0 for i in idx):
            raise DatasetError("negative preference index")
        object.__setattr__(self, "indices", tuple(sorted(idx)))

    def __len__(self):
        return len(self.indices)

    def validate(self, d: Dataset) -> "PreferenceSet":
        bad = [i for i in self.indices if i >= d.n_samples]
        if bad:
            raise DatasetError(f"preference indices out of range for {d.n_samples} samples: {bad}")
        return self

    def as_array(self) -> np.ndarray:
        return np.array(self.indices, dtype=np.int64)


def load_preferences(path) -> PreferenceSet:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DatasetError(f"{path}: cannot read preferences ({exc})") from None
    if not isinstance(doc, list) or not all(isinstance(i, int) and not isinstance(i, bool) for i in doc):
        raise DatasetError(f"{path}: preferences must be a JSON array of integer row indices")
    return PreferenceSet(tuple(doc))
