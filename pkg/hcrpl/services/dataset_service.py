# 数据集服务模块 - 数据集表示、合成域偏移生成、CSV 读写和 SSDA 源域组合
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Iterator, List, Mapping, Optional, Tuple, Union

import numpy as np
import numpy.typing as npt
from pydantic import ValidationError

from hcrpl.schemas.data import ShiftSpec
from hcrpl.services.prob_core import ClassProportion
from hcrpl.utils.errors import (
    EmptyDataset,
    InsufficientSamples,
    InvalidSpec,
    SchemaError,
    UnlabeledSample,
)
from hcrpl.utils.logging import get_logger
from hcrpl.utils.random import STREAM_SSDA, derive_rng
from hcrpl.utils.serialization import PathLike, read_csv, write_csv


logger = get_logger(__name__)

ABSENT = -1


class DomainTag(str, Enum):
    """Which side of the adaptation problem a dataset belongs to."""
    SOURCE = "source"
    TARGET = "target"


@dataclass(frozen=True)
class Sample:
    """One feature vector with an optional label."""
    id: int
    features: Tuple[float, ...]
    label: Optional[int] = None


def _frozen(array: npt.ArrayLike, dtype: Any) -> np.ndarray:
    out = np.array(array, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class DomainDataset:
    """Immutable set of samples from one domain.

    Target datasets never expose labels: ``labels`` is all ``-1`` and the
    ground truth, when known, lives in ``hidden_labels`` for evaluation only.
    """

    ids: np.ndarray
    features: np.ndarray
    labels: np.ndarray
    n_classes: int
    domain_tag: DomainTag
    hidden_labels: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        ids = _frozen(self.ids, np.int64).reshape(-1)
        features = _frozen(self.features, np.float64)
        if features.ndim != 2:
            features = _frozen(features.reshape(len(ids), -1), np.float64)
        labels = _frozen(self.labels, np.int64).reshape(-1)
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "domain_tag", DomainTag(self.domain_tag))
        if self.hidden_labels is not None:
            object.__setattr__(self, "hidden_labels", _frozen(self.hidden_labels, np.int64).reshape(-1))

        n = len(ids)
        if features.shape[0] != n or labels.shape[0] != n:
            raise SchemaError("ids, features and labels must have the same length")
        if self.hidden_labels is not None and self.hidden_labels.shape[0] != n:
            raise SchemaError("hidden_labels must have one entry per sample")
        if self.n_classes < 2:
            raise SchemaError("a dataset needs at least 2 classes")
        if len(np.unique(ids)) != n:
            raise SchemaError("sample ids must be unique")
        if np.any(ids < 0):
            raise SchemaError("sample ids must be nonnegative")
        if np.any((labels != ABSENT) & ((labels < 0) | (labels >= self.n_classes))):
            raise SchemaError(f"labels must lie in [0, {self.n_classes})")
        if self.domain_tag is DomainTag.SOURCE and np.any(labels == ABSENT):
            raise SchemaError("every source sample must be labeled")
        if self.domain_tag is DomainTag.TARGET and np.any(labels != ABSENT):
            raise SchemaError("target labels may only be stored as hidden labels")
        if self.hidden_labels is not None:
            hidden = self.hidden_labels
            if np.any((hidden != ABSENT) & ((hidden < 0) | (hidden >= self.n_classes))):
                raise SchemaError(f"hidden labels must lie in [0, {self.n_classes})")

    def __len__(self) -> int:
        return int(self.ids.shape[0])

    @property
    def dim(self) -> int:
        return int(self.features.shape[1])

    @property
    def has_hidden_labels(self) -> bool:
        return self.hidden_labels is not None and bool(np.all(self.hidden_labels != ABSENT))

    def samples(self) -> Iterator[Sample]:
        for i in range(len(self)):
            label = int(self.labels[i])
            yield Sample(
                id=int(self.ids[i]),
                features=tuple(float(v) for v in self.features[i]),
                label=None if label == ABSENT else label,
            )

    def hidden_truth(self) -> Dict[int, int]:
        """Map id -> hidden label (only for ids whose truth is known)."""
        if self.hidden_labels is None:
            return {}
        return {
            int(i): int(h) for i, h in zip(self.ids, self.hidden_labels) if h != ABSENT
        }

    def without_hidden_labels(self) -> "DomainDataset":
        """Copy with every hidden label erased."""
        return DomainDataset(
            ids=self.ids,
            features=self.features,
            labels=self.labels,
            n_classes=self.n_classes,
            domain_tag=self.domain_tag,
            hidden_labels=None if self.hidden_labels is None else np.full(len(self), ABSENT),
        )

    def equals(self, other: "DomainDataset", atol: float = 0.0) -> bool:
        """Structural equality; features compared within ``atol``."""
        if (
            self.n_classes != other.n_classes
            or self.domain_tag != other.domain_tag
            or self.features.shape != other.features.shape
        ):
            return False
        if not (np.array_equal(self.ids, other.ids) and np.array_equal(self.labels, other.labels)):
            return False
        if (self.hidden_labels is None) != (other.hidden_labels is None):
            return False
        if self.hidden_labels is not None and not np.array_equal(self.hidden_labels, other.hidden_labels):
            return False
        if atol == 0.0:
            return bool(np.array_equal(self.features, other.features))
        return bool(np.allclose(self.features, other.features, rtol=0.0, atol=atol))


@dataclass(frozen=True, eq=False)
class TrainingSet:
    """Labeled rows fed to the trainer: source samples plus pseudo-labeled targets."""

    ids: np.ndarray
    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "ids", _frozen(self.ids, np.int64).reshape(-1))
        object.__setattr__(self, "features", _frozen(self.features, np.float64))
        object.__setattr__(self, "labels", _frozen(self.labels, np.int64).reshape(-1))
        if np.any(self.labels < 0):
            raise UnlabeledSample("every training row needs a label")

    def __len__(self) -> int:
        return int(self.ids.shape[0])

    @classmethod
    def empty(cls, dim: int) -> "TrainingSet":
        return cls(ids=np.zeros(0), features=np.zeros((0, dim)), labels=np.zeros(0))

    @classmethod
    def from_dataset(cls, ds: DomainDataset) -> "TrainingSet":
        """Labeled view of a source dataset."""
        if ds.domain_tag is not DomainTag.SOURCE:
            raise UnlabeledSample("only source datasets carry training labels")
        return cls(ids=ds.ids, features=ds.features, labels=ds.labels)

    @classmethod
    def from_pseudo_labels(cls, target: DomainDataset, entries: Mapping[int, int]) -> "TrainingSet":
        """Target rows selected by ``entries`` (id -> pseudo label), in target order."""
        if not entries:
            return cls.empty(target.dim)
        mask = np.isin(target.ids, np.fromiter(entries.keys(), dtype=np.int64))
        ids = target.ids[mask]
        labels = np.array([entries[int(i)] for i in ids], dtype=np.int64)
        return cls(ids=ids, features=target.features[mask], labels=labels)

    def union(self, other: "TrainingSet") -> "TrainingSet":
        """Concatenate two training sets with disjoint ids."""
        if np.intersect1d(self.ids, other.ids).size:
            raise SchemaError("training set union requires disjoint ids")
        if len(other) == 0:
            return self
        if len(self) == 0:
            return other
        return TrainingSet(
            ids=np.concatenate([self.ids, other.ids]),
            features=np.vstack([self.features, other.features]),
            labels=np.concatenate([self.labels, other.labels]),
        )


# Synthetic benchmark

def _rotation(angle: float, dim: int) -> np.ndarray:
    rot = np.eye(dim)
    c, s = math.cos(angle), math.sin(angle)
    rot[:2, :2] = [[c, -s], [s, c]]
    return rot


def _coerce_spec(spec: Union[ShiftSpec, Mapping[str, Any]]) -> ShiftSpec:
    if isinstance(spec, ShiftSpec):
        return spec
    try:
        return ShiftSpec.model_validate(spec)
    except ValidationError as e:
        raise InvalidSpec(f"invalid shift spec: {e.errors()[0]['msg']}", {"errors": len(e.errors())}) from e


def source_class_counts(spec: ShiftSpec) -> List[int]:
    """Per-class source sample counts after applying ``source_class_weights``."""
    if spec.source_class_weights is None:
        return [spec.n_source_per_class] * spec.n_classes
    total = spec.n_classes * spec.n_source_per_class
    return [max(1, int(round(total * w))) for w in spec.source_class_weights]


def target_class_centers(spec: ShiftSpec) -> np.ndarray:
    """Rotated, translated centers with the hard-class pull applied."""
    centers = np.asarray(spec.class_centers, dtype=np.float64)
    rot = _rotation(spec.target_rotation_angle, spec.dim)
    shifted = centers @ rot.T + np.asarray(spec.target_translation, dtype=np.float64)
    if spec.hard_class is not None:
        h, e = spec.hard_class.victim, spec.hard_class.confusable
        shifted[h] = shifted[h] + spec.hard_class.pull_fraction * (centers[e] - centers[h])
    return shifted


def generate_shifted_pair(
    spec: Union[ShiftSpec, Mapping[str, Any]]
) -> Tuple[DomainDataset, DomainDataset]:
    """Draw a labeled source domain and a shifted target domain.

    Blobs are sampled per class, then per sample, source first, from a single
    generator seeded with ``spec.seed``. Target ids continue after the source
    ids so the two sets never collide.
    """
    spec = _coerce_spec(spec)
    rng = np.random.default_rng(spec.seed)
    centers = np.asarray(spec.class_centers, dtype=np.float64)
    std = spec.within_class_std

    src_features, src_labels = [], []
    for c, count in enumerate(source_class_counts(spec)):
        src_features.append(centers[c] + std * rng.standard_normal((count, spec.dim)))
        src_labels.append(np.full(count, c, dtype=np.int64))

    tgt_centers = target_class_centers(spec)
    tgt_features, tgt_labels = [], []
    for c in range(spec.n_classes):
        count = spec.n_target_per_class
        tgt_features.append(tgt_centers[c] + std * rng.standard_normal((count, spec.dim)))
        tgt_labels.append(np.full(count, c, dtype=np.int64))

    n_source = sum(len(l) for l in src_labels)
    n_target = spec.n_classes * spec.n_target_per_class
    source = DomainDataset(
        ids=np.arange(n_source),
        features=np.vstack(src_features),
        labels=np.concatenate(src_labels),
        n_classes=spec.n_classes,
        domain_tag=DomainTag.SOURCE,
    )
    target = DomainDataset(
        ids=np.arange(n_source, n_source + n_target),
        features=np.vstack(tgt_features),
        labels=np.full(n_target, ABSENT),
        n_classes=spec.n_classes,
        domain_tag=DomainTag.TARGET,
        hidden_labels=np.concatenate(tgt_labels),
    )
    logger.info(
        "Generated shifted pair",
        n_classes=spec.n_classes,
        dim=spec.dim,
        n_source=n_source,
        n_target=n_target,
        hard_class=None if spec.hard_class is None else spec.hard_class.victim,
        seed=spec.seed,
    )
    return source, target


# CSV IO

def _header(dim: int, with_hidden: bool) -> List[str]:
    return ["id", "label"] + (["hidden_label"] if with_hidden else []) + [f"f{j}" for j in range(dim)]


def save_csv(ds: DomainDataset, path: PathLike) -> None:
    """Write ``ds`` as ``id,label[,hidden_label],f0..f{D-1}``."""
    with_hidden = ds.hidden_labels is not None
    rows = []
    for i, sample in enumerate(ds.samples()):
        row: List[Any] = [sample.id, ABSENT if sample.label is None else sample.label]
        if with_hidden:
            row.append(int(ds.hidden_labels[i]))
        row.extend(sample.features)
        rows.append(row)
    write_csv(path, _header(ds.dim, with_hidden), rows)


def _parse_int(cell: str, row: int, column: str) -> int:
    try:
        return int(cell)
    except ValueError:
        raise SchemaError(
            f"row {row}, column {column}: expected an integer, got {cell!r}",
            {"row": row, "column": column},
        ) from None


def _parse_float(cell: str, row: int, column: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        value = math.nan
    if not math.isfinite(value):
        raise SchemaError(
            f"row {row}, column {column}: expected a finite number, got {cell!r}",
            {"row": row, "column": column},
        )
    return value


def load_csv(
    path: PathLike,
    n_classes: int,
    domain_tag: Union[DomainTag, str] = DomainTag.SOURCE,
) -> DomainDataset:
    """Read a dataset written by :func:`save_csv` (or by hand, same schema)."""
    domain_tag = DomainTag(domain_tag)
    rows = read_csv(path)
    if not rows:
        raise SchemaError(f"{path}: missing header row")
    header = rows[0]
    with_hidden = len(header) > 2 and header[2] == "hidden_label"
    dim = len(header) - (3 if with_hidden else 2)
    if dim < 1 or header != _header(dim, with_hidden):
        raise SchemaError(
            f"{path}: header must be id,label[,hidden_label],f0..f{{D-1}}",
            {"header": header},
        )

    ids, labels, hidden, features = [], [], [], []
    for r, row in enumerate(rows[1:], start=1):
        if len(row) != len(header):
            raise SchemaError(f"row {r}: expected {len(header)} cells, got {len(row)}", {"row": r})
        ids.append(_parse_int(row[0], r, "id"))
        label = _parse_int(row[1], r, "label")
        if label != ABSENT and not 0 <= label < n_classes:
            raise SchemaError(
                f"row {r}, column label: {label} outside [0, {n_classes})",
                {"row": r, "column": "label"},
            )
        labels.append(label)
        offset = 2
        if with_hidden:
            h = _parse_int(row[2], r, "hidden_label")
            if h != ABSENT and not 0 <= h < n_classes:
                raise SchemaError(
                    f"row {r}, column hidden_label: {h} outside [0, {n_classes})",
                    {"row": r, "column": "hidden_label"},
                )
            hidden.append(h)
            offset = 3
        features.append([_parse_float(cell, r, header[offset + j]) for j, cell in enumerate(row[offset:])])

    return DomainDataset(
        ids=np.array(ids, dtype=np.int64),
        features=np.array(features, dtype=np.float64).reshape(len(ids), dim),
        labels=np.array(labels, dtype=np.int64),
        n_classes=n_classes,
        domain_tag=domain_tag,
        hidden_labels=np.array(hidden, dtype=np.int64) if with_hidden else None,
    )


# Semi-supervised composition and proportions

def compose_ssda_source(
    source: DomainDataset,
    target: DomainDataset,
    shots_per_class: int,
    seed: int,
) -> Tuple[DomainDataset, DomainDataset]:
    """Reveal ``shots_per_class`` target labels per class and move them to the source."""
    if shots_per_class < 0:
        raise InvalidSpec("shots_per_class must be nonnegative")
    if shots_per_class == 0:
        return source, target
    if target.hidden_labels is None or not target.has_hidden_labels:
        raise InsufficientSamples("SSDA composition needs hidden target labels")

    rng = derive_rng(seed, STREAM_SSDA)
    chosen: List[int] = []
    for c in range(target.n_classes):
        candidates = np.flatnonzero(target.hidden_labels == c)
        if candidates.size < shots_per_class:
            raise InsufficientSamples(
                f"class {c} has {candidates.size} target samples, {shots_per_class} required",
                {"class": c, "available": int(candidates.size)},
            )
        chosen.extend(np.sort(rng.choice(candidates, size=shots_per_class, replace=False)).tolist())

    picked = np.zeros(len(target), dtype=bool)
    picked[chosen] = True
    new_source = DomainDataset(
        ids=np.concatenate([source.ids, target.ids[picked]]),
        features=np.vstack([source.features, target.features[picked]]),
        labels=np.concatenate([source.labels, target.hidden_labels[picked]]),
        n_classes=source.n_classes,
        domain_tag=DomainTag.SOURCE,
    )
    new_target = DomainDataset(
        ids=target.ids[~picked],
        features=target.features[~picked],
        labels=target.labels[~picked],
        n_classes=target.n_classes,
        domain_tag=DomainTag.TARGET,
        hidden_labels=target.hidden_labels[~picked],
    )
    logger.info(
        "Composed SSDA source",
        shots_per_class=shots_per_class,
        n_source=len(new_source),
        n_target=len(new_target),
    )
    return new_source, new_target


def _proportion(labels: np.ndarray, n_classes: int) -> ClassProportion:
    if labels.size == 0:
        raise EmptyDataset("class proportion of an empty dataset")
    if np.any(labels == ABSENT):
        raise UnlabeledSample("class proportion needs every sample labeled")
    return np.bincount(labels, minlength=n_classes).astype(np.float64) / labels.size


def class_proportion(ds: DomainDataset) -> ClassProportion:
    """q(y): the fraction of samples carrying each label."""
    return _proportion(ds.labels, ds.n_classes)


def oracle_class_proportion(ds: DomainDataset) -> ClassProportion:
    """Class proportion from hidden ground truth; analysis only."""
    if ds.hidden_labels is None:
        raise UnlabeledSample("dataset has no hidden labels")
    return _proportion(ds.hidden_labels, ds.n_classes)

