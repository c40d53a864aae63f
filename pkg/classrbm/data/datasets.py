"""
Datasets of (binary input, label) pairs: CSV ingestion and export, the
train/test split, and a synthetic class-conditional Bernoulli generator.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, List, NamedTuple, Optional, Sequence, Tuple, Union
import logging
import math

import numpy as np
import pandas as pd
from pydantic import ValidationError
from scipy.special import xlogy

from classrbm.data.schema import CategoricalSchema
from classrbm.exceptions import ConfigError, DataError
from classrbm.schemas import DatasetMetadata, GenerationRecord

logger = logging.getLogger(__name__)

DEFAULT_LABEL_COLUMN = "label"
METADATA_SUFFIX = ".meta.json"


class Example(NamedTuple):
    x: np.ndarray
    y: int


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable collection of binary inputs ``X`` (N, D) and 1-based labels ``y`` (N,)."""
    X: np.ndarray
    y: np.ndarray
    n_classes: int
    schema: Optional[CategoricalSchema] = None
    label_categories: Optional[Tuple[str, ...]] = None
    generation: Optional[GenerationRecord] = field(default=None, compare=False)

    def __post_init__(self):
        X = np.array(self.X, dtype=np.uint8)
        y = np.array(self.y, dtype=np.int64)
        if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
            raise DataError(f"inputs {X.shape} and labels {y.shape} do not line up")
        if not np.array_equal(np.asarray(self.X), X):
            raise DataError("inputs must be exactly 0 or 1")
        if np.any(X > 1):
            raise DataError("inputs must be exactly 0 or 1")
        if self.n_classes < 1 or np.any((y < 1) | (y > self.n_classes)):
            raise DataError(f"labels must lie in 1..{self.n_classes}")
        if self.schema is not None and X.shape[1] != self.schema.width:
            raise DataError(f"inputs have width {X.shape[1]}, schema '{self.schema.name}' has {self.schema.width}")
        if self.label_categories is not None and len(self.label_categories) != self.n_classes:
            raise DataError("label categories do not match the class count")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return self.X.shape[0]

    def __iter__(self) -> Iterator[Example]:
        for i in range(len(self)):
            yield self[i]

    def __getitem__(self, i: int) -> Example:
        return Example(self.X[i], int(self.y[i]))

    @property
    def n_inputs(self) -> int:
        return self.X.shape[1]

    def subset(self, indices: Sequence[int]) -> "Dataset":
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(
            X=self.X[indices], y=self.y[indices], n_classes=self.n_classes,
            schema=self.schema, label_categories=self.label_categories, generation=self.generation
        )

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.y - 1, minlength=self.n_classes)


def _read_frame(path: Path) -> pd.DataFrame:
    if not path.is_file():
        raise DataError(f"Data file not found: {path}")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise DataError(f"Data file {path} is empty")
    except pd.errors.ParserError as e:
        raise DataError(f"Could not parse {path}", [str(e)])
    if frame.empty:
        raise DataError(f"Data file {path} has a header but no rows")
    return frame


def load_csv(path: Union[str, Path], schema: Optional[CategoricalSchema] = None,
             label_column: Optional[str] = None,
             label_categories: Optional[Sequence[str]] = None,
             n_classes: Optional[int] = None) -> Dataset:
    """Read a CSV with a header row into a Dataset.

    With a schema, every feature column holds a category name and is
    binarized. Without one, every non-label column is read as a 0/1 input.
    Labels map to 1..K through ``label_categories`` (or the schema's label
    spec); schema-less files without declared categories hold integer labels.

    The class count comes from the label categories, then ``n_classes``, then
    the metadata sidecar ``export_csv`` writes, and only then from the largest
    label seen. Row problems are collected and reported together.
    """
    path = Path(path)
    frame = _read_frame(path)

    if label_column is None:
        label_column = schema.label.column if schema is not None and schema.label else DEFAULT_LABEL_COLUMN
    if label_column not in frame.columns:
        raise DataError(f"label column '{label_column}' not found in {path}")
    if label_categories is None and schema is not None and schema.label is not None:
        label_categories = schema.label.categories
    if label_categories is None and n_classes is None:
        metadata = read_metadata(path)
        if metadata is not None and metadata.label_column == label_column:
            label_categories = metadata.label_categories
            n_classes = metadata.n_classes
    categories = tuple(label_categories) if label_categories is not None else None
    if categories is not None:
        n_classes = len(categories)
    elif n_classes is not None and n_classes < 1:
        raise ConfigError(f"n_classes must be at least 1, got {n_classes}")

    errors: List[str] = []
    rows: List[np.ndarray] = []
    labels: List[int] = []

    if schema is not None:
        missing = [name for name in schema.feature_names if name not in frame.columns]
        if missing:
            raise DataError(f"{path} lacks feature columns", [f"missing feature '{m}'" for m in missing])
        input_columns = schema.feature_names
    else:
        input_columns = [c for c in frame.columns if c != label_column]
        if not input_columns:
            raise DataError(f"{path} has no input columns")

    for n, record in enumerate(frame.to_dict(orient="records"), start=1):
        try:
            bits = _record_bits(record, input_columns, schema)
            labels.append(_parse_label(record[label_column], categories, n_classes))
            rows.append(bits)
        except DataError as e:
            errors.append(f"row {n}: {e}")

    if errors:
        raise DataError(f"{len(errors)} invalid row(s) in {path}", errors)

    if n_classes is None:
        n_classes = max(max(labels), 2)
        logger.warning(f"No class count declared for {path}; inferred K={n_classes} from the labels")
    return Dataset(
        X=np.vstack(rows), y=np.array(labels), n_classes=n_classes,
        schema=schema, label_categories=categories
    )


def load_inputs(path: Union[str, Path], schema: Optional[CategoricalSchema] = None,
                label_column: Optional[str] = None) -> np.ndarray:
    """Binary inputs of a CSV whose label column, if any, is ignored."""
    path = Path(path)
    frame = _read_frame(path)
    if label_column is None:
        label_column = schema.label.column if schema is not None and schema.label else DEFAULT_LABEL_COLUMN
    if schema is not None:
        input_columns = schema.feature_names
        missing = [name for name in input_columns if name not in frame.columns]
        if missing:
            raise DataError(f"{path} lacks feature columns", [f"missing feature '{m}'" for m in missing])
    else:
        input_columns = [c for c in frame.columns if c != label_column]

    errors: List[str] = []
    rows: List[np.ndarray] = []
    for n, record in enumerate(frame.to_dict(orient="records"), start=1):
        try:
            rows.append(_record_bits(record, input_columns, schema))
        except DataError as e:
            errors.append(f"row {n}: {e}")
    if errors:
        raise DataError(f"{len(errors)} invalid row(s) in {path}", errors)
    return np.vstack(rows)


def _record_bits(record: dict, input_columns: List[str], schema: Optional[CategoricalSchema]) -> np.ndarray:
    if schema is not None:
        return schema.binarize({name: record[name] for name in input_columns})
    values = [record[c] for c in input_columns]
    bad = [c for c, v in zip(input_columns, values) if v not in ("0", "1")]
    if bad:
        raise DataError(f"non-binary value in column '{bad[0]}'")
    return np.array([int(v) for v in values], dtype=np.uint8)


def _parse_label(value: str, categories: Optional[Tuple[str, ...]], n_classes: Optional[int]) -> int:
    if categories is not None:
        if value not in categories:
            raise DataError(f"unknown label '{value}'")
        return categories.index(value) + 1
    try:
        label = int(value)
    except ValueError:
        raise DataError(f"label '{value}' is not an integer and no label categories were declared")
    if label < 1:
        raise DataError(f"label {label} is below 1")
    if n_classes is not None and label > n_classes:
        raise DataError(f"label {label} exceeds the class count {n_classes}")
    return label


def export_csv(dataset: Dataset, path: Union[str, Path], label_column: Optional[str] = None) -> Path:
    """Write ``dataset`` in the format ``load_csv`` reads back.

    The class count and label categories go to a ``.meta.json`` sidecar so a
    class with no examples is not lost on the way back.
    """
    path = Path(path)
    if label_column is None:
        schema = dataset.schema
        label_column = schema.label.column if schema is not None and schema.label else DEFAULT_LABEL_COLUMN
    if dataset.label_categories is not None:
        labels = [dataset.label_categories[y - 1] for y in dataset.y]
    else:
        labels = [str(int(y)) for y in dataset.y]

    if dataset.schema is not None:
        records = [dataset.schema.debinarize(x) for x in dataset.X]
        frame = pd.DataFrame(records, columns=dataset.schema.feature_names)
    else:
        frame = pd.DataFrame(
            dataset.X.astype(int), columns=[f"x{i}" for i in range(1, dataset.n_inputs + 1)]
        )
    frame[label_column] = labels
    frame.to_csv(path, index=False, lineterminator="\n")
    categories = list(dataset.label_categories) if dataset.label_categories is not None else None
    metadata = DatasetMetadata(
        n_classes=dataset.n_classes, label_column=label_column, label_categories=categories
    )
    metadata_path(path).write_text(metadata.model_dump_json(indent=2) + "\n")
    return path


def metadata_path(path: Union[str, Path]) -> Path:
    """``data.csv`` -> ``data.meta.json``"""
    path = Path(path)
    return path.with_name(path.stem + METADATA_SUFFIX)


def read_metadata(path: Union[str, Path]) -> Optional[DatasetMetadata]:
    """Sidecar metadata of an exported CSV, or None when there is none."""
    sidecar = metadata_path(path)
    if not sidecar.is_file():
        return None
    try:
        return DatasetMetadata.model_validate_json(sidecar.read_text())
    except ValidationError as e:
        raise DataError(f"Invalid dataset metadata in {sidecar}", [str(err["msg"]) for err in e.errors()])


def split(dataset: Dataset, fraction: float, seed: int) -> Tuple[Dataset, Dataset]:
    """Seeded random split; the first ceil(fraction * n) permuted examples train."""
    if not 0.0 < fraction < 1.0:
        raise ConfigError(f"split fraction must be in (0, 1), got {fraction}")
    n = len(dataset)
    n_train = math.ceil(round(fraction * n, 9))
    if n_train == 0 or n_train == n:
        raise DataError(f"split of {n} examples at {fraction} leaves one side empty")
    order = np.random.default_rng(seed).permutation(n)
    return dataset.subset(order[:n_train]), dataset.subset(order[n_train:])


def synth_generate(D: int, K: int, n: int, signal_strength: float, rng: np.random.Generator) -> Dataset:
    """Class-conditional Bernoulli data with a known generating rule.

    Class k has template probabilities 1/2 + signal_strength * s_k with a
    random sign pattern s_k in {-1, +1}^D (distinct across classes when
    possible). Classes are equiprobable. The rule is kept in
    ``dataset.generation``.
    """
    if D < 2 or K < 2 or n < 1:
        raise ConfigError(f"need D >= 2, K >= 2, n >= 1; got D={D}, K={K}, n={n}")
    if not 0.0 <= signal_strength <= 0.5:
        raise ConfigError(f"signal_strength must be in [0, 0.5], got {signal_strength}")

    signs = rng.choice([-1.0, 1.0], size=(K, D))
    for _ in range(100):
        if len({tuple(row) for row in signs}) == K:
            break
        signs = rng.choice([-1.0, 1.0], size=(K, D))
    templates = 0.5 + signal_strength * signs
    priors = np.full(K, 1.0 / K)

    y = rng.integers(1, K + 1, size=n)
    X = (rng.random((n, D)) < templates[y - 1]).astype(np.uint8)

    record = GenerationRecord(
        n_inputs=D, n_classes=K, n_examples=n, signal_strength=signal_strength,
        class_priors=priors.tolist(), templates=templates.tolist()
    )
    return Dataset(X=X, y=y, n_classes=K, generation=record)


def bayes_predict(record: GenerationRecord, X) -> np.ndarray:
    """Labels chosen by the generating rule (maximum posterior, ties to the lowest label)."""
    X = np.asarray(X, dtype=np.float64)
    templates = np.asarray(record.templates)
    log_lik = xlogy(X[:, None, :], templates[None]) + xlogy(1.0 - X[:, None, :], 1.0 - templates[None])
    scores = np.log(np.asarray(record.class_priors))[None, :] + log_lik.sum(axis=-1)
    return np.argmax(scores, axis=1).astype(np.int64) + 1
