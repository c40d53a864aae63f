"""
Categorical schema: ordered features with ordered categories, and the one-hot
binarization that turns a categorical record into the model's binary input.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import yaml
from pydantic import ValidationError
from sklearn.preprocessing import OneHotEncoder

from classrbm.exceptions import DataError, SchemaError
from classrbm.schemas import FeatureSpec, LabelSpec, SchemaFile

BUNDLED_SCHEMA = Path(__file__).with_name("breast_cancer_schema.yaml")


@dataclass(frozen=True)
class CategoricalSchema:
    name: str
    features: Tuple[FeatureSpec, ...]
    label: Optional[LabelSpec] = None
    encoder: OneHotEncoder = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        # Categories are fixed by the schema; fitting only records them in order.
        encoder = OneHotEncoder(
            categories=[list(f.categories) for f in self.features],
            handle_unknown="error",
            sparse_output=False,
            dtype=np.uint8,
        )
        encoder.fit(np.array([[f.categories[0] for f in self.features]], dtype=object))
        object.__setattr__(self, "encoder", encoder)

    @property
    def width(self) -> int:
        """Number of binary inputs (sum of category counts)."""
        return sum(len(f.categories) for f in self.features)

    @property
    def offsets(self) -> List[int]:
        """0-based position of each feature's first bit."""
        offsets, position = [], 0
        for feature in self.features:
            offsets.append(position)
            position += len(feature.categories)
        return offsets

    @property
    def feature_names(self) -> List[str]:
        return [f.name for f in self.features]

    def input_names(self) -> List[str]:
        """Human-readable name of every binary input, in input order."""
        return [
            f"{feature.description or feature.name}: {category}"
            for feature in self.features
            for category in feature.categories
        ]

    def binarize(self, record: Union[Sequence[str], Mapping[str, str]]) -> np.ndarray:
        return binarize(record, self)

    def debinarize(self, bits) -> List[str]:
        """Category chosen for each feature of a one-hot vector."""
        bits = np.asarray(bits)
        if bits.shape != (self.width,):
            raise DataError(f"expected {self.width} bits, got shape {bits.shape}")
        for feature, offset in zip(self.features, self.offsets):
            if bits[offset:offset + len(feature.categories)].sum() != 1:
                raise DataError(f"feature '{feature.name}' does not have exactly one active bit")
        return [str(value) for value in self.encoder.inverse_transform(bits[None, :])[0]]


def schema_from_dict(payload: dict, source: str = "<schema>") -> CategoricalSchema:
    try:
        parsed = SchemaFile.model_validate(payload)
    except ValidationError as e:
        raise SchemaError(
            f"Invalid schema in {source}",
            [f"{'.'.join(str(p) for p in err['loc']) or '<root>'}: {err['msg']}" for err in e.errors()]
        )
    return CategoricalSchema(name=parsed.name, features=tuple(parsed.features), label=parsed.label)


def load_schema(path: Union[str, Path]) -> CategoricalSchema:
    """Load a YAML schema file (see the bundled breast-cancer schema for the layout)."""
    path = Path(path)
    if not path.is_file():
        raise SchemaError(f"Schema file not found: {path}")
    try:
        payload = yaml.safe_load(path.read_text())
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        raise SchemaError(f"Could not parse schema {path}", [f"{where}: {getattr(e, 'problem', e)}"])
    if not isinstance(payload, dict):
        raise SchemaError(f"Schema {path} must be a mapping with a 'features' list")
    return schema_from_dict(payload, source=str(path))


def load_bundled_schema() -> CategoricalSchema:
    return load_schema(BUNDLED_SCHEMA)


def binarize(record: Union[Sequence[str], Mapping[str, str]], schema: CategoricalSchema) -> np.ndarray:
    """One-hot encode one category per feature, concatenated in schema order.

    ``record`` is either a list with one category per feature or a mapping
    from feature name to category. Missing features are errors, never imputed.
    """
    if isinstance(record, Mapping):
        missing = [f.name for f in schema.features if f.name not in record]
        if missing:
            raise DataError("missing feature " + ", ".join(f"'{name}'" for name in missing))
        values = [record[f.name] for f in schema.features]
    else:
        values = list(record)
        if len(values) != len(schema.features):
            name = schema.features[len(values)].name if len(values) < len(schema.features) else None
            detail = f"missing feature '{name}'" if name else "too many values"
            raise DataError(f"expected {len(schema.features)} categories, got {len(values)}: {detail}")

    for feature, value in zip(schema.features, values):
        if value is None or (isinstance(value, str) and value == ""):
            raise DataError(f"missing value for feature '{feature.name}'")
    row = np.array([[str(value) for value in values]], dtype=object)
    try:
        return schema.encoder.transform(row)[0]
    except ValueError:
        unknown = [
            f"unknown category '{value}' for feature '{feature.name}'"
            for feature, value in zip(schema.features, row[0])
            if value not in feature.categories
        ]
        if not unknown:
            raise
        if len(unknown) == 1:
            raise DataError(unknown[0])
        raise DataError(f"{len(unknown)} unknown categories", unknown)
