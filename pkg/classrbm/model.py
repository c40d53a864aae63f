"""
Classification RBM: parameters, energy, factorized conditionals and the
closed-form label posterior.

Labels are 1-based (1..K) at every public entry point. Inputs are binary
vectors of length D; the conditionals and predictors also accept a batch of
shape (N, D) with one label per row.
"""

from dataclasses import dataclass, replace as dataclass_replace
from pathlib import Path
from typing import Dict, Tuple, Union
import json
import logging

import numpy as np
from pydantic import ValidationError

from classrbm.exceptions import (
    DataError,
    DimensionMismatchError,
    InvalidInputError,
    InvalidLabelError,
    NumericalFailureError,
)
from classrbm.schemas import MODEL_FORMAT_VERSION, ModelFile
from classrbm.utils.numerics import log_normalize, sigmoid, softplus, stable_softmax

logger = logging.getLogger(__name__)

LabelLike = Union[int, np.integer, np.ndarray]

PARAMETER_BLOCKS = ("b", "c", "d", "W1", "W2")


@dataclass(frozen=True, eq=False)
class ModelParameters:
    """Immutable ClassRBM parameters.

    Attributes:
        b: visible biases, shape (D,)
        c: hidden biases, shape (M,)
        d: label biases, shape (K,)
        W1: visible-hidden weights, shape (D, M)
        W2: hidden-label weights, shape (M, K)
    """
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    W1: np.ndarray
    W2: np.ndarray

    def __post_init__(self):
        for name in PARAMETER_BLOCKS:
            try:
                arr = np.array(getattr(self, name), dtype=np.float64)
            except (TypeError, ValueError) as e:
                raise DimensionMismatchError(f"{name} is not a numeric array: {e}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

        for name in ("b", "c", "d"):
            if getattr(self, name).ndim != 1:
                raise DimensionMismatchError(f"{name} must be a vector, got shape {getattr(self, name).shape}")
        for name in ("W1", "W2"):
            if getattr(self, name).ndim != 2:
                raise DimensionMismatchError(f"{name} must be a matrix, got shape {getattr(self, name).shape}")

        D, M = self.W1.shape
        K = self.W2.shape[1]
        if min(D, M, K) < 1:
            raise DimensionMismatchError(f"dimensions must be positive, got D={D}, M={M}, K={K}")
        expected = {"b": (D,), "c": (M,), "d": (K,), "W2": (M, K)}
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise DimensionMismatchError(
                    f"{name} has shape {getattr(self, name).shape}, expected {shape} for D={D}, M={M}, K={K}"
                )

        for name in PARAMETER_BLOCKS:
            if not np.all(np.isfinite(getattr(self, name))):
                raise NumericalFailureError(f"parameter block {name} contains NaN or infinite entries")

    @property
    def D(self) -> int:
        return self.W1.shape[0]

    @property
    def M(self) -> int:
        return self.W1.shape[1]

    @property
    def K(self) -> int:
        return self.W2.shape[1]

    @property
    def dims(self) -> Tuple[int, int, int]:
        return self.D, self.M, self.K

    @classmethod
    def zeros(cls, D: int, M: int, K: int) -> "ModelParameters":
        return cls(
            b=np.zeros(D), c=np.zeros(M), d=np.zeros(K),
            W1=np.zeros((D, M)), W2=np.zeros((M, K))
        )

    @classmethod
    def unchecked(cls, **blocks: np.ndarray) -> "ModelParameters":
        """Wrap float64 blocks of known-good shape without copying or re-validating.

        For hot loops that already checked finiteness; the arrays are frozen in place.
        """
        params = object.__new__(cls)
        for name in PARAMETER_BLOCKS:
            arr = blocks[name]
            arr.setflags(write=False)
            object.__setattr__(params, name, arr)
        return params

    def replace(self, **blocks) -> "ModelParameters":
        """Return a copy with some blocks swapped out (validated again)."""
        return dataclass_replace(self, **blocks)

    def blocks(self) -> Dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in PARAMETER_BLOCKS}

    def to_dict(self) -> dict:
        return ModelFile(
            format_version=MODEL_FORMAT_VERSION,
            n_visible=self.D,
            n_hidden=self.M,
            n_classes=self.K,
            **{name: arr.tolist() for name, arr in self.blocks().items()}
        ).model_dump()

    @classmethod
    def from_dict(cls, payload: dict) -> "ModelParameters":
        try:
            record = ModelFile.model_validate(payload)
        except ValidationError as e:
            raise DataError("Malformed model file", [str(err["loc"]) + ": " + err["msg"] for err in e.errors()])
        params = cls(b=record.b, c=record.c, d=record.d, W1=record.W1, W2=record.W2)
        if params.dims != (record.n_visible, record.n_hidden, record.n_classes):
            raise DimensionMismatchError(
                f"model file declares dims {(record.n_visible, record.n_hidden, record.n_classes)} "
                f"but arrays have {params.dims}"
            )
        return params

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=2) + "\n")
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ModelParameters":
        path = Path(path)
        if not path.is_file():
            raise DataError(f"Model file not found: {path}")
        try:
            payload = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            raise DataError(f"Model file {path} is not valid JSON", [f"line {e.lineno}: {e.msg}"])
        return cls.from_dict(payload)


# ---------------------------------------------------------------------------
# argument checking

def check_input(params: ModelParameters, x) -> np.ndarray:
    """Validate a binary input (or batch of inputs) against ``params``."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim not in (1, 2) or x.shape[-1] != params.D:
        raise DimensionMismatchError(f"input has shape {x.shape}, expected (D,) or (N, D) with D={params.D}")
    if not np.all((x == 0.0) | (x == 1.0)):
        raise InvalidInputError("input entries must be exactly 0 or 1")
    return x


def check_hidden(params: ModelParameters, h) -> np.ndarray:
    h = np.asarray(h, dtype=np.float64)
    if h.ndim not in (1, 2) or h.shape[-1] != params.M:
        raise DimensionMismatchError(f"hidden state has shape {h.shape}, expected (M,) or (N, M) with M={params.M}")
    if not np.all((h == 0.0) | (h == 1.0)):
        raise InvalidInputError("hidden state entries must be exactly 0 or 1")
    return h


def label_index(params: ModelParameters, y: LabelLike) -> np.ndarray:
    """Convert 1-based label(s) to 0-based column indices."""
    y_arr = np.asarray(y)
    if y_arr.dtype == bool or not np.issubdtype(y_arr.dtype, np.number):
        raise InvalidLabelError(f"labels must be integers, got {y!r}")
    if not np.all(np.mod(y_arr, 1) == 0):
        raise InvalidLabelError(f"labels must be integers, got {y!r}")
    y_arr = y_arr.astype(np.int64)
    if np.any((y_arr < 1) | (y_arr > params.K)):
        raise InvalidLabelError(f"label out of range 1..{params.K}: {y!r}")
    return y_arr - 1


def one_hot(y: LabelLike, K: int) -> np.ndarray:
    """1-of-K view of 1-based label(s)."""
    y_arr = np.asarray(y, dtype=np.int64)
    return np.eye(K)[y_arr - 1]


def _label_from_any(params: ModelParameters, y) -> int:
    y_arr = np.asarray(y)
    if y_arr.ndim == 1:
        if y_arr.shape != (params.K,) or not np.all((y_arr == 0) | (y_arr == 1)) or y_arr.sum() != 1:
            raise InvalidLabelError(f"one-hot label must have exactly one active entry out of {params.K}")
        return int(np.argmax(y_arr)) + 1
    label_index(params, y_arr)
    return int(y_arr)


# ---------------------------------------------------------------------------
# unchecked kernels (0-based labels), shared with training

def _hidden_probs(params: ModelParameters, x: np.ndarray, y0) -> np.ndarray:
    return sigmoid(params.c + x @ params.W1 + params.W2[:, y0].T)


def _visible_probs(params: ModelParameters, h: np.ndarray) -> np.ndarray:
    return sigmoid(params.b + h @ params.W1.T)


def _label_probs(params: ModelParameters, h: np.ndarray) -> np.ndarray:
    return stable_softmax(params.d + h @ params.W2)


def _sample_labels(probs: np.ndarray, rng: np.random.Generator):
    u = rng.random(probs.shape[:-1])
    cdf = np.cumsum(probs, axis=-1)
    idx = np.minimum((cdf < np.expand_dims(u, -1)).sum(axis=-1), probs.shape[-1] - 1)
    if np.ndim(idx) == 0:
        return int(idx) + 1
    return idx.astype(np.int64) + 1


def _gibbs_step(params: ModelParameters, x: np.ndarray, y0, rng: np.random.Generator):
    h_probs = _hidden_probs(params, x, y0)
    h = (rng.random(h_probs.shape) < h_probs).astype(np.float64)
    x_probs = _visible_probs(params, h)
    x_new = (rng.random(x_probs.shape) < x_probs).astype(np.float64)
    y_new = _sample_labels(_label_probs(params, h), rng)
    return x_new, y_new, h


# ---------------------------------------------------------------------------
# public operations

def energy(params: ModelParameters, x, y, h) -> float:
    """E(x, y, h) = -b'x - c'h - d'y - x'W1 h - h'W2 y.

    ``y`` may be a 1-based label or its one-hot vector.
    """
    x = check_input(params, x)
    h = check_hidden(params, h)
    if x.ndim != 1 or h.ndim != 1:
        raise DimensionMismatchError("energy takes a single configuration")
    y_vec = one_hot(_label_from_any(params, y), params.K)
    return float(
        -(params.b @ x)
        - (params.c @ h)
        - (params.d @ y_vec)
        - (x @ params.W1 @ h)
        - (h @ params.W2 @ y_vec)
    )


def hidden_activation_probs(params: ModelParameters, x, y: LabelLike) -> np.ndarray:
    """p(h_j = 1 | x, y) = sigm(c_j + W2_jy + W1[:, j]'x) for every hidden unit."""
    x = check_input(params, x)
    y0 = label_index(params, y)
    if x.ndim == 2 and y0.shape not in ((), (x.shape[0],)):
        raise DimensionMismatchError(f"got {x.shape[0]} inputs but labels of shape {y0.shape}")
    return _hidden_probs(params, x, y0)


def visible_activation_probs(params: ModelParameters, h) -> np.ndarray:
    """p(x_i = 1 | h) = sigm(b_i + W1[i, :] h)."""
    return _visible_probs(params, check_hidden(params, h))


def label_probs_given_hidden(params: ModelParameters, h) -> np.ndarray:
    """p(y | h) as a softmax over d_y + W2[:, y]'h."""
    return _label_probs(params, check_hidden(params, h))


def _label_logits(params: ModelParameters, x: np.ndarray, precompute: bool) -> np.ndarray:
    if precompute:
        # s_j = c_j + W1[:, j]'x is shared by every label
        s = params.c + x @ params.W1
        return params.d + softplus(s[..., :, None] + params.W2).sum(axis=-2)
    columns = [
        params.d[k] + softplus(params.c + params.W2[:, k] + x @ params.W1).sum(axis=-1)
        for k in range(params.K)
    ]
    return np.stack(columns, axis=-1)


def predict_log_proba(params: ModelParameters, x, precompute: bool = True) -> np.ndarray:
    """log p(y | x) for every label, O(MD + MK) per input when ``precompute``."""
    x = check_input(params, x)
    return log_normalize(_label_logits(params, x, precompute))


def predict_proba(params: ModelParameters, x, precompute: bool = True) -> np.ndarray:
    """Exact p(y | x); rows sum to one."""
    return np.exp(predict_log_proba(params, x, precompute=precompute))


def predict(params: ModelParameters, x):
    """Most probable label (1-based); ties go to the lowest label."""
    probs = predict_proba(params, x)
    labels = np.argmax(probs, axis=-1) + 1
    if np.ndim(labels) == 0:
        return int(labels)
    return labels.astype(np.int64)


def predict_proba_batch(params: ModelParameters, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionMismatchError(f"expected a batch of shape (N, D), got {X.shape}")
    return predict_proba(params, X)


def predict_batch(params: ModelParameters, X) -> np.ndarray:
    return np.argmax(predict_proba_batch(params, X), axis=-1).astype(np.int64) + 1


def gibbs_step(params: ModelParameters, x, y: LabelLike, rng: np.random.Generator):
    """One full Gibbs sweep: h ~ p(h|x,y), then x' ~ p(x|h) and y' ~ p(y|h).

    Returns (x', y', h). Works on a single configuration or on a batch of
    independent chains.
    """
    x = check_input(params, x)
    y0 = label_index(params, y)
    if x.ndim == 2 and y0.shape != (x.shape[0],):
        raise DimensionMismatchError(f"got {x.shape[0]} chains but labels of shape {y0.shape}")
    return _gibbs_step(params, x, y0, rng)
