"""
Brute-force reference computations for tiny ClassRBMs.

Every function here enumerates configurations exactly. Hidden units are
summed analytically (one softplus per unit) unless stated otherwise, so the
guard is on D and K only. Nothing in this module approximates: exceeding a
guard raises ``EnumerationTooLargeError``.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union
import json
import logging

import numpy as np
from scipy.special import logsumexp

from classrbm.exceptions import DataError, EnumerationTooLargeError, InvalidInputError
from classrbm.model import (
    ModelParameters,
    PARAMETER_BLOCKS,
    check_hidden,
    check_input,
    label_index,
)
from classrbm.utils.numerics import binary_configurations, sigmoid, softplus

logger = logging.getLogger(__name__)

MAX_ENUMERATED_INPUTS = 16
MAX_ENUMERATED_CLASSES = 10
MAX_ENUMERATED_HIDDEN = 16


@dataclass(frozen=True, eq=False)
class GradientRecord:
    """Per-block gradient with the shapes of ``ModelParameters``."""
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    W1: np.ndarray
    W2: np.ndarray

    def blocks(self) -> Dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in PARAMETER_BLOCKS}

    def __add__(self, other: "GradientRecord") -> "GradientRecord":
        return GradientRecord(**{k: v + getattr(other, k) for k, v in self.blocks().items()})

    def scaled(self, factor: float) -> "GradientRecord":
        return GradientRecord(**{k: v * factor for k, v in self.blocks().items()})

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(v)) for v in self.blocks().values())


def _guard(params: ModelParameters, hidden: bool = False) -> None:
    if params.D > MAX_ENUMERATED_INPUTS or params.K > MAX_ENUMERATED_CLASSES:
        raise EnumerationTooLargeError(
            f"enumeration too large: D={params.D} (max {MAX_ENUMERATED_INPUTS}), "
            f"K={params.K} (max {MAX_ENUMERATED_CLASSES})"
        )
    if hidden and params.M > MAX_ENUMERATED_HIDDEN:
        raise EnumerationTooLargeError(
            f"enumeration too large: M={params.M} (max {MAX_ENUMERATED_HIDDEN}) for explicit hidden enumeration"
        )


def _log_unnormalized(params: ModelParameters, X: np.ndarray) -> np.ndarray:
    """log sum_h exp(-E(x, y, h)) for each row of X and each label: shape (N, K)."""
    pre = params.c + X @ params.W1                       # (N, M)
    free = softplus(pre[:, :, None] + params.W2).sum(axis=1)  # (N, K)
    return (X @ params.b)[:, None] + params.d + free


def _all_inputs(params: ModelParameters) -> np.ndarray:
    return binary_configurations(params.D)


def _energies(params: ModelParameters, X: np.ndarray, H: np.ndarray) -> np.ndarray:
    """-E(x, y, h) for all rows of X, all labels, all rows of H: shape (NX, K, NH)."""
    xb = X @ params.b                                    # (NX,)
    hc = H @ params.c                                    # (NH,)
    xWh = X @ params.W1 @ H.T                            # (NX, NH)
    hWy = H @ params.W2                                  # (NH, K)
    return (xb[:, None, None] + hc[None, None, :] + params.d[None, :, None]
            + xWh[:, None, :] + hWy.T[None, :, :])


def log_partition_function(params: ModelParameters, sum_hidden: bool = True) -> float:
    """log Z by enumeration over (x, y); over (x, y, h) when ``sum_hidden`` is False."""
    _guard(params, hidden=not sum_hidden)
    X = _all_inputs(params)
    if sum_hidden:
        return float(logsumexp(_log_unnormalized(params, X)))
    H = binary_configurations(params.M)
    return float(logsumexp(_energies(params, X, H)))


def _log_joint_table(params: ModelParameters) -> Tuple[np.ndarray, np.ndarray]:
    X = _all_inputs(params)
    log_u = _log_unnormalized(params, X)
    return X, log_u - logsumexp(log_u)


def exact_joint(params: ModelParameters, x, y) -> float:
    """p(x, y) with the hidden units summed out."""
    _guard(params)
    x = check_input(params, x)
    if x.ndim != 1:
        raise InvalidInputError("exact_joint takes a single input")
    y0 = int(label_index(params, y))
    log_z = log_partition_function(params)
    return float(np.exp(_log_unnormalized(params, x[None, :])[0, y0] - log_z))


def exact_label_posterior(params: ModelParameters, x) -> np.ndarray:
    """p(y | x) by explicit enumeration over (y, h)."""
    _guard(params, hidden=True)
    x = check_input(params, x)
    if x.ndim != 1:
        raise InvalidInputError("exact_label_posterior takes a single input")
    H = binary_configurations(params.M)
    neg_e = _energies(params, x[None, :], H)[0]          # (K, NH)
    log_py = logsumexp(neg_e, axis=1)
    return np.exp(log_py - logsumexp(log_py))


def exact_hidden_conditional(params: ModelParameters, x, y) -> np.ndarray:
    """p(h_j = 1 | x, y) for each j, enumerating all 2^M hidden states."""
    _guard(params, hidden=True)
    x = check_input(params, x)
    if x.ndim != 1:
        raise InvalidInputError("exact_hidden_conditional takes a single input")
    y0 = int(label_index(params, y))
    H = binary_configurations(params.M)
    neg_e = _energies(params, x[None, :], H)[0, y0]      # (NH,)
    weights = np.exp(neg_e - logsumexp(neg_e))
    return weights @ H


def exact_visible_conditional(params: ModelParameters, h) -> np.ndarray:
    """p(x_i = 1 | h) for each i, enumerating all (x, y) given h."""
    _guard(params)
    h = check_hidden(params, h)
    if h.ndim != 1:
        raise InvalidInputError("expected a single hidden state")
    X = _all_inputs(params)
    neg_e = _energies(params, X, h[None, :])[:, :, 0]    # (NX, K)
    log_px = logsumexp(neg_e, axis=1)
    weights = np.exp(log_px - logsumexp(log_px))
    return weights @ X


def exact_label_given_hidden(params: ModelParameters, h) -> np.ndarray:
    """p(y | h), enumerating all x given h."""
    _guard(params)
    h = check_hidden(params, h)
    if h.ndim != 1:
        raise InvalidInputError("expected a single hidden state")
    X = _all_inputs(params)
    neg_e = _energies(params, X, h[None, :])[:, :, 0]    # (NX, K)
    log_py = logsumexp(neg_e, axis=0)
    return np.exp(log_py - logsumexp(log_py))


def _dataset_arrays(dataset) -> Tuple[np.ndarray, np.ndarray]:
    if hasattr(dataset, "X") and hasattr(dataset, "y"):
        X, y = dataset.X, dataset.y
    else:
        pairs = list(dataset)
        if not pairs:
            raise DataError("dataset is empty")
        X = np.array([p[0] for p in pairs])
        y = np.array([p[1] for p in pairs])
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.shape[0] == 0:
        raise DataError("dataset is empty")
    return X, y


def exact_log_likelihood(params: ModelParameters, dataset) -> float:
    """Mean log p(x, y) over the dataset."""
    _guard(params)
    X, y = _dataset_arrays(dataset)
    X = check_input(params, X)
    y0 = label_index(params, y)
    log_u = _log_unnormalized(params, X)[np.arange(len(y0)), y0]
    return float(np.mean(log_u) - log_partition_function(params))


def _sufficient_statistics(params: ModelParameters, X: np.ndarray, Y: np.ndarray, weights: np.ndarray) -> GradientRecord:
    """Weighted sums of (x, E[h|x,y], y, x E[h]', E[h] y') with one-hot Y of shape (N, K)."""
    y0 = np.argmax(Y, axis=1)
    Hbar = sigmoid(params.c + X @ params.W1 + params.W2[:, y0].T)  # (N, M)
    wx = weights[:, None] * X
    wh = weights[:, None] * Hbar
    return GradientRecord(
        b=wx.sum(axis=0),
        c=wh.sum(axis=0),
        d=(weights[:, None] * Y).sum(axis=0),
        W1=wx.T @ Hbar,
        W2=wh.T @ Y,
    )


def exact_loglik_gradient(params: ModelParameters, dataset) -> GradientRecord:
    """Gradient of the mean log-likelihood: data statistics minus model statistics."""
    _guard(params)
    X, y = _dataset_arrays(dataset)
    X = check_input(params, X)
    y0 = label_index(params, y)
    n = X.shape[0]
    eye = np.eye(params.K)

    data = _sufficient_statistics(params, X, eye[y0], np.full(n, 1.0 / n))

    X_all, log_joint = _log_joint_table(params)
    n_all = X_all.shape[0]
    # every (x, y) pair of the model, weighted by its exact probability
    X_rep = np.repeat(X_all, params.K, axis=0)
    Y_rep = np.tile(eye, (n_all, 1))
    model = _sufficient_statistics(params, X_rep, Y_rep, np.exp(log_joint).reshape(-1))

    return data + model.scaled(-1.0)


def exact_input_relevance(params: ModelParameters, i: int, y) -> float:
    """p(x_i = 1 | x_{not i} = 0, y) from the joint; ``i`` is a 1-based input number."""
    _guard(params)
    if not isinstance(i, (int, np.integer)) or not 1 <= i <= params.D:
        raise InvalidInputError(f"input number must be in 1..{params.D}, got {i!r}")
    e_i = np.zeros(params.D)
    e_i[i - 1] = 1.0
    p_on = exact_joint(params, e_i, y)
    p_off = exact_joint(params, np.zeros(params.D), y)
    return p_on / (p_on + p_off)


# ---------------------------------------------------------------------------
# fixture emission

def random_params(D: int, M: int, K: int, rng: np.random.Generator, scale: float = 1.0) -> ModelParameters:
    """Model with every entry drawn from N(0, scale^2)."""
    return ModelParameters(
        b=rng.normal(0.0, scale, D),
        c=rng.normal(0.0, scale, M),
        d=rng.normal(0.0, scale, K),
        W1=rng.normal(0.0, scale, (D, M)),
        W2=rng.normal(0.0, scale, (M, K)),
    )


def emit_fixtures(path: Union[str, Path], n_models: int = 20, seed: int = 0,
                  dims: Optional[Sequence[Tuple[int, int, int]]] = None) -> Path:
    """Write oracle (model, input, expected output) cases as JSON.

    Each case carries the model, one random input and label, and the oracle
    values of predict_proba, exact_joint, log_partition_function and the
    per-input relevance for that label.
    """
    rng = np.random.default_rng(seed)
    dims = list(dims or [(3, 2, 2), (4, 3, 2), (6, 5, 3), (8, 4, 3)])
    cases: List[dict] = []
    for n in range(n_models):
        D, M, K = dims[n % len(dims)]
        params = random_params(D, M, K, rng)
        x = rng.integers(0, 2, D).astype(np.float64)
        y = int(rng.integers(1, K + 1))
        cases.append({
            "model": params.to_dict(),
            "x": x.astype(int).tolist(),
            "y": y,
            "expected": {
                "label_posterior": exact_label_posterior(params, x).tolist(),
                "joint": exact_joint(params, x, y),
                "log_partition": log_partition_function(params),
                "relevance": [exact_input_relevance(params, i, y) for i in range(1, D + 1)],
            },
        })
    path = Path(path)
    path.write_text(json.dumps({"seed": seed, "cases": cases}, indent=2) + "\n")
    logger.info(f"Wrote {len(cases)} oracle fixtures to {path}")
    return path


def load_fixtures(path: Union[str, Path]) -> List[dict]:
    payload = json.loads(Path(path).read_text())
    for case in payload["cases"]:
        case["model"] = ModelParameters.from_dict(case["model"])
    return payload["cases"]
