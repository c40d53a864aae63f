"""
Log-domain helpers shared by the model, the oracle and relevance scoring.

These sit on the per-iteration training path, so they stay in plain numpy
ufuncs; whole-table reductions in the oracle use scipy's ``logsumexp``.
"""

import numpy as np
from scipy.special import expit


def softplus(t):
    """log(1 + e^t), stable over the whole float range."""
    return np.logaddexp(0.0, np.asarray(t, dtype=np.float64))


def sigmoid(t):
    return expit(np.asarray(t, dtype=np.float64))


def log_normalize(logits, axis: int = -1):
    """Subtract log-sum-exp along ``axis`` so that exp() sums to one."""
    logits = np.asarray(logits, dtype=np.float64)
    shifted = logits - logits.max(axis=axis, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))


def stable_softmax(logits, axis: int = -1):
    """Softmax with the row maximum subtracted before exponentiating."""
    logits = np.asarray(logits, dtype=np.float64)
    weights = np.exp(logits - logits.max(axis=axis, keepdims=True))
    return weights / weights.sum(axis=axis, keepdims=True)


def binary_configurations(n: int) -> np.ndarray:
    """All 2**n binary vectors of length n as rows, in counting order."""
    codes = np.arange(2 ** n, dtype=np.int64)
    shifts = np.arange(n, dtype=np.int64)
    return ((codes[:, None] >> shifts[None, :]) & 1).astype(np.float64)
