"""
Masks for training with Dropping.

A mask multiplies the hidden biases (m), the visible-hidden weights (M1) and
the hidden-label weights (M2) elementwise; visible and label biases are never
masked. DropOut removes whole hidden units: column j of M1, row j of M2 and
m_j always move together.
"""

from dataclasses import dataclass
from typing import Callable, Dict

import numpy as np

from classrbm.exceptions import ConfigError, DimensionMismatchError
from classrbm.model import ModelParameters
from classrbm.schemas import DroppingKind, DroppingScheme


@dataclass(frozen=True, eq=False)
class Mask:
    """Per-connection multipliers in [0, 1]."""
    M1: np.ndarray
    M2: np.ndarray
    m: np.ndarray

    def __post_init__(self):
        for name in ("M1", "M2", "m"):
            arr = np.array(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.M1.ndim != 2 or self.M2.ndim != 2 or self.m.ndim != 1:
            raise DimensionMismatchError("mask needs M1 (D, M), M2 (M, K) and m (M,)")
        M = self.m.shape[0]
        if self.M1.shape[1] != M or self.M2.shape[0] != M:
            raise DimensionMismatchError(
                f"mask shapes disagree: M1 {self.M1.shape}, M2 {self.M2.shape}, m {self.m.shape}"
            )
        for name in ("M1", "M2", "m"):
            arr = getattr(self, name)
            if not np.all((arr >= 0.0) & (arr <= 1.0)):
                raise ValueError(f"mask block {name} has entries outside [0, 1]")

    @property
    def dims(self):
        return self.M1.shape[0], self.m.shape[0], self.M2.shape[1]

    @classmethod
    def unchecked(cls, M1: np.ndarray, M2: np.ndarray, m: np.ndarray) -> "Mask":
        """Wrap generator output that is in range by construction."""
        mask = object.__new__(cls)
        for name, arr in (("M1", M1), ("M2", M2), ("m", m)):
            arr.setflags(write=False)
            object.__setattr__(mask, name, arr)
        return mask

    @classmethod
    def ones(cls, D: int, M: int, K: int) -> "Mask":
        return cls.unchecked(M1=np.ones((D, M)), M2=np.ones((M, K)), m=np.ones(M))


def _check_probability(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ConfigError(f"keep probability must be in [0, 1], got {p}")


def gen_dropout_mask(D: int, M: int, K: int, p: float, rng: np.random.Generator) -> Mask:
    """Keep each hidden unit with probability p, together with all its connections."""
    _check_probability(p)
    active = (rng.random(M) < p).astype(np.float64)
    return Mask.unchecked(
        M1=np.broadcast_to(active, (D, M)),
        M2=np.broadcast_to(active[:, None], (M, K)),
        m=active,
    )


def gen_dropconnect_mask(D: int, M: int, K: int, p: float, rng: np.random.Generator) -> Mask:
    """Keep each connection independently with probability p."""
    _check_probability(p)
    return Mask.unchecked(
        M1=(rng.random((D, M)) < p).astype(np.float64),
        M2=(rng.random((M, K)) < p).astype(np.float64),
        m=(rng.random(M) < p).astype(np.float64),
    )


def gen_droppart_mask(D: int, M: int, K: int, a: float, b: float, rng: np.random.Generator) -> Mask:
    """Scale each connection by an independent Beta(a, b) draw.

    numpy's beta sampler switches to Johnk's method when both shapes are
    at most one, so small shapes stay exact.
    """
    if not (a > 0 and b > 0):
        raise ConfigError(f"Beta shape parameters must be positive, got a={a}, b={b}")
    return Mask.unchecked(
        M1=rng.beta(a, b, (D, M)),
        M2=rng.beta(a, b, (M, K)),
        m=rng.beta(a, b, M),
    )


_GENERATORS: Dict[DroppingKind, Callable[..., Mask]] = {
    DroppingKind.NONE: lambda scheme, D, M, K, rng: Mask.ones(D, M, K),
    DroppingKind.DROPOUT: lambda scheme, D, M, K, rng: gen_dropout_mask(D, M, K, scheme.p, rng),
    DroppingKind.DROPCONNECT: lambda scheme, D, M, K, rng: gen_dropconnect_mask(D, M, K, scheme.p, rng),
    DroppingKind.DROPPART: lambda scheme, D, M, K, rng: gen_droppart_mask(D, M, K, scheme.a, scheme.b, rng),
}


def sample_mask(scheme: DroppingScheme, D: int, M: int, K: int, rng: np.random.Generator) -> Mask:
    """Draw one mask from ``scheme``; the all-ones mask (no draws) for kind none."""
    generator = _GENERATORS.get(scheme.kind)
    if generator is None:
        raise ConfigError(f"Unknown dropping scheme: {scheme.kind}")
    return generator(scheme, D, M, K, rng)


def apply_mask(params: ModelParameters, mask: Mask) -> ModelParameters:
    """Parameters with c * m, W1 * M1, W2 * M2; b and d are passed through untouched."""
    if mask.dims != params.dims:
        raise DimensionMismatchError(f"mask dims {mask.dims} do not match model dims {params.dims}")
    return ModelParameters.unchecked(
        b=params.b,
        c=params.c * mask.m,
        d=params.d,
        W1=params.W1 * mask.M1,
        W2=params.W2 * mask.M2,
    )


def dropout_prediction_params(params: ModelParameters) -> ModelParameters:
    """Halve W2, the correction applied at prediction time after DropOut training."""
    return params.replace(W2=params.W2 / 2.0)
