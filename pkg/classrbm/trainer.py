"""
Contrastive Divergence training of a ClassRBM with Dropping.

Each iteration draws one example and one mask, computes a CD-k gradient on
the masked parameters and applies a momentum update in which the mask also
scales the c, W1 and W2 blocks (chain rule through the elementwise product).
The log p(mask) term of the lower bound does not depend on the parameters and
contributes nothing to the update.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, List, Optional, Tuple, Union
import csv
import logging
import time

import numpy as np

from classrbm.data.datasets import Dataset
from classrbm.dropping import Mask, apply_mask, dropout_prediction_params, sample_mask
from classrbm.exceptions import ConfigError, DataError, DimensionMismatchError, NumericalFailureError
from classrbm.model import (
    ModelParameters,
    PARAMETER_BLOCKS,
    _gibbs_step,
    _hidden_probs,
    check_input,
    label_index,
    predict_batch,
)
from classrbm.oracle import GradientRecord, MAX_ENUMERATED_CLASSES, MAX_ENUMERATED_INPUTS, exact_log_likelihood
from classrbm.schemas import DroppingKind, DroppingScheme, SamplingMode, TrainingConfig, TrainingLogRecord
from classrbm.utils.classrbm_logging import ClassRBMLogger

logger = logging.getLogger(__name__)


@dataclass
class TrainingLog:
    """Checkpoint records of one run, iterations strictly increasing."""
    records: List[TrainingLogRecord] = field(default_factory=list)

    def append(self, record: TrainingLogRecord) -> None:
        if self.records and record.iteration <= self.records[-1].iteration:
            raise ValueError(
                f"log iterations must increase: {record.iteration} after {self.records[-1].iteration}"
            )
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    def rows(self) -> List[dict]:
        return [record.model_dump() for record in self.records]

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        columns = list(TrainingLogRecord.model_fields)
        with open(path, "w", newline="") as file:
            writer = csv.DictWriter(file, fieldnames=columns, lineterminator="\n")
            writer.writeheader()
            for row in self.rows():
                writer.writerow({k: ("" if v is None else v) for k, v in row.items()})
        return path


def init_params(D: int, M: int, K: int, init_scale: float, rng: np.random.Generator) -> ModelParameters:
    """Zero biases, weights drawn iid from N(0, init_scale^2)."""
    if min(D, M, K) < 1:
        raise DimensionMismatchError(f"dimensions must be positive, got D={D}, M={M}, K={K}")
    if init_scale < 0:
        raise ConfigError(f"init_scale must be non-negative, got {init_scale}")
    return ModelParameters(
        b=np.zeros(D),
        c=np.zeros(M),
        d=np.zeros(K),
        W1=rng.normal(0.0, init_scale, (D, M)),
        W2=rng.normal(0.0, init_scale, (M, K)),
    )


def cd_gradient(masked_params: ModelParameters, example, cd_steps: int,
                rng: np.random.Generator) -> GradientRecord:
    """CD-k estimate of the log-likelihood gradient at one example.

    The chain starts at the data point and resamples both x and y. Hidden
    statistics are activation probabilities in both phases.
    """
    if cd_steps < 1:
        raise ConfigError(f"cd_steps must be at least 1, got {cd_steps}")
    x, y = example
    params = masked_params
    x = check_input(params, x)
    if x.ndim != 1:
        raise DimensionMismatchError("cd_gradient takes a single example")
    y0 = int(label_index(params, y))

    h_pos = _hidden_probs(params, x, y0)
    x_neg, y_neg0 = x, y0
    for _ in range(cd_steps):
        x_neg, y_neg, _ = _gibbs_step(params, x_neg, y_neg0, rng)
        y_neg0 = y_neg - 1
    h_neg = _hidden_probs(params, x_neg, y_neg0)

    y_pos_vec = np.zeros(params.K)
    y_pos_vec[y0] = 1.0
    y_neg_vec = np.zeros(params.K)
    y_neg_vec[y_neg0] = 1.0
    return GradientRecord(
        b=x - x_neg,
        c=h_pos - h_neg,
        d=y_pos_vec - y_neg_vec,
        W1=np.outer(x, h_pos) - np.outer(x_neg, h_neg),
        W2=np.outer(h_pos, y_pos_vec) - np.outer(h_neg, y_neg_vec),
    )


def final_prediction_params(params: ModelParameters, scheme: DroppingScheme) -> ModelParameters:
    """Parameters used for prediction after training under ``scheme``."""
    if scheme.kind == DroppingKind.DROPOUT:
        return dropout_prediction_params(params)
    return params


def _mask_factors(mask: Mask) -> dict:
    return {"b": 1.0, "c": mask.m, "d": 1.0, "W1": mask.M1, "W2": mask.M2}


def _example_indices(n: int, mode: SamplingMode, rng: np.random.Generator) -> Iterator[int]:
    if mode == SamplingMode.SWEEP:
        while True:
            for index in rng.permutation(n):
                yield int(index)
    while True:
        yield int(rng.integers(n))


def _snapshot(params: ModelParameters, dataset: Dataset, X: np.ndarray, iteration: int,
              recon_errors: List[float], track_exact: bool) -> TrainingLogRecord:
    accuracy = float(np.mean(predict_batch(params, X) == dataset.y))
    loglik = None
    if track_exact:
        loglik = exact_log_likelihood(params, dataset)
    return TrainingLogRecord(
        iteration=iteration,
        reconstruction_error=float(np.mean(recon_errors)) if recon_errors else 0.0,
        train_accuracy=accuracy,
        exact_log_likelihood=loglik,
    )


def train(dataset: Dataset, config: TrainingConfig,
          checkpoint_dir: Optional[Union[str, Path]] = None) -> Tuple[ModelParameters, TrainingLog]:
    """Run ``config.iterations`` masked CD updates; deterministic given ``config.seed``."""
    if len(dataset) == 0:
        raise DataError("cannot train on an empty dataset")

    D, M, K = dataset.n_inputs, config.hidden_units, dataset.n_classes
    rng = np.random.default_rng(config.seed)
    params = init_params(D, M, K, config.init_scale, rng)

    track_exact = config.track_exact_loglik
    if track_exact and (D > MAX_ENUMERATED_INPUTS or K > MAX_ENUMERATED_CLASSES):
        logger.warning(f"exact log-likelihood tracking disabled: D={D}, K={K} exceeds the enumeration guard")
        track_exact = False

    if checkpoint_dir is not None and config.checkpoint_every:
        checkpoint_dir = Path(checkpoint_dir)
        checkpoint_dir.mkdir(parents=True, exist_ok=True)

    ClassRBMLogger.log_training_start(len(dataset), {"D": D, "M": M, "K": K}, config.model_dump(mode="json"))
    started = time.perf_counter()

    X = dataset.X.astype(np.float64)
    y = dataset.y
    blocks = {name: np.array(arr) for name, arr in params.blocks().items()}
    velocity = {name: np.zeros_like(arr) for name, arr in blocks.items()}
    indices = _example_indices(len(dataset), config.sampling, rng)
    log = TrainingLog()
    recon_errors: List[float] = []

    for iteration in range(1, config.iterations + 1):
        index = next(indices)
        mask = sample_mask(config.scheme, D, M, K, rng)
        gradient = cd_gradient(apply_mask(params, mask), (X[index], y[index]), config.cd_steps, rng)
        recon_errors.append(float(np.mean(gradient.b ** 2)))

        factors = _mask_factors(mask)
        for name in PARAMETER_BLOCKS:
            velocity[name] = (config.momentum * velocity[name]
                              + config.learning_rate * (factors[name] * getattr(gradient, name)))
            blocks[name] = blocks[name] + velocity[name]

        diverged = [name for name in PARAMETER_BLOCKS if not np.isfinite(blocks[name]).all()]
        if diverged:
            error = NumericalFailureError(f"parameter block {diverged[0]} contains NaN or infinite entries")
            ClassRBMLogger.log_error(f"Training diverged at iteration {iteration}", error)
            raise NumericalFailureError(
                f"non-finite parameters after iteration {iteration} "
                f"(learning_rate={config.learning_rate}, scheme={config.scheme.label}): {error}"
            )
        params = ModelParameters.unchecked(**blocks)

        if config.checkpoint_every and checkpoint_dir is not None and iteration % config.checkpoint_every == 0:
            params.save(Path(checkpoint_dir) / f"checkpoint_{iteration:08d}.json")

        if (config.log_every and iteration % config.log_every == 0) or iteration == config.iterations:
            record = _snapshot(params, dataset, X, iteration, recon_errors, track_exact)
            log.append(record)
            recon_errors = []
            ClassRBMLogger.log_checkpoint(iteration, record.model_dump())

    ClassRBMLogger.log_training_complete(config.iterations, time.perf_counter() - started)
    return params, log
