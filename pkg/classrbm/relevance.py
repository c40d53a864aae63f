"""
Relevant-input discovery.

For class y, the relevance of input i is p(x_i = 1 | x_{not i} = 0, y), i.e.
the model's belief that input i is on when it is the only candidate. With the
hidden units summed out this is N_i / (N_i + N_0) where

    log N_i = b_i + sum_j softplus(c_j + W1_ij + W2_jy)
    log N_0 =       sum_j softplus(c_j + W2_jy)

In float64 the probability rounds to exactly 1.0 once log N_i - log N_0
exceeds about 37 (and to 0.0 below about -745), so reports also carry the
log-odds, which stay strictly ordered.
"""

from pathlib import Path
from typing import List, Optional, Sequence, TextIO, Union
import csv
import json

import numpy as np

from classrbm.exceptions import ConfigError, DimensionMismatchError
from classrbm.model import ModelParameters, label_index
from classrbm.schemas import RelevanceReport
from classrbm.utils.numerics import sigmoid, softplus

DEFAULT_THRESHOLD = 0.5


def input_relevance_log_odds(params: ModelParameters, y: int) -> np.ndarray:
    """log N_i - log N_0 for every input under 1-based label ``y``."""
    y0 = int(label_index(params, y))
    base = params.c + params.W2[:, y0]                        # (M,)
    log_n_on = params.b + softplus(base + params.W1).sum(axis=1)
    log_n_off = softplus(base).sum()
    return log_n_on - log_n_off


def input_relevance(params: ModelParameters, y: int) -> np.ndarray:
    """Relevance of every input for 1-based label ``y``; entry i belongs to input i + 1."""
    return sigmoid(input_relevance_log_odds(params, y))


def _check_threshold(threshold: float) -> None:
    if not 0.0 < threshold < 1.0:
        raise ConfigError(f"threshold must be in (0, 1), got {threshold}")


def relevant_inputs(relevance: Sequence[float], threshold: float = DEFAULT_THRESHOLD) -> List[int]:
    """1-based numbers of inputs whose relevance is strictly above ``threshold``."""
    _check_threshold(threshold)
    relevance = np.asarray(relevance, dtype=np.float64)
    if np.any((relevance < 0.0) | (relevance > 1.0)):
        raise ValueError("relevance entries must lie in [0, 1]")
    return [int(i) + 1 for i in np.flatnonzero(relevance > threshold)]


def relevance_report(params: ModelParameters, schema_labels: Optional[Sequence[str]] = None,
                     threshold: float = DEFAULT_THRESHOLD,
                     labels: Optional[Sequence[int]] = None) -> RelevanceReport:
    """Relevance of every input for every class (or only ``labels``), named and thresholded."""
    _check_threshold(threshold)
    if schema_labels is None:
        schema_labels = [f"x{i}" for i in range(1, params.D + 1)]
    if len(schema_labels) != params.D:
        raise DimensionMismatchError(
            f"schema names {len(schema_labels)} inputs but the model has D={params.D}"
        )
    labels = list(labels) if labels is not None else list(range(1, params.K + 1))
    probabilities = {}
    log_odds = {}
    selected = {}
    for label in labels:
        odds = input_relevance_log_odds(params, label)
        probs = sigmoid(odds)
        probabilities[int(label)] = probs.tolist()
        log_odds[int(label)] = odds.tolist()
        selected[int(label)] = relevant_inputs(probs, threshold)
    return RelevanceReport(
        threshold=threshold,
        input_names=list(schema_labels),
        probabilities=probabilities,
        log_odds=log_odds,
        selected=selected,
    )


REPORT_COLUMNS = ["class", "input_index", "input_name", "probability", "log_odds", "selected"]


def write_relevance_rows(report: RelevanceReport, stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for row in report.rows():
        writer.writerow([row.label, row.input_number, row.input_name, repr(row.probability),
                         repr(row.log_odds), int(row.selected)])


def write_relevance_csv(report: RelevanceReport, path: Union[str, Path]) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as file:
        write_relevance_rows(report, file)
    return path


def write_relevance_json(report: RelevanceReport, path: Union[str, Path]) -> Path:
    path = Path(path)
    payload = {
        "threshold": report.threshold,
        "rows": [row.model_dump() for row in report.rows()],
    }
    path.write_text(json.dumps(payload, indent=2) + "\n")
    return path


def relevance_plot_series(report: RelevanceReport, label: int) -> List[tuple]:
    """(input number, probability) pairs for one class, ready for a bar chart."""
    return [(i + 1, p) for i, p in enumerate(report.probabilities[label])]
