"""
Evaluation and the experiment grid runner.

A grid crosses hidden-unit counts, learning rates and dropping schemes; each
cell is trained ``repeats`` times with seeds derived from (base seed, cell,
repeat) and scored by classification accuracy on one fixed train/test split.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union
import csv
import hashlib
import json
import logging
import time

import numpy as np

from classrbm.data.datasets import Dataset, split
from classrbm.exceptions import ClassRBMError, DataError
from classrbm.model import predict_batch
from classrbm.schemas import (
    CellResult,
    DroppingScheme,
    ExperimentBody,
    ExperimentGrid,
    ExperimentMetadata,
    ExperimentReport,
    RunFailure,
    TrainingConfig,
)
from classrbm.trainer import final_prediction_params, train
from classrbm.utils.classrbm_logging import ClassRBMLogger

logger = logging.getLogger(__name__)


def classification_accuracy(predictions: Sequence[int], truths: Sequence[int]) -> float:
    """Fraction of predictions equal to the true label."""
    predictions = np.asarray(predictions)
    truths = np.asarray(truths)
    if predictions.shape != truths.shape:
        raise ValueError(f"got {predictions.size} predictions for {truths.size} labels")
    if truths.size == 0:
        raise ValueError("cannot score an empty label list")
    return float(np.mean(predictions == truths))


def majority_baseline(train_set: Dataset, test_set: Dataset) -> float:
    """Accuracy of always answering the most frequent training label (ties to the lowest)."""
    if len(train_set) == 0 or len(test_set) == 0:
        raise DataError("majority baseline needs non-empty train and test sets")
    majority = int(np.argmax(train_set.class_counts())) + 1
    return classification_accuracy(np.full(len(test_set), majority), test_set.y)


@dataclass(frozen=True)
class GridCell:
    hidden_units: int
    learning_rate: float
    scheme: DroppingScheme

    @property
    def key(self) -> str:
        return f"M={self.hidden_units}|lr={self.learning_rate!r}|{self.scheme.label}"


def grid_cells(grid: ExperimentGrid) -> List[GridCell]:
    return [
        GridCell(hidden_units=m, learning_rate=lr, scheme=scheme)
        for lr in grid.learning_rates
        for m in grid.hidden_units
        for scheme in grid.schemes
    ]


def derive_seed(base_seed: int, cell_key: str, repeat: int) -> int:
    """Seed that depends only on the cell's content and the repeat number."""
    digest = hashlib.sha256(f"{base_seed}|{cell_key}|{repeat}".encode()).digest()
    return int.from_bytes(digest[:8], "little") >> 1


def sample_std(values: Sequence[float]) -> float:
    """Standard deviation with the n-1 convention; 0 for a single value."""
    if len(values) < 2:
        return 0.0
    return float(np.std(values, ddof=1))


def _run_once(task: Tuple[Dataset, Dataset, TrainingConfig]) -> Tuple[Optional[float], Optional[str], float]:
    train_set, test_set, config = task
    started = time.perf_counter()
    try:
        params, _ = train(train_set, config)
        params = final_prediction_params(params, config.scheme)
        accuracy = classification_accuracy(predict_batch(params, test_set.X), test_set.y)
        return accuracy, None, time.perf_counter() - started
    except ClassRBMError as e:
        return None, f"{type(e).__name__}: {e}", time.perf_counter() - started


def run_experiment(dataset: Dataset, grid: ExperimentGrid, workers: int = 1,
                   test_set: Optional[Dataset] = None) -> ExperimentReport:
    """Train and score every grid cell ``grid.repeats`` times.

    ``dataset`` is split once by ``grid.split_fraction``/``grid.split_seed``
    unless a separate ``test_set`` is given, in which case ``dataset`` is the
    training set as is. Failed runs are recorded in their cell and do not
    stop the grid.
    """
    started_at = datetime.now().isoformat()
    if test_set is None:
        train_set, test_set = split(dataset, grid.split_fraction, grid.split_seed)
    else:
        train_set = dataset

    cells = grid_cells(grid)
    tasks = []
    for cell in cells:
        for repeat in range(grid.repeats):
            config = TrainingConfig(
                hidden_units=cell.hidden_units,
                learning_rate=cell.learning_rate,
                momentum=grid.momentum,
                iterations=grid.iterations,
                cd_steps=grid.cd_steps,
                scheme=cell.scheme,
                seed=derive_seed(grid.base_seed, cell.key, repeat),
                init_scale=grid.init_scale,
                sampling=grid.sampling,
            )
            tasks.append((train_set, test_set, config))

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_once, tasks))
    else:
        outcomes = [_run_once(task) for task in tasks]

    results: List[CellResult] = []
    timings: Dict[str, float] = {}
    for c, cell in enumerate(cells):
        chunk = outcomes[c * grid.repeats:(c + 1) * grid.repeats]
        seeds = [tasks[c * grid.repeats + r][2].seed for r in range(grid.repeats)]
        accuracies = [acc for acc, _, _ in chunk if acc is not None]
        failures = [
            RunFailure(repeat=r, seed=seeds[r], error=error)
            for r, (_, error, _) in enumerate(chunk) if error is not None
        ]
        results.append(CellResult(
            key=cell.key,
            hidden_units=cell.hidden_units,
            learning_rate=cell.learning_rate,
            scheme=cell.scheme.label,
            seeds=seeds,
            accuracies=accuracies,
            mean=float(np.mean(accuracies)) if accuracies else None,
            std=sample_std(accuracies) if accuracies else None,
            failures=failures,
        ))
        timings[cell.key] = round(sum(seconds for _, _, seconds in chunk), 6)
        ClassRBMLogger.log_experiment_cell(cell.key, accuracies, len(failures))

    body = ExperimentBody(
        n_train=len(train_set),
        n_test=len(test_set),
        majority_baseline=majority_baseline(train_set, test_set),
        cells=results,
        comparisons=dict(grid.comparisons),
    )
    metadata = ExperimentMetadata(
        started_at=started_at,
        finished_at=datetime.now().isoformat(),
        workers=workers,
        wall_clock_seconds=timings,
    )
    return ExperimentReport(body=body, metadata=metadata)


def report_body_json(report: ExperimentReport) -> str:
    return json.dumps(report.body.model_dump(), indent=2) + "\n"


def write_report_json(report: ExperimentReport, path: Union[str, Path]) -> Path:
    """Full report: deterministic ``body`` first, timestamps only under ``metadata``."""
    path = Path(path)
    payload = {"body": report.body.model_dump(), "metadata": report.metadata.model_dump()}
    path.write_text(json.dumps(payload, indent=2) + "\n")
    return path


def write_report_csv(report: ExperimentReport, path: Union[str, Path]) -> Path:
    """Table with one row per (learning rate, hidden units) and a mean/std pair per scheme.

    Externally supplied comparison accuracies go in trailing columns.
    """
    path = Path(path)
    schemes: List[str] = []
    for cell in report.body.cells:
        if cell.scheme not in schemes:
            schemes.append(cell.scheme)
    rows: Dict[Tuple[float, int], Dict[str, CellResult]] = {}
    for cell in report.body.cells:
        rows.setdefault((cell.learning_rate, cell.hidden_units), {})[cell.scheme] = cell

    comparisons = sorted(report.body.comparisons.items())
    header = ["learning_rate", "hidden_units"]
    for scheme in schemes:
        header += [f"{scheme} mean", f"{scheme} std"]
    header += [f"{name} (external)" for name, _ in comparisons]

    def fmt(value: Optional[float]) -> str:
        return "" if value is None else f"{value:.3f}"

    with open(path, "w", newline="") as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(header)
        for (lr, m), by_scheme in rows.items():
            line = [repr(lr), m]
            for scheme in schemes:
                cell = by_scheme.get(scheme)
                line += [fmt(cell.mean if cell else None), fmt(cell.std if cell else None)]
            line += [fmt(value) for _, value in comparisons]
            writer.writerow(line)
    return path


def best_per_scheme(report: ExperimentReport) -> List[Tuple[str, float]]:
    """Highest mean accuracy reached by each scheme, plus comparison values."""
    best: Dict[str, float] = {}
    for cell in report.body.cells:
        if cell.mean is not None and cell.mean > best.get(cell.scheme, -1.0):
            best[cell.scheme] = cell.mean
    series = list(best.items())
    series += sorted(report.body.comparisons.items())
    return series


def write_plot_series(series: Sequence[Tuple[object, float]], path: Union[str, Path]) -> Path:
    """(index, value) rows for an external plotting tool."""
    path = Path(path)
    with open(path, "w", newline="") as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(["index", "value"])
        for index, value in series:
            writer.writerow([index, repr(float(value))])
    return path
