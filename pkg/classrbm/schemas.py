from typing import Dict, List, Optional
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from enum import Enum

MODEL_FORMAT_VERSION = 1


class DroppingKind(str, Enum):
    """Mask generation schemes"""
    NONE = "none"
    DROPOUT = "dropout"             # whole hidden units, Bernoulli(p)
    DROPCONNECT = "dropconnect"     # single connections, Bernoulli(p)
    DROPPART = "droppart"           # single connections, Beta(a, b) multipliers


class SamplingMode(str, Enum):
    """How training examples are picked each iteration"""
    UNIFORM = "uniform"   # one example drawn uniformly with replacement
    SWEEP = "sweep"       # shuffled pass over the data, reshuffled every epoch


class DroppingScheme(BaseModel):
    """Dropping scheme and its distribution parameters"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: DroppingKind = Field(
        default=DroppingKind.NONE,
        description="Mask generation scheme"
    )
    p: Optional[float] = Field(
        default=None,
        description="Keep probability for dropout/dropconnect",
        ge=0.0,
        le=1.0
    )
    a: Optional[float] = Field(
        default=None,
        description="First Beta shape parameter for droppart",
        gt=0.0
    )
    b: Optional[float] = Field(
        default=None,
        description="Second Beta shape parameter for droppart",
        gt=0.0
    )

    @model_validator(mode='after')
    def validate_parameters(self):
        """Parameters must be present iff the scheme uses them"""
        if self.kind in (DroppingKind.DROPOUT, DroppingKind.DROPCONNECT):
            if self.p is None:
                raise ValueError(f"{self.kind.value} requires p")
            if self.a is not None or self.b is not None:
                raise ValueError(f"{self.kind.value} takes p only, not a/b")
        elif self.kind == DroppingKind.DROPPART:
            if self.a is None or self.b is None:
                raise ValueError("droppart requires both a and b")
            if self.p is not None:
                raise ValueError("droppart takes a and b, not p")
        elif any(v is not None for v in (self.p, self.a, self.b)):
            raise ValueError("scheme 'none' takes no parameters")
        return self

    @property
    def label(self) -> str:
        if self.kind in (DroppingKind.DROPOUT, DroppingKind.DROPCONNECT):
            return f"{self.kind.value}(p={self.p:g})"
        if self.kind == DroppingKind.DROPPART:
            return f"droppart(a={self.a:g},b={self.b:g})"
        return "none"


def default_schemes() -> List[DroppingScheme]:
    return [
        DroppingScheme(kind=DroppingKind.NONE),
        DroppingScheme(kind=DroppingKind.DROPOUT, p=0.5),
        DroppingScheme(kind=DroppingKind.DROPCONNECT, p=0.5),
        DroppingScheme(kind=DroppingKind.DROPPART, a=0.1, b=0.1),
        DroppingScheme(kind=DroppingKind.DROPPART, a=0.5, b=0.5),
        DroppingScheme(kind=DroppingKind.DROPPART, a=1.0, b=1.0),
    ]


class TrainingConfig(BaseModel):
    """Hyperparameters of one contrastive divergence run"""
    model_config = ConfigDict(extra="forbid")

    hidden_units: int = Field(default=10, description="Number of hidden units M", ge=1)
    learning_rate: float = Field(default=0.01, description="Step size", ge=0.0)
    momentum: float = Field(default=0.5, description="Momentum rate", ge=0.0, lt=1.0)
    iterations: int = Field(default=100_000, description="Number of single-example updates", ge=1)
    cd_steps: int = Field(default=1, description="Gibbs steps k in CD-k", ge=1)
    scheme: DroppingScheme = Field(default_factory=DroppingScheme, description="Dropping scheme")
    seed: int = Field(default=0, description="Seed for every random draw of the run", ge=0, lt=2 ** 64)
    init_scale: float = Field(default=0.01, description="Std of the Gaussian weight initialization", gt=0.0)
    sampling: SamplingMode = Field(default=SamplingMode.UNIFORM, description="Example selection mode")
    log_every: int = Field(
        default=0,
        description="Iterations between training-log records (0: final record only)",
        ge=0
    )
    checkpoint_every: int = Field(
        default=0,
        description="Iterations between checkpoint files (0: none)",
        ge=0
    )
    track_exact_loglik: bool = Field(
        default=False,
        description="Record the exact log-likelihood at each log record (tiny models only)"
    )


class TrainingLogRecord(BaseModel):
    iteration: int
    reconstruction_error: float
    train_accuracy: float
    exact_log_likelihood: Optional[float] = None


class SynthSpec(BaseModel):
    """Parameters of a synthetic class-conditional Bernoulli dataset"""
    model_config = ConfigDict(extra="forbid")

    n_inputs: int = Field(description="Input width D", ge=2)
    n_classes: int = Field(default=2, description="Number of classes K", ge=2)
    n_examples: int = Field(description="Number of examples", ge=1)
    signal_strength: float = Field(
        default=0.4,
        description="Distance of template probabilities from 1/2",
        ge=0.0,
        le=0.5
    )
    seed: int = Field(default=0, ge=0)


class GenerationRecord(BaseModel):
    """Generating rule of a synthetic dataset"""
    n_inputs: int
    n_classes: int
    n_examples: int
    signal_strength: float
    class_priors: List[float]
    templates: List[List[float]] = Field(description="Per-class Bernoulli probabilities, K rows of length D")


class DatasetMetadata(BaseModel):
    """Sidecar written next to an exported CSV so the class count survives absent classes"""
    model_config = ConfigDict(extra="forbid")

    n_classes: int = Field(ge=1)
    label_column: str
    label_categories: Optional[List[str]] = None

    @model_validator(mode='after')
    def _categories_match_count(self):
        if self.label_categories is not None and len(self.label_categories) != self.n_classes:
            raise ValueError("label_categories must name exactly n_classes labels")
        return self


class ModelFile(BaseModel):
    """On-disk layout of ClassRBM parameters (arrays row-major)"""
    model_config = ConfigDict(extra="forbid")

    format_version: int = Field(description="Model file format version")
    n_visible: int = Field(ge=1)
    n_hidden: int = Field(ge=1)
    n_classes: int = Field(ge=1)
    b: List[float]
    c: List[float]
    d: List[float]
    W1: List[List[float]]
    W2: List[List[float]]

    @field_validator('format_version')
    @classmethod
    def validate_version(cls, value):
        if value != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model format version {value}")
        return value


class FeatureSpec(BaseModel):
    """One categorical feature and its ordered categories"""
    model_config = ConfigDict(extra="forbid")

    name: str = Field(min_length=1)
    description: Optional[str] = None
    categories: List[str] = Field(min_length=1)

    @field_validator('categories')
    @classmethod
    def validate_unique(cls, categories):
        seen = set()
        duplicates = [c for c in categories if c in seen or seen.add(c)]
        if duplicates:
            raise ValueError(f"duplicate categories: {', '.join(duplicates)}")
        return categories


class LabelSpec(BaseModel):
    """Label column and its category order (category i becomes label i+1)"""
    model_config = ConfigDict(extra="forbid")

    column: str = Field(min_length=1)
    categories: List[str] = Field(min_length=2)

    @field_validator('categories')
    @classmethod
    def validate_unique(cls, categories):
        if len(set(categories)) != len(categories):
            raise ValueError("duplicate label categories")
        return categories


class SchemaFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = "schema"
    features: List[FeatureSpec] = Field(min_length=1)
    label: Optional[LabelSpec] = None

    @model_validator(mode='after')
    def validate_feature_names(self):
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise ValueError("duplicate feature names")
        return self


class ExperimentGrid(BaseModel):
    """Grid of hidden-unit counts, learning rates and dropping schemes"""
    model_config = ConfigDict(extra="forbid")

    hidden_units: List[int] = Field(default_factory=lambda: [5, 10, 15, 20], min_length=1)
    learning_rates: List[float] = Field(default_factory=lambda: [0.01, 0.1], min_length=1)
    schemes: List[DroppingScheme] = Field(default_factory=default_schemes, min_length=1)
    repeats: int = Field(default=10, ge=1)
    base_seed: int = Field(default=0, ge=0)
    iterations: int = Field(default=100_000, ge=1)
    momentum: float = Field(default=0.5, ge=0.0, lt=1.0)
    cd_steps: int = Field(default=1, ge=1)
    init_scale: float = Field(default=0.01, gt=0.0)
    sampling: SamplingMode = SamplingMode.UNIFORM
    split_fraction: float = Field(default=0.7, gt=0.0, lt=1.0, description="Training share of the single split")
    split_seed: int = Field(default=0, ge=0)
    comparisons: Dict[str, float] = Field(
        default_factory=dict,
        description="Externally supplied accuracies of other methods, copied into the report"
    )

    @field_validator('hidden_units')
    @classmethod
    def validate_hidden_units(cls, values):
        if any(v < 1 for v in values):
            raise ValueError("hidden unit counts must be positive")
        return values

    @field_validator('learning_rates')
    @classmethod
    def validate_learning_rates(cls, values):
        if any(v < 0 for v in values):
            raise ValueError("learning rates must be non-negative")
        return values


class RunFailure(BaseModel):
    repeat: int
    seed: int
    error: str


class CellResult(BaseModel):
    """Accuracies of one grid cell over its repeats"""
    key: str
    hidden_units: int
    learning_rate: float
    scheme: str
    seeds: List[int]
    accuracies: List[float]
    mean: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    std: Optional[float] = Field(default=None, ge=0.0)
    failures: List[RunFailure] = Field(default_factory=list)


class ExperimentBody(BaseModel):
    """Deterministic part of an experiment report"""
    n_train: int
    n_test: int
    majority_baseline: float
    std_convention: str = "sample (n-1)"
    cells: List[CellResult]
    comparisons: Dict[str, float] = Field(default_factory=dict)


class ExperimentMetadata(BaseModel):
    started_at: str
    finished_at: str
    workers: int
    wall_clock_seconds: Dict[str, float] = Field(description="Per-cell wall-clock time, keyed by cell key")


class ExperimentReport(BaseModel):
    body: ExperimentBody
    metadata: ExperimentMetadata


class RelevanceRow(BaseModel):
    label: int
    input_number: int
    input_name: str
    probability: float = Field(ge=0.0, le=1.0)
    log_odds: float
    selected: bool


class RelevanceReport(BaseModel):
    """Per-class relevance of every input under x_{not i} = 0"""
    threshold: float = Field(gt=0.0, lt=1.0)
    input_names: List[str]
    probabilities: Dict[int, List[float]] = Field(description="Label -> probability per input")
    log_odds: Dict[int, List[float]] = Field(
        description="Label -> log N_on - log N_off per input; ordered even where probabilities saturate"
    )
    selected: Dict[int, List[int]] = Field(description="Label -> selected 1-based input numbers")

    def rows(self) -> List[RelevanceRow]:
        return [
            RelevanceRow(
                label=label,
                input_number=i + 1,
                input_name=self.input_names[i],
                probability=prob,
                log_odds=self.log_odds[label][i],
                selected=(i + 1) in self.selected[label]
            )
            for label, probs in sorted(self.probabilities.items())
            for i, prob in enumerate(probs)
        ]
