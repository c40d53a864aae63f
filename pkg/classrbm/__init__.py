"""
classrbm: Classification Restricted Boltzmann Machines trained with Dropping,
exact label prediction and relevant-input discovery.
"""

__version__ = "0.1.0"

from .model import ModelParameters, predict, predict_proba, predict_log_proba
from .schemas import DroppingKind, DroppingScheme, TrainingConfig
from .trainer import train
from .relevance import input_relevance, relevant_inputs
