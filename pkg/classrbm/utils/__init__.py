"""
Utility modules for the classrbm package.
"""

from .classrbm_logging import ClassRBMLogger, configure_logging
from .numerics import softplus, sigmoid, log_normalize, stable_softmax, binary_configurations
