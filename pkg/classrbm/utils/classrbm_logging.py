import logging
import json
from datetime import datetime
from typing import Dict, Optional

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

logger = logging.getLogger("ClassRBMLogger")


def configure_logging(level: str = "INFO", log_file: Optional[str] = None) -> None:
    """Install stream (and optional file) handlers on the root logger."""
    handlers = [logging.StreamHandler()]
    if log_file:
        handlers.append(logging.FileHandler(log_file, mode="a"))
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format=LOG_FORMAT,
        handlers=handlers,
        force=True
    )


class ClassRBMLogger:
    @staticmethod
    def log_training_start(n_examples: int, dims: Dict[str, int], config: dict):
        logger.info(json.dumps({
            "event": "Training Start",
            "n_examples": n_examples,
            "dims": dims,
            "config": config,
            "timestamp": datetime.now().isoformat()
        }, indent=4))

    @staticmethod
    def log_checkpoint(iteration: int, metrics: dict):
        logger.info(json.dumps({
            "event": "Training Checkpoint",
            "iteration": iteration,
            "metrics": metrics,
            "timestamp": datetime.now().isoformat()
        }, indent=4))

    @staticmethod
    def log_training_complete(iterations: int, seconds: float):
        logger.info(json.dumps({
            "event": "Training Complete",
            "iterations": iterations,
            "seconds": round(seconds, 3),
            "timestamp": datetime.now().isoformat()
        }, indent=4))

    @staticmethod
    def log_experiment_cell(cell: str, accuracies: list, failures: int):
        logger.info(json.dumps({
            "event": "Experiment Cell",
            "cell": cell,
            "accuracies": accuracies,
            "failures": failures,
            "timestamp": datetime.now().isoformat()
        }, indent=4))

    @staticmethod
    def log_command(command: str, arguments: dict, success: bool):
        logger.info(json.dumps({
            "event": "Command",
            "command": command,
            "arguments": arguments,
            "success": success,
            "timestamp": datetime.now().isoformat()
        }, indent=4, default=str))

    @staticmethod
    def log_error(message: str, exception: Exception):
        logger.error(json.dumps({
            "event": "Error",
            "message": message,
            "exception": str(exception),
            "timestamp": datetime.now().isoformat()
        }, indent=4))

    @staticmethod
    def log_info(message: str):
        """Logs a simple info message."""
        logger.info(json.dumps({
            "event": "Info",
            "message": message,
            "timestamp": datetime.now().isoformat()
        }, indent=4))
