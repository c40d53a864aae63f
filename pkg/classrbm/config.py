"""
Process settings from the environment and YAML configuration files.
"""

import os
from pathlib import Path
from typing import Optional, Type, TypeVar, Union

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError

from classrbm.exceptions import ConfigError, DataError

ModelT = TypeVar("ModelT", bound=BaseModel)


class Settings(BaseModel):
    """Environment-driven settings (a .env file in the working directory is honored)"""
    log_level: str = Field(default="INFO", description="Logging level name")
    log_file: Optional[str] = Field(default=None, description="Optional log file path")
    workers: int = Field(default=1, ge=1, description="Parallel workers for experiment grids")

    @classmethod
    def from_env(cls) -> "Settings":
        load_dotenv()
        try:
            return cls(
                log_level=os.getenv("CLASSRBM_LOG_LEVEL", "INFO"),
                log_file=os.getenv("CLASSRBM_LOG_FILE") or None,
                workers=int(os.getenv("CLASSRBM_WORKERS", "1")),
            )
        except (ValueError, ValidationError) as e:
            raise ConfigError(f"Invalid CLASSRBM_* environment setting: {e}")


def load_config_file(path: Union[str, Path], model: Type[ModelT]) -> ModelT:
    """Parse a YAML file and validate it against ``model``."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"Configuration file not found: {path}")
    try:
        payload = yaml.safe_load(path.read_text()) or {}
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        where = f" at line {mark.line + 1}" if mark else ""
        raise ConfigError(f"Could not parse {path}{where}: {getattr(e, 'problem', e)}")
    try:
        return model.model_validate(payload)
    except ValidationError as e:
        details = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or '<root>'}: {err['msg']}" for err in e.errors()
        )
        raise ConfigError(f"Invalid {model.__name__} in {path}: {details}")
