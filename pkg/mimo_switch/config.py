try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any

from platformdirs import user_config_path
from pydantic import ValidationError

from .exceptions import ConfigurationError
from .models import AppConfig


def get_config_path() -> Path:
    return user_config_path("mimo_switch") / "config.toml"

def load_config(path: Path | None = None) -> AppConfig:
    """Load the config file, falling back to built-in defaults when the default file is absent."""
    config_path = path or get_config_path()
    if not config_path.exists():
        if path is not None:
            raise ConfigurationError(f"Config not found at {config_path}")
        return AppConfig()

    try:
        with config_path.open("rb") as f:
            return AppConfig.model_validate(tomllib.load(f))
    except (ValidationError, tomllib.TOMLDecodeError) as e:
        raise ConfigurationError(f"Config parse error in {config_path}: {e}")

def apply_overrides(config: AppConfig, **flags: Any) -> AppConfig:
    """Overlay the CLI flags that were given (not ``None``) onto ``config.run``."""
    given = {k: v for k, v in flags.items() if v is not None}
    if not given:
        return config
    try:
        run = type(config.run).model_validate(config.run.model_dump() | given)
        return AppConfig.model_validate(config.model_dump() | {"run": run.model_dump()})
    except ValidationError as e:
        raise ConfigurationError(f"Invalid run option: {e}")
