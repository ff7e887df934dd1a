# core/services/config.py
"""
Experiment configuration: settings defaults < `key = value` file < CLI flags,
validated by ExperimentConfigSerializer.
"""
import logging
from pathlib import Path
from typing import Optional, Union

from django.conf import settings
from dotenv import dotenv_values

from core.exceptions import ConfigError
from core.serializers.experiment import ExperimentConfigSerializer
from core.services.harness import ExperimentConfig

logger = logging.getLogger(__name__)


def read_config_file(path: Union[str, Path]) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")

    values = {}
    for key, value in dotenv_values(path).items():
        name = key.strip().lower()
        if name not in settings.EXPERIMENT_DEFAULTS:
            raise ConfigError(f"{path}: unknown key {key!r}")
        if value is None:
            raise ConfigError(f"{path}: key {key!r} has no value")
        values[name] = value.strip()
    logger.debug("read %d keys from %s", len(values), path)
    return values


def _format_errors(errors) -> str:
    parts = []
    for name, messages in errors.items():
        text = " ".join(str(m) for m in messages) if isinstance(messages, list) else str(messages)
        parts.append(text if name == "non_field_errors" else f"{name}: {text}")
    return "; ".join(parts)


def load_config(path: Optional[Union[str, Path]] = None, **overrides) -> ExperimentConfig:
    data = dict(settings.EXPERIMENT_DEFAULTS)
    if path:
        data.update(read_config_file(path))
    data.update({k: v for k, v in overrides.items() if v is not None})

    unknown = set(overrides) - set(settings.EXPERIMENT_DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown configuration keys {sorted(unknown)}")

    serializer = ExperimentConfigSerializer(data=data)
    if not serializer.is_valid():
        raise ConfigError(_format_errors(serializer.errors))
    return serializer.save()
