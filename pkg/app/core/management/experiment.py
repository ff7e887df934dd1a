# core/management/experiment.py
from django.core.management.base import BaseCommand, CommandError

from core.exceptions import ConfigError, InvalidParameterError
from core.services.config import load_config
from core.services.harness import ExperimentConfig

CONFIG_ERROR = 2
UNRECOVERABLE = 3


class ExperimentCommand(BaseCommand):
    """Shared `--config/--seed/--out/--scheme/--trials/--workers` handling."""

    tag = "experiment"

    def add_arguments(self, parser):
        parser.add_argument("--config", dest="config_path", help="flat `key = value` config file")
        parser.add_argument("--seed", type=int, help="master RNG seed")
        parser.add_argument("--out", dest="output_dir", help="output directory")
        parser.add_argument("--scheme", choices=["cec", "mlcec", "bicec", "all"])
        parser.add_argument("--trials", type=int)
        parser.add_argument("--workers", type=int, help="threads running trials")

    def load(self, options) -> ExperimentConfig:
        try:
            return load_config(
                options.get("config_path"),
                seed=options.get("seed"),
                output_dir=options.get("output_dir"),
                schemes=options.get("scheme"),
                trials=options.get("trials"),
                workers=options.get("workers"),
            )
        except (ConfigError, InvalidParameterError) as exc:
            raise CommandError(f"configuration error: {exc}", returncode=CONFIG_ERROR)

    def say(self, message: str, style=None):
        text = f"[{self.tag}] {message}"
        self.stdout.write(style(text) if style else text)
