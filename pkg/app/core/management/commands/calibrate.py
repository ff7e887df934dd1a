# core/management/commands/calibrate.py
from django.core.management.base import CommandError

from core.exceptions import InvalidParameterError
from core.management.experiment import CONFIG_ERROR, ExperimentCommand
from core.services.verify import measure_rate


class Command(ExperimentCommand):
    help = "Measure this host's dense matrix-multiply throughput at the configured dims."
    tag = "calibrate"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--repetitions", type=int, default=5)

    def handle(self, *args, **options):
        config = self.load(options)
        try:
            rate = measure_rate(config.dims, options["repetitions"])
        except InvalidParameterError as exc:
            raise CommandError(str(exc), returncode=CONFIG_ERROR)
        self.say(f"dims={config.dims.as_tuple()} rate={rate:.4e} ops/sec", self.style.SUCCESS)
        self.stdout.write(f"decode_rate = {rate:.4e}")
