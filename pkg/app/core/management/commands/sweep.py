# core/management/commands/sweep.py
from django.conf import settings
from django.core.management.base import CommandError

from core.exceptions import NoDataError
from core.management.experiment import UNRECOVERABLE, ExperimentCommand
from core.repositories import SweepRepository
from core.services.harness import run_sweep, write_csvs
from core.services.plots import emit_plots


class Command(ExperimentCommand):
    help = "Run seeded trials over N for each scheme; write mean/std CSVs, the per-trial log and SVG plots."
    tag = "sweep"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--persist", action="store_true", help="store the run and its trials in the database")
        parser.add_argument("--no-plots", action="store_true", dest="no_plots")

    def handle(self, *args, **options):
        config = self.load(options)
        self.say(
            f"schemes={','.join(s.value for s in config.schemes)} N={list(config.n_sweep)} "
            f"trials={config.trials} seed={config.seed}"
        )

        result = run_sweep(config)
        paths = write_csvs(result, config.output_dir)
        if not options["no_plots"]:
            try:
                paths += emit_plots(result, config.output_dir)
            except NoDataError as exc:
                self.say(f"no plots: {exc}", self.style.WARNING)

        if options["persist"] or settings.SWEEP_PERSIST:
            run = SweepRepository.record(result, config)
            self.say(f"persisted as run #{run.pk}")

        for path in paths:
            self.stdout.write(f"  {path}")

        if result.failures:
            raise CommandError(
                f"{len(result.failures)} of {len(result.outcomes)} trials were unrecoverable (see trials.csv)",
                returncode=UNRECOVERABLE,
            )
        self.say(f"{len(result.outcomes)} trials done", self.style.SUCCESS)
