# core/management/commands/verify.py
from django.core.management.base import CommandError

from core.exceptions import UnrecoverableTrialError
from core.management.experiment import UNRECOVERABLE, ExperimentCommand
from core.services.harness import run_verification


class Command(ExperimentCommand):
    help = "Encode, run the simulated completion subset, decode and compare against the direct product."
    tag = "verify"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--tolerance", type=float, default=1e-6, help="max relative error")

    def handle(self, *args, **options):
        config = self.load(options)
        try:
            rows = run_verification(config)
        except UnrecoverableTrialError as exc:
            raise CommandError(f"{exc.scheme}: {exc}", returncode=UNRECOVERABLE)

        bad = []
        for row in rows:
            ok = row.relative_error <= options["tolerance"]
            style = self.style.SUCCESS if ok else self.style.ERROR
            self.say(
                f"{row.scheme.value:<6} over {row.field}: max_abs={row.max_abs_error:.3e} rel={row.relative_error:.3e}",
                style,
            )
            if not ok:
                bad.append(row.scheme.value)
        if bad:
            raise CommandError(
                f"recovered product off by more than {options['tolerance']:g} for {', '.join(bad)}",
                returncode=UNRECOVERABLE,
            )
