# core/management/commands/transition_demo.py
from core.management.experiment import ExperimentCommand
from core.services.harness import run_transition_demo


class Command(ExperimentCommand):
    help = "Per-event transition waste of the selected schemes over a preemption sequence (default 8 -> 6 -> 4)."
    tag = "transition_demo"

    def handle(self, *args, **options):
        config = self.load(options)
        report = run_transition_demo(config)
        self.say(f"time unit = initial CEC subtask duration ({report.unit:.4g} s)")
        for line in report.lines():
            self.stdout.write(line)
