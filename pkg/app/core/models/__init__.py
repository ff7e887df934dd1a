from .sweep_run import SweepRun
from .trial_record import TrialRecord
