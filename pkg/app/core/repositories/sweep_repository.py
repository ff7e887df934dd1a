from typing import Optional

from django.db import transaction
from django.db.models import Avg, Count, Max, Min, QuerySet

from ..models import SweepRun, TrialRecord


class SweepRepository:
    # -------- Create --------
    @staticmethod
    @transaction.atomic
    def record(result, config, output_dir: Optional[str] = None) -> SweepRun:
        """Persist one sweep run and all of its trials."""
        run = SweepRun.objects.create(
            seed=result.seed,
            config=config.snapshot(),
            output_dir=str(output_dir or config.output_dir),
            decode_rate=result.decode_rate,
            failure_count=len(result.failures),
        )
        TrialRecord.objects.bulk_create([
            TrialRecord(
                run=run,
                scheme=o.scheme.value,
                n_workers=o.N,
                trial=o.trial,
                status=o.status,
                failed_set=o.failed_set,
                computation_time=o.metrics.computation_time if o.ok else None,
                decoding_time=o.metrics.decoding_time if o.ok else None,
                finishing_time=o.metrics.finishing_time if o.ok else None,
                transition_waste=o.metrics.transition_waste_total if o.ok else None,
            )
            for o in result.outcomes
        ])
        return run

    # -------- Queries --------
    @staticmethod
    def runs(limit: int = 20) -> QuerySet[SweepRun]:
        return SweepRun.objects.annotate(trial_count=Count("trials"))[:limit]

    @staticmethod
    def trials(run: SweepRun, scheme: Optional[str] = None, n: Optional[int] = None) -> QuerySet[TrialRecord]:
        qs = TrialRecord.objects.filter(run=run)
        if scheme is not None:
            qs = qs.filter(scheme=scheme)
        if n is not None:
            qs = qs.filter(n_workers=n)
        return qs

    # -------- Aggregates --------
    @staticmethod
    def aggregate(run: SweepRun, scheme: str, n: int) -> dict:
        qs = SweepRepository.trials(run, scheme, n).filter(status="ok")
        return qs.aggregate(
            trials=Count("id"),
            avg_computation=Avg("computation_time"),
            min_computation=Min("computation_time"),
            max_computation=Max("computation_time"),
            avg_decoding=Avg("decoding_time"),
            avg_finishing=Avg("finishing_time"),
            avg_waste=Avg("transition_waste"),
        )
