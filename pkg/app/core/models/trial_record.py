from django.db import models


class TrialRecord(models.Model):
    STATUS_CHOICES = [
        ("ok", "ok"),
        ("unrecoverable", "unrecoverable"),
    ]
    SCHEME_CHOICES = [
        ("cec", "CEC"),
        ("mlcec", "MLCEC"),
        ("bicec", "BICEC"),
    ]

    run = models.ForeignKey("core.SweepRun", on_delete=models.CASCADE, related_name="trials")
    scheme = models.CharField(max_length=8, choices=SCHEME_CHOICES)
    n_workers = models.PositiveIntegerField()
    trial = models.PositiveIntegerField()
    status = models.CharField(max_length=16, choices=STATUS_CHOICES, default="ok")
    failed_set = models.PositiveIntegerField(null=True, blank=True)

    computation_time = models.FloatField(null=True, blank=True)
    decoding_time = models.FloatField(null=True, blank=True)
    finishing_time = models.FloatField(null=True, blank=True)
    transition_waste = models.PositiveIntegerField(null=True, blank=True)

    class Meta:
        indexes = [
            models.Index(fields=["run", "scheme", "n_workers"], name="trial_run_cell_idx"),
        ]
        ordering = ["run", "scheme", "n_workers", "trial"]

    def __str__(self):
        return f"{self.scheme} N={self.n_workers} #{self.trial} ({self.status})"
