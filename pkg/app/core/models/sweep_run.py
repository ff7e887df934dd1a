from django.db import models
from django.utils import timezone


class SweepRun(models.Model):
    seed = models.BigIntegerField()
    config = models.JSONField(default=dict)
    output_dir = models.CharField(max_length=512, blank=True, default="")
    decode_rate = models.FloatField()
    failure_count = models.PositiveIntegerField(default=0)

    created_at = models.DateTimeField(default=timezone.now)

    class Meta:
        ordering = ["-created_at", "-id"]

    def __str__(self):
        return f"sweep #{self.pk} seed={self.seed}"
