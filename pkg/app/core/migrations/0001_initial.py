import django.db.models.deletion
import django.utils.timezone
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='SweepRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('seed', models.BigIntegerField()),
                ('config', models.JSONField(default=dict)),
                ('output_dir', models.CharField(blank=True, default='', max_length=512)),
                ('decode_rate', models.FloatField()),
                ('failure_count', models.PositiveIntegerField(default=0)),
                ('created_at', models.DateTimeField(default=django.utils.timezone.now)),
            ],
            options={
                'ordering': ['-created_at', '-id'],
            },
        ),
        migrations.CreateModel(
            name='TrialRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('scheme', models.CharField(choices=[('cec', 'CEC'), ('mlcec', 'MLCEC'), ('bicec', 'BICEC')], max_length=8)),
                ('n_workers', models.PositiveIntegerField()),
                ('trial', models.PositiveIntegerField()),
                ('status', models.CharField(choices=[('ok', 'ok'), ('unrecoverable', 'unrecoverable')], default='ok', max_length=16)),
                ('failed_set', models.PositiveIntegerField(blank=True, null=True)),
                ('computation_time', models.FloatField(blank=True, null=True)),
                ('decoding_time', models.FloatField(blank=True, null=True)),
                ('finishing_time', models.FloatField(blank=True, null=True)),
                ('transition_waste', models.PositiveIntegerField(blank=True, null=True)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='trials', to='core.sweeprun')),
            ],
            options={
                'ordering': ['run', 'scheme', 'n_workers', 'trial'],
                'indexes': [models.Index(fields=['run', 'scheme', 'n_workers'], name='trial_run_cell_idx')],
            },
        ),
    ]
