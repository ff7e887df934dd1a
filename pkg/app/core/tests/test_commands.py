from io import StringIO
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase

from core.models import SweepRun, TrialRecord
from core.tests.test_config import ConfigFileMixin
from core.tests.test_harness import SMALL

SMALL_CONF = "".join(f"{key} = {value}\n" for key, value in SMALL.items())


class CommandMixin(ConfigFileMixin):
    def run_command(self, name, *args):
        out = StringIO()
        call_command(name, *args, stdout=out, stderr=StringIO(), no_color=True)
        return out.getvalue()

    def small_conf(self, extra: str = "") -> str:
        return str(self.write_config(SMALL_CONF + extra))


class TransitionDemoCommandTests(CommandMixin, SimpleTestCase):
    def test_prints_waste_table(self):
        output = self.run_command("transition_demo")
        self.assertIn("[transition_demo] time unit", output)
        self.assertIn("total", output)
        self.assertIn("bicec finished at", output)

    def test_scheme_flag_limits_the_table(self):
        output = self.run_command("transition_demo", "--scheme", "cec")
        self.assertIn("cec finished at", output)
        self.assertNotIn("bicec finished at", output)
        self.assertNotIn("mlcec finished at", output)


class SweepCommandTests(CommandMixin, SimpleTestCase):
    def test_writes_csvs_into_out_dir(self):
        conf = self.small_conf()
        out_dir = Path(conf).parent / "results"
        output = self.run_command("sweep", "--config", conf, "--out", str(out_dir), "--no-plots", "--trials", "2")
        self.assertIn("[sweep] 18 trials done", output)
        self.assertTrue((out_dir / "finishing_time.csv").is_file())
        self.assertTrue((out_dir / "trials.csv").is_file())
        self.assertFalse((out_dir / "finishing_time.svg").exists())

    def test_bad_config_exits_with_config_error(self):
        with self.assertRaises(CommandError) as ctx:
            self.run_command("sweep", "--config", self.small_conf("trials = 0\n"))
        self.assertEqual(ctx.exception.returncode, 2)

    def test_missing_config_file(self):
        with self.assertRaises(CommandError) as ctx:
            self.run_command("sweep", "--config", "/nonexistent/experiment.conf")
        self.assertEqual(ctx.exception.returncode, 2)


class SweepPersistCommandTests(CommandMixin, TestCase):
    def test_persist_stores_run_and_trials(self):
        conf = self.small_conf()
        out_dir = Path(conf).parent / "persisted"
        self.run_command("sweep", "--config", conf, "--out", str(out_dir), "--no-plots", "--persist", "--scheme", "cec")
        run = SweepRun.objects.get()
        self.assertEqual(run.output_dir, str(out_dir))
        self.assertEqual(TrialRecord.objects.filter(run=run).count(), 3 * 3)


class VerifyCommandTests(CommandMixin, SimpleTestCase):
    def test_all_schemes_pass(self):
        output = self.run_command("verify", "--config", self.small_conf())
        for scheme in ("cec", "mlcec", "bicec"):
            self.assertIn(f"[verify] {scheme}", output)

    def test_single_scheme(self):
        output = self.run_command("verify", "--config", self.small_conf(), "--scheme", "bicec")
        self.assertIn("over GF(2147483647)", output)
        self.assertNotIn("[verify] cec", output)

    def test_tolerance_failure_exits_as_unrecoverable(self):
        with self.assertRaises(CommandError) as ctx:
            self.run_command("verify", "--config", self.small_conf(), "--scheme", "bicec", "--tolerance=-1")
        self.assertEqual(ctx.exception.returncode, 3)
        self.assertIn("bicec", str(ctx.exception))


class CalibrateCommandTests(CommandMixin, SimpleTestCase):
    def test_prints_rate_for_config_file(self):
        output = self.run_command("calibrate", "--config", self.small_conf(), "--repetitions", "2")
        self.assertIn("dims=(240, 240, 240)", output)
        self.assertIn("decode_rate = ", output)

    def test_zero_repetitions_is_a_config_error(self):
        with self.assertRaises(CommandError) as ctx:
            self.run_command("calibrate", "--repetitions", "0")
        self.assertEqual(ctx.exception.returncode, 2)
