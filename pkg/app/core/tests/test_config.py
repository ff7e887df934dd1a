import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from core.exceptions import ConfigError
from core.serializers import parse_n_sweep
from core.services.allocation import Scheme
from core.services.codec import EvalPoints, FieldKind, MatrixDims
from core.services.config import load_config, read_config_file
from core.services.harness import MEASURED


class ConfigFileMixin:
    def write_config(self, text: str) -> Path:
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        path = Path(tmp.name) / "experiment.conf"
        path.write_text(text)
        return path


class NSweepParsingTests(SimpleTestCase):
    def test_inclusive_range(self):
        self.assertEqual(parse_n_sweep("20:40:2"), tuple(range(20, 41, 2)))
        self.assertEqual(parse_n_sweep("3:5"), (3, 4, 5))

    def test_list(self):
        self.assertEqual(parse_n_sweep("8, 10,12"), (8, 10, 12))

    def test_bad_ranges(self):
        with self.assertRaises(ValueError):
            parse_n_sweep("1:2:3:4")
        with self.assertRaises(ValueError):
            parse_n_sweep("1:9:0")


class DefaultsTests(SimpleTestCase):
    def test_defaults(self):
        config = load_config()
        self.assertEqual(config.dims, MatrixDims(2400, 2400, 2400))
        self.assertEqual(config.schemes, (Scheme.CEC, Scheme.MLCEC, Scheme.BICEC))
        self.assertEqual((config.params[Scheme.CEC].K, config.params[Scheme.CEC].S), (10, 20))
        self.assertEqual((config.params[Scheme.BICEC].K, config.params[Scheme.BICEC].S), (800, 80))
        self.assertEqual(config.n_sweep, tuple(range(20, 41, 2)))
        self.assertEqual(config.trials, 20)
        self.assertEqual(config.straggler_prob, 0.5)
        self.assertEqual(config.slowdown, 3.0)
        self.assertEqual(config.decode_rate, 8e9)
        self.assertEqual(config.arithmetic.kind, FieldKind.REAL)
        self.assertEqual(config.eval_points, EvalPoints.AUTO)
        self.assertEqual(config.demo.N_min, 4)

    def test_overrides_take_precedence(self):
        config = load_config(seed=7, schemes="mlcec,bicec", decode_rate="measured", field="prime")
        self.assertEqual(config.seed, 7)
        self.assertEqual(config.schemes, (Scheme.MLCEC, Scheme.BICEC))
        self.assertEqual(config.decode_rate, MEASURED)
        self.assertTrue(config.arithmetic.is_prime)

    def test_measured_base_rate_is_calibrated_on_this_host(self):
        config = load_config(u=40, w=40, v=40, base_rate="measured")
        self.assertIsInstance(config.base_rate, float)
        self.assertGreater(config.base_rate, 0)
        self.assertEqual(config.decode_rate, 8e9)

    def test_none_override_keeps_default(self):
        self.assertEqual(load_config(seed=None).seed, 0)


class ConfigFileTests(ConfigFileMixin, SimpleTestCase):
    def test_file_values_and_override_precedence(self):
        path = self.write_config(
            "# smaller sweep\n"
            "N_MAX = 30\n"
            "n_min=10\n"
            "n_sweep = 20:30:10\n"
            "trials = 4\n"
        )
        self.assertEqual(read_config_file(path)["n_max"], "30")

        config = load_config(path, trials=2)
        self.assertEqual(config.N_max, 30)
        self.assertEqual(config.n_sweep, (20, 30))
        self.assertEqual(config.trials, 2)

    def test_custom_d_sequence(self):
        path = self.write_config("n_sweep = 20,30,40\nmlcec_d = " + ",".join(["20"] * 40) + "\n")
        self.assertEqual(len(load_config(path).mlcec_d), 40)

    def test_unknown_key(self):
        path = self.write_config("u = 10\nbogus = 1\n")
        with self.assertRaisesMessage(ConfigError, "unknown key"):
            load_config(path)

    def test_missing_file(self):
        with self.assertRaisesMessage(ConfigError, "not found"):
            load_config("/nonexistent/experiment.conf")


class InvalidConfigTests(SimpleTestCase):
    def assertRejected(self, fragment: str, **overrides):
        with self.assertRaises(ConfigError) as ctx:
            load_config(**overrides)
        self.assertIn(fragment, str(ctx.exception))

    def test_field_errors_name_the_key(self):
        self.assertRejected("trials", trials=0)
        self.assertRejected("straggler_prob", straggler_prob=1.5)
        self.assertRejected("decode_rate", decode_rate="fast")
        self.assertRejected("base_rate", base_rate="fast")
        self.assertRejected("base_rate", base_rate=0)
        self.assertRejected("schemes", schemes="cec,fountain")

    def test_cross_field_errors(self):
        self.assertRejected("outside", n_sweep="10:40:2")
        self.assertRejected("below S", n_min=4, n_sweep="4,40", bicec_k=300)
        self.assertRejected("unrecoverable", bicec_k=2000)
        self.assertRejected("d-sequence", mlcec_d="1,2,3")
        self.assertRejected("not in n_sweep", n_sweep="20,40", mlcec_d=",".join(["20"] * 30))

    def test_unknown_override(self):
        with self.assertRaisesMessage(ConfigError, "unknown configuration keys"):
            load_config(colour="red")
