import csv
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from core.exceptions import NoDataError
from core.services.allocation import Scheme
from core.services.config import load_config
from core.services.harness import (
    CSV_HEADER,
    METRICS,
    TRIALS_HEADER,
    SweepResult,
    TrialOutcome,
    run_sweep,
    run_transition_demo,
    run_trial,
    run_verification,
    write_csvs,
)
from core.services.plots import emit_plots

SMALL = dict(
    u=240, w=240, v=240,
    n_max=12, n_min=8, n_sweep="8:12:2",
    cec_k=2, cec_s=4, mlcec_k=2, mlcec_s=4, bicec_k=24, bicec_s=6,
    trials=3, verify_bicec_k=24,
)


def small_config(**overrides):
    return load_config(**{**SMALL, **overrides})


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class SweepTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.out = Path(self.tmp.name)

    def test_one_outcome_per_scheme_n_and_trial(self):
        result = run_sweep(small_config())
        self.assertEqual(len(result.outcomes), 3 * 3 * 3)
        self.assertFalse(result.failures)
        self.assertEqual(len(result.cells()), 9)

    def test_default_configuration_size(self):
        config = load_config()
        self.assertEqual(len(config.schemes) * len(config.n_sweep) * config.trials, 660)

    def test_same_seed_gives_identical_files_regardless_of_threads(self):
        one = write_csvs(run_sweep(small_config(workers=1)), self.out / "a")
        many = write_csvs(run_sweep(small_config(workers=3)), self.out / "b")
        for a, b in zip(one, many):
            self.assertEqual(a.name, b.name)
            self.assertEqual(a.read_bytes(), b.read_bytes())

    def test_different_seed_changes_results(self):
        a = run_sweep(small_config(seed=1)).stats("computation_time")
        b = run_sweep(small_config(seed=2)).stats("computation_time")
        self.assertNotEqual([r.mean for r in a], [r.mean for r in b])

    def test_single_trial_has_zero_std(self):
        for row in run_sweep(small_config(trials=1)).stats("finishing_time"):
            self.assertEqual(row.std, 0.0)
            self.assertEqual(row.trials, 1)

    def test_finishing_is_computation_plus_decoding(self):
        for o in run_sweep(small_config()).outcomes:
            self.assertAlmostEqual(o.metrics.finishing_time, o.metrics.computation_time + o.metrics.decoding_time)
            self.assertGreater(o.metrics.decoding_time, 0)

    def test_csv_means_recompute_from_trial_log(self):
        paths = write_csvs(run_sweep(small_config()), self.out)
        self.assertEqual([p.name for p in paths], [f"{m}.csv" for m in METRICS] + ["trials.csv"])

        trials = read_rows(self.out / "trials.csv")
        self.assertEqual(tuple(trials[0]), TRIALS_HEADER)
        for metric in METRICS:
            rows = read_rows(self.out / f"{metric}.csv")
            self.assertEqual(tuple(rows[0]), CSV_HEADER)
            for row in rows:
                values = [
                    float(t[metric]) for t in trials
                    if t["scheme"] == row["scheme"] and t["N"] == row["N"] and t["status"] == "ok"
                ]
                self.assertEqual(int(row["trials"]), len(values))
                self.assertAlmostEqual(float(row["mean"]), float(np.mean(values)))
                self.assertAlmostEqual(float(row["std"]), float(np.std(values)))

    def test_cell_without_successes_is_left_empty(self):
        result = SweepResult(seed=0, decode_rate=1.0, outcomes=(TrialOutcome(Scheme.CEC, 8, 0, failed_set=3),))
        self.assertTrue(result.is_empty)
        (stats,) = result.stats("computation_time")
        self.assertIsNone(stats.mean)
        self.assertEqual(stats.trials, 0)

        write_csvs(result, self.out)
        (row,) = read_rows(self.out / "computation_time.csv")
        self.assertEqual((row["mean"], row["std"], row["trials"]), ("", "", "0"))
        (trial,) = read_rows(self.out / "trials.csv")
        self.assertEqual((trial["status"], trial["failed_set"]), ("unrecoverable", "3"))

    def test_bicec_fastest_and_cec_slowest_at_full_size(self):
        ordered = 0
        for seed in range(20):
            config = load_config(n_sweep="40", trials=1, seed=seed)
            t = {s: run_trial(config, s, 40, 0, 8e9).metrics.computation_time for s in Scheme}
            ordered += t[Scheme.BICEC] < t[Scheme.MLCEC] < t[Scheme.CEC]
        self.assertGreaterEqual(ordered, 18)

    def test_rectangular_finishing_time_favours_mlcec_at_large_n(self):
        config = load_config(u=2400, w=960, v=6000, n_sweep="32:40:2", schemes="mlcec,bicec")
        means = {(r.scheme, r.N): r.mean for r in run_sweep(config).stats("finishing_time")}
        for N in config.n_sweep:
            self.assertLess(means[(Scheme.MLCEC, N)], means[(Scheme.BICEC, N)], f"N={N}")

    def test_square_finishing_time_favours_bicec_at_full_size(self):
        stats = run_sweep(load_config(n_sweep="40")).stats("finishing_time")
        means = {r.scheme: r.mean for r in stats}
        self.assertEqual(min(means, key=means.get), Scheme.BICEC)

    def test_trials_repeat_exactly_without_stragglers(self):
        config = small_config(straggler_prob=0.0)
        fast = {s: run_trial(config, s, 8, 0, 8e9).metrics.computation_time for s in Scheme}
        again = {s: run_trial(config, s, 8, 1, 8e9).metrics.computation_time for s in Scheme}
        self.assertEqual(fast, again)


class PlotTests(SimpleTestCase):
    def test_one_svg_per_metric_with_tagged_series(self):
        with tempfile.TemporaryDirectory() as tmp:
            paths = emit_plots(run_sweep(small_config(trials=1)), tmp)
            self.assertEqual([p.name for p in paths], [f"{m}.svg" for m in METRICS])
            svg = paths[0].read_text()
            for scheme in ("cec", "mlcec", "bicec"):
                self.assertIn(f'id="series-{scheme}"', svg)

    def test_empty_result_has_nothing_to_plot(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(NoDataError):
                emit_plots(SweepResult(seed=0, decode_rate=1.0), tmp)


class TransitionDemoTests(SimpleTestCase):
    def test_default_preemption_sequence(self):
        report = run_transition_demo(load_config())
        self.assertEqual(report.sizes, (6, 4))
        self.assertEqual(report.waste[Scheme.CEC], (10, 10))
        self.assertEqual(report.waste[Scheme.MLCEC], (24, 16))
        self.assertEqual(report.waste[Scheme.BICEC], (0, 0))
        self.assertLess(report.computation_time[Scheme.BICEC], report.computation_time[Scheme.CEC])

    def test_no_events_no_waste(self):
        report = run_transition_demo(load_config(demo_event_times=""))
        self.assertEqual(report.sizes, ())
        self.assertEqual(set(report.waste.values()), {()})

    def test_scheme_selection_limits_the_report(self):
        report = run_transition_demo(load_config(schemes="bicec"))
        self.assertEqual(list(report.waste), [Scheme.BICEC])
        self.assertEqual(report.waste[Scheme.BICEC], (0, 0))
        self.assertEqual(len(report.lines()), 1 + 2 + 1 + 1)

    def test_report_lines(self):
        lines = run_transition_demo(load_config()).lines()
        self.assertEqual(len(lines), 1 + 2 + 1 + 3)
        self.assertTrue(lines[3].strip().startswith("total"))
        self.assertIn("cec finished at", lines[4])


class VerificationTests(SimpleTestCase):
    def test_every_scheme_recovers_the_product(self):
        rows = run_verification(small_config())
        self.assertEqual([r.scheme for r in rows], list(Scheme))
        for row in rows:
            self.assertLessEqual(row.relative_error, 1e-6, row.scheme)
        bicec = rows[-1]
        self.assertEqual(bicec.field, "GF(2147483647)")
        self.assertEqual(bicec.max_abs_error, 0.0)
