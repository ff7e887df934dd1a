from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from core.exceptions import InvalidParameterError
from core.services.allocation import (
    DSequence,
    Scheme,
    SchemeParams,
    allocate,
    bicec_allocate,
    cec_allocate,
    default_d_sequence,
    mlcec_allocate,
    transition_waste,
)

GOLDEN = Path(__file__).parent / "golden"
DEMO_D = (2, 2, 3, 4, 4, 5, 6, 6)


def brute_force_waste(before, completed, after):
    """Set-difference recomputation over surviving workers."""
    after_rows = dict(zip(after.worker_ids, after.rows))
    total = 0
    for wid, row in zip(before.worker_ids, before.rows):
        if wid not in after_rows:
            continue
        done = set(row[: completed.get(wid, 0)])
        total += len([m for m in row if m not in after_rows[wid] and m not in done])
        total += len([m for m in after_rows[wid] if m not in row])
    return total


def nondecreasing_sequences(length, lo, hi, total):
    """Every nondecreasing tuple of `length` integers in [lo, hi] summing to `total`."""
    if length == 0:
        if total == 0:
            yield ()
        return
    for x in range(lo, hi + 1):
        rest = total - x
        if rest < x * (length - 1):
            break
        if rest > hi * (length - 1):
            continue
        for tail in nondecreasing_sequences(length - 1, x, hi, rest):
            yield (x,) + tail


def assert_realizes(case, N, d):
    alloc = mlcec_allocate(N, d)
    counts = alloc.column_counts()
    case.assertEqual(alloc.row_sums(), [sum(d) // N] * N, d)
    case.assertEqual(tuple(counts.get(m, 0) for m in range(1, N + 1)), tuple(d), d)


class SchemeParamsTests(SimpleTestCase):
    def test_set_based_bounds(self):
        with self.assertRaises(InvalidParameterError):
            SchemeParams(Scheme.CEC, K=5, S=4, N_max=8, N_min=4)
        with self.assertRaises(InvalidParameterError):
            SchemeParams(Scheme.MLCEC, K=2, S=9, N_max=8, N_min=4)
        with self.assertRaises(InvalidParameterError):
            SchemeParams(Scheme.CEC, K=2, S=4, N_max=8, N_min=9)

    def test_bicec_threshold_must_be_reachable_at_n_min(self):
        with self.assertRaises(InvalidParameterError):
            SchemeParams(Scheme.BICEC, K=601, S=300, N_max=8, N_min=2)
        p = SchemeParams("bicec", K=600, S=300, N_max=8, N_min=2)
        self.assertEqual(p.scheme, Scheme.BICEC)
        self.assertEqual(p.codeword_length, 2400)


class CecAllocationTests(SimpleTestCase):
    def test_golden_n8_s4(self):
        self.assertEqual(cec_allocate(8, 4).dump(), (GOLDEN / "cec_n8_s4.txt").read_text())

    def test_row_and_column_sums_exhaustive(self):
        for N in range(1, 13):
            for S in range(1, N + 1):
                alloc = cec_allocate(N, S)
                self.assertEqual(alloc.row_sums(), [S] * N)
                self.assertEqual(alloc.column_counts(), {m: S for m in range(1, N + 1)})

    def test_single_worker(self):
        self.assertEqual(cec_allocate(1, 1).rows, ((1,),))

    def test_s_greater_than_n(self):
        with self.assertRaises(InvalidParameterError):
            cec_allocate(3, 4)


class DSequenceTests(SimpleTestCase):
    def test_heuristic_examples(self):
        self.assertEqual(default_d_sequence(6, 4, 2).d, (2, 3, 4, 4, 5, 6))
        self.assertEqual(default_d_sequence(8, 4, 2).d, (2, 3, 3, 4, 4, 5, 5, 6))
        self.assertEqual(default_d_sequence(4, 4, 2).d, (4, 4, 4, 4))

    def test_heuristic_is_valid_exhaustive(self):
        for N in range(1, 13):
            for S in range(1, N + 1):
                for K in range(1, S + 1):
                    d = default_d_sequence(N, S, K)
                    self.assertEqual(d.violations(N, S, K), [], (N, S, K))

    def test_infeasible_bounds(self):
        with self.assertRaises(InvalidParameterError):
            default_d_sequence(6, 2, 3)
        with self.assertRaises(InvalidParameterError):
            default_d_sequence(4, 5, 2)

    def test_violations(self):
        self.assertIn("not nondecreasing", DSequence((3, 2)).violations(2, 2, 1)[0])
        self.assertEqual(len(DSequence((1, 1, 1)).violations(3, 2, 2)), 2)
        with self.assertRaises(InvalidParameterError):
            DSequence((2, 2)).validate(3, 2, 1)


class MlcecAllocationTests(SimpleTestCase):
    def test_golden_demo_d(self):
        alloc = mlcec_allocate(8, DEMO_D)
        self.assertEqual(alloc.dump(), (GOLDEN / "mlcec_n8_d22344566.txt").read_text())

    def test_small_example_rows(self):
        alloc = mlcec_allocate(5, (2, 2, 3, 4, 4))
        self.assertEqual(alloc.rows, ((3, 4, 5), (2, 4, 5), (2, 4, 5), (1, 3, 5), (1, 3, 4)))

    def test_every_feasible_d_is_realized(self):
        # entries >= 1 covers every K, since a d feasible for K is feasible for 1
        for N in range(1, 11):
            for S in range(1, N + 1):
                for d in nondecreasing_sequences(N, 1, N, S * N):
                    assert_realizes(self, N, d)

    def test_sampled_feasible_d_is_realized_for_larger_n(self):
        rng = np.random.default_rng(12)
        for N in (11, 12):
            checked = 0
            while checked < 2000:
                d = tuple(sorted(int(x) for x in rng.integers(1, N + 1, N)))
                if sum(d) % N:
                    continue
                assert_realizes(self, N, d)
                checked += 1

    def test_heuristic_d_for_every_n_s_k(self):
        for N in range(1, 13):
            for S in range(1, N + 1):
                for K in range(1, S + 1):
                    d = default_d_sequence(N, S, K)
                    alloc = mlcec_allocate(N, d)
                    self.assertEqual(alloc.row_sums(), [S] * N)
                    counts = alloc.column_counts()
                    self.assertEqual([counts.get(m, 0) for m in range(1, N + 1)], list(d.d))
                    for row in alloc.rows:
                        self.assertEqual(list(row), sorted(set(row)))

    def test_rejects_bad_d(self):
        with self.assertRaises(InvalidParameterError):
            mlcec_allocate(4, (1, 2, 3))
        with self.assertRaises(InvalidParameterError):
            mlcec_allocate(4, (1, 2, 3, 3))
        with self.assertRaises(InvalidParameterError):
            mlcec_allocate(3, (1, 2, 9))

    def test_worker_ids_label_rows(self):
        alloc = mlcec_allocate(8, DEMO_D, worker_ids=range(11, 19))
        self.assertEqual(alloc.row_for(11), (4, 6, 7, 8))
        self.assertEqual(alloc.row_for(18), (1, 4, 6, 7))


class BicecAllocationTests(SimpleTestCase):
    def test_rows_disjoint_with_s_each(self):
        for N in range(1, 13):
            for S in (1, 3, 80):
                alloc = bicec_allocate(range(1, N + 1), S)
                seen = set()
                for n, row in zip(alloc.worker_ids, alloc.rows):
                    self.assertEqual(row, tuple(range((n - 1) * S + 1, n * S + 1)))
                    self.assertFalse(seen & set(row))
                    seen |= set(row)

    def test_fixed_per_worker_id(self):
        self.assertEqual(bicec_allocate([2, 5], 3).row_for(5), (13, 14, 15))

    def test_rejects_duplicates_and_out_of_range(self):
        with self.assertRaises(InvalidParameterError):
            bicec_allocate([1, 1], 3)
        with self.assertRaises(InvalidParameterError):
            bicec_allocate([9], 3, N_max=8)


class TransitionWasteTests(SimpleTestCase):
    def test_bicec_zero_for_any_shrink_or_grow(self):
        before = bicec_allocate(range(1, 9), 300)
        for survivors in ([1, 2, 3, 4, 5, 6], [1, 2, 3, 4], list(range(1, 9))):
            after = bicec_allocate(survivors, 300)
            self.assertEqual(transition_waste(before, {w: 75 for w in range(1, 9)}, after), 0)

    def test_no_change_is_zero(self):
        alloc = cec_allocate(8, 4)
        self.assertEqual(transition_waste(alloc, {}, alloc), 0)

    def test_matches_set_difference_oracle(self):
        params = {
            Scheme.CEC: SchemeParams(Scheme.CEC, K=2, S=4, N_max=8, N_min=4),
            Scheme.MLCEC: SchemeParams(Scheme.MLCEC, K=2, S=4, N_max=8, N_min=4),
        }
        for scheme, p in params.items():
            d8 = DEMO_D if scheme == Scheme.MLCEC else None
            a8 = allocate(p, range(1, 9), d8)
            a6 = allocate(p, range(1, 7))
            a4 = allocate(p, range(1, 5))
            for done in (0, 1, 2, 4):
                completed8 = {w: done for w in range(1, 9)}
                completed6 = {w: done for w in range(1, 7)}
                self.assertEqual(transition_waste(a8, completed8, a6), brute_force_waste(a8, completed8, a6))
                self.assertEqual(transition_waste(a6, completed6, a4), brute_force_waste(a6, completed6, a4))

    def test_hand_counted_cec_8_to_6(self):
        # first subtask of every row finished before the preemption
        before, after = cec_allocate(8, 4), cec_allocate(6, 4)
        self.assertEqual(transition_waste(before, {w: 1 for w in range(1, 9)}, after), 10)

    def test_completed_entries_may_be_given_as_a_set(self):
        before, after = cec_allocate(8, 4), cec_allocate(6, 4)
        as_count = transition_waste(before, {6: 1}, after)
        as_set = transition_waste(before, {6: {1}}, after)
        self.assertEqual(as_count, as_set)
        with self.assertRaises(InvalidParameterError):
            transition_waste(before, {6: {2}}, after)

    def test_inconsistent_completed_count(self):
        alloc = cec_allocate(4, 2)
        with self.assertRaises(InvalidParameterError):
            transition_waste(alloc, {1: 3}, alloc)
