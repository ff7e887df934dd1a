# core/services/harness.py
"""
Seeded trial sweeps over N for the three schemes, CSV output, the elastic
transition demonstration and the functional verification run.
"""
import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

import numpy as np
from django.conf import settings

from core.exceptions import InvalidParameterError, UnrecoverableTrialError
from core.services.allocation import Scheme, SchemeParams
from core.services.codec import EvalPoints, Field, MatrixDims
from core.services.simkernel import (
    ElasticTimeline,
    SubtaskWork,
    TrialMetrics,
    decoding_time_model,
    sample_profiles,
    simulate,
)
from core.services.verify import measure_rate, run_functional

logger = logging.getLogger(__name__)

METRICS = ("computation_time", "decoding_time", "finishing_time", "transition_waste")
CSV_HEADER = ("scheme", "N", "mean", "std", "trials", "seed")
TRIALS_HEADER = (
    "scheme", "N", "trial", "seed", "status", "failed_set",
    "computation_time", "decoding_time", "finishing_time", "transition_waste",
)
MEASURED = "measured"


# ----------------------------
#  Configuration
# ----------------------------

@dataclass(frozen=True)
class DemoConfig:
    N_max: int = 8
    K: int = 2
    S: int = 4
    bicec_K: int = 600
    bicec_S: int = 300
    mlcec_d: tuple = (2, 2, 3, 4, 4, 5, 6, 6)
    event_times: tuple = (1.5, 3.0)  # multiples of the initial CEC subtask duration
    leave_per_event: int = 2

    @property
    def N_min(self) -> int:
        return self.N_max - self.leave_per_event * len(self.event_times)


@dataclass(frozen=True)
class VerifyConfig:
    dims: MatrixDims = field(default_factory=lambda: MatrixDims(120, 96, 150))
    bicec_K: int = 40
    bicec_S: int = 4


@dataclass(frozen=True)
class ExperimentConfig:
    dims: MatrixDims
    params: Mapping[Scheme, SchemeParams]
    n_sweep: tuple
    trials: int
    straggler_prob: float
    slowdown: float
    base_rate: float
    decode_rate: Union[float, str]
    seed: int
    output_dir: Path
    mlcec_d: Optional[tuple] = None
    notice_delay: float = 0.0
    workers: int = 1
    arithmetic: Field = field(default_factory=Field.real)
    eval_points: EvalPoints = EvalPoints.AUTO
    demo: DemoConfig = field(default_factory=DemoConfig)
    verify: VerifyConfig = field(default_factory=VerifyConfig)

    def __post_init__(self):
        if self.trials < 1:
            raise InvalidParameterError("trials must be >= 1")
        if self.workers < 1:
            raise InvalidParameterError("workers must be >= 1")
        if not self.params:
            raise InvalidParameterError("at least one scheme must be selected")
        if not self.n_sweep:
            raise InvalidParameterError("n_sweep is empty")
        for p in self.params.values():
            outside = [n for n in self.n_sweep if not p.N_min <= n <= p.N_max]
            if outside:
                raise InvalidParameterError(f"{p.scheme.value}: N values {outside} outside [{p.N_min}, {p.N_max}]")
            if p.scheme.is_set_based and min(self.n_sweep) < p.S:
                raise InvalidParameterError(f"{p.scheme.value}: N={min(self.n_sweep)} is below S={p.S}")
        if self.decode_rate != MEASURED and float(self.decode_rate) <= 0:
            raise InvalidParameterError("decode_rate must be positive or 'measured'")

    @property
    def schemes(self) -> tuple:
        return tuple(self.params)

    @property
    def N_max(self) -> int:
        return max(p.N_max for p in self.params.values())

    def snapshot(self) -> dict:
        return {
            "dims": list(self.dims.as_tuple()),
            "params": {s.value: [p.K, p.S, p.N_max, p.N_min] for s, p in self.params.items()},
            "n_sweep": list(self.n_sweep),
            "trials": self.trials,
            "straggler_prob": self.straggler_prob,
            "slowdown": self.slowdown,
            "base_rate": self.base_rate,
            "decode_rate": self.decode_rate,
            "seed": self.seed,
            "mlcec_d": list(self.mlcec_d) if self.mlcec_d else None,
            "notice_delay": self.notice_delay,
        }


# ----------------------------
#  Sweep
# ----------------------------

@dataclass(frozen=True)
class TrialOutcome:
    scheme: Scheme
    N: int
    trial: int
    metrics: Optional[TrialMetrics] = None
    failed_set: Optional[int] = None

    @property
    def ok(self) -> bool:
        return self.metrics is not None

    @property
    def status(self) -> str:
        return "ok" if self.ok else "unrecoverable"

    def value(self, metric: str) -> float:
        if metric == "transition_waste":
            return float(self.metrics.transition_waste_total)
        return float(getattr(self.metrics, metric))


@dataclass(frozen=True)
class CellStats:
    scheme: Scheme
    N: int
    mean: Optional[float]
    std: Optional[float]
    trials: int


@dataclass(frozen=True)
class SweepResult:
    seed: int
    decode_rate: float
    outcomes: tuple = ()

    @property
    def is_empty(self) -> bool:
        return not any(o.ok for o in self.outcomes)

    @property
    def failures(self) -> tuple:
        return tuple(o for o in self.outcomes if not o.ok)

    def cells(self) -> list:
        seen = {}
        for o in self.outcomes:
            seen.setdefault((o.scheme, o.N), []).append(o)
        return list(seen.items())

    def stats(self, metric: str) -> list:
        if metric not in METRICS:
            raise InvalidParameterError(f"unknown metric {metric}")
        rows = []
        for (scheme, N), outcomes in self.cells():
            values = np.array([o.value(metric) for o in outcomes if o.ok])
            if values.size:
                rows.append(CellStats(scheme, N, float(values.mean()), float(values.std()), int(values.size)))
            else:
                rows.append(CellStats(scheme, N, None, None, 0))
        return rows

    def series(self, metric: str) -> dict:
        """scheme -> (N values, means), skipping cells without a successful trial."""
        out = {}
        for row in self.stats(metric):
            if row.mean is None:
                continue
            xs, ys = out.setdefault(row.scheme, ([], []))
            xs.append(row.N)
            ys.append(row.mean)
        return out


def resolve_decode_rate(config: ExperimentConfig) -> float:
    if config.decode_rate == MEASURED:
        return measure_rate(config.dims)
    return float(config.decode_rate)


def run_trial(config: ExperimentConfig, scheme: Scheme, N: int, trial: int, decode_rate: float) -> TrialOutcome:
    """Same (seed, N, trial) gives every scheme the same straggler draw."""
    params = config.params[scheme]
    profiles = sample_profiles(
        config.N_max, config.base_rate, config.straggler_prob, config.slowdown, (config.seed, N, trial)
    )
    d = config.mlcec_d if scheme == Scheme.MLCEC and config.mlcec_d and len(config.mlcec_d) == N else None
    try:
        metrics = simulate(
            params,
            profiles,
            SubtaskWork.from_dims(config.dims),
            worker_ids=range(1, N + 1),
            timeline=ElasticTimeline(notice_delay=config.notice_delay),
            d=d,
        )
    except UnrecoverableTrialError as exc:
        logger.warning("%s N=%d trial %d unrecoverable: %s", scheme.value, N, trial, exc)
        return TrialOutcome(scheme, N, trial, failed_set=exc.set_index)
    decoding = decoding_time_model(scheme, params.K, config.dims, N, decode_rate)
    return TrialOutcome(scheme, N, trial, metrics.with_decoding(decoding))


def run_sweep(config: ExperimentConfig) -> SweepResult:
    decode_rate = resolve_decode_rate(config)
    outcomes = []
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        for scheme in config.schemes:
            for N in config.n_sweep:
                logger.info("cell %s N=%d: %d trials", scheme.value, N, config.trials)
                cell = list(pool.map(
                    lambda t, s=scheme, n=N: run_trial(config, s, n, t, decode_rate),
                    range(config.trials),
                ))
                failed = sum(1 for o in cell if not o.ok)
                logger.info("cell %s N=%d done (%d unrecoverable)", scheme.value, N, failed)
                outcomes.extend(cell)
    return SweepResult(seed=config.seed, decode_rate=decode_rate, outcomes=tuple(outcomes))


def _num(x) -> str:
    return "" if x is None else repr(float(x))


def write_csvs(result: SweepResult, out_dir: Union[str, Path]) -> list:
    """One CSV per metric plus the per-trial log; returns the paths written."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for metric in METRICS:
        path = out_dir / f"{metric}.csv"
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for row in result.stats(metric):
                writer.writerow([row.scheme.value, row.N, _num(row.mean), _num(row.std), row.trials, result.seed])
        written.append(path)

    path = out_dir / "trials.csv"
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRIALS_HEADER)
        for o in result.outcomes:
            m = o.metrics
            writer.writerow([
                o.scheme.value, o.N, o.trial, result.seed, o.status,
                "" if o.failed_set is None else o.failed_set,
                _num(m.computation_time if m else None),
                _num(m.decoding_time if m else None),
                _num(m.finishing_time if m else None),
                "" if m is None else m.transition_waste_total,
            ])
    written.append(path)
    logger.info("wrote %d CSV files to %s", len(written), out_dir)
    return written


# ----------------------------
#  Elastic transition demo
# ----------------------------

@dataclass(frozen=True)
class TransitionReport:
    unit: float  # initial CEC subtask duration, seconds
    event_times: tuple
    sizes: tuple
    waste: Mapping[Scheme, tuple]
    computation_time: Mapping[Scheme, float]

    def lines(self) -> list:
        schemes = list(self.waste)
        out = ["event  t/unit   N  " + "  ".join(f"{s.value:>6}" for s in schemes)]
        for i, (t, n) in enumerate(zip(self.event_times, self.sizes), start=1):
            cells = "  ".join(f"{self.waste[s][i - 1]:>6d}" for s in schemes)
            out.append(f"{i:>5}  {t / self.unit:>6.2f}  {n:>2}  {cells}")
        totals = "  ".join(f"{sum(self.waste[s]):>6d}" for s in schemes)
        out.append(f"{'total':>5}  {'':>6}  {'':>2}  {totals}")
        for s in schemes:
            out.append(f"{s.value} finished at t/unit={self.computation_time[s] / self.unit:.2f}")
        return out


def run_transition_demo(config: ExperimentConfig) -> TransitionReport:
    """
    Equal-speed workers 1..N_max lose the highest ids at each demo event
    time. A scheme that finishes before an event does no re-allocation for
    it, so its remaining entries are 0. Only `config.schemes` are run.
    """
    demo = config.demo
    work = SubtaskWork.from_dims(config.dims)
    unit = work.set_subtask_ops(demo.K, demo.N_max) / config.base_rate
    times = tuple(t * unit for t in demo.event_times)
    ids = tuple(range(1, demo.N_max + 1))
    timeline = ElasticTimeline.preemptions(
        ids, [(t, demo.leave_per_event) for t in times], notice_delay=config.notice_delay
    )
    sizes = tuple(demo.N_max - demo.leave_per_event * i for i in range(1, len(times) + 1))
    profiles = sample_profiles(demo.N_max, config.base_rate, 0.0, 1.0, config.seed)

    setups = {
        Scheme.CEC: (SchemeParams(Scheme.CEC, demo.K, demo.S, demo.N_max, demo.N_min), None),
        Scheme.MLCEC: (SchemeParams(Scheme.MLCEC, demo.K, demo.S, demo.N_max, demo.N_min), demo.mlcec_d),
        Scheme.BICEC: (SchemeParams(Scheme.BICEC, demo.bicec_K, demo.bicec_S, demo.N_max, demo.N_min), None),
    }
    waste, finished = {}, {}
    for scheme in config.schemes:
        params, d = setups[scheme]
        metrics = simulate(params, profiles, work, worker_ids=ids, timeline=timeline, d=d)
        per_event = tuple(metrics.waste_per_event) + (0,) * (len(times) - len(metrics.waste_per_event))
        waste[scheme] = per_event
        finished[scheme] = metrics.computation_time
        logger.info("transition demo %s: waste per event %s", scheme.value, per_event)
    return TransitionReport(unit, times, sizes, waste, finished)


# ----------------------------
#  Functional verification
# ----------------------------

@dataclass(frozen=True)
class VerificationRow:
    scheme: Scheme
    field: str
    max_abs_error: float
    relative_error: float


def run_verification(config: ExperimentConfig, schemes: Optional[Sequence[Scheme]] = None) -> list:
    """
    One straggler trial per scheme at N = N_max, then the matching functional
    decode on random integer matrices. BICEC runs over the prime field with
    its own (K, S) so the Vandermonde system stays exact.
    """
    vcfg = config.verify
    rng = np.random.default_rng(config.seed)
    A = rng.integers(-50, 51, size=(vcfg.dims.u, vcfg.dims.w))
    B = rng.integers(-50, 51, size=(vcfg.dims.w, vcfg.dims.v))
    work = SubtaskWork.from_dims(vcfg.dims)
    prime = Field.prime_field(config.arithmetic.prime)

    rows = []
    for scheme in schemes or config.schemes:
        base = config.params[scheme]
        if scheme == Scheme.BICEC:
            params = SchemeParams(Scheme.BICEC, vcfg.bicec_K, vcfg.bicec_S, base.N_max, base.N_min)
            fld = prime
        else:
            params, fld = base, config.arithmetic
        profiles = sample_profiles(params.N_max, config.base_rate, config.straggler_prob, config.slowdown, config.seed)
        d = config.mlcec_d if scheme == Scheme.MLCEC and config.mlcec_d and len(config.mlcec_d) == params.N_max else None
        metrics = simulate(params, profiles, work, d=d)
        result = run_functional(
            A, B, params, metrics.completion,
            field=fld, points=config.eval_points, rcond_threshold=settings.CODEC_RCOND_THRESHOLD,
        )
        logger.info("verify %s over %s: max_abs=%.3e", scheme.value, fld, result.max_abs_error)
        rows.append(VerificationRow(scheme, str(fld), result.max_abs_error, result.relative_error))
    return rows
