# core/services/simkernel.py
"""
Event-driven simulation of one trial.

Each worker runs its selected subtasks back to back at a constant effective
rate. Completions live in a heap ordered by (time, worker id); elastic events
are applied between completions, and a completion at exactly an event's
timestamp is counted before the event.
"""
import enum
import heapq
import itertools
import logging
import math
from dataclasses import dataclass, field, replace
from operator import attrgetter
from typing import Callable, Iterable, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from core.exceptions import InvalidParameterError, UnrecoverableTrialError
from core.services.allocation import (
    AllocationMatrix,
    DSequence,
    Scheme,
    SchemeParams,
    allocate,
    bicec_allocate,
    transition_waste,
)
from core.services.codec import MatrixDims
from core.services.verify import CompletionRecord

logger = logging.getLogger(__name__)


# ----------------------------
#  Domain types
# ----------------------------

@dataclass(frozen=True)
class WorkerProfile:
    id: int
    base_rate: float
    is_straggler: bool = False
    slowdown: float = 1.0

    def __post_init__(self):
        if self.base_rate <= 0:
            raise InvalidParameterError(f"worker {self.id}: base_rate must be positive")
        if self.slowdown < 1:
            raise InvalidParameterError(f"worker {self.id}: slowdown must be >= 1")

    @property
    def effective_rate(self) -> float:
        return self.base_rate / (self.slowdown if self.is_straggler else 1.0)


def sample_profiles(
    N_max: int,
    base_rate: float,
    straggler_prob: float,
    slowdown: float,
    rng_seed: Union[int, Sequence[int]],
) -> Tuple[WorkerProfile, ...]:
    """
    Flag each of workers 1..N_max as a straggler independently. `rng_seed`
    may be a tuple such as (master_seed, N, trial) so that every scheme sees
    the same draw for the same cell.
    """
    if not 0.0 <= straggler_prob <= 1.0:
        raise InvalidParameterError(f"straggler_prob must lie in [0, 1], got {straggler_prob}")
    if slowdown < 1:
        raise InvalidParameterError(f"slowdown must be >= 1, got {slowdown}")
    if N_max < 1:
        raise InvalidParameterError("N_max must be >= 1")

    rng = np.random.default_rng(rng_seed)
    flags = rng.random(N_max) < straggler_prob
    return tuple(
        WorkerProfile(id=n + 1, base_rate=base_rate, is_straggler=bool(flags[n]), slowdown=slowdown)
        for n in range(N_max)
    )


class EventKind(str, enum.Enum):
    JOIN = "join"
    LEAVE = "leave"


@dataclass(frozen=True)
class ElasticEvent:
    time: float
    worker_id: int
    kind: EventKind

    def __post_init__(self):
        object.__setattr__(self, "kind", EventKind(self.kind))


@dataclass(frozen=True)
class ElasticTimeline:
    """
    Time-ordered joins and leaves. `notice_delay` is the lead time during
    which a leaving worker may still finish its in-flight subtask.
    """
    events: tuple = ()
    notice_delay: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        if self.notice_delay < 0:
            raise InvalidParameterError("notice_delay must be >= 0")
        times = [e.time for e in self.events]
        if any(t < 0 for t in times):
            raise InvalidParameterError("event times must be nonnegative")
        if any(a > b for a, b in zip(times, times[1:])):
            raise InvalidParameterError("event times must be nondecreasing")

    @classmethod
    def preemptions(
        cls,
        initial_ids: Iterable[int],
        steps: Sequence[Tuple[float, int]],
        notice_delay: float = 0.0,
    ) -> "ElasticTimeline":
        """(time, count) steps; the highest active ids leave first."""
        active = sorted(initial_ids)
        events = []
        for time, count in steps:
            for wid in sorted(active, reverse=True)[:count]:
                events.append(ElasticEvent(time, wid, EventKind.LEAVE))
                active.remove(wid)
        return cls(tuple(events), notice_delay)

    def groups(self) -> list:
        return [(t, tuple(evs)) for t, evs in itertools.groupby(self.events, key=attrgetter("time"))]

    def validate(self, initial_ids: Iterable[int], N_min: int, N_max: int) -> "ElasticTimeline":
        active = set(initial_ids)
        if not N_min <= len(active) <= N_max:
            raise InvalidParameterError(f"{len(active)} initial workers outside [{N_min}, {N_max}]")
        for time, events in self.groups():
            for e in events:
                if not 1 <= e.worker_id <= N_max:
                    raise InvalidParameterError(f"t={time}: worker id {e.worker_id} outside [1, {N_max}]")
                if e.kind == EventKind.LEAVE:
                    if e.worker_id not in active:
                        raise InvalidParameterError(f"t={time}: leave of inactive worker {e.worker_id}")
                    active.remove(e.worker_id)
                else:
                    if e.worker_id in active:
                        raise InvalidParameterError(f"t={time}: join of active worker {e.worker_id}")
                    active.add(e.worker_id)
            if not N_min <= len(active) <= N_max:
                raise InvalidParameterError(f"t={time}: {len(active)} active workers outside [{N_min}, {N_max}]")
        return self

    def ever_active(self, initial_ids: Iterable[int]) -> set:
        return set(initial_ids) | {e.worker_id for e in self.events if e.kind == EventKind.JOIN}


@dataclass(frozen=True)
class SubtaskWork:
    total_ops: float  # u * w * v multiply-adds for the whole product

    def __post_init__(self):
        if self.total_ops <= 0:
            raise InvalidParameterError("total_ops must be positive")

    @classmethod
    def from_dims(cls, dims: MatrixDims) -> "SubtaskWork":
        return cls(float(dims.product_ops))

    def set_subtask_ops(self, K: int, N: int) -> float:
        return self.total_ops / (K * N)

    def bicec_subtask_ops(self, K_bicec: int) -> float:
        return self.total_ops / K_bicec


@dataclass(frozen=True)
class TrialMetrics:
    computation_time: float
    decoding_time: float = 0.0
    transition_waste_total: int = 0
    completed_counts: Mapping[int, int] = field(default_factory=dict)
    waste_per_event: tuple = ()
    completion: Optional[CompletionRecord] = None

    def __post_init__(self):
        if self.computation_time < 0 or self.decoding_time < 0:
            raise InvalidParameterError("times must be nonnegative")

    @property
    def finishing_time(self) -> float:
        return self.computation_time + self.decoding_time

    def with_decoding(self, decoding_time: float) -> "TrialMetrics":
        return replace(self, decoding_time=decoding_time)


# ----------------------------
#  CEC / MLCEC
# ----------------------------

class _SetBasedRun:
    def __init__(self, params, alloc, profiles, work, timeline, reallocate):
        self.params = params
        self.K = params.K
        self.alloc = alloc
        self.rates = {p.id: p.effective_rate for p in profiles}
        self.work = work
        self.timeline = timeline
        self.groups = timeline.groups()
        self.reallocate = reallocate

        self.heap = []
        self.epoch = 0
        self.next_group = 0
        self.streams = {}
        self.next_j = {}
        self.grace = {}  # leaving worker -> (finish time, set) of its in-flight subtask
        self.done_pairs = set()
        self.set_counts = {}
        self.recovered = 0
        self.row_done = {}
        self.total_done = {wid: 0 for wid in timeline.ever_active(alloc.worker_ids)}
        self.wastes = []

    def _joins_pending(self) -> bool:
        return any(
            e.kind == EventKind.JOIN for _, events in self.groups[self.next_group:] for e in events
        )

    def _starved_set(self) -> Optional[int]:
        capable = {m: self.set_counts.get(m, 0) for m in range(1, self.alloc.N + 1)}
        for wid, row in zip(self.alloc.worker_ids, self.alloc.rows):
            for m in row:
                if (wid, m) not in self.done_pairs:
                    capable[m] += 1
        for _, m in self.grace.values():
            capable[m] += 1
        return next((m for m, c in capable.items() if c < self.K), None)

    def _start_epoch(self, t: float):
        self.epoch += 1
        m = self._starved_set()
        if m is not None and not self._joins_pending():
            raise UnrecoverableTrialError(
                f"set {m} can never reach K={self.K} completions with workers {self.alloc.worker_ids}",
                scheme=self.params.scheme.value,
                set_index=m,
            )
        ops = self.work.set_subtask_ops(self.K, self.alloc.N)
        for wid, row in zip(self.alloc.worker_ids, self.alloc.rows):
            todo = tuple(m for m in row if (wid, m) not in self.done_pairs)
            self.row_done[wid] = set(row) - set(todo)
            self.streams[wid] = (t, ops / self.rates[wid], todo)
            self._push(wid, 0)
        for wid, (finish, _) in self.grace.items():
            heapq.heappush(self.heap, (finish, wid, -1, self.epoch))

    def _push(self, wid: int, j: int):
        self.next_j[wid] = j
        start, duration, todo = self.streams[wid]
        if j < len(todo):
            heapq.heappush(self.heap, (start + (j + 1) * duration, wid, j, self.epoch))

    def _complete(self, wid: int, j: int):
        if j < 0:
            _, m = self.grace.pop(wid)
        else:
            m = self.streams[wid][2][j]
            self.row_done[wid].add(m)
        self.done_pairs.add((wid, m))
        self.total_done[wid] += 1
        self.set_counts[m] = self.set_counts.get(m, 0) + 1
        if self.set_counts[m] == self.K:
            self.recovered += 1
        if j >= 0:
            self._push(wid, j + 1)

    def _in_flight(self, wid: int, deadline: float):
        start, duration, todo = self.streams[wid]
        j = self.next_j[wid]
        if j < len(todo) and start + (j + 1) * duration <= deadline:
            self.grace[wid] = (start + (j + 1) * duration, todo[j])

    def _apply(self, t: float, events):
        before = self.alloc
        active = set(before.worker_ids)
        for e in events:
            if e.kind == EventKind.LEAVE:
                active.discard(e.worker_id)
                self._in_flight(e.worker_id, t + self.timeline.notice_delay)
            else:
                active.add(e.worker_id)
                self.grace.pop(e.worker_id, None)
        ids = tuple(sorted(active))
        if len(ids) != before.N:
            self.grace.clear()
            if self.done_pairs:
                logger.info(
                    "t=%.4g: N %d -> %d re-subdivides the sets; %d completed subtasks are discarded",
                    t, before.N, len(ids), len(self.done_pairs),
                )
            self.done_pairs.clear()
            self.set_counts.clear()
            self.recovered = 0

        after = self.reallocate(ids)
        waste = transition_waste(before, self.row_done, after)
        self.wastes.append(waste)
        logger.debug("t=%.4g: %s re-allocated to %s, waste=%d", t, before.worker_ids, ids, waste)
        self.alloc = after
        self.next_group += 1
        self._start_epoch(t)

    def _drain(self, time: float):
        while self.heap and self.heap[0][0] == time:
            _, wid, j, epoch = heapq.heappop(self.heap)
            if epoch == self.epoch:
                self._complete(wid, j)

    def run(self) -> TrialMetrics:
        self._start_epoch(0.0)
        while True:
            next_event = self.groups[self.next_group][0] if self.next_group < len(self.groups) else math.inf
            if self.heap and self.heap[0][0] <= next_event:
                time, wid, j, epoch = heapq.heappop(self.heap)
                if epoch != self.epoch:
                    continue
                self._complete(wid, j)
                if self.recovered == self.alloc.N:
                    self._drain(time)
                    return self._metrics(time)
            elif self.next_group < len(self.groups):
                self._apply(*self.groups[self.next_group])
            else:
                m = next(m for m in range(1, self.alloc.N + 1) if self.set_counts.get(m, 0) < self.K)
                raise UnrecoverableTrialError(
                    f"set {m} finished with {self.set_counts.get(m, 0)} of K={self.K} completions",
                    scheme=self.params.scheme.value,
                    set_index=m,
                )

    def _metrics(self, time: float) -> TrialMetrics:
        sets = {m: [] for m in range(1, self.alloc.N + 1)}
        for wid, m in sorted(self.done_pairs):
            sets[m].append(wid)
        completion = CompletionRecord(
            scheme=self.params.scheme,
            K=self.K,
            sets={m: tuple(ids) for m, ids in sets.items()},
            n_sets=self.alloc.N,
        )
        return TrialMetrics(
            computation_time=time,
            transition_waste_total=sum(self.wastes),
            completed_counts=dict(sorted(self.total_done.items())),
            waste_per_event=tuple(self.wastes),
            completion=completion,
        )


def simulate_cec_mlcec(
    params: SchemeParams,
    alloc: AllocationMatrix,
    profiles: Sequence[WorkerProfile],
    work: SubtaskWork,
    timeline: Optional[ElasticTimeline] = None,
    *,
    reallocate: Optional[Callable[[tuple], AllocationMatrix]] = None,
) -> TrialMetrics:
    """
    Set m is recovered once K of the workers selecting it finish their chunk
    m; computation ends when the last set is recovered. On every elastic
    event the active workers are re-allocated with `reallocate` (default:
    the scheme's own allocation at the new N). Completed subtasks carry over
    only while N is unchanged, since a new N subdivides the encoded blocks
    differently; under the same condition a leaving worker's in-flight
    subtask still counts if it ends within the timeline's notice delay.
    """
    if not params.scheme.is_set_based:
        raise InvalidParameterError(f"simulate_cec_mlcec cannot run {params.scheme.value}")
    timeline = timeline or ElasticTimeline()
    timeline.validate(alloc.worker_ids, params.N_min, params.N_max)
    _check_profiles(profiles, timeline.ever_active(alloc.worker_ids))
    reallocate = reallocate or (lambda ids: allocate(params, ids))
    return _SetBasedRun(params, alloc, profiles, work, timeline, reallocate).run()


# ----------------------------
#  BICEC
# ----------------------------

class _BicecRun:
    def __init__(self, params, alloc, profiles, work, timeline):
        self.params = params
        self.K = params.K
        self.S = params.S
        self.rates = {p.id: p.effective_rate for p in profiles}
        self.duration_ops = work.bicec_subtask_ops(params.K)
        self.timeline = timeline
        self.groups = timeline.groups()
        self.active = list(alloc.worker_ids)

        self.heap = []
        self.generation = {}
        self.streams = {}
        self.leaving = {}
        self.progress = {wid: 0 for wid in timeline.ever_active(alloc.worker_ids)}
        self.indices = []
        self.wastes = []

    def _start(self, wid: int, t: float):
        self.generation[wid] = self.generation.get(wid, 0) + 1
        self.streams[wid] = (t, self.duration_ops / self.rates[wid], self.progress[wid])
        self._push(wid)

    def _push(self, wid: int):
        start, duration, base = self.streams[wid]
        done = self.progress[wid]
        if done < self.S:
            heapq.heappush(self.heap, (start + (done - base + 1) * duration, wid, self.generation[wid]))

    def _complete(self, time: float, wid: int, generation: int) -> bool:
        if generation != self.generation[wid]:
            return False
        deadline = self.leaving.pop(wid, None)
        if deadline is not None and time > deadline:
            return False
        self.progress[wid] += 1
        self.indices.append((wid - 1) * self.S + self.progress[wid])
        if deadline is None:
            self._push(wid)
        return True

    def _apply(self, t: float, events):
        before = bicec_allocate(self.active, self.S, self.params.N_max)
        for e in events:
            if e.kind == EventKind.LEAVE:
                self.active.remove(e.worker_id)
                self.leaving[e.worker_id] = t + self.timeline.notice_delay
            else:
                self.active.append(e.worker_id)
                self.leaving.pop(e.worker_id, None)
                self._start(e.worker_id, t)
        after = bicec_allocate(self.active, self.S, self.params.N_max)
        self.wastes.append(transition_waste(before, self.progress, after))
        logger.debug("t=%.4g: active workers now %s", t, sorted(self.active))

    def run(self) -> TrialMetrics:
        for wid in self.active:
            self._start(wid, 0.0)
        g = 0
        while True:
            next_event = self.groups[g][0] if g < len(self.groups) else math.inf
            if self.heap and self.heap[0][0] <= next_event:
                time, wid, generation = heapq.heappop(self.heap)
                if self._complete(time, wid, generation) and len(self.indices) >= self.K:
                    while self.heap and self.heap[0][0] == time:
                        self._complete(*heapq.heappop(self.heap))
                    return self._metrics(time)
            elif g < len(self.groups):
                self._apply(*self.groups[g])
                g += 1
            else:
                raise UnrecoverableTrialError(
                    f"only {len(self.indices)} of K={self.K} encoded subtasks can complete",
                    scheme=Scheme.BICEC.value,
                )

    def _metrics(self, time: float) -> TrialMetrics:
        completion = CompletionRecord(scheme=Scheme.BICEC, K=self.K, indices=tuple(self.indices))
        return TrialMetrics(
            computation_time=time,
            transition_waste_total=sum(self.wastes),
            completed_counts=dict(sorted(self.progress.items())),
            waste_per_event=tuple(self.wastes),
            completion=completion,
        )


def simulate_bicec(
    params: SchemeParams,
    alloc: AllocationMatrix,
    profiles: Sequence[WorkerProfile],
    work: SubtaskWork,
    timeline: Optional[ElasticTimeline] = None,
) -> TrialMetrics:
    """
    Computation ends at the K_bicec-th completion over all workers. A leaving
    worker stops (its in-flight subtask counts only if it ends within the
    notice delay); a (re)joining worker resumes at its first unfinished
    subtask from the event time.
    """
    if params.scheme != Scheme.BICEC:
        raise InvalidParameterError(f"simulate_bicec cannot run {params.scheme.value}")
    timeline = timeline or ElasticTimeline()
    timeline.validate(alloc.worker_ids, params.N_min, params.N_max)
    ever = timeline.ever_active(alloc.worker_ids)
    _check_profiles(profiles, ever)
    if params.S * len(ever) < params.K:
        raise UnrecoverableTrialError(
            f"{len(ever)} workers of S={params.S} cannot reach K={params.K}",
            scheme=Scheme.BICEC.value,
        )
    return _BicecRun(params, alloc, profiles, work, timeline).run()


# ----------------------------
#  Dispatch and decoding model
# ----------------------------

def _check_profiles(profiles: Sequence[WorkerProfile], ids: Iterable[int]):
    known = {p.id for p in profiles}
    missing = sorted(set(ids) - known)
    if missing:
        raise InvalidParameterError(f"no worker profile for ids {missing}")


def simulate(
    params: SchemeParams,
    profiles: Sequence[WorkerProfile],
    work: SubtaskWork,
    *,
    worker_ids: Optional[Sequence[int]] = None,
    timeline: Optional[ElasticTimeline] = None,
    d: Optional[Union[DSequence, Sequence[int]]] = None,
) -> TrialMetrics:
    """One trial of any scheme, starting from `worker_ids` (default 1..N_max)."""
    ids = tuple(worker_ids) if worker_ids is not None else tuple(range(1, params.N_max + 1))
    alloc = allocate(params, ids, d)
    if params.scheme == Scheme.BICEC:
        return simulate_bicec(params, alloc, profiles, work, timeline)

    def reallocate(active):
        # a custom d-sequence only fits the N it was written for
        fits = d is not None and len(d) == len(active)
        return allocate(params, active, d if fits else None)

    return simulate_cec_mlcec(params, alloc, profiles, work, timeline, reallocate=reallocate)


def solve_cost(k: int) -> float:
    return (2.0 / 3.0) * k**3


def decoding_time_model(
    scheme: Union[Scheme, str],
    K: int,
    dims: Union[MatrixDims, Tuple[int, int, int]],
    N: int,
    measured_rate: float,
) -> float:
    """
    Master-side decoding seconds: CEC/MLCEC rebuild K*u*v/N entries per set
    solve, BICEC rebuilds K*u*v; both add one dense K x K solve.
    """
    if measured_rate <= 0:
        raise InvalidParameterError("measured_rate must be positive")
    u, _, v = dims.as_tuple() if isinstance(dims, MatrixDims) else dims
    if Scheme(scheme).is_set_based:
        reconstruction = K * u * v / N
    else:
        reconstruction = K * u * v
    return (reconstruction + solve_cost(K)) / measured_rate
