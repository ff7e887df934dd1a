# core/services/allocation.py
"""
Per-worker subtask selection for CEC, MLCEC and BICEC, the MLCEC d-sequence
heuristic, and transition waste between two allocations.

Workers and sets are 1-indexed. For CEC/MLCEC a row lists set indices m in
[N] in processing order (increasing); for BICEC a row lists global codeword
indices in [S * N_max].
"""
import enum
import logging
import math
from dataclasses import dataclass
from typing import Collection, Mapping, Optional, Sequence, Union

from core.exceptions import InvalidParameterError

logger = logging.getLogger(__name__)


class Scheme(str, enum.Enum):
    CEC = "cec"
    MLCEC = "mlcec"
    BICEC = "bicec"

    @property
    def is_set_based(self) -> bool:
        return self in (Scheme.CEC, Scheme.MLCEC)


@dataclass(frozen=True)
class SchemeParams:
    scheme: Scheme
    K: int
    S: int
    N_max: int
    N_min: int

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if self.K < 1 or self.S < 1:
            raise InvalidParameterError(f"{self.scheme.value}: K and S must be >= 1")
        if not 1 <= self.N_min <= self.N_max:
            raise InvalidParameterError(f"{self.scheme.value}: need 1 <= N_min <= N_max")
        if self.scheme.is_set_based:
            if self.S > self.N_max:
                raise InvalidParameterError(f"{self.scheme.value}: S={self.S} exceeds N_max={self.N_max}")
            if self.K > self.S:
                raise InvalidParameterError(f"{self.scheme.value}: K={self.K} exceeds S={self.S}")
        elif self.K > self.S * self.N_min:
            raise InvalidParameterError(
                f"bicec: K={self.K} is unrecoverable with N_min={self.N_min} workers of S={self.S}"
            )

    @property
    def codeword_length(self) -> int:
        return self.S * self.N_max if self.scheme == Scheme.BICEC else self.N_max


@dataclass(frozen=True)
class DSequence:
    d: tuple

    def __len__(self):
        return len(self.d)

    def violations(self, N: int, S: int, K: int) -> list:
        problems = []
        if len(self.d) != N:
            problems.append(f"length {len(self.d)} != N={N}")
        if any(a > b for a, b in zip(self.d, self.d[1:])):
            problems.append("not nondecreasing")
        if sum(self.d) != S * N:
            problems.append(f"sum {sum(self.d)} != S*N={S * N}")
        if any(not K <= x <= N for x in self.d):
            problems.append(f"entries outside [{K}, {N}]")
        return problems

    def validate(self, N: int, S: int, K: int) -> "DSequence":
        problems = self.violations(N, S, K)
        if problems:
            raise InvalidParameterError(f"invalid d-sequence {self.d}: " + "; ".join(problems))
        return self


@dataclass(frozen=True)
class AllocationMatrix:
    scheme: Scheme
    worker_ids: tuple
    rows: tuple

    @property
    def N(self) -> int:
        return len(self.rows)

    def row_for(self, worker_id: int) -> tuple:
        return self.rows[self.worker_ids.index(worker_id)]

    def as_dict(self) -> dict:
        return dict(zip(self.worker_ids, self.rows))

    def row_sums(self) -> list:
        return [len(r) for r in self.rows]

    def column_counts(self) -> dict:
        counts = {}
        for row in self.rows:
            for m in row:
                counts[m] = counts.get(m, 0) + 1
        return counts

    def dump(self) -> str:
        return "\n".join(" ".join(str(m) for m in row) for row in self.rows) + "\n"


def _ids(N: int, worker_ids: Optional[Sequence[int]]) -> tuple:
    ids = tuple(worker_ids) if worker_ids is not None else tuple(range(1, N + 1))
    if len(ids) != N:
        raise InvalidParameterError(f"{len(ids)} worker ids given for N={N}")
    if len(set(ids)) != len(ids):
        raise InvalidParameterError(f"duplicate worker ids {ids}")
    return ids


def cec_allocate(N: int, S: int, worker_ids: Optional[Sequence[int]] = None) -> AllocationMatrix:
    if N < 1 or not 1 <= S <= N:
        raise InvalidParameterError(f"cyclic allocation needs 1 <= S <= N, got S={S} N={N}")
    rows = tuple(
        tuple(sorted(((n + i - 2) % N) + 1 for i in range(1, S + 1)))
        for n in range(1, N + 1)
    )
    return AllocationMatrix(Scheme.CEC, _ids(N, worker_ids), rows)


def default_d_sequence(N: int, S: int, K: int) -> DSequence:
    """
    Linear ramp from about K to 2S - K, clamped to [K, N], then repaired to
    sum S*N one unit at a time (raising from the right end, lowering from the
    left end) so the sequence stays nondecreasing.
    """
    if K < 1 or N < 1:
        raise InvalidParameterError("K and N must be >= 1")
    if K > S:
        raise InvalidParameterError(f"infeasible d-sequence bounds: N*K={N * K} > S*N={S * N}")
    if S > N:
        raise InvalidParameterError(f"infeasible d-sequence bounds: S={S} > N={N}")
    if N == 1:
        return DSequence((S,))

    alpha = S - K
    d = [
        min(N, max(K, math.floor(S - alpha + 2 * alpha * (m - 1) / (N - 1) + 0.5)))
        for m in range(1, N + 1)
    ]

    diff = S * N - sum(d)
    while diff > 0:
        m = max(i for i in range(N) if d[i] < N and (i == N - 1 or d[i] < d[i + 1]))
        d[m] += 1
        diff -= 1
    while diff < 0:
        m = min(i for i in range(N) if d[i] > K and (i == 0 or d[i] > d[i - 1]))
        d[m] -= 1
        diff += 1

    return DSequence(tuple(d)).validate(N, S, K)


def mlcec_allocate(
    N: int,
    d: Union[DSequence, Sequence[int]],
    worker_ids: Optional[Sequence[int]] = None,
) -> AllocationMatrix:
    """
    Sets are handed out from the last (l = N) to the first. Set l goes to the
    d_l consecutive workers (cyclically) starting at the lowest-index worker
    holding the fewest subtasks among sets l+1..N.
    """
    seq = tuple(d.d if isinstance(d, DSequence) else d)
    if len(seq) != N:
        raise InvalidParameterError(f"d-sequence length {len(seq)} != N={N}")
    if any(not 0 <= x <= N for x in seq):
        raise InvalidParameterError(f"d-sequence entries must lie in [0, {N}]: {seq}")
    if sum(seq) % N:
        raise InvalidParameterError(f"d-sequence sum {sum(seq)} is not a multiple of N={N}")
    S = sum(seq) // N

    counts = [0] * N
    selected = [[] for _ in range(N)]
    for l in range(N, 0, -1):
        start = counts.index(min(counts))
        for i in range(start, start + seq[l - 1]):
            selected[i % N].append(l)
            counts[i % N] += 1

    if any(c != S for c in counts):
        raise InvalidParameterError(f"d-sequence {seq} cannot give every worker S={S} subtasks")

    rows = tuple(tuple(sorted(s)) for s in selected)
    return AllocationMatrix(Scheme.MLCEC, _ids(N, worker_ids), rows)


def bicec_allocate(worker_ids: Sequence[int], S: int, N_max: Optional[int] = None) -> AllocationMatrix:
    ids = tuple(worker_ids)
    if S < 1:
        raise InvalidParameterError("S must be >= 1")
    if len(set(ids)) != len(ids):
        raise InvalidParameterError(f"duplicate worker ids {ids}")
    if any(n < 1 or (N_max is not None and n > N_max) for n in ids):
        raise InvalidParameterError(f"worker ids must lie in [1, {N_max}]: {ids}")
    rows = tuple(tuple(range((n - 1) * S + 1, n * S + 1)) for n in ids)
    return AllocationMatrix(Scheme.BICEC, ids, rows)


def allocate(
    params: SchemeParams,
    worker_ids: Sequence[int],
    d: Optional[Union[DSequence, Sequence[int]]] = None,
) -> AllocationMatrix:
    """Allocation of `params.scheme` for the given active workers, in id order."""
    ids = tuple(worker_ids)
    N = len(ids)
    if params.scheme == Scheme.CEC:
        return cec_allocate(N, params.S, ids)
    if params.scheme == Scheme.MLCEC:
        if d is None:
            d = default_d_sequence(N, params.S, params.K)
        return mlcec_allocate(N, d, ids)
    return bicec_allocate(ids, params.S, params.N_max)


def transition_waste(
    before: AllocationMatrix,
    completed: Mapping[int, Union[int, Collection[int]]],
    after: AllocationMatrix,
) -> int:
    """
    Subtasks that surviving workers abandon (assigned before, not after, not
    yet completed) plus subtasks they newly take on (assigned after, not
    before). `completed` maps worker id -> either the number of subtasks
    finished from the front of its `before` row, or the finished entries.
    """
    after_rows = after.as_dict()
    total = 0
    for wid, row in zip(before.worker_ids, before.rows):
        if wid not in after_rows:
            continue
        finished = completed.get(wid, 0)
        if isinstance(finished, int):
            if not 0 <= finished <= len(row):
                raise InvalidParameterError(f"worker {wid}: {finished} completed of {len(row)} assigned")
            done = set(row[:finished])
        else:
            done = set(finished)
            if not done <= set(row):
                raise InvalidParameterError(f"worker {wid}: completed {sorted(done - set(row))} never assigned")
        old, new = set(row), set(after_rows[wid])
        total += len((old - new) - done) + len(new - old)
    return total
