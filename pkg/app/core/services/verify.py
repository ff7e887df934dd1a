# core/services/verify.py
"""
End-to-end functional check on real matrices: encode A, run exactly the
subtasks a completion record marks done, decode, reassemble A @ B and compare
against the direct product.
"""
import logging
import time
from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

import numpy as np

from core.exceptions import InvalidParameterError, UnrecoverableTrialError
from core.services.allocation import Scheme, SchemeParams
from core.services.codec import (
    RCOND_WARN_THRESHOLD,
    EncodedBlock,
    EvalPoints,
    Field,
    MatrixDims,
    MdsCode,
    decode,
    encode,
    field_matmul,
    from_field,
    partition,
    to_field,
    unpartition,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CompletionRecord:
    """
    Completed encoded subtasks at computation time.
    CEC/MLCEC: `sets` maps set m (1..n_sets) to the worker ids (codeword
    positions) whose chunk m finished. BICEC: `indices` lists finished global
    codeword indices.
    """
    scheme: Scheme
    K: int
    sets: Mapping[int, tuple] = field(default_factory=dict)
    indices: tuple = ()
    n_sets: int = 0

    def deficient_set(self) -> Optional[int]:
        for m in range(1, self.n_sets + 1):
            if len(set(self.sets.get(m, ()))) < self.K:
                return m
        return None

    def validate(self) -> "CompletionRecord":
        scheme = Scheme(self.scheme)
        if scheme.is_set_based:
            if self.n_sets < 1:
                raise InvalidParameterError("set-based completion record needs n_sets >= 1")
            m = self.deficient_set()
            if m is not None:
                raise UnrecoverableTrialError(
                    f"set {m} has {len(set(self.sets.get(m, ())))} completed subtasks, needs {self.K}",
                    scheme=scheme.value,
                    set_index=m,
                )
        elif len(set(self.indices)) < self.K:
            raise UnrecoverableTrialError(
                f"{len(set(self.indices))} encoded subtasks completed, needs {self.K}",
                scheme=scheme.value,
            )
        return self


@dataclass(frozen=True)
class FunctionalResult:
    product: np.ndarray
    max_abs_error: float
    relative_error: float
    decode_ops: int


def random_completion(
    params: SchemeParams,
    rng: np.random.Generator,
    n_sets: Optional[int] = None,
) -> CompletionRecord:
    """A uniformly random recoverable completion record (K results per set, or K_bicec overall)."""
    if params.scheme.is_set_based:
        n_sets = n_sets or params.N_max
        sets = {
            m: tuple(int(x) for x in rng.choice(np.arange(1, params.N_max + 1), params.K, replace=False))
            for m in range(1, n_sets + 1)
        }
        return CompletionRecord(params.scheme, params.K, sets=sets, n_sets=n_sets)
    picked = rng.choice(np.arange(1, params.codeword_length + 1), params.K, replace=False)
    return CompletionRecord(params.scheme, params.K, indices=tuple(int(x) for x in picked))


def _unique(seq):
    return tuple(dict.fromkeys(seq))


def run_functional(
    A,
    B,
    params: SchemeParams,
    completion: CompletionRecord,
    *,
    field: Optional[Field] = None,
    points: Union[EvalPoints, str] = EvalPoints.AUTO,
    rcond_threshold: float = RCOND_WARN_THRESHOLD,
) -> FunctionalResult:
    field = field or Field.real()
    A, B = np.asarray(A), np.asarray(B)
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[0]:
        raise InvalidParameterError(f"inconsistent dims {A.shape} x {B.shape}")
    completion.validate()

    if field.is_prime:
        A_in, B_in = to_field(A, field), to_field(B, field)
    else:
        A_in, B_in = A.astype(float), B.astype(float)

    code = MdsCode.build(params.K, params.codeword_length, field, points)
    outer = partition(A_in, params.K)
    encoded = {blk.index: blk.data for blk in encode(outer, code)}
    decode_ops = 0

    if params.scheme.is_set_based:
        n_sets = completion.n_sets
        chunks = {}
        pieces = [[None] * n_sets for _ in range(params.K)]
        for m in range(1, n_sets + 1):
            ids = _unique(completion.sets[m])[: params.K]
            results = []
            for wid in ids:
                if wid not in chunks:
                    chunks[wid] = partition(encoded[wid], n_sets)
                results.append(EncodedBlock(wid, field_matmul(field, chunks[wid].parts[m - 1], B_in)))
            decoded, cost = decode(results, code, ids, rcond_threshold=rcond_threshold)
            decode_ops += cost.reconstruction_ops
            for i, block in enumerate(decoded):
                pieces[i][m - 1] = block
        chunk_pad = next(iter(chunks.values())).pad_rows
        product = unpartition([unpartition(p, chunk_pad) for p in pieces], outer.pad_rows)
    else:
        ids = _unique(completion.indices)[: params.K]
        results = [EncodedBlock(i, field_matmul(field, encoded[i], B_in)) for i in ids]
        decoded, cost = decode(results, code, ids, rcond_threshold=rcond_threshold)
        decode_ops = cost.reconstruction_ops
        product = unpartition(decoded, outer.pad_rows)

    if field.is_prime:
        product = from_field(product, field)
        direct = A.astype(np.int64) @ B.astype(np.int64)
    else:
        direct = A.astype(float) @ B.astype(float)

    max_abs = float(np.max(np.abs(product - direct))) if direct.size else 0.0
    scale = float(np.max(np.abs(direct))) if direct.size else 0.0
    rel = max_abs / scale if scale > 0 else max_abs
    logger.debug("functional %s over %s: max_abs=%.3e rel=%.3e", params.scheme.value, field, max_abs, rel)
    return FunctionalResult(product=product, max_abs_error=max_abs, relative_error=rel, decode_ops=decode_ops)


def measure_rate(dims: MatrixDims, repetitions: int = 5, rng_seed: int = 0) -> float:
    """Median multiply-add throughput (ops/sec) of a dense u x w by w x v product."""
    if repetitions < 1:
        raise InvalidParameterError("repetitions must be >= 1")
    rng = np.random.default_rng(rng_seed)
    A = rng.standard_normal((dims.u, dims.w))
    B = rng.standard_normal((dims.w, dims.v))
    A @ B  # warm-up

    samples = []
    for _ in range(repetitions):
        t0 = time.perf_counter()
        A @ B
        elapsed = max(time.perf_counter() - t0, 1e-9)
        samples.append(dims.product_ops / elapsed)
    rate = float(np.median(samples))
    logger.info("measured %.3e ops/sec on %s (%d repetitions)", rate, dims.as_tuple(), repetitions)
    return rate
