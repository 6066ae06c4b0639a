"""Deterministic chunked evaluation with compensated accumulation.

Grids are processed in fixed-size chunks whose partial sums are reduced in
chunk order with Kahan compensation, so certificate values are identical
run-to-run and independent of the worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

DEFAULT_CHUNK = 1024
WORKERS_ENV_VAR = "CERTIQUAD_WORKERS"


class KahanAccumulator:
    """Compensated running sum of floats."""

    def __init__(self):
        self.total = 0.0
        self._c = 0.0

    def add(self, value: float) -> None:
        y = float(value) - self._c
        t = self.total + y
        self._c = (t - self.total) - y
        self.total = t


def kahan_sum(values) -> float:
    acc = KahanAccumulator()
    for v in values:
        acc.add(v)
    return acc.total


def chunk_ranges(n: int, chunk: int = DEFAULT_CHUNK):
    for start in range(0, n, chunk):
        yield start, min(start + chunk, n)


def resolve_workers(requested=None) -> int:
    """Worker count: explicit request, else the environment default, else 1."""
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get(WORKERS_ENV_VAR)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def run_ordered(worker, args_list, workers: int):
    """Apply ``worker`` to each args tuple, preserving input order.

    ``worker`` must be picklable (module-level) when workers > 1.
    """
    if workers <= 1 or len(args_list) <= 1:
        return [worker(a) for a in args_list]
    with ProcessPoolExecutor(max_workers=min(workers, len(args_list))) as pool:
        return list(pool.map(worker, args_list))
