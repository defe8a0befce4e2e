"""Thread-count control for grid-sampling loops.

The environment variable ``NETUQ_THREADS`` caps the number of worker
threads used when sweeping component solves over quadrature points.  The
default of 1 keeps everything serial; results are assembled into
preallocated arrays indexed by grid point, so the outcome is identical
for any thread count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

THREADS_ENV_VAR = "NETUQ_THREADS"


def thread_limit() -> int:
    """Worker-thread cap from the environment (minimum 1)."""
    raw = os.environ.get(THREADS_ENV_VAR, "")
    try:
        value = int(raw)
    except ValueError:
        return 1
    return max(1, value)


def run_indexed(task: Callable[[int], None], count: int):
    """Run ``task(i)`` for ``i in range(count)``, possibly on threads.

    Tasks must write their results into per-index slots; ordering of
    completion is irrelevant.
    """
    workers = min(thread_limit(), max(count, 1))
    if workers <= 1:
        for i in range(count):
            task(i)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(task, range(count)))
