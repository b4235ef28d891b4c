"""Deterministic worker-pool execution.

Workers receive (index, payload) tasks and a shared context installed by a
pool initializer; results are gathered and re-ordered by index so that the
reduction is independent of completion order.  Thread count resolution:
explicit argument, then the THERMALSIM_THREADS environment variable, then
the CPU count.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

THREADS_ENV = "THERMALSIM_THREADS"

_CONTEXT = None


def resolve_threads(requested: int | None = None) -> int:
    if requested is not None and requested > 0:
        return requested
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            value = int(env)
            if value > 0:
                return value
        except ValueError:
            pass
    return os.cpu_count() or 1


def _init_worker(context) -> None:
    global _CONTEXT
    _CONTEXT = context


def worker_context():
    return _CONTEXT


def run_indexed(worker, tasks, threads: int, context=None) -> list:
    """Run ``worker(task)`` over tasks, results in task order.

    ``worker`` must be a module-level function.  With one thread (or few
    tasks) everything runs inline, which keeps tracebacks simple.
    """
    tasks = list(tasks)
    if threads <= 1 or len(tasks) <= 1:
        _init_worker(context)
        try:
            return [worker(t) for t in tasks]
        finally:
            _init_worker(None)
    with ProcessPoolExecutor(max_workers=min(threads, len(tasks)),
                             initializer=_init_worker, initargs=(context,)) as pool:
        return list(pool.map(worker, tasks, chunksize=max(1, len(tasks) // (4 * threads))))
