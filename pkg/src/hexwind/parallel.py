"""Deterministic parallel trial execution.

Work is a function applied to trial indices; every trial owns the Philox
stream keyed by (master seed, trial index), so results depend only on the
index set, never on scheduling.  Results are merged in trial order, which
makes outputs byte-identical across thread counts.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

_EXECUTOR_THREADS = None
_EXECUTOR = None


def default_threads() -> int:
    env = os.environ.get("HEXWIND_THREADS", "")
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def _get_executor(threads: int):
    global _EXECUTOR, _EXECUTOR_THREADS
    if _EXECUTOR is not None and _EXECUTOR_THREADS != threads:
        _EXECUTOR.shutdown()
        _EXECUTOR = None
    if _EXECUTOR is None:
        _EXECUTOR = ProcessPoolExecutor(max_workers=threads)
        _EXECUTOR_THREADS = threads
    return _EXECUTOR


def map_trials(fn, trials, threads: int | None = None, chunksize: int | None = None):
    """Apply ``fn`` to each element of ``trials``, order-preserving.

    With one thread everything runs inline (handy under profilers and in
    tests); otherwise a process pool is used, forked from the parent so
    cached domains are shared copy-on-write.
    """
    trials = list(trials)
    threads = threads or default_threads()
    if threads == 1 or len(trials) <= 1:
        return [fn(t) for t in trials]
    if chunksize is None:
        chunksize = max(1, len(trials) // (8 * threads))
    ex = _get_executor(threads)
    return list(ex.map(fn, trials, chunksize=chunksize))


def run_until_accepted(
    trial_fn,
    n_accepted: int,
    seed: int,
    threads: int | None = None,
    block: int = 4096,
    max_trials: int = 50_000_000,
):
    """Run trials 0, 1, 2, ... until ``n_accepted`` accept, deterministically.

    ``trial_fn(trial_index)`` returns (accepted, payload).  Trials are
    evaluated in fixed-size blocks; the accepted payloads are returned in
    trial order, truncated to exactly ``n_accepted``.  The result does not
    depend on the thread count.
    """
    out = []
    start = 0
    while len(out) < n_accepted:
        if start >= max_trials:
            raise RuntimeError(
                f"exceeded {max_trials} trials with {len(out)}/{n_accepted} accepted"
            )
        idxs = range(start, start + block)
        results = map_trials(trial_fn, idxs, threads=threads)
        for ok, payload in results:
            if ok:
                out.append(payload)
        start += block
    return out[:n_accepted], start
