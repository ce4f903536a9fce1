"""Worker pool for embarrassingly parallel offline tasks.

Tasks are registered pure functions over serializable inputs plus an
immutable shared context.  Work is split into static contiguous chunks, one
per worker thread, so results are returned in input order and are identical
for every pool size.  The shared context is handed to each worker exactly
once per map call (instrumented via `shared_transfer_count`).
"""

from __future__ import annotations

import math
import os
import threading

__all__ = ['WorkerPool', 'PoolTaskError', 'default_pool_size']

ENV_VAR = 'MORKIT_WORKERS'


class PoolTaskError(Exception):
    """One or more task invocations failed; `failures` maps index to exception."""

    def __init__(self, failures):
        self.failures = failures
        first_idx = min(failures)
        super().__init__(f'{len(failures)} task(s) failed, first at input '
                         f'{first_idx}: {failures[first_idx]!r}')


def default_pool_size(cli_value=None):
    """Pool size resolution: CLI flag wins over the environment variable."""
    if cli_value is not None:
        return int(cli_value)
    env = os.environ.get(ENV_VAR)
    return int(env) if env else 1


class WorkerPool:

    def __init__(self, size=None):
        self.size = max(1, default_pool_size(size))
        self._tasks = {}
        self.shared_transfer_count = 0

    def register(self, name, fn):
        self._tasks[name] = fn
        return fn

    def map(self, task, inputs, shared=None):
        """Apply the registered task to every input; results in input order."""
        fn = self._tasks[task] if isinstance(task, str) else task
        inputs = list(inputs)
        if not inputs:
            return []
        chunk = math.ceil(len(inputs) / self.size)
        results = [None] * len(inputs)
        failures = {}
        lock = threading.Lock()

        def worker(start, stop):
            with lock:
                self.shared_transfer_count += 1  # context handed over once
            context = shared
            for i in range(start, stop):
                try:
                    results[i] = fn(inputs[i], context)
                except Exception as e:  # noqa: BLE001 - surfaced per item
                    with lock:
                        failures[i] = e

        threads = []
        for w in range(self.size):
            start, stop = w * chunk, min((w + 1) * chunk, len(inputs))
            if start >= stop:
                continue
            t = threading.Thread(target=worker, args=(start, stop))
            t.start()
            threads.append(t)
        for t in threads:
            t.join()
        if failures:
            raise PoolTaskError(failures)
        return results
