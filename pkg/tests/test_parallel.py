import numpy as np
import pytest

from morkit.parallel import (ENV_VAR, PoolTaskError, WorkerPool,
                             default_pool_size)


def square(x, shared):
    return x * x


def scaled(x, shared):
    return x * shared['factor']


class TestDefaultPoolSize:

    def test_cli_value_wins(self, monkeypatch):
        monkeypatch.setenv(ENV_VAR, '4')
        assert default_pool_size(2) == 2

    def test_env_var_fallback(self, monkeypatch):
        monkeypatch.setenv(ENV_VAR, '6')
        assert default_pool_size() == 6

    def test_default_is_one(self, monkeypatch):
        monkeypatch.delenv(ENV_VAR, raising=False)
        assert default_pool_size() == 1


class TestWorkerPool:

    def test_map_preserves_order(self):
        pool = WorkerPool(3)
        assert pool.map(square, range(10)) == [x * x for x in range(10)]

    def test_results_identical_across_pool_sizes(self):
        inputs = list(np.random.default_rng(0).standard_normal(37))
        reference = WorkerPool(1).map(square, inputs)
        for size in (2, 4, 8, 64):
            assert WorkerPool(size).map(square, inputs) == reference

    def test_shared_context(self):
        pool = WorkerPool(2)
        got = pool.map(scaled, [1, 2, 3, 4], shared={'factor': 10})
        assert got == [10, 20, 30, 40]

    def test_shared_transferred_once_per_worker(self):
        pool = WorkerPool(4)
        pool.map(square, range(16))
        assert pool.shared_transfer_count == 4
        pool.map(square, range(2))  # only 2 chunks have work
        assert pool.shared_transfer_count == 4 + 2

    def test_empty_input(self):
        assert WorkerPool(3).map(square, []) == []

    def test_registered_task_by_name(self):
        pool = WorkerPool(2)
        pool.register('sq', square)
        assert pool.map('sq', [3]) == [9]

    def test_failures_collected(self):
        def failing(x, shared):
            if x % 2:
                raise RuntimeError(f'bad {x}')
            return x
        with pytest.raises(PoolTaskError) as excinfo:
            WorkerPool(3).map(failing, range(6))
        assert set(excinfo.value.failures) == {1, 3, 5}
        assert 'first at input 1' in str(excinfo.value)

    def test_size_floor(self):
        assert WorkerPool(0).size == 1
