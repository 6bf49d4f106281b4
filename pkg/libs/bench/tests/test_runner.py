"""Tests for the worker pool."""

import pytest

from bench import SweepRunner


def square(value):
    return value * value


def fail_on_three(value):
    if value == 3:
        raise ValueError("three")
    return value


class TestSweepRunner:
    def test_serial_order(self):
        assert SweepRunner(show_progress=False).map(square, [3, 1, 2]) == [9, 1, 4]

    def test_parallel_order(self):
        tasks = list(range(20))
        runner = SweepRunner(workers=3, show_progress=False)
        assert runner.map(square, tasks) == [t * t for t in tasks]

    def test_empty(self):
        assert SweepRunner(workers=2, show_progress=False).map(square, []) == []

    def test_progress_bar(self, capsys):
        assert SweepRunner(show_progress=True).map(square, [1, 2], "squares") == [1, 4]

    def test_worker_errors_propagate(self):
        with pytest.raises(ValueError, match="three"):
            SweepRunner(workers=2, show_progress=False).map(fail_on_three, [1, 2, 3, 4])

    def test_rejects_zero_workers(self):
        with pytest.raises(ValueError):
            SweepRunner(workers=0)
