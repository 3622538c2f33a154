"""Shared fixtures: seeded targets and a session-wide solve cache."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import pytest

from tensorspan import CTensor, Format, SolutionSet, random_tensor, solve_singular_tuples


def target_tensor(dims, seed: int) -> CTensor:
    """The seeded random target used across the suite (and by the CLI)."""
    return random_tensor(Format(dims), np.random.default_rng([seed, 0]))


@dataclass
class SolveRecord:
    tensor: CTensor
    sols: SolutionSet
    seconds: float


class SolveCache:
    """Memoizes full solves per (format, seed); records wall time."""

    def __init__(self):
        self._store: dict[tuple, SolveRecord] = {}

    def get(self, dims, seed: int) -> SolveRecord:
        key = (tuple(dims), seed)
        if key not in self._store:
            tensor = target_tensor(dims, seed)
            start = time.perf_counter()
            sols = solve_singular_tuples(tensor, seed=seed)
            seconds = time.perf_counter() - start
            self._store[key] = SolveRecord(tensor, sols, seconds)
        return self._store[key]


_session_cache = SolveCache()


@pytest.fixture(scope="session")
def solve_cache() -> SolveCache:
    return _session_cache
