"""
Shared fixtures: the bundled sample instances and their reference solutions.
"""

import numpy as np
import pytest

from src.instances import bundled_instance
from src.metrics import make_solution
from src.settings import reset_settings
from src.types import IncidenceMatrix


@pytest.fixture
def matrix_5x7() -> IncidenceMatrix:
    return bundled_instance("sample_5x7").matrix


@pytest.fixture
def matrix_8x12() -> IncidenceMatrix:
    return bundled_instance("sample_8x12").matrix


@pytest.fixture
def singleton_solution_5x7(matrix_5x7):
    """Two cells: {m1} x {p1, p6, p7} and {m2..m5} x {p2..p5}."""
    return make_solution(matrix_5x7, [0, 1, 1, 1, 1], [0, 1, 1, 1, 1, 0, 0], 2)


@pytest.fixture
def balanced_solution_5x7(matrix_5x7):
    """Two cells without singletons: {m1, m4} x {p1, p7} and {m2, m3, m5} x {p2..p6}."""
    return make_solution(matrix_5x7, [0, 1, 1, 0, 1], [0, 1, 1, 1, 1, 1, 0], 2)


@pytest.fixture
def start_solution_8x12(matrix_8x12):
    """Three diagonal blocks: machines 1-3 / 4-6 / 7-8, parts 1-3 / 4-9 / 10-12."""
    return make_solution(
        matrix_8x12, [0, 0, 0, 1, 1, 1, 2, 2], [0, 0, 0, 1, 1, 1, 1, 1, 1, 2, 2, 2], 3
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


@pytest.fixture(autouse=True)
def clean_settings(monkeypatch):
    """Every test sees default settings, whatever CFP_* variables the shell exports."""
    for name in ("LOG_LEVEL", "Q", "CONFIGS_PER_K", "RANGE_CONFIGS_PER_K", "WORKERS",
                 "ORACLE_BUDGET", "TRANSPORT"):
        monkeypatch.delenv(f"CFP_{name}", raising=False)
    reset_settings()
    yield
    reset_settings()
