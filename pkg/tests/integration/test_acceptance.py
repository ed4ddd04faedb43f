"""
End-to-end checks on the bundled samples: repeated seeded runs against the
exhaustive optimum and the relocation example lower bound.
"""

import os
import time

import pytest

from src.cli import EXIT_OK, main
from src.instances import bundled_instance
from src.oracle import exact_best
from src.reporting import fraction_text, records_from_csv, records_from_json, verify_record
from src.search import multirun
from src.types import HALF, SolveParams

pytestmark = [pytest.mark.integration, pytest.mark.slow]

RUNS = 50
THREADS = min(4, os.cpu_count() or 1)
# wall-clock limit for the 50 default runs
TIME_LIMIT = 60.0


@pytest.fixture(autouse=True)
def isolated_cwd(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)


class TestSmallSampleSaturates:
    """Every seeded run on the 5x7 sample reaches the exhaustive optimum"""

    def test_with_singletons_cli(self, capsys):
        """Default search parameters, timed"""
        optimum = exact_best(bundled_instance("sample_5x7").matrix, HALF, k_min=2).efficiency
        started = time.perf_counter()
        code = main(
            ["solve", "--instance", "sample_5x7", "--runs", str(RUNS), "--seed", "1",
             "--threads", str(THREADS), "--format", "csv"]
        )
        elapsed = time.perf_counter() - started
        assert code == EXIT_OK
        (record,) = records_from_csv(capsys.readouterr().out)
        assert record["runs"] == RUNS
        expected = fraction_text(optimum)
        assert record["efficiency_min"] == record["efficiency_avg"] == record["efficiency_max"] == expected
        assert elapsed < TIME_LIMIT

    def test_without_singletons(self, matrix_5x7):
        optimum = exact_best(matrix_5x7, HALF, allow_singletons=False, k_min=2).efficiency
        params = SolveParams(allow_singletons=False, seed=1, workers=THREADS)
        summary = multirun(matrix_5x7, params, RUNS)
        assert summary.minimum == summary.maximum == optimum

    def test_oracle_command(self, capsys):
        code = main(["oracle", "--instance", "sample_5x7", "--format", "json"])
        assert code == EXIT_OK
        (record,) = records_from_json(capsys.readouterr().out)
        assert verify_record(bundled_instance("sample_5x7").matrix, record)


class TestRelocationSample:
    """Default search on the 8x12 sample"""

    def test_default_parameters_json(self, capsys):
        code = main(["solve", "--instance", "sample_8x12", "--format", "json"])
        assert code == EXIT_OK
        (record,) = records_from_json(capsys.readouterr().out)
        assert record["efficiency_pct"] >= 75.32
        assert (record["m"], record["p"]) == (8, 12)
        assert verify_record(bundled_instance("sample_8x12").matrix, record)
