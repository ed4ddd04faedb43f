"""
Tests for the MCP tools, called directly as plain functions.
"""

from unittest.mock import patch

import pytest

import src.server
from src.instances import bundled_instance
from src.oracle import EnumerationBudgetExceeded
from src.reporting import verify_record
from src.settings import reset_settings
from src.validators import ValidationError

SINGLETON_MACHINES = [1, 2, 2, 2, 2]
SINGLETON_PARTS = [1, 2, 2, 2, 2, 1, 1]


@pytest.mark.unit
class TestListAndEvaluate:
    """Test cases for list_instances and evaluate_assignment"""

    def test_list_instances(self):
        summaries = src.server.list_instances()
        assert [s["name"] for s in summaries] == ["sample_5x7", "sample_8x12"]
        assert [(s["m"], s["p"], s["n1"]) for s in summaries] == [(5, 7, 20), (8, 12, 35)]

    def test_evaluate_singleton_solution(self):
        result = src.server.evaluate_assignment("sample_5x7", SINGLETON_MACHINES, SINGLETON_PARTS)
        assert result["efficiency"] == "121/152"
        assert result["efficacy"] == "16/23"
        assert result["group_capability_index"] == "4/5"
        assert result["exceptions_plus_voids"] == 7
        assert result["cells"] == 2
        assert result["feasible"] is True
        assert result["violation"] is None

    def test_singleton_policy_reported(self):
        result = src.server.evaluate_assignment(
            "sample_5x7", SINGLETON_MACHINES, SINGLETON_PARTS, allow_singletons=False
        )
        assert result["feasible"] is False
        assert result["violation"] == "cell_machines: cell 1 has 3 parts but 1 machines"

    def test_cell_without_parts(self):
        result = src.server.evaluate_assignment("sample_5x7", SINGLETON_MACHINES, [1] * 7)
        assert result["feasible"] is False
        assert result["violation"].startswith("cell_parts: cell 2")

    def test_other_weight(self):
        result = src.server.evaluate_assignment(
            "sample_5x7", SINGLETON_MACHINES, SINGLETON_PARTS, q="1/1"
        )
        assert result["efficiency"] == "16/19"

    def test_inline_instance_text(self):
        result = src.server.evaluate_assignment("2 2\n1 0\n0 1\n", [1, 2], [1, 2])
        assert result["efficiency"] == "1/1"
        assert result["exceptions_plus_voids"] == 0

    @pytest.mark.parametrize(
        "machines, parts",
        [
            ([0, 1, 1, 1, 1], SINGLETON_PARTS),
            ([1, 2, 2, 2], SINGLETON_PARTS),
            (SINGLETON_MACHINES, [1, 2, 2]),
        ],
    )
    def test_malformed_assignment(self, machines, parts):
        with pytest.raises(ValidationError):
            src.server.evaluate_assignment("sample_5x7", machines, parts)

    def test_all_zero_matrix(self):
        with pytest.raises(ValidationError, match="has no ones"):
            src.server.evaluate_assignment("2 2\n0 0\n0 0\n", [1, 2], [1, 2])

    def test_unknown_instance(self):
        with pytest.raises(ValidationError, match="Unknown bundled instance"):
            src.server.evaluate_assignment("nope", [1], [1])


class TestSolveAndOracle:
    """Test cases for solve_instance and oracle_instance"""

    def test_solve_instance(self):
        record = src.server.solve_instance(
            "sample_5x7", configs_per_k=60, range_configs_per_k=30, seed=2
        )
        assert record["method"] == "multistart"
        assert record["seed"] == 2
        assert verify_record(bundled_instance("sample_5x7").matrix, record)

    def test_multiple_runs(self):
        record = src.server.solve_instance(
            "sample_8x12", configs_per_k=60, range_configs_per_k=30, runs=2
        )
        assert record["runs"] == 2
        assert record["efficiency_max"] == record["efficiency"]

    def test_explicit_cell_range(self):
        record = src.server.solve_instance(
            "sample_8x12", configs_per_k=60, range_configs_per_k=30, min_cells=3, max_cells=3
        )
        assert (record["min_cells"], record["max_cells"]) == (3, 3)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"configs_per_k": 0},
            {"runs": 0},
            {"seed": -1},
            {"q": "2"},
            {"min_cells": 2},
        ],
    )
    def test_invalid_parameters(self, kwargs):
        with pytest.raises(ValidationError):
            src.server.solve_instance("sample_5x7", **kwargs)

    def test_unexpected_errors_become_runtime_errors(self):
        with patch("src.server.solve", side_effect=KeyError("boom")):
            with pytest.raises(RuntimeError, match="Server error solving instance"):
                src.server.solve_instance("sample_5x7", configs_per_k=5, range_configs_per_k=5)

    def test_oracle_instance(self):
        record = src.server.oracle_instance("sample_5x7", k_min=2)
        assert record["method"] == "oracle"
        assert record["efficiency_pct"] >= 79.61
        assert verify_record(bundled_instance("sample_5x7").matrix, record)

    def test_oracle_refuses_large_instance(self):
        with pytest.raises(EnumerationBudgetExceeded):
            src.server.oracle_instance("sample_8x12")

    def test_oracle_budget_from_environment(self, monkeypatch):
        monkeypatch.setenv("CFP_ORACLE_BUDGET", "10")
        reset_settings()
        with pytest.raises(EnumerationBudgetExceeded):
            src.server.oracle_instance("sample_5x7")


@pytest.mark.unit
class TestRunServer:
    """Test cases for run_server"""

    def test_default_transport(self):
        with patch.object(src.server.mcp, "run") as run:
            src.server.run_server()
        run.assert_called_once_with(transport="stdio")

    def test_explicit_transport(self):
        with patch.object(src.server.mcp, "run") as run:
            src.server.run_server("sse")
        run.assert_called_once_with(transport="sse")

    def test_transport_from_environment(self, monkeypatch):
        monkeypatch.setenv("CFP_TRANSPORT", "SSE")
        reset_settings()
        with patch.object(src.server.mcp, "run") as run:
            src.server.run_server()
        run.assert_called_once_with(transport="sse")
