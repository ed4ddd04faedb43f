"""
Runtime configuration.

Defaults for the CLI and the MCP server are read from ``CFP_*`` environment
variables and an optional ``.env`` file in the working directory.
"""

import dataclasses
from functools import lru_cache
from typing import Any

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.logging_utils import VALID_LOG_LEVELS
from src.types import SolveParams, Weight
from src.validators import ValidationError, parse_weight


class CFPSettings(BaseSettings):
    """
    Process-wide solver defaults.

    Attributes:
        log_level: Root log level (CFP_LOG_LEVEL)
        q: Efficiency weight as a fraction string (CFP_Q)
        configs_per_k: Main-phase configurations per cell count (CFP_CONFIGS_PER_K)
        range_configs_per_k: Range-search configurations per cell count (CFP_RANGE_CONFIGS_PER_K)
        workers: Worker processes for configuration scans (CFP_WORKERS)
        oracle_budget: Largest enumeration the oracle accepts (CFP_ORACLE_BUDGET)
        transport: MCP transport, "stdio" or "sse" (CFP_TRANSPORT)
    """

    model_config = SettingsConfigDict(
        env_prefix="CFP_", env_file=".env", env_file_encoding="utf-8", extra="ignore"
    )

    log_level: str = "INFO"
    q: str = "1/2"
    configs_per_k: int = Field(default=2000, ge=1)
    range_configs_per_k: int = Field(default=500, ge=1)
    workers: int = Field(default=1, ge=1)
    oracle_budget: int = Field(default=2_000_000, ge=1)
    transport: str = "stdio"

    @field_validator("log_level")
    @classmethod
    def _check_log_level(cls, value: str) -> str:
        if value.upper() not in VALID_LOG_LEVELS:
            raise ValueError(f"unknown log level {value!r}")
        return value.upper()

    @field_validator("q")
    @classmethod
    def _check_q(cls, value: str) -> str:
        try:
            parse_weight(value)
        except ValidationError as e:
            raise ValueError(str(e)) from e
        return value

    @field_validator("transport")
    @classmethod
    def _check_transport(cls, value: str) -> str:
        value = value.lower()
        if value not in {"stdio", "sse"}:
            raise ValueError(f"transport must be 'stdio' or 'sse', got {value!r}")
        return value

    @property
    def weight(self) -> Weight:
        return parse_weight(self.q)

    def default_params(self, **overrides: Any) -> SolveParams:
        """
        SolveParams built from these defaults.

        Keyword arguments replace single SolveParams fields; None keeps the default.
        """
        params = SolveParams(
            q=self.weight,
            configs_per_k=self.configs_per_k,
            range_configs_per_k=self.range_configs_per_k,
            workers=self.workers,
        )
        chosen = {name: value for name, value in overrides.items() if value is not None}
        return dataclasses.replace(params, **chosen)


@lru_cache(maxsize=1)
def get_settings() -> CFPSettings:
    """Load settings once per process."""
    return CFPSettings()


def reset_settings() -> None:
    """Forget cached settings so the next get_settings() re-reads the environment."""
    get_settings.cache_clear()
