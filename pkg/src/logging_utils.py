"""
Logging Utilities

Configures process-wide logging and provides helpers that keep solver log
lines short: exact ratios with a percentage, truncated assignment vectors and
one-line matrix summaries.
"""

import logging
from fractions import Fraction
from typing import Sequence

from src.validators import ValidationError

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

VALID_LOG_LEVELS = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}


def configure_logging(level: str = "INFO") -> None:
    """
    Configure root logging to stderr with the project format.

    Calling it again only changes the level.

    Args:
        level: Log level name (e.g., "DEBUG", "INFO", "WARNING")

    Raises:
        ValidationError: If the level name is unknown
    """
    level_name = level.upper()
    if level_name not in VALID_LOG_LEVELS:
        raise ValidationError(f"Unknown log level: {level}")

    root = logging.getLogger()
    if not root.handlers:
        logging.basicConfig(
            level=level_name,
            format=LOG_FORMAT,
            handlers=[logging.StreamHandler()],  # Log to stderr by default
        )
    root.setLevel(level_name)


def format_percent(value: Fraction, digits: int = 2) -> str:
    """
    Render a ratio as a percentage.

    Example:
        >>> format_percent(Fraction(121, 152))
        '79.61%'
    """
    return f"{float(value) * 100:.{digits}f}%"


def format_ratio(value: Fraction) -> str:
    """
    Render an exact ratio with its percentage for log lines.

    Example:
        >>> format_ratio(Fraction(121, 152))
        '121/152 (79.61%)'
    """
    return f"{value.numerator}/{value.denominator} ({format_percent(value)})"


def summarize_assignment(cells: Sequence[int], limit: int = 8) -> str:
    """
    Shorten a cell assignment for logging, converting to 1-based cells.

    Args:
        cells: 0-based cell index per machine or part
        limit: Number of entries to show (default: 8)

    Returns:
        The full 1-based list when short, otherwise the first ``limit``
        entries followed by the total count

    Example:
        >>> summarize_assignment([0, 1, 1])
        '[1, 2, 2]'
        >>> summarize_assignment(list(range(20)), limit=3)
        '[1, 2, 3, ...] (20 entries)'
    """
    if not cells:
        return "[]"
    shown = ", ".join(str(cell + 1) for cell in cells[:limit])
    if len(cells) <= limit:
        return f"[{shown}]"
    return f"[{shown}, ...] ({len(cells)} entries)"


def describe_matrix(matrix) -> str:
    """
    One-line summary of an incidence matrix.

    Example:
        >>> describe_matrix(sample_8x12)
        '8x12, n1=35, density=36.46%'
    """
    return (
        f"{matrix.machines}x{matrix.parts}, n1={matrix.n1}, "
        f"density={format_percent(Fraction(matrix.n1, matrix.size))}"
    )
