"""Input validation utilities."""

import math
import re
from pathlib import Path
from typing import List, Sequence

from lfpp.exceptions import DomainError

_NUMBER = r"[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?"
_SYMBOLS = {
    "1/sqrt6": 1.0 / math.sqrt(6.0),
    "1/sqrt3": 1.0 / math.sqrt(3.0),
    "sqrt2": math.sqrt(2.0),
    "sqrt(8/3)": math.sqrt(8.0 / 3.0),
}


def validate_seed(seed: int) -> bool:
    """
    Validate a master seed.

    Args:
        seed: Seed to validate

    Returns:
        True if it fits in an unsigned 64-bit integer, False otherwise
    """
    return isinstance(seed, int) and 0 <= seed < 2**64


def validate_k_list(levels: Sequence[int], min_length: int = 1) -> bool:
    """
    Validate a list of scale levels.

    Args:
        levels: Levels k (eps = 2^-k)
        min_length: Minimum number of levels

    Returns:
        True if nonnegative and strictly increasing, False otherwise
    """
    if len(levels) < min_length:
        return False
    if any(k < 0 for k in levels):
        return False
    return all(b > a for a, b in zip(levels, levels[1:]))


def validate_xi_list(values: Sequence[float]) -> bool:
    """
    Validate a list of xi values.

    Args:
        values: xi values

    Returns:
        True if nonempty, finite and nonnegative, False otherwise
    """
    return bool(values) and all(math.isfinite(x) and x >= 0 for x in values)


def validate_alpha_list(values: Sequence[float]) -> bool:
    """Census thresholds must be finite and strictly positive."""
    return all(math.isfinite(a) and a > 0 for a in values)


def validate_output_dir(path: str) -> bool:
    """
    Validate that an output directory exists or can be created.

    Args:
        path: Directory path

    Returns:
        True if usable, False otherwise
    """
    try:
        p = Path(path)
        if p.exists():
            return p.is_dir()
        return True
    except (ValueError, OSError):
        return False


def parse_float(text: str) -> float:
    """Parse a float or one of the named constants (``1/sqrt6``, ``sqrt2``, ...)."""
    token = text.strip().lower()
    if token in _SYMBOLS:
        return _SYMBOLS[token]
    if not re.fullmatch(_NUMBER, token):
        raise DomainError(f"not a number: '{text}'")
    return float(token)


def parse_float_list(text: str) -> List[float]:
    """Parse a comma-separated list of floats; an empty string gives []."""
    if not text or not text.strip():
        return []
    return [parse_float(part) for part in text.split(",")]


def parse_int_list(text: str) -> List[int]:
    """Parse ``5,6,7`` or the inclusive range ``5..9``."""
    if not text or not text.strip():
        return []
    text = text.strip()
    if ".." in text:
        start, stop = text.split("..", 1)
        return list(range(int(start), int(stop) + 1))
    try:
        return [int(part) for part in text.split(",")]
    except ValueError as e:
        raise DomainError(f"not an integer list: '{text}'") from e
