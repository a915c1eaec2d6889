"""Logging utilities using Rich console."""

import logging
from rich.console import Console
from rich.logging import RichHandler

console = Console(stderr=True)


def setup_logger(name: str, level: int = logging.INFO) -> logging.Logger:
    """
    Set up a logger with Rich handler.

    Args:
        name: Logger name
        level: Logging level (default: INFO)

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)
    logger.setLevel(level)

    # Add Rich handler if not already present
    if not logger.handlers:
        handler = RichHandler(
            console=console,
            rich_tracebacks=True,
            show_path=False,
        )
        handler.setFormatter(logging.Formatter("%(message)s"))
        logger.addHandler(handler)
        logger.propagate = False

    return logger


def set_verbosity(verbose: bool) -> None:
    """Switch every ``lfpp`` logger between INFO and DEBUG."""
    level = logging.DEBUG if verbose else logging.INFO
    for name, logger in logging.root.manager.loggerDict.items():
        if name.startswith("lfpp") and isinstance(logger, logging.Logger):
            logger.setLevel(level)
