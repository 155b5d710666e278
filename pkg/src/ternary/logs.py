"""Logging setup: stdlib loggers rendered by rich on stderr."""

import logging

from rich.console import Console
from rich.logging import RichHandler

err_console = Console(stderr=True)

LOG_FORMAT = "%(name)s: %(message)s"


def setup_logging(verbose: bool = False) -> None:
    """Route every ``src.ternary`` logger through a single RichHandler."""
    level = logging.DEBUG if verbose else logging.INFO
    root = logging.getLogger("src.ternary")
    root.setLevel(level)
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = RichHandler(console=err_console, show_path=False, rich_tracebacks=False)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.propagate = False
