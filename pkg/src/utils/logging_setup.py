"""
Console logging in the `[Tag] message` style
Tags come from the module name; warnings and errors are colorized
"""
import logging
import sys
from typing import Dict, Optional

import colorama
from colorama import Fore, Style

# module basename -> console tag
_TAGS: Dict[str, str] = {
    "exact": "Exact",
    "baselines": "Baseline",
    "env": "Env",
    "rollout": "Rollout",
    "trainer": "Trainer",
    "gradcheck": "GradCheck",
    "checkpoint": "Checkpoint",
    "runner": "Bench",
    "incremental": "Incremental",
    "ablation": "Ablation",
    "export": "Viz",
    "config": "Config",
    "trajectory_logger": "Trajectory",
    "__main__": "Main",
    "main": "Main",
}

_LEVEL_COLORS = {
    logging.WARNING: Fore.YELLOW,
    logging.ERROR: Fore.RED,
    logging.CRITICAL: Fore.RED + Style.BRIGHT,
}

_configured = False


def tag_for(logger_name: str) -> str:
    base = logger_name.rsplit(".", 1)[-1]
    return _TAGS.get(base, base.replace("_", " ").title().replace(" ", ""))


class TaggedFormatter(logging.Formatter):
    """Formats records as `[Tag] message`, colored by level"""

    def __init__(self, use_color: bool = True):
        super().__init__()
        self.use_color = use_color

    def format(self, record: logging.LogRecord) -> str:
        line = f"[{tag_for(record.name)}] {record.getMessage()}"
        if record.levelno >= logging.WARNING:
            line = f"[{record.levelname.title()}] {line}"
        if record.exc_info:
            line = f"{line}\n{self.formatException(record.exc_info)}"
        color = _LEVEL_COLORS.get(record.levelno) if self.use_color else None
        if color:
            line = f"{color}{line}{Style.RESET_ALL}"
        return line


def setup_logging(verbose: bool = False, stream: Optional[object] = None) -> logging.Logger:
    """
    Configure the package root logger once

    Args:
        verbose: DEBUG level instead of INFO
        stream: Output stream (default stderr)
    """
    global _configured
    root = logging.getLogger("src")
    root.setLevel(logging.DEBUG if verbose else logging.INFO)
    if not _configured:
        colorama.init()
        handler = logging.StreamHandler(stream or sys.stderr)
        handler.setFormatter(TaggedFormatter(use_color=stream is None))
        root.addHandler(handler)
        root.propagate = False
        _configured = True
    return root
