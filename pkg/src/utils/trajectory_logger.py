"""
Trajectory dump for debugging policies
Writes one JSON object per environment step to a .jsonl file
"""
import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional, Union

logger = logging.getLogger(__name__)


class TrajectoryLogger:
    """
    Appends per-step records (user, current node, action, reward, masked
    count) to a JSON-lines file; does nothing when disabled
    """

    def __init__(self, path: Optional[Union[str, Path]] = None, enabled: bool = True):
        """
        Args:
            path: Output file (default: trajectories/trajectory_<timestamp>.jsonl)
            enabled: When False every call is a no-op
        """
        self.enabled = enabled
        self.records_written = 0
        self._handle = None
        if not enabled:
            self.path = None
            return
        if path is None:
            stamp = datetime.now().strftime("%Y%m%d_%H%M%S")
            path = Path("trajectories") / f"trajectory_{stamp}.jsonl"
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._handle = open(self.path, "a", encoding="utf-8")
        logger.info("writing trajectories to %s", self.path)

    def log_step(self, user: int, node: int, action: int, reward: float, masked: int,
                 forced: bool = False, **extra: Any):
        if not self.enabled or self._handle is None:
            return
        record: Dict[str, Any] = {
            "user": user, "node": node, "action": action,
            "reward": reward, "masked": masked, "forced": forced,
        }
        record.update(extra)
        self._handle.write(json.dumps(record) + "\n")
        self.records_written += 1

    def mark(self, event: str, **extra: Any):
        """Non-step record, e.g. episode boundaries or infeasible aborts"""
        if not self.enabled or self._handle is None:
            return
        self._handle.write(json.dumps({"event": event, **extra}) + "\n")

    def close(self):
        if self._handle is not None:
            self._handle.close()
            self._handle = None

    def __enter__(self) -> "TrajectoryLogger":
        return self

    def __exit__(self, *exc_info):
        self.close()
