import uuid
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional
from app.core.config import settings
from app.core.constants import *
from app.core.logging import Logger



# --------------------------------------------------------------------------------
#       Context Module Start
# --------------------------------------------------------------------------------


class RunContext:
    def __init__(self, command: str, params: Optional[Dict[str, Any]] = None, seed: Optional[int] = None):
        # Constants
        self.logger = Logger(name=f"context.{command}")
        self.command = command
        self.run_id = str(uuid.uuid4())
        self.started_at = datetime.now(timezone.utc)
        self.params: Dict[str, Any] = dict(params or {})
        self.seed = seed
        self.log: Dict[str, List[str]] = {
            SUCCESS_LOG: [f"(framework/context.py) Context created for '{command}'."],
            ERROR_LOG: [],
            INFO_LOG: []
        }

        # Variables
        self.state: Dict[str, Any] = {}
        self.results: List[Dict[str, Any]] = []

    # Shared state access
    def set_state(self, key: str, value: Any):
        self.state[key] = value
        self.logger.debug(f"[STATE] Set {key}")

    def get_state(self, key: str, default: Any = None) -> Any:
        return self.state.get(key, default)

    def clear_state(self):
        self.state.clear()
        self.logger.info("[STATE] Cleared")

    # Results collected by scans and checks, merge only
    def add_result(self, row: Dict[str, Any]):
        self.results.append(row)

    def extend_results(self, rows: List[Dict[str, Any]]):
        self.results.extend(rows)

    # logging
    def success(self, message: str):
        self.log[SUCCESS_LOG].append(message)
        self.logger.info(f"[SUCCESS] {message}")

    def error(self, message: str):
        self.log[ERROR_LOG].append(message)
        self.logger.error(f"[ERROR] {message}")

    def info(self, message: str):
        self.log[INFO_LOG].append(message)
        self.logger.info(f"[INFO] {message}")

    @property
    def failed(self) -> bool:
        return bool(self.log[ERROR_LOG])

    # Output header
    def header(self, volatile: bool = True) -> Dict[str, Any]:
        """ Self-describing block written at the top of every output file; `volatile=False` drops the run id."""
        block = {
            "tool": TOOL_NAME,
            "version": settings.VERSION,
            "schema": settings.SCHEMA_VERSION,
            "command": self.command,
            "run_id": self.run_id,
            "params": self.params,
            "seed": self.seed,
        }
        if not volatile:
            block.pop("run_id")
        return block

    def summary(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "run_id": self.run_id,
            "started_at": self.started_at.isoformat(),
            "results": len(self.results),
            "errors": len(self.log[ERROR_LOG]),
            "state_keys": list(self.state.keys()),
        }


# --------------------------------------------------------------------------------
#       Context Module End
# --------------------------------------------------------------------------------
