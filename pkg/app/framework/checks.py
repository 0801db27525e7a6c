from __future__ import annotations
import uuid
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional
from abc import ABC, abstractmethod

from pydantic import BaseModel

from app.core.logging import Logger
from app.framework.errors import CheckImplementationError, CheckNotReadyError



# --------------------------------------------------------------------------------
#       Logger Start
# --------------------------------------------------------------------------------


logger = Logger(name="BaseCheck")


# --------------------------------------------------------------------------------
#       Logger End
# --------------------------------------------------------------------------------



# --------------------------------------------------------------------------------
#       Check Result Start
# --------------------------------------------------------------------------------


class CheckResult(BaseModel):
    name: str
    instance: str
    deviation: float
    tolerance: float
    passed: bool
    detail: Optional[str] = None

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"


# --------------------------------------------------------------------------------
#       Check Result End
# --------------------------------------------------------------------------------



# --------------------------------------------------------------------------------
#       Base Check Start
# --------------------------------------------------------------------------------


class Check(ABC):
    """
    Base class for every identity or invariant of the verify suite.
    Every check must:
    - implement confirm_setup()
    - implement run()
    Optionally, checks may override get_status().

    `corrupt` asks the check to evaluate a perturbed operator instead of the
    real one; a correct check then reports FAIL.
    """

    name: str = "UnnamedCheck"  # Should be overridden by child classes
    description: str = "No description provided"
    version: str = "1.0"
    tags: list[str] = []

    def __init__(self, corrupt: bool = False):
        self.check_id: str = str(uuid.uuid4())
        self.created_at: datetime = datetime.now(timezone.utc)
        self.corrupt = corrupt
        self.is_ready: bool = False

        logger.debug(f"[{self.name}] Initializing check...")
        try:
            self.is_ready = self.confirm_setup()
        except Exception as e:
            logger.error(f"[{self.name}] Setup failed: {e}")
            raise CheckNotReadyError(f"Check '{self.name}' failed to initialize: {e}")

        if not self.is_ready:
            raise CheckNotReadyError(f"Check '{self.name}' is not ready after setup check.")

    def confirm_setup(self) -> bool:
        return True

    @abstractmethod
    def run(self) -> List[CheckResult]:
        """
        Evaluates the check over its built-in instance grid.
        """
        raise CheckImplementationError(f"{self.__class__.__name__} must implement run()")

    def result(self, instance: str, deviation: float, tolerance: float, detail: Optional[str] = None) -> CheckResult:
        passed = bool(deviation <= tolerance)
        if not passed:
            logger.warning(f"[{self.name}] {instance}: deviation {deviation:.3e} > {tolerance:.1e}")
        return CheckResult(name=self.name, instance=instance, deviation=float(deviation), tolerance=tolerance, passed=passed, detail=detail)

    def get_status(self) -> Dict[str, Any]:
        return {
            "check_id": self.check_id,
            "name": self.name,
            "ready": self.is_ready,
            "created_at": self.created_at.isoformat(),
            "version": self.version,
            "tags": self.tags,
        }

    def __repr__(self):
        return f"<Check {self.name} v{self.version} (ready={self.is_ready})>"


# --------------------------------------------------------------------------------
#       Base Check End
# --------------------------------------------------------------------------------



# --------------------------------------------------------------------------------
#       Decorator Start
# --------------------------------------------------------------------------------


GLOBAL_CHECK_REGISTRY: Dict[str, type[Check]] = {}

def register_check(check_cls):
    if not issubclass(check_cls, Check):
        raise TypeError(f"{check_cls.__name__} is not a subclass of Check")

    if check_cls.name in GLOBAL_CHECK_REGISTRY:
        logger.info(f"Check with name '{check_cls.name}' already registered")
        return check_cls

    GLOBAL_CHECK_REGISTRY[check_cls.name] = check_cls
    return check_cls


def select_checks(selectors: Optional[List[str]] = None) -> List[type[Check]]:
    """ Registered checks whose name or one of whose tags is in `selectors`, all when empty."""
    if not selectors:
        return list(GLOBAL_CHECK_REGISTRY.values())
    return [
        check_cls for check_cls in GLOBAL_CHECK_REGISTRY.values()
        if any(s == check_cls.name or s in check_cls.tags for s in selectors)
    ]


# --------------------------------------------------------------------------------
#       Decorator End
# --------------------------------------------------------------------------------
