from __future__ import annotations
from typing import Any, Optional
from abc import ABC, abstractmethod

import numpy as np

from app.framework.context import RunContext
from app.framework.operator import ReversibleOperator
from app.core.logging import Logger

logger = Logger(name="BaseSolver")


# --------------------------------------------------------------------------------
#       Base Solver Start
# --------------------------------------------------------------------------------


class Solver(ABC):
    name: str = "base_solver"
    description: str = "Abstract spectral solver"

    def __init__(self, context: Optional[RunContext] = None, name: Optional[str] = None):
        self.name = name or self.name
        self.context = context
        self.logger = logger

    def update_context(self, key: str, value: Any):
        if self.context is not None:
            self.context.set_state(key, value)

    def get_from_context(self, key: str, default=None):
        if self.context is None:
            return default
        return self.context.get_state(key, default)

    def validate_output(self, report: Any) -> bool:
        """
        Can be overridden by a solver to enforce custom validation on its report.
        """
        gap = getattr(report, "gap", None)
        return gap is not None and not np.isnan(gap) and gap > 0

    @abstractmethod
    def run(self, op: ReversibleOperator) -> Any:
        pass


# --------------------------------------------------------------------------------
#       Base Solver End
# --------------------------------------------------------------------------------
