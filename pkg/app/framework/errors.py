from __future__ import annotations
from typing import Any, Dict, List, Optional



# --------------------------------------------------------------------------------
#       Errors Start
# --------------------------------------------------------------------------------


class ExclusionGapError(Exception):
    pass

class InvalidParams(ExclusionGapError, ValueError):
    pass

class OutOfRange(InvalidParams):
    pass

class DimensionMismatch(ExclusionGapError, ValueError):
    pass

class CapExceeded(ExclusionGapError):
    def __init__(self, message: str, size: int = 0, cap: int = 0):
        super().__init__(message)
        self.size = size
        self.cap = cap

class DegenerateSector(ExclusionGapError):
    pass

class ZeroWeightState(ExclusionGapError):
    pass

class NoConvergence(ExclusionGapError):
    def __init__(self, message: str, best_estimate: Optional[float] = None, residual: Optional[float] = None):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.residual = residual

class InsufficientData(ExclusionGapError):
    pass

class NonDecayingCorrelation(ExclusionGapError):
    pass

class EquivalenceMismatch(ExclusionGapError):
    def __init__(self, message: str, residual: float = 0.0):
        super().__init__(message)
        self.residual = residual

class ReportedFailure(ExclusionGapError):
    def __init__(self, message: str, failures: Optional[List[Dict[str, Any]]] = None):
        super().__init__(message)
        self.failures = failures or []

class CheckNotReadyError(ExclusionGapError):
    pass

class CheckImplementationError(NotImplementedError):
    pass


# --------------------------------------------------------------------------------
#       Errors End
# --------------------------------------------------------------------------------
