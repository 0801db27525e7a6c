from __future__ import annotations
from typing import Any, Dict, Optional

import numpy as np
import scipy.sparse as sp

from app.core.constants import GENERATOR_KIND, KERNEL_KIND
from app.core.logging import Logger
from app.framework.errors import DimensionMismatch, InvalidParams

logger = Logger(name="ReversibleOperator")



# --------------------------------------------------------------------------------
#       Reversible Operator Start
# --------------------------------------------------------------------------------


class ReversibleOperator:
    """
    Finite-state reversible Markov operator.

    Stores the stationary weights `pi` and the off-diagonal rates rate(a->b).
    The diagonal is implied: -sum_b rate(a->b). Kernel-form operators (K, P)
    store the off-diagonal part of their stochastic matrix, so the implied
    generator is kernel - I and the positive form is I - kernel.
    """

    def __init__(self,
        pi: np.ndarray,
        rates: sp.spmatrix,
        label: str,
        kind: str = GENERATOR_KIND,
        states: Optional[np.ndarray] = None,
        meta: Optional[Dict[str, Any]] = None
    ):
        pi = np.asarray(pi, dtype=np.float64)
        rates = sp.csr_matrix(rates, dtype=np.float64)

        if pi.ndim != 1 or rates.shape != (pi.size, pi.size):
            raise DimensionMismatch(f"(ReversibleOperator) pi has {pi.size} states but rates are {rates.shape}.")
        if kind not in (GENERATOR_KIND, KERNEL_KIND):
            raise InvalidParams(f"(ReversibleOperator) Unknown operator kind '{kind}'.")

        rates.setdiag(0.0)
        rates.eliminate_zeros()

        self.pi = pi
        self.rates = rates
        self.label = label
        self.kind = kind
        self.states = states
        self.meta = dict(meta or {})

    @property
    def dim(self) -> int:
        return int(self.pi.size)

    @property
    def escape_rates(self) -> np.ndarray:
        return np.asarray(self.rates.sum(axis=1)).ravel()

    def generator(self) -> sp.csr_matrix:
        return (self.rates - sp.diags(self.escape_rates)).tocsr()

    def kernel(self) -> sp.csr_matrix:
        return (sp.identity(self.dim, format="csr") + self.generator()).tocsr()

    def positive_form(self) -> sp.csr_matrix:
        return (-self.generator()).tocsr()

    def apply(self, f: np.ndarray) -> np.ndarray:
        """ Generator form acts as Lf; kernel form acts as Kf."""
        f = self._as_function(f)
        if self.kind == KERNEL_KIND:
            return self.kernel() @ f
        return self.generator() @ f

    def expectation(self, f: np.ndarray) -> float:
        return float(self.pi @ self._as_function(f))

    def variance(self, f: np.ndarray) -> float:
        f = self._as_function(f)
        mean = self.pi @ f
        return float(self.pi @ (f - mean) ** 2)

    def dirichlet_form(self, f: np.ndarray) -> float:
        """ 1/2 sum_a pi(a) sum_b rate(a->b) (f(b) - f(a))^2"""
        f = self._as_function(f)
        coo = self.rates.tocoo()
        grad = f[coo.col] - f[coo.row]
        return float(0.5 * np.sum(self.pi[coo.row] * coo.data * grad**2))

    def check(self) -> Dict[str, float]:
        """
        Returns the worst deviation of each structural invariant:
        row sums of the generator, negative rates, relative detailed-balance
        defect and the normalization of pi.
        """
        generator = self.generator()
        scale = max(1.0, float(self.escape_rates.max(initial=0.0)))
        row_sum = float(np.abs(generator @ np.ones(self.dim)).max(initial=0.0)) / scale

        flux = sp.diags(self.pi) @ self.rates
        flux_t = flux.T.tocsr()
        total = (flux + flux_t).tocsr()
        defect = abs(flux - flux_t).tocsr()
        balance = 0.0
        if defect.nnz:
            balance = float(defect.multiply(total.power(-1.0)).max())

        return {
            "row_sum": row_sum,
            "negative_rate": float(max(0.0, -self.rates.data.min(initial=0.0))),
            "detailed_balance": balance,
            "normalization": float(abs(self.pi.sum() - 1.0)),
        }

    def perturbed(self, factor: float = 1.5) -> ReversibleOperator:
        """ Copy with the first stored rate scaled. Breaks detailed balance on purpose."""
        rates = self.rates.copy()
        if rates.nnz:
            rates.data[0] *= factor
        logger.warning(f"[{self.label}] Perturbed copy requested (factor={factor}).")
        return ReversibleOperator(self.pi.copy(), rates, f"{self.label}:perturbed", self.kind, self.states, self.meta)

    def _as_function(self, f: np.ndarray) -> np.ndarray:
        f = np.asarray(f, dtype=np.float64)
        if f.shape != (self.dim,):
            raise DimensionMismatch(f"(ReversibleOperator) Function of shape {f.shape} does not match dim {self.dim}.")
        return f

    def __repr__(self):
        return f"<ReversibleOperator {self.label} kind={self.kind} dim={self.dim} nnz={self.rates.nnz}>"


# --------------------------------------------------------------------------------
#       Reversible Operator End
# --------------------------------------------------------------------------------
