from typing import Dict, List, Tuple

import numpy as np

from app.core.config import settings
from app.framework.checks import Check, CheckResult, register_check
from app.framework.operator import ReversibleOperator
from app.services.checks.grid import label, sectors
from app.services.operators.kernels import operator_P
from app.services.operators.lattice import modified_generator
from app.services.spectral.variational import (
    class_a_deviation,
    gamma_tilde,
    iteration_bound_deviation,
    p_identity_deviation,
    random_functions,
    variance_decomposition_deviation,
)


class RecursionCheck(Check):
    """ Shared access to P on the sector and the seeded random test functions."""

    def stochastic_operator(self, params) -> ReversibleOperator:
        P = operator_P(params)
        return P.perturbed() if self.corrupt else P

    def stochastic(self, P: ReversibleOperator):
        return P.kernel() if self.corrupt else P.meta["stochastic"]



# --------------------------------------------------------------------------------
#       Identities Start
# --------------------------------------------------------------------------------


@register_check
class VarianceDecompositionCheck(RecursionCheck):
    name: str = "variance-decomposition"
    description: str = "var(f) = (1/L) sum_k [nu(var(f|F_k)) + var(nu(f|F_k))] for seeded random f."
    tags: list[str] = ["recursion"]

    def run(self) -> List[CheckResult]:
        results = []
        for params in sectors(min_L=2, half=True):
            P = operator_P(params)
            pi = P.pi * np.linspace(1.0, 1.5, P.dim) if self.corrupt else P.pi
            functions = random_functions(P.dim)
            deviation = variance_decomposition_deviation(pi, P.meta["patterns"], functions)
            results.append(self.result(label(params), deviation, settings.CHECK_TOL))
        return results


@register_check
class PIdentityCheck(RecursionCheck):
    name: str = "p-identity"
    description: str = "(1/L) sum_k var(nu(f|F_k)) = nu(f P f) for mean-zero f."
    tags: list[str] = ["recursion"]

    def run(self) -> List[CheckResult]:
        results = []
        for params in sectors(min_L=2, half=True):
            P = self.stochastic_operator(params)
            functions = random_functions(P.dim)
            deviation = p_identity_deviation(P.pi, P.meta["patterns"], self.stochastic(P), functions)
            results.append(self.result(label(params), deviation, settings.CHECK_TOL))
        return results


@register_check
class ClassACheck(RecursionCheck):
    name: str = "class-a"
    description: str = "(I - P) f = (L-2)/(L-1) f on combinations of n_bar(eta_l)."
    tags: list[str] = ["recursion"]

    def run(self) -> List[CheckResult]:
        results = []
        for params in sectors(min_L=2, half=True):
            P = self.stochastic_operator(params)
            coefficients = random_functions(params.L, 1)[0]
            deviation = class_a_deviation(params, P.meta["basis"], self.stochastic(P), coefficients)
            results.append(self.result(label(params), deviation, settings.EIGEN_TOL))
        return results


@register_check
class IterationBoundCheck(RecursionCheck):
    name: str = "iteration-bound"
    description: str = "nu(f (I-P) f) <= (L-2)/(L-1) gamma-tilde(L-1, H) D-tilde(f, f)."
    tags: list[str] = ["recursion"]

    def run(self) -> List[CheckResult]:
        results = []
        previous: Dict[Tuple[float, int, int], float] = {}
        for params in sectors(min_L=3, half=True, H_values=(1, 2)):
            key = (params.q, params.L - 1, params.H)
            if key not in previous:
                previous[key] = gamma_tilde(*key)
            P = self.stochastic_operator(params)
            functions = random_functions(P.dim, max(1, settings.N_RANDOM_FUNCTIONS // 10))
            gamma = 0.0 if self.corrupt else previous[key]
            deviation = iteration_bound_deviation(P.pi, self.stochastic(P), modified_generator(params), gamma, functions)
            results.append(self.result(label(params), deviation, settings.EIGEN_TOL))
        return results


# --------------------------------------------------------------------------------
#       Identities End
# --------------------------------------------------------------------------------
