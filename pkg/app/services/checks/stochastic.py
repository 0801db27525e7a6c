from typing import List

import numpy as np

from app.core.config import settings
from app.core.logging import Logger
from app.framework.checks import Check, CheckResult, register_check
from app.framework.operator import ReversibleOperator
from app.services.checks.grid import GRID_Q, label, sectors
from app.services.operators.kernels import bernoulli_laplace, bernoulli_laplace_spectrum, operator_K, operator_P
from app.services.operators.lattice import full_generator, lumping_deviation, modified_generator, profile_generator
from app.services.spectral.solvers import dense_gap
from app.services.spectral.variational import random_functions, spectrum_inclusion_deviation
from app.services.state_space import (
    EnsembleParams,
    build_partition_table,
    enumerate_lattice_configs,
    nu_weights,
    particle_hole_image,
    stick_occupation_kernel,
)

logger = Logger(name="StochasticChecks")


def _spectrum(op: ReversibleOperator) -> List[float]:
    return [0.0] if op.dim == 1 else dense_gap(op).eigenvalues


class OperatorCheck(Check):
    """ Checks that read one operator per instance and can be handed a perturbed copy."""

    def operator(self, op: ReversibleOperator) -> ReversibleOperator:
        return op.perturbed() if self.corrupt else op



# --------------------------------------------------------------------------------
#       Operator K Start
# --------------------------------------------------------------------------------


@register_check
class KSpectrumCheck(OperatorCheck):
    name: str = "k-eigenfunction"
    description: str = "K 1 = 1 and K n_bar = -n_bar / (L-1) on every sector."
    tags: list[str] = ["k-spectrum", "operators"]

    def run(self) -> List[CheckResult]:
        results = []
        for params in sectors(min_L=2):
            op = operator_K(params)
            if op.dim < 2:
                continue
            K = self.operator(op).kernel().toarray()
            nbar = op.meta["nbar"]
            deviation = max(
                float(np.abs(K @ np.ones(op.dim) - 1.0).max()),
                float(np.abs(K @ nbar + nbar / (params.L - 1)).max()),
            )
            results.append(self.result(label(params), deviation, settings.EIGEN_TOL))
        return results


# --------------------------------------------------------------------------------
#       Operator K End
# --------------------------------------------------------------------------------



# --------------------------------------------------------------------------------
#       Measures Start
# --------------------------------------------------------------------------------


@register_check
class StickMeasureCheck(Check):
    name: str = "stick-marginal"
    description: str = "nu_0 from the partition table equals the enumerated marginal of one stick; particle-hole reflection."
    tags: list[str] = ["state-space"]

    def run(self) -> List[CheckResult]:
        results = []
        for params in sectors(min_L=2, half=True):
            table = build_partition_table(params)
            kernel = stick_occupation_kernel(params, table, conditional=False)
            basis = enumerate_lattice_configs(params)
            pi = nu_weights(basis, params, table)
            if self.corrupt:
                pi = pi * np.linspace(1.0, 1.5, pi.size)
            counts = basis.group_counts(np.tile(np.arange(params.L), params.H))[:, 0]
            marginal = np.bincount(counts, weights=pi, minlength=params.H + 1)[kernel.n_values]

            image = particle_hole_image(params)
            reflected = stick_occupation_kernel(image, build_partition_table(image), conditional=False)
            mirror = dict(zip((params.H - reflected.n_values).tolist(), reflected.nu0))
            symmetry = max(abs(mirror[int(n)] - p) for n, p in zip(kernel.n_values, kernel.nu0))

            deviation = max(float(np.abs(marginal - kernel.nu0).max()), symmetry, abs(float(pi.sum()) - 1.0))
            results.append(self.result(label(params), deviation, settings.EIGEN_TOL))
        return results


# --------------------------------------------------------------------------------
#       Measures End
# --------------------------------------------------------------------------------



# --------------------------------------------------------------------------------
#       Reversibility Start
# --------------------------------------------------------------------------------


@register_check
class DetailedBalanceCheck(OperatorCheck):
    name: str = "detailed-balance"
    description: str = "Row sums, nonnegative rates and detailed balance of every operator family."
    tags: list[str] = ["detailed-balance", "operators"]

    def _families(self, params: EnsembleParams) -> List[ReversibleOperator]:
        ops = [full_generator(params), profile_generator(params), operator_P(params)]
        if params.L >= 2:
            ops.append(operator_K(params))
        if params.L >= 3:
            ops.append(modified_generator(params))
        return ops

    def run(self) -> List[CheckResult]:
        results = []
        for params in sectors(half=True, L_values=(1, 2, 3)):
            for op in self._families(params):
                report = self.operator(op).check()
                results.append(self.result(op.label, max(report.values()), settings.EIGEN_TOL))
        return results


# --------------------------------------------------------------------------------
#       Reversibility End
# --------------------------------------------------------------------------------



# --------------------------------------------------------------------------------
#       Lumping Start
# --------------------------------------------------------------------------------


@register_check
class LumpingCheck(OperatorCheck):
    name: str = "lumping"
    description: str = "Symmetric functions lump exactly and the spectrum of L_hat is a sub-multiset of that of L."
    tags: list[str] = ["lumping"]

    def run(self) -> List[CheckResult]:
        results = []
        for params in sectors(half=True):
            full = self.operator(full_generator(params))
            profile = profile_generator(params)
            f_hat = random_functions(profile.dim, 1)[0]
            lumped = lumping_deviation(full, profile, f_hat)
            inclusion = spectrum_inclusion_deviation(_spectrum(profile), _spectrum(full))
            results.append(self.result(label(params), max(lumped, inclusion), settings.EIGEN_TOL))
        return results


# --------------------------------------------------------------------------------
#       Lumping End
# --------------------------------------------------------------------------------



# --------------------------------------------------------------------------------
#       Closed Forms Start
# --------------------------------------------------------------------------------


@register_check
class BernoulliLaplaceCheck(OperatorCheck):
    name: str = "bernoulli-laplace"
    description: str = "Complete-graph exchange: closed-form spectrum and gamma-tilde = 1/2."
    tags: list[str] = ["bernoulli-laplace", "closed-form"]

    def run(self) -> List[CheckResult]:
        results = []
        for L in (3, 4, 5):
            for N in range(1, L):
                report = dense_gap(self.operator(bernoulli_laplace(L, N)))
                expected = np.concatenate([np.full(m, value) for value, m in bernoulli_laplace_spectrum(L, N)])
                deviation = max(
                    float(np.abs(np.sort(expected) - np.asarray(report.eigenvalues)).max()),
                    abs(report.gamma - 0.5),
                )
                results.append(self.result(f"L={L},N={N}", deviation, settings.EIGEN_TOL))
        return results


@register_check
class TwoStateGapCheck(OperatorCheck):
    name: str = "two-state-gap"
    description: str = "gap(L=1, H=2, N=1) = q + 1/q."
    tags: list[str] = ["closed-form"]

    def run(self) -> List[CheckResult]:
        results = []
        for q in GRID_Q:
            params = EnsembleParams.create(q=q, L=1, H=2, N=1)
            report = dense_gap(self.operator(full_generator(params)))
            results.append(self.result(label(params), abs(report.gap - (q + 1.0 / q)), settings.CHECK_TOL))
        return results


# --------------------------------------------------------------------------------
#       Closed Forms End
# --------------------------------------------------------------------------------
