from typing import List

import numpy as np
import scipy.linalg as la

from app.core.config import settings
from app.framework.checks import Check, CheckResult, register_check
from app.framework.errors import EquivalenceMismatch
from app.services.checks.grid import GRID_DELTA, chains, xxz_label
from app.services.operators.diagonal import (
    conjugate_diagonal,
    diagonal_ground_state,
    diagonal_hamiltonian,
    diagonal_particles,
    diagonal_profile_generator,
    diagonal_region,
    lifted_diagonal_generator,
    site_heights,
)
from app.services.operators.lattice import profile_generator
from app.services.operators.xxz import (
    XXZParams,
    conjugate,
    xxz_chain_hamiltonian,
    xxz_ground_state,
    stair_identity_residual,
)
from app.services.spectral.solvers import dense_gap
from app.services.spectral.variational import random_functions, spectrum_inclusion_deviation

DIAGONAL_R = (1, 2)
DIAGONAL_H = (2, 3)
DIAGONAL_DELTA = (1.25, 2.0)


def _residual(conjugation) -> float:
    try:
        return conjugation().residual
    except EquivalenceMismatch as e:
        return e.residual



# --------------------------------------------------------------------------------
#       Chain Start
# --------------------------------------------------------------------------------


@register_check
class XXZEquivalenceCheck(Check):
    name: str = "xxz-equivalence"
    description: str = "U H U^-1 = -(S/Delta) L_hat, matching spectra, annihilated ground state and stair identities."
    tags: list[str] = ["xxz-equivalence"]

    def run(self) -> List[CheckResult]:
        results = []
        for twiceS, H, Delta in chains():
            base = XXZParams.create(twiceS=twiceS, H=H, Delta=Delta, sector_2n=(twiceS * H) % 2)
            for sector_2n in base.sectors():
                xxz = base.with_sector(sector_2n)
                hamiltonian = xxz_chain_hamiltonian(xxz)
                reference = profile_generator(xxz.ensemble(), allow_degenerate=True)
                if self.corrupt:
                    reference = reference.perturbed()
                factor = -xxz.S / xxz.Delta

                conjugation = _residual(lambda: conjugate(hamiltonian, reference, factor, xxz_label(twiceS, H, Delta, sector_2n)))
                ground = float(np.linalg.norm(hamiltonian @ xxz_ground_state(xxz)))
                spectrum = 0.0
                if reference.dim > 1:
                    energies = la.eigvalsh(hamiltonian.toarray())
                    stochastic = abs(factor) * np.asarray(dense_gap(reference).eigenvalues)
                    spectrum = spectrum_inclusion_deviation(stochastic, energies)

                deviation = max(conjugation, ground, spectrum, stair_identity_residual(xxz))
                results.append(self.result(xxz_label(twiceS, H, Delta, sector_2n), deviation, settings.EIGEN_TOL))
        return results


@register_check
class KinkGapCheck(Check):
    name: str = "kink-unit-gap"
    description: str = "S = 1/2, H = 2, n = 0: the Hamiltonian gap is exactly 1."
    tags: list[str] = ["xxz-equivalence", "closed-form"]

    def run(self) -> List[CheckResult]:
        results = []
        for Delta in GRID_DELTA:
            xxz = XXZParams.create(twiceS=1, H=2, Delta=Delta, sector_2n=0)
            hamiltonian = xxz_chain_hamiltonian(xxz).toarray()
            if self.corrupt:
                hamiltonian[0, 0] *= 1.5
            energies = la.eigvalsh(hamiltonian)
            results.append(self.result(xxz_label(1, 2, Delta, 0), abs(float(energies[1] - energies[0]) - 1.0), settings.CHECK_TOL))
        return results


# --------------------------------------------------------------------------------
#       Chain End
# --------------------------------------------------------------------------------



# --------------------------------------------------------------------------------
#       Diagonal Start
# --------------------------------------------------------------------------------


@register_check
class DiagonalEquivalenceCheck(Check):
    name: str = "diagonal-equivalence"
    description: str = "Diagonal interface: ground-state transform, annihilated kink state and lumping of the 2S-fold lift."
    tags: list[str] = ["xxz-equivalence", "diagonal"]

    def run(self) -> List[CheckResult]:
        results = []
        for twiceS, Delta in ((1, DIAGONAL_DELTA[0]), (1, DIAGONAL_DELTA[1]), (2, DIAGONAL_DELTA[1])):
            for R in DIAGONAL_R:
                for H in DIAGONAL_H:
                    region = diagonal_region(R, H)
                    sector_2n = (twiceS * region.size) % 2
                    N = diagonal_particles(region, twiceS, sector_2n)

                    conjugation = _residual(lambda: conjugate_diagonal(region, twiceS, Delta, sector_2n))
                    hamiltonian = diagonal_hamiltonian(region, twiceS, Delta, sector_2n)
                    psi = diagonal_ground_state(region, twiceS, Delta, sector_2n)
                    ground = float(np.linalg.norm(hamiltonian @ psi))

                    heights = diagonal_profile_generator(region, twiceS, Delta, N)
                    lifted = lifted_diagonal_generator(region, twiceS, Delta, N)
                    if self.corrupt:
                        lifted = lifted.perturbed()
                    index = heights.meta["basis"].index(site_heights(lifted))
                    f_hat = random_functions(heights.dim, 1)[0]
                    lumped = float(np.abs(twiceS * lifted.apply(f_hat[index]) - heights.apply(f_hat)[index]).max())

                    deviation = max(conjugation, ground, lumped)
                    results.append(self.result(f"R={R},H={H},2S={twiceS},Delta={Delta},2n={sector_2n}", deviation, settings.EIGEN_TOL))
        return results


# --------------------------------------------------------------------------------
#       Diagonal End
# --------------------------------------------------------------------------------
