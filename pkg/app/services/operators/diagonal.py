"""
Interfaces along the diagonal: the region, its XXZ Hamiltonian, the height
generator on {0..2S}^region and its lift to an exclusion process with 2S
copies of every site.
"""

from __future__ import annotations

from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from app.core.logging import Logger
from app.framework.errors import DegenerateSector, InvalidParams
from app.framework.operator import ReversibleOperator
from app.services.operators.lattice import exchange_rates, profile_rates
from app.services.operators.xxz import (
    ConjugationResult,
    bond_hamiltonian,
    conjugate,
    kink_ground_state,
    q_from_anisotropy,
)
from app.services.state_space import CompositionBasis, LatticeBasis, log_profile_weights, normalize_log_weights

logger = Logger(name="Diagonal")



# --------------------------------------------------------------------------------
#       Region Start
# --------------------------------------------------------------------------------


class DiagonalRegion(BaseModel):
    model_config = ConfigDict(frozen=True)

    R: int
    H: int
    sites: Tuple[Tuple[int, int], ...]
    bonds: Tuple[Tuple[int, int], ...]

    @property
    def levels(self) -> np.ndarray:
        return np.array([x1 + x2 for x1, x2 in self.sites], dtype=np.int64)

    @property
    def tilts(self) -> np.ndarray:
        return np.array([x1 - x2 for x1, x2 in self.sites], dtype=np.int64)

    @property
    def size(self) -> int:
        return len(self.sites)

    def chi(self, t: int, level: int) -> int:
        return int(abs(t) <= self.R and 1 <= level <= self.H and (t - level) % 2 == 0)

    def bond_sites(self) -> Tuple[Tuple[Tuple[int, int], Tuple[int, int]], ...]:
        return tuple((self.sites[x], self.sites[y]) for x, y in self.bonds)


def diagonal_region(R: int, H: int) -> DiagonalRegion:
    """
    Sites x with -R <= x1 - x2 <= R and 1 <= x1 + x2 <= H, ordered by level then
    tilt; bonds (x, y) join lattice neighbours with level(y) = level(x) + 1.
    """
    if R < 0 or H < 1:
        raise InvalidParams(f"(Diagonal) Region needs R >= 0 and H >= 1, got R={R}, H={H}.")

    sites = []
    for level in range(1, H + 1):
        for t in range(-R, R + 1):
            if (t - level) % 2 == 0:
                sites.append(((level + t) // 2, (level - t) // 2))

    position = {site: k for k, site in enumerate(sites)}
    bonds = []
    for k, (x1, x2) in enumerate(sites):
        for neighbour in ((x1 + 1, x2), (x1, x2 + 1)):
            if neighbour in position:
                bonds.append((k, position[neighbour]))

    region = DiagonalRegion(R=R, H=H, sites=tuple(sites), bonds=tuple(bonds))
    logger.debug(f"[+] Region R={R}, H={H}: {len(sites)} sites, {len(bonds)} bonds")
    return region


def diagonal_particles(region: DiagonalRegion, twiceS: int, sector_2n: int) -> int:
    bound = twiceS * region.size
    if abs(sector_2n) > bound or (sector_2n - bound) % 2:
        raise InvalidParams(f"(Diagonal) 2n={sector_2n} is not a sector of S={twiceS}/2 on {region.size} sites.")
    return (bound + sector_2n) // 2


# --------------------------------------------------------------------------------
#       Region End
# --------------------------------------------------------------------------------



# --------------------------------------------------------------------------------
#       Hamiltonian Start
# --------------------------------------------------------------------------------


def _check_anisotropy(Delta: float):
    if not Delta > 1.0:
        raise InvalidParams(f"(Diagonal) Anisotropy must exceed 1, got Delta={Delta}.")


def diagonal_sector_basis(region: DiagonalRegion, twiceS: int, sector_2n: int, cap: Optional[int] = None) -> CompositionBasis:
    return CompositionBasis(region.size, twiceS, diagonal_particles(region, twiceS, sector_2n), cap=cap)


def diagonal_hamiltonian(region: DiagonalRegion, twiceS: int, Delta: float, sector_2n: int, cap: Optional[int] = None):
    _check_anisotropy(Delta)
    basis = diagonal_sector_basis(region, twiceS, sector_2n, cap=cap)
    return bond_hamiltonian(basis, region.bonds, twiceS, Delta)


def diagonal_ground_state(region: DiagonalRegion, twiceS: int, Delta: float, sector_2n: int, cap: Optional[int] = None) -> np.ndarray:
    _check_anisotropy(Delta)
    basis = diagonal_sector_basis(region, twiceS, sector_2n, cap=cap)
    return kink_ground_state(basis, region.levels, twiceS, q_from_anisotropy(Delta))


# --------------------------------------------------------------------------------
#       Hamiltonian End
# --------------------------------------------------------------------------------



# --------------------------------------------------------------------------------
#       Generators Start
# --------------------------------------------------------------------------------


def diagonal_profile_generator(region: DiagonalRegion, twiceS: int, Delta: float, N: int, cap: Optional[int] = None, allow_degenerate: bool = False) -> ReversibleOperator:
    """ Height exchanges across the bonds of the region, reversible for nu_hat_{region,N}."""
    _check_anisotropy(Delta)
    if N in (0, twiceS * region.size) and not allow_degenerate:
        raise DegenerateSector(f"(Diagonal) Sector N={N} of the region is a single state.")

    q = q_from_anisotropy(Delta)
    basis = CompositionBasis(region.size, twiceS, N, cap=cap)
    pi = normalize_log_weights(log_profile_weights(basis.states, twiceS, region.levels, q))
    rates = profile_rates(basis, region.bonds, twiceS, q, 1.0)

    logger.info(f"[+] Built diagonal height generator R={region.R}, H={region.H}, 2S={twiceS}, N={N} (dim={len(basis)})")
    return ReversibleOperator(
        pi,
        rates,
        label=f"diagonal-profile(R={region.R},H={region.H},2S={twiceS},N={N})",
        states=basis.states,
        meta={"region": region, "basis": basis, "twiceS": twiceS, "q": q},
    )


def lifted_diagonal_generator(region: DiagonalRegion, twiceS: int, Delta: float, N: int, cap: Optional[int] = None, allow_degenerate: bool = False) -> ReversibleOperator:
    """
    Exclusion process on 2S copies of every site; copy i of site x is the
    bit x * 2S + i. Exchanges across region bonds have rate q^{a(i,x) - a(j,y)} / 2S.
    """
    _check_anisotropy(Delta)
    n_sites = twiceS * region.size
    if N in (0, n_sites) and not allow_degenerate:
        raise DegenerateSector(f"(Diagonal) Sector N={N} of the lifted region is a single state.")

    q = q_from_anisotropy(Delta)
    basis = LatticeBasis(n_sites, N, np.repeat(region.levels, twiceS), L=twiceS, H=region.size, cap=cap)
    pi = normalize_log_weights(basis.log_level_weights(q))
    bonds = [
        (x * twiceS + i, y * twiceS + j)
        for x, y in region.bonds
        for i in range(twiceS)
        for j in range(twiceS)
    ]
    rates = exchange_rates(basis, bonds, q, 1.0 / twiceS)

    logger.info(f"[+] Built lifted diagonal generator R={region.R}, H={region.H}, 2S={twiceS}, N={N} (dim={len(basis)})")
    return ReversibleOperator(
        pi,
        rates,
        label=f"diagonal-lifted(R={region.R},H={region.H},2S={twiceS},N={N})",
        states=basis.states,
        meta={"region": region, "basis": basis, "twiceS": twiceS, "q": q},
    )


def site_heights(lifted: ReversibleOperator) -> np.ndarray:
    """ Number of occupied copies of every region site, shape (dim, sites)."""
    basis: LatticeBasis = lifted.meta["basis"]
    return basis.group_counts(np.repeat(np.arange(lifted.meta["region"].size), lifted.meta["twiceS"]))


def conjugate_diagonal(region: DiagonalRegion, twiceS: int, Delta: float, sector_2n: int, cap: Optional[int] = None, tol: Optional[float] = None) -> ConjugationResult:
    """ H_R = -(1 / 2 Delta) G_hat under the ground-state transform."""
    N = diagonal_particles(region, twiceS, sector_2n)
    reference = diagonal_profile_generator(region, twiceS, Delta, N, cap=cap, allow_degenerate=True)
    hamiltonian = diagonal_hamiltonian(region, twiceS, Delta, sector_2n, cap=cap)
    return conjugate(hamiltonian, reference, -1.0 / (2.0 * Delta), f"diagonal(R={region.R},H={region.H},2S={twiceS},2n={sector_2n})", tol)


# --------------------------------------------------------------------------------
#       Generators End
# --------------------------------------------------------------------------------
