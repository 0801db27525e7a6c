"""
Spin-S XXZ chain with kink boundary fields, and its conjugation onto the
profile generator.

Spins are stored as heights w = m + S in [0, 2S]; a sector of S^3_tot = n is
the composition basis of H parts capped at 2S summing to SH + n. Spin and
sector labels are carried as twice-integers.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from scipy.special import gammaln, logsumexp

from app.core.config import settings
from app.core.logging import Logger
from app.framework.errors import EquivalenceMismatch, InvalidParams
from app.framework.operator import ReversibleOperator
from app.services.operators.lattice import chain_bonds, profile_generator
from app.services.state_space import CompositionBasis, EnsembleParams

logger = Logger(name="XXZ")

Bond = Tuple[int, int]



# --------------------------------------------------------------------------------
#       Parameters Start
# --------------------------------------------------------------------------------


def q_from_anisotropy(Delta: float) -> float:
    return Delta - math.sqrt(Delta * Delta - 1.0)


def anisotropy_from_q(q: float) -> float:
    return 0.5 * (q + 1.0 / q)


class XXZParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    twiceS: int = Field(ge=1)
    H: int = Field(ge=2)
    Delta: float = Field(gt=1.0)
    sector_2n: int = 0

    @model_validator(mode="after")
    def _check_sector(self):
        bound = self.twiceS * self.H
        if abs(self.sector_2n) > bound or (self.sector_2n - bound) % 2:
            raise ValueError(f"2n={self.sector_2n} is not a sector of S={self.twiceS}/2 on H={self.H} sites")
        return self

    @classmethod
    def create(cls, **kwargs) -> XXZParams:
        try:
            return cls(**kwargs)
        except ValidationError as e:
            logger.error(f"[!] Rejected XXZ parameters {kwargs}: {e}")
            raise InvalidParams(f"(XXZParams) Invalid XXZ parameters {kwargs}. (Error: {e})") from e

    @property
    def S(self) -> float:
        return self.twiceS / 2.0

    @property
    def q(self) -> float:
        return q_from_anisotropy(self.Delta)

    @property
    def particles(self) -> int:
        return (self.twiceS * self.H + self.sector_2n) // 2

    @property
    def is_extreme(self) -> bool:
        return abs(self.sector_2n) == self.twiceS * self.H

    def sectors(self) -> Tuple[int, ...]:
        bound = self.twiceS * self.H
        return tuple(range(-bound, bound + 1, 2))

    def with_sector(self, sector_2n: int) -> XXZParams:
        return XXZParams.create(twiceS=self.twiceS, H=self.H, Delta=self.Delta, sector_2n=sector_2n)

    def ensemble(self) -> EnsembleParams:
        """ Stochastic counterpart: L = 2S sticks, N = SH + n particles."""
        return EnsembleParams.create(q=self.q, L=self.twiceS, H=self.H, N=self.particles)


# --------------------------------------------------------------------------------
#       Parameters End
# --------------------------------------------------------------------------------



# --------------------------------------------------------------------------------
#       Bond Hamiltonian Start
# --------------------------------------------------------------------------------


def stair_up(twiceS: int, w: np.ndarray) -> np.ndarray:
    """ c_+(S, m) = sqrt((S - m)(S + m + 1)) at m = w - S"""
    return np.sqrt((twiceS - w) * (w + 1.0))


def stair_down(twiceS: int, w: np.ndarray) -> np.ndarray:
    """ c_-(S, m) = sqrt((S + m)(S - m + 1)) at m = w - S"""
    return np.sqrt(w * (twiceS - w + 1.0))


def bond_energy(twiceS: int, Delta: float, wx: np.ndarray, wy: np.ndarray) -> np.ndarray:
    """ S^2 - m_x m_y + S sqrt(1 - Delta^-2) (m_y - m_x)"""
    S = twiceS / 2.0
    mx, my = wx - S, wy - S
    return S * S - mx * my + S * math.sqrt(1.0 - Delta**-2) * (my - mx)


def bond_hamiltonian(basis: CompositionBasis, bonds: Sequence[Bond], twiceS: int, Delta: float) -> sp.csr_matrix:
    """ Sector matrix of sum over bonds (x, y) of the kink bond Hamiltonian, assembled bond by bond."""
    states = basis.states
    dim = len(basis)
    diagonal = np.zeros(dim)
    rows, cols, vals = [np.arange(dim)], [np.arange(dim)], []

    for x, y in bonds:
        wx, wy = states[:, x].astype(np.float64), states[:, y].astype(np.float64)
        diagonal += bond_energy(twiceS, Delta, wx, wy)
        moves = (
            (+1, (states[:, x] < twiceS) & (states[:, y] > 0), stair_up(twiceS, wx) * stair_down(twiceS, wy)),
            (-1, (states[:, x] > 0) & (states[:, y] < twiceS), stair_down(twiceS, wx) * stair_up(twiceS, wy)),
        )
        for sign, allowed, amplitude in moves:
            active = np.flatnonzero(allowed)
            if active.size == 0:
                continue
            moved = np.array(states[active], copy=True)
            moved[:, x] += sign
            moved[:, y] -= sign
            rows.append(basis.index(moved))
            cols.append(active)
            vals.append(-amplitude[active] / (2.0 * Delta))

    vals.insert(0, diagonal)
    return sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    ).tocsr()


def kink_ground_state(basis: CompositionBasis, levels: np.ndarray, twiceS: int, q: float) -> np.ndarray:
    """ psi(m) = prod_x q^{level_x m_x} sqrt(binom(2S, S + m_x)), unit norm"""
    w = basis.states.astype(np.float64)
    m = w - twiceS / 2.0
    log_binom = gammaln(twiceS + 1.0) - gammaln(w + 1.0) - gammaln(twiceS - w + 1.0)
    log_psi = m @ (np.asarray(levels, dtype=np.float64) * math.log(q)) + 0.5 * log_binom.sum(axis=1)
    return np.exp(log_psi - 0.5 * logsumexp(2.0 * log_psi))


# --------------------------------------------------------------------------------
#       Bond Hamiltonian End
# --------------------------------------------------------------------------------



# --------------------------------------------------------------------------------
#       Chain Start
# --------------------------------------------------------------------------------


def xxz_sector_basis(xxz: XXZParams, cap: Optional[int] = None) -> CompositionBasis:
    return CompositionBasis(xxz.H, xxz.twiceS, xxz.particles, cap=cap)


def xxz_chain_hamiltonian(xxz: XXZParams, cap: Optional[int] = None) -> sp.csr_matrix:
    basis = xxz_sector_basis(xxz, cap=cap)
    matrix = bond_hamiltonian(basis, chain_bonds(xxz.H), xxz.twiceS, xxz.Delta)
    logger.debug(f"[+] XXZ sector matrix for {xxz} (dim={len(basis)})")
    return matrix


def xxz_ground_state(xxz: XXZParams, cap: Optional[int] = None) -> np.ndarray:
    basis = xxz_sector_basis(xxz, cap=cap)
    return kink_ground_state(basis, np.arange(1, xxz.H + 1), xxz.twiceS, xxz.q)


class ConjugationResult(BaseModel):
    """
    U H U^-1 with U phi(w) = phi(w - S) / sqrt(nu_hat(w)), compared entrywise
    with factor * generator of the reference stochastic operator.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    operator: ReversibleOperator
    reference: ReversibleOperator
    conjugated: np.ndarray
    factor: float
    residual: float


def conjugate(hamiltonian: sp.spmatrix, reference: ReversibleOperator, factor: float, label: str, tol: Optional[float] = None) -> ConjugationResult:
    tol = settings.EIGEN_TOL if tol is None else tol
    root = np.sqrt(reference.pi)
    conjugated = (sp.diags(1.0 / root) @ hamiltonian @ sp.diags(root)).toarray()
    expected = factor * reference.generator().toarray()

    residual = float(np.abs(conjugated - expected).max(initial=0.0))
    scale = max(1.0, float(np.abs(expected).max(initial=0.0)))
    if residual > tol * scale:
        logger.error(f"[!] {label}: conjugation residual {residual:.3e} exceeds {tol * scale:.3e}")
        raise EquivalenceMismatch(f"({label}) Conjugated Hamiltonian differs from the stochastic generator by {residual:.3e}.", residual=residual)

    generator = conjugated / factor
    rates = sp.csr_matrix(generator - np.diag(np.diag(generator)))
    operator = ReversibleOperator(reference.pi, rates, label=label, states=reference.states, meta=dict(reference.meta))
    return ConjugationResult(operator=operator, reference=reference, conjugated=conjugated, factor=factor, residual=residual)


def conjugate_to_profile(xxz: XXZParams, cap: Optional[int] = None, tol: Optional[float] = None) -> ConjugationResult:
    """ U_n H U_n^-1 = -(S / Delta) L_hat with L = 2S, N = SH + n"""
    reference = profile_generator(xxz.ensemble(), cap=cap, allow_degenerate=True)
    hamiltonian = xxz_chain_hamiltonian(xxz, cap=cap)
    return conjugate(hamiltonian, reference, -xxz.S / xxz.Delta, f"xxz(2S={xxz.twiceS},H={xxz.H},2n={xxz.sector_2n})", tol)


def stair_identity_residual(xxz: XXZParams, cap: Optional[int] = None) -> float:
    """
    Worst deviation over the sector of
      c_+ c_- sqrt(nu_hat(w^{+,h}) / nu_hat(w)) = w_{+,h}
      2 Delta (bond energy) = w_{+,h} + w_{-,h}
    """
    reference = profile_generator(xxz.ensemble(), cap=cap, allow_degenerate=True)
    basis = reference.meta["basis"]
    states, pi, q, twiceS = basis.states, reference.pi, xxz.q, xxz.twiceS
    worst = 0.0

    for x, y in chain_bonds(xxz.H):
        wx, wy = states[:, x].astype(np.float64), states[:, y].astype(np.float64)
        w_plus = wy * (twiceS - wx) / q
        w_minus = q * wx * (twiceS - wy)
        gamma = 2.0 * xxz.Delta * bond_energy(twiceS, xxz.Delta, wx, wy)
        worst = max(worst, float(np.abs(gamma - w_plus - w_minus).max()))

        active = np.flatnonzero(w_plus > 0)
        if active.size:
            moved = np.array(states[active], copy=True)
            moved[:, x] += 1
            moved[:, y] -= 1
            ratio = np.sqrt(pi[basis.index(moved)] / pi[active])
            stair = stair_up(twiceS, wx[active]) * stair_down(twiceS, wy[active]) * ratio
            worst = max(worst, float(np.abs(stair - w_plus[active]).max()))

    return worst


# --------------------------------------------------------------------------------
#       Chain End
# --------------------------------------------------------------------------------
