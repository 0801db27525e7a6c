"""
Exclusion generators on the rectangle and their lumped profile chain.
"""

from __future__ import annotations

from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from app.core.constants import FULL_FORM, MODIFIED_FORM
from app.core.logging import Logger
from app.framework.errors import DegenerateSector, InvalidParams
from app.framework.operator import ReversibleOperator
from app.services.state_space import (
    CompositionBasis,
    EnsembleParams,
    LatticeBasis,
    build_partition_table,
    enumerate_lattice_configs,
    enumerate_profiles,
    hat_nu_weights,
    nu_weights,
    site_index,
)

logger = Logger(name="LatticeOperators")

Bond = Tuple[int, int]



# --------------------------------------------------------------------------------
#       Rate Assembly Start
# --------------------------------------------------------------------------------


def exchange_rates(basis: LatticeBasis, bonds: Sequence[Bond], q: float, prefactor: float) -> sp.csr_matrix:
    """
    Particle exchanges across oriented bonds (lower, upper) of a bitmask basis.

    A particle moving from the lower to the upper site jumps with rate
    prefactor * q, the reverse move with rate prefactor / q.
    """
    states = basis.states
    rows: List[np.ndarray] = []
    cols: List[np.ndarray] = []
    vals: List[np.ndarray] = []

    for lower, upper in bonds:
        low_bit = (states >> np.int64(lower)) & 1
        high_bit = (states >> np.int64(upper)) & 1
        movable = np.flatnonzero(low_bit != high_bit)
        if movable.size == 0:
            continue
        swap = np.int64((1 << lower) | (1 << upper))
        targets = basis.index(states[movable] ^ swap)
        upward = low_bit[movable] == 1
        rows.append(movable)
        cols.append(targets)
        vals.append(np.where(upward, prefactor * q, prefactor / q))

    dim = len(basis)
    if not rows:
        return sp.csr_matrix((dim, dim))
    return sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    ).tocsr()


def profile_rates(basis: CompositionBasis, bonds: Sequence[Bond], part_cap: int, q: float, prefactor: float) -> sp.csr_matrix:
    """
    Height exchanges across oriented bonds (x, y) of a composition basis.

    (w_x, w_y) -> (w_x + 1, w_y - 1) with rate prefactor * q^-1 * w_y * (cap - w_x)
    (w_x, w_y) -> (w_x - 1, w_y + 1) with rate prefactor * q * w_x * (cap - w_y)
    """
    states = basis.states
    rows: List[np.ndarray] = []
    cols: List[np.ndarray] = []
    vals: List[np.ndarray] = []

    for x, y in bonds:
        wx, wy = states[:, x], states[:, y]
        for sign, rate in ((+1, wy * (part_cap - wx) / q), (-1, q * wx * (part_cap - wy))):
            active = np.flatnonzero(rate > 0)
            if active.size == 0:
                continue
            moved = np.array(states[active], copy=True)
            moved[:, x] += sign
            moved[:, y] -= sign
            rows.append(active)
            cols.append(basis.index(moved))
            vals.append(prefactor * rate[active])

    dim = len(basis)
    if not rows:
        return sp.csr_matrix((dim, dim))
    return sp.coo_matrix(
        (np.concatenate(vals).astype(np.float64), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    ).tocsr()


def rectangle_bonds(L: int, H: int, same_stick: bool = True) -> List[Bond]:
    return [
        (site_index(L, i, h), site_index(L, j, h + 1))
        for h in range(1, H)
        for i in range(1, L + 1)
        for j in range(1, L + 1)
        if same_stick or i != j
    ]


def chain_bonds(H: int) -> List[Bond]:
    return [(h, h + 1) for h in range(H - 1)]


# --------------------------------------------------------------------------------
#       Rate Assembly End
# --------------------------------------------------------------------------------



# --------------------------------------------------------------------------------
#       Generators Start
# --------------------------------------------------------------------------------


def _lattice_generator(params: EnsembleParams, same_stick: bool, form: str, cap: Optional[int], allow_degenerate: bool) -> ReversibleOperator:
    if params.is_degenerate and not allow_degenerate:
        raise DegenerateSector(f"(LatticeOperators) Sector N={params.N} of {params.L}x{params.H} has a single configuration.")

    basis = enumerate_lattice_configs(params, cap=cap)
    table = build_partition_table(params)
    pi = nu_weights(basis, params, table)
    rates = exchange_rates(basis, rectangle_bonds(params.L, params.H, same_stick), params.q, 1.0 / params.L)

    logger.info(f"[+] Built {form} generator for {params} (dim={len(basis)}, nnz={rates.nnz})")
    return ReversibleOperator(
        pi,
        rates,
        label=f"{form}(q={params.q},L={params.L},H={params.H},N={params.N})",
        states=basis.states,
        meta={"params": params, "form": form, "basis": basis},
    )


def full_generator(params: EnsembleParams, cap: Optional[int] = None, allow_degenerate: bool = False) -> ReversibleOperator:
    return _lattice_generator(params, True, FULL_FORM, cap, allow_degenerate)


def modified_generator(params: EnsembleParams, cap: Optional[int] = None, allow_non_ergodic: bool = False, allow_degenerate: bool = False) -> ReversibleOperator:
    """ Generator whose Dirichlet form keeps only exchanges between distinct sticks."""
    if params.L < 3:
        if not allow_non_ergodic:
            raise InvalidParams(f"(LatticeOperators) The modified form is not ergodic for L={params.L} < 3.")
        logger.warning(f"[!] Modified generator requested at L={params.L}; the sector splits into several classes.")
    return _lattice_generator(params, False, MODIFIED_FORM, cap, allow_degenerate)


def dirichlet_form(op: ReversibleOperator, f: np.ndarray) -> float:
    return op.dirichlet_form(f)


def modified_dirichlet_form(params: EnsembleParams, f: np.ndarray, allow_non_ergodic: bool = False) -> float:
    return modified_generator(params, allow_non_ergodic=allow_non_ergodic).dirichlet_form(f)


def profile_generator(params: EnsembleParams, cap: Optional[int] = None, allow_degenerate: bool = False) -> ReversibleOperator:
    if params.is_degenerate and not allow_degenerate:
        raise DegenerateSector(f"(LatticeOperators) Profile sector N={params.N} of {params.L}x{params.H} has a single profile.")

    basis = enumerate_profiles(params, cap=cap)
    table = build_partition_table(params)
    pi = hat_nu_weights(basis, params, table)
    rates = profile_rates(basis, chain_bonds(params.H), params.L, params.q, 1.0 / params.L)

    logger.info(f"[+] Built profile generator for {params} (dim={len(basis)})")
    return ReversibleOperator(
        pi,
        rates,
        label=f"profile(q={params.q},L={params.L},H={params.H},N={params.N})",
        states=basis.states,
        meta={"params": params, "form": "profile", "basis": basis},
    )


# --------------------------------------------------------------------------------
#       Generators End
# --------------------------------------------------------------------------------



# --------------------------------------------------------------------------------
#       Lumping Start
# --------------------------------------------------------------------------------


def profile_indices(lattice: LatticeBasis, profiles: CompositionBasis) -> np.ndarray:
    """ Position of profile_of(alpha) in the profile basis, for every alpha."""
    return profiles.index(lattice.level_counts())


def lift_symmetric(full: ReversibleOperator, profile: ReversibleOperator, f_hat: np.ndarray) -> np.ndarray:
    """ f(alpha) = f_hat(profile_of(alpha))"""
    f_hat = np.asarray(f_hat, dtype=np.float64)
    return f_hat[profile_indices(full.meta["basis"], profile.meta["basis"])]


def lumping_deviation(full: ReversibleOperator, profile: ReversibleOperator, f_hat: np.ndarray) -> float:
    """ max |(L f)(alpha) - (L_hat f_hat)(profile_of(alpha))| for a symmetric f"""
    index = profile_indices(full.meta["basis"], profile.meta["basis"])
    lifted = np.asarray(f_hat, dtype=np.float64)[index]
    return float(np.abs(full.apply(lifted) - profile.apply(f_hat)[index]).max())


# --------------------------------------------------------------------------------
#       Lumping End
# --------------------------------------------------------------------------------
