"""
Stochastic kernels of the stick decomposition (K and P) and the
Bernoulli-Laplace exchange model.
"""

from __future__ import annotations

import math
from itertools import combinations
from typing import List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from app.core.constants import BERNOULLI_LAPLACE_FORM, KERNEL_KIND
from app.core.logging import Logger
from app.framework.errors import InvalidParams
from app.framework.operator import ReversibleOperator
from app.services.operators.lattice import exchange_rates
from app.services.state_space import (
    EnsembleParams,
    LatticeBasis,
    build_partition_table,
    enumerate_lattice_configs,
    nu_weights,
    site_index,
    stick_occupation_kernel,
)

logger = Logger(name="KernelOperators")



# --------------------------------------------------------------------------------
#       Operator K Start
# --------------------------------------------------------------------------------


def operator_K(params: EnsembleParams) -> ReversibleOperator:
    """
    Random walk of the occupation of one stick: K(n, m) = nu(m | n).

    States are the feasible occupations n in [n-, n+], the stationary law is
    nu_0 and `meta["nbar"]` holds n - rho.
    """
    if params.L < 2:
        raise InvalidParams(f"(KernelOperators) Operator K needs L >= 2, got L={params.L}.")

    table = build_partition_table(params)
    kernel = stick_occupation_kernel(params, table)
    logger.debug(f"[+] Built K for {params} on n in [{kernel.n_values[0]}, {kernel.n_values[-1]}]")
    return ReversibleOperator(
        kernel.nu0,
        sp.csr_matrix(kernel.cond),
        label=f"K(q={params.q},L={params.L},H={params.H},N={params.N})",
        kind=KERNEL_KIND,
        states=kernel.n_values,
        meta={"params": params, "nbar": kernel.nbar.astype(np.float64), "stochastic": kernel.cond},
    )


# --------------------------------------------------------------------------------
#       Operator K End
# --------------------------------------------------------------------------------



# --------------------------------------------------------------------------------
#       Operator P Start
# --------------------------------------------------------------------------------


def stick_masks(L: int, H: int) -> List[int]:
    return [sum(1 << site_index(L, i, h) for h in range(1, H + 1)) for i in range(1, L + 1)]


def stick_patterns(basis: LatticeBasis, L: int, H: int) -> np.ndarray:
    """ Occupation pattern of each stick encoded as an integer, shape (dim, L)."""
    patterns = np.zeros((len(basis), L), dtype=np.int64)
    for i in range(1, L + 1):
        for h in range(1, H + 1):
            bit = (basis.states >> np.int64(site_index(L, i, h))) & 1
            patterns[:, i - 1] |= bit << np.int64(h - 1)
    return patterns


def stick_counts(basis: LatticeBasis, L: int, H: int) -> np.ndarray:
    """ n_i for every configuration, shape (dim, L)."""
    return np.stack([np.bitwise_count(basis.states & np.int64(m)).astype(np.int64) for m in stick_masks(L, H)], axis=1)


def conditional_expectation(pi: np.ndarray, pattern: np.ndarray, f: np.ndarray) -> np.ndarray:
    """ nu(f | F_k) as a state vector, F_k generated by the stick pattern column `pattern`."""
    _, groups = np.unique(pattern, return_inverse=True)
    mass = np.bincount(groups, weights=pi)
    return (np.bincount(groups, weights=pi * f) / mass)[groups]


def conditional_variance(pi: np.ndarray, pattern: np.ndarray, f: np.ndarray) -> np.ndarray:
    mean = conditional_expectation(pi, pattern, f)
    return conditional_expectation(pi, pattern, f * f) - mean**2


def operator_P(params: EnsembleParams, cap: Optional[int] = None) -> ReversibleOperator:
    """ P f = (1/L) sum_k nu(f | F_k), materialized as a stochastic matrix on the sector."""
    basis = enumerate_lattice_configs(params, cap=cap)
    table = build_partition_table(params)
    pi = nu_weights(basis, params, table)
    patterns = stick_patterns(basis, params.L, params.H)

    rows: List[np.ndarray] = []
    cols: List[np.ndarray] = []
    vals: List[np.ndarray] = []
    for k in range(params.L):
        _, groups = np.unique(patterns[:, k], return_inverse=True)
        order = np.argsort(groups, kind="stable")
        bounds = np.flatnonzero(np.diff(groups[order])) + 1
        for members in np.split(order, bounds):
            weights = pi[members] / pi[members].sum()
            rows.append(np.repeat(members, members.size))
            cols.append(np.tile(members, members.size))
            vals.append(np.tile(weights, members.size) / params.L)

    dim = len(basis)
    stochastic = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    ).tocsr()
    stochastic.sum_duplicates()

    logger.info(f"[+] Built P for {params} (dim={dim}, nnz={stochastic.nnz})")
    return ReversibleOperator(
        pi,
        stochastic,
        label=f"P(q={params.q},L={params.L},H={params.H},N={params.N})",
        kind=KERNEL_KIND,
        states=basis.states,
        meta={"params": params, "basis": basis, "patterns": patterns, "stochastic": stochastic},
    )


def class_a_function(params: EnsembleParams, basis: LatticeBasis, coefficients: np.ndarray) -> np.ndarray:
    """ f = sum_l a_l (n_l - rho)"""
    coefficients = np.asarray(coefficients, dtype=np.float64)
    if coefficients.shape != (params.L,):
        raise InvalidParams(f"(KernelOperators) Expected {params.L} coefficients, got {coefficients.shape}.")
    return (stick_counts(basis, params.L, params.H) - params.rho) @ coefficients


# --------------------------------------------------------------------------------
#       Operator P End
# --------------------------------------------------------------------------------



# --------------------------------------------------------------------------------
#       Bernoulli-Laplace Start
# --------------------------------------------------------------------------------


def bernoulli_laplace(L: int, N: int) -> ReversibleOperator:
    """
    Symmetric exclusion on the complete graph of L sites with N particles.

    Rates are 2/L per unordered pair so that the Dirichlet form is
    (1/L) sum_{i != j} E_ij with E_ij = 1/2 nu[(grad_ij f)^2].
    """
    if L < 2 or not 1 <= N <= L - 1:
        raise InvalidParams(f"(KernelOperators) Bernoulli-Laplace needs 1 <= N <= L-1, got L={L}, N={N}.")

    basis = LatticeBasis(L, N, np.ones(L, dtype=np.int64), L=L, H=1)
    pi = np.full(len(basis), 1.0 / len(basis))
    rates = exchange_rates(basis, list(combinations(range(L), 2)), 1.0, 2.0 / L)
    return ReversibleOperator(
        pi,
        rates,
        label=f"{BERNOULLI_LAPLACE_FORM}(L={L},N={N})",
        states=basis.states,
        meta={"form": BERNOULLI_LAPLACE_FORM, "basis": basis, "L": L, "N": N},
    )


def bernoulli_laplace_spectrum(L: int, N: int) -> List[Tuple[float, int]]:
    """ Eigenvalues (2/L) i (L + 1 - i) with multiplicity binom(L, i) - binom(L, i - 1)."""
    if L < 2 or not 1 <= N <= L - 1:
        raise InvalidParams(f"(KernelOperators) Bernoulli-Laplace needs 1 <= N <= L-1, got L={L}, N={N}.")
    spectrum = []
    for i in range(min(N, L - N) + 1):
        multiplicity = math.comb(L, i) - (math.comb(L, i - 1) if i > 0 else 0)
        spectrum.append((2.0 * i * (L + 1 - i) / L, multiplicity))
    return spectrum


# --------------------------------------------------------------------------------
#       Bernoulli-Laplace End
# --------------------------------------------------------------------------------
