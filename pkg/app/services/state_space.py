"""
Configuration spaces and exact measures of the exclusion process on the
L x H rectangle.

Sites (i, h), i in [1, L], h in [1, H], are linearized as (h-1)*L + (i-1) and a
lattice configuration is the bitmask of occupied sites. Sectors are enumerated
in colexicographic order, which is the increasing order of the bitmasks.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from functools import lru_cache
from typing import Dict, Iterable, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from scipy.optimize import bisect
from scipy.special import expit, gammaln, logsumexp

from app.core.config import settings
from app.core.logging import Logger
from app.framework.errors import CapExceeded, InvalidParams, OutOfRange

logger = Logger(name="StateSpace")

MAX_BITMASK_SITES = 62



# --------------------------------------------------------------------------------
#       Parameter Models Start
# --------------------------------------------------------------------------------


class EnsembleParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    q: float = Field(gt=0.0, lt=1.0)
    L: int = Field(ge=1)
    H: int = Field(ge=1)
    N: int = Field(ge=0)

    @model_validator(mode="after")
    def _check_particles(self):
        if self.N > self.L * self.H:
            raise ValueError(f"N={self.N} exceeds the {self.L * self.H} sites of the lattice")
        return self

    @classmethod
    def create(cls, **kwargs) -> EnsembleParams:
        try:
            return cls(**kwargs)
        except ValidationError as e:
            logger.error(f"[!] Rejected ensemble parameters {kwargs}: {e}")
            raise InvalidParams(f"(EnsembleParams) Invalid ensemble parameters {kwargs}. (Error: {e})") from e

    @property
    def rho(self) -> float:
        return self.N / self.L

    @property
    def n_sites(self) -> int:
        return self.L * self.H

    @property
    def is_degenerate(self) -> bool:
        return self.N in (0, self.n_sites)

    def with_particles(self, N: int) -> EnsembleParams:
        return EnsembleParams.create(q=self.q, L=self.L, H=self.H, N=N)


class LatticeConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    L: int = Field(ge=1)
    H: int = Field(ge=1)
    mask: int = Field(ge=0)

    @classmethod
    def from_sites(cls, L: int, H: int, occupied: Iterable[Tuple[int, int]]) -> LatticeConfig:
        mask = 0
        for i, h in occupied:
            mask |= 1 << site_index(L, i, h)
        return cls(L=L, H=H, mask=mask)

    @classmethod
    def from_array(cls, occupancy: np.ndarray) -> LatticeConfig:
        """ occupancy[h-1, i-1] in {0, 1}"""
        occupancy = np.asarray(occupancy, dtype=np.int64)
        H, L = occupancy.shape
        bits = occupancy.ravel()
        mask = sum(1 << int(s) for s in np.flatnonzero(bits))
        return cls(L=L, H=H, mask=int(mask))

    def occupied(self, i: int, h: int) -> bool:
        return bool((self.mask >> site_index(self.L, i, h)) & 1)

    def as_array(self) -> np.ndarray:
        bits = [(self.mask >> s) & 1 for s in range(self.L * self.H)]
        return np.array(bits, dtype=np.int64).reshape(self.H, self.L)

    @property
    def particle_count(self) -> int:
        return bin(self.mask).count("1")


class ProfileConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    heights: Tuple[int, ...]

    @property
    def total(self) -> int:
        return int(sum(self.heights))


class GrandCanonicalStats(BaseModel):
    model_config = ConfigDict(frozen=True)

    lam: float
    mean: float
    sigma2: float
    H: int
    q: float


def site_index(L: int, i: int, h: int) -> int:
    return (h - 1) * L + (i - 1)


# --------------------------------------------------------------------------------
#       Parameter Models End
# --------------------------------------------------------------------------------



# --------------------------------------------------------------------------------
#       Combinatorics Start
# --------------------------------------------------------------------------------


@lru_cache(maxsize=settings.ENUMERATION_CACHE)
def _colex_masks(n_sites: int, n_particles: int) -> np.ndarray:
    if n_particles == 0:
        masks = np.zeros(1, dtype=np.int64)
    elif n_particles == n_sites:
        masks = np.array([(1 << n_sites) - 1], dtype=np.int64)
    else:
        top = np.int64(1) << np.int64(n_sites - 1)
        masks = np.concatenate([
            _colex_masks(n_sites - 1, n_particles),
            _colex_masks(n_sites - 1, n_particles - 1) | top,
        ])
    masks.setflags(write=False)
    return masks


@lru_cache(maxsize=settings.ENUMERATION_CACHE)
def _composition_count(n_parts: int, part_cap: int, total: int) -> int:
    if total < 0 or total > n_parts * part_cap:
        return 0
    if n_parts == 0:
        return 1
    return sum(_composition_count(n_parts - 1, part_cap, total - v) for v in range(min(part_cap, total) + 1))


@lru_cache(maxsize=settings.ENUMERATION_CACHE)
def _compositions(n_parts: int, part_cap: int, total: int) -> np.ndarray:
    if n_parts == 0:
        rows = np.zeros((1, 0), dtype=np.int64)
    else:
        blocks = []
        for v in range(min(part_cap, total), max(0, total - (n_parts - 1) * part_cap) - 1, -1):
            tail = _compositions(n_parts - 1, part_cap, total - v)
            head = np.full((tail.shape[0], 1), v, dtype=np.int64)
            blocks.append(np.hstack([head, tail]))
        rows = np.vstack(blocks) if blocks else np.zeros((0, n_parts), dtype=np.int64)
    rows.setflags(write=False)
    return rows


class LatticeBasis(Sequence):
    """
    Fixed-weight bitsets over `n_sites` sites, colex ordered.

    `site_levels[s]` is the height used by the measure q^{2 level} of site s;
    sites sharing a level form one row of the profile.
    """

    def __init__(self, n_sites: int, n_particles: int, site_levels: np.ndarray, L: int, H: int, cap: Optional[int] = None):
        cap = settings.ENUMERATION_CAP if cap is None else cap
        if not 0 <= n_particles <= n_sites:
            raise InvalidParams(f"(LatticeBasis) Cannot place {n_particles} particles on {n_sites} sites.")
        if n_sites > MAX_BITMASK_SITES:
            raise InvalidParams(f"(LatticeBasis) {n_sites} sites exceed the {MAX_BITMASK_SITES}-site bitmask basis.")

        size = math.comb(n_sites, n_particles)
        if size > cap:
            raise CapExceeded(f"(LatticeBasis) Sector of {size} configurations exceeds the cap {cap}.", size=size, cap=cap)

        self.n_sites = n_sites
        self.n_particles = n_particles
        self.site_levels = np.asarray(site_levels, dtype=np.int64)
        self.L = L
        self.H = H
        self.states = _colex_masks(n_sites, n_particles)
        self.levels = np.unique(self.site_levels)
        self.level_masks = np.array(
            [sum(1 << int(s) for s in np.flatnonzero(self.site_levels == level)) for level in self.levels],
            dtype=np.int64,
        )

    def __len__(self) -> int:
        return int(self.states.size)

    def __getitem__(self, k):
        if isinstance(k, slice):
            return [self[j] for j in range(*k.indices(len(self)))]
        return LatticeConfig(L=self.L, H=self.H, mask=int(self.states[k]))

    def index(self, masks: np.ndarray) -> np.ndarray:
        """ Vectorized position lookup of masks known to lie in the sector."""
        masks = np.asarray(masks, dtype=np.int64)
        return np.searchsorted(self.states, masks)

    def rank(self, config) -> int:
        mask = config.mask if isinstance(config, LatticeConfig) else int(config)
        if bin(mask).count("1") != self.n_particles:
            raise InvalidParams(f"(LatticeBasis) Configuration does not hold {self.n_particles} particles.")
        r, j = 0, 0
        for s in range(self.n_sites):
            if (mask >> s) & 1:
                j += 1
                r += math.comb(s, j)
        return r

    def unrank(self, k: int) -> LatticeConfig:
        if not 0 <= k < len(self):
            raise InvalidParams(f"(LatticeBasis) Rank {k} outside [0, {len(self)}).")
        mask, r = 0, k
        c = self.n_sites - 1
        for j in range(self.n_particles, 0, -1):
            while math.comb(c, j) > r:
                c -= 1
            r -= math.comb(c, j)
            mask |= 1 << c
            c -= 1
        return LatticeConfig(L=self.L, H=self.H, mask=mask)

    def level_counts(self) -> np.ndarray:
        """ Particle count per distinct level, shape (dim, n_levels)."""
        return np.stack([np.bitwise_count(self.states & m).astype(np.int64) for m in self.level_masks], axis=1)

    def group_counts(self, site_groups: np.ndarray) -> np.ndarray:
        """ Particle count per group of sites (groups sorted), shape (dim, n_groups)."""
        site_groups = np.asarray(site_groups)
        masks = [sum(1 << int(s) for s in np.flatnonzero(site_groups == g)) for g in np.unique(site_groups)]
        return np.stack([np.bitwise_count(self.states & np.int64(m)).astype(np.int64) for m in masks], axis=1)

    def occupancy(self) -> np.ndarray:
        """ Occupation bits, shape (dim, n_sites)."""
        shifts = np.arange(self.n_sites, dtype=np.int64)
        return ((self.states[:, None] >> shifts[None, :]) & 1).astype(np.int8)

    def log_level_weights(self, q: float) -> np.ndarray:
        """ log prod_s q^{2 level(s) alpha_s} for every state."""
        return self.level_counts() @ (2.0 * self.levels * math.log(q))


class CompositionBasis(Sequence):
    """
    Bounded compositions: vectors of `n_parts` integers in [0, part_cap] with a
    fixed sum, ordered reverse-lexicographically (first part descending).
    """

    def __init__(self, n_parts: int, part_cap: int, total: int, cap: Optional[int] = None):
        cap = settings.ENUMERATION_CAP if cap is None else cap
        if not 0 <= total <= n_parts * part_cap:
            raise InvalidParams(f"(CompositionBasis) Total {total} infeasible for {n_parts} parts capped at {part_cap}.")

        size = _composition_count(n_parts, part_cap, total)
        if size > cap:
            raise CapExceeded(f"(CompositionBasis) Sector of {size} profiles exceeds the cap {cap}.", size=size, cap=cap)

        self.n_parts = n_parts
        self.part_cap = part_cap
        self.total = total
        self.states = _compositions(n_parts, part_cap, total)
        self._radix = part_cap + 1
        self._packed = self._radix ** n_parts < 2 ** 62
        if self._packed:
            self._codes = -self._encode(self.states)
        else:
            self._lookup: Dict[Tuple[int, ...], int] = {tuple(row): k for k, row in enumerate(self.states.tolist())}

    def __len__(self) -> int:
        return int(self.states.shape[0])

    def __getitem__(self, k):
        if isinstance(k, slice):
            return [self[j] for j in range(*k.indices(len(self)))]
        return ProfileConfig(heights=tuple(int(v) for v in self.states[k]))

    def _encode(self, rows: np.ndarray) -> np.ndarray:
        weights = self._radix ** np.arange(self.n_parts - 1, -1, -1, dtype=np.int64)
        return rows.astype(np.int64) @ weights

    def index(self, rows: np.ndarray) -> np.ndarray:
        rows = np.atleast_2d(np.asarray(rows, dtype=np.int64))
        if self._packed:
            return np.searchsorted(self._codes, -self._encode(rows))
        return np.array([self._lookup[tuple(row)] for row in rows.tolist()], dtype=np.int64)

    def rank(self, config) -> int:
        heights = config.heights if isinstance(config, ProfileConfig) else tuple(config)
        if len(heights) != self.n_parts or sum(heights) != self.total or min(heights) < 0 or max(heights) > self.part_cap:
            raise InvalidParams(f"(CompositionBasis) {heights} is not in the sector.")
        r, remaining = 0, self.total
        for p, value in enumerate(heights):
            parts_left = self.n_parts - p - 1
            for v in range(min(self.part_cap, remaining), value, -1):
                r += _composition_count(parts_left, self.part_cap, remaining - v)
            remaining -= value
        return r

    def unrank(self, k: int) -> ProfileConfig:
        if not 0 <= k < len(self):
            raise InvalidParams(f"(CompositionBasis) Rank {k} outside [0, {len(self)}).")
        heights, remaining, r = [], self.total, k
        for p in range(self.n_parts):
            parts_left = self.n_parts - p - 1
            for v in range(min(self.part_cap, remaining), -1, -1):
                block = _composition_count(parts_left, self.part_cap, remaining - v)
                if r < block:
                    heights.append(v)
                    remaining -= v
                    break
                r -= block
        return ProfileConfig(heights=tuple(heights))


# --------------------------------------------------------------------------------
#       Combinatorics End
# --------------------------------------------------------------------------------



# --------------------------------------------------------------------------------
#       Enumeration Start
# --------------------------------------------------------------------------------


def rectangle_levels(L: int, H: int) -> np.ndarray:
    return np.repeat(np.arange(1, H + 1, dtype=np.int64), L)


def enumerate_lattice_configs(params: EnsembleParams, cap: Optional[int] = None) -> LatticeBasis:
    if params.N > params.n_sites:
        raise InvalidParams(f"(StateSpace) N={params.N} exceeds L*H={params.n_sites}.")
    basis = LatticeBasis(params.n_sites, params.N, rectangle_levels(params.L, params.H), L=params.L, H=params.H, cap=cap)
    logger.debug(f"[+] Enumerated {len(basis)} lattice configurations for {params}")
    return basis


def enumerate_profiles(params: EnsembleParams, cap: Optional[int] = None) -> CompositionBasis:
    if params.N > params.n_sites:
        raise InvalidParams(f"(StateSpace) N={params.N} exceeds L*H={params.n_sites}.")
    basis = CompositionBasis(params.H, params.L, params.N, cap=cap)
    logger.debug(f"[+] Enumerated {len(basis)} profiles for {params}")
    return basis


def profile_of(alpha: LatticeConfig) -> ProfileConfig:
    return ProfileConfig(heights=tuple(int(v) for v in alpha.as_array().sum(axis=1)))


def rank_lattice_config(alpha: LatticeConfig, params: EnsembleParams) -> int:
    return enumerate_lattice_configs(params).rank(alpha)


def unrank_lattice_config(k: int, params: EnsembleParams) -> LatticeConfig:
    return enumerate_lattice_configs(params).unrank(k)


def rank_profile(omega: ProfileConfig, params: EnsembleParams) -> int:
    return enumerate_profiles(params).rank(omega)


def unrank_profile(k: int, params: EnsembleParams) -> ProfileConfig:
    return enumerate_profiles(params).unrank(k)


# --------------------------------------------------------------------------------
#       Enumeration End
# --------------------------------------------------------------------------------



# --------------------------------------------------------------------------------
#       Measures Start
# --------------------------------------------------------------------------------


class PartitionTable:
    """
    Log-domain partition functions of stick subsystems.

    logG[n]     log of the single-stick weight g(n), the coefficient of z^n in
                prod_h (1 + q^{2h} z)
    logZ[l, m]  log Z_l(m) for l sticks holding m particles, m <= N
    """

    def __init__(self, params: EnsembleParams, logG: np.ndarray, logZ: np.ndarray):
        self.params = params
        self.logG = logG
        self.logZ = logZ

    def log_g(self, n: int) -> float:
        return float(self.logG[n]) if 0 <= n <= self.params.H else -np.inf

    def log_z(self, l: int, m: int) -> float:
        if l < 0 or m < 0 or l >= self.logZ.shape[0] or m >= self.logZ.shape[1]:
            return -np.inf
        return float(self.logZ[l, m])

    @property
    def log_normalization(self) -> float:
        return float(self.logZ[self.params.L, self.params.N])


def log_stick_weights(H: int, q: float) -> np.ndarray:
    log_q2 = 2.0 * math.log(q)
    logG = np.full(H + 1, -np.inf)
    logG[0] = 0.0
    for h in range(1, H + 1):
        shifted = np.full(H + 1, -np.inf)
        shifted[1:] = logG[:-1] + h * log_q2
        logG = np.logaddexp(logG, shifted)
    return logG


def build_partition_table(params: EnsembleParams) -> PartitionTable:
    L, H, N = params.L, params.H, params.N
    logG = log_stick_weights(H, params.q)

    logZ = np.full((L + 1, N + 1), -np.inf)
    logZ[0, 0] = 0.0
    m = np.arange(N + 1)[:, None]
    n = np.arange(H + 1)[None, :]
    rest = m - n
    valid = rest >= 0
    with np.errstate(divide="ignore"):
        for l in range(1, L + 1):
            terms = np.where(valid, logG[None, :] + logZ[l - 1, np.clip(rest, 0, N)], -np.inf)
            logZ[l] = logsumexp(terms, axis=1)

    logger.debug(f"[+] Partition table built for {params}: log Z = {logZ[L, N]:.6f}")
    return PartitionTable(params, logG, logZ)


def nu_weight(alpha: LatticeConfig, params: EnsembleParams, table: PartitionTable) -> float:
    if (alpha.L, alpha.H) != (params.L, params.H) or alpha.particle_count != params.N:
        raise InvalidParams(f"(StateSpace) Configuration does not belong to the sector {params}.")
    log_weight = 2.0 * math.log(params.q) * float(np.arange(1, params.H + 1) @ alpha.as_array().sum(axis=1))
    return math.exp(log_weight - table.log_normalization)


def nu_weights(basis: LatticeBasis, params: EnsembleParams, table: PartitionTable) -> np.ndarray:
    return np.exp(basis.log_level_weights(params.q) - table.log_normalization)


def log_profile_weights(states: np.ndarray, part_cap: int, levels: np.ndarray, q: float) -> np.ndarray:
    """ log prod_x binom(part_cap, w_x) q^{2 level_x w_x}, unnormalized."""
    states = np.asarray(states, dtype=np.float64)
    log_binom = gammaln(part_cap + 1) - gammaln(states + 1) - gammaln(part_cap - states + 1)
    return log_binom.sum(axis=1) + states @ (2.0 * np.asarray(levels, dtype=np.float64) * math.log(q))


def hat_nu_weight(omega: ProfileConfig, params: EnsembleParams, table: PartitionTable) -> float:
    heights = np.array(omega.heights, dtype=np.int64)
    if heights.size != params.H or heights.min() < 0 or heights.max() > params.L or heights.sum() != params.N:
        raise InvalidParams(f"(StateSpace) Profile {omega.heights} does not belong to the sector {params}.")
    log_weight = log_profile_weights(heights[None, :], params.L, np.arange(1, params.H + 1), params.q)[0]
    return math.exp(log_weight - table.log_normalization)


def hat_nu_weights(basis: CompositionBasis, params: EnsembleParams, table: PartitionTable) -> np.ndarray:
    log_weights = log_profile_weights(basis.states, params.L, np.arange(1, params.H + 1), params.q)
    return np.exp(log_weights - table.log_normalization)


def normalize_log_weights(log_weights: np.ndarray) -> np.ndarray:
    return np.exp(log_weights - logsumexp(log_weights))


# --------------------------------------------------------------------------------
#       Measures End
# --------------------------------------------------------------------------------



# --------------------------------------------------------------------------------
#       Stick Kernel Start
# --------------------------------------------------------------------------------


class StickKernel(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    params: EnsembleParams
    n_values: np.ndarray
    nu0: np.ndarray
    cond: Optional[np.ndarray] = None  # cond[a, b] = nu(n_values[b] | n_values[a])

    @property
    def nbar(self) -> np.ndarray:
        return self.n_values - self.params.rho


def occupation_range(params: EnsembleParams) -> Tuple[int, int]:
    return max(0, params.N - (params.L - 1) * params.H), min(params.H, params.N)


def stick_occupation_kernel(params: EnsembleParams, table: PartitionTable, conditional: bool = True) -> StickKernel:
    L, N = params.L, params.N
    if conditional and L < 2:
        raise InvalidParams(f"(StateSpace) The conditional stick kernel needs L >= 2, got L={L}.")

    n_lo, n_hi = occupation_range(params)
    n_values = np.arange(n_lo, n_hi + 1, dtype=np.int64)
    log_nu0 = np.array([table.log_g(n) + table.log_z(L - 1, N - n) for n in n_values]) - table.log_normalization
    nu0 = np.exp(log_nu0)

    cond = None
    if conditional:
        log_cond = np.array([
            [table.log_g(n) + table.log_z(L - 2, N - m - n) - table.log_z(L - 1, N - m) for n in n_values]
            for m in n_values
        ])
        cond = np.exp(log_cond)

    return StickKernel(params=params, n_values=n_values, nu0=nu0, cond=cond)


class TailFit(BaseModel):
    model_config = ConfigDict(frozen=True)

    a: float
    log_k: float
    n_points: int


def tail_decay_fit(params: EnsembleParams, table: PartitionTable) -> TailFit:
    """ Least-squares fit of log(nu(n|m) nu(m|n)) against (n-rho)^2 + (m-rho)^2."""
    kernel = stick_occupation_kernel(params, table)
    product = kernel.cond * kernel.cond.T
    a_idx, b_idx = np.nonzero(product > 0)
    nbar = kernel.nbar
    x = nbar[a_idx] ** 2 + nbar[b_idx] ** 2
    y = np.log(product[a_idx, b_idx])
    if np.unique(x).size < 2:
        raise InvalidParams(f"(StateSpace) Too few distinct occupation pairs to fit tails for {params}.")
    slope, intercept = np.polyfit(x, y, 1)
    return TailFit(a=float(-slope), log_k=float(intercept), n_points=int(x.size))


def particle_hole_image(params: EnsembleParams) -> EnsembleParams:
    return params.with_particles(params.n_sites - params.N)


# --------------------------------------------------------------------------------
#       Stick Kernel End
# --------------------------------------------------------------------------------



# --------------------------------------------------------------------------------
#       Grand Canonical Start
# --------------------------------------------------------------------------------


def _row_probabilities(lam: float, H: int, q: float) -> np.ndarray:
    beta = -2.0 * math.log(q)
    return expit(beta * (lam - np.arange(1, H + 1)))


def chemical_potential(rho: float, H: int, q: float) -> GrandCanonicalStats:
    """
    Solves sum_h q^{2(h-lam)} / (1 + q^{2(h-lam)}) = rho by bisection.

    The bracket starts around [1/2, H + 1/2] and is doubled outward until it
    contains the root; the mean map is strictly increasing in lam.
    """
    if not 0.0 < rho < H:
        raise OutOfRange(f"(StateSpace) Density rho={rho} outside (0, {H}).")

    def excess(lam: float) -> float:
        return float(_row_probabilities(lam, H, q).sum()) - rho

    lo, hi, width = 0.5, H + 0.5, 1.0
    while excess(lo) > 0.0:
        lo -= width
        width *= 2.0
    width = 1.0
    while excess(hi) < 0.0:
        hi += width
        width *= 2.0

    lam = bisect(excess, lo, hi, xtol=1e-15, maxiter=500)
    p = _row_probabilities(lam, H, q)
    return GrandCanonicalStats(lam=float(lam), mean=float(p.sum()), sigma2=float(np.sum(p * (1.0 - p))), H=H, q=q)


def grand_canonical_occupation(H: int, q: float, lam: float) -> np.ndarray:
    """ Law of the stick occupation n in 0..H under the tilted product measure."""
    beta = -2.0 * math.log(q)
    log_partition = np.logaddexp(0.0, beta * (lam - np.arange(1, H + 1))).sum()
    n = np.arange(H + 1)
    return np.exp(log_stick_weights(H, q) + beta * lam * n - log_partition)


def ensemble_distance(params: EnsembleParams, table: PartitionTable) -> float:
    """ Total-variation distance between nu_0 and the grand canonical law at lam(rho)."""
    stats = chemical_potential(params.rho, params.H, params.q)
    grand = grand_canonical_occupation(params.H, params.q, stats.lam)
    kernel = stick_occupation_kernel(params, table, conditional=False)
    canonical = np.zeros(params.H + 1)
    canonical[kernel.n_values] = kernel.nu0
    return float(0.5 * np.abs(canonical - grand).sum())


# --------------------------------------------------------------------------------
#       Grand Canonical End
# --------------------------------------------------------------------------------
