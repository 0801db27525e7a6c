"""
Event-driven simulation of the exclusion dynamics on the rectangle and of its
profile chain, and relaxation-rate estimation from the sampled observable.

Both modes move on row counts omega_h; the lattice mode additionally carries
the configuration and picks the jumping particle and the target hole
uniformly inside the chosen pair of rows.
"""

from __future__ import annotations

import math
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from app.core.config import settings
from app.core.logging import Logger
from app.framework.context import RunContext
from app.framework.errors import InsufficientData, InvalidParams, NonDecayingCorrelation
from app.framework.workflows import WorkflowRunner
from app.services.state_space import EnsembleParams, build_partition_table, enumerate_profiles, hat_nu_weights

logger = Logger(name="Simulate")

Profile = Tuple[int, ...]

OMEGA_H0 = "omega_h0"
CENTER_OF_MASS = "center_of_mass"
LATTICE_MODE = "lattice"
PROFILE_MODE = "profile"



# --------------------------------------------------------------------------------
#       Plan Start
# --------------------------------------------------------------------------------


class SimulationPlan(BaseModel):
    model_config = ConfigDict(frozen=True)

    params: EnsembleParams
    mode: Literal["lattice", "profile"] = PROFILE_MODE
    seed: int = Field(ge=0)
    t_burn: float = Field(default=0.0, ge=0.0)
    t_run: float = Field(gt=0.0)
    sample_dt: float = Field(default=0.1, gt=0.0)
    observable: Literal["omega_h0", "center_of_mass"] = OMEGA_H0
    record_transitions: bool = False

    @model_validator(mode="after")
    def _check_times(self):
        if not self.t_run > self.t_burn:
            raise ValueError(f"t_run={self.t_run} must exceed t_burn={self.t_burn}")
        return self

    @classmethod
    def create(cls, **kwargs) -> SimulationPlan:
        try:
            return cls(**kwargs)
        except ValidationError as e:
            logger.error(f"[!] Rejected simulation plan {kwargs}: {e}")
            raise InvalidParams(f"(SimulationPlan) Invalid simulation plan. (Error: {e})") from e

    @property
    def h0(self) -> int:
        """ Observed row round(rho), kept inside [1, H]."""
        return int(min(self.params.H, max(1, math.floor(self.params.rho + 0.5))))

    def with_seed(self, seed: int) -> SimulationPlan:
        return self.model_copy(update={"seed": seed})


class SimulationSeries(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    plan: SimulationPlan
    times: np.ndarray
    values: np.ndarray
    events: int
    occupancy: Dict[Profile, float]
    transitions: Dict[Tuple[Profile, Profile], int] = {}
    particle_count: int

    @property
    def n_samples(self) -> int:
        return int(self.values.size)


class RelaxationEstimate(BaseModel):
    rate: float
    stderr: float
    n_samples: int
    window: Tuple[int, int]
    r_squared: float
    resamples: int
    seed: Optional[int] = None


# --------------------------------------------------------------------------------
#       Plan End
# --------------------------------------------------------------------------------



# --------------------------------------------------------------------------------
#       Event Loop Start
# --------------------------------------------------------------------------------


def make_rng(seed: int, jumped: bool = False) -> np.random.Generator:
    bits = np.random.Philox(seed)
    return np.random.Generator(bits.jumped() if jumped else bits)


def initial_profile(params: EnsembleParams) -> np.ndarray:
    """ Rows filled from the bottom."""
    omega = np.zeros(params.H, dtype=np.int64)
    remaining = params.N
    for h in range(params.H):
        omega[h] = min(params.L, remaining)
        remaining -= omega[h]
    return omega


def bond_rates(omega: np.ndarray, L: int, q: float, bond: int) -> Tuple[float, float]:
    """ Total rates (up, down) across rows bond+1 and bond+2, 1/L prefactor included."""
    low, high = omega[bond], omega[bond + 1]
    return q * low * (L - high) / L, high * (L - low) / (q * L)


def _observe(plan: SimulationPlan, omega: np.ndarray) -> float:
    if plan.observable == OMEGA_H0:
        return float(omega[plan.h0 - 1])
    return float(np.arange(1, omega.size + 1) @ omega) / plan.params.N


def gillespie_run(plan: SimulationPlan) -> SimulationSeries:
    """
    Exact continuous-time trajectory. Move list: for every pair of adjacent rows,
    one particle up (rate q a_h (L - a_{h+1}) / L) or down
    (rate q^-1 a_{h+1} (L - a_h) / L); tower sampling over the 2(H-1) totals,
    refreshed only around the bond that fired.
    """
    params = plan.params
    L, H, q = params.L, params.H, params.q
    if params.is_degenerate or H < 2:
        raise InvalidParams(f"(Simulate) Sector {params} has no moves to simulate.")

    rng = make_rng(plan.seed)
    omega = initial_profile(params)
    lattice = None
    if plan.mode == LATTICE_MODE:
        lattice = np.zeros((H, L), dtype=bool)
        for h in range(H):
            lattice[h, : omega[h]] = True

    rates = np.zeros(2 * (H - 1))
    for b in range(H - 1):
        rates[2 * b], rates[2 * b + 1] = bond_rates(omega, L, q, b)

    n_grid = int(math.floor((plan.t_run - plan.t_burn) / plan.sample_dt)) + 1
    times = plan.t_burn + plan.sample_dt * np.arange(n_grid)
    times = times[times < plan.t_run]
    values = np.empty(times.size)
    occupancy: Dict[Profile, float] = {}
    transitions: Dict[Tuple[Profile, Profile], int] = {}

    t, events, k = 0.0, 0, 0
    while True:
        total = rates.sum()
        t_next = t + rng.exponential(1.0 / total)
        state = tuple(int(v) for v in omega)

        horizon = min(t_next, plan.t_run)
        if horizon > plan.t_burn:
            occupancy[state] = occupancy.get(state, 0.0) + horizon - max(t, plan.t_burn)
        while k < times.size and times[k] < t_next:
            values[k] = _observe(plan, omega)
            k += 1
        if t_next >= plan.t_run:
            break

        move = int(np.searchsorted(np.cumsum(rates), rng.random() * total, side="right"))
        move = min(move, rates.size - 1)
        bond, down = divmod(move, 2)
        source, target = (bond + 1, bond) if down else (bond, bond + 1)
        omega[source] -= 1
        omega[target] += 1

        if lattice is not None:
            i = rng.choice(np.flatnonzero(lattice[source]))
            j = rng.choice(np.flatnonzero(~lattice[target]))
            lattice[source, i] = False
            lattice[target, j] = True

        for b in range(max(0, bond - 1), min(H - 1, bond + 2)):
            rates[2 * b], rates[2 * b + 1] = bond_rates(omega, L, q, b)

        if plan.record_transitions and t_next > plan.t_burn:
            key = (state, tuple(int(v) for v in omega))
            transitions[key] = transitions.get(key, 0) + 1

        t = t_next
        events += 1

    particle_count = int(lattice.sum()) if lattice is not None else int(omega.sum())
    logger.info(f"[+] Simulated {params} ({plan.mode}, seed={plan.seed}): {events} events, {times.size} samples")
    return SimulationSeries(
        plan=plan,
        times=times,
        values=values,
        events=events,
        occupancy=occupancy,
        transitions=transitions,
        particle_count=particle_count,
    )


# --------------------------------------------------------------------------------
#       Event Loop End
# --------------------------------------------------------------------------------



# --------------------------------------------------------------------------------
#       Estimators Start
# --------------------------------------------------------------------------------


def autocorrelation(values: np.ndarray) -> np.ndarray:
    """ Normalized autocorrelation at every lag, through a zero-padded FFT."""
    x = np.asarray(values, dtype=np.float64)
    x = x - x.mean()
    n = x.size
    spectrum = np.fft.rfft(x, 2 * n)
    acov = np.fft.irfft(spectrum * np.conj(spectrum))[:n] / n
    if acov[0] <= 0.0:
        raise NonDecayingCorrelation("(Simulate) The observable is constant along the run.")
    return acov / acov[0]


def _fit_rate(values: np.ndarray, dt: float, upper: float, lower: float) -> Tuple[float, Tuple[int, int], float]:
    acf = autocorrelation(values)
    below = np.flatnonzero(acf[1:] <= upper)
    if below.size == 0:
        raise NonDecayingCorrelation(f"(Simulate) Autocorrelation never drops below {upper}.")
    start = int(below[0]) + 1
    stop = start
    while stop < acf.size and lower <= acf[stop] <= upper:
        stop += 1
    if stop - start < 3:
        raise NonDecayingCorrelation(f"(Simulate) Only {stop - start} lags with autocorrelation in [{lower}, {upper}].")

    lags = np.arange(start, stop) * dt
    logs = np.log(acf[start:stop])
    slope, intercept = np.polyfit(lags, logs, 1)
    fitted = intercept + slope * lags
    spread = np.sum((logs - logs.mean()) ** 2)
    r_squared = 1.0 - np.sum((logs - fitted) ** 2) / spread if spread > 0 else 0.0
    if slope >= 0.0 or r_squared < 0.9:
        raise NonDecayingCorrelation(f"(Simulate) Autocorrelation tail is not exponential (slope={slope:.3g}, R^2={r_squared:.3f}).")
    return float(-slope), (start, stop), float(r_squared)


def relaxation_estimate(series: SimulationSeries, resamples: Optional[int] = None) -> RelaxationEstimate:
    """
    Exponential rate of the autocorrelation over the window where it lies in
    [ACF_LOWER, ACF_UPPER]; stderr from a moving block bootstrap.
    """
    resamples = max(settings.BOOTSTRAP_RESAMPLES if resamples is None else resamples, 1)
    values = series.values
    if values.size < settings.MIN_SAMPLES:
        raise InsufficientData(f"(Simulate) {values.size} samples after burn-in, at least {settings.MIN_SAMPLES} needed.")

    dt, upper, lower = series.plan.sample_dt, settings.ACF_UPPER, settings.ACF_LOWER
    rate, window, r_squared = _fit_rate(values, dt, upper, lower)

    n = values.size
    block = int(min(n // 10, max(10, 5 * window[1])))
    rng = make_rng(series.plan.seed, jumped=True)
    estimates = []
    for _ in range(resamples):
        starts = rng.integers(0, n - block + 1, size=int(math.ceil(n / block)))
        resampled = np.concatenate([values[s : s + block] for s in starts])[:n]
        try:
            estimates.append(_fit_rate(resampled, dt, upper, lower)[0])
        except NonDecayingCorrelation:
            continue

    if len(estimates) < 2:
        raise NonDecayingCorrelation(f"(Simulate) Only {len(estimates)} of {resamples} bootstrap resamples gave a rate.")
    stderr = float(np.std(estimates, ddof=1))
    logger.info(f"[+] Relaxation rate {rate:.4f} +- {stderr:.4f} from {n} samples ({len(estimates)} resamples)")
    return RelaxationEstimate(
        rate=rate,
        stderr=stderr,
        n_samples=n,
        window=window,
        r_squared=r_squared,
        resamples=len(estimates),
        seed=series.plan.seed,
    )


def stationary_tv_distance(series: SimulationSeries, params: Optional[EnsembleParams] = None) -> float:
    """ Total variation between the time-weighted profile occupancy and nu_hat."""
    params = params or series.plan.params
    basis = enumerate_profiles(params)
    exact = hat_nu_weights(basis, params, build_partition_table(params))
    empirical = np.zeros(len(basis))
    if series.occupancy:
        profiles = np.array(list(series.occupancy.keys()), dtype=np.int64)
        weights = np.array(list(series.occupancy.values()))
        np.add.at(empirical, basis.index(profiles), weights)
    total = empirical.sum()
    if total <= 0.0:
        raise InsufficientData("(Simulate) No time recorded after burn-in.")
    return float(0.5 * np.abs(empirical / total - exact).sum())


def net_flow_scores(series: SimulationSeries) -> Dict[Tuple[Profile, Profile], float]:
    """ |n(a->b) - n(b->a)| / sqrt(n(a->b) + n(b->a)) for every observed pair."""
    scores = {}
    for (a, b), forward in series.transitions.items():
        if (b, a) in scores:
            continue
        backward = series.transitions.get((b, a), 0)
        scores[(a, b)] = abs(forward - backward) / math.sqrt(forward + backward)
    return scores


# --------------------------------------------------------------------------------
#       Estimators End
# --------------------------------------------------------------------------------



# --------------------------------------------------------------------------------
#       Calibration Start
# --------------------------------------------------------------------------------


class CalibrationReport(BaseModel):
    exact_gap: float
    coverage: float
    rows: List[Dict[str, object]]


def calibrate(plan: SimulationPlan, seeds: Sequence[int], exact_gap: float, jobs: int = 1, context: Optional[RunContext] = None) -> CalibrationReport:
    """ Fraction of seeds whose estimate covers `exact_gap` within 3 stderr."""
    context = context or RunContext("calibrate", params=plan.model_dump(mode="json"))

    def replica(seed: int) -> RelaxationEstimate:
        return relaxation_estimate(gillespie_run(plan.with_seed(seed)))

    outcomes = WorkflowRunner(context).run_parallel(replica, list(seeds), jobs=jobs)
    rows: List[Dict[str, object]] = []
    for seed, outcome in zip(seeds, outcomes):
        if isinstance(outcome, Exception):
            rows.append({"seed": seed, "covered": False, "error": str(outcome)})
            continue
        covered = abs(outcome.rate - exact_gap) <= 3.0 * outcome.stderr
        rows.append({"seed": seed, "rate": outcome.rate, "stderr": outcome.stderr, "covered": covered})

    coverage = sum(bool(row["covered"]) for row in rows) / max(1, len(rows))
    context.info(f"(Simulate) Calibration coverage {coverage:.2f} over {len(rows)} seeds")
    return CalibrationReport(exact_gap=exact_gap, coverage=coverage, rows=rows)


# --------------------------------------------------------------------------------
#       Calibration End
# --------------------------------------------------------------------------------
