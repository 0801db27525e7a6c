"""
Variational quantities built on sector gaps: gamma and gamma-tilde scans, the
spectrum of K and w(L, H), the recursion identities behind the iteration in L,
the gap tables of the XXZ chain and the diagonal interface, and the scaling
bands of gamma, gap/S and gap R^2/S.
"""

from __future__ import annotations

import math
import time
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import scipy.linalg as la
from pydantic import BaseModel, ConfigDict
from scipy.optimize import linear_sum_assignment

from app.core.config import settings
from app.core.constants import (
    AUTO_METHOD,
    BERNOULLI_LAPLACE_FORM,
    FULL_FORM,
    GAMMA_BAND,
    GAP_OVER_S_BAND,
    GAP_R2_BAND,
    MODIFIED_FORM,
    SUP_ROW,
)
from app.core.logging import Logger
from app.framework.context import RunContext
from app.framework.errors import DegenerateSector, DimensionMismatch, InvalidParams, ReportedFailure
from app.framework.operator import ReversibleOperator
from app.framework.workflows import WorkflowRunner
from app.services.operators.diagonal import conjugate_diagonal, diagonal_region
from app.services.operators.kernels import (
    bernoulli_laplace,
    class_a_function,
    conditional_expectation,
    conditional_variance,
    operator_K,
    operator_P,
)
from app.services.operators.lattice import full_generator, modified_generator, profile_generator
from app.services.operators.xxz import ConjugationResult, XXZParams, conjugate_to_profile
from app.services.spectral.solvers import SpectrumReport, rayleigh_quotient, solve_gap
from app.services.state_space import EnsembleParams

logger = Logger(name="Variational")



# --------------------------------------------------------------------------------
#       Gap Scan Start
# --------------------------------------------------------------------------------


class ScanCell(BaseModel):
    model_config = ConfigDict(frozen=True)

    q: float
    L: int
    H: int
    N: int
    form: str = FULL_FORM
    method: str = AUTO_METHOD


class ScanResult(BaseModel):
    rows: List[Dict[str, Any]] = []
    failures: List[Dict[str, Any]] = []

    def sup_rows(self) -> List[Dict[str, Any]]:
        return [row for row in self.rows if row["N"] == SUP_ROW]

    def sector_rows(self) -> List[Dict[str, Any]]:
        return [row for row in self.rows if row["N"] != SUP_ROW]


def scan_particles(L: int, H: int) -> List[int]:
    """ N = 1..ceil(LH/2); the remaining sectors follow by particle-hole symmetry."""
    return [N for N in range(1, math.ceil(L * H / 2) + 1) if N < L * H]


def sector_operator(cell: ScanCell, cap: Optional[int] = None) -> ReversibleOperator:
    if cell.form == BERNOULLI_LAPLACE_FORM:
        return bernoulli_laplace(cell.L, cell.N)
    params = EnsembleParams.create(q=cell.q, L=cell.L, H=cell.H, N=cell.N)
    if cell.form == FULL_FORM:
        return full_generator(params, cap=cap)
    if cell.form == MODIFIED_FORM:
        return modified_generator(params, cap=cap, allow_non_ergodic=True)
    raise InvalidParams(f"(Variational) Unknown Dirichlet form '{cell.form}'.")


def gap_cell(cell: ScanCell) -> Dict[str, Any]:
    start = time.perf_counter()
    op = sector_operator(cell)
    report = solve_gap(op, cell.method)
    return {
        "q": cell.q,
        "L": cell.L,
        "H": cell.H,
        "N": cell.N,
        "dim": op.dim,
        "form": cell.form,
        "gap": report.gap,
        "gamma": report.gamma,
        "method": report.method,
        "residual": report.residual,
        "iterations": report.iterations,
        "seconds": time.perf_counter() - start,
    }


def summarize(rows: List[Dict[str, Any]]) -> Dict[str, Any]:
    """ Sup over N of gamma for one (L, H) block of sector rows."""
    worst = max(rows, key=lambda row: row["gamma"])
    return {
        **worst,
        "N": SUP_ROW,
        "dim": max(row["dim"] for row in rows),
        "gap": min(row["gap"] for row in rows),
        "residual": max(row["residual"] for row in rows),
        "iterations": sum(row["iterations"] for row in rows),
        "seconds": sum(row["seconds"] for row in rows),
    }


def run_cells(cells: Sequence[ScanCell], jobs: int = 1, context: Optional[RunContext] = None) -> ScanResult:
    context = context or RunContext("scan")
    outcomes = WorkflowRunner(context).run_parallel(gap_cell, cells, jobs=jobs)

    result = ScanResult()
    blocks: Dict[tuple, List[Dict[str, Any]]] = {}
    for cell, outcome in zip(cells, outcomes):
        if isinstance(outcome, Exception):
            context.error(f"(Variational) Cell {cell.model_dump()} failed: {outcome}")
            result.failures.append({**cell.model_dump(), "error": f"{type(outcome).__name__}: {outcome}"})
            continue
        blocks.setdefault((cell.form, cell.q, cell.L, cell.H), []).append(outcome)

    for rows in blocks.values():
        result.rows.extend(rows)
        result.rows.append(summarize(rows))

    context.extend_results(result.rows)
    context.success(f"(Variational) Scanned {len(cells)} cells, {len(result.failures)} failed.")
    return result


def gamma_scan(
    q: float,
    L_values: Sequence[int],
    H_values: Sequence[int],
    form: str = FULL_FORM,
    method: str = AUTO_METHOD,
    N_values: Optional[Sequence[int]] = None,
    jobs: int = 1,
    context: Optional[RunContext] = None,
) -> ScanResult:
    """
    gamma(L, H) (full form) or gamma-tilde(L, H) (modified form): per sector
    rows plus one sup row per (L, H). Failing cells are collected, the scan goes on.
    """
    cells = []
    for L in L_values:
        for H in (H_values if form != BERNOULLI_LAPLACE_FORM else [1]):
            sectors = scan_particles(L, H) if N_values is None else [N for N in N_values if 0 < N < L * H]
            cells.extend(ScanCell(q=q, L=L, H=H, N=N, form=form, method=method) for N in sectors)
    logger.info(f"[+] {form} scan over {len(cells)} sectors (q={q}, jobs={jobs})")
    return run_cells(cells, jobs=jobs, context=context)


def bernoulli_laplace_scan(L_values: Sequence[int], method: str = AUTO_METHOD, jobs: int = 1, context: Optional[RunContext] = None) -> ScanResult:
    """ gamma-tilde of the complete-graph exchange; every sup row is 1/2."""
    return gamma_scan(1.0, [L for L in L_values if L >= 2], [1], form=BERNOULLI_LAPLACE_FORM, method=method, jobs=jobs, context=context)


def gamma_tilde(q: float, L: int, H: int, method: str = AUTO_METHOD) -> float:
    """ sup over N of var / D-tilde; infinite where the modified form is not ergodic."""
    result = gamma_scan(q, [L], [H], form=MODIFIED_FORM, method=method)
    if result.failures:
        raise ReportedFailure(f"(Variational) gamma-tilde({L},{H}) has failing sectors.", failures=result.failures)
    return max(row["gamma"] for row in result.sup_rows())


# --------------------------------------------------------------------------------
#       Gap Scan End
# --------------------------------------------------------------------------------



# --------------------------------------------------------------------------------
#       Operator K Start
# --------------------------------------------------------------------------------


class KSpectrumReport(BaseModel):
    params: EnsembleParams
    eigenvalues: List[float]
    eig_top: float
    eig_nbar: float
    top_residual: float
    nbar_residual: float
    third_modulus: float
    gap: float
    w: float


def _k_symmetric(op: ReversibleOperator) -> np.ndarray:
    root = np.sqrt(op.pi)
    similar = root[:, None] * op.kernel().toarray() / root[None, :]
    return 0.5 * (similar + similar.T)


def _restricted_spectrum(symmetric: np.ndarray, excluded: np.ndarray) -> np.ndarray:
    """ Eigenvalues of the compression to the orthogonal complement of the rows of `excluded`."""
    basis = la.null_space(np.atleast_2d(excluded))
    if basis.shape[1] == 0:
        return np.zeros(0)
    return la.eigvalsh(basis.T @ symmetric @ basis)


def k_gap(params: EnsembleParams) -> float:
    """ gap(I - K) over nu_0-mean-zero functions of one stick."""
    if params.is_degenerate:
        raise DegenerateSector(f"(Variational) K is trivial on the degenerate sector {params}.")
    op = operator_K(params)
    if op.dim < 2:
        raise DegenerateSector(f"(Variational) Stick occupation is frozen for {params}.")
    spectrum = _restricted_spectrum(_k_symmetric(op), np.sqrt(op.pi))
    return float(1.0 - spectrum.max())


def k_w(q: float, L: int, H: int) -> float:
    """ w(L, H) = sup_N 1 / gap(I - K)."""
    w = 0.0
    for N in range(1, L * H):
        gap = k_gap(EnsembleParams.create(q=q, L=L, H=H, N=N))
        w = max(w, float("inf") if gap <= settings.ZERO_TOL else 1.0 / gap)
    return w


def k_spectrum_report(params: EnsembleParams, with_w: bool = True) -> KSpectrumReport:
    if params.L < 2:
        raise InvalidParams(f"(Variational) The K spectrum needs L >= 2, got L={params.L}.")
    if params.is_degenerate:
        raise DegenerateSector(f"(Variational) K is trivial on the degenerate sector {params}.")

    op = operator_K(params)
    K = op.meta["stochastic"]
    nbar = op.meta["nbar"]
    pi = op.pi
    ones = np.ones(op.dim)
    target = -1.0 / (params.L - 1)

    top_residual = float(np.abs(K @ ones - ones).max())
    nbar_residual = float(np.abs(K @ nbar - target * nbar).max())
    norm = float(pi @ nbar**2)
    eig_nbar = float(pi @ (nbar * (K @ nbar)) / norm) if norm > 0 else float("nan")

    symmetric = _k_symmetric(op)
    root = np.sqrt(pi)
    eigenvalues = la.eigvalsh(symmetric)
    third = _restricted_spectrum(symmetric, np.vstack([root, root * nbar]))
    gap = float(1.0 - _restricted_spectrum(symmetric, root).max()) if op.dim > 1 else float("inf")

    report = KSpectrumReport(
        params=params,
        eigenvalues=eigenvalues.tolist(),
        eig_top=float(eigenvalues.max()),
        eig_nbar=eig_nbar,
        top_residual=top_residual,
        nbar_residual=nbar_residual,
        third_modulus=float(np.abs(third).max()) if third.size else 0.0,
        gap=gap,
        w=k_w(params.q, params.L, params.H) if with_w else float("nan"),
    )
    logger.debug(f"[+] K spectrum {params}: nbar residual {nbar_residual:.2e}, third {report.third_modulus:.4e}")
    return report


class KDecayTrend(BaseModel):
    q: float
    H: int
    rows: List[Dict[str, float]]
    monotone: bool
    scaled_bound: bool


def k_decay_trend(q: float, H: int, L_values: Sequence[int]) -> KDecayTrend:
    """
    third_modulus(L) at N = ceil(LH/4); flags a non-increasing sequence and
    third_modulus * L staying below its value at the first L. Never fails.
    """
    rows = []
    for L in sorted(L for L in L_values if L >= 3):
        N = max(1, math.ceil(L * H / 4))
        report = k_spectrum_report(EnsembleParams.create(q=q, L=L, H=H, N=N), with_w=False)
        rows.append({"L": L, "N": N, "third_modulus": report.third_modulus, "scaled": report.third_modulus * L})

    thirds = [row["third_modulus"] for row in rows]
    scaled = [row["scaled"] for row in rows]
    monotone = all(b <= a + settings.EIGEN_TOL for a, b in zip(thirds, thirds[1:]))
    scaled_bound = bool(scaled) and all(s <= scaled[0] + settings.EIGEN_TOL for s in scaled)
    if not monotone or not scaled_bound:
        logger.warning(f"[!] K decay trend at q={q}, H={H} is not monotone in L (monotone={monotone}, scaled={scaled_bound})")
    return KDecayTrend(q=q, H=H, rows=rows, monotone=monotone, scaled_bound=scaled_bound)


# --------------------------------------------------------------------------------
#       Operator K End
# --------------------------------------------------------------------------------



# --------------------------------------------------------------------------------
#       Recursion Start
# --------------------------------------------------------------------------------


class RecursionReport(BaseModel):
    params: EnsembleParams
    variance_decomposition: float
    p_identity: float
    class_a: float
    iteration_bound: float = 0.0
    gamma_tilde: Optional[float] = None
    gamma_tilde_previous: Optional[float] = None
    w: Optional[float] = None
    iteration_holds: Optional[bool] = None
    failures: List[Dict[str, Any]] = []


def random_functions(dim: int, count: Optional[int] = None, seed: Optional[int] = None) -> np.ndarray:
    count = settings.N_RANDOM_FUNCTIONS if count is None else count
    seed = settings.RANDOM_SEED if seed is None else seed
    return np.random.Generator(np.random.Philox(seed)).standard_normal((count, dim))


def variance_decomposition_deviation(pi: np.ndarray, patterns: np.ndarray, functions: np.ndarray) -> float:
    """ var(f) = (1/L) sum_k [nu(var(f | F_k)) + var(nu(f | F_k))], worst relative defect."""
    L = patterns.shape[1]
    worst = 0.0
    for f in functions:
        mean = pi @ f
        variance = float(pi @ (f - mean) ** 2)
        inner = sum(float(pi @ conditional_variance(pi, patterns[:, k], f)) for k in range(L)) / L
        outer = sum(float(pi @ (conditional_expectation(pi, patterns[:, k], f) - mean) ** 2) for k in range(L)) / L
        worst = max(worst, abs(variance - inner - outer) / max(1.0, variance))
    return worst


def p_identity_deviation(pi: np.ndarray, patterns: np.ndarray, stochastic, functions: np.ndarray) -> float:
    """ (1/L) sum_k var(nu(f | F_k)) = nu(f P f) for mean-zero f, worst relative defect."""
    L = patterns.shape[1]
    worst = 0.0
    for f in functions:
        g = f - pi @ f
        outer = sum(float(pi @ conditional_expectation(pi, patterns[:, k], g) ** 2) for k in range(L)) / L
        worst = max(worst, abs(outer - float(pi @ (g * (stochastic @ g)))) / max(1.0, float(pi @ g**2)))
    return worst


def class_a_deviation(params: EnsembleParams, basis, stochastic, coefficients: np.ndarray) -> float:
    """ (I - P) f = (L-2)/(L-1) f for f = sum_l a_l n_bar(eta_l)."""
    L = params.L
    f = class_a_function(params, basis, coefficients)
    relation = (f - stochastic @ f) - (L - 2) / (L - 1) * f
    return float(np.abs(relation).max()) / max(1.0, float(np.abs(f).max()))


def iteration_bound_deviation(pi: np.ndarray, stochastic, modified: ReversibleOperator, previous: float, functions: np.ndarray) -> float:
    """ nu(f (I - P) f) <= (L-2)/(L-1) gamma-tilde(L-1, H) D-tilde(f, f), worst relative excess."""
    if not math.isfinite(previous):
        return 0.0
    L = modified.meta["params"].L
    worst = 0.0
    for f in functions:
        g = f - pi @ f
        lhs = float(pi @ (g * (g - stochastic @ g)))
        rhs = (L - 2) / (L - 1) * previous * modified.dirichlet_form(g)
        worst = max(worst, max(0.0, lhs - rhs) / max(1.0, lhs))
    return worst


def recursion_check(
    params: EnsembleParams,
    n_functions: Optional[int] = None,
    seed: Optional[int] = None,
    with_iteration: bool = True,
    strict: bool = True,
    raise_on_failure: bool = True,
) -> RecursionReport:
    """
    Exact identities behind the iteration in L, on one sector: the variance
    decomposition over the stick sigma-algebras, the P identity, the class of
    n_bar combinations as an eigenspace of P and the bound of nu(f (I - P) f)
    by gamma-tilde(L-1, H) D-tilde(f, f).

    gamma-tilde(L) <= max(1, w) gamma-tilde(L-1) is reported in
    `iteration_holds` and fails the check unless `strict` is turned off.
    """
    if params.L < 2 or params.is_degenerate:
        raise InvalidParams(f"(Variational) Recursion checks need L >= 2 and a nondegenerate sector, got {params}.")

    P = operator_P(params)
    pi, patterns, stochastic = P.pi, P.meta["patterns"], P.meta["stochastic"]
    L = params.L
    functions = random_functions(P.dim, n_functions, seed)
    tol, eigen_tol = settings.CHECK_TOL, settings.EIGEN_TOL

    report = RecursionReport(
        params=params,
        variance_decomposition=variance_decomposition_deviation(pi, patterns, functions),
        p_identity=p_identity_deviation(pi, patterns, stochastic, functions),
        class_a=class_a_deviation(params, P.meta["basis"], stochastic, random_functions(L, 1, seed)[0]),
    )
    failures = [
        {"identity": name, "deviation": value, "tolerance": limit}
        for name, value, limit in (
            ("variance-decomposition", report.variance_decomposition, tol),
            ("p-identity", report.p_identity, tol),
            ("class-a", report.class_a, eigen_tol),
        )
        if not value <= limit
    ]

    if with_iteration and L >= 3:
        previous = gamma_tilde(params.q, L - 1, params.H)
        bound = iteration_bound_deviation(pi, stochastic, modified_generator(params), previous, functions)
        if not bound <= eigen_tol:
            failures.append({"identity": "iteration-bound", "deviation": bound, "tolerance": eigen_tol})

        current = gamma_tilde(params.q, L, params.H)
        w = k_w(params.q, L, params.H)
        holds = not math.isfinite(previous) or current <= max(1.0, w) * previous + 1e-9
        report = report.model_copy(update={
            "iteration_bound": bound,
            "gamma_tilde": current,
            "gamma_tilde_previous": previous,
            "w": w,
            "iteration_holds": holds,
        })
        if not holds:
            logger.warning(f"[!] gamma-tilde iteration does not hold at {params}: {current:.6f} > max(1, {w:.6f}) * {previous:.6f}")
            if strict:
                failures.append({"identity": "gamma-tilde-iteration", "deviation": current - max(1.0, w) * previous, "tolerance": 1e-9})

    report = report.model_copy(update={"failures": failures})
    if failures and raise_on_failure:
        logger.error(f"[!] Recursion checks failed at {params}: {failures}")
        raise ReportedFailure(f"(Variational) {len(failures)} recursion identities failed at {params}.", failures=failures)
    return report



# --------------------------------------------------------------------------------
#       Recursion End
# --------------------------------------------------------------------------------



# --------------------------------------------------------------------------------
#       Bounds Start
# --------------------------------------------------------------------------------


def observed_row(params: EnsembleParams) -> int:
    """ h0 = round(rho), kept inside [1, H]."""
    return int(min(params.H, max(1, math.floor(params.rho + 0.5))))


def test_function_bound(params: EnsembleParams) -> float:
    """ Rayleigh quotient of f(omega) = omega_{h0}: an upper bound on the profile gap."""
    op = profile_generator(params)
    f = op.states[:, observed_row(params) - 1].astype(np.float64)
    return rayleigh_quotient(op, f)


def spectrum_inclusion_deviation(sub: Sequence[float], sup: Sequence[float]) -> float:
    """ Worst distance of the best one-to-one matching of `sub` into `sup`."""
    sub, sup = np.asarray(sub, dtype=np.float64), np.asarray(sup, dtype=np.float64)
    if sub.size > sup.size:
        raise DimensionMismatch(f"(Variational) Cannot include {sub.size} eigenvalues into {sup.size}.")
    if sub.size == 0:
        return 0.0
    cost = np.abs(sub[:, None] - sup[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


# --------------------------------------------------------------------------------
#       Bounds End
# --------------------------------------------------------------------------------



# --------------------------------------------------------------------------------
#       Quantum Gap Tables Start
# --------------------------------------------------------------------------------


def hamiltonian_gap(result: ConjugationResult) -> SpectrumReport:
    """
    Gap above the zero-energy ground state, read from the conjugated stochastic
    operator: spec(H) = |factor| * spec(-G).
    """
    report = solve_gap(result.reference)
    scale = abs(result.factor)
    return report.model_copy(update={
        "gap": scale * report.gap,
        "eigenvalues": [scale * v for v in report.eigenvalues],
    })


def band_ratio(values: Sequence[float]) -> float:
    values = [v for v in values if v > 0 and math.isfinite(v)]
    if not values:
        return float("nan")
    return max(values) / min(values)


def default_sector(twiceS: int, sites: int) -> int:
    """ Sector 2n closest to zero."""
    return (twiceS * sites) % 2


def xxz_gap_table(
    Delta_values: Sequence[float],
    twiceS_values: Sequence[int],
    H_values: Sequence[int],
    sectors: Optional[Sequence[int]] = None,
) -> List[Dict[str, Any]]:
    rows = []
    for Delta in Delta_values:
        for twiceS in twiceS_values:
            for H in H_values:
                base = XXZParams.create(twiceS=twiceS, H=H, Delta=Delta, sector_2n=default_sector(twiceS, H))
                chosen = [s for s in base.sectors() if abs(s) < twiceS * H] if sectors is None else list(sectors)
                for sector_2n in chosen:
                    xxz = base.with_sector(sector_2n)
                    result = conjugate_to_profile(xxz)
                    report = hamiltonian_gap(result)
                    rows.append({
                        "Delta": Delta,
                        "q": xxz.q,
                        "twiceS": twiceS,
                        "H": H,
                        "R": None,
                        "sector_2n": sector_2n,
                        "dim": report.dim,
                        "gap": report.gap,
                        "gap_over_S": report.gap / xxz.S,
                        "gap_times_R2_over_S": None,
                        "equivalence_residual": result.residual,
                    })
    logger.info(f"[+] XXZ gap table with {len(rows)} rows")
    return rows


def diagonal_gap_table(
    Delta_values: Sequence[float],
    twiceS_values: Sequence[int],
    R_values: Sequence[int],
    H_values: Sequence[int],
    sectors: Optional[Sequence[int]] = None,
) -> List[Dict[str, Any]]:
    rows = []
    for Delta in Delta_values:
        for twiceS in twiceS_values:
            for R in R_values:
                for H in H_values:
                    region = diagonal_region(R, H)
                    bound = twiceS * region.size
                    chosen = [default_sector(twiceS, region.size)] if sectors is None else list(sectors)
                    for sector_2n in chosen:
                        if abs(sector_2n) >= bound:
                            raise DegenerateSector(f"(Variational) Sector 2n={sector_2n} of the region R={R}, H={H} is a single state.")
                        result = conjugate_diagonal(region, twiceS, Delta, sector_2n)
                        report = hamiltonian_gap(result)
                        S = twiceS / 2.0
                        rows.append({
                            "Delta": Delta,
                            "q": result.reference.meta["q"],
                            "twiceS": twiceS,
                            "H": H,
                            "R": R,
                            "sector_2n": sector_2n,
                            "dim": report.dim,
                            "gap": report.gap,
                            "gap_over_S": report.gap / S,
                            "gap_times_R2_over_S": report.gap * R * R / S,
                            "equivalence_residual": result.residual,
                        })
    logger.info(f"[+] Diagonal gap table with {len(rows)} rows")
    return rows


# --------------------------------------------------------------------------------
#       Quantum Gap Tables End
# --------------------------------------------------------------------------------



# --------------------------------------------------------------------------------
#       Scaling Trends Start
# --------------------------------------------------------------------------------


class ScalingBand(BaseModel):
    """
    One scaling trend: `value` per row, the max/min ratio over the rows and
    the band factor it has to stay within. `growing` names the rows of the
    table along which the value increases strictly over three or more points.
    """

    name: str
    key: str
    rows: List[Dict[str, Any]]
    ratio: float
    factor: float
    growing: List[str] = []

    @property
    def within(self) -> bool:
        return bool(self.ratio <= self.factor)


def _grows(values: Sequence[float]) -> bool:
    return len(values) >= 3 and all(b > a + settings.EIGEN_TOL for a, b in zip(values, values[1:]))


def _band(name: str, key: str, rows: List[Dict[str, Any]], factor: float, growing: Optional[List[str]] = None) -> ScalingBand:
    band = ScalingBand(name=name, key=key, rows=rows, ratio=band_ratio([row[key] for row in rows]), factor=factor, growing=growing or [])
    if not band.within:
        logger.warning(f"[!] {name}: {key} spreads by {band.ratio:.3f} > {factor}")
    if band.growing:
        logger.warning(f"[!] {name}: {key} grows along {band.growing}")
    logger.info(f"[+] {name}: {key} band ratio {band.ratio:.4f} over {len(rows)} rows")
    return band


def gamma_band(q: float, L_values: Sequence[int], H_values: Sequence[int], method: str = AUTO_METHOD, jobs: int = 1) -> ScalingBand:
    """
    sup_N gamma(L, H) over a grid of rectangles. The values should stay within
    GAMMA_BAND of each other with no sustained growth in L or in H.
    """
    result = gamma_scan(q, L_values, H_values, method=method, jobs=jobs)
    if result.failures:
        raise ReportedFailure(f"(Variational) gamma band at q={q} has failing sectors.", failures=result.failures)

    table = {(row["L"], row["H"]): row["gamma"] for row in result.sup_rows()}
    Ls, Hs = sorted(set(L_values)), sorted(set(H_values))
    growing = [f"H={H}" for H in Hs if _grows([table[(L, H)] for L in Ls])]
    growing += [f"L={L}" for L in Ls if _grows([table[(L, H)] for H in Hs])]
    rows = [{"q": q, "L": L, "H": H, "gamma": table[(L, H)]} for L in Ls for H in Hs]
    return _band(f"gamma(q={q})", "gamma", rows, GAMMA_BAND, growing)


def xxz_scaling_band(Delta: float, twiceS_values: Sequence[int], H: int) -> ScalingBand:
    """ gap/S of the kink chain against S; the gap is the minimum over the non-extreme sectors."""
    per_spin: Dict[int, Dict[str, Any]] = {}
    for row in xxz_gap_table([Delta], twiceS_values, [H]):
        best = per_spin.get(row["twiceS"])
        if best is None or row["gap_over_S"] < best["gap_over_S"]:
            per_spin[row["twiceS"]] = row
    rows = [per_spin[twiceS] for twiceS in sorted(per_spin)]
    return _band(f"xxz(Delta={Delta},H={H})", "gap_over_S", rows, GAP_OVER_S_BAND)


def diagonal_scaling_band(Delta: float, R_values: Sequence[int], H: int, twiceS: int = 1) -> ScalingBand:
    """ gap R^2 / S of the diagonal interface against R, in the sector nearest zero."""
    rows = diagonal_gap_table([Delta], [twiceS], sorted(R_values), [H])
    return _band(f"diagonal(Delta={Delta},H={H},2S={twiceS})", "gap_times_R2_over_S", rows, GAP_R2_BAND)


# --------------------------------------------------------------------------------
#       Scaling Trends End
# --------------------------------------------------------------------------------
