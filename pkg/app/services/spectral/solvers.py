"""
Spectral gap of a reversible operator.

The operator is symmetrized with the square root of its stationary weights and
the positive form is diagonalized either densely (scipy.linalg.eigh) or with
Lanczos (scipy.sparse.linalg.eigsh) after deflating the constant mode.
"""

from __future__ import annotations

import time
from typing import List, Optional

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict, Field
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from app.core.config import settings
from app.core.constants import AUTO_METHOD, DENSE_METHOD, ITERATIVE_METHOD
from app.core.logging import Logger
from app.framework.context import RunContext
from app.framework.errors import CapExceeded, DegenerateSector, InvalidParams, NoConvergence, ZeroWeightState
from app.framework.operator import ReversibleOperator
from app.framework.solvers import Solver

logger = Logger(name="SpectralSolvers")



# --------------------------------------------------------------------------------
#       Report Start
# --------------------------------------------------------------------------------


class SpectrumReport(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    label: str
    dim: int
    eigenvalues: List[float]
    gap: float
    method: str
    residual: float
    iterations: int
    zero_multiplicity: int = 1
    degenerate_spectrum: bool = False
    seconds: float = 0.0
    eigenvector: Optional[np.ndarray] = Field(default=None, exclude=True, repr=False)

    @property
    def gamma(self) -> float:
        """ sup_f var(f) / D(f, f); infinite when the kernel is larger than the constants."""
        if self.degenerate_spectrum or self.gap <= 0:
            return float("inf")
        return 1.0 / self.gap


# --------------------------------------------------------------------------------
#       Report End
# --------------------------------------------------------------------------------



# --------------------------------------------------------------------------------
#       Symmetrization Start
# --------------------------------------------------------------------------------


def symmetrize(op: ReversibleOperator) -> sp.csr_matrix:
    """ D^{1/2} G D^{-1/2} with D = diag(pi), averaged with its transpose."""
    if np.any(op.pi <= 0.0):
        raise ZeroWeightState(f"(SpectralSolvers) {op.label} has {int(np.sum(op.pi <= 0.0))} states of zero weight.")
    root = np.sqrt(op.pi)
    similar = (sp.diags(root) @ op.generator() @ sp.diags(1.0 / root)).tocsr()
    return (0.5 * (similar + similar.T)).tocsr()


def _gap_vector(op: ReversibleOperator, v: np.ndarray) -> np.ndarray:
    """ Eigenfunction f = D^{-1/2} v, normalized in L^2(pi)."""
    f = v / np.sqrt(op.pi)
    return f / np.sqrt(op.pi @ f**2)


def rayleigh_quotient(op: ReversibleOperator, f: np.ndarray) -> float:
    """ D(f, f) / var(f); bounds the gap from above, with equality on the gap eigenfunction."""
    variance = op.variance(f)
    if variance <= 0.0:
        raise InvalidParams(f"(SpectralSolvers) Rayleigh quotient of a constant function on {op.label}.")
    return op.dirichlet_form(f) / variance


# --------------------------------------------------------------------------------
#       Symmetrization End
# --------------------------------------------------------------------------------



# --------------------------------------------------------------------------------
#       Dense Solve Start
# --------------------------------------------------------------------------------


def dense_gap(op: ReversibleOperator, cap: Optional[int] = None, zero_tol: Optional[float] = None) -> SpectrumReport:
    cap = settings.DENSE_CAP if cap is None else cap
    zero_tol = settings.ZERO_TOL if zero_tol is None else zero_tol
    if op.dim > cap:
        raise CapExceeded(f"(SpectralSolvers) {op.label} has dim {op.dim} above the dense cap {cap}.", size=op.dim, cap=cap)
    if op.dim < 2:
        raise DegenerateSector(f"(SpectralSolvers) {op.label} has a single state; no gap.")

    start = time.perf_counter()
    positive = -symmetrize(op).toarray()
    values, vectors = la.eigh(positive)

    zero_multiplicity = int(np.sum(np.abs(values) <= zero_tol))
    above = np.flatnonzero(values > zero_tol)
    k = int(above[0]) if above.size else values.size - 1
    gap, v = float(values[k]), vectors[:, k]
    residual = float(np.linalg.norm(positive @ v - gap * v))
    seconds = time.perf_counter() - start

    if zero_multiplicity > 1:
        logger.warning(f"[!] {op.label}: zero eigenvalue has multiplicity {zero_multiplicity}")
    logger.performance(f"Dense solve {op.label} (dim={op.dim}): {seconds:.3f}s")

    return SpectrumReport(
        label=op.label,
        dim=op.dim,
        eigenvalues=values.tolist(),
        gap=gap,
        method=DENSE_METHOD,
        residual=residual,
        iterations=1,
        zero_multiplicity=zero_multiplicity,
        degenerate_spectrum=zero_multiplicity > 1,
        seconds=seconds,
        eigenvector=_gap_vector(op, v),
    )


# --------------------------------------------------------------------------------
#       Dense Solve End
# --------------------------------------------------------------------------------



# --------------------------------------------------------------------------------
#       Lanczos Start
# --------------------------------------------------------------------------------


def iterative_gap(op: ReversibleOperator, tol: Optional[float] = None, maxiter: Optional[int] = None, zero_tol: Optional[float] = None) -> SpectrumReport:
    """
    Lanczos on B = c I - A - c u u^T, where A is the symmetrized positive form,
    u = sqrt(pi) its zero mode and c a Gershgorin bound of A. The top of the
    spectrum of B is c - gap.
    """
    tol = settings.LANCZOS_TOL if tol is None else tol
    maxiter = settings.LANCZOS_MAXITER if maxiter is None else maxiter
    zero_tol = settings.ZERO_TOL if zero_tol is None else zero_tol
    if op.dim < 2:
        raise DegenerateSector(f"(SpectralSolvers) {op.label} has a single state; no gap.")
    if op.dim < 4:
        logger.debug(f"[+] {op.label}: dim {op.dim} too small for Lanczos, solving densely")
        return dense_gap(op, zero_tol=zero_tol)

    start = time.perf_counter()
    positive = (-symmetrize(op)).tocsr()
    u = np.sqrt(op.pi)
    u = u / np.linalg.norm(u)
    c = float(abs(positive).sum(axis=1).max())
    counter = {"matvec": 0}

    def matvec(x: np.ndarray) -> np.ndarray:
        counter["matvec"] += 1
        x = np.ravel(x)
        return c * x - positive @ x - c * u * (u @ x)

    shifted = LinearOperator((op.dim, op.dim), matvec=matvec, dtype=np.float64)
    try:
        _, vectors = eigsh(shifted, k=1, which="LA", tol=tol, maxiter=maxiter, v0=np.random.default_rng(settings.RANDOM_SEED).standard_normal(op.dim))
    except ArpackNoConvergence as e:
        best = float(c - e.eigenvalues[0]) if len(e.eigenvalues) else None
        residual = None
        if len(e.eigenvalues):
            v = e.eigenvectors[:, 0]
            residual = float(np.linalg.norm(positive @ v - best * v)) / max(c, 1.0)
        logger.error(f"[!] Lanczos did not converge on {op.label} after {counter['matvec']} products")
        raise NoConvergence(
            f"(SpectralSolvers) Lanczos did not converge on {op.label} within {maxiter} iterations.",
            best_estimate=best,
            residual=residual,
        ) from e

    v = vectors[:, 0]
    gap = float(v @ (positive @ v))
    residual = float(np.linalg.norm(positive @ v - gap * v)) / max(c, 1.0)
    seconds = time.perf_counter() - start
    degenerate = gap <= zero_tol

    if residual > tol:
        logger.warning(f"[!] {op.label}: Lanczos residual {residual:.2e} above {tol:.1e}")
    logger.performance(f"Lanczos solve {op.label} (dim={op.dim}): {seconds:.3f}s, {counter['matvec']} products")

    return SpectrumReport(
        label=op.label,
        dim=op.dim,
        eigenvalues=[0.0, gap],
        gap=gap,
        method=ITERATIVE_METHOD,
        residual=residual,
        iterations=counter["matvec"],
        zero_multiplicity=2 if degenerate else 1,
        degenerate_spectrum=degenerate,
        seconds=seconds,
        eigenvector=_gap_vector(op, v),
    )


# --------------------------------------------------------------------------------
#       Lanczos End
# --------------------------------------------------------------------------------



# --------------------------------------------------------------------------------
#       Solvers Start
# --------------------------------------------------------------------------------


class DenseSolver(Solver):
    name: str = DENSE_METHOD
    description: str = "Full symmetric eigensolve of the positive form."

    def run(self, op: ReversibleOperator) -> SpectrumReport:
        report = dense_gap(op)
        self.update_context(op.label, report)
        return report


class LanczosSolver(Solver):
    name: str = ITERATIVE_METHOD
    description: str = "Lanczos on the deflated, shifted positive form."

    def validate_output(self, report: SpectrumReport) -> bool:
        return super().validate_output(report) and report.residual <= settings.LANCZOS_TOL

    def run(self, op: ReversibleOperator) -> SpectrumReport:
        report = iterative_gap(op)
        self.update_context(op.label, report)
        return report


def make_solver(method: str = AUTO_METHOD, dim: int = 0, context: Optional[RunContext] = None) -> Solver:
    if method == AUTO_METHOD:
        method = DENSE_METHOD if dim <= settings.DENSE_CAP else ITERATIVE_METHOD
    if method == DENSE_METHOD:
        return DenseSolver(context)
    if method == ITERATIVE_METHOD:
        return LanczosSolver(context)
    raise InvalidParams(f"(SpectralSolvers) Unknown solver '{method}'.")


def solve_gap(op: ReversibleOperator, method: str = AUTO_METHOD, context: Optional[RunContext] = None) -> SpectrumReport:
    """ Dense below DENSE_CAP, Lanczos above, unless `method` forces one."""
    solver = make_solver(method, op.dim, context)
    report = solver.run(op)
    if not solver.validate_output(report):
        logger.warning(f"[!] {solver.name} report for {op.label} failed validation (gap={report.gap}, residual={report.residual:.2e})")
    return report


# --------------------------------------------------------------------------------
#       Solvers End
# --------------------------------------------------------------------------------
