"""
    To run all tests: pytest -s
    To run this module: pytest -s tests/spectral_test.py
"""
import math

import numpy as np
import pytest
import scipy.sparse as sp

from app.core.constants import DENSE_METHOD, ITERATIVE_METHOD, MODIFIED_FORM
from app.framework.errors import CapExceeded, DegenerateSector
from app.framework.operator import ReversibleOperator
from app.services.operators.lattice import full_generator, profile_generator
from app.services.spectral import variational
from app.services.spectral.solvers import dense_gap, iterative_gap, rayleigh_quotient, solve_gap, symmetrize
from app.services.spectral.variational import (
    bernoulli_laplace_scan,
    diagonal_scaling_band,
    gamma_band,
    gamma_scan,
    gamma_tilde,
    k_decay_trend,
    k_spectrum_report,
    recursion_check,
    scan_particles,
    xxz_gap_table,
    xxz_scaling_band,
    diagonal_gap_table,
)
from app.services.state_space import EnsembleParams


def params(q=0.5, L=2, H=2, N=2):
    return EnsembleParams.create(q=q, L=L, H=H, N=N)


def test_symmetrized_two_state_chain():
    q = 0.5
    op = full_generator(params(q=q, L=1, H=2, N=1))
    symmetric = symmetrize(op).toarray()
    assert np.allclose(symmetric, symmetric.T)
    assert np.allclose(np.sort(np.linalg.eigvalsh(symmetric)), [-(q + 1.0 / q), 0.0], atol=1e-12)


def test_dense_and_iterative_agree():
    op = full_generator(params(q=0.5, L=2, H=3, N=3))
    dense = dense_gap(op)
    iterative = iterative_gap(op)
    assert dense.method == DENSE_METHOD and iterative.method == ITERATIVE_METHOD
    assert iterative.gap == pytest.approx(dense.gap, rel=1e-7)
    assert dense.residual <= 1e-10


def test_dense_and_iterative_agree_on_a_larger_sector():
    op = full_generator(params(q=0.5, L=3, H=3, N=4))
    assert op.dim == 126
    dense = dense_gap(op)
    iterative = iterative_gap(op)
    assert iterative.method == ITERATIVE_METHOD
    assert iterative.gap == pytest.approx(dense.gap, rel=1e-7)
    assert iterative.gamma == pytest.approx(dense.gamma, rel=1e-7)


def test_gap_eigenfunction_is_centered():
    op = full_generator(params(q=0.3, L=3, H=2, N=3))
    report = dense_gap(op)
    f = report.eigenvector
    assert abs(op.pi @ f) <= 1e-10
    assert rayleigh_quotient(op, f) == pytest.approx(report.gap, abs=1e-10)


def test_dense_gap_limits():
    op = full_generator(params(q=0.5, L=2, H=3, N=3))
    with pytest.raises(CapExceeded):
        dense_gap(op, cap=10)
    single = ReversibleOperator(np.ones(1), sp.csr_matrix((1, 1)), label="single")
    with pytest.raises(DegenerateSector):
        dense_gap(single)


def test_disconnected_operator_has_infinite_gamma():
    rates = sp.lil_matrix((4, 4))
    rates[0, 1] = rates[1, 0] = 1.0
    rates[2, 3] = rates[3, 2] = 1.0
    op = ReversibleOperator(np.full(4, 0.25), rates, label="two-blocks")
    report = dense_gap(op)
    assert report.zero_multiplicity == 2
    assert report.degenerate_spectrum
    assert math.isinf(report.gamma)


def test_solve_gap_picks_dense_for_small_sectors():
    report = solve_gap(profile_generator(params(q=0.5, L=2, H=3, N=3)))
    assert report.method == DENSE_METHOD


def test_scan_particles_uses_the_lower_half():
    assert scan_particles(2, 2) == [1, 2]
    assert scan_particles(3, 3) == [1, 2, 3, 4, 5]
    assert scan_particles(1, 1) == []


def test_two_state_scan():
    q = 0.5
    result = gamma_scan(q, [1], [2])
    assert not result.failures
    (row,) = result.sup_rows()
    assert row["gap"] == pytest.approx(q + 1.0 / q, abs=1e-12)
    assert row["gamma"] == pytest.approx(1.0 / (q + 1.0 / q), abs=1e-12)


def test_bernoulli_laplace_scan():
    result = bernoulli_laplace_scan([3, 4, 5])
    assert not result.failures
    assert [row["L"] for row in result.sup_rows()] == [3, 4, 5]
    for row in result.sup_rows():
        assert row["gamma"] == pytest.approx(0.5, abs=1e-10)


def test_gamma_is_below_gamma_tilde():
    full = gamma_scan(0.5, [3], [2]).sup_rows()[0]["gamma"]
    assert full <= gamma_tilde(0.5, 3, 2) + 1e-10


def test_gamma_tilde_without_ergodicity_is_infinite():
    result = gamma_scan(0.5, [2], [2], form=MODIFIED_FORM)
    assert math.isinf(result.sup_rows()[0]["gamma"])


def test_k_spectrum_single_row():
    report = k_spectrum_report(params(q=0.5, L=3, H=1, N=1), with_w=False)
    assert np.allclose(sorted(report.eigenvalues), [-0.5, 1.0], atol=1e-12)
    assert report.eig_nbar == pytest.approx(-0.5, abs=1e-12)
    assert report.third_modulus == 0.0
    assert report.gap == pytest.approx(1.5, abs=1e-12)


def test_k_spectrum_residuals():
    report = k_spectrum_report(params(q=0.3, L=4, H=2, N=3))
    assert report.top_residual <= 1e-12
    assert report.nbar_residual <= 1e-10
    assert report.eig_top == pytest.approx(1.0, abs=1e-10)
    assert report.w >= 1.0 / report.gap - 1e-10


def test_k_decay_trend_rows():
    trend = k_decay_trend(0.5, 2, [2, 3, 4])
    assert [row["L"] for row in trend.rows] == [3, 4]
    assert all(row["third_modulus"] >= 0.0 for row in trend.rows)


def test_third_k_eigenvalue_decays_in_L():
    L_values = list(range(3, 11))
    trend = k_decay_trend(0.5, 2, L_values)
    assert [row["N"] for row in trend.rows] == [math.ceil(L / 2) for L in L_values]
    assert trend.monotone
    assert trend.scaled_bound

    thirds = [row["third_modulus"] for row in trend.rows]
    assert thirds[0] == pytest.approx(4.0 / 33.0, abs=1e-10)
    assert all(b < a for a, b in zip(thirds, thirds[1:]))
    assert all(third * L <= 3.0 * thirds[0] for third, L in zip(thirds, L_values))


def test_recursion_identities_hold():
    report = recursion_check(params(q=0.5, L=3, H=2, N=2), n_functions=10)
    assert not report.failures
    assert report.variance_decomposition <= 1e-12
    assert report.p_identity <= 1e-12
    assert report.class_a <= 1e-10
    assert report.iteration_bound <= 1e-10
    assert report.gamma_tilde_previous is not None


def test_gamma_tilde_iteration_holds():
    for L in (4, 5):
        report = recursion_check(params(q=0.5, L=L, H=2, N=L // 2), n_functions=10)
        assert not report.failures
        assert report.iteration_holds
        assert math.isfinite(report.gamma_tilde_previous)
        assert report.gamma_tilde <= max(1.0, report.w) * report.gamma_tilde_previous + 1e-9


def test_observable_bound_is_above_the_gap():
    for p in (params(q=0.5, L=2, H=3, N=3), params(q=0.8, L=3, H=2, N=2)):
        bound = variational.test_function_bound(p)
        assert bound >= dense_gap(profile_generator(p)).gap - 1e-12


def test_xxz_gap_table():
    (row,) = xxz_gap_table([2.0], [1], [2])
    assert row["sector_2n"] == 0
    assert row["gap"] == pytest.approx(1.0, abs=1e-10)
    assert row["gap_over_S"] == pytest.approx(2.0, abs=1e-10)
    assert row["equivalence_residual"] <= 1e-10


def test_diagonal_gap_table():
    rows = diagonal_gap_table([2.0], [1], [1], [2, 3])
    assert [row["H"] for row in rows] == [2, 3]
    assert all(row["gap"] > 0 for row in rows)
    with pytest.raises(DegenerateSector):
        diagonal_gap_table([2.0], [1], [1], [2], sectors=[3])


def test_gamma_band_over_small_rectangles():
    band = gamma_band(0.5, [2, 3, 4], [2, 3])
    assert [(row["L"], row["H"]) for row in band.rows] == [(2, 2), (2, 3), (3, 2), (3, 3), (4, 2), (4, 3)]
    # one particle on the bottom row leaves it at rate q, so gamma >= 1/q
    assert all(row["gamma"] >= 2.0 - 1e-9 for row in band.rows)
    assert band.within
    assert band.ratio <= 3.0


def test_gap_over_S_band():
    for H in (2, 3):
        band = xxz_scaling_band(1.01, [1, 2, 3], H)
        assert [row["twiceS"] for row in band.rows] == [1, 2, 3]
        assert band.within

    Delta = 2.0
    band = xxz_scaling_band(Delta, [1, 2, 3], 2)
    spin_one = (5.0 * Delta - math.sqrt(9.0 * Delta**2 - 8.0)) / (2.0 * Delta)
    assert [row["gap_over_S"] for row in band.rows[:2]] == pytest.approx([2.0, spin_one], abs=1e-9)
    assert band.ratio <= 3.0


def test_gap_R2_over_S_band():
    band = diagonal_scaling_band(1.01, [1, 2, 3], 2)
    assert [row["R"] for row in band.rows] == [1, 2, 3]
    assert band.within
    assert band.ratio <= 4.0

    first = band.rows[0]
    assert first["gap_times_R2_over_S"] == pytest.approx(1.0 / (first["Delta"] * first["q"]), rel=1e-9)
