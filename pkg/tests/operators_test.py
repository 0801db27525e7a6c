"""
    To run all tests: pytest -s
    To run this module: pytest -s tests/operators_test.py
"""
import numpy as np
import pytest

from app.framework.errors import DegenerateSector, InvalidParams
from app.services.operators.kernels import (
    bernoulli_laplace,
    bernoulli_laplace_spectrum,
    class_a_function,
    conditional_expectation,
    operator_K,
    operator_P,
)
from app.services.operators.lattice import (
    dirichlet_form,
    full_generator,
    lift_symmetric,
    lumping_deviation,
    modified_dirichlet_form,
    modified_generator,
    profile_generator,
)
from app.services.spectral.solvers import dense_gap
from app.services.spectral.variational import random_functions, spectrum_inclusion_deviation
from app.services.state_space import EnsembleParams


def params(q=0.5, L=2, H=2, N=2):
    return EnsembleParams.create(q=q, L=L, H=H, N=N)


def test_two_state_rates():
    q = 0.5
    op = full_generator(params(q=q, L=1, H=2, N=1))
    generator = op.generator().toarray()
    # state 0 holds the particle on row 1
    assert generator[0, 1] == pytest.approx(q)
    assert generator[1, 0] == pytest.approx(1.0 / q)
    assert dense_gap(op).gap == pytest.approx(q + 1.0 / q, abs=1e-12)


def test_generators_are_reversible():
    for op in (
        full_generator(params(L=2, H=2, N=2)),
        full_generator(params(q=0.3, L=3, H=2, N=3)),
        profile_generator(params(q=0.8, L=3, H=3, N=4)),
        modified_generator(params(q=0.5, L=3, H=2, N=2)),
    ):
        report = op.check()
        assert report["row_sum"] <= 1e-12
        assert report["negative_rate"] == 0.0
        assert report["detailed_balance"] <= 1e-12
        assert report["normalization"] <= 1e-12


def test_degenerate_sector_is_rejected():
    with pytest.raises(DegenerateSector):
        full_generator(params(L=2, H=2, N=4))
    with pytest.raises(InvalidParams):
        modified_generator(params(L=2, H=2, N=2))


def test_dirichlet_form():
    q = 0.5
    op = full_generator(params(q=q, L=1, H=2, N=1))
    assert dirichlet_form(op, np.ones(2)) == pytest.approx(0.0)

    indicator = np.array([1.0, 0.0])
    expected = 0.5 * (op.pi[0] * q + op.pi[1] / q)
    assert dirichlet_form(op, indicator) == pytest.approx(expected, abs=1e-14)

    big = full_generator(params(q=0.3, L=3, H=2, N=3))
    for f in random_functions(big.dim, 5):
        assert dirichlet_form(big, f) >= 0.0


def test_modified_form_drops_same_stick_terms():
    p = params(q=0.5, L=3, H=2, N=3)
    op = full_generator(p)
    for f in random_functions(op.dim, 5):
        assert dirichlet_form(op, f) - modified_dirichlet_form(p, f) >= -1e-12
    assert modified_dirichlet_form(p, np.ones(op.dim)) == pytest.approx(0.0)


def test_lumping():
    p = params(q=0.5, L=2, H=2, N=2)
    full, profile = full_generator(p), profile_generator(p)
    assert profile.dim == 3 and full.dim == 6

    f_hat = random_functions(profile.dim, 1)[0]
    assert lumping_deviation(full, profile, f_hat) <= 1e-12
    lifted = lift_symmetric(full, profile, f_hat)
    assert full.expectation(lifted) == pytest.approx(profile.expectation(f_hat), abs=1e-14)

    inclusion = spectrum_inclusion_deviation(dense_gap(profile).eigenvalues, dense_gap(full).eigenvalues)
    assert inclusion <= 1e-10


def test_profile_boundary_rates_vanish():
    op = profile_generator(params(q=0.5, L=2, H=3, N=2))
    states = op.states
    rates = op.rates.toarray()
    for a, b in zip(*np.nonzero(rates)):
        moved = states[b] - states[a]
        assert np.abs(moved).sum() == 2
        assert states[b].min() >= 0 and states[b].max() <= 2


def test_operator_K():
    op = operator_K(params(q=0.5, L=3, H=1, N=1))
    K = op.meta["stochastic"]
    assert np.allclose(K, [[0.5, 0.5], [1.0, 0.0]], atol=1e-14)
    assert np.allclose(np.sort(np.linalg.eigvals(K).real), [-0.5, 1.0], atol=1e-12)

    for L, H, N in ((2, 2, 2), (3, 2, 2), (4, 3, 5)):
        p = params(q=0.3, L=L, H=H, N=N)
        op = operator_K(p)
        K, nbar = op.meta["stochastic"], op.meta["nbar"]
        assert np.allclose(K @ np.ones(op.dim), 1.0, atol=1e-12)
        assert np.allclose(K @ nbar, -nbar / (L - 1), atol=1e-10)


def test_operator_P():
    p = params(q=0.5, L=3, H=2, N=2)
    P = operator_P(p)
    stochastic = P.meta["stochastic"]
    assert np.allclose(stochastic @ np.ones(P.dim), 1.0, atol=1e-12)
    assert P.check()["detailed_balance"] <= 1e-12

    f = random_functions(P.dim, 1)[0]
    expected = sum(conditional_expectation(P.pi, P.meta["patterns"][:, k], f) for k in range(p.L)) / p.L
    assert np.allclose(stochastic @ f, expected, atol=1e-13)


def test_class_a_is_an_eigenspace_of_P():
    for L in (2, 3, 4):
        p = params(q=0.5, L=L, H=2, N=L)
        P = operator_P(p)
        f = class_a_function(p, P.meta["basis"], random_functions(L, 1)[0])
        relation = f - P.meta["stochastic"] @ f - (L - 2) / (L - 1) * f
        assert np.abs(relation).max() <= 1e-10


def test_bernoulli_laplace():
    for L in (3, 4, 5):
        for N in range(1, L):
            op = bernoulli_laplace(L, N)
            report = dense_gap(op)
            expected = np.sort(np.concatenate([np.full(m, v) for v, m in bernoulli_laplace_spectrum(L, N)]))
            assert np.allclose(report.eigenvalues, expected, atol=1e-10)
            assert report.gamma == pytest.approx(0.5, abs=1e-10)


def test_bernoulli_laplace_single_particle_variance_identity():
    op = bernoulli_laplace(4, 1)
    for f in random_functions(op.dim, 5):
        assert op.dirichlet_form(f) == pytest.approx(2.0 * op.variance(f), abs=1e-12)
