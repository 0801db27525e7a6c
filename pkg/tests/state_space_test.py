"""
    To run all tests: pytest -s
    To run this module: pytest -s tests/state_space_test.py
"""
import math

import numpy as np
import pytest

from app.core.config import settings
from app.framework.errors import InvalidParams, OutOfRange
from app.services.state_space import (
    _colex_masks,
    _composition_count,
    _compositions,
    EnsembleParams,
    LatticeConfig,
    build_partition_table,
    chemical_potential,
    enumerate_lattice_configs,
    enumerate_profiles,
    ensemble_distance,
    grand_canonical_occupation,
    hat_nu_weights,
    nu_weight,
    nu_weights,
    particle_hole_image,
    profile_of,
    rank_profile,
    stick_occupation_kernel,
    tail_decay_fit,
)


def params(q=0.5, L=2, H=2, N=2):
    return EnsembleParams.create(q=q, L=L, H=H, N=N)


def test_invalid_params_are_rejected():
    with pytest.raises(InvalidParams):
        EnsembleParams.create(q=1.5, L=2, H=2, N=1)
    with pytest.raises(InvalidParams):
        EnsembleParams.create(q=0.5, L=2, H=2, N=5)


def test_lattice_sector_sizes():
    assert len(enumerate_lattice_configs(params(L=2, H=2, N=2))) == 6
    assert len(enumerate_lattice_configs(params(L=1, H=2, N=1))) == 2


def test_lattice_ranks_are_positions():
    basis = enumerate_lattice_configs(params(L=3, H=3, N=4))
    assert len(basis) == 126
    for k in range(len(basis)):
        assert basis.rank(basis.unrank(k)) == k
    assert np.all(np.diff(basis.states) > 0)


def test_profile_sectors():
    two = enumerate_profiles(params(L=1, H=2, N=1))
    assert {tuple(row) for row in two.states.tolist()} == {(1, 0), (0, 1)}

    three = enumerate_profiles(params(L=2, H=2, N=2))
    assert {tuple(row) for row in three.states.tolist()} == {(2, 0), (1, 1), (0, 2)}

    assert len(enumerate_profiles(params(L=2, H=3, N=3))) == 7


def test_profile_rank_is_reverse_lexicographic():
    p = params(L=2, H=2, N=2)
    assert rank_profile(enumerate_profiles(p)[0], p) == 0
    assert enumerate_profiles(p)[0].heights == (2, 0)


def test_two_state_measure():
    q = 0.5
    p = params(q=q, L=1, H=2, N=1)
    table = build_partition_table(p)
    bottom = LatticeConfig.from_sites(1, 2, [(1, 1)])
    top = LatticeConfig.from_sites(1, 2, [(1, 2)])
    assert nu_weight(bottom, p, table) == pytest.approx(1.0 / (1.0 + q * q), abs=1e-14)
    assert nu_weight(top, p, table) == pytest.approx(q * q / (1.0 + q * q), abs=1e-14)


def test_measure_is_normalized_and_full_sector_is_certain():
    for L, H, N in ((2, 2, 2), (3, 2, 3), (2, 3, 4)):
        p = params(L=L, H=H, N=N)
        pi = nu_weights(enumerate_lattice_configs(p), p, build_partition_table(p))
        assert pi.sum() == pytest.approx(1.0, abs=1e-13)

    full = params(L=2, H=2, N=4)
    assert nu_weights(enumerate_lattice_configs(full), full, build_partition_table(full))[0] == pytest.approx(1.0)


def test_profile_measure_is_the_lattice_marginal():
    p = params(q=0.5, L=2, H=2, N=2)
    table = build_partition_table(p)
    lattice = enumerate_lattice_configs(p)
    profiles = enumerate_profiles(p)
    marginal = np.zeros(len(profiles))
    np.add.at(marginal, profiles.index(lattice.level_counts()), nu_weights(lattice, p, table))
    assert np.allclose(hat_nu_weights(profiles, p, table), marginal, atol=1e-14)

    single_row = params(L=3, H=1, N=2)
    assert hat_nu_weights(enumerate_profiles(single_row), single_row, build_partition_table(single_row))[0] == pytest.approx(1.0)


def test_profile_of_counts_rows():
    alpha = LatticeConfig.from_sites(2, 2, [(1, 1), (2, 2)])
    assert profile_of(alpha).heights == (1, 1)
    assert profile_of(LatticeConfig(L=2, H=2, mask=0)).heights == (0, 0)


def test_stick_weights():
    q = 0.5
    table = build_partition_table(params(q=q, L=2, H=2, N=2))
    assert math.exp(table.log_g(0)) == pytest.approx(1.0)
    assert math.exp(table.log_g(1)) == pytest.approx(q**2 + q**4)
    assert math.exp(table.log_g(2)) == pytest.approx(q ** (2 * 3))


def test_partition_function_matches_enumeration():
    p = params(q=0.3, L=3, H=3, N=4)
    basis = enumerate_lattice_configs(p)
    brute = np.exp(basis.log_level_weights(p.q)).sum()
    assert build_partition_table(p).log_normalization == pytest.approx(math.log(brute), abs=1e-12)


def test_conditional_stick_kernel():
    kernel = stick_occupation_kernel(params(L=3, H=1, N=1), build_partition_table(params(L=3, H=1, N=1)))
    assert kernel.n_values.tolist() == [0, 1]
    assert np.allclose(kernel.cond, [[0.5, 0.5], [1.0, 0.0]], atol=1e-14)

    p = params(q=0.5, L=2, H=2, N=2)
    kernel = stick_occupation_kernel(p, build_partition_table(p))
    assert np.allclose(kernel.cond, np.fliplr(np.eye(3)), atol=1e-14)

    p = params(q=0.3, L=4, H=3, N=5)
    kernel = stick_occupation_kernel(p, build_partition_table(p))
    assert np.allclose(kernel.cond.sum(axis=1), 1.0, atol=1e-13)


def test_particle_hole_reflection():
    p = params(q=0.5, L=3, H=2, N=2)
    image = particle_hole_image(p)
    assert image.N == 4
    forward = stick_occupation_kernel(p, build_partition_table(p), conditional=False)
    backward = stick_occupation_kernel(image, build_partition_table(image), conditional=False)
    mirrored = dict(zip((p.H - backward.n_values).tolist(), backward.nu0))
    for n, weight in zip(forward.n_values.tolist(), forward.nu0):
        assert mirrored[n] == pytest.approx(weight, abs=1e-13)


def test_chemical_potential():
    for H in (2, 3, 4):
        stats = chemical_potential(H / 2.0, H, 0.5)
        assert stats.lam == pytest.approx((H + 1) / 2.0, abs=1e-9)

    stats = chemical_potential(1.0, 4, 0.5)
    assert stats.mean == pytest.approx(1.0, abs=1e-12)
    for rho in (0.3, 1.7, 2.9):
        assert chemical_potential(rho, 3, 0.8).mean == pytest.approx(rho, abs=1e-12)

    with pytest.raises(OutOfRange):
        chemical_potential(3.0, 3, 0.5)


def test_grand_canonical_occupation_matches_stats():
    stats = chemical_potential(1.3, 4, 0.5)
    law = grand_canonical_occupation(4, 0.5, stats.lam)
    n = np.arange(5)
    assert law.sum() == pytest.approx(1.0, abs=1e-13)
    assert law @ n == pytest.approx(stats.mean, abs=1e-12)
    assert law @ (n - stats.mean) ** 2 == pytest.approx(stats.sigma2, abs=1e-12)


def test_ensemble_distance_is_a_probability_distance():
    p = params(q=0.5, L=4, H=3, N=6)
    distance = ensemble_distance(p, build_partition_table(p))
    assert 0.0 <= distance <= 1.0


def test_tail_decay_is_positive():
    p = params(q=0.5, L=4, H=4, N=8)
    assert tail_decay_fit(p, build_partition_table(p)).a > 0.0


def test_enumeration_caches_are_bounded():
    for L, H in ((3, 3), (4, 4)):
        for N in range(1, L * H):
            enumerate_lattice_configs(params(L=L, H=H, N=N))
            enumerate_profiles(params(L=L, H=H, N=N))

    for cached in (_colex_masks, _composition_count, _compositions):
        info = cached.cache_info()
        assert info.maxsize == settings.ENUMERATION_CACHE
        assert info.currsize <= info.maxsize

    cached_masks = _colex_masks(9, 4)
    _colex_masks.cache_clear()
    assert np.array_equal(_colex_masks(9, 4), cached_masks)
    assert len(enumerate_lattice_configs(params(L=3, H=3, N=4))) == 126
