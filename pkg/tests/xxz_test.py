"""
    To run all tests: pytest -s
    To run this module: pytest -s tests/xxz_test.py
"""
import numpy as np
import pytest
import scipy.linalg as la

from app.framework.errors import EquivalenceMismatch, InvalidParams
from app.services.operators.diagonal import (
    conjugate_diagonal,
    diagonal_ground_state,
    diagonal_hamiltonian,
    diagonal_particles,
    diagonal_profile_generator,
    diagonal_region,
    lifted_diagonal_generator,
    site_heights,
)
from app.services.operators.lattice import profile_generator
from app.services.operators.xxz import (
    XXZParams,
    anisotropy_from_q,
    conjugate,
    conjugate_to_profile,
    q_from_anisotropy,
    stair_identity_residual,
    xxz_chain_hamiltonian,
    xxz_ground_state,
)
from app.services.spectral.solvers import dense_gap
from app.services.spectral.variational import random_functions, spectrum_inclusion_deviation

CHAINS = ((1, 2), (1, 3), (2, 2), (3, 2))


def chain(twiceS=1, H=2, Delta=2.0, sector_2n=0):
    return XXZParams.create(twiceS=twiceS, H=H, Delta=Delta, sector_2n=sector_2n)


def test_anisotropy_map():
    for Delta in (1.25, 2.0, 5.0):
        q = q_from_anisotropy(Delta)
        assert 0.0 < q < 1.0
        assert anisotropy_from_q(q) == pytest.approx(Delta, abs=1e-12)


def test_sector_validation():
    with pytest.raises(InvalidParams):
        chain(twiceS=1, H=2, sector_2n=4)
    with pytest.raises(InvalidParams):
        chain(twiceS=1, H=2, sector_2n=1)
    assert chain(twiceS=1, H=3, sector_2n=1).particles == 2


def test_two_site_sector_has_unit_gap():
    for Delta in (1.25, 2.0, 5.0):
        energies = la.eigvalsh(xxz_chain_hamiltonian(chain(Delta=Delta)).toarray())
        assert np.allclose(energies, [0.0, 1.0], atol=1e-10)


def test_ground_states_are_annihilated():
    for twiceS, H in CHAINS:
        base = chain(twiceS=twiceS, H=H, sector_2n=(twiceS * H) % 2)
        for sector_2n in base.sectors():
            xxz = base.with_sector(sector_2n)
            psi = xxz_ground_state(xxz)
            assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-12)
            assert np.linalg.norm(xxz_chain_hamiltonian(xxz) @ psi) <= 1e-10


def test_extreme_sectors_are_one_dimensional():
    xxz = chain(twiceS=2, H=2, sector_2n=4)
    matrix = xxz_chain_hamiltonian(xxz).toarray()
    assert matrix.shape == (1, 1)
    assert matrix[0, 0] == pytest.approx(0.0, abs=1e-12)


def test_ground_state_squares_to_profile_measure():
    for twiceS, H in CHAINS:
        xxz = chain(twiceS=twiceS, H=H, Delta=1.25, sector_2n=(twiceS * H) % 2)
        reference = profile_generator(xxz.ensemble())
        assert np.allclose(xxz_ground_state(xxz) ** 2, reference.pi, atol=1e-12)


def test_conjugation_and_spectra():
    for twiceS, H in CHAINS:
        for Delta in (1.25, 2.0):
            base = chain(twiceS=twiceS, H=H, Delta=Delta, sector_2n=(twiceS * H) % 2)
            for sector_2n in base.sectors():
                xxz = base.with_sector(sector_2n)
                result = conjugate_to_profile(xxz)
                assert result.residual <= 1e-10
                assert stair_identity_residual(xxz) <= 1e-10
                if result.reference.dim < 2:
                    continue
                energies = la.eigvalsh(xxz_chain_hamiltonian(xxz).toarray())
                stochastic = abs(result.factor) * np.asarray(dense_gap(result.reference).eigenvalues)
                assert spectrum_inclusion_deviation(stochastic, energies) <= 1e-10


def test_two_site_gap_through_the_profile_chain():
    xxz = chain(twiceS=1, H=2, Delta=5.0)
    result = conjugate_to_profile(xxz)
    assert abs(result.factor) * dense_gap(result.reference).gap == pytest.approx(1.0, abs=1e-10)


def test_conjugation_detects_a_wrong_reference():
    xxz = chain(twiceS=2, H=2, sector_2n=0)
    reference = profile_generator(xxz.ensemble()).perturbed()
    with pytest.raises(EquivalenceMismatch) as error:
        conjugate(xxz_chain_hamiltonian(xxz), reference, -xxz.S / xxz.Delta, "perturbed")
    assert error.value.residual > 1e-10


def test_diagonal_region_shape():
    region = diagonal_region(1, 2)
    assert region.size == 3
    assert set(region.sites) == {(1, 0), (0, 1), (1, 1)}
    assert set(region.bond_sites()) == {((1, 0), (1, 1)), ((0, 1), (1, 1))}

    for H in (2, 3, 4, 5):
        assert diagonal_region(0, H).size == H // 2

    region = diagonal_region(2, 4)
    levels = region.levels
    assert all(levels[y] == levels[x] + 1 for x, y in region.bonds)


def test_diagonal_equivalence():
    for twiceS, R, H in ((1, 1, 2), (1, 2, 3), (2, 1, 2)):
        region = diagonal_region(R, H)
        sector_2n = (twiceS * region.size) % 2
        result = conjugate_diagonal(region, twiceS, 2.0, sector_2n)
        assert result.residual <= 1e-10

        psi = diagonal_ground_state(region, twiceS, 2.0, sector_2n)
        hamiltonian = diagonal_hamiltonian(region, twiceS, 2.0, sector_2n)
        assert np.linalg.norm(hamiltonian @ psi) <= 1e-10

        energies = la.eigvalsh(hamiltonian.toarray())
        stochastic = abs(result.factor) * np.asarray(dense_gap(result.reference).eigenvalues)
        assert spectrum_inclusion_deviation(stochastic, energies) <= 1e-10


def test_lifted_diagonal_lumps_onto_heights():
    region = diagonal_region(1, 2)
    twiceS = 2
    N = diagonal_particles(region, twiceS, 0)
    heights = diagonal_profile_generator(region, twiceS, 1.25, N)
    lifted = lifted_diagonal_generator(region, twiceS, 1.25, N)
    assert lifted.check()["detailed_balance"] <= 1e-12

    index = heights.meta["basis"].index(site_heights(lifted))
    f_hat = random_functions(heights.dim, 1)[0]
    assert np.abs(twiceS * lifted.apply(f_hat[index]) - heights.apply(f_hat)[index]).max() <= 1e-12

    sub = dense_gap(heights).eigenvalues
    sup = twiceS * np.asarray(dense_gap(lifted).eigenvalues)
    assert spectrum_inclusion_deviation(sub, sup) <= 1e-10
