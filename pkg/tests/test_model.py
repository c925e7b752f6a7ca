"""Hamiltonian assembly, magnetization structure, sector diagonalization."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from triqubit import ModelParams, build_hamiltonian, magnetization_sectors, sector_spectrum
from triqubit.errors import DomainError
from triqubit.model import interaction_hamiltonian, local_field_hamiltonian, total_sz

from conftest import local_point


def test_params_validation():
    with pytest.raises(DomainError):
        local_point(B=(-0.1, 1.0, 1.0))
    with pytest.raises(DomainError):
        local_point(B=(1.0, 1.0, 1.0), T=(0.0, 2.0, 3.0))
    with pytest.raises(DomainError):
        local_point(B=(1.0, 1.0, 1.0), gamma=(0.0, 0.5, 0.5))
    with pytest.raises(DomainError):
        local_point(B=(1.0, 1.0, 1.0), bath_model="dephasing")
    with pytest.raises(DomainError):
        local_point(B=(1.0, 1.0))


def test_pair_value_is_order_insensitive():
    p = local_point(B=(1.0, 2.0, 3.0), J=(0.1, 0.2, 0.3), Delta=(4.0, 5.0, 6.0))
    assert p.pair_value("J", 1, 2) == 0.1
    assert p.pair_value("J", 2, 1) == 0.1
    assert p.pair_value("J", 3, 1) == 0.2
    assert p.pair_value("Delta", 3, 2) == 6.0


def test_hamiltonian_is_hermitian_and_traceless():
    p = local_point(B=(0.4, 1.1, 2.3), gamma=(0.3, 0.4, 0.5))
    H = build_hamiltonian(p)
    assert_allclose(H, H.conj().T, atol=1e-14)
    assert abs(np.trace(H)) < 1e-13


def test_uncoupled_equal_fields_spectrum():
    p = local_point(B=(1.0, 1.0, 1.0), J=(0.0, 0.0, 0.0), Delta=(0.0, 0.0, 0.0))
    spectrum = sector_spectrum(build_hamiltonian(p))
    assert_allclose(spectrum.energies, [-3, -1, -1, -1, 1, 1, 1, 3], atol=1e-14)


def test_magnetization_is_conserved():
    p = local_point(B=(0.7, 1.9, 0.2), Delta=(0.5, -0.3, 0.8))
    H = build_hamiltonian(p)
    S = total_sz()
    assert np.linalg.norm(H @ S - S @ H) < 1e-13


def test_cross_sector_blocks_vanish():
    p = local_point(B=(0.7, 1.9, 0.2))
    H = build_hamiltonian(p)
    sectors = magnetization_sectors()
    for m1, idx1 in sectors.items():
        for m2, idx2 in sectors.items():
            if m1 != m2:
                assert np.all(H[np.ix_(idx1, idx2)] == 0.0)


def test_magnetization_sectors_enumeration():
    sectors = magnetization_sectors()
    assert sectors[3] == [0]
    assert sectors[1] == [1, 2, 4]
    assert sectors[-1] == [3, 5, 6]
    assert sectors[-3] == [7]


def test_sector_spectrum_reconstructs():
    p = local_point(B=(0.31, 0.77, 1.21), Delta=(0.2, -0.1, 0.45))
    H = build_hamiltonian(p)
    spectrum = sector_spectrum(H)
    V, E = spectrum.vectors, spectrum.energies
    assert np.all(np.diff(E) >= 0)
    assert_allclose(V @ np.diag(E) @ V.conj().T, H, atol=1e-12)
    assert_allclose(V.conj().T @ V, np.eye(8), atol=1e-12)


def test_sector_labels_match_eigenvectors():
    p = local_point(B=(0.31, 0.77, 1.21))
    spectrum = sector_spectrum(build_hamiltonian(p))
    S = total_sz()
    for k in range(8):
        v = spectrum.vectors[:, k]
        m = (v.conj() @ S @ v).real
        assert abs(m - spectrum.sectors[k]) < 1e-12


def test_field_plus_interaction_split():
    p = local_point(B=(0.5, 0.9, 1.4), Delta=(0.1, 0.2, 0.3))
    assert_allclose(
        local_field_hamiltonian(p) + interaction_hamiltonian(p),
        build_hamiltonian(p),
        atol=0,
    )
