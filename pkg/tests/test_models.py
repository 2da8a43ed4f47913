import json

import numpy as np
import pytest

from qslab.errors import CapacityError
from qslab.hilbert import commutator_norm, embed_factor_op
from qslab.models import (
    BUILTIN_MODELS,
    NrqmLatticeSpec,
    ZurekSpec,
    build_diagonal,
    build_ising_chain,
    build_nrqm_lattice,
    build_random_spectrum,
    build_zurek,
    load_model,
    system_pointer_observable,
)

SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def test_free_particle_ring_spectrum():
    # closed form: (hbar^2/2m) (2 - 2 cos(2 pi k / L))
    spec = NrqmLatticeSpec(particles=1, sites=4, masses=(0.5,), hbar=1.0)
    h, tps = build_nrqm_lattice(spec)
    expected = np.sort((1.0 / (2 * 0.5)) * (2 - 2 * np.cos(2 * np.pi * np.arange(4) / 4)))
    np.testing.assert_allclose(np.linalg.eigvalsh(h.entries), expected, atol=1e-12)
    assert tps.factor_dims == (4,)


def test_noninteracting_pair_is_additive():
    spec = NrqmLatticeSpec(particles=2, sites=3, masses=(1.0, 2.0), potential="contact", strength=0.0)
    h, _ = build_nrqm_lattice(spec)
    one = NrqmLatticeSpec(particles=1, sites=3, masses=(1.0,))
    two = NrqmLatticeSpec(particles=1, sites=3, masses=(2.0,))
    h1, _ = build_nrqm_lattice(one)
    h2, _ = build_nrqm_lattice(two)
    total = np.kron(h1.entries, np.eye(3)) + np.kron(np.eye(3), h2.entries)
    np.testing.assert_allclose(h.entries, total, atol=1e-12)


def test_nrqm_hermitian_and_cap():
    spec = NrqmLatticeSpec(particles=2, sites=3, masses=(1.0, 1.0), strength=0.7)
    h, _ = build_nrqm_lattice(spec)
    assert np.linalg.norm(h.entries - h.entries.conj().T) < 1e-12
    big = NrqmLatticeSpec(particles=3, sites=7, masses=(1.0,) * 3)
    with pytest.raises(CapacityError):
        build_nrqm_lattice(big)


def test_nrqm_potential_commutes_with_position_projectors():
    spec = NrqmLatticeSpec(particles=2, sites=3, masses=(1.0, 1.0), strength=0.0)
    h0, tps = build_nrqm_lattice(spec)
    spec_v = NrqmLatticeSpec(particles=2, sites=3, masses=(1.0, 1.0), strength=1.3)
    hv, _ = build_nrqm_lattice(spec_v)
    potential = hv.entries - h0.entries  # diagonal part
    for site in range(3):
        proj = np.zeros((3, 3))
        proj[site, site] = 1.0
        embedded = embed_factor_op(proj, 0, [3, 3])
        assert commutator_norm(potential, embedded) < 1e-10


def test_nrqm_kinetic_commutes_with_translation():
    spec = NrqmLatticeSpec(particles=2, sites=3, masses=(1.0, 2.0))
    h, _ = build_nrqm_lattice(spec)
    shift = np.roll(np.eye(3), 1, axis=0)  # cyclic translation of the ring
    total_shift = np.kron(shift, shift)
    assert commutator_norm(h.entries, total_shift) < 1e-10


def test_ising_two_site_diagonal():
    h, _ = build_ising_chain(2, 1.0, 0.0)
    np.testing.assert_allclose(h.entries, -np.kron(SZ, SZ), atol=1e-14)
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(h.entries)), [-1, -1, 1, 1])


def test_ising_field_only_spectrum():
    # sum of three commuting single-site sx terms: eigenvalues are -(s1+s2+s3)
    h, _ = build_ising_chain(3, 0.0, 1.0)
    expected = np.sort([-(a + b + c) for a in (-1, 1) for b in (-1, 1) for c in (-1, 1)])
    np.testing.assert_allclose(np.linalg.eigvalsh(h.entries), expected, atol=1e-12)


def test_ising_range_check():
    with pytest.raises(CapacityError):
        build_ising_chain(1, 1.0, 1.0)
    with pytest.raises(CapacityError):
        build_ising_chain(9, 1.0, 1.0)


def test_ising_periodic_adds_wrap_bond_only_beyond_two_sites():
    h_open, _ = build_ising_chain(2, 1.0, 0.0, periodic=False)
    h_per, _ = build_ising_chain(2, 1.0, 0.0, periodic=True)
    np.testing.assert_allclose(h_open.entries, h_per.entries)
    h3_open, _ = build_ising_chain(3, 1.0, 0.0, periodic=False)
    h3_per, _ = build_ising_chain(3, 1.0, 0.0, periodic=True)
    assert np.linalg.norm(h3_open.entries - h3_per.entries) > 0.5


def test_zurek_single_coupling():
    h, _ = build_zurek(ZurekSpec((1.0,)))
    np.testing.assert_allclose(h.entries, np.kron(SZ, SZ), atol=1e-14)


def test_zurek_conserves_pointer_observable():
    spec = ZurekSpec((0.7, -1.2, 0.3))
    h, _ = build_zurek(spec)
    pointer = system_pointer_observable(spec)
    assert commutator_norm(h, pointer) < 1e-12


def test_zurek_two_coupling_spectrum():
    # diagonal entries are s (g1 e1 + g2 e2) over signs s, e1, e2
    h, _ = build_zurek(ZurekSpec((1.0, 2.0)))
    diag = np.sort(np.real(np.diag(h.entries)))
    expected = np.sort([s * (g1 + 2 * g2) for s in (-1, 1) for g1 in (-1, 1) for g2 in (-1, 1)])
    np.testing.assert_allclose(diag, expected)
    vals, counts = np.unique(np.linalg.eigvalsh(h.entries).round(9), return_counts=True)
    np.testing.assert_allclose(vals, [-3, -1, 1, 3])
    assert all(counts == 2)


def test_random_spectrum_zero_case():
    h = build_random_spectrum([0.0, 0.0, 0.0], seed=5)
    np.testing.assert_allclose(h.entries, np.zeros((3, 3)), atol=1e-14)


def test_random_spectrum_eigenvalue_oracle():
    for seed in (1, 2):
        h = build_random_spectrum([1.0, 2.0, 3.0], seed=seed)
        np.testing.assert_allclose(np.linalg.eigvalsh(h.entries), [1, 2, 3], atol=1e-9)
    h1 = build_random_spectrum([1.0, 2.0, 3.0], seed=1)
    h2 = build_random_spectrum([1.0, 2.0, 3.0], seed=2)
    assert np.linalg.norm(h1.entries - h2.entries) > 1e-3  # different seeds, same spectrum


def test_builders_emit_hermitian():
    for name in BUILTIN_MODELS:
        h, tps, _ = load_model(name)
        assert np.max(np.abs(h.entries - h.entries.conj().T)) < 1e-12
        assert tps.dim == h.dim


def test_load_model_from_file_and_dict(tmp_path):
    doc = {"model": "ising", "params": {"n": 2, "coupling": 1.0, "field": 0.5}}
    path = tmp_path / "m.json"
    path.write_text(json.dumps(doc))
    h1, _, _ = load_model(str(path))
    h2, _, _ = load_model(doc)
    np.testing.assert_allclose(h1.entries, h2.entries)
    with pytest.raises(ValueError):
        load_model("no-such-model")
    with pytest.raises(ValueError):
        load_model({"model": "mystery"})


def test_diagonal_model():
    h, tps = build_diagonal([0.0, 1.0, 2.0])
    np.testing.assert_allclose(np.diag(h.entries), [0, 1, 2])
    assert tps.factor_dims == (3,)
