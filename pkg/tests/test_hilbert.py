import numpy as np
import pytest

from qslab.hilbert import (
    HermitianOp,
    Ket,
    Tps,
    UnitaryOp,
    conjugate,
    evolve,
    partial_trace,
    random_hermitian,
    random_ket,
    random_unitary,
    spectral_decompose,
    tensor_product,
)

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def test_ket_validates_norm():
    Ket(np.array([1, 0], dtype=complex))
    with pytest.raises(ValueError):
        Ket(np.array([1, 1], dtype=complex))
    k = Ket.normalized(np.array([3, 4j]))
    assert np.isclose(np.linalg.norm(k.amplitudes), 1.0)


def test_hermitian_validates():
    with pytest.raises(ValueError):
        HermitianOp(np.array([[0, 1], [0, 0]], dtype=complex))
    with pytest.raises(ValueError):
        HermitianOp(np.zeros((2, 3), dtype=complex))


def test_unitary_validates():
    UnitaryOp(HADAMARD)
    with pytest.raises(ValueError):
        UnitaryOp(np.array([[1, 0], [0, 2]], dtype=complex))


def test_values_are_immutable():
    k = Ket(np.array([1, 0], dtype=complex))
    with pytest.raises(ValueError):
        k.amplitudes[0] = 3.0


def test_tensor_product_identity_case():
    out = tensor_product([HermitianOp(I2), HermitianOp(I2)])
    np.testing.assert_allclose(out.entries, np.eye(4))


def test_tensor_product_sz_with_identity():
    out = tensor_product([HermitianOp(SZ), HermitianOp(I2)])
    np.testing.assert_allclose(out.entries, np.diag([1, 1, -1, -1]).astype(complex))


def test_tensor_product_basis_placement():
    zero = Ket(np.array([1, 0], dtype=complex))
    one = Ket(np.array([0, 1], dtype=complex))
    out = tensor_product([zero, one])
    np.testing.assert_allclose(out.amplitudes, [0, 1, 0, 0])


def test_tensor_product_rejects_empty_and_mixed():
    with pytest.raises(ValueError):
        tensor_product([])
    with pytest.raises(ValueError):
        tensor_product([HermitianOp(I2), Ket(np.array([1, 0], dtype=complex))])


def test_partial_trace_bell_state():
    # hand computation: the reduced state of either Bell half is I/2
    bell = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    rho = HermitianOp(np.outer(bell, bell.conj()))
    reduced = partial_trace(rho, Tps.canonical([2, 2]), [0])
    np.testing.assert_allclose(reduced.entries, I2 / 2, atol=1e-14)


def test_partial_trace_recovers_product_factor():
    rng = np.random.default_rng(0)
    a = random_ket(2, rng).amplitudes
    b = random_ket(3, rng).amplitudes
    rho_a = np.outer(a, a.conj())
    rho_b = np.outer(b, b.conj())
    rho = HermitianOp(np.kron(rho_a, rho_b))
    reduced = partial_trace(rho, Tps.canonical([2, 3]), [0])
    np.testing.assert_allclose(reduced.entries, rho_a, atol=1e-13)


def test_partial_trace_preserves_trace_and_positivity():
    rng = np.random.default_rng(1)
    m = random_hermitian(8, rng).entries
    rho = m @ m.conj().T  # positive
    rho = HermitianOp(rho / np.trace(rho).real)
    for keep in ([0], [1], [2], [0, 2]):
        red = partial_trace(rho, Tps.canonical([2, 2, 2]), keep)
        assert np.isclose(np.trace(red.entries).real, 1.0, atol=1e-12)
        assert np.linalg.eigvalsh(red.entries)[0] > -1e-12


def test_partial_trace_respects_nontrivial_iso():
    rng = np.random.default_rng(2)
    u = random_unitary(4, rng)
    tps = Tps((2, 2), u)
    a = random_ket(2, rng).amplitudes
    b = random_ket(2, rng).amplitudes
    vec = u.entries @ np.kron(a, b)  # product state in the rotated identification
    rho = HermitianOp(np.outer(vec, vec.conj()))
    red = partial_trace(rho, tps, [0])
    np.testing.assert_allclose(red.entries, np.outer(a, a.conj()), atol=1e-12)


def test_partial_trace_argument_errors():
    rho = HermitianOp(np.eye(4, dtype=complex) / 4)
    with pytest.raises(ValueError):
        partial_trace(rho, Tps.canonical([2, 2, 2]), [0])  # dim mismatch
    with pytest.raises(ValueError):
        partial_trace(rho, Tps.canonical([2, 2]), [])
    with pytest.raises(ValueError):
        partial_trace(rho, Tps.canonical([2, 2]), [0, 1])  # not proper


def test_spectral_decompose_diagonal_with_degeneracy():
    spec = spectral_decompose(HermitianOp(np.diag([1.0, 1.0, 2.0]).astype(complex)), 1e-8)
    np.testing.assert_allclose(spec.eigenvalues, [1.0, 2.0])
    assert spec.multiplicities == (2, 1)
    np.testing.assert_allclose(spec.projectors[0].entries, np.diag([1, 1, 0]), atol=1e-12)
    np.testing.assert_allclose(spec.projectors[1].entries, np.diag([0, 0, 1]), atol=1e-12)


def test_spectral_decompose_pauli_x():
    spec = spectral_decompose(HermitianOp(SX))
    np.testing.assert_allclose(spec.eigenvalues, [-1.0, 1.0])
    assert spec.multiplicities == (1, 1)
    for p in spec.projectors:
        np.testing.assert_allclose(p.entries @ p.entries, p.entries, atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_spectral_reconstruction_oracle(seed):
    rng = np.random.default_rng(seed)
    a = random_hermitian(6, rng)
    spec = spectral_decompose(a)
    rec = spec.reconstruct()
    rel = np.linalg.norm(rec.entries - a.entries) / np.linalg.norm(a.entries)
    assert rel < 1e-10
    # projector family structure
    total = sum(p.entries for p in spec.projectors)
    np.testing.assert_allclose(total, np.eye(6), atol=1e-12)
    assert sum(spec.multiplicities) == 6


def test_conjugate_identity_and_hadamard():
    a = HermitianOp(SZ)
    np.testing.assert_allclose(conjugate(a, UnitaryOp(np.eye(2))).entries, SZ)
    np.testing.assert_allclose(conjugate(a, UnitaryOp(HADAMARD)).entries, SX, atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_conjugate_preserves_spectrum(seed):
    rng = np.random.default_rng(seed)
    a = random_hermitian(7, rng)
    s = random_unitary(7, rng)
    before = np.linalg.eigvalsh(a.entries)
    after = np.linalg.eigvalsh(conjugate(a, s).entries)
    assert np.max(np.abs(before - after)) < 1e-9


def test_conjugate_dimension_mismatch():
    with pytest.raises(ValueError):
        conjugate(HermitianOp(SZ), UnitaryOp(np.eye(3)))


def test_conjugation_hermiticity_raw_product():
    rng = np.random.default_rng(11)
    a = random_hermitian(6, rng)
    u = random_unitary(6, rng)
    raw = u.entries @ a.entries @ u.entries.conj().T
    assert np.linalg.norm(raw - raw.conj().T) < 1e-10


def test_evolve_diagonal_and_t_zero():
    u = evolve(HermitianOp(SZ), np.pi / 2, 1.0)
    np.testing.assert_allclose(np.diag(u.entries), [-1j, 1j], atol=1e-12)
    rng = np.random.default_rng(3)
    h = random_hermitian(5, rng)
    np.testing.assert_allclose(evolve(h, 0.0).entries, np.eye(5), atol=1e-13)


@pytest.mark.parametrize("seed", range(4))
def test_evolve_group_inverse_oracle(seed):
    rng = np.random.default_rng(seed)
    h = random_hermitian(6, rng)
    t = float(rng.uniform(-3, 3))
    prod = evolve(h, t).entries @ evolve(h, -t).entries
    assert np.max(np.abs(prod - np.eye(6))) < 1e-12


@pytest.mark.parametrize("seed", range(4))
def test_evolve_one_parameter_group_law(seed):
    rng = np.random.default_rng(seed + 10)
    h = random_hermitian(6, rng)
    t1, t2 = rng.uniform(-2, 2, size=2)
    lhs = evolve(h, t1).entries @ evolve(h, t2).entries
    rhs = evolve(h, t1 + t2).entries
    assert np.linalg.norm(lhs - rhs) < 1e-10


def test_evolve_commutes_with_generator():
    rng = np.random.default_rng(4)
    h = random_hermitian(6, rng)
    u = evolve(h, 1.7)
    comm = u.entries @ h.entries - h.entries @ u.entries
    assert np.linalg.norm(comm) < 1e-10


def test_evolve_respects_hbar():
    u1 = evolve(HermitianOp(SZ), 1.0, hbar=2.0)
    u2 = evolve(HermitianOp(SZ), 0.5, hbar=1.0)
    np.testing.assert_allclose(u1.entries, u2.entries, atol=1e-14)


def test_reduction_of_pure_product_is_rank_one():
    rng = np.random.default_rng(5)
    kets = [random_ket(2, rng) for _ in range(3)]
    psi = tensor_product(kets)
    rho = HermitianOp(np.outer(psi.amplitudes, psi.amplitudes.conj()))
    red = partial_trace(rho, Tps.canonical([2, 2, 2]), [1])
    assert np.linalg.eigvalsh(red.entries)[-1] > 1 - 1e-9


def test_tps_validation():
    with pytest.raises(ValueError):
        Tps((2, 3), UnitaryOp(np.eye(5)))  # 6 != 5
    with pytest.raises(ValueError):
        Tps((1, 4), UnitaryOp(np.eye(4)))  # factor below 2
