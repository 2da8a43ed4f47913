from itertools import product as iter_product

import numpy as np
import pytest

from qslab.commutant import (
    CommutantBasis,
    OffOrbitUnavailableError,
    commutant_basis,
    distance_to_time_orbit,
    ergodicity_report,
    has_off_orbit_directions,
    orbit_approximation,
    sample_commutant_unitary,
    time_evolution,
)
from qslab.errors import CapacityError
from qslab.hilbert import HermitianOp, UnitaryOp, commutator_norm, evolve, random_hermitian
from qslab.models import ZurekSpec, build_ising_chain, build_zurek


def hermitian_basis(dim):
    """Real basis of the Hermitian matrices: diagonal units, pair sums, pair differences."""
    out = []
    for a in range(dim):
        m = np.zeros((dim, dim), dtype=complex)
        m[a, a] = 1.0
        out.append(m)
    for a in range(dim):
        for b in range(a + 1, dim):
            m = np.zeros((dim, dim), dtype=complex)
            m[a, b] = m[b, a] = 1.0
            out.append(m)
            m = np.zeros((dim, dim), dtype=complex)
            m[a, b] = -1j
            m[b, a] = 1j
            out.append(m)
    return out


def brute_force_commutant_dim(h: np.ndarray) -> int:
    """Nullity of X -> [X, h] over the real vector space of Hermitian X."""
    dim = h.shape[0]
    cols = []
    for b in hermitian_basis(dim):
        c = b @ h - h @ b
        cols.append(np.concatenate([c.real.ravel(), c.imag.ravel()]))
    m = np.stack(cols, axis=1)
    rank = np.linalg.matrix_rank(m, tol=1e-8)
    return dim * dim - rank


BRUTE_CASES = {
    "diag123": np.diag([1.0, 2.0, 3.0]).astype(complex),
    "diag112": np.diag([1.0, 1.0, 2.0]).astype(complex),
    "identity3": np.eye(3, dtype=complex),
}


@pytest.mark.parametrize("name", sorted(BRUTE_CASES))
def test_commutant_dim_matches_brute_force_diagonals(name):
    h = HermitianOp(BRUTE_CASES[name])
    cb = commutant_basis(h)
    assert cb.dim_total == brute_force_commutant_dim(h.entries)


def test_commutant_dim_explicit_values():
    assert commutant_basis(HermitianOp(np.diag([1.0, 2.0, 3.0]).astype(complex))).dim_total == 3
    assert commutant_basis(HermitianOp(np.eye(3, dtype=complex))).dim_total == 9
    assert commutant_basis(HermitianOp(np.diag([1.0, 1.0, 2.0]).astype(complex))).dim_total == 5


@pytest.mark.parametrize("model", ["ising2", "zurek2"])
def test_commutant_dim_matches_brute_force_models(model):
    if model == "ising2":
        h, _ = build_ising_chain(2, 1.0, 1.0)
    else:
        h, _ = build_zurek(ZurekSpec((1.0, 2.0)))
    cb = commutant_basis(h)
    assert cb.dim_total == brute_force_commutant_dim(h.entries)


def test_generators_commute_and_are_independent():
    h, _ = build_ising_chain(3, 1.0, 1.0)
    cb = commutant_basis(h)
    assert len(cb.generators) == cb.dim_total
    for g in cb.generators:
        assert commutator_norm(g, h) < 1e-9
    vecs = np.stack(
        [np.concatenate([g.entries.real.ravel(), g.entries.imag.ravel()]) for g in cb.generators]
    )
    assert np.linalg.matrix_rank(vecs, tol=1e-8) == cb.dim_total


def test_sample_from_diagonal_commutant_is_diagonal():
    cb = commutant_basis(HermitianOp(np.diag([0.0, 1.0, 3.0]).astype(complex)))
    s = sample_commutant_unitary(cb, seed=4)
    off = s.entries - np.diag(np.diag(s.entries))
    assert np.max(np.abs(off)) < 1e-12


@pytest.mark.parametrize("seed", range(3))
def test_samples_commute_with_source(seed):
    h, _ = build_ising_chain(3, 1.0, 0.7)
    cb = commutant_basis(h)
    s = sample_commutant_unitary(cb, seed)
    assert commutator_norm(s, h) < 1e-9
    # conjugation by the sample preserves the Hamiltonian's spectrum
    before = np.linalg.eigvalsh(h.entries)
    after = np.linalg.eigvalsh(s.entries @ h.entries @ s.entries.conj().T)
    assert np.max(np.abs(before - after)) < 1e-9


def test_distinct_seeds_give_distinct_samples():
    h = HermitianOp(np.diag([0.0, 1.0, 2.5]).astype(complex))
    cb = commutant_basis(h)
    s1 = sample_commutant_unitary(cb, 1)
    s2 = sample_commutant_unitary(cb, 2)
    assert np.linalg.norm(s1.entries - s2.entries) > 1e-6


def test_off_orbit_unavailable_for_qubit():
    # two simple eigenvalues: phase times time evolution exhausts the commutant
    h = HermitianOp(np.diag([0.0, 1.0]).astype(complex))
    cb = commutant_basis(h)
    assert not has_off_orbit_directions(cb)
    with pytest.raises(OffOrbitUnavailableError):
        sample_commutant_unitary(cb, 0, exclude_time_orbit=True)


def test_off_orbit_sample_clears_grid_threshold():
    h, _ = build_ising_chain(3, 1.0, 1.0)
    cb = commutant_basis(h)
    s = sample_commutant_unitary(cb, 11, exclude_time_orbit=True)
    assert distance_to_time_orbit(cb, s) > 1e-3
    assert commutator_norm(s, h) < 1e-9


def test_time_evolution_identity_and_composition():
    rng = np.random.default_rng(8)
    h = random_hermitian(5, rng)
    np.testing.assert_allclose(time_evolution(h, 2.0, 2.0).entries, np.eye(5), atol=1e-13)
    u21 = time_evolution(h, 2.0, 1.0).entries
    u10 = time_evolution(h, 1.0, 0.0).entries
    u20 = time_evolution(h, 2.0, 0.0).entries
    assert np.linalg.norm(u21 @ u10 - u20) < 1e-10


def test_time_evolution_fixes_eigenvectors():
    h = HermitianOp(np.diag([0.0, 1.0, 2.0]).astype(complex))
    u = time_evolution(h, 1.3)
    e1 = np.zeros(3, dtype=complex)
    e1[1] = 1.0
    out = u.entries @ e1
    assert abs(abs(np.vdot(e1, out)) - 1.0) < 1e-12


def exhaustive_relations(lam, bound, tol):
    """Independent oracle: literal loop over the zero-sum integer cube."""
    out = []
    for k in iter_product(range(-bound, bound + 1), repeat=len(lam)):
        if any(k) and sum(k) == 0 and abs(sum(ki * li for ki, li in zip(k, lam))) < tol:
            out.append(k)
    return sorted(out)


def test_relation_search_matches_literal_enumeration():
    lam = [0.0, 1.0, 2.0]
    report = ergodicity_report(HermitianOp(np.diag(lam).astype(complex)), 3, 1e-9)
    assert sorted(report.relations_found) == exhaustive_relations(lam, 3, 1e-9)
    assert (1, -2, 1) in report.relations_found
    assert report.verdict == "NotErgodicRationalRelation"


def test_relation_search_verdicts():
    degenerate = ergodicity_report(HermitianOp(np.diag([1.0, 1.0, 2.0]).astype(complex)), 3, 1e-9)
    assert degenerate.verdict == "NotErgodicDegenerate"
    assert degenerate.degenerate
    ergodic = ergodicity_report(
        HermitianOp(np.diag([0.0, 1.0, np.sqrt(2.0)]).astype(complex)), 10, 1e-6
    )
    assert ergodic.verdict == "ErgodicAtBound"
    assert ergodic.relations_found == []
    assert np.isclose(ergodic.min_gap, np.sqrt(2) - 1)


def test_relation_search_capacity_limits():
    big = HermitianOp(np.diag(np.arange(9, dtype=float)).astype(complex))
    with pytest.raises(CapacityError):
        ergodicity_report(big, 2, 1e-9)
    wide = HermitianOp(np.diag(np.arange(8, dtype=float)).astype(complex))
    with pytest.raises(CapacityError):
        ergodicity_report(wide, 10, 1e-9)


def test_ergodicity_report_serializes():
    report = ergodicity_report(HermitianOp(np.diag([0.0, 1.0, 2.0]).astype(complex)), 3, 1e-9)
    doc = report.to_json_dict()
    assert doc["verdict"] == "NotErgodicRationalRelation"
    assert [1, -2, 1] in doc["relations"]


def test_orbit_approximation_recovers_orbit_member():
    rng = np.random.default_rng(9)
    h = random_hermitian(4, rng)
    target = evolve(h, 1.7)
    t_best, dist = orbit_approximation(h, target, t_max=2.0, steps=40001)
    assert abs(t_best - 1.7) < 1e-3
    assert dist < 1e-6


def test_orbit_approximation_identity_target():
    rng = np.random.default_rng(10)
    h = random_hermitian(4, rng)
    t_best, dist = orbit_approximation(h, UnitaryOp(np.eye(4)), t_max=1.0, steps=2001)
    assert t_best == 0.0
    assert dist < 1e-12


def test_orbit_approximation_exact_on_grid_member():
    # self-consistency: an orbit point sitting on the scan grid is found at distance ~0
    h, _ = build_ising_chain(2, 1.0, 0.4)
    t_best, dist = orbit_approximation(h, evolve(h, 0.5), t_max=1.0, steps=2001)
    assert abs(t_best - 0.5) < 1e-12
    assert dist < 1e-12


def test_orbit_approximation_rejects_noncommuting_target():
    h = HermitianOp(np.diag([0.0, 1.0]).astype(complex))
    hada = UnitaryOp(np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2))
    with pytest.raises(ValueError):
        orbit_approximation(h, hada, 1.0, 101)


def test_orbit_distance_improves_with_longer_scan():
    lam = np.array([0.0, 1.0, np.sqrt(2.0)])
    h = HermitianOp(np.diag(lam).astype(complex))
    rng = np.random.default_rng(12)
    target = UnitaryOp(np.diag(np.exp(1j * rng.uniform(0, 2 * np.pi, size=3))))
    _, d_short = orbit_approximation(h, target, t_max=10.0, steps=10_001)
    _, d_long = orbit_approximation(h, target, t_max=10_000.0, steps=10_000_001)
    assert d_long < d_short


def test_exclusion_grid_sees_its_own_points():
    # orbit members taken at exclusion-grid times sit below the off-orbit threshold
    from qslab.commutant import ORBIT_GRID_POINTS, ORBIT_GRID_SPAN, OFF_ORBIT_THRESHOLD

    h, _ = build_ising_chain(2, 1.0, 0.4)
    cb = commutant_basis(h)
    grid = np.linspace(-ORBIT_GRID_SPAN, ORBIT_GRID_SPAN, ORBIT_GRID_POINTS)
    for k in (0, ORBIT_GRID_POINTS // 2, ORBIT_GRID_POINTS - 7):
        assert distance_to_time_orbit(cb, evolve(h, float(grid[k]))) < OFF_ORBIT_THRESHOLD
