"""Operators commuting with a Hamiltonian and what they can do.

Provides the real Hermitian basis of the commutant algebra, seeded sampling
of commutant unitaries (the symmetry witnesses behind every rival-structure
construction), eigenvalue incommensurability diagnostics and grid search for
the best time-orbit approximation of a commuting target.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError
from .hilbert import (
    CLUSTER_TOL,
    HermitianOp,
    SpectralDecomp,
    UnitaryOp,
    commutator_norm,
    evolve,
    spectral_decompose,
)

COMMUTE_TOL = 1e-9
ORBIT_GRID_POINTS = 100_000
ORBIT_GRID_SPAN = 100.0
OFF_ORBIT_THRESHOLD = 1e-3
RELATION_BUDGET = 100_000_000


class OffOrbitUnavailableError(RuntimeError):
    """The commutant torus offers nothing beyond phase times time evolution."""


@dataclass(frozen=True)
class CommutantBasis:
    """Hermitian basis of everything commuting with a source Hamiltonian."""

    dim_total: int
    generators: list[HermitianOp]
    source_spectrum: SpectralDecomp

    @property
    def dim(self) -> int:
        return self.source_spectrum.dim


@dataclass(frozen=True)
class ErgodicityReport:
    """Degeneracy and integer-relation findings for a spectrum."""

    degenerate: bool
    min_gap: float | None
    relations_found: list[tuple[int, ...]]
    coefficient_bound: int
    tolerance: float
    verdict: str  # NotErgodicDegenerate | NotErgodicRationalRelation | ErgodicAtBound

    def to_json_dict(self) -> dict:
        return {
            "degenerate": self.degenerate,
            "min_gap": self.min_gap,
            "relations": [list(k) for k in self.relations_found],
            "coefficient_bound": self.coefficient_bound,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


def commutant_basis(h: HermitianOp, cluster_tol: float = CLUSTER_TOL) -> CommutantBasis:
    """Span of the Hermitian operators commuting with ``h``.

    Built eigenspace-wise: an eigenspace of dimension m contributes its m
    diagonal units, the m(m-1)/2 symmetric pair sums and the m(m-1)/2
    antisymmetric pair differences, conjugated into the working basis.  The
    total count is the commutant dimension sum(m_i^2).
    """
    spec = spectral_decompose(h, cluster_tol)
    w, v = np.linalg.eigh(h.entries)
    groups = _group_indices(w, cluster_tol)
    generators: list[HermitianOp] = []
    for g in groups:
        block = v[:, g]
        m = block.shape[1]
        for a in range(m):
            va = block[:, a]
            generators.append(HermitianOp(np.outer(va, va.conj())))
        for a in range(m):
            for b in range(a + 1, m):
                va, vb = block[:, a], block[:, b]
                cross = np.outer(va, vb.conj())
                generators.append(HermitianOp(cross + cross.conj().T))
                generators.append(HermitianOp(1j * (cross - cross.conj().T)))
    return CommutantBasis(sum(m * m for m in spec.multiplicities), generators, spec)


def _group_indices(values: np.ndarray, cluster_tol: float) -> list[np.ndarray]:
    groups: list[list[int]] = [[0]]
    for i in range(1, len(values)):
        if values[i] - values[groups[-1][-1]] < cluster_tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return [np.array(g) for g in groups]


def _orbit_phase_overlaps(cb: CommutantBasis, u: UnitaryOp, t_grid: np.ndarray) -> np.ndarray:
    """|tr(evolve(h,t)^dag u)| over the grid, evaluated blockwise in the eigenbasis."""
    lam = cb.source_spectrum.eigenvalues
    traces = np.array([np.trace(p.entries @ u.entries) for p in cb.source_spectrum.projectors])
    # tr(E(t)^dag U) = sum_b e^{+i lam_b t} tr(P_b U)
    out = np.empty(len(t_grid))
    step = 65536
    for start in range(0, len(t_grid), step):
        chunk = t_grid[start : start + step]
        out[start : start + step] = np.abs(np.exp(1j * np.outer(chunk, lam)) @ traces)
    return out


def distance_to_time_orbit(cb: CommutantBasis, u: UnitaryOp) -> float:
    """Min phase-invariant Frobenius distance from ``u`` to the sampled time orbit.

    The orbit is sampled on a fixed uniform grid of ORBIT_GRID_POINTS times in
    [-ORBIT_GRID_SPAN, ORBIT_GRID_SPAN]; distances are modded over the global
    phase, so the reported value is min over (t, phase) on that grid.
    """
    t_grid = np.linspace(-ORBIT_GRID_SPAN, ORBIT_GRID_SPAN, ORBIT_GRID_POINTS)
    overlaps = _orbit_phase_overlaps(cb, u, t_grid)
    n = cb.dim
    best = float(np.max(overlaps))
    return math.sqrt(max(0.0, 2.0 * n - 2.0 * best))


def has_off_orbit_directions(cb: CommutantBasis) -> bool:
    """Whether the commutant exceeds the phase-modded time-orbit closure.

    With every eigenvalue simple the commutant is a torus of dimension equal
    to the number of distinct eigenvalues; after removing the global phase a
    single one-parameter orbit can cover it only when at most two distinct
    eigenvalues remain.  Any degenerate eigenspace adds non-abelian room.
    """
    mults = cb.source_spectrum.multiplicities
    return any(m > 1 for m in mults) or len(mults) >= 3


def sample_commutant_unitary(
    cb: CommutantBasis,
    seed: int,
    exclude_time_orbit: bool = False,
    max_attempts: int = 64,
) -> UnitaryOp:
    """exp(-i G) for G a seeded random real combination of commutant generators.

    With ``exclude_time_orbit`` the draw is rejected and resampled until its
    phase-modded distance to the sampled time-orbit grid exceeds
    OFF_ORBIT_THRESHOLD; if the commutant has no off-orbit directions at all
    this raises OffOrbitUnavailableError rather than silently falling back.
    """
    if exclude_time_orbit and not has_off_orbit_directions(cb):
        raise OffOrbitUnavailableError(
            "commutant is exhausted by global phase times time evolution; "
            "no off-orbit witness exists"
        )
    rng = np.random.default_rng(seed)
    for _ in range(max_attempts):
        coeffs = rng.standard_normal(len(cb.generators))
        gen = sum(c * g.entries for c, g in zip(coeffs, cb.generators))
        w, v = np.linalg.eigh(gen)
        s = UnitaryOp((v * np.exp(-1j * w)) @ v.conj().T)
        if not exclude_time_orbit:
            return s
        if distance_to_time_orbit(cb, s) > OFF_ORBIT_THRESHOLD:
            return s
    raise OffOrbitUnavailableError(
        f"no sample cleared the off-orbit threshold in {max_attempts} attempts"
    )


def time_evolution(h: HermitianOp, t: float, t0: float = 0.0, hbar: float = 1.0) -> UnitaryOp:
    """Evolution operator over the interval t - t0."""
    return evolve(h, t - t0, hbar)


def _enumerate_relations(
    lam: np.ndarray, bound: int, tolerance: float
) -> list[tuple[int, ...]]:
    """Nonzero zero-sum integer vectors k with |k|_inf <= bound and |k . lam| < tolerance.

    The zero-sum restriction quotients out the global phase: a vector with
    sum(k) != 0 only rescales the overall phase of exp(-i lam t) and says
    nothing about the orbit's density in the phase-modded commutant torus.
    """
    d = len(lam)
    base = 2 * bound + 1
    total = base**d
    found: list[tuple[int, ...]] = []
    step = 1 << 18
    idx = np.arange(step)
    for start in range(0, total, step):
        block = start + idx[: min(step, total - start)]
        digits = np.empty((len(block), d), dtype=np.int64)
        rem = block.copy()
        for pos in range(d - 1, -1, -1):
            digits[:, pos] = rem % base
            rem //= base
        ks = digits - bound
        hits = np.abs(ks @ lam) < tolerance
        nonzero = np.any(ks != 0, axis=1)
        zero_sum = ks.sum(axis=1) == 0
        for row in ks[hits & nonzero & zero_sum]:
            found.append(tuple(int(x) for x in row))
    return found


def ergodicity_report(
    h: HermitianOp,
    coefficient_bound: int,
    tolerance: float,
    cluster_tol: float = CLUSTER_TOL,
) -> ErgodicityReport:
    """Degeneracy check plus exhaustive integer-relation search on the spectrum.

    The search runs over the full eigenvalue vector (ascending), enumerating
    every integer vector with infinity norm up to ``coefficient_bound``; the
    verdict priority is Degenerate > RationalRelation > ErgodicAtBound.
    """
    lam = np.linalg.eigvalsh(h.entries)
    d = len(lam)
    if d > 8:
        raise CapacityError(f"exhaustive relation search supports dim <= 8, got {d}")
    if (2 * coefficient_bound + 1) ** d > RELATION_BUDGET:
        raise CapacityError(
            f"(2*{coefficient_bound}+1)^{d} candidates exceed the enumeration budget "
            f"of {RELATION_BUDGET}"
        )
    spec = spectral_decompose(h, cluster_tol)
    degenerate = any(m > 1 for m in spec.multiplicities)
    distinct = spec.eigenvalues
    min_gap = float(np.min(np.diff(distinct))) if len(distinct) >= 2 else None
    relations = _enumerate_relations(lam, coefficient_bound, tolerance)
    if degenerate:
        verdict = "NotErgodicDegenerate"
    elif relations:
        verdict = "NotErgodicRationalRelation"
    else:
        verdict = "ErgodicAtBound"
    return ErgodicityReport(
        degenerate=degenerate,
        min_gap=min_gap,
        relations_found=relations,
        coefficient_bound=coefficient_bound,
        tolerance=tolerance,
        verdict=verdict,
    )


def phase_invariant_distance(a: UnitaryOp, b: UnitaryOp) -> float:
    """min over a global phase of the Frobenius distance between two unitaries."""
    z = complex(np.trace(b.entries.conj().T @ a.entries))
    if abs(z) < 1e-300:
        return float(np.linalg.norm(a.entries - b.entries))
    return float(np.linalg.norm(a.entries * (z.conjugate() / abs(z)) - b.entries))


def orbit_approximation(
    h: HermitianOp,
    target: UnitaryOp,
    t_max: float,
    steps: int,
) -> tuple[float, float]:
    """Best uniform-grid match of the time orbit to a commuting target.

    Scans t over ``steps`` points on [-t_max, t_max] and returns the t
    minimizing the phase-invariant Frobenius distance between evolve(h, t)
    and the target, together with that distance.  The scan runs through a
    fast spectral overlap kernel; the reported distance is then recomputed
    exactly at the winning grid point, so exact hits come out at machine
    precision rather than at the square-root noise floor of the kernel.
    """
    if commutator_norm(h, target) > 1e-8:
        raise ValueError("target does not commute with the Hamiltonian")
    cb_spec = spectral_decompose(h)
    lam = cb_spec.eigenvalues
    traces = np.array([np.trace(p.entries @ target.entries) for p in cb_spec.projectors])
    t_grid = np.linspace(-t_max, t_max, steps)
    best_t, best_overlap = 0.0, -1.0
    step = 65536
    for start in range(0, steps, step):
        chunk = t_grid[start : start + step]
        overlaps = np.abs(np.exp(1j * np.outer(chunk, lam)) @ traces)
        i = int(np.argmax(overlaps))
        if overlaps[i] > best_overlap:
            best_overlap = float(overlaps[i])
            best_t = float(chunk[i])
    return best_t, phase_invariant_distance(evolve(h, best_t), target)
