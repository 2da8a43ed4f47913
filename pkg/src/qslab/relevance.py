"""Distinguishability, invariant profiles, rival structures and certificates.

The central mechanism: a unitary commuting with the Hamiltonian transports a
structure into another structure of the exact same kind whose invariant
profile on the same state generally differs, so the structure cannot be both
physically relevant and unique.  Certificates package one such demonstration
in machine-checkable form, including the negative controls (global phases,
stationary states) where the construction must fail to separate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .commutant import OffOrbitUnavailableError, commutant_basis, sample_commutant_unitary
from .espace import locality_degree
from .hilbert import (
    CLUSTER_TOL,
    HermitianOp,
    Ket,
    Tps,
    UnitaryOp,
    commutator_norm,
    conjugate,
    evolve,
    random_unitary,
    spectral_decompose,
)
from .kstruct import (
    BASIS_KIND,
    ConditionReport,
    KStructure,
    check_kind,
    transform_structure,
)

WITNESS_COMMUTE_TOL = 1e-8
H_DISTINGUISH_TOL = 1e-9

VERDICT_DISTINCT = "DistinctStructures"
VERDICT_EQUIVALENT = "EquivalentUnderGP"
VERDICT_NOT_APPLICABLE = "NotApplicable"


@dataclass(frozen=True)
class WitnessClass:
    """Provenance of a witness: time evolution, commutant draw, or phase."""

    kind: str  # time | commutant | commutant-offorbit | phase | identity
    param: float | int | None = None

    def __str__(self) -> str:
        return self.kind if self.param is None else f"{self.kind}:{self.param}"


@dataclass(frozen=True)
class Certificate:
    """Serializable record of one non-uniqueness demonstration."""

    model_id: str
    structure_kind: list[str]
    witness: UnitaryOp
    witness_class: WitnessClass
    kind_check_original: ConditionReport
    kind_check_rival: ConditionReport
    invariant_original: np.ndarray
    invariant_rival: np.ndarray
    max_invariant_gap: float
    verdict: str
    gap_band: str  # distinct | equivalent | inconclusive | n/a
    h_indistinguishable: bool | None = None

    def to_json_dict(self, full: bool = False) -> dict:
        doc = {
            "model": self.model_id,
            "kind": list(self.structure_kind),
            "witness_class": str(self.witness_class),
            "gap": self.max_invariant_gap,
            "gap_band": self.gap_band,
            "verdict": self.verdict,
            "invariants": {
                "original": [float(x) for x in self.invariant_original],
                "rival": [float(x) for x in self.invariant_rival],
            },
            "kind_check_original": self.kind_check_original.to_json_dict(),
            "kind_check_rival": self.kind_check_rival.to_json_dict(),
        }
        if self.h_indistinguishable is not None:
            doc["h_indistinguishable"] = self.h_indistinguishable
        if full:
            doc["witness"] = [
                [[float(z.real), float(z.imag)] for z in row] for row in self.witness.entries
            ]
        return doc

    def to_json(self, full: bool = False) -> str:
        return json.dumps(self.to_json_dict(full), sort_keys=True)


def distinguishes(
    a: HermitianOp,
    psi: Ket,
    psi2: Ket,
    tol: float = H_DISTINGUISH_TOL,
    cluster_tol: float = CLUSTER_TOL,
) -> tuple[bool, np.ndarray]:
    """Whether the eigenspace weight profiles of the two states differ.

    Computes ||P_i psi||^2 over the clustered eigenspaces of ``a`` for both
    states; the operator distinguishes them when some eigenspace weight gap
    exceeds ``tol``.  Returns the flag and the per-eigenspace gaps.
    """
    spec = spectral_decompose(a, cluster_tol)
    gaps = np.abs(spec.projector_weights(psi) - spec.projector_weights(psi2))
    return bool(np.any(gaps > tol)), gaps


def structure_invariant(s: KStructure, psi: Ket) -> np.ndarray:
    """Ascending expectation profile of the structure on the state.

    Sorting quotients out label permutations, and expectations kill the
    global phase of ``psi``, so the vector is a physical-state invariant.
    """
    if s.dim != psi.dim:
        raise ValueError(f"dimension mismatch: structure {s.dim} vs state {psi.dim}")
    return np.sort(np.array([op.expectation(psi) for op in s.ops]))


def rival_structure(s: KStructure, witness: UnitaryOp, h: HermitianOp | None = None) -> KStructure:
    """Structure of identical kind transported by a commutant witness.

    Operators are conjugated by the witness, so the rival's invariant profile
    on ``psi`` equals the original's profile on the transported state
    witness^-1 psi.  When the session Hamiltonian is supplied, the witness is
    required to commute with it.
    """
    if h is not None and commutator_norm(witness, h) > WITNESS_COMMUTE_TOL:
        raise ValueError("witness does not commute with the session Hamiltonian")
    if s.state_dependent:
        raise ValueError(
            "state-dependent structures need a re-construction rule, not plain conjugation"
        )
    return transform_structure(s, witness)


def invariant_gap(a: np.ndarray, b: np.ndarray) -> float:
    """Infinity norm between two sorted invariant profiles."""
    return float(np.max(np.abs(a - b)))


def certify_nonuniqueness(
    h: HermitianOp,
    s: KStructure,
    psi: Ket,
    witness: UnitaryOp,
    model_id: str = "",
    witness_class: WitnessClass | None = None,
) -> Certificate:
    """Build the rival, compare invariant profiles, and emit the verdict.

    DistinctStructures requires both kind checks to pass and a profile gap
    above ten times the kind tolerance; gaps at or below the tolerance mean
    the witness acted inside the non-physical symmetry group
    (EquivalentUnderGP).  Gaps strictly between the two thresholds are
    reported as an inconclusive band, never rounded to either side.
    """
    if commutator_norm(witness, h) > WITNESS_COMMUTE_TOL:
        raise ValueError("witness does not commute with the session Hamiltonian")
    report_original = check_kind(s, h)
    if not report_original.ok:
        raise ValueError("structure fails its own kind check")
    rival = rival_structure(s, witness, h)
    report_rival = check_kind(rival, h)

    inv_original = structure_invariant(s, psi)
    inv_rival = structure_invariant(rival, psi)
    gap = invariant_gap(inv_original, inv_rival)

    tol = s.kind.tolerance
    if not (report_original.ok and report_rival.ok):
        verdict, band = VERDICT_NOT_APPLICABLE, "n/a"
    elif gap > 10.0 * tol:
        verdict, band = VERDICT_DISTINCT, "distinct"
    elif gap <= tol:
        verdict, band = VERDICT_EQUIVALENT, "equivalent"
    else:
        verdict, band = VERDICT_NOT_APPLICABLE, "inconclusive"

    return Certificate(
        model_id=model_id,
        structure_kind=s.kind.tag_strings(),
        witness=witness,
        witness_class=witness_class or WitnessClass("unspecified"),
        kind_check_original=report_original,
        kind_check_rival=report_rival,
        invariant_original=inv_original,
        invariant_rival=inv_rival,
        max_invariant_gap=gap,
        verdict=verdict,
        gap_band=band,
    )


def _require_rank1_pvm(basis: KStructure) -> None:
    if len(basis.ops) != basis.dim:
        raise ValueError("basis structure must carry one rank-1 projector per dimension")
    probe = replace(basis, kind=BASIS_KIND)
    report = check_kind(probe)
    if not report.ok:
        raise ValueError("structure is not a full rank-1 projective decomposition")


def passive_time_travel(
    h: HermitianOp,
    basis: KStructure,
    psi0: Ket,
    t: float,
    hbar: float = 1.0,
) -> float:
    """Residual of the two equivalent descriptions of time transport.

    The state read in the basis transported forward by t must look exactly
    like the state evolved backward by t read in the original basis.  Both
    sides are computed independently (operator conjugation versus state
    transport) and the maximum componentwise difference is returned; the
    contract is residual < 1e-11.
    """
    _require_rank1_pvm(basis)
    forward = evolve(h, t, hbar)
    moved_basis = transform_structure(basis, forward)
    side_a = np.array([op.expectation(psi0) for op in moved_basis.ops])

    back_state = evolve(h, -t, hbar).apply(psi0)
    side_b = np.array([op.expectation(back_state) for op in basis.ops])
    return float(np.max(np.abs(side_a - side_b)))


def alternative_reality(
    h: HermitianOp,
    basis: KStructure,
    psi0: Ket,
    seed: int,
    model_id: str = "",
) -> Certificate:
    """Certificate for a generic off-orbit commutant witness.

    The rival structure reads the untouched state as if it came from an
    alternative history the Hamiltonian itself cannot tell apart: the
    certificate additionally records that the eigenspace weight profiles of
    the state and its transported partner agree within 1e-9.
    """
    cb = commutant_basis(h)
    wc = WitnessClass("commutant-offorbit", seed)
    try:
        witness = sample_commutant_unitary(cb, seed, exclude_time_orbit=True)
    except OffOrbitUnavailableError:
        report = check_kind(basis, h)
        inv = structure_invariant(basis, psi0)
        return Certificate(
            model_id=model_id,
            structure_kind=basis.kind.tag_strings(),
            witness=UnitaryOp(np.eye(h.dim)),
            witness_class=wc,
            kind_check_original=report,
            kind_check_rival=report,
            invariant_original=inv,
            invariant_rival=inv,
            max_invariant_gap=0.0,
            verdict=VERDICT_NOT_APPLICABLE,
            gap_band="n/a",
        )
    cert = certify_nonuniqueness(h, basis, psi0, witness, model_id, wc)
    transported = witness.inverse().apply(psi0)
    flag, _ = distinguishes(h, psi0, transported)
    return replace(cert, h_indistinguishable=not flag)


def alternative_laws(h: HermitianOp, tps: Tps, seed: int) -> tuple[int, int]:
    """Interaction locality of the Hamiltonian versus a spectral twin.

    Draws a seeded Haar-like unitary (not required to commute with ``h``),
    verifies the conjugated operator carries the identical spectrum, and
    returns the locality degrees of both in the same factorization.
    """
    rng = np.random.default_rng(seed)
    v = random_unitary(h.dim, rng)
    twin = conjugate(h, v)
    spec_gap = float(
        np.max(np.abs(np.linalg.eigvalsh(h.entries) - np.linalg.eigvalsh(twin.entries)))
    )
    if spec_gap > 1e-9:
        raise RuntimeError(f"conjugation failed to preserve the spectrum (gap {spec_gap:.3e})")
    return locality_degree(h, tps), locality_degree(twin, tps)
