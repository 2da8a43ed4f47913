"""Labeled Hermitian operator families and their invariant defining conditions.

A structure is a finite labeled family of Hermitian operators together with
the closed set of unitarily invariant conditions (its kind) it must satisfy:
projector-ness, pairwise orthogonality, resolution of identity, positive
semidefiniteness, unit trace, mutual commutation across groups, and bounded
interaction locality of a session Hamiltonian.  Constructors cover bases,
PVMs/POVMs, commuting factor families, occupation-number families and
coherent frames.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace

import numpy as np

from .espace import interaction_edges, locality_degree
from .hilbert import (
    HermitianOp,
    Ket,
    Tps,
    UnitaryOp,
    conjugate,
    embed_factor_op,
    partial_trace,
    random_hermitian,
)

KIND_TOL = 1e-9


@dataclass(frozen=True)
class ConditionTag:
    """One invariant defining condition from the closed set."""

    name: str
    locality: int | None = None

    def __str__(self) -> str:
        if self.name == "dlocal":
            return f"dlocal:{self.locality}"
        return self.name


PROJECTOR = ConditionTag("projector")
PAIRWISE_ORTHOGONAL = ConditionTag("pairwise-orthogonal")
RESOLUTION_OF_IDENTITY = ConditionTag("resolution-of-identity")
POSITIVE_SEMIDEFINITE = ConditionTag("positive-semidefinite")
UNIT_TRACE = ConditionTag("unit-trace")
MUTUAL_COMMUTATION = ConditionTag("mutual-commutation")


def dlocal(d: int) -> ConditionTag:
    """Session Hamiltonian is d-local in the structure's own factorization."""
    return ConditionTag("dlocal", int(d))


_KNOWN = {
    "projector",
    "pairwise-orthogonal",
    "resolution-of-identity",
    "positive-semidefinite",
    "unit-trace",
    "mutual-commutation",
    "dlocal",
}


@dataclass(frozen=True)
class KindSpec:
    """A set of condition tags plus the tolerance they are checked at."""

    conditions: tuple[ConditionTag, ...]
    tolerance: float = KIND_TOL

    def __post_init__(self):
        tags = tuple(self.conditions)
        for tag in tags:
            if tag.name not in _KNOWN:
                raise ValueError(f"unknown condition tag {tag.name!r}")
        object.__setattr__(self, "conditions", tags)

    def tag_strings(self) -> list[str]:
        return [str(t) for t in self.conditions]


@dataclass(frozen=True)
class ConditionCheck:
    tag: str
    passed: bool
    residual: float


@dataclass(frozen=True)
class ConditionReport:
    """Per-tag residuals of a kind check; failures are entries, not errors."""

    checks: tuple[ConditionCheck, ...]
    tolerance: float

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def residual(self, tag: str) -> float:
        for c in self.checks:
            if c.tag == tag:
                return c.residual
        raise KeyError(tag)

    def to_json_dict(self) -> dict:
        return {
            "tolerance": self.tolerance,
            "ok": self.ok,
            "checks": [
                {"tag": c.tag, "passed": c.passed, "residual": c.residual} for c in self.checks
            ],
        }


class KindCheckError(ValueError):
    """Raised when a constructor's input fails its kind; carries the report."""

    def __init__(self, message: str, report: ConditionReport):
        super().__init__(f"{message}: "
                         + "; ".join(f"{c.tag}={c.residual:.3e}" for c in report.checks if not c.passed))
        self.report = report


@dataclass(frozen=True)
class KStructure:
    """Labeled family of Hermitian operators subject to a kind.

    ``labels`` may be tuples; for the mutual-commutation condition, operators
    whose labels share a first component are treated as one group and are
    exempt from the cross-commutation requirement.  ``tps`` records the
    factorization a factor-family structure was built on and co-transforms
    under ``transform_structure``.  ``state_dependent`` records whether the
    construction consumed a state vector (with its hash in ``state_hash``).
    """

    labels: tuple
    ops: list[HermitianOp]
    kind: KindSpec
    state_dependent: bool = False
    state_hash: str | None = None
    tps: Tps | None = None

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.labels) != len(self.ops) or not self.ops:
            raise ValueError("need one label per operator and at least one operator")
        dims = {op.dim for op in self.ops}
        if len(dims) != 1:
            raise ValueError(f"operators live on mixed dimensions {sorted(dims)}")

    @property
    def dim(self) -> int:
        return self.ops[0].dim

    def to_json_dict(self, include_matrices: bool = True) -> dict:
        doc = {
            "labels": [list(l) if isinstance(l, tuple) else l for l in self.labels],
            "kind": self.kind.tag_strings(),
            "tolerance": self.kind.tolerance,
            "state_dependent": self.state_dependent,
        }
        if include_matrices:
            doc["operators"] = [
                [[[float(z.real), float(z.imag)] for z in row] for row in op.entries]
                for op in self.ops
            ]
        return doc


def _op_norm(m: np.ndarray) -> float:
    return float(np.linalg.norm(m, ord=2))


def _group_key(label):
    return label[0] if isinstance(label, tuple) else label


def check_kind(s: KStructure, h: HermitianOp | None = None) -> ConditionReport:
    """Evaluate every condition tag of the structure's kind.

    Equality tags pass when the residual operator norm stays below the kind
    tolerance; positivity tags pass when the smallest eigenvalue stays above
    minus the tolerance.  The dlocal tag needs the session Hamiltonian ``h``
    and a structure with a recorded factorization.
    """
    tol = s.kind.tolerance
    mats = [op.entries for op in s.ops]
    dim = s.dim
    checks = []
    for tag in s.kind.conditions:
        if tag.name == "projector":
            residual = max(_op_norm(m @ m - m) for m in mats)
            passed = residual < tol
        elif tag.name == "pairwise-orthogonal":
            residual = 0.0
            for a in range(len(mats)):
                for b in range(a + 1, len(mats)):
                    residual = max(residual, _op_norm(mats[a] @ mats[b]))
            passed = residual < tol
        elif tag.name == "resolution-of-identity":
            residual = _op_norm(sum(mats) - np.eye(dim))
            passed = residual < tol
        elif tag.name == "positive-semidefinite":
            worst = min(float(np.linalg.eigvalsh(m)[0]) for m in mats)
            residual = max(0.0, -worst)
            passed = worst > -tol
        elif tag.name == "unit-trace":
            residual = max(abs(float(np.real(np.trace(m))) - 1.0) for m in mats)
            passed = residual < tol
        elif tag.name == "mutual-commutation":
            residual = 0.0
            keys = [_group_key(l) for l in s.labels]
            for a in range(len(mats)):
                for b in range(a + 1, len(mats)):
                    if keys[a] != keys[b]:
                        residual = max(residual, _op_norm(mats[a] @ mats[b] - mats[b] @ mats[a]))
            passed = residual < tol
        else:  # dlocal
            if h is None or s.tps is None:
                raise ValueError(
                    "dlocal condition needs the session Hamiltonian and a structure "
                    "with a recorded factorization"
                )
            degree = locality_degree(h, s.tps)
            residual = float(max(0, degree - tag.locality))
            passed = degree <= tag.locality
        checks.append(ConditionCheck(str(tag), passed, residual))
    return ConditionReport(tuple(checks), tol)


def transform_structure(s: KStructure, u: UnitaryOp) -> KStructure:
    """Conjugate every operator by ``u``, keeping labels and kind.

    A recorded factorization co-transforms (its identification map is
    composed with ``u``).  The kind is re-checked afterwards; a failure here
    would mean a non-invariant condition slipped in, so it raises rather
    than returning a broken structure.  The dlocal tag is H-dependent and is
    only re-checked by callers holding the session Hamiltonian.
    """
    if u.dim != s.dim:
        raise ValueError(f"dimension mismatch: structure {s.dim} vs unitary {u.dim}")
    new_ops = [conjugate(op, u) for op in s.ops]
    new_tps = s.tps.compose(u) if s.tps is not None else None
    out = replace(s, ops=new_ops, tps=new_tps)
    checkable = [t for t in s.kind.conditions if t.name != "dlocal"]
    report = check_kind(replace(out, kind=replace(s.kind, conditions=tuple(checkable))))
    if not report.ok:
        raise RuntimeError(
            "unitary transform broke an invariant kind condition (bug): "
            + json.dumps(report.to_json_dict())
        )
    return out


def _state_hash(psi: Ket) -> str:
    return hashlib.sha256(np.ascontiguousarray(psi.amplitudes).tobytes()).hexdigest()[:16]


BASIS_KIND = KindSpec((PROJECTOR, PAIRWISE_ORTHOGONAL, RESOLUTION_OF_IDENTITY, UNIT_TRACE))
POVM_KIND = KindSpec((POSITIVE_SEMIDEFINITE, RESOLUTION_OF_IDENTITY))
PVM_KIND = KindSpec((POSITIVE_SEMIDEFINITE, RESOLUTION_OF_IDENTITY, PROJECTOR, PAIRWISE_ORTHOGONAL))


def make_basis_structure(vectors: list[Ket]) -> KStructure:
    """Rank-1 projector family from an orthonormal basis."""
    dim = vectors[0].dim
    if len(vectors) != dim:
        raise ValueError(f"need exactly {dim} vectors, got {len(vectors)}")
    gram = np.array([[v.overlap(w) for w in vectors] for v in vectors])
    if np.max(np.abs(gram - np.eye(dim))) > 1e-10:
        raise ValueError("vectors are not orthonormal within 1e-10")
    ops = [HermitianOp(np.outer(v.amplitudes, v.amplitudes.conj())) for v in vectors]
    return KStructure(tuple(range(dim)), ops, BASIS_KIND)


def computational_basis_structure(dim: int) -> KStructure:
    """Rank-1 projectors onto the computational basis."""
    eye = np.eye(dim, dtype=complex)
    return make_basis_structure([Ket(eye[:, i]) for i in range(dim)])


def make_povm_structure(effects: list[HermitianOp], pvm: bool = False) -> KStructure:
    """Validate a positive resolution of the identity (optionally a PVM)."""
    kind = PVM_KIND if pvm else POVM_KIND
    s = KStructure(tuple(range(len(effects))), list(effects), kind)
    report = check_kind(s)
    if not report.ok:
        raise KindCheckError("effects do not satisfy the requested kind", report)
    return s


def make_tps_structure(tps: Tps, ops_per_factor: int, seed: int) -> KStructure:
    """Seeded random single-factor observables embedded per factor.

    Each factor contributes ``ops_per_factor`` Hermitian operators acting on
    it alone (identity elsewhere), carried into the working representation by
    the factorization's map; operators on distinct factors commute, which is
    the defining condition.
    """
    if ops_per_factor < 1:
        raise ValueError("ops_per_factor must be at least 1")
    rng = np.random.default_rng(seed)
    iso = tps.iso.entries
    labels = []
    ops = []
    for eps, d in enumerate(tps.factor_dims):
        for i in range(ops_per_factor):
            local = random_hermitian(d, rng).entries
            embedded = embed_factor_op(local, eps, tps.factor_dims)
            ops.append(HermitianOp(iso @ embedded @ iso.conj().T))
            labels.append((eps, i))
    return KStructure(tuple(labels), ops, KindSpec((MUTUAL_COMMUTATION,)), tps=tps)


OCCUPATION_KIND = KindSpec((MUTUAL_COMMUTATION, POSITIVE_SEMIDEFINITE, PROJECTOR))


def occupation_structure(tps: Tps) -> KStructure:
    """Hard-core occupation number per qubit site: n_x = (I - sz_x) / 2."""
    if any(d != 2 for d in tps.factor_dims):
        raise ValueError("occupation structure requires qubit factors")
    n_site = np.diag([0.0, 1.0]).astype(complex)
    iso = tps.iso.entries
    ops = []
    for x in range(tps.n_factors):
        embedded = embed_factor_op(n_site, x, tps.factor_dims)
        ops.append(HermitianOp(iso @ embedded @ iso.conj().T))
    return KStructure(tuple(range(tps.n_factors)), ops, OCCUPATION_KIND, tps=tps)


COHERENT_FRAME_KIND = KindSpec((PROJECTOR, POSITIVE_SEMIDEFINITE, UNIT_TRACE))


def coherent_frame_structure(family: list[Ket]) -> KStructure:
    """Rank-1 projector family over a coherent frame.

    The frame's overcompleteness means the members only resolve the identity
    approximately (see espace.frame_check); the kind carries the conditions
    that hold exactly: each member is a unit-trace rank-1 projector.
    """
    ops = [HermitianOp(np.outer(k.amplitudes, k.amplitudes.conj())) for k in family]
    return KStructure(tuple(range(len(family))), ops, COHERENT_FRAME_KIND)


def canonical_tps_invariants(tps: Tps, reference_states: list[Ket], h: HermitianOp) -> np.ndarray:
    """Standing invariant vector for physical comparison of factorizations.

    Concatenates, per factor and per reference state, the ascending spectra
    of the reduced density operators, followed by the ascending pair profile
    of the Hamiltonian's interaction weights in this factorization.  The
    vector is unchanged by factor-local unitaries, and factor permutations
    only permute its blocks.
    """
    pieces = []
    n = tps.n_factors
    for eps in range(n):
        for psi in reference_states:
            rho = HermitianOp(np.outer(psi.amplitudes, psi.amplitudes.conj()))
            reduced = rho if n == 1 else partial_trace(rho, tps, [eps])
            pieces.append(np.sort(np.linalg.eigvalsh(reduced.entries)))
    edges = interaction_edges(h, tps)
    profile = sorted(edges.get((a, b), 0.0) for a in range(n) for b in range(a + 1, n))
    pieces.append(np.array(profile))
    return np.concatenate(pieces)


def tps_invariant_gap(a: np.ndarray, b: np.ndarray) -> float:
    """Infinity norm between sorted invariant vectors (label-order quotient)."""
    if len(a) != len(b):
        raise ValueError("invariant vectors have different lengths")
    return float(np.max(np.abs(np.sort(a) - np.sort(b)))) if len(a) else 0.0
