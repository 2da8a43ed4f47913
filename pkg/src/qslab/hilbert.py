"""Dense finite-dimensional complex linear algebra substrate.

States, operators, tensor products, partial traces, spectral decomposition
and unitary conjugation.  Everything is dense complex double precision and
immutable after construction; all functions are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

NORM_TOL = 1e-12
HERM_TOL = 1e-12
UNIT_TOL = 1e-10
CLUSTER_TOL = 1e-8


def _frozen_complex(data, shape_check) -> np.ndarray:
    arr = np.array(data, dtype=np.complex128, copy=True)
    shape_check(arr)
    arr.setflags(write=False)
    return arr


def _require_square(arr: np.ndarray) -> None:
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")


@dataclass(frozen=True)
class Ket:
    """Normalized complex state vector."""

    amplitudes: np.ndarray
    norm_tol: float = NORM_TOL

    def __post_init__(self):
        arr = _frozen_complex(self.amplitudes, self._check)
        object.__setattr__(self, "amplitudes", arr)

    def _check(self, arr: np.ndarray) -> None:
        if arr.ndim != 1 or arr.shape[0] < 1:
            raise ValueError(f"expected a vector, got shape {arr.shape}")
        norm = np.linalg.norm(arr)
        if abs(norm - 1.0) > self.norm_tol:
            raise ValueError(f"state vector norm {norm!r} deviates from 1 by more than {self.norm_tol}")

    @classmethod
    def normalized(cls, data) -> "Ket":
        """Build a Ket from an unnormalized vector by rescaling."""
        arr = np.asarray(data, dtype=np.complex128)
        norm = np.linalg.norm(arr)
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(arr / norm)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def __array__(self, dtype=None):
        return np.asarray(self.amplitudes, dtype=dtype)

    def overlap(self, other: "Ket") -> complex:
        """Inner product <self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class HermitianOp:
    """Dense Hermitian matrix, validated entrywise at construction."""

    entries: np.ndarray
    herm_tol: float = HERM_TOL

    def __post_init__(self):
        arr = _frozen_complex(self.entries, self._check)
        object.__setattr__(self, "entries", arr)

    def _check(self, arr: np.ndarray) -> None:
        _require_square(arr)
        dev = np.max(np.abs(arr - arr.conj().T))
        if dev > self.herm_tol:
            raise ValueError(f"matrix deviates from Hermitian by {dev:.3e} (> {self.herm_tol})")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None):
        return np.asarray(self.entries, dtype=dtype)

    def expectation(self, psi: Ket) -> float:
        """Real expectation value <psi|A|psi>."""
        v = psi.amplitudes
        return float(np.real(np.vdot(v, self.entries @ v)))


@dataclass(frozen=True)
class UnitaryOp:
    """Dense unitary matrix, validated against U U^dag = I at construction."""

    entries: np.ndarray
    unit_tol: float = UNIT_TOL

    def __post_init__(self):
        arr = _frozen_complex(self.entries, self._check)
        object.__setattr__(self, "entries", arr)

    def _check(self, arr: np.ndarray) -> None:
        _require_square(arr)
        dev = np.max(np.abs(arr @ arr.conj().T - np.eye(arr.shape[0])))
        if dev > self.unit_tol:
            raise ValueError(f"matrix deviates from unitary by {dev:.3e} (> {self.unit_tol})")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None):
        return np.asarray(self.entries, dtype=dtype)

    def inverse(self) -> "UnitaryOp":
        return UnitaryOp(self.entries.conj().T)

    def apply(self, psi: Ket) -> Ket:
        return Ket(self.entries @ psi.amplitudes)


@dataclass(frozen=True)
class Tps:
    """Tensor product structure: factor dimensions plus an identification map.

    ``iso`` is a unitary carrying the ordered Kronecker-product space onto the
    working Hilbert space; a Tps value is one concrete representative of the
    equivalence class under factor-local unitaries and factor permutations.
    """

    factor_dims: tuple[int, ...]
    iso: UnitaryOp

    def __post_init__(self):
        dims = tuple(int(d) for d in self.factor_dims)
        if not dims or any(d < 2 for d in dims):
            raise ValueError(f"factor dimensions must all be >= 2, got {dims}")
        if math.prod(dims) != self.iso.dim:
            raise ValueError(
                f"product of factor dimensions {dims} does not match iso dimension {self.iso.dim}"
            )
        object.__setattr__(self, "factor_dims", dims)

    @classmethod
    def canonical(cls, factor_dims) -> "Tps":
        """The computational factorization: identity identification map."""
        dims = tuple(int(d) for d in factor_dims)
        return cls(dims, UnitaryOp(np.eye(math.prod(dims))))

    @property
    def dim(self) -> int:
        return math.prod(self.factor_dims)

    @property
    def n_factors(self) -> int:
        return len(self.factor_dims)

    def compose(self, u: UnitaryOp) -> "Tps":
        """New representative with identification map u . iso."""
        return Tps(self.factor_dims, UnitaryOp(u.entries @ self.iso.entries))


@dataclass(frozen=True)
class SpectralDecomp:
    """Clustered eigendecomposition: distinct eigenvalues, projectors, multiplicities."""

    eigenvalues: np.ndarray
    projectors: list[HermitianOp]
    multiplicities: tuple[int, ...]
    dim: int = field(init=False)

    def __post_init__(self):
        vals = np.array(self.eigenvalues, dtype=np.float64, copy=True)
        vals.setflags(write=False)
        object.__setattr__(self, "eigenvalues", vals)
        object.__setattr__(self, "multiplicities", tuple(int(m) for m in self.multiplicities))
        if not (len(vals) == len(self.projectors) == len(self.multiplicities)):
            raise ValueError("eigenvalues, projectors and multiplicities must align")
        object.__setattr__(self, "dim", self.projectors[0].dim)
        if sum(self.multiplicities) != self.dim:
            raise ValueError("multiplicities must sum to the space dimension")

    def reconstruct(self) -> HermitianOp:
        """Sum of eigenvalue-weighted projectors."""
        total = sum(lam * p.entries for lam, p in zip(self.eigenvalues, self.projectors))
        return HermitianOp(total)

    def projector_weights(self, psi: Ket) -> np.ndarray:
        """||P_i psi||^2 per clustered eigenspace."""
        v = psi.amplitudes
        return np.array([float(np.real(np.vdot(v, p.entries @ v))) for p in self.projectors])


def tensor_product(operands: list) -> Ket | HermitianOp:
    """Kronecker product of a non-empty list of Kets or of HermitianOps."""
    if not operands:
        raise ValueError("tensor_product requires at least one operand")
    if all(isinstance(o, Ket) for o in operands):
        vec = reduce(np.kron, (o.amplitudes for o in operands))
        return Ket(vec)
    if all(isinstance(o, HermitianOp) for o in operands):
        mat = reduce(np.kron, (o.entries for o in operands))
        return HermitianOp(mat)
    raise ValueError("operands must be all Ket or all HermitianOp")


def embed_factor_op(op: np.ndarray, factor: int, factor_dims) -> np.ndarray:
    """Place a single-factor matrix at position ``factor``, identity elsewhere."""
    mats = [np.eye(d, dtype=np.complex128) for d in factor_dims]
    mats[factor] = np.asarray(op, dtype=np.complex128)
    return reduce(np.kron, mats)


def partial_trace(rho: HermitianOp, tps: Tps, keep) -> HermitianOp:
    """Reduce ``rho`` to the factors in ``keep`` within the given factorization.

    The operator is first carried into the product representation through
    ``tps.iso``; the complement of ``keep`` is then traced out.  Trace,
    Hermiticity and positivity are preserved.
    """
    keep = sorted(int(k) for k in keep)
    n = tps.n_factors
    if rho.dim != tps.dim:
        raise ValueError(f"operator dimension {rho.dim} does not match factorization dimension {tps.dim}")
    if not keep or len(keep) >= n or any(k < 0 or k >= n for k in keep) or len(set(keep)) != len(keep):
        raise ValueError(f"keep must be a non-empty proper subset of factor indices 0..{n - 1}")

    iso = tps.iso.entries
    prod_rho = iso.conj().T @ rho.entries @ iso
    dims = tps.factor_dims
    tensor = prod_rho.reshape(dims + dims)

    # Trace out complement factors by pairing their row/column axes.
    drop = [i for i in range(n) if i not in keep]
    for offset, i in enumerate(drop):
        ax = i - offset  # axes shift as earlier factors are consumed
        tensor = np.trace(tensor, axis1=ax, axis2=ax + n - offset)
    d_keep = math.prod(dims[k] for k in keep)
    return HermitianOp(tensor.reshape(d_keep, d_keep))


def _cluster(values: np.ndarray, cluster_tol: float) -> list[np.ndarray]:
    """Group ascending values whose consecutive gaps stay below cluster_tol."""
    groups: list[list[int]] = [[0]]
    for i in range(1, len(values)):
        if values[i] - values[groups[-1][-1]] < cluster_tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return [np.array(g) for g in groups]


def spectral_decompose(a: HermitianOp, cluster_tol: float = CLUSTER_TOL) -> SpectralDecomp:
    """Eigendecompose ``a``, merging eigenvalues closer than ``cluster_tol``.

    Each cluster contributes one eigenvalue (the cluster mean) and one
    rank-``m`` projector, so degenerate eigenspaces come out whole.
    """
    w, v = np.linalg.eigh(a.entries)
    groups = _cluster(w, cluster_tol)
    eigenvalues = np.array([w[g].mean() for g in groups])
    projectors = []
    for g in groups:
        block = v[:, g]
        projectors.append(HermitianOp(block @ block.conj().T))
    mults = tuple(len(g) for g in groups)
    return SpectralDecomp(eigenvalues, projectors, mults)


def conjugate(a: HermitianOp, s: UnitaryOp) -> HermitianOp:
    """Unitary transport S A S^dag; preserves the spectrum."""
    if a.dim != s.dim:
        raise ValueError(f"dimension mismatch: operator {a.dim} vs unitary {s.dim}")
    m = s.entries @ a.entries @ s.entries.conj().T
    return HermitianOp((m + m.conj().T) / 2, herm_tol=a.herm_tol)


def evolve(h: HermitianOp, t: float, hbar: float = 1.0) -> UnitaryOp:
    """exp(-i h t / hbar) computed through the eigendecomposition of ``h``."""
    w, v = np.linalg.eigh(h.entries)
    phases = np.exp(-1j * w * (t / hbar))
    return UnitaryOp((v * phases) @ v.conj().T)


def random_unitary(dim: int, rng: np.random.Generator) -> UnitaryOp:
    """Haar-like unitary: QR of a complex Gaussian with phase-fixed diagonal."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    q = q * (d / np.abs(d))
    return UnitaryOp(q)


def random_hermitian(dim: int, rng: np.random.Generator) -> HermitianOp:
    """GUE-like Hermitian matrix with O(1) entries."""
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return HermitianOp((z + z.conj().T) / 2)


def random_ket(dim: int, rng: np.random.Generator) -> Ket:
    """Haar-like random unit vector."""
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return Ket.normalized(z)


def commutator_norm(a, b) -> float:
    """Frobenius norm of [A, B] for array-likes or wrapped operators."""
    am = np.asarray(a, dtype=np.complex128)
    bm = np.asarray(b, dtype=np.complex128)
    return float(np.linalg.norm(am @ bm - bm @ am))
