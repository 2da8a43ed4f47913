"""Product-operator expansions, locality, interaction graphs and entropy.

Expands operators over per-factor trace-orthonormal Hermitian bases, derives
interaction topology and mutual-information distances from a state, and
builds lattice families of squeezed coherent states on a ring.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import reduce
from itertools import product as iter_product

import numpy as np

from .hilbert import HermitianOp, Ket, Tps, UnitaryOp, partial_trace

COEFF_FLOOR = 1e-10
TERM_FLOOR = 1e-12
MI_FLOOR = 1e-8

_PAULI_BASIS = [
    np.eye(2, dtype=complex) / np.sqrt(2),
    np.array([[0, 1], [1, 0]], dtype=complex) / np.sqrt(2),
    np.array([[0, -1j], [1j, 0]], dtype=complex) / np.sqrt(2),
    np.array([[1, 0], [0, -1]], dtype=complex) / np.sqrt(2),
]


def factor_operator_basis(dim: int) -> list[np.ndarray]:
    """Trace-orthonormal Hermitian basis of dim x dim matrices.

    Index 0 is the normalized identity; for dimension 2 the rest are the
    normalized Pauli matrices, otherwise a generalized Gell-Mann family
    (symmetric pairs, antisymmetric pairs, traceless diagonals).
    """
    if dim == 2:
        return list(_PAULI_BASIS)
    basis = [np.eye(dim, dtype=complex) / np.sqrt(dim)]
    for a in range(dim):
        for b in range(a + 1, dim):
            sym = np.zeros((dim, dim), dtype=complex)
            sym[a, b] = sym[b, a] = 1 / np.sqrt(2)
            basis.append(sym)
            anti = np.zeros((dim, dim), dtype=complex)
            anti[a, b] = -1j / np.sqrt(2)
            anti[b, a] = 1j / np.sqrt(2)
            basis.append(anti)
    for l in range(1, dim):
        diag = np.zeros(dim)
        diag[:l] = 1.0
        diag[l] = -float(l)
        basis.append(np.diag(diag).astype(complex) / np.sqrt(l * (l + 1)))
    return basis


@dataclass(frozen=True)
class ExpansionTerm:
    """One product term: coefficient and per-factor basis indices."""

    coefficient: complex
    indices: tuple[int, ...]

    @property
    def identity_flags(self) -> tuple[bool, ...]:
        return tuple(i == 0 for i in self.indices)

    @property
    def weight(self) -> int:
        """Number of factors carried non-trivially."""
        return sum(1 for i in self.indices if i != 0)


@dataclass(frozen=True)
class ProductExpansion:
    """Expansion of an operator over the tensored per-factor bases."""

    terms: list[ExpansionTerm]
    tps: Tps

    def reconstruct(self) -> HermitianOp:
        """Resum the terms and return to the working representation."""
        dims = self.tps.factor_dims
        bases = [factor_operator_basis(d) for d in dims]
        total = np.zeros((self.tps.dim, self.tps.dim), dtype=complex)
        for term in self.terms:
            mats = [bases[f][i] for f, i in enumerate(term.indices)]
            total += term.coefficient * reduce(np.kron, mats)
        iso = self.tps.iso.entries
        total = iso @ total @ iso.conj().T
        return HermitianOp((total + total.conj().T) / 2)

    def max_weight(self, coeff_floor: float = COEFF_FLOOR) -> int:
        return max((t.weight for t in self.terms if abs(t.coefficient) > coeff_floor), default=0)


def pauli_expand(h: HermitianOp, tps: Tps) -> ProductExpansion:
    """Expand ``h`` over products of per-factor trace-orthonormal bases.

    Coefficients are trace inner products computed by sequential tensor
    contraction (one factor at a time), so the cost is a fast transform
    rather than one trace per basis string.  Terms below TERM_FLOOR in
    magnitude are dropped; the resummation reproduces ``h``.
    """
    if h.dim != tps.dim:
        raise ValueError(f"operator dimension {h.dim} does not match factorization {tps.dim}")
    dims = tps.factor_dims
    n = len(dims)
    iso = tps.iso.entries
    prod_h = iso.conj().T @ h.entries @ iso

    cur = prod_h.reshape(dims + dims)
    for eps in range(n):
        stack = np.stack(factor_operator_basis(dims[eps]))  # (m, d, d)
        # contract out-axis (pos eps) with B[k, j, i] index i, in-axis (pos n) with j
        cur = np.tensordot(cur, stack, axes=([eps, n], [2, 1]))
        cur = np.moveaxis(cur, -1, eps)

    terms = []
    sizes = [d * d for d in dims]
    for idx in iter_product(*(range(m) for m in sizes)):
        c = cur[idx]
        if abs(c) > TERM_FLOOR:
            terms.append(ExpansionTerm(complex(c), idx))
    return ProductExpansion(terms, tps)


def locality_degree(h: HermitianOp, tps: Tps, coeff_floor: float = COEFF_FLOOR) -> int:
    """Largest number of factors any above-floor expansion term touches."""
    return pauli_expand(h, tps).max_weight(coeff_floor)


def interaction_edges(
    h: HermitianOp, tps: Tps, coeff_floor: float = COEFF_FLOOR
) -> dict[tuple[int, int], float]:
    """Factor pairs coupled by the Hamiltonian, weighted by sum |coeff|^2.

    A pair (i, j) is an edge when some above-floor term acts non-trivially on
    both factors; its weight accumulates |coeff|^2 over all such terms,
    including terms touching further factors as well.
    """
    expansion = pauli_expand(h, tps)
    edges: dict[tuple[int, int], float] = {}
    for term in expansion.terms:
        if abs(term.coefficient) <= coeff_floor:
            continue
        support = [f for f, i in enumerate(term.indices) if i != 0]
        for a in range(len(support)):
            for b in range(a + 1, len(support)):
                key = (support[a], support[b])
                edges[key] = edges.get(key, 0.0) + abs(term.coefficient) ** 2
    return edges


@dataclass(frozen=True)
class SpaceGraph:
    """Interaction topology plus mutual-information distances between factors."""

    vertices: tuple[int, ...]
    edges: dict[tuple[int, int], float]
    mi_matrix: np.ndarray
    dist_matrix: np.ndarray
    mi_max: float

    def to_json_dict(self) -> dict:
        def cell(x: float):
            return None if math.isinf(x) else x

        return {
            "vertices": list(self.vertices),
            "edges": [[a, b, w] for (a, b), w in sorted(self.edges.items())],
            "mi_matrix": [[float(x) for x in row] for row in self.mi_matrix],
            "dist_matrix": [[cell(float(x)) for x in row] for row in self.dist_matrix],
            "mi_max": self.mi_max,
        }

    def to_dot(self) -> str:
        lines = ["graph space {"]
        for v in self.vertices:
            lines.append(f"  {v};")
        for (a, b), w in sorted(self.edges.items()):
            lines.append(f'  {a} -- {b} [label="{w:.6g}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def interaction_graph(h: HermitianOp, tps: Tps, coeff_floor: float = COEFF_FLOOR) -> SpaceGraph:
    """Edges-only graph: topology from the operator, no state information."""
    n = tps.n_factors
    nan = np.full((n, n), 0.0)
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    return SpaceGraph(
        vertices=tuple(range(n)),
        edges=interaction_edges(h, tps, coeff_floor),
        mi_matrix=nan,
        dist_matrix=dist,
        mi_max=0.0,
    )


def vn_entropy(rho: HermitianOp) -> float:
    """Von Neumann entropy -sum lambda ln lambda in nats."""
    vals = np.linalg.eigvalsh(rho.entries)
    if vals[0] < -1e-9:
        raise ValueError(f"density operator has negative eigenvalue {vals[0]:.3e}")
    if abs(float(np.sum(vals)) - 1.0) > 1e-9:
        raise ValueError(f"density operator trace {float(np.sum(vals))!r} is not 1")
    vals = vals[vals > 1e-12]
    return float(-np.sum(vals * np.log(vals)))


def mutual_information(psi: Ket, tps: Tps, r1, r2) -> float:
    """I(R1:R2) = S(R1) + S(R2) - S(R1 u R2) for disjoint factor subsets."""
    r1 = sorted(int(i) for i in r1)
    r2 = sorted(int(i) for i in r2)
    if not r1 or not r2 or set(r1) & set(r2):
        raise ValueError("regions must be disjoint and non-empty")
    rho = HermitianOp(np.outer(psi.amplitudes, psi.amplitudes.conj()))
    joint = sorted(r1 + r2)
    if len(joint) == tps.n_factors:
        s_joint = 0.0  # pure state on the whole space
    else:
        s_joint = vn_entropy(partial_trace(rho, tps, joint))
    return vn_entropy(partial_trace(rho, tps, r1)) + vn_entropy(partial_trace(rho, tps, r2)) - s_joint


def space_graph(
    h: HermitianOp,
    tps: Tps,
    psi: Ket,
    mi_floor: float = MI_FLOOR,
    coeff_floor: float = COEFF_FLOOR,
) -> SpaceGraph:
    """Interaction topology plus distances d = -ln(I / I_max) from the state.

    Pairs with mutual information at or below ``mi_floor`` sit at infinite
    distance; I_max is the global maximum over the graph's pairs and is
    recorded on the result.  Larger mutual information always maps to
    shorter distance.
    """
    n = tps.n_factors
    mi = np.zeros((n, n))
    for a in range(n):
        for b in range(a + 1, n):
            val = max(mutual_information(psi, tps, [a], [b]), 0.0)
            mi[a, b] = mi[b, a] = val
    mi_max = float(mi.max())
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    if mi_max > mi_floor:
        for a in range(n):
            for b in range(n):
                if a != b and mi[a, b] > mi_floor:
                    dist[a, b] = -math.log(mi[a, b] / mi_max)
    return SpaceGraph(
        vertices=tuple(range(n)),
        edges=interaction_edges(h, tps, coeff_floor),
        mi_matrix=mi,
        dist_matrix=dist,
        mi_max=mi_max,
    )


def _ring_distance(x: np.ndarray, q: float, sites: int) -> np.ndarray:
    d = np.abs(x - q)
    return np.minimum(d, sites - d)


def coherent_family(sites: int, hbar: float = 1.0) -> list[Ket]:
    """Squeezed coherent states on the ring, one per (q, p) grid point.

    Members are indexed row-major as q * sites + k with momentum p = 2 pi k /
    sites; amplitudes carry a plane-wave phase exp(i p (x - q/2)) against the
    minimal-image Gaussian envelope exp(-d(x, q)^2 / (2 hbar)).  The momentum
    grid is chosen so phases close on the ring for any hbar; hbar sets only
    the envelope width.  Every member is explicitly normalized.
    """
    if sites < 4:
        raise ValueError("need at least four sites")
    if hbar <= 0:
        raise ValueError("hbar must be positive")
    x = np.arange(sites, dtype=float)
    family = []
    for q in range(sites):
        envelope = np.exp(-_ring_distance(x, float(q), sites) ** 2 / (2.0 * hbar))
        for k in range(sites):
            p = 2.0 * math.pi * k / sites
            family.append(Ket.normalized(np.exp(1j * p * (x - q / 2.0)) * envelope))
    return family


def frame_check(family: list[Ket]) -> tuple[float, float]:
    """(c, residual) for the unnormalized frame sum against c times identity.

    Sums (dim / count) |k><k| over the family, takes c as the mean diagonal
    and reports the operator-norm residual of the difference from c I.
    """
    dim = family[0].dim
    total = np.zeros((dim, dim), dtype=complex)
    for ket in family:
        total += np.outer(ket.amplitudes, ket.amplitudes.conj())
    total *= dim / len(family)
    c = float(np.real(np.trace(total)) / dim)
    residual = float(np.linalg.norm(total - c * np.eye(dim), ord=2))
    return c, residual


def rival_coherent_family(family: list[Ket], witness: UnitaryOp) -> list[Ket]:
    """Transport every member by the witness; overlaps are preserved exactly."""
    return [witness.apply(ket) for ket in family]


def expectation_profile(family: list[Ket], observables: list[HermitianOp]) -> np.ndarray:
    """Matrix of <member| O |member> over family members (rows) and observables."""
    out = np.empty((len(family), len(observables)))
    for i, ket in enumerate(family):
        for j, obs in enumerate(observables):
            out[i, j] = obs.expectation(ket)
    return out


def graph_to_json(graph: SpaceGraph) -> str:
    return json.dumps(graph.to_json_dict(), sort_keys=True)
