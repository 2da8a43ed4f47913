"""Builders for the concrete Hamiltonians the demonstrations run on.

Lattice-discretized nonrelativistic particles on a periodic ring, transverse
field Ising chains, the diagonal spin-bath monitoring model, diagonal test
Hamiltonians and random Hamiltonians with a prescribed spectrum.  Every
builder returns a Hermitian operator together with its natural tensor
factorization and is deterministic given its arguments.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CapacityError
from .hilbert import HermitianOp, Tps, embed_factor_op, random_unitary

DIM_CAP = 256

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

POTENTIALS = ("coulomb-regularized", "harmonic", "contact")


@dataclass(frozen=True)
class NrqmLatticeSpec:
    """n distinguishable particles on a 1-D periodic ring of L sites.

    The pairwise potential depends only on the integer ring distance:
    ``coulomb-regularized`` is strength/(d+1), ``harmonic`` is strength*d^2,
    ``contact`` is strength at d=0 and zero elsewhere.
    """

    particles: int
    sites: int
    masses: tuple[float, ...]
    hbar: float = 1.0
    potential: str = "coulomb-regularized"
    strength: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "masses", tuple(float(m) for m in self.masses))
        if self.particles < 1 or self.sites < 2:
            raise ValueError("need at least one particle and two sites")
        if len(self.masses) != self.particles:
            raise ValueError("one mass per particle required")
        if any(m <= 0 for m in self.masses) or self.hbar <= 0:
            raise ValueError("masses and hbar must be positive")
        if self.potential not in POTENTIALS:
            raise ValueError(f"unknown potential {self.potential!r}; choose from {POTENTIALS}")

    @property
    def dim(self) -> int:
        return self.sites**self.particles


@dataclass(frozen=True)
class ZurekSpec:
    """One monitored qubit coupled diagonally to N environment qubits."""

    couplings: tuple[float, ...]
    hbar: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "couplings", tuple(float(g) for g in self.couplings))
        if not self.couplings:
            raise ValueError("need at least one environment coupling")
        if self.hbar <= 0:
            raise ValueError("hbar must be positive")

    @property
    def env_count(self) -> int:
        return len(self.couplings)

    @property
    def dim(self) -> int:
        return 2 ** (self.env_count + 1)


def _ring_distance(a: np.ndarray, b: np.ndarray, sites: int) -> np.ndarray:
    d = np.abs(a - b)
    return np.minimum(d, sites - d)


def _potential_values(name: str, strength: float, dist: np.ndarray) -> np.ndarray:
    if name == "coulomb-regularized":
        return strength / (dist + 1.0)
    if name == "harmonic":
        return strength * dist.astype(float) ** 2
    return np.where(dist == 0, strength, 0.0)


def build_nrqm_lattice(spec: NrqmLatticeSpec) -> tuple[HermitianOp, Tps]:
    """Kinetic hopping plus distance-dependent pair potential on the ring.

    The kinetic term for particle j is (hbar^2 / 2 m_j) times the
    nearest-neighbor ring Laplacian (2 on the diagonal, -1 on the hops), so
    its single-particle spectrum is (hbar^2 / 2 m_j) (2 - 2 cos(2 pi k / L)).
    The potential is diagonal in the site basis and sums over ordered pairs
    j != k.  The returned factorization is the particle one: n factors of
    dimension L with the identity map.
    """
    if spec.dim > DIM_CAP:
        raise CapacityError(f"Hilbert dimension {spec.dim} exceeds the cap of {DIM_CAP}")
    L, n = spec.sites, spec.particles

    lap = 2.0 * np.eye(L) - np.eye(L, k=1) - np.eye(L, k=-1)
    lap[0, -1] -= 1.0
    lap[-1, 0] -= 1.0

    h = np.zeros((spec.dim, spec.dim), dtype=complex)
    for j in range(n):
        h += (spec.hbar**2 / (2.0 * spec.masses[j])) * embed_factor_op(lap, j, [L] * n)

    if spec.strength != 0.0 and n > 1:
        coords = np.indices([L] * n).reshape(n, -1)  # site of each particle per basis state
        diag = np.zeros(spec.dim)
        for j in range(n):
            for k in range(n):
                if j != k:
                    diag += _potential_values(
                        spec.potential, spec.strength, _ring_distance(coords[j], coords[k], L)
                    )
        h += np.diag(diag)

    return HermitianOp(h), Tps.canonical([L] * n)


def build_ising_chain(n: int, coupling: float, field: float, periodic: bool = False) -> tuple[HermitianOp, Tps]:
    """Transverse-field Ising chain -J sum sz.sz - h sum sx on n qubits.

    The periodic wrap bond is added only for n > 2 so the two-site chain
    never carries a doubled bond.
    """
    if not 2 <= n <= 8:
        raise CapacityError(f"chain length {n} outside the supported range 2..8")
    dims = [2] * n
    h = np.zeros((2**n, 2**n), dtype=complex)
    bonds = [(i, i + 1) for i in range(n - 1)]
    if periodic and n > 2:
        bonds.append((n - 1, 0))
    for i, j in bonds:
        h -= coupling * (embed_factor_op(PAULI_Z, i, dims) @ embed_factor_op(PAULI_Z, j, dims))
    for i in range(n):
        h -= field * embed_factor_op(PAULI_X, i, dims)
    return HermitianOp(h), Tps.canonical(dims)


def build_zurek(spec: ZurekSpec) -> tuple[HermitianOp, Tps]:
    """Interaction-only monitoring model sz_S (x) sum_k g_k sz_k.

    Factor 0 is the system qubit; the model is diagonal in the computational
    basis and conserves the system pointer observable sz_S.
    """
    n_total = spec.env_count + 1
    if n_total > 8:
        raise CapacityError(f"{n_total} qubits exceed the supported 8")
    dims = [2] * n_total
    sz_s = embed_factor_op(PAULI_Z, 0, dims)
    h = np.zeros((2**n_total, 2**n_total), dtype=complex)
    for k, g in enumerate(spec.couplings):
        h += g * (sz_s @ embed_factor_op(PAULI_Z, k + 1, dims))
    return HermitianOp(h), Tps.canonical(dims)


def build_diagonal(values) -> tuple[HermitianOp, Tps]:
    """Diagonal Hamiltonian with the given real entries, single-factor Tps."""
    vals = np.asarray(values, dtype=float)
    if vals.ndim != 1 or len(vals) < 2:
        raise ValueError("need a vector of at least two diagonal values")
    if len(vals) > DIM_CAP:
        raise CapacityError(f"dimension {len(vals)} exceeds the cap of {DIM_CAP}")
    return HermitianOp(np.diag(vals).astype(complex)), Tps.canonical([len(vals)])


def build_random_spectrum(eigenvalues, seed: int) -> HermitianOp:
    """V diag(lambda) V^dag with V Haar-like from the seed."""
    vals = np.asarray(eigenvalues, dtype=float)
    rng = np.random.default_rng(seed)
    v = random_unitary(len(vals), rng).entries
    m = (v * vals) @ v.conj().T
    return HermitianOp((m + m.conj().T) / 2)


def system_pointer_observable(spec: ZurekSpec) -> HermitianOp:
    """sz on the system qubit, identity on the environment."""
    dims = [2] * (spec.env_count + 1)
    return HermitianOp(embed_factor_op(PAULI_Z, 0, dims))


# ---------------------------------------------------------------------------
# JSON model specs: {"model": name, "params": {...}}

BUILTIN_MODELS: dict[str, dict] = {
    "ising2": {"model": "ising", "params": {"n": 2, "coupling": 1.0, "field": 1.0}},
    "ising3": {"model": "ising", "params": {"n": 3, "coupling": 1.0, "field": 1.0}},
    "ising4": {"model": "ising", "params": {"n": 4, "coupling": 1.0, "field": 1.0}},
    "nrqm23": {
        "model": "nrqm",
        "params": {
            "particles": 2,
            "sites": 3,
            "masses": [1.0, 1.5],
            "potential": "coulomb-regularized",
            "strength": 0.7,
        },
    },
    "zurek2": {"model": "zurek", "params": {"couplings": [1.0, 2.0]}},
    "zurek4": {"model": "zurek", "params": {"couplings": [0.9, 1.3, 0.4, 2.1]}},
    "diag012": {"model": "diag", "params": {"values": [0.0, 1.0, 2.0]}},
    "diag112": {"model": "diag", "params": {"values": [1.0, 1.0, 2.0]}},
    "diagroot2": {"model": "diag", "params": {"values": [0.0, 1.0, math.sqrt(2.0)]}},
}


def model_from_dict(doc: dict) -> tuple[HermitianOp, Tps, str]:
    """Instantiate a model from its JSON document; returns (H, tps, model_id)."""
    if not isinstance(doc, dict) or "model" not in doc:
        raise ValueError("model document must be an object with a 'model' key")
    name = doc["model"]
    params = doc.get("params", {})
    if name == "ising":
        h, tps = build_ising_chain(
            int(params["n"]),
            float(params.get("coupling", 1.0)),
            float(params.get("field", 1.0)),
            bool(params.get("periodic", False)),
        )
        label = f"ising(n={params['n']})"
    elif name == "nrqm":
        spec = NrqmLatticeSpec(
            particles=int(params["particles"]),
            sites=int(params["sites"]),
            masses=tuple(params["masses"]),
            hbar=float(params.get("hbar", 1.0)),
            potential=params.get("potential", "coulomb-regularized"),
            strength=float(params.get("strength", 0.0)),
        )
        h, tps = build_nrqm_lattice(spec)
        label = f"nrqm(n={spec.particles},L={spec.sites})"
    elif name == "zurek":
        spec = ZurekSpec(tuple(params["couplings"]), float(params.get("hbar", 1.0)))
        h, tps = build_zurek(spec)
        label = f"zurek(N={spec.env_count})"
    elif name == "diag":
        h, tps = build_diagonal(params["values"])
        label = f"diag({len(params['values'])})"
    elif name == "random_spectrum":
        h = build_random_spectrum(params["values"], int(params.get("seed", 0)))
        tps = Tps.canonical([h.dim])
        label = f"random_spectrum({len(params['values'])})"
    else:
        raise ValueError(f"unknown model kind {name!r}")
    return h, tps, label


def load_model_document(source: str | Path | dict) -> dict:
    """Resolve a builtin name, JSON file path or inline dict to the model document."""
    if isinstance(source, dict):
        return source
    key = str(source)
    if key in BUILTIN_MODELS:
        return BUILTIN_MODELS[key]
    path = Path(key)
    if not path.exists():
        raise ValueError(f"model {key!r} is neither a builtin name nor an existing file")
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def load_model(source: str | Path | dict) -> tuple[HermitianOp, Tps, str]:
    """Load a model from a builtin name, a JSON file path, or an inline dict."""
    return model_from_dict(load_model_document(source))
