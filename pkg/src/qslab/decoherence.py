"""Spin-bath decoherence traces, factorization families, pointer dependence.

The monitoring model is exactly solvable: with a product environment the
system's off-diagonal coherence decays as a product of per-qubit cosine
factors, which serves as the analytic oracle against the direct unitary
evolution.  The same Hilbert space admits infinitely many factorizations
keeping a given state separable, and the reduced coherence read off a
commutant-transported factorization generally differs from the canonical
one.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .commutant import commutant_basis, sample_commutant_unitary
from .hilbert import HermitianOp, Ket, Tps, UnitaryOp, evolve, partial_trace
from .models import ZurekSpec, build_zurek

PRODUCT_TOL = 1e-10


def _split_rank1(vec: np.ndarray, d_left: int) -> tuple[np.ndarray, np.ndarray]:
    """Factor a bipartite unit vector as left (x) right, or raise."""
    m = vec.reshape(d_left, -1)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    if len(s) > 1 and s[1] > PRODUCT_TOL:
        raise ValueError(f"state is not a product across the cut (Schmidt tail {s[1]:.3e})")
    return u[:, 0] * s[0], vh[0]


def _factor_qubits(vec: np.ndarray) -> list[np.ndarray]:
    """Split a product state of qubits into its single-qubit factors."""
    factors = []
    rest = vec
    while rest.size > 2:
        left, rest = _split_rank1(rest, 2)
        factors.append(left)
    factors.append(rest)
    return factors


@dataclass(frozen=True)
class DecoherenceTrace:
    """Observed and predicted coherence magnitude over time."""

    times: np.ndarray
    offdiag: np.ndarray
    oracle: np.ndarray
    max_dev: float

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,offdiag,oracle\n")
        for t, o, p in zip(self.times, self.offdiag, self.oracle):
            buf.write(f"{t!r},{o!r},{p!r}\n")
        return buf.getvalue()


def coherence_oracle(spec: ZurekSpec, psi0: Ket, times: np.ndarray) -> np.ndarray:
    """Closed-form |rho_S(t)_01| for a product initial state.

    For environment qubit k in c|0> + d|1>, the coherence factor at time t is
    | |c|^2 e^{-2i g_k t / hbar} + |d|^2 e^{+2i g_k t / hbar} |, which is
    |cos(2 g_k t / hbar)| when the qubit starts in the balanced state.  The
    prefactor is |a b| from the system amplitudes.
    """
    factors = _factor_qubits(psi0.amplitudes)
    if len(factors) != spec.env_count + 1:
        raise ValueError("state does not match the model's qubit count")
    a, b = factors[0]
    out = np.full(len(times), abs(a) * abs(b), dtype=float)
    for g, env in zip(spec.couplings, factors[1:]):
        env = env / np.linalg.norm(env)
        p0 = abs(env[0]) ** 2
        phase = 2.0 * g * times / spec.hbar
        out *= np.abs(p0 * np.exp(-1j * phase) + (1.0 - p0) * np.exp(1j * phase))
    return out


def decoherence_trace(spec: ZurekSpec, psi0: Ket, times) -> DecoherenceTrace:
    """Evolve the monitored qubit and compare against the analytic oracle.

    The numerical side runs the full unitary evolution and partial trace; the
    oracle is the closed form above.  The initial state must be a product of
    the system qubit and single environment qubits.
    """
    times = np.asarray(times, dtype=float)
    h, tps = build_zurek(spec)
    if psi0.dim != h.dim:
        raise ValueError(f"state dimension {psi0.dim} does not match the model dimension {h.dim}")
    oracle = coherence_oracle(spec, psi0, times)

    offdiag = np.empty(len(times))
    for i, t in enumerate(times):
        psi_t = evolve(h, float(t), spec.hbar).apply(psi0)
        rho = HermitianOp(np.outer(psi_t.amplitudes, psi_t.amplitudes.conj()))
        rho_s = partial_trace(rho, tps, [0])
        offdiag[i] = abs(rho_s.entries[0, 1])

    max_dev = float(np.max(np.abs(offdiag - oracle))) if len(times) else 0.0
    return DecoherenceTrace(times, offdiag, oracle, max_dev)


def decohered_time(spec: ZurekSpec) -> float:
    """A time with guaranteed non-trivial coherence suppression."""
    return math.pi / (4.0 * max(abs(g) for g in spec.couplings))


def separable_factorization_family(psi: Ket, seed: int, count: int) -> list[Tps]:
    """Factorizations of a four-dimensional space keeping ``psi`` separable.

    Each member completes ``psi`` to an orthonormal basis with a seeded
    random Gram-Schmidt sweep (near-dependent draws are rejected and
    redrawn) and reads the four basis vectors as the product basis of two
    qubits with psi = |0>|0>.  The state has Schmidt rank 1 in every member.
    """
    if psi.dim != 4:
        raise ValueError("the factorization family lives on a two-qubit space")
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = np.random.default_rng(seed)
    family = []
    for _ in range(count):
        cols = [psi.amplitudes]
        while len(cols) < 4:
            draw = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            for c in cols:
                draw = draw - np.vdot(c, draw) * c
            norm = np.linalg.norm(draw)
            if norm < 1e-6:
                continue
            cols.append(draw / norm)
        family.append(Tps((2, 2), UnitaryOp(np.stack(cols, axis=1))))
    return family


@dataclass(frozen=True)
class PointerReport:
    """Subsystem coherence read in the canonical versus a rival factorization."""

    time: float
    witness_seed: int
    coherence_canonical: float
    coherence_rival: float

    @property
    def gap(self) -> float:
        return abs(self.coherence_canonical - self.coherence_rival)

    def to_json_dict(self) -> dict:
        return {
            "time": self.time,
            "witness_seed": self.witness_seed,
            "coherence_canonical": self.coherence_canonical,
            "coherence_rival": self.coherence_rival,
            "gap": self.gap,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


def pointer_dependence(spec: ZurekSpec, psi0: Ket, witness_seed: int, t: float) -> PointerReport:
    """Coherence of the monitored qubit in two factorizations of the same state.

    The rival factorization composes the canonical identification map with a
    sampled commutant unitary of the model Hamiltonian; the reduced density
    operator of "the system" then differs, and so does its off-diagonal
    magnitude at time ``t``.
    """
    h, tps = build_zurek(spec)
    if psi0.dim != h.dim:
        raise ValueError(f"state dimension {psi0.dim} does not match the model dimension {h.dim}")
    _factor_qubits(psi0.amplitudes)  # enforce the product-state precondition

    witness = sample_commutant_unitary(commutant_basis(h), witness_seed)
    rival_tps = tps.compose(witness)

    psi_t = evolve(h, t, spec.hbar).apply(psi0)
    rho = HermitianOp(np.outer(psi_t.amplitudes, psi_t.amplitudes.conj()))
    off_canonical = abs(partial_trace(rho, tps, [0]).entries[0, 1])
    off_rival = abs(partial_trace(rho, rival_tps, [0]).entries[0, 1])
    return PointerReport(
        time=float(t),
        witness_seed=witness_seed,
        coherence_canonical=float(off_canonical),
        coherence_rival=float(off_rival),
    )
