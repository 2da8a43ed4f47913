"""qslab: a numerical laboratory for the non-uniqueness of preferred quantum structures.

Finite-dimensional states, Hamiltonians and labeled operator families with
unitarily invariant defining conditions; commutant witnesses that transport
any such structure into a physically distinct rival of the same kind; and
machine-checkable certificates, graphs and traces demonstrating it on
concrete models.
"""

from .hilbert import (
    HermitianOp,
    Ket,
    SpectralDecomp,
    Tps,
    UnitaryOp,
    conjugate,
    evolve,
    partial_trace,
    spectral_decompose,
    tensor_product,
)
from .kstruct import (
    KindSpec,
    KStructure,
    check_kind,
    make_basis_structure,
    make_povm_structure,
    make_tps_structure,
    occupation_structure,
    transform_structure,
)
from .relevance import (
    Certificate,
    alternative_laws,
    alternative_reality,
    certify_nonuniqueness,
    distinguishes,
    passive_time_travel,
    rival_structure,
    structure_invariant,
)

__version__ = "0.1.0"

__all__ = [
    "Certificate",
    "HermitianOp",
    "Ket",
    "KindSpec",
    "KStructure",
    "SpectralDecomp",
    "Tps",
    "UnitaryOp",
    "alternative_laws",
    "alternative_reality",
    "certify_nonuniqueness",
    "check_kind",
    "conjugate",
    "distinguishes",
    "evolve",
    "make_basis_structure",
    "make_povm_structure",
    "make_tps_structure",
    "occupation_structure",
    "partial_trace",
    "passive_time_travel",
    "rival_structure",
    "spectral_decompose",
    "structure_invariant",
    "tensor_product",
    "transform_structure",
]
