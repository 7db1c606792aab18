"""Continuous-time quantum and classical walks on the p-adic ball hierarchy.

The state space is the set of ``p**M`` balls at depth ``M`` of the p-ary
tree; hopping amplitudes depend only on the level at which two branches
merge.  Everything is computed from the closed-form spectrum in O(M) per
evaluation, with dense matrices kept as capped test oracles.
"""

from .errors import (
    DomainError,
    OracleMismatchError,
    ResourceCapError,
    UltrawalkError,
    ValidationError,
)
from .hamiltonian import (
    EpsilonSequence,
    Explicit,
    Exponential,
    Linear,
    Logarithmic,
    Spectrum,
    build_hamiltonian,
    epsilon_sequence,
    spectrum_closed,
    spectrum_numeric,
)
from .quantum_walk import (
    ClassProfile,
    WalkParams,
    amplitude,
    probabilities,
    probability,
    time_averaged,
    time_averaged_exact,
)
from .ultrametric import TreeParams

__version__ = "0.1.0"

__all__ = [
    "ClassProfile",
    "DomainError",
    "EpsilonSequence",
    "Explicit",
    "Exponential",
    "Linear",
    "Logarithmic",
    "OracleMismatchError",
    "ResourceCapError",
    "Spectrum",
    "TreeParams",
    "UltrawalkError",
    "ValidationError",
    "WalkParams",
    "amplitude",
    "build_hamiltonian",
    "epsilon_sequence",
    "probabilities",
    "probability",
    "spectrum_closed",
    "spectrum_numeric",
    "time_averaged",
    "time_averaged_exact",
]
