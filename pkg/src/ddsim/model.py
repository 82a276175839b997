"""Spin-chain drift Hamiltonians and the Magnus-convergence diagnostic."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence, Tuple

import numpy as np

from .errors import DomainError, ParameterError
from .pauli import PauliString, PauliSum, to_matrix


class CouplingRange(str, Enum):
    NEAREST_NEIGHBOR = "nearest_neighbor"
    CUBIC_DECAY = "cubic_decay"


class Frame(str, Enum):
    LAB = "lab"
    ROTATING = "rotating"


@dataclass(frozen=True)
class SpinChainParams:
    """Open Heisenberg chain.

    ``linear_terms`` holds the Zeeman splittings in the lab frame or the
    chemical-shift offsets in the rotating frame; either way site ``i``
    contributes ``linear_terms[i] * Z_i / 2``.
    """

    n_qubits: int
    coupling: float = 1.0
    anisotropy: float = 1.0
    linear_terms: Tuple[float, ...] = field(default_factory=tuple)
    coupling_range: CouplingRange = CouplingRange.NEAREST_NEIGHBOR
    frame: Frame = Frame.ROTATING

    def __post_init__(self):
        if self.n_qubits < 2:
            raise ParameterError(f"spin chain needs N >= 2 (got {self.n_qubits})")
        lin = tuple(float(v) for v in self.linear_terms)
        if lin and len(lin) != self.n_qubits:
            raise ParameterError(
                f"linear_terms has {len(lin)} entries for {self.n_qubits} sites")
        object.__setattr__(self, "linear_terms", lin)
        object.__setattr__(self, "coupling_range", CouplingRange(self.coupling_range))
        object.__setattr__(self, "frame", Frame(self.frame))


def build_hamiltonian(p: SpinChainParams) -> PauliSum:
    n, J, a = p.n_qubits, p.coupling, p.anisotropy
    terms = []
    for i, w in enumerate(p.linear_terms, start=1):
        if w != 0.0:
            terms.append((PauliString.from_sites(n, {i: "Z"}), w / 2.0))
    if p.coupling_range is CouplingRange.NEAREST_NEIGHBOR:
        pairs = [(i, i + 1) for i in range(1, n)]
    else:
        pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    for i, j in pairs:
        w = J / (j - i) ** 3
        for letter, scale in (("X", 1.0), ("Y", 1.0), ("Z", a)):
            terms.append((PauliString.from_sites(n, {i: letter, j: letter}), w * scale))
    return PauliSum.from_terms(n, terms)


def heisenberg_chain(n_qubits: int, coupling: float = 1.0, anisotropy: float = 1.0,
                     shifts: Sequence[float] = (), cubic: bool = False) -> PauliSum:
    """Shorthand for the rotating-frame models used throughout the experiments."""
    rng = CouplingRange.CUBIC_DECAY if cubic else CouplingRange.NEAREST_NEIGHBOR
    return build_hamiltonian(SpinChainParams(n_qubits, coupling, anisotropy,
                                             tuple(shifts), rng))


def spectral_norm(h: PauliSum) -> float:
    """Largest absolute eigenvalue of a Hermitian sum."""
    if not h.is_hermitian():
        raise DomainError("spectral_norm requires a Hermitian PauliSum")
    if not len(h):
        return 0.0
    ev = np.linalg.eigvalsh(to_matrix(h))
    return float(np.max(np.abs(ev)))


def convergence_ratio(h: PauliSum, cycle_time: float) -> float:
    """kappa * T_c; values below one satisfy the Magnus convergence guideline."""
    if cycle_time <= 0:
        raise ParameterError("cycle time must be positive")
    return spectral_norm(h) * cycle_time
