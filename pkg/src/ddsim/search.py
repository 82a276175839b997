"""Greedy cycle-by-cycle path search (the ALGOR sequence).

At every cycle boundary all ``|G|!`` orderings of the group are tried as the
next cycle; the one maximizing the entanglement fidelity at the following
boundary is committed.  Ties within ``TIE_TOL`` keep the lexicographically
first ordering.
"""

from __future__ import annotations

import csv
import io
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .engine import PropagatorCache
from .errors import ParameterError, ResourceError
from .groups import DDGroup
from .pauli import PauliSum
from .schedule import format_labels

log = logging.getLogger(__name__)

TIE_TOL = 1e-12
DEFAULT_CAP = 24
HARD_CAP = 5040


@dataclass(frozen=True)
class SearchConfig:
    group: DDGroup
    h0: PauliSum
    dt: float
    n_cycles: int
    candidate_cap: int = DEFAULT_CAP

    def __post_init__(self):
        if self.n_cycles < 1:
            raise ParameterError("search horizon must be at least one cycle")
        if self.dt <= 0:
            raise ParameterError("dt must be positive")


@dataclass
class StepRecord:
    cycle: int
    path: Tuple[int, ...]
    fitness: float
    runner_up: float
    n_ties: int


@dataclass
class SearchResult:
    labels: List[int]
    log: List[StepRecord] = field(default_factory=list)

    @property
    def dash(self) -> str:
        return format_labels(self.labels)

    def fitness_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["cycle", "path", "fitness", "runner_up", "ties"])
        for r in self.log:
            w.writerow([r.cycle, "".join(map(str, r.path)) if max(r.path) < 10
                        else ",".join(map(str, r.path)),
                        repr(r.fitness), repr(r.runner_up), r.n_ties])
        return buf.getvalue()


def candidate_paths(size: int, cap: int = DEFAULT_CAP) -> List[Tuple[int, ...]]:
    n = math.factorial(size)
    if n > HARD_CAP:
        raise ResourceError(f"|G|! = {n} candidate paths exceed the hard cap {HARD_CAP}")
    if n > cap:
        log.warning("evaluating %d candidate paths per step (above %d)", n, cap)
    return list(itertools.permutations(range(1, size + 1)))


def block_unitaries(group: DDGroup, h0: PauliSum, dt: float, paths,
                    cache: PropagatorCache | None = None) -> List[np.ndarray]:
    cache = cache or PropagatorCache(h0)
    out = []
    for path in paths:
        acc = None
        for lab in path:
            step = cache.step(group[lab - 1], dt)
            acc = step if acc is None else step @ acc
        out.append(acc)
    return out


def _fidelity_after(block: np.ndarray, u: np.ndarray) -> float:
    d = u.shape[0]
    # Tr(B U) without forming the product
    tr = np.einsum("ij,ji->", block, u)
    return float(abs(tr / d) ** 2)


def greedy_search(cfg: SearchConfig) -> SearchResult:
    size = len(cfg.group)
    paths = candidate_paths(size, cfg.candidate_cap)
    blocks = block_unitaries(cfg.group, cfg.h0, cfg.dt, paths)
    d = 1 << cfg.h0.n_qubits
    u = np.eye(d, dtype=np.complex128)
    labels: List[int] = []
    records = []
    for n in range(cfg.n_cycles):
        fits = np.array([_fidelity_after(b, u) for b in blocks])
        best = int(np.argmax(fits))
        top = fits[best]
        ties = np.flatnonzero(fits >= top - TIE_TOL)
        best = int(ties[0])  # permutations() yields lexicographic order
        others = np.delete(fits, best)
        records.append(StepRecord(n, paths[best], float(fits[best]),
                                  float(others.max()) if len(others) else float("nan"),
                                  len(ties)))
        labels.extend(paths[best])
        u = blocks[best] @ u
    return SearchResult(labels, records)


def replay_fidelities(group: DDGroup, h0: PauliSum, dt: float, labels,
                      cycle: int | None = None) -> np.ndarray:
    """Fidelity at every cycle boundary of a fixed label stream."""
    cycle = cycle or len(group)
    cache = PropagatorCache(h0)
    d = cache.dim
    u = np.eye(d, dtype=np.complex128)
    out = []
    for k, lab in enumerate(labels):
        u = cache.step(group[lab - 1], dt) @ u
        if (k + 1) % cycle == 0:
            out.append(abs(np.trace(u) / d) ** 2)
    return np.array(out)
