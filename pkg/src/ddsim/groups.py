"""Decoupling groups, control paths and Pauli-group sampling."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .errors import ConfigError, ParameterError, ResourceError
from .pauli import DENSE_CAP, PauliString

# letter order of the nested-group rows (I, Z, X, Y)
_NESTED_LETTERS = "IZXY"
# letter order used when sampling the irreducible Pauli group
_PAULI_LETTERS = "IXYZ"


@dataclass(frozen=True)
class DDGroup:
    """Finite decoupling group as an ordered list of bare Pauli strings.

    ``elements[0]`` is always the identity.  The order is the display order
    used in the literature, and every path index refers to it.
    """

    elements: Tuple[PauliString, ...]
    name: str = ""

    def __post_init__(self):
        els = tuple(e.bare() for e in self.elements)
        object.__setattr__(self, "elements", els)
        if not els or not els[0].is_identity():
            raise ParameterError("first group element must be the identity")
        n = els[0].n_qubits
        if any(e.n_qubits != n for e in els):
            raise ParameterError("group elements act on different qubit counts")
        if len({e.key for e in els}) != len(els):
            raise ParameterError("group elements must be distinct up to phase")

    @property
    def n_qubits(self) -> int:
        return self.elements[0].n_qubits

    def __len__(self):
        return len(self.elements)

    def __getitem__(self, i) -> PauliString:
        return self.elements[i]

    @cached_property
    def _index(self) -> Dict[Tuple[int, int], int]:
        return {e.key: i for i, e in enumerate(self.elements)}

    def index_of(self, p: PauliString) -> int:
        """Index of ``p`` up to phase; KeyError if ``p`` is not an element."""
        return self._index[p.key]

    @cached_property
    def table(self) -> np.ndarray:
        """``table[i, j]`` = index of ``g_i * g_j`` (up to phase), -1 if not closed."""
        k = len(self)
        t = np.full((k, k), -1, dtype=np.int64)
        for i, a in enumerate(self.elements):
            for j, b in enumerate(self.elements):
                t[i, j] = self._index.get((a.x ^ b.x, a.z ^ b.z), -1)
        return t

    def is_closed(self) -> bool:
        return bool(np.all(self.table >= 0))

    def involutions(self) -> bool:
        # g*g is proportional to the identity for every Pauli string
        return all((e * e).bare().is_identity() for e in self.elements)


@dataclass(frozen=True)
class Path:
    """Order in which group elements label successive free-evolution slots."""

    order: Tuple[int, ...]

    def __post_init__(self):
        order = tuple(int(v) for v in self.order)
        if sorted(order) != list(range(len(order))):
            raise ParameterError(f"path {order} is not a permutation of 0..{len(order) - 1}")
        object.__setattr__(self, "order", order)

    def __len__(self):
        return len(self.order)

    def __iter__(self):
        return iter(self.order)

    def starts_with_identity(self) -> bool:
        return self.order[0] == 0

    @classmethod
    def identity(cls, size: int) -> "Path":
        return cls(tuple(range(size)))


# --------------------------------------------------------------------------
# efficient four-element groups
# --------------------------------------------------------------------------

_EFFICIENT_AXES = {
    # kind: (odd-site letter, even-site letter)
    "XY": ("X", "Y"),
    "XZ": ("X", "Z"),
    "ZY": ("Z", "Y"),
}


def _on_sites(n: int, sites, letter: str) -> PauliString:
    return PauliString.from_sites(n, {s: letter for s in sites})


def efficient_group(kind: str, n_qubits: int) -> DDGroup:
    """Four-element group refocusing nearest-neighbour couplings on an even chain."""
    kind = kind.upper()
    if n_qubits < 2 or n_qubits % 2:
        raise ParameterError(f"efficient groups need even N >= 2 (got {n_qubits})")
    odd = range(1, n_qubits + 1, 2)
    even = range(2, n_qubits + 1, 2)
    ident = PauliString.identity(n_qubits)
    if kind == "ODD":
        els = (ident, _on_sites(n_qubits, odd, "X"), _on_sites(n_qubits, odd, "Y"),
               _on_sites(n_qubits, odd, "Z"))
        return DDGroup(els, "GODD")
    if kind not in _EFFICIENT_AXES:
        raise ParameterError(f"unknown efficient group kind {kind!r}")
    a, b = _EFFICIENT_AXES[kind]
    odd_a = _on_sites(n_qubits, odd, a)
    even_b = _on_sites(n_qubits, even, b)
    return DDGroup((ident, odd_a, odd_a * even_b, even_b), "G" + kind)


# --------------------------------------------------------------------------
# nested (inefficient) group
# --------------------------------------------------------------------------

def _digits(j: int, m: int) -> List[int]:
    return [(j >> (2 * k)) & 3 for k in range(m)]


def _gray_digits(j: int, m: int) -> List[int]:
    a = _digits(j, m)
    g = list(a)
    for k in range(m - 1):
        if a[k + 1] % 2:
            g[k] = 3 - a[k]
    return g


def nested_group(m: int, n_qubits: int | None = None) -> DDGroup:
    """Product of single-site Pauli groups on the even sites 2, 4, ..., 2m.

    Element ``j`` is column ``j`` of a reflected base-4 Gray code over the
    letters (I, Z, X, Y), so consecutive elements differ on one site only.
    """
    if m < 1:
        raise ParameterError("nested group needs m >= 1")
    n = 2 * m if n_qubits is None else n_qubits
    if n not in (2 * m, 2 * m + 1):
        raise ParameterError(f"nested group with m={m} acts on 2m or 2m+1 qubits")
    if n > DENSE_CAP:
        raise ResourceError(f"nested group on {n} qubits exceeds the dense cap")
    els = []
    for j in range(4 ** m):
        g = _gray_digits(j, m)
        els.append(PauliString.from_sites(
            n, {2 * (k + 1): _NESTED_LETTERS[g[k]] for k in range(m) if g[k]}))
    return DDGroup(tuple(els), f"NESTED({m})")


def m_prime_path(m: int) -> Path:
    """Column order of the plain (non-reflected) base-4 counter over the rows."""
    if m < 1:
        raise ParameterError("m must be >= 1")
    order = []
    for j in range(4 ** m):
        a = _digits(j, m)
        # find the Gray-ordered column carrying the same letters
        src = list(a)
        for k in range(m - 2, -1, -1):
            if src[k + 1] % 2:
                src[k] = 3 - a[k]
        order.append(sum(d << (2 * k) for k, d in enumerate(src)))
    return Path(tuple(order))


def count_simultaneous_rotations(m: int, r: int) -> int:
    """Number of nested-group pulses rotating exactly ``r`` of the ``m`` even sites."""
    if not 0 <= r <= m:
        raise ParameterError(f"r must lie in 0..{m} (got {r})")
    return 3 ** r * math.comb(m, r)


# --------------------------------------------------------------------------
# Hadamard-type group for long-range couplings
# --------------------------------------------------------------------------

_G8 = ("I",
       "Z3 Z4 Y5 Y6 X7 X8",
       "Z2 Y3 X4 Z6 Y7 X8",
       "Z2 X3 Y4 Y5 X6 Z7",
       "Y2 Y4 X5 Z6 X7 Z8",
       "Y2 Z3 X4 Z5 X6 Y8",
       "X2 Y3 Z4 X5 Z7 Y8",
       "X2 X3 Z5 Y6 Y7 Z8")


def hadamard_group_8() -> DDGroup:
    return DDGroup(tuple(PauliString.parse(s, 8) for s in _G8), "G8")


# --------------------------------------------------------------------------
# irreducible Pauli group (sampled, never enumerated)
# --------------------------------------------------------------------------

def sample_pauli_group_element(n_qubits: int, rng: np.random.Generator) -> PauliString:
    """Uniform draw from the 4**N bare strings, one letter per site."""
    idx = rng.integers(0, 4, size=n_qubits)
    return PauliString.from_letters("".join(_PAULI_LETTERS[i] for i in idx))


# --------------------------------------------------------------------------
# config names
# --------------------------------------------------------------------------

def group_from_name(name: str, n_qubits: int) -> DDGroup:
    """Resolve ``GXY``, ``GXZ``, ``GZY``, ``GODD``, ``G8`` or ``NESTED(m)``."""
    key = name.strip().upper()
    if key in ("GXY", "GXZ", "GZY", "GODD"):
        return efficient_group(key[1:], n_qubits)
    if key == "G8":
        if n_qubits != 8:
            raise ConfigError("G8 acts on exactly 8 qubits", "group")
        return hadamard_group_8()
    m = re.fullmatch(r"NESTED\((\d+)\)", key)
    if m:
        return nested_group(int(m.group(1)), n_qubits)
    raise ConfigError(f"unknown group {name!r}", "group")


def parse_path(text: str) -> Path:
    """Accept ``path=[0,1,2,3]``, ``[0,1,2,3]`` or ``0,1,2,3``."""
    body = text.strip()
    if body.lower().startswith("path="):
        body = body[5:]
    body = body.strip().strip("[]()")
    try:
        return Path(tuple(int(v) for v in re.split(r"[,\s]+", body) if v))
    except ValueError as exc:
        raise ConfigError(f"bad path literal {text!r}: {exc}", "path") from None


def closure_table_bruteforce(group: Sequence[PauliString]) -> List[List[int]]:
    """Multiplication table by explicit product search (independent of ``DDGroup.table``)."""
    out = []
    for a in group:
        row = []
        for b in group:
            prod = (a * b).bare()
            row.append(next((k for k, c in enumerate(group) if c.bare() == prod), -1))
        out.append(row)
    return out
