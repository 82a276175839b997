"""Exact algebra of N-qubit Pauli strings and complex-weighted sums.

A string is stored as two bitmasks (``x``, ``z``), one bit per site, plus a
phase ``i**phase``.  The bare letter on site ``q`` is I, X, Z or Y for
``(x_q, z_q) = (0,0), (1,0), (0,1), (1,1)`` and Y is the usual Hermitian
Pauli matrix.  Sites are numbered from 1 in text and from 0 internally.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, Tuple

import numpy as np

from . import _accel
from .errors import DimensionError, DomainError, ResourceError

PRUNE_TOL = 1e-12
DENSE_CAP = 12
MAX_SYMBOLIC_QUBITS = 32

_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_BITS_LETTER = {v: k for k, v in _LETTER_BITS.items()}
_PHASE_TEXT = {0: "", 1: "i ", 2: "-", 3: "-i "}


def _phase_exponent(xa, za, xb, zb):
    ya, yb = xa & za, xb & zb
    pax, paz = xa & ~za, za & ~xa
    pbx, pbz = xb & ~zb, zb & ~xb
    pos = (pax & yb) | (ya & pbz) | (paz & pbx)
    neg = (ya & pbx) | (paz & yb) | (pax & pbz)
    return (pos.bit_count() - neg.bit_count()) % 4


@dataclass(frozen=True)
class PauliString:
    """``i**phase`` times a tensor product of single-site Pauli letters."""

    n_qubits: int
    x: int = 0
    z: int = 0
    phase: int = 0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise DimensionError("n_qubits must be positive")
        full = (1 << self.n_qubits) - 1
        if (self.x | self.z) & ~full:
            raise DimensionError("mask has bits beyond n_qubits")
        object.__setattr__(self, "phase", self.phase % 4)

    # -- construction ------------------------------------------------------

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(n_qubits)

    @classmethod
    def from_letters(cls, letters: str, phase: int = 0) -> "PauliString":
        """``"XIZY"`` style: one letter per site, site 1 first."""
        x = z = 0
        for q, ch in enumerate(letters):
            bx, bz = _LETTER_BITS[ch]
            x |= bx << q
            z |= bz << q
        return cls(len(letters), x, z, phase)

    @classmethod
    def from_sites(cls, n_qubits: int, sites: Mapping[int, str],
                   phase: int = 0) -> "PauliString":
        """Build from ``{site: letter}`` with 1-based sites."""
        x = z = 0
        for site, ch in sites.items():
            if not 1 <= site <= n_qubits:
                raise DimensionError(f"site {site} outside 1..{n_qubits}")
            bx, bz = _LETTER_BITS[ch]
            x |= bx << (site - 1)
            z |= bz << (site - 1)
        return cls(n_qubits, x, z, phase)

    @classmethod
    def parse(cls, text: str, n_qubits: int | None = None) -> "PauliString":
        """Parse ``"X1 Y2"``, ``"-i Z3"``, ``"XIZ"`` or ``"I"``."""
        text = text.strip()
        m = re.match(r"^([+-]?)\s*(i?)\s*", text)
        phase = (2 if m.group(1) == "-" else 0) + (1 if m.group(2) else 0)
        text = text[m.end():]
        tokens = re.findall(r"([IXYZ])(\d+)", text)
        if tokens:
            sites = {int(s): ch for ch, s in tokens if ch != "I"}
            n = n_qubits if n_qubits is not None else max(int(s) for _, s in tokens)
            return cls.from_sites(n, sites, phase)
        if text and set(text) <= set("IXYZ"):
            if n_qubits is not None and text == "I":
                return cls(n_qubits, 0, 0, phase)
            return cls.from_letters(text, phase)
        raise ValueError(f"cannot parse Pauli string {text!r}")

    # -- views ------------------------------------------------------------

    @property
    def letters(self) -> str:
        return "".join(
            _BITS_LETTER[((self.x >> q) & 1, (self.z >> q) & 1)]
            for q in range(self.n_qubits))

    @property
    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    @property
    def support(self) -> Tuple[int, ...]:
        """1-based sites carrying a non-identity letter."""
        s = self.x | self.z
        return tuple(q + 1 for q in range(self.n_qubits) if (s >> q) & 1)

    @property
    def key(self) -> Tuple[int, int]:
        return (self.x, self.z)

    def bare(self) -> "PauliString":
        return PauliString(self.n_qubits, self.x, self.z, 0)

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def dense_masks(self) -> Tuple[int, int]:
        n = self.n_qubits
        return _accel.reverse_bits(self.x, n), _accel.reverse_bits(self.z, n)

    # -- algebra ----------------------------------------------------------

    def _check(self, other: "PauliString"):
        if self.n_qubits != other.n_qubits:
            raise DimensionError(
                f"size mismatch: {self.n_qubits} vs {other.n_qubits} qubits")

    def __mul__(self, other):
        if isinstance(other, PauliString):
            return multiply(self, other)
        return NotImplemented

    def dag(self) -> "PauliString":
        # bare letters are Hermitian, so only the phase conjugates
        return PauliString(self.n_qubits, self.x, self.z, -self.phase)

    def commutes_with(self, other: "PauliString") -> bool:
        self._check(other)
        sym = (self.x & other.z).bit_count() + (self.z & other.x).bit_count()
        return sym % 2 == 0

    def to_matrix(self) -> np.ndarray:
        return PauliSum.from_string(self).to_matrix()

    def __str__(self):
        body = " ".join(f"{ch}{q + 1}" for q, ch in enumerate(self.letters)
                        if ch != "I") or "I"
        return _PHASE_TEXT[self.phase] + body


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Exact product ``a*b`` with the accumulated phase."""
    a._check(b)
    e = _phase_exponent(a.x, a.z, b.x, b.z)
    return PauliString(a.n_qubits, a.x ^ b.x, a.z ^ b.z, a.phase + b.phase + e)


class PauliSum:
    """Immutable sum of bare Pauli strings with complex coefficients.

    Terms with ``|coef| <= PRUNE_TOL`` are dropped on construction.
    """

    __slots__ = ("n_qubits", "_x", "_z", "_c", "_hash")

    def __init__(self, n_qubits: int, x=(), z=(), coefs=(), *, prune=PRUNE_TOL,
                 _canonical=False):
        if n_qubits < 1:
            raise DimensionError("n_qubits must be positive")
        if n_qubits > MAX_SYMBOLIC_QUBITS:
            raise ResourceError(f"symbolic sums limited to {MAX_SYMBOLIC_QUBITS} qubits")
        self.n_qubits = n_qubits
        x = np.asarray(x, dtype=np.uint64).ravel()
        z = np.asarray(z, dtype=np.uint64).ravel()
        c = np.asarray(coefs, dtype=np.complex128).ravel()
        if not (x.shape == z.shape == c.shape):
            raise ValueError("x, z and coefs must have equal length")
        if not _canonical and x.size:
            key = (x << np.uint64(32)) | z
            uniq, inv = np.unique(key, return_inverse=True)
            acc = np.zeros(uniq.size, dtype=np.complex128)
            np.add.at(acc, inv, c)
            x = uniq >> np.uint64(32)
            z = uniq & np.uint64(0xFFFFFFFF)
            c = acc
        if x.size:
            keep = np.abs(c) > prune
            x, z, c = x[keep], z[keep], c[keep]
        self._x, self._z, self._c = x, z, c
        for arr in (self._x, self._z, self._c):
            arr.setflags(write=False)
        self._hash = None

    # -- construction ------------------------------------------------------

    @classmethod
    def zero(cls, n_qubits: int) -> "PauliSum":
        return cls(n_qubits)

    @classmethod
    def from_string(cls, p: PauliString, coef: complex = 1.0) -> "PauliSum":
        return cls(p.n_qubits, [p.x], [p.z], [coef * 1j ** p.phase])

    @classmethod
    def from_terms(cls, n_qubits: int,
                   terms: Iterable[Tuple[PauliString | str, complex]]) -> "PauliSum":
        xs, zs, cs = [], [], []
        for p, c in terms:
            if isinstance(p, str):
                p = PauliString.parse(p, n_qubits)
            if p.n_qubits != n_qubits:
                raise DimensionError("term size mismatch")
            xs.append(p.x)
            zs.append(p.z)
            cs.append(c * 1j ** p.phase)
        return cls(n_qubits, xs, zs, cs)

    # -- views ------------------------------------------------------------

    @property
    def x(self):
        return self._x

    @property
    def z(self):
        return self._z

    @property
    def coefs(self):
        return self._c

    @property
    def terms(self) -> Dict[PauliString, complex]:
        return {PauliString(self.n_qubits, int(a), int(b)): complex(c)
                for a, b, c in zip(self._x, self._z, self._c)}

    def __len__(self):
        return int(self._c.size)

    def coef(self, p: PauliString | str) -> complex:
        if isinstance(p, str):
            p = PauliString.parse(p, self.n_qubits)
        hit = (self._x == np.uint64(p.x)) & (self._z == np.uint64(p.z))
        if not hit.any():
            return 0j
        return complex(self._c[hit][0]) * (1j ** p.phase).conjugate()

    def is_hermitian(self, tol: float = PRUNE_TOL) -> bool:
        return bool(np.all(np.abs(self._c.imag) <= tol))

    def norm1(self) -> float:
        return float(np.abs(self._c).sum())

    def max_abs(self) -> float:
        return float(np.abs(self._c).max()) if self._c.size else 0.0

    # -- arithmetic -------------------------------------------------------

    def _check(self, other: "PauliSum"):
        if self.n_qubits != other.n_qubits:
            raise DimensionError(
                f"size mismatch: {self.n_qubits} vs {other.n_qubits} qubits")

    def __add__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        self._check(other)
        return PauliSum(self.n_qubits, np.concatenate([self._x, other._x]),
                        np.concatenate([self._z, other._z]),
                        np.concatenate([self._c, other._c]))

    def __neg__(self):
        return PauliSum(self.n_qubits, self._x, self._z, -self._c, _canonical=True)

    def __sub__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, PauliSum):
            return self.product(other)
        if isinstance(other, (int, float, complex, np.number)):
            return PauliSum(self.n_qubits, self._x, self._z, self._c * other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        return self * (1.0 / other)

    def product(self, other: "PauliSum") -> "PauliSum":
        self._check(other)
        if not len(self) or not len(other):
            return PauliSum(self.n_qubits)
        x, z, c = _accel.mul_terms(self._x, self._z, self._c,
                                   other._x, other._z, other._c)
        return PauliSum(self.n_qubits, x, z, c)

    def dag(self) -> "PauliSum":
        return PauliSum(self.n_qubits, self._x, self._z, np.conj(self._c),
                        _canonical=True)

    def __eq__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.n_qubits == other.n_qubits and equals_zero(self - other, 0.0)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n_qubits, self._x.tobytes(), self._z.tobytes(),
                               self._c.tobytes()))
        return self._hash

    def identity_key(self):
        """Hashable key suitable for caching expensive derived objects."""
        return (self.n_qubits, self._x.tobytes(), self._z.tobytes(), self._c.tobytes())

    def to_matrix(self) -> np.ndarray:
        return to_matrix(self)

    def __repr__(self):
        return f"PauliSum(n_qubits={self.n_qubits}, terms={len(self)})"

    def __str__(self):
        return format_sum(self)


def commutator(a: PauliSum, b: PauliSum) -> PauliSum:
    """``[a, b] = ab - ba``; only anticommuting term pairs survive (as 2ab)."""
    a._check(b)
    if not len(a) or not len(b):
        return PauliSum(a.n_qubits)
    xa, za = a.x[:, None], a.z[:, None]
    xb, zb = b.x[None, :], b.z[None, :]
    sym = (_accel._np_popcount(xa & zb) + _accel._np_popcount(za & xb)) & 1
    ia, ib = np.nonzero(sym)
    if ia.size == 0:
        return PauliSum(a.n_qubits)
    # group by row of ``a`` so the kernel sees contiguous blocks
    x, z, c = [], [], []
    for i in np.unique(ia):
        js = ib[ia == i]
        px, pz, pc = _accel.mul_terms(a.x[i:i + 1], a.z[i:i + 1], a.coefs[i:i + 1],
                                      b.x[js], b.z[js], b.coefs[js])
        x.append(px)
        z.append(pz)
        c.append(2.0 * pc)
    return PauliSum(a.n_qubits, np.concatenate(x), np.concatenate(z), np.concatenate(c))


def conjugate(h: PauliSum, g: PauliString) -> PauliSum:
    """``g^dagger h g``: each coefficient flips sign iff its string anticommutes with g."""
    if h.n_qubits != g.n_qubits:
        raise DimensionError(f"size mismatch: {h.n_qubits} vs {g.n_qubits} qubits")
    if not len(h):
        return h
    sym = (_accel._np_popcount(h.x & np.uint64(g.z))
           + _accel._np_popcount(h.z & np.uint64(g.x))) & 1
    return PauliSum(h.n_qubits, h.x, h.z, h.coefs * (1 - 2 * sym), _canonical=True)


def to_matrix(h: PauliSum, cap: int = DENSE_CAP) -> np.ndarray:
    """Dense ``2**N x 2**N`` matrix, site 1 as the leftmost Kronecker factor."""
    n = h.n_qubits
    if n > cap:
        raise ResourceError(f"dense matrices capped at {cap} qubits (got {n})")
    if not len(h):
        return np.zeros((1 << n, 1 << n), dtype=np.complex128)
    xr = np.array([_accel.reverse_bits(int(v), n) for v in h.x], dtype=np.uint64)
    zr = np.array([_accel.reverse_bits(int(v), n) for v in h.z], dtype=np.uint64)
    return _accel.pauli_dense(xr, zr, h.coefs, n)


def equals_zero(h: PauliSum, tol: float = PRUNE_TOL) -> bool:
    if tol < 0:
        raise DomainError("tol must be non-negative")
    return bool(np.all(np.abs(h.coefs) <= tol)) if len(h) else True


# --------------------------------------------------------------------------
# text format: "+2.0·J²αΔt · Y1 X2 Z3"
# --------------------------------------------------------------------------

def _signed(v: float) -> str:
    return ("-" if v < 0 else "+") + repr(abs(float(v)))


def _fmt_number(c: complex) -> str:
    if c.imag == 0.0:
        return _signed(c.real)
    if c.real == 0.0:
        return _signed(c.imag) + "i"
    return f"+({c.real!r}{_signed(c.imag)}i)"


def format_term(p: PauliString, coef: complex, unit: str = "") -> str:
    head = _fmt_number(coef) + (f"·{unit}" if unit else "")
    body = " ".join(f"{ch}{q + 1}" for q, ch in enumerate(p.letters) if ch != "I") or "I"
    return f"{head} · {body}"


def format_sum(h: PauliSum, unit: str = "") -> str:
    """One term per line, sorted by support then letters."""
    if not len(h):
        return "0"
    items = sorted(h.terms.items(), key=lambda kv: (kv[0].support, kv[0].letters))
    return "\n".join(format_term(p, c, unit) for p, c in items)


def _parse_number(s: str) -> complex:
    s = s.strip()
    if s.startswith("+(") or s.startswith("-("):
        sign = -1 if s[0] == "-" else 1
        return sign * complex(s[2:-1].replace("i", "j"))
    if s.endswith("i"):
        return complex(0, float(s[:-1]))
    return complex(float(s))


def parse_sum(text: str, n_qubits: int) -> Tuple[PauliSum, str]:
    """Inverse of :func:`format_sum`; returns the sum and the (common) unit."""
    text = text.strip()
    if text == "0" or not text:
        return PauliSum(n_qubits), ""
    terms, unit = [], ""
    for line in text.splitlines():
        if not line.strip():
            continue
        head, _, body = line.partition(" · ")
        num, _, u = head.partition("·")
        unit = u or unit
        terms.append((PauliString.parse(body, n_qubits), _parse_number(num)))
    return PauliSum.from_terms(n_qubits, terms), unit
