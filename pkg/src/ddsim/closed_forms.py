"""Closed forms of the first- and second-order average Hamiltonians.

Everything here is built from site-indexed Pauli words with 1-based sites on
an open chain of even length ``N``.  ``dt`` is the slot length and ``J`` the
coupling; ``delta`` holds the rotating-frame offsets.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Sequence, Tuple

from .errors import ParameterError
from .groups import Path
from .pauli import PauliString, PauliSum

# group indices in (1, X-odd, X-odd Y-even, Y-even) display order
PATH1 = Path((0, 2, 1, 3))
PATH2 = Path((0, 1, 2, 3))


@dataclass(frozen=True)
class FormParams:
    n_qubits: int
    coupling: float = 1.0
    anisotropy: float = 1.0
    dt: float = 1.0
    delta: Tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.n_qubits < 4 or self.n_qubits % 2:
            raise ParameterError("closed forms assume an even chain with N >= 4")
        d = tuple(float(v) for v in self.delta) or (0.0,) * self.n_qubits
        if len(d) != self.n_qubits:
            raise ParameterError("delta needs one entry per site")
        object.__setattr__(self, "delta", d)

    def d(self, i: int) -> float:
        """Offset of 1-based site ``i`` (zero outside the chain)."""
        return self.delta[i - 1] if 1 <= i <= self.n_qubits else 0.0


class _Builder:
    def __init__(self, n: int):
        self.n = n
        self.terms = []

    def add(self, coef: float, *site_letters: Tuple[int, str]):
        if coef == 0.0:
            return
        sites = {}
        for s, letter in site_letters:
            if not 1 <= s <= self.n:
                return
            sites[s] = letter
        self.terms.append((PauliString.from_sites(self.n, sites), coef))

    def word(self, coef: float, start: int, letters: str):
        self.add(coef, *[(start + k, ch) for k, ch in enumerate(letters) if ch != "I"])

    def build(self) -> PauliSum:
        return PauliSum.from_terms(self.n, self.terms)


def _three_body(n: int, a: str, b: str) -> PauliSum:
    """sum_{i=1}^{N-2} (a_i m_{i+1} b_{i+2} + b_i m_{i+1} a_{i+2}) with ``a``="YXZ"-style words."""
    bl = _Builder(n)
    for i in range(1, n - 1):
        bl.word(1.0, i, a)
        bl.word(1.0, i, b)
    return bl.build()


def h1_ax(p: FormParams, sign: int = 1) -> PauliSum:
    c = sign * p.coupling ** 2 * p.anisotropy * p.dt
    return _three_body(p.n_qubits, "YXZ", "ZXY") * c


def h1_ay(p: FormParams, sign: int = 1) -> PauliSum:
    c = sign * p.coupling ** 2 * p.anisotropy * p.dt
    return _three_body(p.n_qubits, "XYZ", "ZYX") * c


def h1_az(p: FormParams, sign: int = 1) -> PauliSum:
    c = sign * p.coupling ** 2 * p.dt
    return _three_body(p.n_qubits, "XZY", "YZX") * c


def first_order_family(p: FormParams) -> Dict[str, PauliSum]:
    """The six first-order results a four-slot cycle can produce."""
    out = {}
    for name, fn in (("Ax", h1_ax), ("Ay", h1_ay), ("Az", h1_az)):
        out["+" + name] = fn(p, +1)
        out["-" + name] = fn(p, -1)
    return out


def h1_zeeman_path2(p: FormParams, sign: int = 1) -> PauliSum:
    """First-order term of Path 2 with chemical shifts (upper sign for ``sign=+1``)."""
    n, J, dt = p.n_qubits, p.coupling, p.dt
    bl = _Builder(n)
    for i in range(1, n):
        w = -sign * J * dt * (p.d(i) + p.d(i + 1)) / 2.0
        bl.word(w, i, "YX" if i % 2 else "XY")
    return bl.build() + h1_az(p, sign)


# --------------------------------------------------------------------------
# second-order building blocks
# --------------------------------------------------------------------------

def amplitude(p: FormParams) -> float:
    """A = J^2 dt^2 alpha."""
    return p.coupling ** 2 * p.dt ** 2 * p.anisotropy


def d_z(p: FormParams) -> PauliSum:
    bl = _Builder(p.n_qubits)
    for i in range(1, p.n_qubits - 1):
        bl.word(2 / 3, i, "XIX")
        bl.word(2 / 3, i, "YIY")
        bl.word(-4 / 3, i, "ZIZ")
    return bl.build()


def d_x(p: FormParams) -> PauliSum:
    bl = _Builder(p.n_qubits)
    for i in range(1, p.n_qubits - 1):
        bl.word(2 / 3, i, "YIY")
        bl.word(2 / 3, i, "ZIZ")
        bl.word(-4 / 3, i, "XIX")
    return bl.build()


def _q(p: FormParams, pattern: Sequence[Tuple[str, str, float]]) -> PauliSum:
    bl = _Builder(p.n_qubits)
    for i in range(1, p.n_qubits - 2):
        for outer, inner, c in pattern:
            bl.add(c / 3, (i, outer), (i + 2, outer), (i + 1, inner), (i + 3, inner))
    return bl.build()


def q_z(p: FormParams) -> PauliSum:
    return _q(p, [("X", "Y", 2.0), ("X", "Z", -1.0), ("Y", "X", 2.0), ("Y", "Z", -1.0),
                  ("Z", "X", -1.0), ("Z", "Y", -1.0)])


def q_x(p: FormParams) -> PauliSum:
    return _q(p, [("Y", "Z", 2.0), ("Y", "X", -1.0), ("Z", "Y", 2.0), ("Z", "X", -1.0),
                  ("X", "Y", -1.0), ("X", "Z", -1.0)])


def l_a(p: FormParams) -> PauliSum:
    bl = _Builder(p.n_qubits)
    for i in range(1, p.n_qubits - 1):
        d0, d1, d2 = p.d(i), p.d(i + 1), p.d(i + 2)
        if i % 2:
            bl.word(d0 - d1, i, "YYZ")
            bl.word(-(d1 - d2), i, "ZYY")
        else:
            bl.word(d0 - d1, i, "XXZ")
            bl.word(-(d1 - d2), i, "ZXX")
    return bl.build()


def l_b(p: FormParams) -> PauliSum:
    bl = _Builder(p.n_qubits)
    for i in range(1, p.n_qubits - 1):
        d0, d1, d2 = p.d(i), p.d(i + 1), p.d(i + 2)
        if i % 2:
            bl.word(-(2 * d0 + d1), i, "YYZ")
            bl.word(-(d1 + 2 * d2), i, "ZYY")
        else:
            bl.word(d0 + 2 * d1, i, "XXZ")
            bl.word(2 * d1 + d2, i, "ZXX")
    return bl.build()


def _edge_yy(p: FormParams) -> PauliSum:
    """Y1Y2 + Y_{N-1}Y_N + 2 sum_{i=2}^{N-2} Y_i Y_{i+1}."""
    n = p.n_qubits
    bl = _Builder(n)
    bl.word(1.0, 1, "YY")
    bl.word(1.0, n - 1, "YY")
    for i in range(2, n - 1):
        bl.word(2.0, i, "YY")
    return bl.build()


def _four_body(p: FormParams, word: str) -> PauliSum:
    bl = _Builder(p.n_qubits)
    for i in range(1, p.n_qubits - 2):
        bl.word(1.0, i, word)
    return bl.build()


# --------------------------------------------------------------------------
# second-order results without offsets
# --------------------------------------------------------------------------

def uniform_sdd(p: FormParams) -> PauliSum:
    """SDD on Path 1 with all offsets zero."""
    a = p.anisotropy
    body = d_z(p) - _edge_yy(p) * a + q_z(p) + _four_body(p, "ZXXZ") * (2 * a)
    return body * (-2 * p.coupling ** 3 * p.dt ** 2 * a)


def uniform_pcdd2(p: FormParams) -> PauliSum:
    return (d_z(p) + q_z(p)) * (-2 * p.coupling ** 3 * p.dt ** 2 * p.anisotropy)


def uniform_pscpd2(p: FormParams) -> PauliSum:
    return (d_x(p) + q_x(p)) * (p.coupling ** 3 * p.dt ** 2 * p.anisotropy)


def _path2_sdd(p: FormParams) -> PauliSum:
    n, J, dt, a = p.n_qubits, p.coupling, p.dt, p.anisotropy
    A = amplitude(p)
    bl = _Builder(n)
    # one-body line; the odd-site sum starts at 3 since site 1 is written apart,
    # and the closing edge term only exists for odd N
    bl.word(J ** 2 * dt ** 2 * (p.d(1) + p.d(2)), 1, "Z")
    for i in range(3, n + 1, 2):
        bl.word(J ** 2 * dt ** 2 * (p.d(i - 1) + 2 * p.d(i) + p.d(i + 1)), i, "Z")
    if n % 2:
        bl.word(J ** 2 * dt ** 2 * (p.d(n - 1) + p.d(n)), n, "Z")
    # shift-weighted YY line
    for i in range(1, n):
        w = (p.d(i) + p.d(i + 1)) * (p.d(i + 1) if i % 2 else p.d(i))
        bl.word(J / 2 * dt ** 2 * w, i, "YY")
    one = bl.build()
    bl = _Builder(n)
    for i in range(2, n - 1, 2):
        bl.word(-2 * (p.d(i) + p.d(i + 1) + p.d(i + 2)), i, "XZX")
        bl.word(p.d(i) + p.d(i + 2), i, "YZY")
    three = l_b(p) + bl.build() * (3 / a)
    rest = (d_x(p) + q_x(p) - _edge_yy(p) * (1 / a) + _four_body(p, "XZZX") * (2 / a))
    return one - three * (A / 3) - rest * (2 * J * A)


def path_forms(path: str, protocol: str, p: FormParams) -> PauliSum:
    """Second-order closed form for ``path`` in {path1, path2} and SDD/PCDD2/PSCPD2."""
    path, protocol = path.lower(), protocol.upper()
    J, A = p.coupling, amplitude(p)
    a = p.anisotropy
    if path == "path1":
        if protocol == "SDD":
            body = (d_z(p) + q_z(p) - _edge_yy(p) * a + _four_body(p, "ZXXZ") * (2 * a))
            return l_a(p) * (-A / 3) - body * (2 * J * A)
        if protocol == "PCDD2":
            return l_a(p) * (-A / 3) - (d_z(p) + q_z(p)) * (2 * J * A)
        if protocol == "PSCPD2":
            return l_b(p) * (A / 6) + (d_x(p) + q_x(p)) * (J * A)
    elif path == "path2":
        if protocol == "SDD":
            return _path2_sdd(p)
        if protocol == "PCDD2":
            return l_b(p) * (-A / 3) - (d_x(p) + q_x(p)) * (2 * J * A)
        if protocol == "PSCPD2":
            return l_a(p) * (A / 6) + (d_z(p) + q_z(p)) * (J * A)
    raise ParameterError(f"no closed form for {path}/{protocol}")


def finite_width_h0bar(n_qubits: int, tau: float, dt: float, beta: float = 3.141592653589793,
                       coupling: float = 1.0) -> PauliSum:
    """-sum_i (Y_i X_{i+1} + X_i Z_{i+1}) J tau (1 - cos beta) / (2 beta dt)."""
    import math
    c = -coupling * tau * (1 - math.cos(beta)) / (2 * beta * dt)
    bl = _Builder(n_qubits)
    for i in range(1, n_qubits):
        bl.word(c, i, "YX")
        bl.word(c, i, "XZ")
    return bl.build()
