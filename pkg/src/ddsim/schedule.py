"""Compile decoupling protocols into per-slot frames and physical pulses.

Two equivalent views of a schedule are kept side by side:

* toggling view: slot ``k`` (duration ``dt``) evolves under ``f_k^† H0 f_k``
  where the frame ``f_k = g_{label_k} * border_k``;
* physical view: pulse ``P_k = f_k f_{k-1}^†`` is applied at ``t_k = k dt``,
  with ``f_{-1} = 1`` and ``f_n`` the frame following the last slot.

Labels are 1-based positions along ``path`` (label ``l`` means group element
``path.order[l-1]``), matching the ``(1234-2143)`` notation.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError, ParameterError
from .groups import DDGroup, Path, sample_pauli_group_element
from .pauli import PauliString


class Kind(str, Enum):
    FREE = "FREE"
    PDD = "PDD"
    SDD = "SDD"
    CDD = "CDD"
    PCDD = "PCDD"
    SCPD = "SCPD"
    PSCPD = "PSCPD"
    H2 = "H2"
    PH2 = "PH2"
    NRD = "NRD"
    EMD1 = "EMD1"
    EMD2 = "EMD2"
    RPD = "RPD"
    SRPD = "SRPD"
    PSEUDO_RPD = "PSEUDO_RPD"
    ESDD = "ESDD"
    EPCDD = "EPCDD"
    EPSCPD = "EPSCPD"
    RH2 = "RH2"
    EH2 = "EH2"
    ALGOR_REPLAY = "ALGOR_REPLAY"


DETERMINISTIC = {Kind.FREE, Kind.PDD, Kind.SDD, Kind.CDD, Kind.PCDD, Kind.SCPD,
                 Kind.PSCPD, Kind.H2, Kind.PH2, Kind.ALGOR_REPLAY}
_LEVELED = {Kind.PCDD, Kind.PSCPD, Kind.EPCDD, Kind.EPSCPD}
_EMBEDDED = {Kind.EMD1, Kind.EMD2, Kind.ESDD, Kind.EPCDD, Kind.EPSCPD, Kind.EH2}


class BorderSource(str, Enum):
    SAME_GROUP = "same_group"
    PAULI_GROUP = "pauli_group"


@dataclass(frozen=True)
class ProtocolSpec:
    kind: Kind
    level: int = 0
    path: Optional[Path] = None
    seed: int = 0
    border_source: Optional[BorderSource] = None
    border_at_start: bool = True
    stream: Tuple[int, ...] = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.kind in _LEVELED and self.level < 1:
            raise ParameterError(f"{self.kind.value} needs level >= 1")
        if self.border_source is not None:
            object.__setattr__(self, "border_source", BorderSource(self.border_source))
        if self.kind is Kind.ALGOR_REPLAY and not self.stream:
            raise ConfigError("ALGOR_REPLAY needs a stored label stream", "stream")
        object.__setattr__(self, "stream", tuple(int(v) for v in self.stream))

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        if self.kind in _LEVELED:
            return f"{self.kind.value}{self.level}"
        return self.kind.value

    @property
    def randomized(self) -> bool:
        return self.kind not in DETERMINISTIC

    def borders_from(self) -> BorderSource:
        if self.border_source is not None:
            return self.border_source
        return BorderSource.SAME_GROUP if self.kind is Kind.EMD1 else BorderSource.PAULI_GROUP


_SPEC_RE = re.compile(r"^\s*([A-Za-z_0-9]+?)(?:\((\d+)\)|(\d+))?\s*$")


def parse_protocol(text: str, **kw) -> ProtocolSpec:
    """``"PCDD(2)"``, ``"EPSCPD2"``, ``"pseudo_rpd"``, ``"EMD1"`` ..."""
    t = text.strip().upper().replace("-", "_")
    if t in Kind.__members__:
        return ProtocolSpec(Kind(t), **kw)
    m = _SPEC_RE.match(t)
    if m and m.group(1) in Kind.__members__:
        level = int(m.group(2) or m.group(3))
        return ProtocolSpec(Kind(m.group(1)), level=level, **kw)
    raise ConfigError(f"unknown protocol {text!r}", "protocol")


@dataclass(frozen=True)
class Pulse:
    op: PauliString
    is_identity: bool


@dataclass
class Schedule:
    group: DDGroup
    path: Path
    dt: float
    labels: Tuple[int, ...]
    borders: Optional[Tuple[PauliString, ...]] = None
    final_label: int = 1
    final_border: Optional[PauliString] = None
    protocol: str = ""
    _frames: Optional[List[PauliString]] = field(default=None, repr=False)

    @property
    def n_slots(self) -> int:
        return len(self.labels)

    @property
    def cycle_time(self) -> float:
        return len(self.group) * self.dt

    def element(self, label: int) -> PauliString:
        return self.group[self.path.order[label - 1]]

    def _frame(self, label, border):
        g = self.element(label)
        return g if border is None else (g * border).bare()

    @property
    def frames(self) -> List[PauliString]:
        """Frames for slots 0..n-1 followed by the frame after the last boundary."""
        if self._frames is None:
            bs = self.borders or (None,) * self.n_slots
            fr = [self._frame(lab, b) for lab, b in zip(self.labels, bs)]
            fr.append(self._frame(self.final_label, self.final_border))
            self._frames = fr
        return self._frames

    @property
    def pulses(self) -> List[Pulse]:
        """Pulse at each boundary t_0..t_n."""
        fr = self.frames
        prev = PauliString.identity(self.group.n_qubits)
        out = []
        for f in fr:
            p = (f * prev.dag()).bare()
            out.append(Pulse(p, p.is_identity()))
            prev = f
        return out

    def toggling_labels(self) -> str:
        return format_labels(self.labels)


def frame_correction(schedule: Schedule, n: int) -> PauliString:
    """Pulse undoing the control propagator accumulated up to ``t_n``."""
    if not 0 <= n <= schedule.n_slots:
        raise ParameterError(f"slot {n} outside 0..{schedule.n_slots}")
    # at t_n the pulse P_n has been applied, leaving the frame of slot n
    return schedule.frames[n].dag().bare()


# --------------------------------------------------------------------------
# label generators
# --------------------------------------------------------------------------

def pdd_labels(size: int) -> List[int]:
    return list(range(1, size + 1))


def sdd_labels(size: int) -> List[int]:
    if size < 2:
        raise ParameterError("SDD needs |G| >= 2")
    fwd = list(range(1, size + 1))
    return fwd + fwd[::-1]


def label_table(group: DDGroup, path: Path) -> np.ndarray:
    """``t[a, b]`` = label of element(a) * element(b), labels 1-based (row/col 0 unused)."""
    pos = {e: i + 1 for i, e in enumerate(path.order)}
    k = len(group)
    t = np.zeros((k + 1, k + 1), dtype=np.int64)
    for a in range(1, k + 1):
        for b in range(1, k + 1):
            t[a, b] = pos[int(group.table[path.order[a - 1], path.order[b - 1]])]
    return t


def _klein_default():
    from .groups import efficient_group
    return efficient_group("XY", 2)


def cdd_labels(level: int, size: int = 4, group: Optional[DDGroup] = None,
               path: Optional[Path] = None) -> List[int]:
    """Concatenated sequence: level l+1 is level l followed by its conjugates by g_1..g_{|G|-1}."""
    if level < 1:
        raise ParameterError("CDD level must be >= 1")
    if level > 12:
        raise ParameterError("CDD level beyond any feasible horizon")
    group = group or _klein_default()
    if len(group) != size:
        raise ParameterError("size does not match the group order")
    path = path or Path.identity(size)
    if not path.starts_with_identity():
        raise ParameterError("concatenation assumes the path starts at the identity")
    t = label_table(group, path)
    seq = pdd_labels(size)
    for _ in range(level - 1):
        seq = [int(t[lab, j]) for j in range(1, size + 1) for lab in seq]
    return seq


def scpd_labels(m: int, size: int = 4) -> List[int]:
    """Symmetrized cyclic-permutation sequence of level ``m`` (length 2*size**m)."""
    if m < 1:
        raise ParameterError("SCPD level must be >= 1")
    if m > 10:
        raise ParameterError("SCPD level beyond any feasible horizon")
    base = list(range(1, size + 1))
    if m == 1:
        return sdd_labels(size)
    units = []
    for k in range(size):
        r = base[-k:] + base[:-k] if k else list(base)
        units.append(r + r[::-1])
    for _ in range(m - 2):
        units = [sum((units[(i - k) % size] for i in range(size)), [])
                 for k in range(size)]
    return sum(units, [])


H2_SEQUENCE = (1, 2, 3, 4, 2, 1, 4, 3, 2, 3, 1, 4, 3, 2, 4, 1, 3, 1, 2, 4, 1, 3, 4, 2)

# three reference 24-slot lines, each cancelling orders 0-2 on its own
REFERENCE_LINES = (
    H2_SEQUENCE,
    (4, 3, 1, 2, 4, 2, 1, 3, 1, 4, 2, 3, 4, 1, 3, 2, 2, 4, 3, 1, 3, 4, 2, 1),
    (4, 2, 3, 1, 2, 4, 1, 3, 4, 1, 2, 3, 4, 3, 2, 1, 3, 4, 1, 2, 1, 4, 3, 2),
)


def h2_labels() -> List[int]:
    return list(H2_SEQUENCE)


def half_pcdd2_labels() -> List[int]:
    return cdd_labels(2)[:8]


def all_paths(size: int = 4) -> List[Tuple[int, ...]]:
    """Every ordering of labels 1..size, lexicographic."""
    return list(itertools.permutations(range(1, size + 1)))


# --------------------------------------------------------------------------
# dash notation
# --------------------------------------------------------------------------

def format_labels(labels: Sequence[int], group_size: int = 4) -> str:
    labels = list(labels)
    wide = any(v > 9 for v in labels)
    sep = "," if wide else ""
    chunks = [labels[i:i + group_size] for i in range(0, len(labels), group_size)]
    return "-".join(sep.join(str(v) for v in c) for c in chunks)


def parse_labels(text: str) -> List[int]:
    text = text.strip().strip("()")
    out = []
    for chunk in text.split("-"):
        chunk = chunk.strip()
        if not chunk:
            continue
        if "," in chunk:
            out.extend(int(v) for v in chunk.split(","))
        else:
            out.extend(int(ch) for ch in chunk)
    return out


# --------------------------------------------------------------------------
# realization rng
# --------------------------------------------------------------------------

def realization_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-style stream keyed by (seed, realization index)."""
    return np.random.Generator(np.random.Philox(key=[seed & (2**64 - 1), index]))


# --------------------------------------------------------------------------
# block streams
# --------------------------------------------------------------------------

def _periodic(block: Sequence[int], n: int) -> List[int]:
    reps = n // len(block) + 1
    return (list(block) * reps)[:n]


def embed(inner: Sequence[int], n_slots: int, group: DDGroup, source: BorderSource,
          rng: np.random.Generator, at_start: bool = True
          ) -> Tuple[List[int], List[PauliString]]:
    """Repeat ``inner`` and conjugate each copy by a fresh random border element.

    Returns per-slot labels and per-slot borders.  With ``at_start=False``
    the first copy keeps the identity border.
    """
    inner = list(inner)
    n = group.n_qubits
    labels, borders = [], []
    block = 0
    while len(labels) < n_slots:
        if block == 0 and not at_start:
            b = PauliString.identity(n)
        elif source is BorderSource.SAME_GROUP:
            b = group[int(rng.integers(len(group)))]
        else:
            b = sample_pauli_group_element(n, rng)
        labels.extend(inner)
        borders.extend([b] * len(inner))
        block += 1
    return labels[:n_slots], borders[:n_slots]


def _random_perm_blocks(size: int, n_slots: int, rng, mirror=False, pin_first=False):
    out = []
    while len(out) < n_slots:
        if pin_first:
            rest = [int(v) + 2 for v in rng.permutation(size - 1)]
            p = [1] + rest
        else:
            p = [int(v) + 1 for v in rng.permutation(size)]
        out.extend(p + p[::-1] if mirror else p)
    return out[:n_slots]


class CompletionTable:
    """Maps a 4-slot starting path to a full 24-slot block (see ``aht``)."""

    def __init__(self, entries: Dict[Tuple[int, ...], Tuple[int, ...]]):
        self.entries = {tuple(k): tuple(v) for k, v in entries.items()}

    def __getitem__(self, start):
        try:
            return self.entries[tuple(start)]
        except KeyError:
            raise ConfigError(f"no completion stored for start path {start}",
                              "completion_table") from None

    def starts(self):
        return sorted(self.entries)

    def __len__(self):
        return len(self.entries)


def rh2_block(start_index: int, table: CompletionTable) -> Tuple[int, ...]:
    """Completion for the ``start_index``-th four-slot path in lexicographic order (0..23)."""
    perms = all_paths(4)
    if not 0 <= start_index < len(perms):
        raise ParameterError("start index must lie in 0..23")
    return table[perms[start_index]]


def inner_block(spec: ProtocolSpec, group: DDGroup, path: Path) -> List[int]:
    """The deterministic block an embedded protocol repeats."""
    size = len(group)
    k = spec.kind
    if k in (Kind.EMD1, Kind.EMD2):
        return pdd_labels(size)
    if k is Kind.ESDD:
        return sdd_labels(size)
    if k is Kind.EPCDD:
        return cdd_labels(spec.level, size, group, path)
    if k is Kind.EPSCPD:
        return scpd_labels(spec.level, size)
    if k is Kind.EH2:
        return h2_labels()
    raise ParameterError(f"{k.value} is not an embedded protocol")


def generate(spec: ProtocolSpec, group: DDGroup, dt: float, horizon_slots: int,
             rng: Optional[np.random.Generator] = None,
             completion_table: Optional[CompletionTable] = None) -> Schedule:
    """Compile ``spec`` into exactly ``horizon_slots`` slots.

    Deterministic kinds ignore ``rng``; randomized kinds draw everything from
    it (or from ``realization_rng(spec.seed, 0)`` when it is omitted).
    """
    if horizon_slots < 1:
        raise ParameterError("horizon must contain at least one slot")
    size = len(group)
    path = spec.path or Path.identity(size)
    if len(path) != size:
        raise ConfigError(f"path length {len(path)} does not match |G|={size}", "path")
    k = spec.kind
    if k in DETERMINISTIC and k not in (Kind.FREE, Kind.ALGOR_REPLAY) \
            and not path.starts_with_identity():
        raise ConfigError("deterministic protocols need a path starting at the identity",
                          "path")
    if rng is None:
        rng = realization_rng(spec.seed, 0)
    n = horizon_slots + 1  # one extra slot fixes the frame after the last pulse
    borders = None

    if k is Kind.FREE:
        labels = [1] * n
    elif k is Kind.PDD:
        labels = _periodic(pdd_labels(size), n)
    elif k is Kind.SDD:
        labels = _periodic(sdd_labels(size), n)
    elif k is Kind.CDD:
        level = 1
        while size ** level < n:
            level += 1
        labels = cdd_labels(level, size, group, path)[:n]
    elif k is Kind.PCDD:
        labels = _periodic(cdd_labels(spec.level, size, group, path), n)
    elif k is Kind.SCPD:
        level = 1
        while 2 * size ** level < n:
            level += 1
        labels = scpd_labels(level, size)[:n]
    elif k is Kind.PSCPD:
        labels = _periodic(scpd_labels(spec.level, size), n)
    elif k in (Kind.H2, Kind.PH2):
        _need_four(size, k)
        labels = _periodic(h2_labels(), n)
    elif k is Kind.ALGOR_REPLAY:
        if len(spec.stream) < horizon_slots:
            raise ConfigError(f"stored stream has {len(spec.stream)} slots, "
                              f"{horizon_slots} requested", "stream")
        labels = list(spec.stream[:n])
        if len(labels) < n:
            labels.append(1)
    elif k is Kind.NRD:
        labels = [int(v) + 1 for v in rng.integers(0, size, size=n)]
    elif k is Kind.RPD:
        labels = _random_perm_blocks(size, n, rng)
    elif k is Kind.SRPD:
        labels = _random_perm_blocks(size, n, rng, mirror=True)
    elif k is Kind.PSEUDO_RPD:
        labels = _random_perm_blocks(size, n, rng, pin_first=True)
    elif k is Kind.RH2:
        _need_four(size, k)
        if completion_table is None:
            raise ConfigError("RH2 needs a completion table", "completion_table")
        starts = completion_table.starts()
        labels = []
        while len(labels) < n:
            start = starts[int(rng.integers(len(starts)))]
            labels.extend(completion_table[start])
        labels = labels[:n]
    elif k in _EMBEDDED:
        labels, borders = embed(inner_block(spec, group, path), n, group,
                                spec.borders_from(), rng, spec.border_at_start)
    else:  # pragma: no cover
        raise ConfigError(f"unhandled protocol {k}", "protocol")

    final_border = borders[-1] if borders else None
    return Schedule(group, path, dt, tuple(labels[:-1]),
                    tuple(borders[:-1]) if borders else None,
                    labels[-1], final_border, spec.label)


def _need_four(size, kind):
    if size != 4:
        raise ConfigError(f"{kind.value} is defined for four-element groups", "group")
