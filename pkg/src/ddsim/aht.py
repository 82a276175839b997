"""Average-Hamiltonian (Magnus) terms of piecewise-constant toggled sequences.

All terms are evaluated in the flat per-slot picture:

    H0bar = (dt/T) sum_k H_k
    H1bar = -i dt^2/(2T) sum_{l>k} [H_l, H_k]
    H2bar = -dt^3/(6T) { sum_{m>l>k} ([H_m,[H_l,H_k]] + [[H_m,H_l],H_k])
                         + 1/2 sum_{l>k} ([H_l,[H_l,H_k]] + [[H_l,H_k],H_k]) }

The triple sum is folded with prefix and suffix sums so the cost is linear in
the number of slots.  ``magnus2_bruteforce`` keeps the literal form as an
oracle.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from pathlib import Path as FsPath
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import schur

from .errors import BranchAmbiguityError, ConfigError, DomainError, ParameterError
from .groups import DDGroup, Path
from .pauli import PauliString, PauliSum, commutator, conjugate, equals_zero
from .schedule import CompletionTable, format_labels, parse_labels

ZERO_TOL = 1e-12


@dataclass(frozen=True)
class ToggledSequence:
    hamiltonians: Tuple[PauliSum, ...]
    dt: float = 1.0

    def __post_init__(self):
        hs = tuple(self.hamiltonians)
        if not hs:
            raise ParameterError("toggled sequence is empty")
        n = hs[0].n_qubits
        if any(h.n_qubits != n for h in hs):
            raise ParameterError("toggled Hamiltonians act on different qubit counts")
        object.__setattr__(self, "hamiltonians", hs)

    def __len__(self):
        return len(self.hamiltonians)

    @property
    def n_qubits(self) -> int:
        return self.hamiltonians[0].n_qubits

    @property
    def duration(self) -> float:
        return len(self) * self.dt

    def reversed(self) -> "ToggledSequence":
        return ToggledSequence(self.hamiltonians[::-1], self.dt)

    def __add__(self, other: "ToggledSequence") -> "ToggledSequence":
        if self.dt != other.dt:
            raise ParameterError("cannot join sequences with different dt")
        return ToggledSequence(self.hamiltonians + other.hamiltonians, self.dt)


def toggled(h0: PauliSum, group: DDGroup, labels: Sequence[int], path: Optional[Path] = None,
            dt: float = 1.0, borders: Optional[Sequence[PauliString]] = None) -> ToggledSequence:
    """H_k = f_k^† H0 f_k with f_k = g_{label_k} (times the border when given)."""
    path = path or Path.identity(len(group))
    cache: Dict[tuple, PauliSum] = {}
    out = []
    for k, lab in enumerate(labels):
        if not 1 <= lab <= len(group):
            raise ParameterError(f"label {lab} outside 1..{len(group)}")
        f = group[path.order[lab - 1]]
        if borders is not None:
            f = (f * borders[k]).bare()
        h = cache.get(f.key)
        if h is None:
            h = conjugate(h0, f)
            cache[f.key] = h
        out.append(h)
    return ToggledSequence(tuple(out), dt)


def _zero(seq: ToggledSequence) -> PauliSum:
    return PauliSum.zero(seq.n_qubits)


def _total(hs) -> PauliSum:
    acc = None
    for h in hs:
        acc = h if acc is None else acc + h
    return acc


def magnus0(seq: ToggledSequence) -> PauliSum:
    return _total(seq.hamiltonians) * (seq.dt / seq.duration)


def magnus1(seq: ToggledSequence) -> PauliSum:
    hs = seq.hamiltonians
    acc = _zero(seq)
    prefix = hs[0]
    for h in hs[1:]:
        acc = acc + commutator(h, prefix)
        prefix = prefix + h
    return acc * (-1j * seq.dt ** 2 / (2 * seq.duration))


def magnus1_four(seq: ToggledSequence) -> PauliSum:
    """Reduced four-slot form, valid when the slot sum vanishes."""
    if len(seq) != 4:
        raise ParameterError("reduced form needs exactly four slots")
    h1, h2, h3, h4 = seq.hamiltonians
    return (commutator(h4, h3) + commutator(h2, h1)) * (-1j * seq.dt ** 2 / (2 * seq.duration))


def magnus2(seq: ToggledSequence) -> PauliSum:
    hs = seq.hamiltonians
    n = len(hs)
    zero = _zero(seq)
    prefix = [zero]
    for h in hs[:-1]:
        prefix.append(prefix[-1] + h)
    suffix = [zero] * n
    run = zero
    for l in range(n - 1, -1, -1):
        suffix[l] = run
        run = run + hs[l]
    acc = zero
    for l in range(n):
        h, p, s = hs[l], prefix[l], suffix[l]
        inner = commutator(h, p)
        sh = commutator(s, h)
        acc = acc + commutator(s, inner) + commutator(sh, p)
        # pair sum, both halves indexed by the slot they repeat
        acc = acc + (commutator(h, inner) + commutator(sh, h)) * 0.5
    return acc * (-seq.dt ** 3 / (6 * seq.duration))


def magnus2_bruteforce(seq: ToggledSequence) -> PauliSum:
    """Literal triple sum; quadratic-to-cubic cost, for cross-checks only."""
    hs = seq.hamiltonians
    n = len(hs)
    acc = _zero(seq)
    for m in range(n):
        for l in range(m):
            for k in range(l):
                acc = acc + commutator(hs[m], commutator(hs[l], hs[k]))
                acc = acc + commutator(commutator(hs[m], hs[l]), hs[k])
    for l in range(n):
        for k in range(l):
            acc = acc + commutator(hs[l], commutator(hs[l], hs[k])) * 0.5
            acc = acc + commutator(commutator(hs[l], hs[k]), hs[k]) * 0.5
    return acc * (-seq.dt ** 3 / (6 * seq.duration))


def magnus2_four(seq: ToggledSequence) -> PauliSum:
    """Reduced four-slot second-order form, valid when the slot sum vanishes."""
    if len(seq) != 4:
        raise ParameterError("reduced form needs exactly four slots")
    h1, h2, h3, h4 = seq.hamiltonians
    body = (commutator(h1 * 2.0 + h2, commutator(h1, h2))
            + commutator(h4 * 2.0 + h3, commutator(h4, h3)))
    return body * (-seq.dt ** 3 / (6 * seq.duration))


MAGNUS = (magnus0, magnus1, magnus2)


def magnus(seq: ToggledSequence, order: int) -> PauliSum:
    if order not in (0, 1, 2):
        raise ParameterError("orders 0, 1 and 2 are available")
    return MAGNUS[order](seq)


def supercycle_magnus(subsequences: Sequence[ToggledSequence], order: int,
                      tol: float = ZERO_TOL) -> PauliSum:
    """Order-``order`` term of a concatenation whose pieces cancel all lower orders."""
    if not subsequences:
        raise ParameterError("no subsequences given")
    for i, sub in enumerate(subsequences):
        for j in range(order):
            if not equals_zero(magnus(sub, j), tol):
                raise DomainError(f"subsequence {i} has a nonzero order-{j} term")
    total = sum(s.duration for s in subsequences)
    acc = _zero(subsequences[0])
    for sub in subsequences:
        acc = acc + magnus(sub, order) * (sub.duration / total)
    return acc


# --------------------------------------------------------------------------
# numeric effective Hamiltonian
# --------------------------------------------------------------------------

def numeric_effective_hamiltonian(u: np.ndarray, t: float, guard: float = 1e-6) -> np.ndarray:
    """H with U = exp(-i H t) on the principal branch."""
    if t <= 0:
        raise ParameterError("time must be positive")
    tri, z = schur(np.asarray(u, dtype=np.complex128), output="complex")
    lam = np.diag(tri)
    phase = np.angle(lam)
    if np.any(np.abs(np.abs(phase) - math.pi) < guard):
        raise BranchAmbiguityError("an eigenphase sits on the branch cut at +-pi")
    h = (z * (-phase / t)) @ z.conj().T
    return 0.5 * (h + h.conj().T)


def pauli_decompose(m: np.ndarray, n_qubits: int, tol: float = 1e-12) -> PauliSum:
    """Expand a dense matrix in Pauli strings (coefficient Tr(P M)/d)."""
    from . import _accel
    d = 1 << n_qubits
    terms = []
    for x in range(d):
        for z in range(d):
            c = _accel.trace_pauli_dag(m, _accel.reverse_bits(x, n_qubits),
                                       _accel.reverse_bits(z, n_qubits)) / d
            if abs(c) > tol:
                terms.append((PauliString(n_qubits, x, z), c))
    return PauliSum.from_terms(n_qubits, terms)


def _sequence_unitary(seq_h0: PauliSum, group: DDGroup, labels, path, dt) -> np.ndarray:
    from .engine import PropagatorCache
    from .schedule import Schedule
    sch = Schedule(group, path or Path.identity(len(group)), dt, tuple(labels))
    cache = PropagatorCache(seq_h0)
    u = np.eye(cache.dim, dtype=np.complex128)
    for f in sch.frames[:-1]:
        u = cache.step(f, dt) @ u
    return u


def effective_hamiltonian(h0: PauliSum, group: DDGroup, labels: Sequence[int], dt: float,
                          path: Optional[Path] = None) -> np.ndarray:
    u = _sequence_unitary(h0, group, labels, path, dt)
    return numeric_effective_hamiltonian(u, len(labels) * dt)


def spectral_norm_dense(m: np.ndarray) -> float:
    return float(np.linalg.norm(m, 2))


def convergence_order_fit(labels: Sequence[int], group: DDGroup, h0: PauliSum,
                          dt_list: Sequence[float], path: Optional[Path] = None
                          ) -> Tuple[float, np.ndarray]:
    """Least-squares slope of log ||H_eff(T)|| against log dt.

    ``H_eff`` is normalized by the duration of one pass through ``labels``.
    Returns (slope, norms).  With a vanishing drift every norm is zero and
    the slope is reported as ``nan``.
    """
    dts = np.asarray(dt_list, dtype=float)
    if len(dts) < 2:
        raise ParameterError("need at least two dt values")
    norms = np.array([spectral_norm_dense(effective_hamiltonian(h0, group, labels, dt, path))
                      for dt in dts])
    if np.all(norms == 0.0) or not len(h0):
        return float("nan"), norms
    slope = np.polyfit(np.log(dts), np.log(norms), 1)[0]
    return float(slope), norms


# --------------------------------------------------------------------------
# finite-width zeroth order
# --------------------------------------------------------------------------

def finite_width_h0bar(h0: PauliSum, group: DDGroup, labels: Sequence[int], tau_ratio: float,
                       dts: Sequence[float], beta: float = math.pi, placement: str = "end",
                       path: Optional[Path] = None) -> np.ndarray:
    """Zeroth-order average Hamiltonian of finite-width pulses.

    ``H_eff`` of the logical propagator over one pass through ``labels`` is
    computed at each ``dt`` with ``tau = tau_ratio * dt`` fixed in ratio,
    then extrapolated linearly in ``dt`` to zero (Richardson on the first
    two points suffices once the remainder is O(dt)).
    """
    from .engine import ErrorKind, ErrorModel, iter_physical
    from .schedule import Schedule
    from . import _accel
    dts = sorted(float(v) for v in dts)
    if len(dts) < 2:
        raise ParameterError("need two dt values to extrapolate")
    path = path or Path.identity(len(group))
    mats = []
    for dt in dts:
        n = len(labels)
        sch = Schedule(group, path, dt, tuple(labels), final_label=labels[0])
        model = ErrorModel(ErrorKind.FINITE_WIDTH, tau=tau_ratio * dt, beta=beta,
                           placement=placement)
        last = None
        for t, u, f in iter_physical(sch, h0, model, sample_stride=n):
            last = (u, f)
        u, f = last
        logical = _accel.left_mul_dense(u, *f.dag().dense_masks())
        mats.append(numeric_effective_hamiltonian(_strip_phase(logical), n * dt))
    # linear fit in dt over all points, intercept = dt -> 0 limit
    a = np.vstack([np.ones(len(dts)), dts]).T
    stack = np.stack(mats).reshape(len(dts), -1)
    coef, *_ = np.linalg.lstsq(a, stack, rcond=None)
    out = coef[0].reshape(mats[0].shape)
    return 0.5 * (out + out.conj().T)


def _strip_phase(u: np.ndarray) -> np.ndarray:
    """Remove the global phase so the trace is real and positive."""
    tr = np.trace(u)
    if abs(tr) < 1e-14:
        return u
    return u * (abs(tr) / tr)


# --------------------------------------------------------------------------
# RH2 completion table
# --------------------------------------------------------------------------

def pair_swap(block: Sequence[int]) -> Tuple[int, ...]:
    """abcd -> badc; a four-slot block followed by its swap has no first-order term."""
    a, b, c, d = block
    return (b, a, d, c)


def _reference_hamiltonians(group: DDGroup) -> List[PauliSum]:
    from .model import heisenberg_chain
    n = group.n_qubits
    out = [heisenberg_chain(n, 1.0, 1.0), heisenberg_chain(n, 1.0, 5.0)]
    return out


def block_terms(h0: PauliSum, group: DDGroup, path: Path = None) -> Dict[Tuple[int, ...], Tuple[PauliSum, PauliSum]]:
    """(H1bar, H2bar) of every four-slot block, dt = 1."""
    out = {}
    for perm in itertools.permutations(range(1, 5)):
        seq = toggled(h0, group, perm, path)
        out[perm] = (magnus1(seq), magnus2(seq))
    return out


def verify_zero_orders(h0: PauliSum, group: DDGroup, labels: Sequence[int],
                       path: Optional[Path] = None, tol: float = ZERO_TOL) -> Tuple[bool, bool, bool]:
    seq = toggled(h0, group, labels, path)
    return tuple(equals_zero(magnus(seq, k), tol) for k in range(3))


def build_rh2_completion_table(group: DDGroup, h0_list: Optional[Sequence[PauliSum]] = None,
                               tol: float = 1e-10) -> Tuple[CompletionTable, List[Tuple[int, ...]]]:
    """Search a 24-slot completion for each of the 24 starting paths.

    Candidates are three swap pairs ``(s, swap s, p, swap p, q, swap q)`` with
    ``s`` the requested start; each pair cancels orders 0 and 1 on its own,
    so only the summed second-order term must vanish.  The first hit in
    lexicographic order of (p, q) is kept.  Returns the table and the list of
    starts for which no completion exists.
    """
    if len(group) != 4:
        raise ParameterError("completion search is defined for four-element groups")
    h0_list = list(h0_list) if h0_list is not None else _reference_hamiltonians(group)
    terms = [block_terms(h, group) for h in h0_list]
    perms = list(itertools.permutations(range(1, 5)))
    reps = sorted({min(p, pair_swap(p)) for p in perms})
    entries, infeasible = {}, []
    for start in perms:
        partner = pair_swap(start)
        others = [r for r in reps if r not in (start, partner)]
        found = None
        for p, q in itertools.combinations(others, 2):
            blocks = [start, partner, p, pair_swap(p), q, pair_swap(q)]
            ok = True
            for tbl in terms:
                s1 = _total(tbl[b][0] for b in blocks)
                s2 = _total(tbl[b][1] for b in blocks)
                if not (equals_zero(s1, tol) and equals_zero(s2, tol)):
                    ok = False
                    break
            if ok:
                labels = tuple(v for b in blocks for v in b)
                if all(all(verify_zero_orders(h, group, labels, tol=tol)) for h in h0_list):
                    found = labels
                    break
        if found is None:
            infeasible.append(start)
        else:
            entries[start] = found
    return CompletionTable(entries), infeasible


def save_completion_table(table: CompletionTable, path) -> None:
    lines = ["# start: 24-slot completion"]
    for start in table.starts():
        lines.append(f"{''.join(map(str, start))}: {format_labels(table[start])}")
    FsPath(path).write_text("\n".join(lines) + "\n")


def load_completion_table(path) -> CompletionTable:
    entries = {}
    for raw in FsPath(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            head, body = line.split(":", 1)
            entries[tuple(int(c) for c in head.strip())] = tuple(parse_labels(body))
        except ValueError as exc:
            raise ConfigError(f"bad completion line {raw!r}: {exc}", "completion_table") from None
    return CompletionTable(entries)


def default_completion_table() -> CompletionTable:
    """The table shipped with the package (built for the four-element groups)."""
    return load_completion_table(FsPath(__file__).with_name("data") / "rh2_completions.txt")
