"""Exact propagation of decoupling schedules and fidelity statistics.

The drift exponential ``E = exp(-i H0 dt)`` is diagonalized once.  A slot in
frame ``f`` then costs an O(d^2) signed permutation (``f^† E f``) plus one
matrix product.  Whole blocks of slots are cached so that periodic protocols
pay for a block only once.
"""

from __future__ import annotations

import csv
import io
import math
import os
import threading
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterator, List, Optional, Tuple

import numpy as np

from . import _accel
from .errors import DomainError, ParameterError, ResourceError
from .groups import DDGroup
from .pauli import DENSE_CAP, PauliString, PauliSum, to_matrix
from .schedule import (CompletionTable, ProtocolSpec, Schedule, generate,
                       realization_rng)

HERMITIAN_TOL = 1e-12


# --------------------------------------------------------------------------
# error models
# --------------------------------------------------------------------------

class ErrorKind(str, Enum):
    IDEAL = "ideal"
    FINITE_WIDTH = "finite_width"
    FLIP_ANGLE = "flip_angle"


class PulsePlacement(str, Enum):
    END = "end"          # (dt - tau) free, then the pulse
    CENTER = "center"    # pulse in the middle of the slot


@dataclass(frozen=True)
class ErrorModel:
    kind: ErrorKind = ErrorKind.IDEAL
    tau: float = 0.0
    beta: float = math.pi
    epsilon: float = 0.0
    placement: PulsePlacement = PulsePlacement.END

    def __post_init__(self):
        object.__setattr__(self, "kind", ErrorKind(self.kind))
        object.__setattr__(self, "placement", PulsePlacement(self.placement))
        if self.tau < 0:
            raise ParameterError("tau must be non-negative")
        if abs(self.epsilon) > 0.1:
            raise ParameterError(f"|epsilon| <= 0.1 required (got {self.epsilon})")
        if self.kind is ErrorKind.IDEAL and (self.tau or self.epsilon):
            raise ParameterError("ideal model takes tau = 0 and epsilon = 0")

    @property
    def ideal(self) -> bool:
        return (self.kind is ErrorKind.IDEAL
                or (self.kind is ErrorKind.FINITE_WIDTH and self.tau == 0.0
                    and self.beta == math.pi)
                or (self.kind is ErrorKind.FLIP_ANGLE and self.epsilon == 0.0))


IDEAL = ErrorModel()


# --------------------------------------------------------------------------
# dense helpers
# --------------------------------------------------------------------------

def expm_hermitian(h: np.ndarray, t: float) -> np.ndarray:
    """exp(-i h t) by spectral decomposition."""
    h = np.asarray(h, dtype=np.complex128)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DomainError("expected a square matrix")
    if np.max(np.abs(h - h.conj().T), initial=0.0) > HERMITIAN_TOL * max(1.0, np.max(np.abs(h), initial=0.0)):
        raise DomainError("matrix is not Hermitian")
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def entanglement_fidelity(u: np.ndarray) -> float:
    d = u.shape[0]
    return float(min(1.0, abs(np.trace(u) / d) ** 2))


def average_fidelity(f_e: float, d: int) -> float:
    if not 0.0 <= f_e <= 1.0 + 1e-12:
        raise ParameterError("entanglement fidelity must lie in [0, 1]")
    return (d * f_e + 1.0) / (d + 1.0)


def pure_state_fidelity(u: np.ndarray, psi: np.ndarray) -> float:
    psi = np.asarray(psi, dtype=np.complex128).ravel()
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise DomainError("state vector is not normalized")
    return float(min(1.0, abs(np.vdot(psi, u @ psi)) ** 2))


def _masks(p: PauliString):
    return p.dense_masks()


def _pulse_rotation(p: PauliString, angle: float) -> np.ndarray:
    """prod_q exp(-i angle sigma_q / 2) over the letters of ``p``."""
    one = np.eye(2, dtype=np.complex128)
    out = np.ones((1, 1), dtype=np.complex128)
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    for letter in p.letters:
        if letter == "I":
            m = one
        else:
            m = c * one - 1j * s * PauliString.from_letters(letter).to_matrix()
        out = np.kron(out, m)
    return out


def flip_angle_pulse(p: PauliString, epsilon: float) -> np.ndarray:
    """Systematic over-rotation: every rotated qubit turns by pi(1+epsilon)."""
    return _pulse_rotation(p, math.pi * (1.0 + epsilon))


# --------------------------------------------------------------------------
# cache
# --------------------------------------------------------------------------

class PropagatorCache:
    """Dense exponentials and block products for one drift Hamiltonian.

    Exponentials are keyed by (``PauliSum.identity_key``, duration).  Block
    products go through a bounded LRU map since random protocols can create
    many distinct blocks.
    """

    def __init__(self, h0: PauliSum, max_bytes: int = 1 << 29):
        if h0.n_qubits > DENSE_CAP:
            raise ResourceError(f"{h0.n_qubits} qubits exceed the dense cap of {DENSE_CAP}")
        self.h0 = h0
        self.n_qubits = h0.n_qubits
        self.dim = 1 << h0.n_qubits
        self._exp = {}
        self._dense = {}
        self._steps = {}
        self._blocks: "OrderedDict[tuple, np.ndarray]" = OrderedDict()
        self._max_blocks = max(8, max_bytes // (16 * self.dim * self.dim))
        self._lock = threading.RLock()
        self.exp_count = 0

    def dense(self, h: PauliSum) -> np.ndarray:
        key = h.identity_key()
        with self._lock:
            m = self._dense.get(key)
            if m is None:
                m = to_matrix(h)
                self._dense[key] = m
            return m

    def unitary(self, h: PauliSum, duration: float) -> np.ndarray:
        key = (h.identity_key(), float(duration))
        with self._lock:
            u = self._exp.get(key)
            if u is None:
                u = expm_hermitian(self.dense(h), duration)
                self._exp[key] = u
                self.exp_count += 1
            return u

    def step(self, frame: PauliString, duration: float) -> np.ndarray:
        """exp(-i f^† H0 f duration) = f^† exp(-i H0 duration) f."""
        key = (frame.key, float(duration))
        with self._lock:
            u = self._steps.get(key)
            if u is None:
                base = self.unitary(self.h0, duration)
                u = base if frame.is_identity() else _accel.conj_dense(base, *_masks(frame))
                self._steps[key] = u
            return u

    def block(self, key, build: Callable[[], np.ndarray]) -> np.ndarray:
        with self._lock:
            u = self._blocks.get(key)
            if u is not None:
                self._blocks.move_to_end(key)
                return u
        u = build()
        with self._lock:
            self._blocks[key] = u
            while len(self._blocks) > self._max_blocks:
                self._blocks.popitem(last=False)
        return u


def _check_dim(schedule: Schedule, h0: PauliSum):
    if schedule.group.n_qubits != h0.n_qubits:
        raise ParameterError("schedule and Hamiltonian act on different qubit counts")


# --------------------------------------------------------------------------
# toggling-frame evolution
# --------------------------------------------------------------------------

def _sample_grid(n_slots: int, stride: int, substeps: int) -> List[int]:
    total = n_slots * substeps
    return list(range(0, total + 1, stride))


def iter_toggling(schedule: Schedule, h0: PauliSum, sample_stride: int,
                  substeps: int = 1, cache: Optional[PropagatorCache] = None
                  ) -> Iterator[Tuple[float, np.ndarray]]:
    """Yield (t, U~(t)) at every multiple of ``sample_stride`` sub-steps.

    A sub-step lasts ``dt/substeps``; with ``substeps=1`` the stride counts
    slots and blocks of ``sample_stride`` slots are cached.
    """
    _check_dim(schedule, h0)
    if sample_stride < 1 or substeps < 1:
        raise ParameterError("sample_stride and substeps must be >= 1")
    cache = cache or PropagatorCache(h0)
    d = cache.dim
    frames = schedule.frames
    u = np.eye(d, dtype=np.complex128)
    yield 0.0, u
    if substeps > 1:
        h = schedule.dt / substeps
        total = schedule.n_slots * substeps
        for s in range(1, total + 1):
            u = cache.step(frames[(s - 1) // substeps], h) @ u
            if s % sample_stride == 0:
                yield s * h, u
        return

    dt = schedule.dt
    borders = schedule.borders
    n = schedule.n_slots
    for start in range(0, n, sample_stride):
        stop = min(start + sample_stride, n)
        blk = _toggling_block(schedule, cache, start, stop, frames, borders, dt)
        u = blk @ u
        yield stop * dt, u


def _toggling_block(schedule, cache, start, stop, frames, borders, dt):
    if stop - start == 1:
        return cache.step(frames[start], dt)
    labels = schedule.labels[start:stop]
    elems = tuple(schedule.element(lab).key for lab in labels)

    def product(fr):
        def build():
            acc = cache.step(fr[0], dt)
            for f in fr[1:]:
                acc = cache.step(f, dt) @ acc
            return acc
        return build

    if borders is None:
        return cache.block(("t", dt, elems), product(frames[start:stop]))
    bs = borders[start:stop]
    if all(b == bs[0] for b in bs):
        base = cache.block(("t", dt, elems),
                           product([schedule.element(lab) for lab in labels]))
        b = bs[0]
        if b.is_identity():
            return base
        return _accel.conj_dense(base, *_masks(b))
    return cache.block(("t", dt, tuple(f.key for f in frames[start:stop])),
                       product(frames[start:stop]))


def evolve_toggling(schedule: Schedule, h0: PauliSum, sample_stride: int = 1,
                    substeps: int = 1, cache: Optional[PropagatorCache] = None
                    ) -> List[Tuple[float, np.ndarray]]:
    return [(t, u.copy()) for t, u in iter_toggling(schedule, h0, sample_stride,
                                                     substeps, cache)]


# --------------------------------------------------------------------------
# physical-frame evolution
# --------------------------------------------------------------------------

class _PhysicalSlots:
    """Slot unitaries of the physical frame for one error model."""

    def __init__(self, cache: PropagatorCache, model: ErrorModel, dt: float):
        self.cache = cache
        self.model = model
        self.dt = dt
        self._memo = {}
        if model.kind is ErrorKind.FINITE_WIDTH and model.tau >= dt:
            raise ParameterError(f"pulse width tau={model.tau} must be below dt={dt}")

    def _finite_pulse(self, p: PauliString) -> np.ndarray:
        m = self.model
        hc = PauliSum.from_terms(p.n_qubits, [
            (PauliString.from_sites(p.n_qubits, {q + 1: letter}), m.beta / m.tau / 2.0)
            for q, letter in enumerate(p.letters) if letter != "I"])
        return self.cache.unitary(self.cache.h0 + hc, m.tau)

    def pulse(self, p: PauliString) -> np.ndarray:
        """Unitary of a (possibly imperfect) pulse, drift included for finite width."""
        m = self.model
        if p.is_identity():
            if m.kind is ErrorKind.FINITE_WIDTH and m.tau > 0:
                return self.cache.unitary(self.cache.h0, m.tau)
            return np.eye(self.cache.dim, dtype=np.complex128)
        if m.kind is ErrorKind.FLIP_ANGLE:
            return flip_angle_pulse(p, m.epsilon)
        if m.kind is ErrorKind.FINITE_WIDTH and m.tau > 0:
            return self._finite_pulse(p)
        return p.to_matrix()

    def slot(self, p_next: PauliString) -> np.ndarray:
        """Evolution across one slot ending with (or containing) pulse ``p_next``."""
        key = p_next.key
        u = self._memo.get(key)
        if u is not None:
            return u
        m, c, dt = self.model, self.cache, self.dt
        tau = m.tau if m.kind is ErrorKind.FINITE_WIDTH else 0.0
        if tau == 0.0:
            u = self.pulse(p_next) @ c.unitary(c.h0, dt)
        elif m.placement is PulsePlacement.END:
            u = self.pulse(p_next) @ c.unitary(c.h0, dt - tau)
        else:
            half = c.unitary(c.h0, (dt - tau) / 2.0)
            u = half @ self.pulse(p_next) @ half
        self._memo[key] = u
        return u


def iter_physical(schedule: Schedule, h0: PauliSum, error_model: ErrorModel = IDEAL,
                  sample_stride: int = 1, cache: Optional[PropagatorCache] = None
                  ) -> Iterator[Tuple[float, np.ndarray, PauliString]]:
    """Yield (t_n, U(t_n), f_n) where ``f_n`` is the ideal control frame.

    The pulse ``P_0`` is applied before t=0 (it is not charged any drift
    time); pulse ``P_{k+1}`` closes slot ``k``.  With centered placement the
    pulse sits in the middle of the slot instead, so at ``t_n`` the frame is
    already ``f_n``.
    """
    _check_dim(schedule, h0)
    cache = cache or PropagatorCache(h0)
    slots = _PhysicalSlots(cache, error_model, schedule.dt)
    pulses = schedule.pulses
    frames = schedule.frames
    u = slots.pulse(pulses[0].op)
    if error_model.kind is ErrorKind.FINITE_WIDTH and error_model.tau > 0:
        # P_0 has no preceding slot; apply it ideally
        u = pulses[0].op.to_matrix()
    yield 0.0, u, frames[0]
    n = schedule.n_slots
    for start in range(0, n, sample_stride):
        stop = min(start + sample_stride, n)
        key = ("p", error_model, schedule.dt,
               tuple(pulses[k + 1].op.key for k in range(start, stop)))

        def build(start=start, stop=stop):
            acc = slots.slot(pulses[start + 1].op)
            for k in range(start + 1, stop):
                acc = slots.slot(pulses[k + 1].op) @ acc
            return acc

        u = cache.block(key, build) @ u
        yield stop * schedule.dt, u, frames[stop]


def evolve_physical(schedule: Schedule, h0: PauliSum, error_model: ErrorModel = IDEAL,
                    sample_stride: int = 1, cache: Optional[PropagatorCache] = None
                    ) -> List[Tuple[float, np.ndarray, np.ndarray]]:
    """List of (t, U, U_c) with U_c the ideal control propagator (a Pauli matrix).

    The logical propagator is ``U_c^† U``; it matches the toggling-frame
    result up to a global phase when the model is ideal.
    """
    out = []
    for t, u, f in iter_physical(schedule, h0, error_model, sample_stride, cache):
        out.append((t, u.copy(), f.to_matrix()))
    return out


def logical_fidelity(u: np.ndarray, frame: PauliString) -> float:
    """|Tr(f^† U)/d|^2 in O(d)."""
    d = u.shape[0]
    tr = _accel.trace_pauli_dag(u, *_masks(frame)) if not frame.is_identity() else np.trace(u)
    return float(min(1.0, abs(tr / d) ** 2))


# --------------------------------------------------------------------------
# Monte Carlo
# --------------------------------------------------------------------------

@dataclass
class FidelityTrace:
    sample_times: np.ndarray
    per_realization: np.ndarray
    seed: int = 0
    label: str = ""

    def __post_init__(self):
        self.sample_times = np.asarray(self.sample_times, dtype=float)
        self.per_realization = np.atleast_2d(np.asarray(self.per_realization, dtype=float))

    @property
    def n_realizations(self) -> int:
        return self.per_realization.shape[0]

    @property
    def mean(self) -> np.ndarray:
        return self.per_realization.mean(axis=0)

    @property
    def stddev(self) -> np.ndarray:
        if self.n_realizations < 2:
            return np.zeros(len(self.sample_times))
        s = self.per_realization.std(axis=0, ddof=1)
        # identical columns would otherwise report rounding noise
        s[np.ptp(self.per_realization, axis=0) == 0.0] = 0.0
        return s

    @property
    def stderr(self) -> np.ndarray:
        return self.stddev / math.sqrt(self.n_realizations)

    def at(self, t: float) -> int:
        """Index of the sample closest to ``t``."""
        return int(np.argmin(np.abs(self.sample_times - t)))

    def to_csv(self, time_scale: float = 1.0) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["time_J", "mean", "stddev", "n"])
        n = self.n_realizations
        for t, m, s in zip(self.sample_times, self.mean, self.stddev):
            w.writerow([repr(float(t * time_scale)), repr(float(m)), repr(float(s)), n])
        return buf.getvalue()

    def per_realization_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for row in self.per_realization:
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


@dataclass
class TraceSummary:
    """Aggregate read back from a trace CSV."""

    time_J: np.ndarray
    mean: np.ndarray
    stddev: np.ndarray
    n: int
    label: str = ""


def read_trace_csv(text: str, label: str = "") -> TraceSummary:
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows:
        raise ParameterError("empty trace")
    return TraceSummary(np.array([float(r["time_J"]) for r in rows]),
                        np.array([float(r["mean"]) for r in rows]),
                        np.array([float(r["stddev"]) for r in rows]),
                        int(rows[0]["n"]), label)


class FidelityKind(str, Enum):
    ENTANGLEMENT = "entanglement"
    AVERAGE = "average"


@dataclass
class MonteCarloConfig:
    h0: PauliSum
    group: DDGroup
    protocol: ProtocolSpec
    dt: float
    horizon_slots: int
    sample_stride: int = 0          # slots (0 = one cycle)
    substeps: int = 1
    error_model: ErrorModel = IDEAL
    n_realizations: int = 1
    seed: int = 0
    threads: int = 0
    completion_table: Optional[CompletionTable] = None
    fidelity: FidelityKind = FidelityKind.ENTANGLEMENT

    def __post_init__(self):
        if self.n_realizations < 1:
            raise ParameterError("n_realizations must be >= 1")
        if not self.sample_stride:
            self.sample_stride = len(self.group)
        self.fidelity = FidelityKind(self.fidelity)
        if self.substeps > 1 and not self.error_model.ideal:
            raise ParameterError("intra-slot sampling is available for ideal pulses only")


def thread_count(requested: int = 0) -> int:
    if requested > 0:
        return requested
    env = os.environ.get("DDSIM_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ParameterError(f"DDSIM_THREADS={env!r} is not an integer") from None
    return 1


def realization_fidelities(cfg: MonteCarloConfig, index: int,
                           cache: PropagatorCache) -> Tuple[np.ndarray, np.ndarray]:
    rng = realization_rng(cfg.protocol.seed if cfg.seed is None else cfg.seed, index)
    sch = generate(cfg.protocol, cfg.group, cfg.dt, cfg.horizon_slots, rng,
                   cfg.completion_table)
    times, fids = [], []
    d = cache.dim
    if cfg.error_model.ideal:
        for t, u in iter_toggling(sch, cfg.h0, cfg.sample_stride, cfg.substeps, cache):
            times.append(t)
            fids.append(entanglement_fidelity(u))
    else:
        for t, u, f in iter_physical(sch, cfg.h0, cfg.error_model, cfg.sample_stride, cache):
            times.append(t)
            fids.append(logical_fidelity(u, f))
    fids = np.array(fids)
    if cfg.fidelity is FidelityKind.AVERAGE:
        fids = (d * fids + 1.0) / (d + 1.0)
    return np.array(times), fids


def monte_carlo(cfg: MonteCarloConfig, cache: Optional[PropagatorCache] = None
                ) -> FidelityTrace:
    """Fidelity samples for ``n_realizations`` independent schedules.

    Realization ``r`` draws from ``realization_rng(seed, r)`` so results do
    not depend on thread count or order.  Deterministic protocols are run
    once and replicated.
    """
    cache = cache or PropagatorCache(cfg.h0)
    n_run = 1 if not cfg.protocol.randomized else cfg.n_realizations
    results: List[Optional[np.ndarray]] = [None] * n_run
    times_box = []

    def work(r):
        t, f = realization_fidelities(cfg, r, cache)
        results[r] = f
        if r == 0:
            times_box.append(t)

    nthreads = min(thread_count(cfg.threads), n_run)
    if nthreads > 1:
        with ThreadPoolExecutor(nthreads) as ex:
            list(ex.map(work, range(n_run)))
    else:
        for r in range(n_run):
            work(r)
    per = np.vstack(results)
    if n_run < cfg.n_realizations:
        per = np.repeat(per, cfg.n_realizations, axis=0)
    return FidelityTrace(times_box[0], per, cfg.seed, cfg.protocol.label)
