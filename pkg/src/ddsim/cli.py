"""Command-line front end: config-driven runs, verification, plotting, search.

Config files are INI text.  Schema (keys in ``[run]`` and ``[error]`` may be
overridden inside any ``[curve.NAME]`` section)::

    [system]   n_qubits, coupling, anisotropy, shifts (comma list), coupling_range
    [run]      group, path, dt, horizon (J*T), sampling (cycle_boundaries |
               intra_cycle), stride, substeps, n_realizations, seed, threads,
               fidelity (entanglement | average)
    [error]    kind (ideal | finite_width | flip_angle), tau, beta (units of pi),
               epsilon, placement (end | center)
    [output]   dir
    [curve.X]  protocol, label, path, stream, difference (bool),
               sweep (beta), sweep_values, plus any [run]/[error] override

``path`` accepts an integer literal, ``M``, ``M_PRIME`` or ``random:SEED``.
``stream`` (ALGOR_REPLAY only) is a dash literal or ``search``.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path as FsPath
from typing import Dict, List, Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

from . import __version__
from .aht import (build_rh2_completion_table, default_completion_table, magnus,
                  save_completion_table, toggled)
from .closed_forms import FormParams, first_order_family, path_forms, PATH1, PATH2
from .engine import (ErrorModel, FidelityKind, FidelityTrace, MonteCarloConfig,
                     PropagatorCache, monte_carlo, read_trace_csv)
from .errors import ConfigError, DDSimError, ResourceError
from .groups import DDGroup, Path, group_from_name, m_prime_path, parse_path
from .model import CouplingRange, SpinChainParams, build_hamiltonian
from .pauli import PauliSum, equals_zero, format_sum
from .schedule import (Kind, ProtocolSpec, cdd_labels, h2_labels, half_pcdd2_labels,
                       parse_labels, parse_protocol, pdd_labels, realization_rng, scpd_labels,
                       sdd_labels)
from .search import SearchConfig, greedy_search

log = logging.getLogger("ddsim")

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY, EXIT_RESOURCE = 0, 1, 2, 3

_RUN_KEYS = {"group", "path", "dt", "horizon", "sampling", "stride", "substeps",
             "n_realizations", "seed", "threads", "fidelity"}
_ERROR_KEYS = {"kind", "tau", "beta", "epsilon", "placement"}
_CURVE_KEYS = {"protocol", "label", "stream", "difference", "sweep", "sweep_values"}


# --------------------------------------------------------------------------
# config parsing
# --------------------------------------------------------------------------

def _get(section: Dict[str, str], key: str, where: str, conv, default=None):
    if key not in section:
        if default is None:
            raise ConfigError("missing required key", f"{where}.{key}")
        return default
    raw = section[key]
    try:
        return conv(raw)
    except (ValueError, DDSimError) as exc:
        raise ConfigError(f"bad value {raw!r}: {exc}", f"{where}.{key}") from None


def _floats(text: str) -> tuple:
    return tuple(float(v) for v in text.replace(",", " ").split())


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


@dataclass
class CurveConfig:
    name: str
    protocol: ProtocolSpec
    group: DDGroup
    dt: float
    horizon_slots: int
    stride: int
    substeps: int
    error_model: ErrorModel
    n_realizations: int
    seed: int
    threads: int
    fidelity: FidelityKind
    difference: bool = False
    sweep_values: tuple = ()


@dataclass
class ExperimentConfig:
    system: SpinChainParams
    curves: List[CurveConfig]
    output_dir: FsPath
    source_text: str = ""
    h0: PauliSum = field(init=False)

    def __post_init__(self):
        self.h0 = build_hamiltonian(self.system)


def _resolve_path(text: str, group: DDGroup, where: str) -> Path:
    t = text.strip()
    key = t.upper()
    size = len(group)
    if key == "M":
        return Path.identity(size)
    if key in ("M_PRIME", "M'"):
        m = int(round(math.log(size, 4)))
        if 4 ** m != size:
            raise ConfigError("M_PRIME needs a nested group", where)
        return m_prime_path(m)
    if key.startswith("RANDOM:"):
        seed = int(key.split(":", 1)[1])
        rest = realization_rng(seed, 0).permutation(np.arange(1, size))
        return Path((0,) + tuple(int(v) for v in rest))
    p = parse_path(t)
    if len(p) != size:
        raise ConfigError(f"path has {len(p)} entries for |G|={size}", where)
    return p


def _build_curve(name: str, sec: Dict[str, str], run: Dict[str, str], err: Dict[str, str],
                 system: SpinChainParams, h0: PauliSum) -> CurveConfig:
    where = f"curve.{name}"
    unknown = set(sec) - _RUN_KEYS - _ERROR_KEYS - _CURVE_KEYS
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)}", where)
    r = {**run, **{k: v for k, v in sec.items() if k in _RUN_KEYS}}
    e = {**err, **{k: v for k, v in sec.items() if k in _ERROR_KEYS}}
    src = lambda k: where if k in sec else ("run" if k in _RUN_KEYS else "error")

    group = _get(r, "group", src("group"),
                 lambda s: group_from_name(s, system.n_qubits))
    path = None
    if "path" in r:
        path = _resolve_path(r["path"], group, f"{src('path')}.path")
    dt = _get(r, "dt", src("dt"), float)
    if dt <= 0:
        raise ConfigError("dt must be positive", f"{src('dt')}.dt")
    horizon = _get(r, "horizon", src("horizon"), float)
    slots = horizon / dt
    if abs(slots - round(slots)) > 1e-9 * max(1.0, slots) or round(slots) < 1:
        raise ConfigError(f"horizon {horizon} is not a whole number of slots of {dt}",
                          f"{src('horizon')}.horizon")
    slots = int(round(slots))

    sampling = _get(r, "sampling", src("sampling"), str, "cycle_boundaries").strip().lower()
    if sampling == "cycle_boundaries":
        stride = len(group)
        substeps = 1
    elif sampling == "intra_cycle":
        stride = _get(r, "stride", src("stride"), int, 1)
        substeps = _get(r, "substeps", src("substeps"), int, 1)
        if stride < 1 or substeps < 1:
            raise ConfigError("stride and substeps must be >= 1", f"{src('stride')}.stride")
    else:
        raise ConfigError(f"unknown sampling {sampling!r}", f"{src('sampling')}.sampling")

    kind = _get(e, "kind", "error", str, "ideal").strip().lower()
    try:
        model = ErrorModel(kind,
                           tau=_get(e, "tau", "error", float, 0.0),
                           beta=_get(e, "beta", "error", float, 1.0) * math.pi,
                           epsilon=_get(e, "epsilon", "error", float, 0.0),
                           placement=_get(e, "placement", "error", str, "end").strip().lower())
    except (ValueError, DDSimError) as exc:
        raise ConfigError(str(exc), f"{where}.error") from None

    seed = _get(r, "seed", src("seed"), int, 0)
    stream = ()
    proto_text = _get(sec, "protocol", where, str)
    kw = dict(path=path, seed=seed, name=sec.get("label", name))
    if proto_text.strip().upper() in ("ALGOR", "ALGOR_REPLAY"):
        raw = sec.get("stream", "search").strip()
        if raw.lower() == "search":
            n_cycles = -(-(slots + 1) // len(group))
            log.info("%s: greedy search over %d cycles", name, n_cycles)
            res = greedy_search(SearchConfig(group, h0, dt, n_cycles))
            stream = tuple(res.labels)
        else:
            stream = tuple(_get(sec, "stream", where, parse_labels))
        kw["stream"] = stream
        proto = ProtocolSpec(Kind.ALGOR_REPLAY, **kw)
    else:
        try:
            proto = parse_protocol(proto_text, **kw)
        except DDSimError as exc:
            raise ConfigError(str(exc), f"{where}.protocol") from None

    sweep = sec.get("sweep", "").strip().lower()
    values = ()
    if sweep:
        if sweep != "beta":
            raise ConfigError("only 'beta' sweeps are supported", f"{where}.sweep")
        values = _get(sec, "sweep_values", where, _floats)
    return CurveConfig(
        name=name, protocol=proto, group=group, dt=dt, horizon_slots=slots, stride=stride,
        substeps=substeps, error_model=model,
        n_realizations=_get(r, "n_realizations", src("n_realizations"), int, 1),
        seed=seed, threads=_get(r, "threads", src("threads"), int, 0),
        fidelity=_get(r, "fidelity", src("fidelity"), FidelityKind, FidelityKind.ENTANGLEMENT),
        difference=_get(sec, "difference", where, _bool, False),
        sweep_values=values)


def load_config(text: str, base_dir: Optional[FsPath] = None) -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unparsable config: {exc}") from None
    if not cp.has_section("system"):
        raise ConfigError("missing section", "system")
    s = dict(cp["system"])
    try:
        system = SpinChainParams(
            n_qubits=_get(s, "n_qubits", "system", int),
            coupling=_get(s, "coupling", "system", float, 1.0),
            anisotropy=_get(s, "anisotropy", "system", float, 1.0),
            linear_terms=_get(s, "shifts", "system", _floats, ()),
            coupling_range=_get(s, "coupling_range", "system", CouplingRange,
                                CouplingRange.NEAREST_NEIGHBOR))
    except DDSimError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc), "system") from None
    h0 = build_hamiltonian(system)
    run = dict(cp["run"]) if cp.has_section("run") else {}
    err = dict(cp["error"]) if cp.has_section("error") else {}
    for k in set(run) - _RUN_KEYS:
        raise ConfigError("unknown key", f"run.{k}")
    for k in set(err) - _ERROR_KEYS:
        raise ConfigError("unknown key", f"error.{k}")
    curves = [_build_curve(sec.split(".", 1)[1], dict(cp[sec]), run, err, system, h0)
              for sec in cp.sections() if sec.startswith("curve.")]
    if not curves:
        raise ConfigError("config defines no [curve.NAME] section", "curve")
    out = cp.get("output", "dir", fallback="out")
    out_dir = FsPath(out)
    if base_dir is not None and not out_dir.is_absolute():
        out_dir = base_dir / out_dir
    return ExperimentConfig(system, curves, out_dir, text)


def config_hash(text: str) -> str:
    """Git blob hash of the config text."""
    data = text.encode()
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


# --------------------------------------------------------------------------
# running
# --------------------------------------------------------------------------

def _mc(h0: PauliSum, c: CurveConfig, model: ErrorModel, horizon_slots: int,
        cache: PropagatorCache, table) -> FidelityTrace:
    return monte_carlo(MonteCarloConfig(
        h0, c.group, c.protocol, c.dt, horizon_slots, c.stride, c.substeps, model,
        c.n_realizations, c.seed, c.threads, table, c.fidelity), cache)


def _table_for(c: CurveConfig):
    return default_completion_table() if c.protocol.kind is Kind.RH2 else None


def run_curve(cfg: ExperimentConfig, c: CurveConfig, cache: PropagatorCache) -> Dict[str, str]:
    """CSV payloads keyed by file name for one curve."""
    table = _table_for(c)
    if c.sweep_values:
        buf = ["beta_over_pi,mean,stddev,n"]
        for b in c.sweep_values:
            model = replace(c.error_model, beta=b * math.pi)
            cc = replace(c, stride=len(c.group), substeps=1)
            tr = _mc(cfg.h0, cc, model, len(c.group), cache, table)
            buf.append(f"{b!r},{tr.mean[-1]!r},{tr.stddev[-1]!r},{tr.n_realizations}")
        return {f"{c.name}.csv": "\n".join(buf) + "\n"}
    tr = _mc(cfg.h0, c, c.error_model, c.horizon_slots, cache, table)
    out = {f"{c.name}.csv": tr.to_csv()}
    if c.difference:
        ideal = _mc(cfg.h0, c, ErrorModel(), c.horizon_slots, cache, table)
        diff = FidelityTrace(tr.sample_times, ideal.per_realization - tr.per_realization,
                             c.seed, c.name + "_D")
        out[f"{c.name}_D.csv"] = diff.to_csv()
    return out


def run(cfg: ExperimentConfig) -> Dict[str, object]:
    t0 = time.perf_counter()
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    cache = PropagatorCache(cfg.h0)
    files = []
    for c in cfg.curves:
        log.info("running %s (%s, %d slots, %d realizations)", c.name, c.protocol.label,
                 c.horizon_slots, c.n_realizations)
        for fname, body in run_curve(cfg, c, cache).items():
            (cfg.output_dir / fname).write_text(body)
            files.append(fname)
    manifest = {
        "version": __version__,
        "config_sha1": config_hash(cfg.source_text),
        "seeds": {c.name: c.seed for c in cfg.curves},
        "files": files,
        "wall_time_s": round(time.perf_counter() - t0, 3),
    }
    (cfg.output_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


# --------------------------------------------------------------------------
# plotting
# --------------------------------------------------------------------------

_COLORS = ["#000000", "#d62728", "#2ca02c", "#1f77b4", "#9467bd", "#ff7f0e",
           "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"]


def plot_svg(traces: Sequence, width: int = 640, height: int = 420, title: str = "") -> str:
    """Line chart of mean fidelity against J*T with optional +-sigma bands."""
    if not traces:
        raise ConfigError("nothing to plot", "traces")
    ml, mr, mt, mb = 60, 150, 30, 45
    pw, ph = width - ml - mr, height - mt - mb
    xs = np.concatenate([t.time_J for t in traces])
    x0, x1 = float(xs.min()), float(xs.max())
    if x1 == x0:
        x1 = x0 + 1.0
    lo = min(float(np.min(t.mean - t.stddev)) for t in traces)
    hi = max(float(np.max(t.mean + t.stddev)) for t in traces)
    y0, y1 = min(0.0, lo), max(1.0, hi)

    def sx(x):
        return ml + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return mt + (y1 - y) / (y1 - y0) * ph

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
             f'<rect width="{width}" height="{height}" fill="white"/>',
             f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>']
    if title:
        parts.append(f'<text x="{ml + pw / 2:.1f}" y="18" text-anchor="middle">{escape(title)}</text>')
    for k in range(6):
        xv = x0 + (x1 - x0) * k / 5
        yv = y0 + (y1 - y0) * k / 5
        parts.append(f'<text x="{sx(xv):.1f}" y="{mt + ph + 15}" text-anchor="middle">{xv:.3g}</text>')
        parts.append(f'<text x="{ml - 6}" y="{sy(yv) + 4:.1f}" text-anchor="end">{yv:.2f}</text>')
    parts.append(f'<text x="{ml + pw / 2:.1f}" y="{height - 8}" text-anchor="middle">J T</text>')
    parts.append(f'<text x="14" y="{mt + ph / 2:.1f}" text-anchor="middle" '
                 f'transform="rotate(-90 14 {mt + ph / 2:.1f})">fidelity</text>')
    for i, t in enumerate(traces):
        col = _COLORS[i % len(_COLORS)]
        if t.n > 1 and np.any(t.stddev > 0):
            upper = [f"{sx(x):.2f},{sy(m + s):.2f}" for x, m, s in zip(t.time_J, t.mean, t.stddev)]
            lower = [f"{sx(x):.2f},{sy(m - s):.2f}" for x, m, s in zip(t.time_J, t.mean, t.stddev)]
            parts.append(f'<polygon class="band" points="{" ".join(upper + lower[::-1])}" '
                         f'fill="{col}" fill-opacity="0.15" stroke="none"/>')
        pts = " ".join(f"{sx(x):.2f},{sy(m):.2f}" for x, m in zip(t.time_J, t.mean))
        parts.append(f'<polyline class="trace" points="{pts}" fill="none" stroke="{col}" '
                     f'stroke-width="1.5"/>')
        ly = mt + 12 + 16 * i
        parts.append(f'<line x1="{ml + pw + 10}" y1="{ly}" x2="{ml + pw + 30}" y2="{ly}" '
                     f'stroke="{col}" stroke-width="2"/>')
        parts.append(f'<text x="{ml + pw + 35}" y="{ly + 4}">{escape(t.label)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# --------------------------------------------------------------------------
# verification
# --------------------------------------------------------------------------

_VERIFY_LABELS = {
    "PDD": lambda: pdd_labels(4),
    "SDD": lambda: sdd_labels(4),
    "PCDD2": lambda: cdd_labels(2),
    "HALF_PCDD2": half_pcdd2_labels,
    "PSCPD2": lambda: scpd_labels(2),
    "H2": h2_labels,
}


@dataclass
class VerifyReport:
    orders: List[PauliSum]
    checks: List[tuple]          # (description, passed)

    @property
    def passed(self) -> bool:
        return all(ok for _, ok in self.checks)


def verify(protocol: str, group_name: str, n_qubits: int, anisotropy: float = 1.0,
           coupling: float = 1.0, shifts: Sequence[float] = (), path: Optional[Path] = None,
           dt: float = 1.0, tol: float = 1e-10) -> VerifyReport:
    """Magnus orders 0..2 of one cycle plus comparisons with known closed forms."""
    key = protocol.strip().upper().replace("(", "").replace(")", "")
    try:
        labels = _VERIFY_LABELS[key]() if key in _VERIFY_LABELS else parse_labels(protocol)
    except (ValueError, DDSimError):
        raise ConfigError(f"cannot compile {protocol!r} to a label cycle", "protocol") from None
    group = group_from_name(group_name, n_qubits)
    h0 = build_hamiltonian(SpinChainParams(n_qubits, coupling, anisotropy, tuple(shifts)))
    seq = toggled(h0, group, labels, path, dt)
    orders = [magnus(seq, k) for k in range(3)]
    checks = [("H0bar = 0", equals_zero(orders[0], tol))]

    uniform = n_qubits % 2 == 0 and n_qubits >= 4
    p = FormParams(n_qubits, coupling, anisotropy, dt, tuple(shifts)) if uniform else None
    if key == "PDD" and uniform and not any(shifts):
        hits = [name for name, form in first_order_family(p).items()
                if equals_zero(orders[1] - form, tol)]
        checks.append((f"H1bar in the six-form family ({', '.join(hits) or 'no match'})",
                       bool(hits)))
    if key in ("SDD", "HALF_PCDD2", "PCDD2", "PSCPD2", "H2"):
        checks.append(("H1bar = 0", equals_zero(orders[1], tol)))
    if key == "H2":
        checks.append(("H2bar = 0", equals_zero(orders[2], tol)))
    which = None
    if path is not None and group_name.strip().upper() == "GXY":
        which = {PATH1.order: "path1", PATH2.order: "path2"}.get(path.order)
    if uniform and which and key in ("SDD", "PCDD2", "PSCPD2"):
        form = path_forms(which, key, p)
        checks.append((f"H2bar matches {which} {key} closed form",
                       equals_zero(orders[2] - form, tol)))
    return VerifyReport(orders, checks)


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------

def _cmd_run(args) -> int:
    fp = FsPath(args.config)
    text = fp.read_text() if fp.is_file() else _bundled(args.config)
    cfg = load_config(text)
    if args.out:
        cfg.output_dir = FsPath(args.out)
    if args.realizations:
        for c in cfg.curves:
            c.n_realizations = args.realizations
    manifest = run(cfg)
    print(f"wrote {len(manifest['files'])} trace file(s) to {cfg.output_dir} "
          f"in {manifest['wall_time_s']} s")
    return EXIT_OK


def _bundled(name: str) -> str:
    p = FsPath(__file__).with_name("configs") / (name if name.endswith(".ini") else name + ".ini")
    if not p.exists():
        raise ConfigError(f"no bundled config {name!r}", "config")
    return p.read_text()


def bundled_configs() -> List[str]:
    return sorted(p.stem for p in (FsPath(__file__).with_name("configs")).glob("*.ini"))


def _cmd_verify(args) -> int:
    path = parse_path(args.path) if args.path else None
    rep = verify(args.protocol, args.group, args.n, args.alpha, args.coupling,
                 _floats(args.shifts) if args.shifts else (), path, args.dt)
    for k, h in enumerate(rep.orders):
        body = format_sum(h).replace("\n", "\n        ") if len(h) else "0"
        print(f"H{k}bar = {body}")
    for desc, ok in rep.checks:
        print(f"{'PASS' if ok else 'FAIL'}  {desc}")
    return EXIT_OK if rep.passed else EXIT_VERIFY


def _cmd_plot(args) -> int:
    traces = []
    for f in args.traces:
        fp = FsPath(f)
        traces.append(read_trace_csv(fp.read_text(), fp.stem))
    svg = plot_svg(traces, title=args.title or "")
    FsPath(args.output).write_text(svg)
    print(f"wrote {args.output}")
    return EXIT_OK


def _cmd_search(args) -> int:
    group = group_from_name(args.group, args.n)
    h0 = build_hamiltonian(SpinChainParams(args.n, args.coupling, args.alpha))
    res = greedy_search(SearchConfig(group, h0, args.dt, args.cycles, args.cap))
    print(res.dash)
    if args.log:
        FsPath(args.log).write_text(res.fitness_csv())
    return EXIT_OK


def _cmd_table(args) -> int:
    group = group_from_name(args.group, args.n)
    table, infeasible = build_rh2_completion_table(group)
    save_completion_table(table, args.output)
    print(f"{len(table)} feasible start(s), {len(infeasible)} infeasible; wrote {args.output}")
    for s in infeasible:
        print("infeasible start", "".join(map(str, s)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ddsim", description=__doc__.split("\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    r = sub.add_parser("run", help="run a config file or a bundled config (fig1_top ...)")
    r.add_argument("config")
    r.add_argument("--out", help="override [output] dir")
    r.add_argument("--realizations", type=int, help="override n_realizations for every curve")
    r.set_defaults(fn=_cmd_run)

    def model_args(p):
        p.add_argument("--group", default="GZY")
        p.add_argument("--n", type=int, default=8, help="number of qubits")
        p.add_argument("--alpha", type=float, default=1.0)
        p.add_argument("--coupling", type=float, default=1.0)

    v = sub.add_parser("verify", help="Magnus orders of one cycle with closed-form checks")
    v.add_argument("protocol", help="PDD, SDD, PCDD2, HALF_PCDD2, PSCPD2, H2 or a dash literal")
    model_args(v)
    v.add_argument("--path", help="group path, e.g. 0,2,1,3")
    v.add_argument("--shifts", help="comma-separated offsets")
    v.add_argument("--dt", type=float, default=1.0)
    v.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("plot", help="SVG chart from trace CSVs")
    p.add_argument("traces", nargs="+")
    p.add_argument("-o", "--output", default="plot.svg")
    p.add_argument("--title")
    p.set_defaults(fn=_cmd_plot)

    s = sub.add_parser("search", help="greedy cycle-by-cycle path search")
    model_args(s)
    s.add_argument("--dt", type=float, default=0.1)
    s.add_argument("--cycles", type=int, default=18)
    s.add_argument("--cap", type=int, default=24)
    s.add_argument("--log", help="write the per-step fitness CSV here")
    s.set_defaults(fn=_cmd_search)

    t = sub.add_parser("table", help="build the RH2 completion table")
    t.add_argument("--group", default="GZY")
    t.add_argument("--n", type=int, default=4)
    t.add_argument("-o", "--output", default="rh2_completions.txt")
    t.set_defaults(fn=_cmd_table)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (OSError, DDSimError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
