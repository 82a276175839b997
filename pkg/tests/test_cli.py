import json

import numpy as np
import pytest

from ddsim.cli import (EXIT_CONFIG, EXIT_OK, EXIT_RESOURCE, EXIT_VERIFY, _bundled,
                       bundled_configs, config_hash, load_config, main, plot_svg, run, verify)
from ddsim.engine import TraceSummary, read_trace_csv
from ddsim.errors import ConfigError
from ddsim.groups import Path

SMALL = """
[system]
n_qubits = 4
[run]
group = GZY
dt = 0.1
horizon = 2.0
n_realizations = 3
seed = 11
[output]
dir = {out}
[curve.PDD]
protocol = PDD
[curve.SRPD]
protocol = SRPD
[curve.EPSCPD2]
protocol = EPSCPD2
"""


def small(tmp_path, extra=""):
    return SMALL.format(out=tmp_path / "o") + extra


@pytest.mark.parametrize("edit,field", [
    (("horizon = 2.0", "horizon = 2.05"), "run.horizon"),
    (("dt = 0.1", "dt = -1"), "run.dt"),
    (("group = GZY", "group = GQQ"), "run.group"),
    (("protocol = SRPD", "protocol = NOPE"), "curve.SRPD.protocol"),
    (("seed = 11", "seed = x"), "run.seed"),
    (("n_qubits = 4", "n_qubits = four"), "system.n_qubits"),
])
def test_config_errors_have_field_paths(tmp_path, edit, field):
    text = small(tmp_path).replace(*edit)
    with pytest.raises(ConfigError) as ei:
        load_config(text)
    assert ei.value.field == field


def test_curve_override_field_path(tmp_path):
    text = small(tmp_path, "[curve.BAD]\nprotocol = PDD\nhorizon = 0.33\n")
    with pytest.raises(ConfigError) as ei:
        load_config(text)
    assert ei.value.field == "curve.BAD.horizon"


def test_unknown_keys(tmp_path):
    with pytest.raises(ConfigError):
        load_config(small(tmp_path).replace("seed = 11", "seed = 11\ncolour = red"))
    with pytest.raises(ConfigError):
        load_config(small(tmp_path, "[curve.X]\nprotocol = PDD\nfoo = 1\n"))


def test_path_resolution(tmp_path):
    cfg = load_config(small(tmp_path, "[curve.P2]\nprotocol = PDD\npath = 0,2,1,3\n"
                                      "[curve.PR]\nprotocol = PDD\npath = random:3\n"))
    by = {c.name: c for c in cfg.curves}
    assert by["P2"].protocol.path == Path((0, 2, 1, 3))
    assert by["PR"].protocol.path.order[0] == 0
    with pytest.raises(ConfigError):
        load_config(small(tmp_path, "[curve.Q]\nprotocol = PDD\npath = 0,2,1\n"))


def test_run_is_byte_identical(tmp_path):
    text = small(tmp_path)
    m1 = run(load_config(text))
    first = {f: (tmp_path / "o" / f).read_bytes() for f in m1["files"]}
    m2 = run(load_config(text))
    assert m1["files"] == m2["files"] == ["PDD.csv", "SRPD.csv", "EPSCPD2.csv"]
    for f, body in first.items():
        assert (tmp_path / "o" / f).read_bytes() == body
    man = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert man["config_sha1"] == config_hash(text) and man["seeds"]["SRPD"] == 11


def test_deterministic_stddev_zero(tmp_path):
    run(load_config(small(tmp_path).replace("n_realizations = 3", "n_realizations = 1")))
    tr = read_trace_csv((tmp_path / "o" / "PDD.csv").read_text())
    assert np.all(tr.stddev == 0.0) and tr.n == 1
    run(load_config(small(tmp_path)))
    tr = read_trace_csv((tmp_path / "o" / "PDD.csv").read_text())
    assert np.all(tr.stddev == 0.0) and tr.n == 3


def test_config_hash_is_git_blob():
    assert config_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a"


def test_difference_and_sweep(tmp_path):
    extra = ("[curve.FA]\nprotocol = PDD\nkind = flip_angle\nepsilon = 0.01\ndifference = true\n"
             "[curve.BS]\nprotocol = CDD\nkind = finite_width\ntau = 0.01\nsweep = beta\n"
             "sweep_values = 0.95, 1.0, 1.05\n")
    m = run(load_config(small(tmp_path, extra)))
    assert "FA_D.csv" in m["files"]
    d = read_trace_csv((tmp_path / "o" / "FA_D.csv").read_text())
    assert d.mean[0] == 0.0
    rows = (tmp_path / "o" / "BS.csv").read_text().splitlines()
    assert rows[0] == "beta_over_pi,mean,stddev,n" and len(rows) == 4


def test_intra_cycle_sampling(tmp_path):
    extra = "[curve.FINE]\nprotocol = PDD\nsampling = intra_cycle\nstride = 1\nsubsteps = 5\n"
    cfg = load_config(small(tmp_path, extra))
    fine = [c for c in cfg.curves if c.name == "FINE"][0]
    assert fine.stride == 1 and fine.substeps == 5


def test_csv_roundtrip_through_run(tmp_path):
    from ddsim.cli import _mc
    from ddsim.engine import PropagatorCache
    cfg = load_config(small(tmp_path))
    c = cfg.curves[1]
    tr = _mc(cfg.h0, c, c.error_model, c.horizon_slots, PropagatorCache(cfg.h0), None)
    back = read_trace_csv(tr.to_csv())
    assert np.max(np.abs(back.mean - tr.mean)) <= 1e-12


def _trace(mean, sd, n, label="T"):
    t = np.linspace(0, 1, len(mean))
    return TraceSummary(t, np.asarray(mean, float), np.asarray(sd, float), n, label)


def test_plot_constant_trace():
    svg = plot_svg([_trace([1, 1, 1], [0, 0, 0], 1)])
    assert svg.count('class="trace"') == 1 and 'class="band"' not in svg
    pts = svg.split('class="trace" points="')[1].split('"')[0].split()
    assert len({p.split(",")[1] for p in pts}) == 1


def test_plot_two_traces_and_band():
    svg = plot_svg([_trace([1, .9], [0, .05], 10, "SRPD"), _trace([1, .5], [0, 0], 10, "CDD")])
    assert svg.count('class="trace"') == 2 and svg.count('class="band"') == 1
    assert ">SRPD<" in svg and ">CDD<" in svg
    single = plot_svg([_trace([1, .9], [0, .05], 1)])
    assert 'class="band"' not in single


def test_plot_empty():
    with pytest.raises(ConfigError):
        plot_svg([])


def test_verify_reports():
    rep = verify("H2", "GZY", 6)
    assert rep.passed and len(rep.checks) == 3
    assert all(len(h) == 0 for h in rep.orders)
    rep = verify("PDD", "GZY", 6, path=Path((0, 1, 2, 3)))
    assert rep.passed and "-Ax" in rep.checks[1][0]
    rep = verify("SDD", "GXY", 6, path=Path((0, 2, 1, 3)), dt=0.1)
    assert rep.passed and "path1 SDD" in rep.checks[-1][0]


def test_verify_failure_exit_code(capsys):
    assert main(["verify", "1123", "--n", "4"]) == EXIT_VERIFY
    assert "FAIL" in capsys.readouterr().out
    assert main(["verify", "H2", "--n", "4"]) == EXIT_OK


def test_exit_codes(tmp_path, capsys):
    assert main(["run", str(tmp_path / "missing.ini")]) == EXIT_CONFIG
    bad = tmp_path / "bad.ini"
    bad.write_text(small(tmp_path).replace("dt = 0.1", "dt = zero"))
    assert main(["run", str(bad)]) == EXIT_CONFIG
    assert "run.dt" in capsys.readouterr().err
    assert main(["search", "--group", "G8", "--n", "8", "--cycles", "1"]) == EXIT_RESOURCE


def test_cli_run_and_plot(tmp_path, capsys):
    cfgf = tmp_path / "c.ini"
    cfgf.write_text(small(tmp_path))
    assert main(["run", str(cfgf), "--realizations", "2"]) == EXIT_OK
    out = tmp_path / "p.svg"
    assert main(["plot", str(tmp_path / "o" / "PDD.csv"), str(tmp_path / "o" / "SRPD.csv"),
                 "-o", str(out)]) == EXIT_OK
    assert out.read_text().startswith("<svg")


def test_cli_search(tmp_path, capsys):
    log = tmp_path / "fit.csv"
    assert main(["search", "--n", "4", "--cycles", "2", "--log", str(log)]) == EXIT_OK
    assert capsys.readouterr().out.strip().startswith("1234-")
    assert log.read_text().startswith("cycle,")


def test_cli_table(tmp_path, capsys):
    out = tmp_path / "t.txt"
    assert main(["table", "-o", str(out)]) == EXIT_OK
    assert "24 feasible" in capsys.readouterr().out
    assert len(out.read_text().splitlines()) == 25


EXPECTED = {"fig1_top", "fig1_bottom", "fig2_left", "fig2_right", "fig3", "fig4",
            "fig5_left", "fig5_right", "fig6", "fig7"}


def test_bundled_configs_present():
    assert set(bundled_configs()) == EXPECTED


@pytest.mark.parametrize("name", sorted(EXPECTED - {"fig4"}))
def test_bundled_configs_load(name):
    cfg = load_config(_bundled(name))
    assert cfg.curves


def test_fig2_right_curves():
    cfg = load_config(_bundled("fig2_right"))
    assert [c.name for c in cfg.curves] == ["CDD", "SCPD", "SRPD", "EPCDD2", "EPSCPD2"]
    assert all(c.n_realizations == 100 for c in cfg.curves)


@pytest.mark.slow
def test_fig4_config_runs_search():
    cfg = load_config(_bundled("fig4"))
    algor = [c for c in cfg.curves if c.protocol.label.startswith("ALGOR")][0]
    assert algor.protocol.stream[:8] == (1, 2, 3, 4, 2, 1, 4, 3)
