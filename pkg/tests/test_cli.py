import json
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from algturan import cli
from algturan.hypergraph import read_hgr

BASE = ["--model", "A", "--r", "2", "--s", "2", "--q", "5", "--h", "2", "--seed", "7"]


def test_construct_is_deterministic(tmp_path):
    a, b = tmp_path / "a.hgr", tmp_path / "b.hgr"
    assert cli.main(["construct", *BASE, "--out", str(a)]) == 0
    assert cli.main(["construct", *BASE, "--threads", "2", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    g = read_hgr(a)
    assert (g.n, g.r, g.layers) == (25, 2, 2)


def test_lemma22_prints_exact(capsys, tmp_path):
    out = tmp_path / "l.json"
    code = cli.main(["lemma22", "--q", "11", "--r", "2", "--t", "2", "--d", "8", "--usize", "2", "--samples", "2000", "--out", str(out)])
    assert code == 0
    assert "exact P = 11^-2 = 1/121" in capsys.readouterr().out
    doc = json.loads(out.read_text())
    assert doc["rank"] == 2 and doc["guards_hold"]


def test_lemma22_strict_guard_failure(capsys):
    code = cli.main(["lemma22", "--q", "3", "--r", "2", "--t", "1", "--d", "4", "--usize", "3", "--samples", "100", "--strict", "true"])
    assert code == 2


def test_usage_errors(capsys):
    assert cli.main(["bogus"]) == 2
    assert cli.main(["construct", "--model", "A", "--r", "2", "--q", "5"]) == 2  # no part sizes
    assert cli.main(["construct", *BASE, "--format", "xml"]) == 2
    assert cli.main(["construct", "--model", "A", "--r", "2", "--s", "2", "--q", "6"]) == 2
    assert cli.main(["expect", *BASE, "--trials", "x"]) == 2
    err = capsys.readouterr().err
    assert "'trials'" in err and "'s'" in err


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# model A at q=5\nmodel=A\nr=2\ns=2\nq=5\nh=2\nseed=3\ntrials=4\n")
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    assert cli.main(["expect", "--config", str(cfg), "--out", str(out1)]) == 0
    assert cli.main(["expect", "--config", str(cfg), "--seed", "4", "--out", str(out2)]) == 0
    d1, d2 = json.loads(out1.read_text()), json.loads(out2.read_text())
    assert d1["trials"] == 4 and d1["master_seed"] == 3 and d2["master_seed"] == 4


def test_config_errors_name_fields(tmp_path):
    with pytest.raises(cli.ConfigError, match="'h'"):
        cli.parse_config("h=two\n")
    with pytest.raises(cli.ConfigError, match="'colour'"):
        cli.parse_config("colour=red\n")
    bad = tmp_path / "bad.cfg"
    bad.write_text("strict=maybe\n")
    assert cli.main(["expect", "--config", str(bad)]) == 2


configs = st.builds(
    cli.RunConfig,
    model=st.sampled_from([None, "A", "B", "C"]),
    r=st.integers(2, 5),
    s=st.one_of(st.none(), st.lists(st.integers(1, 4), min_size=1, max_size=3).map(tuple)),
    q=st.one_of(st.none(), st.sampled_from([2, 3, 4, 5, 9])),
    degree_override=st.one_of(st.none(), st.integers(0, 20)),
    thresholds=st.lists(st.integers(1, 99), max_size=4).map(tuple),
    strict=st.booleans(),
    certify=st.booleans(),
    out=st.one_of(st.none(), st.sampled_from(["r.json", "dir/x.csv"])),
    format=st.sampled_from(["json", "csv"]),
)


@settings(max_examples=100)
@given(configs)
def test_config_round_trip(cfg):
    assert cli.parse_config(cli.serialize_config(cfg)) == cfg


def test_analyze_and_reports(tmp_path):
    hgr = tmp_path / "g.hgr"
    cli.main(["construct", *BASE, "--out", str(hgr)])
    cert = tmp_path / "c.json"
    assert cli.main(["analyze", *BASE, "--input", str(hgr), "--threshold", "4", "--out", str(cert)]) == 0
    doc = json.loads(cert.read_text())
    assert doc["certificate"]["certified"] is True
    assert doc["graph"].startswith("HGR v1\n")
    csv_out = tmp_path / "d.csv"
    assert cli.main(["dichotomy", *BASE, "--trials", "12", "--format", "csv", "--out", str(csv_out)]) == 0
    assert csv_out.read_text().startswith("size,frequency\n")
    mom = tmp_path / "m.json"
    assert cli.main(["moments", *BASE, "--h", "1", "--q-list", "3,5", "--trials", "10", "--out", str(mom)]) == 0
    assert [m["q"] for m in json.loads(mom.read_text())] == [3, 5]
    sc = tmp_path / "s.json"
    assert cli.main(["scaling", *BASE, "--h", "1", "--q-list", "3,5", "--trials", "3", "--out", str(sc)]) == 0
    assert json.loads(sc.read_text())["target"] == 1.5
    assert cli.main(["scaling", *BASE, "--q-list", "5"]) == 2


def test_only_declared_outputs_written(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    out = tmp_path / "only.json"
    cli.main(["expect", *BASE, "--trials", "2", "--out", str(out)])
    assert sorted(p.name for p in tmp_path.iterdir()) == ["only.json"]


def test_module_entry_point(tmp_path):
    res = subprocess.run(
        [sys.executable, "-m", "algturan", "verify", "--only", "1"],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0
    assert res.stdout.startswith("[PASS]  1 ")
