import csv
import json
import math
import subprocess
import sys

import pytest

from spectral_clt.cli import main


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


SMALL = {
    "clt": {"process": "ma1", "n": 256, "replicates": 200, "thetas": [2.0]},
    "cross": {"process": "ma1", "n": 256, "replicates": 200, "thetas": [1.0, 2.0]},
    "annealed": {"process": "ma1", "n": 256, "replicates": 200},
    "periodogram": {"process": "iid_gauss", "n": 256, "replicates": 200, "thetas": [2.0]},
    "invariance": {"process": "iid_gauss", "n": 256, "replicates": 100, "n_grid": 16},
    "variance": {"process": "ma1", "n": 512, "replicates": 200, "thetas": [2.0]},
    "diag": {"process": "two_state(0.25)", "n": 256, "replicates": 100, "thetas": [1.0]},
    "generate": {"process": "ma1", "n": 64, "master_seed": 3},
    "spectrum": {"process": "ma1", "grid": 8},
}


@pytest.mark.parametrize("command", sorted(SMALL))
def test_every_subcommand_is_byte_identical(tmp_path, command):
    conf = write(tmp_path, "c.json", SMALL[command])
    a, b = tmp_path / "a.out", tmp_path / "b.out"
    code_a = main([command, "--config", conf, "--out", str(a), "--workers", "1"])
    code_b = main([command, "--config", conf, "--out", str(b), "--workers", "2"])
    assert code_a == code_b and code_a in (0, 1)
    assert a.read_bytes() == b.read_bytes()
    assert a.stat().st_size > 0


def test_spectrum_csv(tmp_path):
    conf = write(tmp_path, "c.json", {"process": "ma1", "grid": 4})
    out = tmp_path / "g.csv"
    assert main(["spectrum", "--config", conf, "--out", str(out)]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["theta", "g"]
    assert len(rows) == 5
    for theta, g in rows[1:]:
        assert float(g) == pytest.approx(1.25 + math.cos(float(theta)))


def test_generate_csv(tmp_path, capsys):
    conf = write(tmp_path, "c.json", {"process": "iid_gauss", "n": 5})
    assert main(["generate", "--config", conf]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "index,value" and len(lines) == 6


def test_report_echoes_override(tmp_path, capsys):
    conf = write(tmp_path, "c.json", SMALL["clt"])
    code = main(["clt", "--config", conf, "--override", "n=512", "--override", "tolerances.var_rel=0.2",
                 "--seed", "9"])
    report = json.loads(capsys.readouterr().out)
    assert code in (0, 1)
    params = report["parameters"]
    assert params["n"] == 512 and params["master_seed"] == 9
    assert params["tolerances"]["var_rel"] == 0.2
    assert params["replicates"] == 200 and params["thetas"] == [2.0]


def test_exit_codes(tmp_path, capsys):
    bad = write(tmp_path, "bad.json", {"process": "ma1", "thetas": [0.0]})
    assert main(["clt", "--config", bad]) == 2
    assert "theta=0 excluded" in capsys.readouterr().err
    broken = write(tmp_path, "broken.json", '{"process": ')
    assert main(["clt", "--config", broken]) == 2
    assert main(["clt", "--config", str(tmp_path / "missing.json")]) == 2
    ok = write(tmp_path, "ok.json", SMALL["diag"])
    assert main(["diag", "--config", ok]) == 0
    failing = write(tmp_path, "f.json", {**SMALL["diag"], "tolerances": {"decay_factor": 0.0}})
    assert main(["diag", "--config", failing]) == 1
    assert main(["suite", "--override", "colour=1"]) == 2
    assert main(["diag", "--config", ok, "--workers", "0"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["clt"])
    assert exc.value.code == 2


def test_summary_on_stderr(tmp_path, capsys):
    conf = write(tmp_path, "c.json", SMALL["diag"])
    main(["diag", "--config", conf])
    err = capsys.readouterr().err
    assert "PASS theta0.decay" in err


def test_workers_env(tmp_path, monkeypatch):
    monkeypatch.setenv("SPECTRAL_CLT_WORKERS", "2")
    conf = write(tmp_path, "c.json", SMALL["cross"])
    out = tmp_path / "r.json"
    assert main(["cross", "--config", conf, "--out", str(out)]) in (0, 1)


def test_console_entry_point(tmp_path):
    conf = write(tmp_path, "c.json", SMALL["spectrum"])
    proc = subprocess.run([sys.executable, "-m", "spectral_clt", "spectrum", "--config", conf],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("theta,g\n")
