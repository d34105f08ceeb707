import json
import re

import pytest

from dstm.cli import main
from dstm.montecarlo import CSV_COLUMNS


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def field(text, name):
    m = re.search(rf"^{name}: ([-\d.]+)", text, re.M)
    return float(m.group(1))


@pytest.mark.parametrize(
    "argv, gain, dec, space",
    [
        (["--scheme", "qo4", "--m", "4", "--theta", "theorem1"], 2.83, 2, 8),
        (["--scheme", "o4", "--sphere", "builtin:3x16"], 1.55, 2, 16),
        (["--scheme", "o4-psk", "--psk", "4"], 2.67, 3, 4),
    ],
)
def test_gain(capsys, argv, gain, dec, space):
    code, out, _ = run(capsys, "gain", *argv)
    assert code == 0
    assert field(out, "coding gain") == pytest.approx(gain, abs=0.005)
    assert field(out, r"coding gain \(closed form\)") == pytest.approx(gain, abs=0.005)
    assert field(out, "parallel decoders") == dec
    assert field(out, "search space per decoder") == space
    assert field(out, "diversity rank") == 4


def test_gain_theta_forms(capsys):
    _, a, _ = run(capsys, "gain", "--scheme", "qo4", "--m", "8", "--theta", "pi/8")
    _, b, _ = run(capsys, "gain", "--scheme", "qo4", "--m", "8", "--theta", "0.39269908169872414")
    assert field(a, "coding gain") == field(b, "coding gain") == pytest.approx(1.17, abs=0.005)


def test_gain_export(capsys, tmp_path):
    code, _, _ = run(capsys, "gain", "--scheme", "qo4", "--m", "4", "--export", str(tmp_path / "cb.json"))
    assert code == 0
    assert json.loads((tmp_path / "cb.json").read_text())["size"] == 64


@pytest.mark.parametrize(
    "argv",
    [
        ["gain", "--scheme", "qo4"],
        ["gain", "--scheme", "o4", "--m", "4"],
        ["gain", "--scheme", "o4-psk", "--psk", "4", "--theta", "pi/4"],
        ["gain", "--scheme", "qo4", "--m", "4", "--theta", "nonsense"],
        ["gain", "--scheme", "o4", "--sphere", "builtin:3x32"],
        ["gain", "--scheme", "o4", "--sphere", "/no/such/file"],
        ["simulate"],
        ["simulate", "--scheme", "qo4", "--m", "4", "--blocks", "10"],
        ["simulate", "--scheme", "qo4", "--m", "4", "--snr", "a:b"],
        ["simulate", "--config", "/no/such.json"],
        ["design-sphere", "-d", "3", "-n", "1"],
    ],
)
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert "error" in err


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["gain", "--scheme", "bogus"])
    assert exc.value.code == 2


def test_design_sphere(capsys, tmp_path):
    out_file = tmp_path / "s.txt"
    code, out, _ = run(capsys, "design-sphere", "-d", "3", "-n", "2", "--restarts", "1", "-o", str(out_file))
    assert code == 0
    assert re.search(r"min angle: 180\.0000 deg", out)
    assert len([l for l in out_file.read_text().splitlines() if not l.startswith("#")]) == 2
    code, out, _ = run(capsys, "design-sphere", "-d", "3", "-n", "4", "--restarts", "4", "--iterations", "500")
    assert float(re.search(r"min angle: ([\d.]+)", out).group(1)) >= 109.0
    code, _, _ = run(capsys, "design-sphere", "-d", "3", "-n", "4", "-o", str(tmp_path / "no" / "x.txt"))
    assert code == 2


def test_design_sphere_3x8(capsys):
    code, out, _ = run(capsys, "design-sphere", "-d", "3", "-n", "8", "--seed", "7")
    assert code == 0
    assert float(re.search(r"min angle: ([\d.]+)", out).group(1)) >= 74.0


def test_design_sphere_env_seed(capsys, monkeypatch):
    monkeypatch.setenv("DSTM_SEED", "5")
    _, a, _ = run(capsys, "design-sphere", "-d", "3", "-n", "5", "--restarts", "2", "--iterations", "50")
    _, b, _ = run(capsys, "design-sphere", "-d", "3", "-n", "5", "--restarts", "2", "--iterations", "50", "--seed", "5")
    assert "seed=5" in a and a == b
    monkeypatch.setenv("DSTM_SEED", "x")
    assert run(capsys, "design-sphere", "-d", "3", "-n", "5")[0] == 2


def test_verify(capsys):
    code, out, _ = run(capsys, "verify", "--trials", "500")
    assert code == 0
    for M in (4, 6, 8, 10, 12):
        assert re.search(rf"M={M}\s+best 1pi/M\s.*PASS", out)
    for M in (3, 5, 7, 9, 11):
        assert re.search(rf"M={M}\s+best 0.5pi/M, 1.5pi/M\s.*PASS", out)
    assert "mismatches 0" in out and "FAIL" not in out


def test_tables(capsys):
    code, out, _ = run(capsys, "tables")
    assert code == 0
    assert re.search(r"pairs M=8 theta=pi/8\s+1\.17\d*\s+1\.17 .*pass", out)
    assert re.search(r"rate-3/4 QO-STBC.*1\.56\d*\s+1\.56 .*pass", out)
    assert out.count("external (not implemented)") == 2
    assert "FAIL" not in out


def test_simulate_inline(capsys, tmp_path):
    argv = ["simulate", "--scheme", "qo4", "--m", "4", "--snr", "60", "--blocks", "20000",
            "--seed", "3", "--out", str(tmp_path / "a.csv")]
    assert run(capsys, *argv)[0] == 0
    lines = (tmp_path / "a.csv").read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    row = dict(zip(CSV_COLUMNS, lines[1].split(",")))
    assert float(row["bler"]) <= 1e-4
    manifest = json.loads((tmp_path / "a.json").read_text())
    assert manifest["config"]["seed"] == 3
    assert manifest["points"][0]["blocks"] == int(row["blocks"])
    # repeat run is byte identical
    first = (tmp_path / "a.csv").read_bytes()
    run(capsys, *argv)
    assert (tmp_path / "a.csv").read_bytes() == first


def test_simulate_config_and_override(capsys, tmp_path):
    cfg = {"snr_db": [4, 8], "max_blocks": 2000, "max_errors": 0, "seed": 1,
           "runs": [{"scheme": "qo4", "m": 4}, {"scheme": "o4-psk", "psk": 4, "snr_db": "6:10:4"}]}
    (tmp_path / "c.json").write_text(json.dumps(cfg))
    out_dir = tmp_path / "out"
    code, _, _ = run(capsys, "simulate", "--config", str(tmp_path / "c.json"), "--out-dir", str(out_dir),
                     "--blocks", "3000", "--plot", str(tmp_path / "f.png"))
    assert code == 0
    qo = (out_dir / "qo4-M4.csv").read_text().splitlines()
    ps = (out_dir / "o4-psk4.csv").read_text().splitlines()
    assert [l.split(",")[3] for l in qo[1:]] == ["4.0", "8.0"]
    assert [l.split(",")[3] for l in ps[1:]] == ["6.0", "10.0"]
    # flag beats file: 3000 blocks requested, rounded up to whole frames
    assert all(int(l.split(",")[4]) == 3000 for l in qo[1:])
    assert (tmp_path / "f.png").stat().st_size > 0


def test_simulate_recipe_and_plot(capsys, tmp_path):
    code, _, _ = run(capsys, "simulate", "--recipe", "tx8", "--snr", "14", "--blocks", "1000",
                     "--out-dir", str(tmp_path))
    assert code == 0
    csvs = sorted(p.name for p in tmp_path.glob("*.csv"))
    assert csvs == ["o8-4x64.csv", "o8-psk8.csv", "qo8-M8.csv"]
    code, _, _ = run(capsys, "plot", *map(str, sorted(tmp_path.glob("*.csv"))), "-o", str(tmp_path / "p.png"))
    assert code == 0
    assert (tmp_path / "p.png").read_bytes()[:4] == b"\x89PNG"
