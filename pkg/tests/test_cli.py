import json
import subprocess
import sys

import pytest

from qmock.cli import main


def run(*args, env=None):
    """The CLI in a subprocess, for end-to-end exit codes and exact bytes."""
    proc = subprocess.run(
        [sys.executable, "-m", "qmock", *args], capture_output=True, text=True, env=env, timeout=600
    )
    return proc.returncode, proc.stdout, proc.stderr


def call(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_list_json_contains_fine(capsys):
    code, out, _ = call(capsys, "list", "--json")
    assert code == 0
    entries = json.loads(out)
    fine = [e for e in entries if e["id"] == "fine"]
    assert len(fine) == 1 and fine[0]["ref"]
    assert [e["id"] for e in entries] == sorted(e["id"] for e in entries)
    kinds = {e["kind"] for e in entries}
    assert kinds == {"identity", "radial", "conjecture"}


def test_list_filter(capsys):
    code, out, _ = call(capsys, "list", "--filter", "mt8-*", "--json")
    ids = [e["id"] for e in json.loads(out)]
    assert ids and all(i.startswith("mt8-") for i in ids)
    assert {"mt8-bs1", "mt8-bs2", "mt8-p1", "mt8-p2", "mt8-s1", "mt8-s4"} <= set(ids)


def test_list_empty_registry(tmp_path, capsys):
    empty = tmp_path / "empty.qid"
    empty.write_text("# nothing here\n")
    code, out, _ = call(capsys, "list", "--registry", str(empty), "--json")
    assert code == 0
    assert json.loads(out) == []


def test_verify_json_schema(tmp_path, capsys):
    path = tmp_path / "out.json"
    code, _, _ = call(capsys, "verify", "--id", "fine", "--id", "g5-t1", "--order", "30", "--json", str(path))
    assert code == 0
    data = json.loads(path.read_text())
    assert set(data) == {"runs", "summary"}
    assert data["summary"] == {"pass": 2, "fail": 0, "error": 0}
    for run_ in data["runs"]:
        assert {"id", "mode", "order", "status", "first_mismatch", "elapsed_ms", "tuples"} <= set(run_)
        assert run_["first_mismatch"] is None
    sampled = [r for r in data["runs"] if r["id"] == "g5-t1"][0]
    assert len(sampled["tuples"]) >= 3


def test_verify_perturbed_fails(capsys):
    code, out, _ = call(capsys, "verify", "--id", "fine", "--order", "30", "--perturb", "15", "--json")
    assert code == 1
    data = json.loads(out)
    assert data["runs"][0]["status"] == "fail"
    assert data["runs"][0]["first_mismatch"]["exponent"] == 15


def test_verify_is_byte_identical():
    args = ("verify", "--filter", "t3-*", "--order", "30", "--json", "--no-timing")
    a = run(*args)
    b = run(*args, "--parallelism", "2")
    assert a[0] == b[0] == 0
    assert a[1] == b[1]


def test_radial_json(capsys):
    code, out, _ = call(
        capsys, "radial", "--case", "rad-phi3", "--root-order", "4", "--radii", "0.5,0.75,0.875", "--json"
    )
    data = json.loads(out)
    assert code in (0, 1)
    assert {"radii", "differences", "target", "final_residual", "trend"} <= set(data)
    assert data["radii"] == ["0.5", "0.75", "0.875"]
    assert data["target"]["re"] == "0"
    assert float(data["target"]["im"]) == -2
    assert all(set(d) == {"re", "im"} and isinstance(d["re"], str) for d in data["differences"])


def test_env_and_config_precedence(tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("precision_bits = 100  # from the file\n")
    base = ("radial", "--case", "rad-f3", "--root-order", "2", "--radii", "0.5", "--json")
    env = {"PATH": "/usr/bin:/bin", "PYTHONPATH": ":".join(sys.path)}
    _, out, _ = run(*base, "--config", str(conf), env=env)
    assert json.loads(out)["bits"] == 100
    env[("QMOCK_PRECISION_BITS")] = "150"
    _, out, _ = run(*base, "--config", str(conf), env=env)
    assert json.loads(out)["bits"] == 150
    _, out, _ = run(*base, "--config", str(conf), "--bits", "180", env=env)
    assert json.loads(out)["bits"] == 180


def test_series_tables(capsys):
    code, out, _ = call(capsys, "series", "--name", "psi3", "--order", "2")
    assert code == 0
    lines = [line.split() for line in out.strip().splitlines()]
    assert lines[-2:] == [["0", "0"], ["1", "1"]]
    code, out, _ = call(capsys, "series", "--expr", "1/poch(q;q;inf)", "--order", "6")
    assert [line.split()[1] for line in out.strip().splitlines()[-6:]] == ["1", "1", "2", "3", "5", "7"]


def test_series_f3(capsys):
    code, out, _ = call(capsys, "series", "--name", "f3", "--order", "8")
    assert [line.split()[1] for line in out.strip().splitlines()[-8:]] == ["1", "1", "-2", "3", "-3", "3", "-5", "7"]


def test_conjecture_max_k_zero(capsys):
    code, out, _ = call(capsys, "conjecture", "--id", "conj-psi-q4", "--max-k", "0", "--json")
    assert code == 0
    data = json.loads(out)
    assert data["label"] == "CONJECTURE"
    assert len(data["rows"]) == 1


@pytest.mark.parametrize(
    "args, expected",
    [
        (("verify", "--id", "fine", "--order", "20"), 0),
        (("verify", "--id", "fine", "--order", "20", "--perturb", "10"), 1),
        (("verify", "--id", "nosuch"), 2),
        (("verify", "--id", "fine", "--order", "-3"), 2),
        (("verify", "--id", "fine", "--bits", "32"), 2),
        (("verify", "--id", "fine", "--parallelism", "0"), 2),
        (("radial", "--case", "rad-phi3", "--root-order", "3"), 2),
        (("radial", "--case", "rad-nosuch", "--root-order", "4"), 2),
        (("conjecture", "--id", "nosuch"), 2),
        (("conjecture", "--id", "conj-s0-odd", "--max-k", "1"), 0),
        (("series", "--expr", "poch(q;"), 2),
        (("frobnicate",), 2),
        (("list",), 0),
    ],
)
def test_exit_codes(args, expected):
    code, _, err = run(*args)
    assert code == expected, err
    if args[:3] == ("verify", "--id", "nosuch"):
        assert "unknown identity" in err


def test_bad_config_key(tmp_path):
    conf = tmp_path / "bad.conf"
    conf.write_text("colour = blue\n")
    assert run("list", "--config", str(conf))[0] == 2
