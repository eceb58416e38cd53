import json
import subprocess
import sys
from fractions import Fraction as Q

import pytest

from threepoint import cli
from threepoint.bounds import Certificate, DualProgram


def run(argv, capsys):
    rc = cli.dispatch(argv)
    out = capsys.readouterr()
    return rc, out.out, out.err


def test_energy(capsys):
    rc, out, _ = run(["energy", "--code", "rhombic7", "--f", "t"], capsys)
    assert rc == 0 and out.strip() == "14/3"
    rc, out, _ = run(["energy", "--code", "rhombic7", "--f", "t^3*(t-1/9)^2*(t-1/3)"], capsys)
    assert out.strip() == "0"


def test_orthoplex(capsys):
    rc, out, _ = run(["orthoplex", "--code", "antipodal22_S3"], capsys)
    assert rc == 0 and out.startswith("sharp at 1/2")
    rc, out, _ = run(["orthoplex", "--code", "icosa6"], capsys)
    assert rc == 0 and "not applicable" in out


def test_codes_and_basis(capsys):
    rc, out, _ = run(["codes", "list"], capsys)
    assert rc == 0 and "rhombic7" in out
    rc, out, _ = run(["codes", "verify", "rhombic7", "--t", "3/5"], capsys)
    assert rc == 0 and "satisfies" in out
    rc, out, _ = run(["basis", "--code", "rhombic7"], capsys)
    assert rc == 0 and out.count("\n[") == 7 and "T = {0x3, 1/9x2, 1/3x2}" in out
    rc, out, _ = run(["design", "--code", "icosaVF16", "--kmax", "4"], capsys)
    assert out.strip() == "2"
    rc, out, _ = run(["bound", "two-point", "--N", "7", "--f", "t"], capsys)
    assert out.strip() == "14/3"


def test_exit_codes(capsys):
    with pytest.raises(SystemExit) as e:
        cli.dispatch(["bound", "round", "--program", "x.json"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        cli.dispatch(["codes", "show"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        cli.dispatch(["nonsense"])
    assert e.value.code == 2
    rc, _, _ = run(["codes", "verify", "rhombic7", "--t", "1/3"], capsys)
    assert rc == 1
    rc, _, err = run(["energy", "--code", "no_such_code", "--f", "t"], capsys)
    assert rc == 1 and err.startswith("error:")


def test_precision_environment(monkeypatch):
    monkeypatch.setenv("THREEPOINT_PRECISION", "96")
    a = cli.build_parser().parse_args(["bound", "solve", "--program", "p.json"])
    assert a.precision == 96
    monkeypatch.setenv("THREEPOINT_PRECISION", "lots")
    with pytest.raises(SystemExit):
        cli.build_parser()


def test_output_is_byte_stable(tmp_path):
    def go(*args):
        return subprocess.run([sys.executable, "-m", "threepoint", *args], capture_output=True, check=True).stdout

    assert go("energy", "--code", "rhombic7", "--f", "t^2") == go("energy", "--code", "rhombic7", "--f", "t^2")
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        go("bound", "build", "--N", "4", "--f", "t^2", "--blocks", "0:1,1:1", "--sos-degree", "2", "--out", str(path))
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("command", [[], ["energy"], ["codes"], ["design"], ["orthoplex"], ["basis"], ["bound"],
                                     ["prove-universal"]])
def test_help(command, capsys):
    with pytest.raises(SystemExit) as e:
        cli.dispatch(command + ["--help"])
    assert e.value.code == 0
    assert "usage: threepoint" in capsys.readouterr().out


def test_small_solve_and_export(tmp_path, capsys):
    prog = tmp_path / "p.json"
    rc, _, _ = run(["bound", "build", "--N", "4", "--f", "t^2", "--blocks", "0:1,1:1", "--sos-degree", "2",
                    "--out", str(prog)], capsys)
    assert rc == 0
    sol = tmp_path / "sol.json"
    rc, out, _ = run(["bound", "solve", "--program", str(prog), "--precision", "128", "--out", str(sol)], capsys)
    assert rc == 0 and len(json.loads(sol.read_text())["lambda"]) == 11
    rc, out, _ = run(["bound", "round", "--program", str(prog), "--solution", str(sol), "--digits", "8",
                      "--out", str(tmp_path / "c.json")], capsys)
    assert rc == 0 and out.startswith("bound ")
    dat = tmp_path / "p.dat-s"
    rc, out, _ = run(["bound", "solve", "--program", str(prog), "--export-sdpa", str(dat)], capsys)
    assert rc == 0 and dat.read_text().splitlines()[1] == "11"


def test_build_and_certify_roundtrip(rhombic_t2, tmp_path, capsys):
    prog, cert = rhombic_t2
    path = tmp_path / "prog.json"
    rc, _, _ = run(["bound", "build", "--code", "rhombic7", "--f", "t^2", "--eps", "1/1000", "--out", str(path)],
                   capsys)
    assert rc == 0
    assert DualProgram.from_json(json.loads(path.read_text())).fingerprint() == prog.fingerprint()
    cpath = tmp_path / "cert.json"
    cpath.write_text(cert.dumps())
    report = tmp_path / "report.json"
    rc, out, _ = run(["bound", "certify", "--program", str(path), "--cert", str(cpath), "--target", "38/27",
                      "--report", str(report)], capsys)
    assert rc == 0 and "sharp        yes" in out
    assert json.loads(report.read_text())["sharp"] is True
    bad = Certificate.from_json(cert.to_json())
    bad.c = bad.c + Q(1, 10 ** 9)
    cpath.write_text(bad.dumps())
    rc, out, _ = run(["bound", "certify", "--program", str(path), "--cert", str(cpath), "--target", "38/27"], capsys)
    assert rc == 1 and "identity     FAILED" in out
