import io
import json
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest

from polyconvex.cli import encode, main, selftest


def run(argv):
    out = io.StringIO()
    import contextlib

    with contextlib.redirect_stdout(out):
        rc = main(argv)
    return rc, out.getvalue()


def test_encode():
    assert encode(Fraction(1, 3)) == "1/3"
    assert encode(Fraction(4)) == "4"
    assert encode(0.1) == "0.10000000000000001"
    assert float(encode(np.float64(1) / 3)) == 1 / 3
    assert encode({"a": [np.int64(2), True, None]}) == {"a": [2, True, None]}


def test_exponent_ball():
    rc, out = run(["exponent", "--f", "x1^2+x2^2+1", "--set", "ball:0,0:1"])
    rec = json.loads(out)
    assert rc == 0
    assert (rec["N"], rec["m"], rec["R"], rec["D"], rec["scriptN"]) == (259, "1", "1", "8", "258")


def test_exponent_interval_certified():
    rc, out = run(["exponent", "--f", "x^2+1", "--set", "box:-1:1"])
    rec = json.loads(out)
    assert rc == 0 and rec["N"] == 67 and rec["certified"] is True and rec["method"] == "univariate-sturm"


def test_exponent_not_positive(capsys):
    rc = main(["exponent", "--f", "x1", "--set", "box:-1:1"])
    assert rc == 2
    assert "not positive" in capsys.readouterr().err


def test_parse_error_exit(capsys):
    rc = main(["exponent", "--f", "x1 +* 2", "--set", "box:-1:1"])
    assert rc == 2 and "offset" in capsys.readouterr().err


def test_certify():
    rc, out = run(["certify", "--f", "(1+x1^2)^2", "--interval=-1,1"])
    assert rc == 0 and json.loads(out) == {"convex": True, "method": "sturm", "N": None}
    rc, out = run(["certify", "--f", "(x-4)^2+1", "--interval=0,4", "--N", "1"])
    assert json.loads(out)["convex"] is False
    rc, out = run(["certify", "--f", "3 - 2*x", "--interval=-1,1", "--weak"])
    assert json.loads(out)["convex"] is True


def test_minimize():
    rc, out = run(["minimize", "--f", "x1+2", "--set", "box:-0.5:0.5", "--a0", "0"])
    lines = [json.loads(line) for line in out.splitlines()]
    summary = lines[-1]["summary"]
    assert rc == 0
    assert abs(float(summary["a_star"][0]) + 0.5) <= 1e-3
    assert summary["critical"] is True and summary["status"] == "converged"
    assert [r["nu"] for r in lines[:-1]] == list(range(len(lines) - 1))


def test_minimize_verify_and_cap():
    rc, out = run(["minimize", "--f", "x1+2", "--set", "box:-0.5:0.5", "--a0", "0", "--verify"])
    first = json.loads(out.splitlines()[0])
    assert rc == 0 and first["lemma2_pass"] is True
    rc, out = run(["minimize", "--f", "x1+2", "--set", "box:-0.5:0.5", "--a0", "0", "--max-iter", "3"])
    assert rc == 1 and json.loads(out.splitlines()[-1])["summary"]["status"] == "max-iterations"


def test_shift():
    rc, out = run(["shift", "--f", "x+2", "--g", "1-x^2", "--R", "1", "--epsilon", "1/2", "--mu", "2"])
    rec = json.loads(out)
    assert rc == 0
    assert rec["spec"] == {"M": "3", "A": "2", "delta": "1/144", "N": 290017}
    assert all(rec["report"]["flags"].values())
    assert rec["report"]["points"] == {"X": 1001, "ball": 1001}


def test_shift_needs_mode(capsys):
    with pytest.raises(SystemExit):
        main(["shift", "--f", "x+2", "--g", "1-x^2", "--R", "1", "--epsilon", "1/2"])


def test_selftest():
    res = selftest(3, cases=10)
    assert all(a == b for a, b in res.values())
    rc, out = run(["selftest", "--seed", "1"])
    assert rc == 0 and json.loads(out)["ok"] is True


def test_out_file_and_global_options(tmp_path):
    path = tmp_path / "o.json"
    rc = main(["--mode", "double", "exponent", "--f", "x^2+1", "--set", "box:-1:1", "--out", str(path)])
    rec = json.loads(path.read_text())
    assert rc == 0 and rec["D"] == "4" and rec["N"] >= 67


@pytest.mark.parametrize("argv", [
    ["exponent", "--f", "x1^2+x2^2+1", "--set", "ball:0,0:1"],
    ["minimize", "--f", "(x1-1)^2+(x2-1)^2+1", "--set", "ball:0,0:1/2", "--a0", "0,0"],
    ["selftest", "--seed", "7"],
])
def test_byte_identical_output(argv):
    cmd = [sys.executable, "-m", "polyconvex.cli", *argv]
    a = subprocess.run(cmd, capture_output=True, check=False).stdout
    b = subprocess.run(cmd, capture_output=True, check=False).stdout
    assert a and a == b
