import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from relucalc import load, realize, save
from relucalc.cli import EXIT_CHECK, EXIT_IO, EXIT_OK, EXIT_USAGE, main
from relucalc.constructions import build_abs_sum


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_build_identity(capsys):
    code, out, _ = run(capsys, "build", "identity", "--d", "1")
    assert code == EXIT_OK and out.strip() == "dims=(1,2,1) params=7"


def test_build_clip(capsys):
    code, out, _ = run(capsys, "build", "clip", "--u", "-1", "--v", "1", "--n", "3")
    assert code == EXIT_OK and out.strip().endswith("params=36")


def test_build_max_and_eval(capsys, tmp_path):
    path = tmp_path / "m8.json"
    code, out, _ = run(capsys, "build", "max", "--d", "8", "-o", str(path))
    assert code == EXIT_OK and "params=" in out
    assert load(path).dims[0] == 8 and load(path).dims[-1] == 1
    code, out, _ = run(capsys, "eval", str(path), "1,5,2,0,0,0,0,0")
    assert code == EXIT_OK and out.strip() == "5"


def test_eval_identity_echoes(capsys, tmp_path):
    path = tmp_path / "i.json"
    run(capsys, "build", "identity", "--d", "3", "-o", str(path))
    code, out, _ = run(capsys, "eval", str(path), "--x=-1.5,0.25,3")
    assert code == EXIT_OK and out.strip() == "-1.5,0.25,3"


def test_eval_abs_sum_fixture(capsys, tmp_path):
    path = tmp_path / "fig.json"
    save(build_abs_sum(), path)
    code, out, _ = run(capsys, "eval", str(path), "--x=1,-2,3")
    assert code == EXIT_OK and out.strip() == "6"


@pytest.mark.parametrize(
    "argv",
    [
        ["build", "square", "--R", "2", "--eps", "0.01"],
        ["build", "prod", "--d", "3", "--R", "1.5", "--eps", "0.05"],
        ["build", "pipeline", "--d", "2", "--R", "1", "--eps", "0.2", "--pipeline", "cw:sin|rprod"],
        ["build", "interp", "--knots", "0,1,3", "--values", "2,-1,4"],
        ["build", "affine", "--weights", "1,2;3,4", "--bias", "0.5,-0.5"],
    ],
)
def test_json_round_trip_is_bitwise(capsys, tmp_path, argv):
    from relucalc.catalog import get_construction
    from relucalc.cli import _params, build_parser

    path = tmp_path / "net.json"
    code, _, _ = run(capsys, *argv, "-o", str(path))
    assert code == EXIT_OK
    in_process = get_construction(argv[1]).build(_params(build_parser().parse_args(argv)))
    net = load(path)
    x = np.random.default_rng(1).uniform(-1, 1, size=net.input_dim)
    want = realize(in_process, x)
    code, out, _ = run(capsys, "eval", str(path), "--x=" + ",".join(repr(float(v)) for v in x))
    assert code == EXIT_OK
    got = np.array([float(v) for v in out.strip().split(",")])
    assert got.tobytes() == want.tobytes()


def test_info(capsys, tmp_path):
    path = tmp_path / "fig.json"
    save(build_abs_sum(), path)
    code, out, _ = run(capsys, "info", str(path))
    assert code == EXIT_OK
    assert out.splitlines() == ["dims=(3,6,3,1)", "length=3", "params=49"]


def test_verify_passes_and_fails(capsys):
    code, out, _ = run(capsys, "verify", "loclip1d", "--fn", "sin", "--R", "1", "--eps", "0.1", "--seed", "3")
    assert code == EXIT_OK and "pass error" in out
    code, out, _ = run(capsys, "verify", "max", "--d", "4", "--seed", "3", "--samples", "500", "--pairs", "500")
    assert code == EXIT_OK and "params=55" in out


def test_verify_requires_seed(capsys):
    code, _, err = run(capsys, "verify", "max", "--d", "4")
    assert code == EXIT_USAGE and "--seed" in err


def test_sweep_running_max(capsys):
    code, out, err = run(capsys, "sweep", "running_max", "--d", "2,4,8,16", "--eps", "0.1", "--seed", "7")
    assert code == EXIT_OK
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["d", "R", "eps", "params", "sup_error", "lipschitz", "passed"]
    assert [r[0] for r in rows[1:]] == ["2", "4", "8", "16"]
    assert all(r[-1] == "true" for r in rows[1:])
    assert "exponent vs d" in err


def test_sweep_prod_eps_exponent_near_zero(capsys, tmp_path):
    path = tmp_path / "s.csv"
    argv = ["sweep", "prod", "--d", "4", "--R", "1", "--eps", "0.5,0.1,0.01", "--seed", "1", "-o", str(path)]
    code, out, _ = run(capsys, *argv, "--samples", "500", "--pairs", "500")
    assert code == EXIT_OK
    slope = float(out.split("exponent vs 1/eps: ")[1].split()[0])
    assert 0 <= slope <= 0.2
    assert path.read_text().count("\n") == 4


def test_sweep_empty_grid_is_usage_error(capsys):
    code, _, err = run(capsys, "sweep", "max", "--d", "", "--seed", "1")
    assert code == EXIT_USAGE and err


def test_sweep_failing_cell_reports_coordinates(capsys):
    code, _, err = run(capsys, "sweep", "square01", "--d", "1", "--eps", "0.5,3", "--seed", "1")
    assert code == EXIT_USAGE and "eps=3.0" in err


def test_unknown_construction(capsys):
    code, _, err = run(capsys, "build", "tetration")
    assert code == EXIT_USAGE and "running_max" in err


def test_invalid_parameters(capsys):
    code, _, err = run(capsys, "build", "square01", "--eps", "-1")
    assert code == EXIT_USAGE and "eps" in err
    code, _, err = run(capsys, "build", "clip", "--u", "1", "--v", "-1", "--n", "2")
    assert code == EXIT_USAGE and "--u <= --v" in err
    code, _, err = run(capsys, "build", "max")
    assert code == EXIT_USAGE and "--d" in err
    code, _, err = run(capsys, "build", "pipeline", "--d", "2", "--R", "1", "--eps", "0.1", "--pipeline", "rprod")
    assert code == EXIT_USAGE and "running product" in err


def test_eval_errors(capsys, tmp_path):
    path = tmp_path / "i.json"
    run(capsys, "build", "identity", "--d", "2", "-o", str(path))
    code, _, err = run(capsys, "eval", str(path), "1,2,3")
    assert code == EXIT_USAGE and "expects 2 inputs" in err
    code, _, _ = run(capsys, "eval", str(tmp_path / "missing.json"), "1")
    assert code == EXIT_IO
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"layers": [{"weights": [[1, 2]], "bias": [0, 0]}]}))
    code, _, err = run(capsys, "info", str(bad))
    assert code == EXIT_IO and "bad.json" in err
    bad.write_text("{not json")
    code, _, _ = run(capsys, "info", str(bad))
    assert code == EXIT_IO


def test_check_failure_exit_code(capsys, monkeypatch):
    import relucalc.catalog as catalog
    from relucalc.verify import Claims

    entry = catalog.CONSTRUCTIONS["max"]
    monkeypatch.setitem(
        catalog.CONSTRUCTIONS, "max", type(entry)(**{**entry.__dict__, "claims": lambda p: Claims(params=1)})
    )
    code, out, _ = run(capsys, "verify", "max", "--d", "3", "--seed", "0", "--samples", "50", "--pairs", "50")
    assert code == EXIT_CHECK and "FAIL params" in out


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "relucalc", "build", "max", "--d", "2"], capture_output=True, text=True
    )
    assert proc.returncode == 0 and proc.stdout.strip() == "dims=(2,3,1) params=13"
