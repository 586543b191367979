import json
import subprocess
import sys

import pytest

from matherm import __version__
from matherm.chaos import det_coefficient
from matherm.cli import load_config, run, UsageError
from matherm.zonal import CACHE_VERSION


def call(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def csv_parts(text):
    meta = summary = None
    body = []
    for line in text.splitlines():
        if line.startswith("# metadata: "):
            meta = json.loads(line[len("# metadata: "):])
        elif line.startswith("# summary: "):
            summary = json.loads(line[len("# summary: "):])
        else:
            body.append(line)
    return meta, summary, body


def test_det_coefficient_scalar(capsys):
    code, out, _ = call(capsys, "coeff", "det", "--l", "2", "--n", "3", "--kappa", "0")
    assert code == 0 and out.strip() == "2.0"


def test_zonal_at_identity(capsys):
    code, out, _ = call(capsys, "eval", "zonal", "--kappa", "2", "--eigs", "1,1,1")
    assert code == 0 and float(out) == pytest.approx(5.0)


def test_frequency_count(capsys):
    code, out, _ = call(capsys, "arw", "freq", "--n", "614")
    assert code == 0 and out.strip() == "N_n = 408"
    code, out, _ = call(capsys, "arw", "freq", "--n", "2", "--format", "json")
    payload = json.loads(out)
    assert payload["summary"]["N_n"] == 12 and len(payload["results"]) == 12


@pytest.mark.parametrize("argv,needle", [
    (["arw", "freq", "--n", "7"], "sum of three squares"),
    (["coeff", "det", "--l", "2", "--n", "3", "--kappa", "2,3"], "non-increasing"),
    (["coeff", "det", "--l", "1", "--n", "3", "--kappa", "1,1"], "parts"),
    (["coeff", "det", "--l", "2", "--n", "3"], "--kappa"),
    (["eval", "hermite", "--l", "2", "--n", "2", "--kappa", "1", "--matrix", "1,x;0,1"], "cannot parse"),
    (["arw", "mean", "--n", "5", "--grid", "8"], "alias"),
])
def test_invalid_input_exits_2(capsys, argv, needle):
    code, _, err = call(capsys, *argv)
    assert code == 2
    assert needle in err


def test_unknown_command_exits_2(capsys):
    code, _, _ = call(capsys, "frobnicate")
    assert code == 2


def test_empty_config_and_flags(tmp_path, capsys):
    cfg = tmp_path / "empty.json"
    cfg.write_text("")
    code, out, _ = call(capsys, "coeff", "det", "--config", str(cfg), "--l", "2", "--n", "3", "--kappa", "0")
    assert code == 0 and out.strip() == "2.0"


def test_flag_overrides_config_and_is_recorded(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"ell": 2, "n": 3, "kappa": "1", "seed": 5}))
    code, out, _ = call(capsys, "coeff", "det", "--config", str(cfg), "--seed", "9", "--format", "csv")
    assert code == 0
    meta, _, body = csv_parts(out)
    assert meta["seed"] == 9 and meta["config"]["seed"] == 9
    assert meta["config"]["ell"] == 2 and meta["config"]["kappa"] == "1"
    assert meta["version"] == __version__ and meta["table_cache_version"] == CACHE_VERSION
    assert body[0] == "partition,value,route,std_error"
    assert float(body[1].split(",")[1]) == pytest.approx(det_coefficient((1,), 2, 3))


def test_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"n": 3, "colour": "red"}))
    code, _, err = call(capsys, "coeff", "det", "--config", str(bad))
    assert code == 2 and "colour" in err
    code, _, err = call(capsys, "coeff", "det", "--config", str(tmp_path / "missing.json"))
    assert code == 2 and "cannot read" in err
    with pytest.raises(UsageError):
        load_config(tmp_path)


def test_json_output_to_file(tmp_path, capsys):
    out = tmp_path / "sub" / "res.json"
    code, printed, _ = call(capsys, "variance-expansion", "--l", "1", "--n", "3", "--K", "3", "--format", "json",
                            "--out", str(out))
    assert code == 0 and printed == ""
    payload = json.loads(out.read_text())
    assert payload["metadata"]["config"]["K"] == 3
    sums = [r["partial_sum"] for r in payload["results"]]
    assert len(sums) == 3 and all(b >= a for a, b in zip(sums, sums[1:]))


def test_workers_do_not_change_results(capsys):
    base = ["coeff", "mc", "--l", "1", "--n", "3", "--kappa", "1", "--samples", "40000", "--seed", "3",
            "--format", "json"]
    _, one, _ = call(capsys, *base, "--workers", "1")
    _, three, _ = call(capsys, *base, "--workers", "3")
    assert json.loads(one)["results"] == json.loads(three)["results"]


def test_hermite_with_sigma(capsys):
    code, plain, _ = call(capsys, "eval", "hermite", "--l", "1", "--n", "2", "--kappa", "1", "--X", "0.5,1.5")
    assert code == 0
    code, ident, _ = call(capsys, "eval", "hermite", "--l", "1", "--n", "2", "--kappa", "1", "--X", "0.5,1.5",
                          "--sigma", "1,0;0,1")
    assert code == 0 and float(ident) == pytest.approx(float(plain), rel=1e-12)


def test_arw_mean_csv(capsys):
    code, out, _ = call(capsys, "arw", "mean", "--n", "5", "--l", "1", "--replicates", "20", "--format", "csv")
    assert code == 0
    meta, summary, body = csv_parts(out)
    assert meta["config"]["replicates"] == 20 and "z_score" in summary
    assert len(body) == 21


def test_arw_variance_precondition(capsys):
    code, _, err = call(capsys, "arw", "variance", "--n", "614", "--replicates", "50")
    assert code == 2 and "replicates" in err


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "matherm", "coeff", "det", "--l", "2", "--n", "3", "--kappa", "0"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == "2.0"
