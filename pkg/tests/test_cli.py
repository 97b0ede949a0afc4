import csv
import io
import json
import math
import subprocess
import sys
from pathlib import Path

import jsonschema
import numpy as np
import pytest

from cvmem.cli import EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, SweepSpec, main
from cvmem.errors import ParameterError, TruncationWarning
from cvmem.wigner import fidelity_max

DOCS = Path(__file__).resolve().parents[1] / "docs"


def schema(name):
    return json.loads((DOCS / name).read_text())


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


# --- record ----------------------------------------------------------------------


def test_record_peak(capsys):
    code, out, _ = run(capsys, "record", "--kappa", "1", "--pre-squeeze", "1", "--post-correct")
    assert code == EXIT_OK
    rep = json.loads(out)
    jsonschema.validate(rep, schema("record_report.schema.json"))
    assert rep["T"] == pytest.approx(0.25, abs=1e-14)
    assert rep["noise_excess_free"] is True


def test_record_zero_coupling_rejected(capsys):
    code, _, err = run(capsys, "record", "--kappa", "0.0")
    assert code == EXIT_USAGE
    assert "kappa" in err


def test_record_pre_squeezed_branch(capsys):
    code, out, _ = run(capsys, "record", "--kappa", "0.5", "--pre-squeeze", "2")
    assert code == EXIT_OK
    rep = json.loads(out)
    assert rep["T"] == pytest.approx(0.25, abs=1e-14)
    assert rep["gains"]["g"] == pytest.approx(-1.0)


def test_record_without_post_correction(capsys):
    code, out, _ = run(capsys, "record", "--kappa", "1", "--no-post-correct")
    rep = json.loads(out)
    jsonschema.validate(rep, schema("record_report.schema.json"))
    assert rep["T"] == pytest.approx(0.5)
    assert "squeezing" in rep["frame"]


def test_record_sweep_csv(capsys):
    code, out, _ = run(capsys, "record", "--kappa-sweep", "lin", "0.5", "2", "4")
    assert code == EXIT_OK
    assert out.splitlines()[0] == "kappa,c,g,a,b,T,V_Nx,V_Np,noise_excess_free"
    r = rows(out)
    assert [float(x["kappa"]) for x in r] == [0.5, 1.0, 1.5, 2.0]
    for x in r:
        assert float(x["V_Nx"]) == pytest.approx(1 - float(x["T"]), abs=1e-12)
        assert x["noise_excess_free"] == "true"


def test_record_sweep_parallel_is_ordered_and_identical(tmp_path, monkeypatch, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["record", "--kappa-sweep", "log", "0.01", "10", "33", "--out", str(a)])
    monkeypatch.setenv("CVMEM_THREADS", "4")
    main(["record", "--kappa-sweep", "log", "0.01", "10", "33", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


# --- config ------------------------------------------------------------------------


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# record at the optimum\nkappa = 0.5\npre-squeeze = 2\npost-correct = false\n")
    code, out, _ = run(capsys, "--config", str(cfg), "record")
    rep = json.loads(out)
    assert (rep["kappa"], rep["c"], rep["post_corrected"]) == (0.5, 2.0, False)
    code, out, _ = run(capsys, "--config", str(cfg), "record", "--kappa", "1", "--pre-squeeze", "1")
    rep = json.loads(out)
    assert (rep["kappa"], rep["c"]) == (1.0, 1.0)


def test_config_sweep_key(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("kappa = 0.05\nB-sweep = log 1e-3 1e-2 3\n")
    code, out, _ = run(capsys, "--config", str(cfg), "upload-photon")
    assert code == EXIT_OK
    assert len(rows(out)) == 3


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("kapa = 1\n")
    code, _, err = run(capsys, "--config", str(cfg), "record")
    assert code == EXIT_USAGE
    assert "kapa" in err


def test_usage_errors(capsys):
    assert run(capsys)[0] == EXIT_USAGE
    assert run(capsys, "record", "--kappa", "abc")[0] == EXIT_USAGE
    assert run(capsys, "record")[0] == EXIT_USAGE
    assert run(capsys, "upload-photon", "--kappa", "0.05")[0] == EXIT_USAGE
    assert run(capsys, "--help")[0] == EXIT_OK


def test_sweep_spec():
    assert SweepSpec.parse_values(["lin", "0", "1", "3"]) == (0.0, 0.5, 1.0)
    assert SweepSpec.parse_values(["0.1", "0.2"]) == (0.1, 0.2)
    assert SweepSpec.parse_values(["log", "1e-2", "1", "3"]) == pytest.approx((0.01, 0.1, 1.0))
    with pytest.raises(ParameterError):
        SweepSpec.parse_values(["log", "0", "1", "3"])
    with pytest.raises(ParameterError):
        SweepSpec("B", ())


# --- uploads -------------------------------------------------------------------------


def test_upload_photon_sweep(capsys):
    code, out, _ = run(capsys, "upload-photon", "--kappa", "0.05", "--a", "1", "--B-sweep", "log", "1e-4", "0.5", "40")
    assert code == EXIT_OK
    assert out.splitlines()[0] == "kappa,a,B,eta,S,log10S,F,N"
    r = rows(out)
    assert len(r) == 40
    F = np.array([float(x["F"]) for x in r])
    S = np.array([float(x["S"]) for x in r])
    assert np.all(np.diff(S) > 0) and np.all(np.diff(F) < 0)
    # leftmost point approaches F_max up to the O(B^2) correction
    assert F[0] == pytest.approx(fidelity_max(1.0, 0.05), abs=1e-5)
    assert float(r[3]["log10S"]) == pytest.approx(math.log10(S[3]))


def test_upload_photon_efficiency_point(capsys):
    code, out, _ = run(capsys, "upload-photon", "--kappa", "0.1", "--a", "2", "--B", "0.01", "--eta", "0.6")
    (r,) = rows(out)
    assert float(r["eta"]) == 0.6
    assert 0 < float(r["S"]) < 1


def test_upload_photon_numeric_check(capsys):
    code, out, _ = run(capsys, "upload-photon", "--kappa", "0.05", "--a", "1", "--B", "0.01", "--numeric-check")
    (r,) = rows(out)
    assert float(r["max_dev"]) <= 1e-6
    assert float(r["dS"]) <= 1e-8


def test_upload_photon_json(capsys):
    code, out, _ = run(capsys, "upload-photon", "--B", "0.01", "--format", "json")
    jsonschema.validate(json.loads(out), schema("upload_report.schema.json"))


@pytest.mark.parametrize("a,S,xp", [("1", 0.027, 0.4), ("0.25", 0.06, 1.49)])
def test_upload_cat_reference_points(capsys, a, S, xp):
    code, out, _ = run(capsys, "upload-cat", "--x0", "4", "--kappa", "0.1", "--a", a, "--B", "0.01")
    rep = json.loads(out)
    jsonschema.validate(rep, schema("upload_report.schema.json"))
    assert rep["S"] == pytest.approx(S, abs=0.002)
    assert rep["x0_prime"] == pytest.approx(xp, abs=0.01)


def test_upload_cat_marginal(tmp_path, capsys):
    out_csv = tmp_path / "m.csv"
    code, out, _ = run(capsys, "upload-cat", "--x0", "4", "--a", "0.25", "--marginal-grid", "-2", "2", "81",
                       "--approx", "--marginal-out", str(out_csv))
    assert code == EXIT_OK
    r = rows(out_csv.read_text())
    assert list(r[0]) == ["p", "P", "P_small_b", "P_reduced_amplitude"]
    assert len(r) == 81


def test_upload_cat_zero_amplitude_no_fringes(tmp_path, capsys):
    out_csv = tmp_path / "m.csv"
    run(capsys, "upload-cat", "--x0", "0", "--marginal-grid", "0", "2", "41", "--marginal-out", str(out_csv))
    P = np.array([float(x["P"]) for x in rows(out_csv.read_text())])
    assert np.all(np.diff(P) < 0)


def test_upload_outputs_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        main(["upload-cat", "--x0", "2", "--a", "0.5", "--out", str(path)])
    assert a.read_bytes() == b.read_bytes()


# --- oracle check ---------------------------------------------------------------------


def test_oracle_check_photon(capsys):
    code, out, _ = run(capsys, "oracle-check", "--case", "photon", "--kappa", "0.05", "--a", "1", "--B", "0.01",
                       "--ntrunc", "40")
    rep = json.loads(out)
    jsonschema.validate(rep, schema("oracle_check.schema.json"))
    assert code == EXIT_OK and rep["passed"]
    assert rep["max_deviation"] <= 1e-3


def test_oracle_check_vacuum(capsys):
    code, out, _ = run(capsys, "oracle-check", "--case", "vacuum", "--kappa", "0.1")
    rep = json.loads(out)
    assert code == EXIT_OK
    assert rep["max_deviation"] <= 1e-9


def test_oracle_check_under_truncated(capsys):
    with pytest.warns(TruncationWarning):
        code, out, err = run(capsys, "oracle-check", "--case", "cat", "--x0", "4", "--kappa", "0.1", "--ntrunc", "5")
    assert code == EXIT_VALIDATION
    jsonschema.validate(json.loads(out), schema("oracle_check.schema.json"))


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "cvmem", "record", "--kappa", "2"], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["T"] == pytest.approx(4 / 25)
