import json

import numpy as np
import pytest

from polyblock.bench import ClassicalBDF
from polyblock.builder import build_method, make_spec
from polyblock.cli import main, parse_descriptor


def matrix(payload, name):
    return np.array(payload[name]["re"]) + 1j * np.array(payload[name]["im"])


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_descriptor_parsing():
    spec = parse_descriptor("adams:pmfcmj:icheb:classical:fi3:q=4:a=0.2")
    assert spec == make_spec("adams", "pmfcmj", 4, 0.2, "chebyshev", "classical", endpoint="fi3")
    assert parse_descriptor("gbdf:smvc:explicit:q=3:a=0.75").implicitness.value == "explicit"
    assert isinstance(parse_descriptor("bdf:6"), ClassicalBDF)
    assert isinstance(parse_descriptor("bdf6"), ClassicalBDF)


def test_coeffs_json(capsys, tmp_path):
    out = tmp_path / "c.json"
    code, _, _ = run(capsys, "coeffs", "bdf:pmfc:classical:q=2:a=0.5", "--out", str(out))
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["consistency_residual"] < 1e-12
    assert not matrix(payload, "C").any()
    ref = build_method(make_spec("bdf", "pmfc", 2, 0.5, ordering="classical"))
    assert np.allclose(matrix(payload, "A"), ref.A, atol=1e-15)


def test_coeffs_json_stdout_lower_triangular(capsys):
    code, out, _ = run(capsys, "coeffs", "bdf:smfc:q=4:a=0.5")
    assert code == 0
    D = matrix(json.loads(out), "D")
    assert np.all(np.triu(D, 1) == 0)


def test_coeffs_csv(capsys, tmp_path):
    code, _, err = run(capsys, "coeffs", "gbdf:smvc:q=3:a=0.5", "--format", "csv", "--out", str(tmp_path))
    assert code == 0 and "consistency residual" in err
    for name in "ABCD":
        lines = (tmp_path / f"{name}.csv").read_text().splitlines()
        assert len(lines) == 4
    code, out, _ = run(capsys, "coeffs", "gbdf:smvc:q=3:a=0.5", "--format", "csv")
    assert code == 0 and out.count("# ") == 4


def test_stability_angle_bdf6(capsys):
    code, out, _ = run(capsys, "stability", "bdf:6", "--angle")
    assert code == 0
    assert abs(json.loads(out)["angle_deg"] - 17.8) <= 0.3


def test_stability_region_csv(capsys, tmp_path):
    out = tmp_path / "region.csv"
    code, _, _ = run(capsys, "stability", "bdf:smvc:q=2:a=0.75", "--region", "-2", "0", "-1", "1", "5", "3",
                     "--out", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "zeta_re,zeta_im,stable" and len(lines) == 1 + 15


def test_stability_sweep(capsys):
    code, out, _ = run(capsys, "stability", "bdf:smfc:q=3:a=0.5", "--sweep", "0.2", "1.0", "3")
    assert code == 0
    rows = out.splitlines()
    assert rows[0] == "alpha,theta_deg,root_stable" and len(rows) == 4


def test_stability_sweep_rejects_bad_range(capsys):
    assert main(["stability", "bdf:smfc:q=3:a=0.5", "--sweep", "1.0", "0.2", "3"]) == 2


def test_stability_region_too_small(capsys):
    assert main(["stability", "bdf:smfc:q=3:a=0.5", "--region", "-1", "0", "0", "1", "1", "4"]) == 2


def test_experiment_dahlquist_single_h(capsys, tmp_path):
    code, out, _ = run(capsys, "experiment", "dahlquist", "bdf:smfc:q=3:a=0.5", "--hs", "0.1",
                       "--out", str(tmp_path))
    assert code == 0 and "inconclusive" in out
    rows = (tmp_path / "precision.csv").read_text().splitlines()
    assert rows[0] == "h,error,newton_total" and len(rows) == 2
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["steps"] == [10] and manifest["order"] is None


def test_experiment_prothero_order(capsys, tmp_path):
    code, _, _ = run(capsys, "experiment", "prothero", "adams:pmfcmj:classical:vi:q=2:a=3.0",
                     "--steps", "16", "32", "64", "128", "256", "--out", str(tmp_path))
    assert code == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["conclusive"] and abs(manifest["order"] - 2) < 0.5


def test_experiment_h_must_divide(capsys, tmp_path):
    assert main(["experiment", "dahlquist", "bdf:smfc:q=3:a=0.5", "--hs", "0.3", "--out", str(tmp_path)]) == 2


@pytest.mark.parametrize("kind", ["node", "expansion", "polynomial"])
def test_diagram_kinds(capsys, tmp_path, kind):
    out = tmp_path / "d.svg"
    code, _, _ = run(capsys, "diagram", "adams:pmfc:classical:vi:q=2:a=0.5", "--kind", kind, "--out", str(out))
    assert code == 0
    files = sorted(p.name for p in tmp_path.iterdir())
    assert files == (["d_LF.svg", "d_Ly.svg"] if kind == "polynomial" else ["d.svg"])
    assert all("<svg" in (tmp_path / f).read_text() for f in files)


def test_diagram_stdout(capsys):
    code, out, _ = run(capsys, "diagram", "bdf:smfc:q=3:a=0.5")
    assert code == 0 and out.lstrip().startswith("<?xml")


def test_expansion_needs_adams(capsys):
    assert main(["diagram", "bdf:pmfc:q=2:a=0.5", "--kind", "expansion"]) == 2


@pytest.mark.parametrize("descriptor", [
    "foo:pmfc:q=2:a=0.5", "bdf:zzz:q=2:a=0.5", "bdf:smfc:q=2", "bdf:smfc:q=x:a=0.5",
    "bdf:smfc:q=3:a=0.5:colour=red", "adams:pmfc:q=2:a=0.5", "bdf:smvc:classical:q=3:a=0.5",
])
def test_invalid_descriptors_exit_2(capsys, descriptor):
    code, _, err = run(capsys, "coeffs", descriptor)
    assert code == 2 and err.startswith("error:")


def test_unpoised_exits_3(capsys):
    code, _, err = run(capsys, "coeffs", "bdf:smfcmj:q=3:a=0.5")
    assert code == 3 and "output 3" in err


def test_classical_bdf_only_for_analysis(capsys):
    assert main(["coeffs", "bdf:6"]) == 2


def test_spec_file(capsys, tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"family": "adams", "strategy": "smvc", "q": 3, "alpha": 0.6,
                                "node_family": "chebyshev", "endpoint": "fi2"}))
    code, out, _ = run(capsys, "coeffs", "--spec", str(path))
    assert code == 0
    ref = build_method(make_spec("adams", "smvc", 3, 0.6, "chebyshev", endpoint="fi2"))
    assert np.allclose(matrix(json.loads(out), "B"), ref.B, atol=1e-15)
    path.write_text("{not json")
    assert main(["coeffs", "--spec", str(path)]) == 2
    path.write_text(json.dumps({"family": "bdf", "strategy": "smfc", "q": 3}))
    assert main(["coeffs", "--spec", str(path)]) == 2


def test_missing_descriptor(capsys):
    assert main(["coeffs"]) == 2
