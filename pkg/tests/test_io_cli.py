import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qchan import cli
from qchan.channels import KrausSet
from qchan.errors import MalformedInput
from qchan.io import dumps, kraus_from_json, kraus_to_json, load_json, matrix_from_json, matrix_to_json, rows_to_csv
from qchan.recovery import PAULI_Z, bitflip_code, embed

from conftest import random_kraus


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def write_json(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), rows=st.integers(1, 5), cols=st.integers(1, 5))
def test_matrix_json_round_trip_is_exact(seed, rows, cols):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    text = dumps(matrix_to_json(a))
    back = matrix_from_json(json.loads(text))
    assert back.tobytes() == a.astype(complex).tobytes()


def test_kraus_json_round_trip(rng):
    k = random_kraus(rng, 3, 2)
    back = kraus_from_json(json.loads(dumps(kraus_to_json(k))))
    assert back.label == k.label
    for a, b in zip(k, back):
        assert a.tobytes() == b.tobytes()


@pytest.mark.parametrize(
    "obj, fragment",
    [
        ([1, 2], "expected an object"),
        ({"rows": 1, "cols": 1}, "missing field 'entries'"),
        ({"rows": 2, "cols": 1, "entries": [[1, 0]]}, "m.entries"),
        ({"rows": 1, "cols": 1, "entries": [[1]]}, "m.entries[0]"),
        ({"rows": 1, "cols": 1, "entries": [["a", 0]]}, "m.entries[0]"),
        ({"rows": 0, "cols": 1, "entries": []}, "positive integers"),
    ],
)
def test_matrix_json_errors_name_the_field(obj, fragment):
    with pytest.raises(MalformedInput, match=fragment.replace("[", r"\[").replace("]", r"\]")):
        matrix_from_json(obj, "m")


def test_kraus_json_errors():
    good = matrix_to_json(np.eye(2))
    with pytest.raises(MalformedInput, match="operators"):
        kraus_from_json({"operators": []})
    with pytest.raises(MalformedInput, match=r"k.operators\[1\]"):
        kraus_from_json({"operators": [good, {"rows": 1}]}, "k")
    with pytest.raises(MalformedInput, match="dim_in"):
        kraus_from_json({"dim_in": 3, "operators": [good]})
    with pytest.raises(MalformedInput, match="different shapes"):
        kraus_from_json({"operators": [good, matrix_to_json(np.eye(3))]}, trace_preserving=False)


def test_load_json_reports_position(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "rows": 1,\n  oops\n}')
    with pytest.raises(MalformedInput, match="line 3 column 3"):
        load_json(str(p))
    with pytest.raises(MalformedInput):
        load_json(str(tmp_path / "missing.json"))


def test_dumps_format():
    text = dumps({"b": 1, "a": [0.1, 2], "c": {"x": True, "y": None}})
    assert text.index('"b"') < text.index('"a"')
    assert "[0.10000000000000001, 2]" in text
    assert json.loads(text) == {"b": 1, "a": [0.1, 2], "c": {"x": True, "y": None}}


def test_rows_to_csv():
    text = rows_to_csv([{"index": 0, "x": 0.5}, {"index": 1, "x": 1 / 3}])
    lines = text.splitlines()
    assert lines[0] == "index,x"
    assert float(lines[2].split(",")[1]) == 1 / 3


@pytest.mark.parametrize("cmd", ["fig1", "fig2", "fig3", "state-ru"])
def test_figure_commands_pass_and_are_deterministic(cmd, capsys):
    argv = [cmd, "--samples", "50", "--seed", "3"]
    c1, out1, _ = run(argv, capsys)
    c2, out2, _ = run(argv, capsys)
    assert c1 == c2 == 0
    assert out1 == out2
    rec = json.loads(out1)
    assert len(rec["per_sample"]) == 50
    assert rec["summary"]["max_bloch_dist_sq"] == max(r["bloch_dist_sq"] for r in rec["per_sample"])
    assert rec["summary"]["max_bloch_dist_sq"] < 1e-10
    assert "runtime_ms" not in rec["summary"]


def test_figure_n2_and_single_sample(capsys):
    code, out, _ = run(["fig1", "--n", "2", "--samples", "1"], capsys)
    assert code == 0 and len(json.loads(out)["per_sample"]) == 1
    code, out, _ = run(["fig3", "--n", "2", "--samples", "20"], capsys)
    assert code == 0


def test_timing_flag_and_csv(tmp_path, capsys):
    code, out, _ = run(["fig1", "--samples", "5", "--timing"], capsys)
    assert "runtime_ms" in json.loads(out)["summary"]
    target = tmp_path / "rows.csv"
    code, out, _ = run(["fig2", "--samples", "5", "--format", "csv", "--out", str(target)], capsys)
    assert code == 0 and out == ""
    assert target.read_text().splitlines()[0].startswith("index,p,")


def test_tolerance_drives_exit_code(capsys, monkeypatch):
    code, _, _ = run(["fig1", "--samples", "5", "--tol", "-1"], capsys)
    assert code == 1
    monkeypatch.setenv("QCHAN_TOL", "-1")
    code, _, _ = run(["fig1", "--samples", "5"], capsys)
    assert code == 1


def test_build_ru(capsys):
    code, out, _ = run(["build-ru", "--n", "4"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["count"] == 32 and rep["completeness_residual"] < 1e-12
    code, out, _ = run(["build-ru", "--n", "3", "--include-operators"], capsys)
    assert len(json.loads(out)["kraus"]["operators"]) == 12


def test_check_hs(capsys):
    code, out, _ = run(["check-hs", "--n", "4"], capsys)
    rep = json.loads(out)
    assert code == 0
    assert rep["gram_rank"] == rep["required_rank"] == 16
    assert rep["det_T_relative_error"] < 1e-10


def test_check_correctability(tmp_path, capsys):
    bf = bitflip_code()
    p = write_json(tmp_path / "p.json", matrix_to_json(bf.P))
    good = write_json(tmp_path / "good.json", kraus_to_json(bf.correctable))
    code, out, _ = run(["check-correctability", "--kraus", good, "--projector", p], capsys)
    assert code == 0 and json.loads(out)["verdict"] == "satisfied"
    z = KrausSet([embed(PAULI_Z, 1, 3)] + list(bf.correctable), trace_preserving=False)
    bad = write_json(tmp_path / "bad.json", kraus_to_json(z))
    code, out, _ = run(["check-correctability", "--kraus", bad, "--projector", p], capsys)
    assert code == 1 and json.loads(out)["verdict"] == "violated"


def test_check_correctability_bad_projector(tmp_path, capsys):
    p = write_json(tmp_path / "p.json", matrix_to_json(np.array([[1, 1], [0, 0]])))
    k = write_json(tmp_path / "k.json", kraus_to_json(KrausSet([np.eye(2)])))
    code, _, err = run(["check-correctability", "--kraus", k, "--projector", p], capsys)
    assert code == 1 and json.loads(err)["error"] == "NotAProjector"


def test_malformed_input_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run(["convert", "--kraus", str(bad)], capsys)
    assert code == 2
    assert json.loads(err)["error"] == "MalformedInput"
    assert "line 1" in json.loads(err)["detail"]
    code, _, _ = run(["convert"], capsys)
    assert code == 2
    code, _, _ = run(["no-such-command"], capsys)
    assert code == 2


def test_convert_command(tmp_path, capsys, rng):
    k = write_json(tmp_path / "k.json", kraus_to_json(random_kraus(rng, 3, 4)))
    code, out, _ = run(["convert", "--kraus", k], capsys)
    rep = json.loads(out)
    assert code == 0
    assert rep["F_tilde_completeness"] < 1e-9 and rep["process_distance"] < 1e-9


def test_recover_demo(capsys):
    code, out, _ = run(["recover-demo", "--samples", "20"], capsys)
    rep = json.loads(out)
    assert code == 0
    assert rep["max_bloch_dist_sq"] < 1e-9
    assert rep["syndromes"] == 4 and rep["completion_projector"] is False
    assert rep["diagonality_residual"] < 1e-9 and rep["syndrome_identity_residual"] < 1e-9
    assert max(rep["negative_control_Z1"].values()) > 1e-3


def test_check_universal(tmp_path, capsys):
    code, out, _ = run(["check-universal"], capsys)
    rep = json.loads(out)
    assert code == 1
    assert rep["hs_complete"] is False and rep["correctable"] is True and rep["stabilized"] is True
    code, out, _ = run(["check-universal", "--candidate", "ru"], capsys)
    rep = json.loads(out)
    assert rep["hs_complete"] is True and rep["gram_rank"] == 64
    bf = bitflip_code()
    f = write_json(
        tmp_path / "code.json",
        {"n_sys": 2, "n_anc": 4, "P": matrix_to_json(bf.P), "U_C": matrix_to_json(bf.U_C)},
    )
    k = write_json(tmp_path / "q.json", kraus_to_json(bf.correctable))
    code, out, _ = run(["check-universal", "--code", f, "--kraus", k], capsys)
    assert json.loads(out)["correctable"] is True
    broken = write_json(tmp_path / "broken.json", {"n_sys": 2})
    code, _, err = run(["check-universal", "--code", broken, "--kraus", k], capsys)
    assert code == 2 and "n_anc" in json.loads(err)["detail"]


def test_module_entry_point(tmp_path):
    args = [sys.executable, "-m", "qchan", "fig1", "--samples", "3", "--seed", "9"]
    first = subprocess.run(args, capture_output=True, check=True)
    second = subprocess.run(args, capture_output=True, check=True)
    assert first.stdout == second.stdout
    assert json.loads(first.stdout)["passed"] is True
