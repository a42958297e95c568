#!/usr/bin/env python3
"""Command line front end: formats, defaults and exit codes."""

import json
import math

import pytest

from app.cli import main
from app.models import F1Problem, Parity, TruncationSpec, VerificationSettings
from app.services.single_mode_service import single_mode_service
from app.services.verification_service import verification_service
from app.utils import dumps_json, read_csv, state_from_payload, state_to_payload

F1 = ["--model", "f1", "--beta-re", "0.04", "--lambda-re", "0.7", "--dim", "64"]


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_state_json(capsys):
    code, out, _ = run(capsys, "state", *F1)
    assert code == 0
    payload = json.loads(out)
    assert payload["truncation"] == {"dim": 64, "guard": 4}
    assert payload["interior_residual"] < 1e-8
    coeffs = payload["state"]["coeffs"]
    assert coeffs[0] == [1.0, 0.0]
    assert coeffs[1] == [0.0, 0.0]
    assert coeffs[2][0] == pytest.approx(0.7 / math.sqrt(2))


def test_state_json_round_trips_exactly(capsys):
    _, out, _ = run(capsys, "state", *F1, "--parity", "odd")
    assert dumps_json(json.loads(out)) == out
    state = state_from_payload(json.loads(out)["state"])
    assert state_to_payload(state) == json.loads(out)["state"]


def test_zero_parameters_give_the_vacuum(capsys):
    code, out, _ = run(capsys, "state", "--dim", "16")
    assert code == 0
    coeffs = json.loads(out)["state"]["coeffs"]
    assert coeffs[0] == [1.0, 0.0]
    assert all(c == [0.0, 0.0] for c in coeffs[1:])


def test_pair_state_csv(capsys):
    code, out, _ = run(
        capsys, "state", "--model", "f2", "--beta-im", "0.09", "--lambda-re", "0.7", "--dim", "16", "--format", "csv"
    )
    assert code == 0
    rows = read_csv(out)
    assert len(rows) == 256
    assert list(rows[0]) == ["n_a", "n_b", "re", "im"]
    by_level = {(int(r["n_a"]), int(r["n_b"])): complex(float(r["re"]), float(r["im"])) for r in rows}
    assert by_level[0, 0] == 1
    assert by_level[1, 1] == pytest.approx(0.7)
    assert by_level[0, 1] == 0


def test_out_writes_a_file(capsys, tmp_path):
    path = tmp_path / "state.json"
    code, out, _ = run(capsys, "state", *F1, "--out", str(path))
    assert code == 0
    assert out == ""
    assert json.loads(path.read_text())["model"] == "f1"


def test_unwritable_out_exits_one(capsys, tmp_path):
    code, out, err = run(capsys, "state", *F1, "--out", str(tmp_path / "missing" / "state.json"))
    assert code == 1
    assert out == ""
    [message] = [line for line in err.splitlines() if "cannot write" in line]
    assert message.startswith("eigenstates state: error: cannot write")


def test_json_has_no_non_finite_numbers():
    text = dumps_json({"value": [float("nan"), 1.0], "rows": [[0.5, float("inf")]], "valid": False})
    assert "NaN" not in text and "Infinity" not in text
    assert json.loads(text) == {"value": [None, 1.0], "rows": [[0.5, None]], "valid": False}


def test_overlap_number_and_squeezed(capsys):
    _, out, _ = run(capsys, "overlap", *F1, "--kind", "number", "--n", "2")
    payload = json.loads(out)
    assert payload["value"][0] == pytest.approx(0.7 / math.sqrt(2))
    assert payload["valid"]

    _, out, _ = run(capsys, "overlap", *F1, "--kind", "squeezed", "--point-re", "0.6")
    payload = json.loads(out)
    prob = F1Problem(beta=0.04, lam=0.7, trunc=TruncationSpec(dim=64, guard=4))
    expected = single_mode_service.overlap_squeezed(prob, 0.6, Parity.EVEN).value
    assert complex(*payload["value"]) == expected
    assert payload["mu"] == [0.6, 0.0]


def test_pair_number_overlap_needs_one_family(capsys):
    code, _, err = run(
        capsys, "overlap", "--model", "f2", "--beta-re", "0.04", "--kind", "number",
        "--family", "0:0", "--family", "3:0", "--dim", "16"
    )
    assert code == 2
    assert "exactly one --family" in err


def test_qfunc_grid(capsys):
    code, out, _ = run(capsys, "qfunc", *F1, "--grid", "-1:1:11")
    assert code == 0
    rows = read_csv(out)
    assert len(rows) == 121
    assert list(rows[0]) == ["alpha_re", "alpha_im", "q"]
    assert float(rows[0]["alpha_re"]) == -1.0
    assert float(rows[1]["alpha_im"]) == pytest.approx(-0.8)

    prob = F1Problem(beta=0.04, lam=0.7, trunc=TruncationSpec(dim=64, guard=4))
    for row in rows[::30]:
        alpha = complex(float(row["alpha_re"]), float(row["alpha_im"]))
        assert float(row["q"]) == single_mode_service.q_function(prob, alpha)


def test_qfunc_negative_grid_values(capsys):
    code, out, err = run(capsys, "qfunc", *F1, "--grid", "-2:2:11", "--grid-im", "-1:1:3")
    assert code == 0, err
    rows = read_csv(out)
    assert len(rows) == 33
    assert (float(rows[0]["alpha_re"]), float(rows[0]["alpha_im"])) == (-2.0, -1.0)
    assert (float(rows[-1]["alpha_re"]), float(rows[-1]["alpha_im"])) == (2.0, 1.0)


def test_joined_grid_values_parse_alike(capsys):
    _, spaced, _ = run(capsys, "wavefunction", *F1, "--grid", "-1:1:5")
    _, joined, _ = run(capsys, "wavefunction", *F1, "--grid=-1:1:5")
    assert spaced == joined


def test_qfunc_at_zero_beta_is_refused(capsys):
    code, out, err = run(capsys, "qfunc", "--lambda-re", "0.7", "--grid", "-1:1:3")
    assert code == 2
    assert out == ""
    assert "beta != 0" in err


def test_wavefunction_csv(capsys):
    code, out, _ = run(capsys, "wavefunction", *F1, "--grid", "-1:1:5", "--x0", "0.5")
    assert code == 0
    rows = read_csv(out)
    assert [float(r["x"]) for r in rows] == [-1.0, -0.5, 0.0, 0.5, 1.0]
    reference = rows[3]
    assert float(reference["re"]) == pytest.approx(1.0)
    assert float(reference["im"]) == pytest.approx(0.0, abs=1e-15)


def test_wavefunction_needs_model_f1(capsys):
    code, _, err = run(capsys, "wavefunction", "--model", "f2", "--beta-re", "0.04", "--grid", "-1:1:5")
    assert code == 2
    assert "model f1" in err


@pytest.mark.parametrize("argv", [
    ["state", "--beta-re", "abc"],
    ["state", "--model", "f3"],
    ["qfunc", "--beta-re", "0.04", "--grid", "1:2"],
    ["state", "--dim", "4"],
    ["frobnicate"],
])
def test_usage_errors_exit_two(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_verify_negative_control_passes(capsys):
    code, out, _ = run(capsys, "verify", "--expect-fail")
    assert code == 0
    payload = json.loads(out)
    assert payload["expect_fail"]
    assert payload["criteria"][0]["criterion"] == 0
    assert payload["passed"]


def test_verify_fails_on_a_starved_truncation(capsys):
    code, out, _ = run(capsys, "verify", "--dim", "8", "--pair-dim", "8", "--format", "csv")
    assert code == 1
    rows = read_csv(out)
    assert len(rows) == 11
    assert any(r["passed"] == "False" for r in rows)


def test_verify_passes_with_reduced_settings(capsys, monkeypatch):
    reduced = VerificationSettings(
        single_dim=128, single_guard=8, pair_dim=24, pair_guard=3, wave_dim=512, transform_dim=16
    )
    monkeypatch.setattr(verification_service, "default_settings", reduced)
    code, out, _ = run(capsys, "verify")
    payload = json.loads(out)
    assert code == 0, [c for c in payload["criteria"] if not c["passed"]]
    assert [c["criterion"] for c in payload["criteria"]] == list(range(1, 12))
