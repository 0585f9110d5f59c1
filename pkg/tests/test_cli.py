import json
import math

import numpy as np
import pytest

from src.config import Settings
from src.main import main
from src.models.superchannel import LinearAction, Superchannel
from src.services import serialization


def run_json(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


def test_measure_lr_of_golden_unit(capsys):
    code, payload = run_json(capsys, ["measure", "lr", "--builder", "qft:3"])
    assert code == 0
    assert payload["value"] == pytest.approx(math.log2(9), abs=1e-5)


def test_measure_diamond_of_equal_channels(capsys):
    code, payload = run_json(capsys, ["measure", "diamond", "--a", "qft:2", "--b", "qft:2"])
    assert code == 0
    assert payload["value"] == pytest.approx(0.0, abs=1e-6)


def test_measure_dmax_infinite_is_string(capsys):
    code, payload = run_json(capsys, ["measure", "dmax", "--a", "identity:2", "--b", "deterministic:0,0"])
    assert code == 0
    assert payload["value"] == "inf"
    assert payload["infinite"] is True


def test_cost_command(capsys):
    code, payload = run_json(capsys, ["cost", "--class", "misc", "--eps", "0", "--builder", "qft:2"])
    assert code == 0
    assert payload["rate"] == pytest.approx(2.0)
    assert payload["passed"] is True


def test_invalid_eps_is_input_error(capsys):
    assert main(["measure", "lr", "--eps", "1.5", "--builder", "qft:2"]) == 1


def test_missing_spec_file_is_input_error(capsys, tmp_path):
    assert main(["measure", "lr", str(tmp_path / "nope.json")]) == 1


def test_unknown_subcommand_is_input_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["teleport"])
    assert exc.value.code == 1


def test_wrong_channel_count(capsys):
    assert main(["measure", "lr", "--builder", "qft:2", "--builder", "qft:3"]) == 1


def test_saved_cost_superchannel_verifies(capsys, tmp_path):
    saved = tmp_path / "theta.json"
    assert main(["cost", "--builder", "qft:2", "--save-superchannel", str(saved)]) == 0
    assert saved.exists()
    capsys.readouterr()
    code, payload = run_json(capsys, ["verify", str(saved), "--property", "misc"])
    assert code == 0
    assert payload["pass"] is True


def test_verify_admissibility_of_saved_superchannel(capsys, tmp_path):
    saved = tmp_path / "theta.json"
    main(["cost", "--class", "disc", "--builder", "qft:2", "--save-superchannel", str(saved)])
    capsys.readouterr()
    assert main(["verify", str(saved)]) == 0


def test_reproduce_text_table(capsys):
    assert main(["reproduce", "appendix-c", "--d", "2", "--format", "text"]) == 0
    out = capsys.readouterr().out
    assert "appendix-c" in out


def test_reproduce_is_byte_identical(capsys, tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["reproduce", "appendix-b", "--d", "2", "-o", str(first)]) == 0
    assert main(["reproduce", "appendix-b", "--d", "2", "-o", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_reproduce_rejects_large_dimension(capsys):
    assert main(["reproduce", "appendix-b", "--d", "9"]) == 1


def test_channel_info(capsys):
    code, payload = run_json(capsys, ["channel", "info", "--builder", "dephasing:2"])
    assert code == 0
    classes = {v["channel_class"]: v["passed"] for v in payload["classes"]}
    assert classes["DIO"] is True
    assert payload["lr_dephasing"] == pytest.approx(0.0, abs=1e-6)


def test_csv_output_with_side_files(capsys, tmp_path):
    out = tmp_path / "lr.csv"
    assert main(["measure", "lr", "--builder", "qft:2", "--format", "csv", "-o", str(out)]) == 0
    text = out.read_text()
    assert text.startswith("key,value")
    assert any(path.name.startswith("lr.") and path.suffix == ".json" for path in tmp_path.iterdir())


def test_settings_read_environment(monkeypatch):
    monkeypatch.setenv("DYNCOH_SOLVER_TOL", "1e-6")
    monkeypatch.setenv("DYNCOH_ENUMERATION_CAP", "3")
    fresh = Settings()
    assert fresh.solver_tol == pytest.approx(1e-6)
    assert fresh.enumeration_cap == 3


def test_inadmissible_superchannel_exits_with_certificate_failure(capsys, tmp_path):
    n = 4
    matrix = np.zeros((n * n, n * n))
    for a in range(n):
        for b in range(n):
            matrix[a * n + b, b * n + a] = 1.0
    theta = Superchannel(2, 2, 2, 2, realization=LinearAction(matrix=matrix), label="transpose")
    path = tmp_path / "transpose.json"
    path.write_text(serialization.dumps_json(serialization.superchannel_to_spec(theta)))
    code, payload = run_json(capsys, ["verify", str(path)])
    assert code == 3
    assert payload["pass"] is False
