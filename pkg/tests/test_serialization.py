import json

import numpy as np
import pytest

from src.errors import SpecError
from src.models.reports import MeasureResult
from src.services import protocols, qobj, serialization, supermap


def test_parse_builder_shorthands():
    spec = serialization.parse_builder("qft:3")
    assert (spec.name, spec.d) == ("qft", 3)

    spec = serialization.parse_builder("deterministic:1,0")
    assert spec.f == [1, 0] and spec.dout == 2

    spec = serialization.parse_builder("random-unitary:2:7")
    assert spec.unitary and spec.seed == 7

    assert serialization.parse_builder("random:2", seed=11).seed == 11


@pytest.mark.parametrize("text", ["qft", "qft:x", "teleport:2", "deterministic:a,b"])
def test_parse_builder_rejects_garbage(text):
    with pytest.raises(SpecError):
        serialization.parse_builder(text)


def test_seeded_random_builder_is_reproducible():
    a = serialization.channel_from_spec(serialization.parse_builder("random:2:5"))
    b = serialization.channel_from_spec(serialization.parse_builder("random:2:5"))
    assert np.array_equal(a.choi, b.choi)


def test_channel_spec_round_trip():
    f = qobj.qft_channel(2)
    restored = serialization.channel_from_spec(serialization.channel_to_spec(f))
    assert np.allclose(restored.choi, f.choi)


def test_invalid_channel_spec_names_field():
    with pytest.raises(SpecError, match="din"):
        serialization.channel_from_spec({"kind": "choi", "dout": 2, "matrix": [[1]]})


def test_non_cptp_choi_is_rejected():
    with pytest.raises(SpecError):
        serialization.channel_from_spec({"kind": "choi", "din": 1, "dout": 2, "matrix": [[2, 0], [0, 0]]})


def test_matrix_entry_formats():
    m = serialization.matrix_from_json([[1, [0, 1]], [{"re": 0, "im": -1}, 2.5]])
    assert m[0, 1] == 1j and m[1, 0] == -1j and m[1, 1] == 2.5


def test_ragged_matrix_is_rejected():
    with pytest.raises(SpecError):
        serialization.matrix_from_json([[1, 0], [0]])


def test_infinite_values_are_strings():
    payload = serialization.to_jsonable(MeasureResult(name="dmax_channel", value=float("inf"), infinite=True))
    assert payload["value"] == "inf"
    json.dumps(payload)


def test_superchannel_spec_round_trip(rng):
    for theta in (
        supermap.random_superchannel((2, 2, 2, 2), rng),
        protocols.build_omega(2),
        protocols.mixing_superchannel(2, 0.5),
    ):
        restored = serialization.superchannel_from_spec(serialization.superchannel_to_spec(theta))
        assert np.allclose(supermap.to_linear(restored), supermap.to_linear(theta))


def test_linear_spec_shape_is_checked():
    spec = {"kind": "linear", "dims": [2, 2, 2, 2], "matrix": [[1, 0], [0, 1]]}
    with pytest.raises(SpecError, match="shape"):
        serialization.superchannel_from_spec(spec)


@pytest.mark.parametrize("spec", [[1, 2, 3], "prepost", None])
def test_superchannel_spec_must_be_an_object(spec):
    with pytest.raises(SpecError, match="Unsupported superchannel spec"):
        serialization.superchannel_from_spec(spec)


def test_load_json_reports_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"kind": "choi",\n  "din": }')
    with pytest.raises(SpecError, match="line 2"):
        serialization.load_json(path)


def test_load_missing_file(tmp_path):
    with pytest.raises(SpecError, match="not found"):
        serialization.load_channel(tmp_path / "missing.json")


def test_csv_moves_matrices_to_side_files(tmp_path):
    payload = {"name": "lr", "value": 1.5, "witness": np.eye(2, dtype=complex)}
    text, side = serialization.dumps_csv(payload, side_dir=tmp_path, stem="out")
    rows = dict(line.split(",", 1) for line in text.strip().splitlines()[1:])
    assert rows["value"] == "1.5"
    assert rows["witness"].startswith("@out.")
    name = rows["witness"][1:]
    assert name in side
    assert (tmp_path / name).exists()


def test_json_output_is_deterministic(tmp_path):
    result = MeasureResult(name="lr_channel", value=2.0, extras={"b": 1, "a": 2})
    first = serialization.render(result, "json", str(tmp_path / "a.json"))
    second = serialization.render(result, "json", str(tmp_path / "b.json"))
    assert first == second
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_unknown_format():
    with pytest.raises(SpecError):
        serialization.render({}, "xml")
