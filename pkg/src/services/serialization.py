"""Spec parsing and report emission (JSON, CSV with side files, text)."""

import csv
import hashlib
import io
import json
import logging
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, TypeAdapter, ValidationError

from ..errors import SpecError
from ..models.channel import QuantumChannel, QuantumState
from ..models.specs import (
    BuilderSpec,
    ChannelSpec,
    ChoiSpec,
    KrausSpec,
    LinearSpec,
    MeasurePrepareSpec,
    PrePostSpec,
    SuperchannelSpec,
)
from ..models.superchannel import LinearAction, MeasurePrepare, PrePost, Superchannel

logger = logging.getLogger(__name__)

_channel_adapter = TypeAdapter(ChannelSpec)
_superchannel_adapter = TypeAdapter(SuperchannelSpec)


# ---------------------------------------------------------------------------
# Values
# ---------------------------------------------------------------------------


def _scalar(value: complex) -> list[float]:
    return [float(np.real(value)), float(np.imag(value))]


def matrix_to_json(m: np.ndarray) -> list:
    """Row-major nested lists of [re, im] pairs."""
    m = np.asarray(m)
    if m.ndim == 1:
        return [_scalar(v) for v in m]
    return [[_scalar(v) for v in row] for row in m]


def _entry(value: Any) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, dict) and "re" in value:
        return complex(float(value["re"]), float(value.get("im", 0.0)))
    raise SpecError(f"Cannot read matrix entry {value!r}; expected a number or [re, im]")


def matrix_from_json(payload: list) -> np.ndarray:
    try:
        rows = [[_entry(v) for v in row] for row in payload]
    except TypeError as e:
        raise SpecError(f"Malformed matrix payload: {e}") from e
    if not rows or any(len(row) != len(rows[0]) for row in rows):
        raise SpecError("Matrix rows must be non-empty and of equal length")
    return np.array(rows, dtype=np.complex128)


def _float(value: float) -> Any:
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def to_jsonable(value: Any) -> Any:
    """Recursively convert arrays, models and channels into JSON-ready data."""
    if value is None or isinstance(value, (bool, str, int)):
        return value
    if isinstance(value, float):
        return _float(value)
    if isinstance(value, np.generic):
        return to_jsonable(value.item())
    if isinstance(value, complex):
        return _scalar(value)
    if isinstance(value, np.ndarray):
        if value.ndim == 0:
            return to_jsonable(value.item())
        if np.iscomplexobj(value):
            return matrix_to_json(value)
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, BaseModel):
        return to_jsonable(value.model_dump(by_alias=True))
    if isinstance(value, (QuantumChannel, QuantumState)):
        return value.to_dict()
    if isinstance(value, Superchannel):
        return superchannel_to_spec(value)
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    return str(value)


# ---------------------------------------------------------------------------
# Specs
# ---------------------------------------------------------------------------


def _validation_message(e: ValidationError) -> str:
    parts = []
    for error in e.errors():
        location = ".".join(str(p) for p in error["loc"])
        parts.append(f"{location}: {error['msg']}")
    return "; ".join(parts)


def parse_builder(text: str, seed: int = 0) -> BuilderSpec:
    """Parse ``name:arg[:seed]`` shorthands such as ``qft:3`` or ``deterministic:0,0``."""
    name, _, rest = text.partition(":")
    name = name.strip().lower()
    args = [a for a in rest.split(":") if a] if rest else []
    try:
        if name == "deterministic":
            f = [int(x) for x in args[0].split(",")]
            dout = int(args[1]) if len(args) > 1 else len(f)
            return BuilderSpec(kind="builder", name="deterministic", f=f, dout=dout)
        if name in ("random", "random-unitary"):
            run_seed = int(args[1]) if len(args) > 1 else seed
            return BuilderSpec(
                kind="builder", name="random", d=int(args[0]), seed=run_seed, unitary=name == "random-unitary"
            )
        return BuilderSpec(kind="builder", name=name, d=int(args[0]))
    except (IndexError, ValueError) as e:
        raise SpecError(f"Malformed builder '{text}': {e}") from e


def channel_from_spec(spec: Any) -> QuantumChannel:
    """Build a channel from a spec model or a raw dict."""
    from . import qobj

    if isinstance(spec, dict):
        try:
            spec = _channel_adapter.validate_python(spec)
        except ValidationError as e:
            raise SpecError(f"Invalid channel spec: {_validation_message(e)}") from e

    if isinstance(spec, ChoiSpec):
        return qobj.make_channel(matrix_from_json(spec.matrix), spec.din, spec.dout, label=spec.label)
    if isinstance(spec, KrausSpec):
        ops = [matrix_from_json(op) for op in spec.operators]
        return qobj.choi_of_kraus(ops, spec.din, spec.dout, label=spec.label)

    name = spec.name
    if name == "qft":
        channel = qobj.qft_channel(spec.d)
    elif name == "dephasing":
        channel = qobj.dephasing_channel(spec.d)
    elif name == "identity":
        channel = qobj.identity_channel(spec.d)
    elif name == "replacement":
        channel = qobj.replacement_channel(spec.d)
    elif name == "deterministic":
        channel = qobj.deterministic_channel(spec.f, len(spec.f), spec.dout or len(spec.f))
    elif name == "unitary":
        channel = qobj.unitary_channel(matrix_from_json(spec.matrix))
    else:
        rng = np.random.default_rng(spec.seed)
        if spec.unitary:
            channel = qobj.random_unitary_channel(spec.d, rng)
        else:
            channel = qobj.random_channel(spec.d, spec.dout or spec.d, rng)
    if spec.label:
        channel = QuantumChannel(din=channel.din, dout=channel.dout, choi=channel.choi, label=spec.label)
    return channel


def superchannel_from_spec(spec: Any) -> Superchannel:
    from . import supermap

    if isinstance(spec, dict):
        try:
            spec = _superchannel_adapter.validate_python(spec)
        except ValidationError as e:
            raise SpecError(f"Invalid superchannel spec: {_validation_message(e)}") from e

    if isinstance(spec, PrePostSpec):
        pre = channel_from_spec(spec.pre)
        post = channel_from_spec(spec.post)
        if pre.dout % spec.denv or post.din % spec.denv:
            raise SpecError(f"Environment dimension {spec.denv} does not divide pre/post dimensions")
        dims = (pre.dout // spec.denv, post.din // spec.denv, pre.din, post.dout)
        return Superchannel(*dims, realization=PrePost(pre=pre, post=post, denv=spec.denv), label=spec.label)
    if isinstance(spec, MeasurePrepareSpec):
        branches = [
            (b.affine, b.coeff, matrix_from_json(b.effect), channel_from_spec(b.target)) for b in spec.branches
        ]
        return supermap.measure_prepare(tuple(spec.dims), branches, label=spec.label)

    if not isinstance(spec, LinearSpec):
        raise SpecError(f"Unsupported superchannel spec of type {type(spec).__name__}")
    matrix = matrix_from_json(spec.matrix)
    dA0, dA1, dB0, dB1 = spec.dims
    expected = ((dB0 * dB1) ** 2, (dA0 * dA1) ** 2)
    if matrix.shape != expected:
        raise SpecError(f"Linear action shape {matrix.shape} does not match dims (expected {expected})")
    return Superchannel(*spec.dims, realization=LinearAction(matrix=matrix), label=spec.label)


def channel_to_spec(n: QuantumChannel) -> dict:
    return n.to_dict()


def superchannel_to_spec(t: Superchannel) -> dict:
    real = t.realization
    if isinstance(real, PrePost):
        return {
            "kind": "prepost",
            "label": t.label,
            "denv": real.denv,
            "pre": channel_to_spec(real.pre),
            "post": channel_to_spec(real.post),
        }
    if isinstance(real, MeasurePrepare):
        return {
            "kind": "measure_prepare",
            "label": t.label,
            "dims": list(t.dims),
            "branches": [
                {
                    "affine": b.affine,
                    "coeff": b.coeff,
                    "effect": matrix_to_json(b.effect),
                    "target": channel_to_spec(b.target),
                }
                for b in real.branches
            ],
        }
    return {"kind": "linear", "label": t.label, "dims": list(t.dims), "matrix": matrix_to_json(real.matrix)}


def load_json(path: str | Path) -> Any:
    path = Path(path)
    if not path.exists():
        raise SpecError(f"Spec file not found: {path}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise SpecError(f"{path}: line {e.lineno}, column {e.colno}: {e.msg}") from e


def load_channel(path: str | Path) -> QuantumChannel:
    data = load_json(path)
    if isinstance(data, dict) and "channel" in data and "kind" not in data:
        data = data["channel"]
    return channel_from_spec(data)


def load_superchannel(path: str | Path) -> Superchannel:
    data = load_json(path)
    if isinstance(data, dict) and "superchannel" in data and "kind" not in data:
        data = data["superchannel"]
    return superchannel_from_spec(data)


# ---------------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------------


def dumps_json(payload: Any) -> str:
    return json.dumps(to_jsonable(payload), indent=2, sort_keys=True) + "\n"


def _is_matrix(value: Any) -> bool:
    return isinstance(value, list) and bool(value) and all(isinstance(v, list) for v in value)


def _flatten(payload: Any, prefix: str = ""):
    if isinstance(payload, dict):
        for key in sorted(payload):
            yield from _flatten(payload[key], f"{prefix}.{key}" if prefix else str(key))
    elif isinstance(payload, list) and not _is_matrix(payload):
        for i, value in enumerate(payload):
            yield from _flatten(value, f"{prefix}[{i}]")
    else:
        yield prefix, payload


def dumps_csv(payload: Any, side_dir: Optional[Path] = None, stem: str = "report") -> tuple[str, dict[str, str]]:
    """Flatten scalars into key,value rows; matrices go to side files named by content hash."""
    side_files: dict[str, str] = {}
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["key", "value"])
    for key, value in _flatten(to_jsonable(payload)):
        if _is_matrix(value):
            text = json.dumps(value, sort_keys=True)
            digest = hashlib.sha256(text.encode()).hexdigest()[:16]
            name = f"{stem}.{digest}.json"
            side_files[name] = text + "\n"
            value = f"@{name}"
        writer.writerow([key, value])
    if side_dir is not None:
        for name, text in side_files.items():
            _atomic_write(side_dir / name, text)
    return buffer.getvalue(), side_files


def dumps_text(payload: Any) -> str:
    lines = []
    for key, value in _flatten(to_jsonable(payload)):
        if _is_matrix(value):
            value = f"<matrix {len(value)}x{len(value[0])}>"
        lines.append(f"{key}: {value}")
    return "\n".join(lines) + "\n"


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def render(payload: Any, fmt: str, output: Optional[str] = None) -> str:
    """Render a report and write it to ``output`` when given; returns the rendered text."""
    fmt = fmt.lower()
    if fmt == "json":
        text = dumps_json(payload)
    elif fmt == "csv":
        from ..config import get_reports_dir

        side_dir = Path(output).parent if output else get_reports_dir()
        stem = Path(output).stem if output else "report"
        text, _ = dumps_csv(payload, side_dir=side_dir, stem=stem)
    elif fmt == "text":
        text = dumps_text(payload)
    else:
        raise SpecError(f"Unknown output format {fmt}")
    if output:
        _atomic_write(Path(output), text)
        logger.info(f"Report written to {output}")
    return text


def render_text(text: str, output: str) -> None:
    _atomic_write(Path(output), text)
    logger.info(f"Report written to {output}")
