"""Machine-readable experiment records and matrix serialization.

A :class:`ResultRecord` captures one CLI command's outcome: the configuration
it ran with, per-trial metrics, their aggregates, and timing. Serialization
is canonical (sorted keys, native scalars) so identical experiments produce
identical bytes; the wall clock is the one legitimately varying field, and
``canonical_bytes`` zeroes it for byte-level comparisons.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import FormatError, InvalidInput

RECORD_FIELDS = (
    "command",
    "config",
    "seed",
    "artifact_version",
    "per_trial",
    "aggregates",
    "wall_clock_s",
)


def to_native(obj):
    """Recursively convert numpy scalars/arrays into JSON-native values."""
    if isinstance(obj, dict):
        return {str(k): to_native(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_native(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_native(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    raise InvalidInput(f"value of type {type(obj).__name__} is not serializable")


def aggregate_metrics(per_trial: list[dict]) -> dict:
    """Mean / median / stderr for every numeric metric across trials."""
    if not per_trial:
        return {}
    keys = sorted(
        k
        for k in per_trial[0]
        if isinstance(per_trial[0][k], (int, float, np.integer, np.floating))
        and not isinstance(per_trial[0][k], (bool, np.bool_))
    )
    out: dict = {}
    for k in keys:
        values = np.asarray([float(t[k]) for t in per_trial if k in t])
        if values.size == 0:
            continue
        stderr = float(values.std(ddof=1) / np.sqrt(values.size)) if values.size > 1 else 0.0
        out[k] = {
            "mean": float(values.mean()),
            "median": float(np.median(values)),
            "stderr": stderr,
        }
    return out


@dataclass(frozen=True)
class ResultRecord:
    """One command's outcome: config echo, per-trial metrics, aggregates."""

    command: str
    config: dict
    seed: int
    artifact_version: str
    per_trial: list = field(default_factory=list)
    aggregates: dict = field(default_factory=dict)
    wall_clock_s: float = 0.0

    def to_json_dict(self) -> dict:
        return to_native(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"

    def canonical_bytes(self) -> bytes:
        """Serialized bytes with the wall clock zeroed.

        Two runs of the same seeded experiment must agree on these bytes;
        timing is the only field allowed to differ.
        """
        blob = self.to_json_dict()
        blob["wall_clock_s"] = 0.0
        return json.dumps(blob, indent=2, sort_keys=True).encode() + b"\n"

    @classmethod
    def from_json(cls, text: str) -> "ResultRecord":
        try:
            blob = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"result record is not valid JSON: {exc}") from exc
        if not isinstance(blob, dict):
            raise FormatError("result record must be a JSON object")
        missing = [k for k in RECORD_FIELDS if k not in blob]
        extra = [k for k in blob if k not in RECORD_FIELDS]
        if missing or extra:
            raise FormatError(
                f"result record fields off: missing {missing}, unknown {extra}"
            )
        return cls(
            command=str(blob["command"]),
            config=dict(blob["config"]),
            seed=int(blob["seed"]),
            artifact_version=str(blob["artifact_version"]),
            per_trial=list(blob["per_trial"]),
            aggregates=dict(blob["aggregates"]),
            wall_clock_s=float(blob["wall_clock_s"]),
        )

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_json())
        return path

    @classmethod
    def load(cls, path) -> "ResultRecord":
        return cls.from_json(Path(path).read_text())


def save_matrix_json(path, matrix) -> Path:
    """Write a square matrix as ``{"dim": d, "data": [row-major floats]}``."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise InvalidInput(f"matrix must be square, got shape {matrix.shape}")
    blob = {"dim": int(matrix.shape[0]), "data": [float(v) for v in matrix.ravel()]}
    path = Path(path)
    path.write_text(json.dumps(blob, indent=2, sort_keys=True) + "\n")
    return path


def load_matrix_json(path) -> np.ndarray:
    """Read a matrix written by :func:`save_matrix_json`."""
    try:
        blob = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"matrix file is not valid JSON: {exc}") from exc
    if not isinstance(blob, dict) or "dim" not in blob or "data" not in blob:
        raise FormatError('matrix file must be {"dim": d, "data": [...]}')
    dim = blob["dim"]
    data = blob["data"]
    if not isinstance(dim, int) or dim < 1:
        raise FormatError(f"matrix dim must be a positive integer, got {dim!r}")
    if not isinstance(data, list) or len(data) != dim * dim:
        raise FormatError(
            f"matrix data must hold dim^2 = {dim * dim} values, got "
            f"{len(data) if isinstance(data, list) else type(data).__name__}"
        )
    try:
        values = np.asarray([float(v) for v in data], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"matrix data holds a non-numeric entry: {exc}") from exc
    return values.reshape(dim, dim)
