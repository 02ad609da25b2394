import csv
import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from pydantic import BaseModel, Field

from ..lyapunov.contraction import LyapunovRecord

TRACE_HEADER = ("iter", "lyapunov", "envelope", "kkt", "wall_ns")


class TraceMetadata(BaseModel):
    """JSON sidecar written next to each trace CSV"""
    algorithm: str
    regime: str
    seed: int
    iterations: int
    stepsizes: Dict[str, Any]
    rate: Dict[str, Any]
    constants: Dict[str, Any]
    problem: Dict[str, Any] = Field(default_factory=dict)
    oracle_calls: Dict[str, int] = Field(default_factory=dict)
    reference_method: Optional[str] = None
    final_kkt: Optional[float] = None
    predicted_iterations: Optional[int] = None
    complexity_trend: Optional[float] = None
    no_linear_rate: bool = False
    artifact_constants: Dict[str, Any] = Field(default_factory=dict)


def trace_paths(out_dir: Union[str, Path], name: str):
    out = Path(out_dir)
    return out / f"{name}.csv", out / f"{name}.json"


def write_trace(out_dir: Union[str, Path], name: str, trace: Sequence[LyapunovRecord],
                metadata: TraceMetadata) -> Path:
    """
    Write <name>.csv (one row per iterate) and <name>.json

    Floats are written with repr, so identical traces give identical bytes.

    Returns:
        Path: The CSV path
    """
    csv_path, json_path = trace_paths(out_dir, name)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for rec in trace:
            writer.writerow([rec.k, repr(float(rec.value)), repr(float(rec.envelope)),
                             repr(float(rec.kkt)), rec.wall_ns])
    json_path.write_text(metadata.model_dump_json(indent=2))
    return csv_path


def read_trace(csv_path: Union[str, Path]) -> List[LyapunovRecord]:
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        return [
            LyapunovRecord(k=int(row["iter"]), value=float(row["lyapunov"]), envelope=float(row["envelope"]),
                           kkt=float(row["kkt"]), wall_ns=int(row["wall_ns"]))
            for row in reader
        ]


def read_metadata(json_path: Union[str, Path]) -> TraceMetadata:
    return TraceMetadata.model_validate(json.loads(Path(json_path).read_text()))
