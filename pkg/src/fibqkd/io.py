"""Reading and writing matrices, metric tables and trial logs.

CSV matrices are bare ``dim x dim`` grids (rows = Bob) with 17 significant
digits, enough to round-trip a double.  JSON matrices carry the outcome
labels and the four blocks; exact matrices store entries as ``"p/q"``
strings.
"""

from __future__ import annotations

import csv
import json
from fractions import Fraction
from pathlib import Path
from typing import Iterable, List, Sequence

import numpy as np

from .engine import JointProbabilityMatrix
from .infometrics import SecurityMetrics
from .protocol import ProtocolConfig, outcome_labels

FLOAT_FMT = "{:.17g}"


def _fmt(x) -> str:
    return FLOAT_FMT.format(float(x))


def _json_value(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    return float(x)


def _parse_value(x):
    return Fraction(x) if isinstance(x, str) else float(x)


def _nested(a: np.ndarray) -> list:
    return [[_json_value(x) for x in row] for row in a]


def write_matrix_csv(path: Path, m) -> Path:
    arr = np.asarray(m.as_array() if isinstance(m, JointProbabilityMatrix) else m, dtype=float)
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in arr:
            w.writerow([_fmt(x) for x in row])
    return path


def read_matrix_csv(path: Path) -> np.ndarray:
    with Path(path).open(newline="") as fh:
        return np.array([[float(x) for x in row] for row in csv.reader(fh)])


def matrix_to_json(m: JointProbabilityMatrix, config: ProtocolConfig) -> dict:
    return {
        "n": m.n,
        "exact": m.exact,
        "labels": outcome_labels(config),
        "entries": _nested(m.entries),
        "blocks": {k: _nested(v) for k, v in m.blocks().items()},
    }


def write_matrix_json(path: Path, m, config: ProtocolConfig) -> Path:
    if not isinstance(m, JointProbabilityMatrix):
        m = JointProbabilityMatrix(np.asarray(m), config.n)
    path = Path(path)
    path.write_text(json.dumps(matrix_to_json(m, config), indent=1) + "\n")
    return path


def read_matrix_json(path: Path) -> JointProbabilityMatrix:
    data = json.loads(Path(path).read_text())
    rows = [[_parse_value(x) for x in row] for row in data["entries"]]
    arr = np.array(rows, dtype=object if data.get("exact") else float)
    return JointProbabilityMatrix(arr, int(data["n"]))


def write_matrix(path_stem: Path, m, config: ProtocolConfig, fmt: str) -> Path:
    if fmt == "csv":
        return write_matrix_csv(Path(f"{path_stem}.csv"), m)
    return write_matrix_json(Path(f"{path_stem}.json"), m, config)


def write_metrics(path_stem: Path, rows: Sequence[SecurityMetrics], fmt: str) -> Path:
    if fmt == "csv":
        path = Path(f"{path_stem}.csv")
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SecurityMetrics.columns())
            for r in rows:
                w.writerow([_fmt(x) for x in r.as_row()])
        return path
    path = Path(f"{path_stem}.json")
    path.write_text(json.dumps([r.as_dict() for r in rows], indent=1) + "\n")
    return path


def read_metrics_csv(path: Path) -> List[SecurityMetrics]:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        return [SecurityMetrics(**{k: float(v) for k, v in row.items()}) for row in reader]


def write_json(path: Path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n")
    return path


def write_trial_log(path: Path, records: Iterable, config: ProtocolConfig) -> Path:
    """One JSON object per line, keyed by the trial record's field names."""
    path = Path(path)
    with path.open("w") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_json(config), separators=(",", ":")) + "\n")
    return path
