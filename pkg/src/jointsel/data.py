"""Dataset containers and the delimited on-disk format.

A dataset is two CSV files side by side: a long-format longitudinal file
(subject_id, risk_factor, age, value) and a survival file
(subject_id, time, event, <covariate columns...>).  Generated datasets
may add a ``truth.json`` sidecar with the generating parameters.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = ["SubjectRecord", "Dataset", "DataFormatError", "ingest_dataset", "write_dataset"]

LONGITUDINAL_FILE = "longitudinal.csv"
SURVIVAL_FILE = "survival.csv"
TRUTH_FILE = "truth.json"


class DataFormatError(ValueError):
    """Schema or referential-integrity violation in a dataset file."""


@dataclass
class SubjectRecord:
    """One individual: repeated measurements per risk factor plus the
    survival triple.  ``time`` is study time since the baseline visit."""

    subject_id: str
    ages: list[np.ndarray]  # per risk factor, visit ages
    values: list[np.ndarray]  # per risk factor, measurements
    time: float
    event: bool
    covariates: np.ndarray

    @property
    def baseline_age(self) -> float:
        present = [a[0] for a in self.ages if a.size]
        return float(min(present)) if present else 0.0

    def n_obs(self) -> int:
        return int(sum(a.size for a in self.ages))


@dataclass
class Dataset:
    subjects: list[SubjectRecord]
    n_risk_factors: int
    covariate_names: list[str] = field(default_factory=lambda: ["race"])

    def __len__(self) -> int:
        return len(self.subjects)

    @property
    def max_age(self) -> float:
        top = 0.0
        for s in self.subjects:
            for a in s.ages:
                if a.size:
                    top = max(top, float(a.max()))
            top = max(top, s.baseline_age + s.time)
        return top

    def observed_times(self) -> np.ndarray:
        return np.array([s.time for s in self.subjects])

    def event_flags(self) -> np.ndarray:
        return np.array([s.event for s in self.subjects], dtype=bool)


def _parse_float(token: str, path: Path, line_no: int, col: str) -> float:
    try:
        return float(token)
    except ValueError as exc:
        raise DataFormatError(f"{path}:{line_no}: bad {col} value {token!r}") from exc


def ingest_dataset(path: str | Path) -> Dataset:
    """Load and validate a dataset directory.

    Raises :class:`DataFormatError` with a file/line reference for schema
    violations, unknown risk-factor ids, nonpositive event times, and
    subjects present in one file but not the other.
    """
    base = Path(path)
    long_path = base / LONGITUDINAL_FILE
    surv_path = base / SURVIVAL_FILE
    if not long_path.exists():
        raise DataFormatError(f"missing longitudinal file {long_path}")
    if not surv_path.exists():
        raise DataFormatError(f"missing survival file {surv_path}")

    # Survival file first: defines the subject universe and covariates.
    surv: dict[str, tuple[float, bool, np.ndarray]] = {}
    order: list[str] = []
    with surv_path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:3] != ["subject_id", "time", "event"]:
            raise DataFormatError(
                f"{surv_path}:1: header must start with subject_id,time,event"
            )
        cov_names = header[3:]
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3 + len(cov_names):
                raise DataFormatError(f"{surv_path}:{line_no}: expected {3 + len(cov_names)} fields")
            sid = row[0]
            if sid in surv:
                raise DataFormatError(f"{surv_path}:{line_no}: duplicate subject {sid!r}")
            time = _parse_float(row[1], surv_path, line_no, "time")
            if time <= 0:
                raise DataFormatError(f"{surv_path}:{line_no}: event time must be > 0")
            ev_tok = row[2].strip().lower()
            if ev_tok not in ("0", "1", "true", "false"):
                raise DataFormatError(f"{surv_path}:{line_no}: bad event flag {row[2]!r}")
            event = ev_tok in ("1", "true")
            cov = np.array(
                [_parse_float(tok, surv_path, line_no, name) for tok, name in zip(row[3:], cov_names)]
            )
            surv[sid] = (time, event, cov)
            order.append(sid)

    obs: dict[str, dict[int, list[tuple[float, float]]]] = {}
    max_factor = 0
    n_rows = 0
    with long_path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header != ["subject_id", "risk_factor", "age", "value"]:
            raise DataFormatError(
                f"{long_path}:1: header must be subject_id,risk_factor,age,value"
            )
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise DataFormatError(f"{long_path}:{line_no}: expected 4 fields")
            sid = row[0]
            if sid not in surv:
                raise DataFormatError(
                    f"{long_path}:{line_no}: subject {sid!r} missing from survival file"
                )
            try:
                factor = int(row[1])
            except ValueError as exc:
                raise DataFormatError(f"{long_path}:{line_no}: bad risk_factor {row[1]!r}") from exc
            if factor < 1:
                raise DataFormatError(f"{long_path}:{line_no}: risk_factor ids are 1-based")
            age = _parse_float(row[2], long_path, line_no, "age")
            if age < 0:
                raise DataFormatError(f"{long_path}:{line_no}: age must be >= 0")
            value = _parse_float(row[3], long_path, line_no, "value")
            if not np.isfinite(value):
                raise DataFormatError(f"{long_path}:{line_no}: value must be finite")
            obs.setdefault(sid, {}).setdefault(factor, []).append((age, value))
            max_factor = max(max_factor, factor)
            n_rows += 1

    if n_rows == 0:
        raise DataFormatError(f"{long_path}: no observations")
    missing = [sid for sid in order if sid not in obs]
    if missing:
        raise DataFormatError(
            f"{surv_path}: subjects with no longitudinal observations: {missing[:5]}"
        )

    subjects = []
    for sid in order:
        time, event, cov = surv[sid]
        per_factor = obs.get(sid, {})
        unknown = [f for f in per_factor if f > max_factor]
        if unknown:
            raise DataFormatError(f"unknown risk-factor ids {unknown} for subject {sid!r}")
        ages, values = [], []
        for g in range(1, max_factor + 1):
            pairs = sorted(per_factor.get(g, []))
            ages.append(np.array([p[0] for p in pairs]))
            values.append(np.array([p[1] for p in pairs]))
        subjects.append(
            SubjectRecord(
                subject_id=sid, ages=ages, values=values, time=time, event=event, covariates=cov
            )
        )
    return Dataset(subjects=subjects, n_risk_factors=max_factor, covariate_names=cov_names)


def write_dataset(dataset: Dataset, path: str | Path, truth: dict | None = None) -> Path:
    """Write the two CSV files (and optional truth sidecar); floats use
    repr so a round trip reproduces the in-memory values exactly."""
    base = Path(path)
    base.mkdir(parents=True, exist_ok=True)
    with (base / LONGITUDINAL_FILE).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["subject_id", "risk_factor", "age", "value"])
        for s in dataset.subjects:
            for g, (ages, values) in enumerate(zip(s.ages, s.values), start=1):
                for a, v in zip(ages, values):
                    writer.writerow([s.subject_id, g, repr(float(a)), repr(float(v))])
    with (base / SURVIVAL_FILE).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["subject_id", "time", "event"] + list(dataset.covariate_names))
        for s in dataset.subjects:
            row = [s.subject_id, repr(float(s.time)), int(s.event)]
            row += [repr(float(c)) for c in s.covariates]
            writer.writerow(row)
    if truth is not None:
        with (base / TRUTH_FILE).open("w") as fh:
            json.dump(truth, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return base


def read_truth(path: str | Path) -> dict | None:
    sidecar = Path(path) / TRUTH_FILE
    if not sidecar.exists():
        return None
    with sidecar.open() as fh:
        return json.load(fh)
