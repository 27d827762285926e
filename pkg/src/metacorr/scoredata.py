"""System x document score tables.

A :class:`ScoreMatrix` holds one score per (system, document) pair, either
automatic-metric scores or human judgments. Rows are systems, columns are
documents. Everything downstream (correlations, bootstrap resampling) is
built on the selection and aggregation helpers defined here.

Two on-disk formats are supported:

* CSV long format with the header ``system_id,doc_id,score``, one row per cell.
* JSON ``{"label": str, "systems": [str], "docs": [str], "scores": [[num]]}``
  with row-major scores.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError

CSV_HEADER = ("system_id", "doc_id", "score")
FORMATS = ("csv-long", "json")


@dataclass(frozen=True, eq=False)
class ScoreMatrix:
    """Dense N x M table of finite scores.

    Equality compares ids and values; ``label`` is descriptive only.
    """

    system_ids: tuple[str, ...]
    doc_ids: tuple[str, ...]
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        system_ids = tuple(str(s) for s in self.system_ids)
        doc_ids = tuple(str(d) for d in self.doc_ids)
        if not system_ids:
            raise InputError("score matrix has no systems")
        if not doc_ids:
            raise InputError("score matrix has no documents")
        _check_unique(system_ids, "system_id")
        _check_unique(doc_ids, "doc_id")
        values = np.array(self.values, dtype=np.float64, order="C", copy=True)
        if values.shape != (len(system_ids), len(doc_ids)):
            raise InputError(
                f"values have shape {values.shape}, expected "
                f"({len(system_ids)}, {len(doc_ids)})"
            )
        bad = np.argwhere(~np.isfinite(values))
        if bad.size:
            i, j = bad[0]
            raise InputError(
                f"non-finite score for system {system_ids[i]!r}, doc {doc_ids[j]!r}",
                system_id=system_ids[i],
                doc_id=doc_ids[j],
            )
        values.flags.writeable = False
        object.__setattr__(self, "system_ids", system_ids)
        object.__setattr__(self, "doc_ids", doc_ids)
        object.__setattr__(self, "values", values)

    @property
    def n_systems(self) -> int:
        return len(self.system_ids)

    @property
    def n_docs(self) -> int:
        return len(self.doc_ids)

    def __eq__(self, other):
        if not isinstance(other, ScoreMatrix):
            return NotImplemented
        return (
            self.system_ids == other.system_ids
            and self.doc_ids == other.doc_ids
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    def __repr__(self):
        return (
            f"ScoreMatrix(label={self.label!r}, n_systems={self.n_systems}, "
            f"n_docs={self.n_docs})"
        )


@dataclass(frozen=True, eq=False)
class SystemAggregate:
    """Per-system mean scores over ``doc_count`` documents."""

    system_ids: tuple[str, ...]
    means: np.ndarray
    doc_count: int
    label: str = field(default="")

    def __post_init__(self):
        means = np.array(self.means, dtype=np.float64, copy=True)
        if means.ndim != 1 or len(means) != len(self.system_ids):
            raise InputError("one mean per system is required")
        means.flags.writeable = False
        object.__setattr__(self, "system_ids", tuple(self.system_ids))
        object.__setattr__(self, "means", means)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.system_ids, self.means.tolist()))


def _check_unique(ids: Sequence[str], what: str) -> None:
    if len(set(ids)) != len(ids):
        dup = next(k for k, c in Counter(ids).items() if c > 1)
        raise InputError(f"duplicate {what} {dup!r}")


def row_means(values: np.ndarray) -> np.ndarray:
    """Row means of a C-contiguous 2-D array.

    numpy reduces a contiguous axis with pairwise summation, so the result is
    deterministic and insensitive to column order up to rounding.
    """
    values = np.ascontiguousarray(values, dtype=np.float64)
    return values.mean(axis=1)


def system_means(m: ScoreMatrix) -> SystemAggregate:
    """Average every system's scores over all documents of ``m``."""
    return SystemAggregate(m.system_ids, row_means(m.values), m.n_docs, m.label)


def _occurrence_ids(ids: Sequence[str], indices: Sequence[int]) -> list[str]:
    # first occurrence keeps its id, the k-th repeat becomes "id#k"
    seen: Counter = Counter()
    out = []
    for i in indices:
        seen[i] += 1
        k = seen[i]
        out.append(ids[i] if k == 1 else f"{ids[i]}#{k}")
    return out


def _check_indices(indices, size: int, axis: str) -> np.ndarray:
    idx = np.asarray(indices)
    if idx.ndim != 1 or idx.size == 0:
        raise InputError(f"{axis} index list must be a nonempty 1-D sequence")
    if not np.issubdtype(idx.dtype, np.integer):
        raise InputError(f"{axis} indices must be integers")
    if idx.min() < 0 or idx.max() >= size:
        raise InputError(f"{axis} index out of range [0, {size})")
    return idx.astype(np.intp, copy=False)


def select_docs(m: ScoreMatrix, indices: Sequence[int]) -> ScoreMatrix:
    """Columns of ``m`` at ``indices``, in order; repeats are allowed."""
    idx = _check_indices(indices, m.n_docs, "doc")
    return ScoreMatrix(
        m.system_ids,
        _occurrence_ids(m.doc_ids, idx.tolist()),
        np.take(m.values, idx, axis=1),
        m.label,
    )


def select_systems(m: ScoreMatrix, indices: Sequence[int]) -> ScoreMatrix:
    """Rows of ``m`` at ``indices``, in order; repeats are allowed."""
    idx = _check_indices(indices, m.n_systems, "system")
    return ScoreMatrix(
        _occurrence_ids(m.system_ids, idx.tolist()),
        m.doc_ids,
        np.take(m.values, idx, axis=0),
        m.label,
    )


def align_systems(a: ScoreMatrix, b: ScoreMatrix) -> tuple[ScoreMatrix, ScoreMatrix]:
    """Restrict both matrices to their common systems, sorted lexicographically."""
    common = sorted(set(a.system_ids) & set(b.system_ids))
    if len(common) < 2:
        raise InputError(
            f"matrices {a.label!r} and {b.label!r} share {len(common)} system(s); at least 2 needed"
        )

    def reorder(m: ScoreMatrix) -> ScoreMatrix:
        if list(m.system_ids) == common:
            return m
        pos = {s: i for i, s in enumerate(m.system_ids)}
        return ScoreMatrix(common, m.doc_ids, m.values[[pos[s] for s in common]], m.label)

    return reorder(a), reorder(b)


def restrict_to_common_docs(metric: ScoreMatrix, human: ScoreMatrix) -> ScoreMatrix:
    """The metric matrix restricted to the human matrix's documents, in human order."""
    pos = {d: j for j, d in enumerate(metric.doc_ids)}
    missing = [d for d in human.doc_ids if d not in pos]
    if missing:
        raise InputError(
            f"judged doc {missing[0]!r} has no metric scores "
            f"({len(missing)} judged doc(s) missing)",
            doc_id=missing[0],
        )
    if list(metric.doc_ids) == list(human.doc_ids):
        return metric
    cols = [pos[d] for d in human.doc_ids]
    return ScoreMatrix(metric.system_ids, human.doc_ids, metric.values[:, cols], metric.label)


# --------------------------------------------------------------------------
# parsing / serialization


def _parse_score(text: str, system_id: str, doc_id: str, where: str) -> float:
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise InputError(
            f"{where}: non-numeric score {text!r} for system {system_id!r}, doc {doc_id!r}",
            system_id=system_id,
            doc_id=doc_id,
        ) from None
    if not math.isfinite(value):
        raise InputError(
            f"{where}: non-finite score {text!r} for system {system_id!r}, doc {doc_id!r}",
            system_id=system_id,
            doc_id=doc_id,
        )
    return value


def _from_cells(cells: dict, systems: list[str], docs: list[str], label: str) -> ScoreMatrix:
    values = np.empty((len(systems), len(docs)))
    for i, s in enumerate(systems):
        for j, d in enumerate(docs):
            try:
                values[i, j] = cells[s, d]
            except KeyError:
                raise InputError(
                    f"missing score for system {s!r}, doc {d!r}", system_id=s, doc_id=d
                ) from None
    return ScoreMatrix(systems, docs, values, label)


def _parse_csv(text: str, label: str) -> ScoreMatrix:
    reader = csv.reader(io.StringIO(text, newline=""))
    rows = [r for r in reader if r]
    if not rows:
        raise InputError("empty score table")
    header = [h.strip() for h in rows[0]]
    if tuple(header) != CSV_HEADER:
        raise InputError(f"malformed header {rows[0]!r}; expected {','.join(CSV_HEADER)}")
    if len(rows) == 1:
        raise InputError("score table has a header but no rows")
    cells: dict[tuple[str, str], float] = {}
    systems: dict[str, None] = {}
    docs: dict[str, None] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 3:
            raise InputError(f"line {lineno}: expected 3 fields, got {len(row)}")
        s, d, raw = row
        if (s, d) in cells:
            raise InputError(
                f"line {lineno}: duplicate entry for system {s!r}, doc {d!r}",
                system_id=s,
                doc_id=d,
            )
        cells[s, d] = _parse_score(raw.strip(), s, d, f"line {lineno}")
        systems.setdefault(s)
        docs.setdefault(d)
    return _from_cells(cells, list(systems), list(docs), label)


def _parse_json(text: str, label: str) -> ScoreMatrix:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise InputError("JSON score table must be an object")
    for key in ("systems", "docs", "scores"):
        if key not in obj:
            raise InputError(f"JSON score table lacks {key!r}")
    systems, docs, scores = obj["systems"], obj["docs"], obj["scores"]
    if not isinstance(systems, list) or not isinstance(docs, list) or not isinstance(scores, list):
        raise InputError("'systems', 'docs' and 'scores' must be arrays")
    if not systems or not docs:
        raise InputError("empty score table")
    if not all(isinstance(x, str) for x in systems + docs):
        raise InputError("system and doc ids must be strings")
    _check_unique(systems, "system_id")
    _check_unique(docs, "doc_id")
    if len(scores) != len(systems):
        raise InputError(f"'scores' has {len(scores)} rows for {len(systems)} systems")
    values = np.empty((len(systems), len(docs)))
    for i, (s, row) in enumerate(zip(systems, scores)):
        if not isinstance(row, list) or len(row) != len(docs):
            raise InputError(f"scores row for system {s!r} must have {len(docs)} entries", system_id=s)
        for j, (d, v) in enumerate(zip(docs, row)):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise InputError(
                    f"non-numeric score {v!r} for system {s!r}, doc {d!r}", system_id=s, doc_id=d
                )
            values[i, j] = _parse_score(v, s, d, "json")
    return ScoreMatrix(systems, docs, values, obj.get("label", label) or label)


def parse_score_table(data: str | bytes, format: str = "csv-long", label: str = "") -> ScoreMatrix:
    """Parse a score table from text (or UTF-8 bytes).

    Rows and columns follow first-appearance order of the ids. Every
    (system, doc) cell must be present exactly once; a missing, duplicate,
    or non-finite cell raises :class:`InputError`.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InputError(f"score table is not valid UTF-8: {exc}") from None
    data = data.removeprefix("\ufeff")
    if format == "csv-long":
        return _parse_csv(data, label)
    if format == "json":
        return _parse_json(data, label)
    raise InputError(f"unknown format {format!r}; expected one of {FORMATS}")


def format_for_path(path: str | Path) -> str:
    return "json" if str(path).lower().endswith(".json") else "csv-long"


def read_score_table(path: str | Path, format: str | None = None) -> ScoreMatrix:
    """Read a score table file; the format is guessed from the extension."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {str(path)!r}: {exc.strerror}") from None
    return parse_score_table(raw, format or format_for_path(path), label=path.stem)


def dump_score_table(m: ScoreMatrix, format: str = "csv-long") -> str:
    """Serialize ``m``; floats use ``repr`` so parsing is lossless."""
    if format == "csv-long":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        try:
            for s, row in zip(m.system_ids, m.values.tolist()):
                for d, v in zip(m.doc_ids, row):
                    writer.writerow((s, d, repr(v)))
        except csv.Error as exc:
            raise InputError(f"ids cannot be written as CSV: {exc}") from None
        return buf.getvalue()
    if format == "json":
        obj = {
            "label": m.label,
            "systems": list(m.system_ids),
            "docs": list(m.doc_ids),
            "scores": m.values.tolist(),
        }
        return json.dumps(obj) + "\n"
    raise InputError(f"unknown format {format!r}; expected one of {FORMATS}")


def write_score_table(m: ScoreMatrix, path: str | Path, format: str | None = None) -> None:
    Path(path).write_text(dump_score_table(m, format or format_for_path(path)), encoding="utf-8")


def from_rows(rows: Iterable[tuple[str, str, float]], label: str = "") -> ScoreMatrix:
    """Build a matrix from ``(system_id, doc_id, score)`` triples."""
    cells: dict[tuple[str, str], float] = {}
    systems: dict[str, None] = {}
    docs: dict[str, None] = {}
    for s, d, v in rows:
        if (s, d) in cells:
            raise InputError(f"duplicate entry for system {s!r}, doc {d!r}", system_id=s, doc_id=d)
        cells[s, d] = float(v)
        systems.setdefault(s)
        docs.setdefault(d)
    if not cells:
        raise InputError("empty score table")
    return _from_cells(cells, list(systems), list(docs), label)
