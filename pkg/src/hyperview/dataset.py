"""Tabular ingestion with verbatim missing-value tokens, unit-interval
normalization, and deterministic stratified fold splitting."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

DELIMITERS = (",", "\t", ";")
EMPTY_TOKEN = "Empty"


@dataclass(frozen=True)
class Cell:
    """One table cell: either a numeric value or the verbatim source token
    of a missing entry. Exactly one of the two is set."""

    value: Optional[float] = None
    missing_token: Optional[str] = None

    def __post_init__(self):
        if (self.value is None) == (self.missing_token is None):
            raise ValueError("cell holds exactly one of value / missing_token")

    @property
    def is_missing(self) -> bool:
        return self.missing_token is not None


@dataclass(frozen=True)
class Case:
    id: str
    label: str
    cells: tuple[Cell, ...]

    @property
    def is_complete(self) -> bool:
        return not any(c.is_missing for c in self.cells)


@dataclass
class Dataset:
    coordinate_names: list[str]
    cases: list[Case]
    class_labels: list[str]
    raw_ranges: list[tuple[float, float]]

    @property
    def n_coordinates(self) -> int:
        return len(self.coordinate_names)

    def complete_indices(self) -> list[int]:
        return [i for i, c in enumerate(self.cases) if c.is_complete]

    def coordinate_index(self, name_or_index) -> int:
        if isinstance(name_or_index, int):
            idx = name_or_index
            if idx < 0:
                idx += self.n_coordinates
            if not 0 <= idx < self.n_coordinates:
                raise ValueError(f"coordinate index {name_or_index} out of range")
            return idx
        try:
            return self.coordinate_names.index(name_or_index)
        except ValueError:
            raise ValueError(f"unknown coordinate {name_or_index!r}") from None

    def to_json(self) -> str:
        cells = lambda c: [
            {"missing": cell.missing_token} if cell.is_missing else {"v": cell.value}
            for cell in c.cells
        ]
        doc = {
            "coordinates": self.coordinate_names,
            "classes": self.class_labels,
            "cases": [
                {"id": c.id, "class": c.label, "cells": cells(c)} for c in self.cases
            ],
        }
        return canonical_json(doc)


def canonical_json(obj) -> str:
    """Stable JSON encoding shared by every surface, so equal inputs give
    byte-equal output."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def dataset_from_json(text: str) -> Dataset:
    doc = json.loads(text)
    cases = []
    for rec in doc["cases"]:
        cells = tuple(
            Cell(missing_token=c["missing"]) if "missing" in c else Cell(value=float(c["v"]))
            for c in rec["cells"]
        )
        cases.append(Case(id=str(rec["id"]), label=str(rec["class"]), cells=cells))
    return _assemble(doc["coordinates"], cases, class_order=doc["classes"])


def _assemble(names, cases, class_order=None) -> Dataset:
    if class_order is None:
        class_order = []
        for c in cases:
            if c.label not in class_order:
                class_order.append(c.label)
    ranges = []
    for j in range(len(names)):
        present = [c.cells[j].value for c in cases if not c.cells[j].is_missing]
        if present:
            ranges.append((min(present), max(present)))
        else:
            ranges.append((0.0, 0.0))
    return Dataset(list(names), cases, class_order, ranges)


def _sniff_delimiter(line: str) -> str:
    counts = {d: line.count(d) for d in DELIMITERS}
    return max(counts, key=counts.get)


def _try_float(tok: str) -> Optional[float]:
    try:
        return float(tok)
    except ValueError:
        return None


def parse_table(
    text: str,
    class_column,
    id_column=None,
    missing_tokens: Optional[Sequence[str]] = None,
    delimiter: Optional[str] = None,
    has_header: Optional[bool] = None,
) -> Dataset:
    """Parse delimiter-separated rows into a Dataset.

    Any cell that fails numeric parsing becomes a missing-value Cell holding
    the verbatim token; empty cells get the token "Empty". `class_column` and
    `id_column` may be a header name or a (possibly negative) column index.
    When `missing_tokens` is given, tokens outside that list are rejected.
    """
    lines = [ln for ln in text.splitlines() if ln.strip() != ""]
    if not lines:
        raise ValueError("zero data rows")
    delim = delimiter or _sniff_delimiter(lines[0])
    rows = [ln.split(delim) for ln in lines]
    width = len(rows[0])

    first = [tok.strip() for tok in rows[0]]
    if has_header is None:
        has_header = all(_try_float(tok) is None for tok in first) and any(first)
    header = first if has_header else None
    data_rows = rows[1:] if has_header else rows
    if not data_rows:
        raise ValueError("zero data rows")

    def col_index(spec, what):
        if isinstance(spec, int):
            idx = spec if spec >= 0 else spec + width
            if not 0 <= idx < width:
                raise ValueError(f"{what} column {spec} out of range")
            return idx
        if header is None or spec not in header:
            raise ValueError(f"{what} column {spec!r} not found")
        return header.index(spec)

    cls_idx = col_index(class_column, "class")
    id_idx = col_index(id_column, "id") if id_column is not None else None

    coord_cols = [j for j in range(width) if j != cls_idx and j != id_idx]
    if header is not None:
        names = [header[j] for j in coord_cols]
    else:
        names = [f"x{k + 1}" for k in range(len(coord_cols))]

    cases = []
    for r, row in enumerate(data_rows):
        if len(row) != width:
            raise ValueError(f"row {r}: expected {width} columns, got {len(row)}")
        cells = []
        for j in coord_cols:
            tok = row[j].strip()
            val = _try_float(tok) if tok else None
            if val is not None:
                cells.append(Cell(value=val))
            else:
                token = tok if tok else EMPTY_TOKEN
                if missing_tokens is not None and token not in missing_tokens:
                    raise ValueError(f"row {r}: unexpected missing token {token!r}")
                cells.append(Cell(missing_token=token))
        cid = row[id_idx].strip() if id_idx is not None else str(r)
        cases.append(Case(id=cid, label=row[cls_idx].strip(), cells=tuple(cells)))
    return _assemble(names, cases)


@dataclass
class NormalizedDataset:
    """Dataset mapped to the unit hypercube. Missing cells stay NaN in the
    value matrix; the affine transform is invertible per coordinate."""

    base: Dataset
    values: np.ndarray          # (n_cases, n_coords), NaN where missing
    lows: np.ndarray            # raw range per coordinate
    highs: np.ndarray

    @property
    def labels(self) -> np.ndarray:
        order = {c: i for i, c in enumerate(self.base.class_labels)}
        return np.array([order[c.label] for c in self.base.cases], dtype=int)

    def denormalize(self, coord: int, v):
        lo, hi = self.lows[coord], self.highs[coord]
        if hi > lo:
            return v * (hi - lo) + lo
        return np.full_like(np.asarray(v, dtype=float), lo) if np.ndim(v) else lo

    def normalize_value(self, coord: int, raw: float) -> float:
        lo, hi = self.lows[coord], self.highs[coord]
        return (raw - lo) / (hi - lo) if hi > lo else 0.5

    def complete_matrix(self) -> tuple[np.ndarray, np.ndarray, list[int]]:
        """Rows without missing values: (values, labels, original indices)."""
        idx = self.base.complete_indices()
        return self.values[idx], self.labels[idx], idx


def normalize(d: Dataset) -> NormalizedDataset:
    """Affine-map each coordinate onto [0, 1] using its range over present
    values; a constant coordinate maps to 0.5 so it stays displayable."""
    n, m = len(d.cases), d.n_coordinates
    vals = np.full((n, m), np.nan)
    for i, case in enumerate(d.cases):
        for j, cell in enumerate(case.cells):
            if not cell.is_missing:
                vals[i, j] = cell.value
    lows = np.array([r[0] for r in d.raw_ranges], dtype=float)
    highs = np.array([r[1] for r in d.raw_ranges], dtype=float)
    span = highs - lows
    out = np.where(span > 0, (vals - lows) / np.where(span > 0, span, 1.0), 0.5)
    out[np.isnan(vals)] = np.nan
    return NormalizedDataset(base=d, values=out, lows=lows, highs=highs)


@dataclass(frozen=True)
class SplitSpec:
    """Cross-validation split policy. `hb_fraction` is the share of each
    training partition used to learn blocks; the remainder tunes k."""

    fold_count: int
    seed: int = 0
    hb_fraction: float = 1.0

    def __post_init__(self):
        if self.fold_count < 2:
            raise ValueError("fold_count must be >= 2")
        if not 0.0 < self.hb_fraction <= 1.0:
            raise ValueError("hb_fraction must be in (0, 1]")


def fold_assignment(d: Dataset, spec: SplitSpec) -> np.ndarray:
    """Per-case fold index, stratified by class: within each class the cases
    are dealt round-robin onto folds after a seeded shuffle, keeping fold
    sizes and per-class proportions within one case of each other."""
    if spec.fold_count > len(d.cases):
        raise ValueError("fold_count exceeds case count")
    rng = np.random.default_rng(spec.seed)
    labels = [c.label for c in d.cases]
    assign = np.empty(len(d.cases), dtype=int)
    slot = 0
    for cls in d.class_labels:
        idx = np.array([i for i, la in enumerate(labels) if la == cls])
        idx = idx[rng.permutation(len(idx))]
        for i in idx:
            assign[i] = slot % spec.fold_count
            slot += 1
    return assign


def make_folds(d: Dataset, spec: SplitSpec) -> list[tuple[np.ndarray, np.ndarray]]:
    """List of (train_indices, validation_indices) pairs partitioning the
    cases; deterministic for a fixed (seed, dataset)."""
    assign = fold_assignment(d, spec)
    folds = []
    for f in range(spec.fold_count):
        val = np.nonzero(assign == f)[0]
        train = np.nonzero(assign != f)[0]
        folds.append((train, val))
    return folds
