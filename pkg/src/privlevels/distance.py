"""Mixed-type record distance shared by the attack evaluators and the k-NN learner.

Per column: numeric contributions are range-scaled absolute differences (the
scaling range comes from the designated reference data, falling back to 1 for
degenerate columns); categorical mismatches contribute 1. The record distance
is the mean over the compared columns, which keeps it unitless and symmetric
with no tuning knobs. Identifier columns are never compared: after obscuring
they are opaque tokens with no usable geometry.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .data import CATEGORICAL, IDENTIFIER, Dataset

_CHUNK_CELLS = 4_000_000  # distance-buffer budget per chunk, in matrix cells


def comparable_columns(a: Dataset, b: Dataset) -> list[str]:
    """Shared non-identifier columns with matching kind (and categories)."""
    out = []
    b_names = set(b.column_names)
    for spec in a.schema:
        if spec.kind == IDENTIFIER or spec.name not in b_names:
            continue
        other = b.spec(spec.name)
        if other.kind != spec.kind:
            continue
        if spec.kind == CATEGORICAL and other.categories != spec.categories:
            continue
        out.append(spec.name)
    return out


def column_ranges(reference: Dataset, columns: Sequence[str]) -> dict[str, float]:
    """Numeric scaling ranges from ``reference``; degenerate columns fall back to 1."""
    ranges: dict[str, float] = {}
    for name in columns:
        spec = reference.spec(name)
        if not spec.is_numeric:
            continue
        col = reference.column(name)
        span = float(col.max() - col.min()) if col.size else 0.0
        ranges[name] = span if span > 0 else 1.0
    return ranges


def _distance_block(
    query: Dataset,
    reference: Dataset,
    columns: Sequence[str],
    ranges: dict[str, float],
    rows: np.ndarray,
) -> np.ndarray:
    """Dense (len(rows), n_reference) distance block."""
    n_ref = reference.n_rows
    acc = np.zeros((rows.size, n_ref), dtype=np.float64)
    for name in columns:
        spec = query.spec(name)
        q = query.column(name)[rows]
        r = reference.column(name)
        if spec.is_numeric:
            scale = ranges[name]
            acc += np.abs(q[:, None].astype(np.float64) - r[None, :].astype(np.float64)) / scale
        else:
            acc += (q[:, None] != r[None, :]).astype(np.float64)
    acc /= len(columns)
    return acc


def record_distances(
    query: Dataset,
    reference: Dataset,
    columns: Sequence[str],
    ranges: dict[str, float],
) -> np.ndarray:
    """Full (n_query, n_reference) distance matrix. Prefer dcr/knn for large inputs."""
    return _distance_block(query, reference, columns, ranges, np.arange(query.n_rows))


def dcr(
    query: Dataset,
    reference: Dataset,
    columns: Sequence[str] | None = None,
    ranges: dict[str, float] | None = None,
) -> np.ndarray:
    """Distance to the closest reference record, per query row.

    Computed in chunks so the dense block stays within a fixed memory budget.
    """
    if reference.n_rows == 0:
        raise ValueError("reference set is empty")
    if columns is None:
        columns = comparable_columns(query, reference)
    if not columns:
        raise ValueError("no comparable columns between query and reference")
    if ranges is None:
        ranges = column_ranges(query, columns)
    chunk = max(1, _CHUNK_CELLS // max(1, reference.n_rows))
    out = np.empty(query.n_rows, dtype=np.float64)
    for start in range(0, query.n_rows, chunk):
        rows = np.arange(start, min(start + chunk, query.n_rows))
        out[rows] = _distance_block(query, reference, columns, ranges, rows).min(axis=1)
    return out


def knn_indices(
    query: Dataset,
    reference: Dataset,
    columns: Sequence[str],
    ranges: dict[str, float],
    k: int,
) -> np.ndarray:
    """Indices of the k nearest reference rows per query row.

    Ties are broken by the lowest reference index (stable sort), which keeps
    every downstream vote deterministic.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > reference.n_rows:
        raise ValueError(f"k={k} exceeds reference size {reference.n_rows}")
    chunk = max(1, _CHUNK_CELLS // max(1, reference.n_rows))
    out = np.empty((query.n_rows, k), dtype=np.int64)
    for start in range(0, query.n_rows, chunk):
        rows = np.arange(start, min(start + chunk, query.n_rows))
        block = _distance_block(query, reference, columns, ranges, rows)
        out[rows] = np.argsort(block, axis=1, kind="stable")[:, :k]
    return out
