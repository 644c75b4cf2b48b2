"""Typed tabular datasets: schema model, validation, CSV/JSON I/O, holdout splits.

Datasets are immutable after construction; every operation in this package
returns a new instance and never mutates its input, so datasets can be shared
read-only across concurrent work without locking.

Internal storage is columnar: float64 for continuous columns, int64 for
integer columns, int64 category codes for categorical columns (indices into
the schema's category list), and plain strings for identifier columns.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .rng import generator

NUMERIC_CONTINUOUS = "numeric-continuous"
NUMERIC_INTEGER = "numeric-integer"
CATEGORICAL = "categorical"
IDENTIFIER = "identifier"

COLUMN_KINDS = (NUMERIC_CONTINUOUS, NUMERIC_INTEGER, CATEGORICAL, IDENTIFIER)
NUMERIC_KINDS = (NUMERIC_CONTINUOUS, NUMERIC_INTEGER)


class SchemaViolation(ValueError):
    """A cell, column, or schema broke a declared constraint."""

    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        parts = []
        if row is not None:
            parts.append(f"row {row}")
        if column is not None:
            parts.append(f"column {column!r}")
        prefix = ", ".join(parts)
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.row = row
        self.column = column


@dataclass(frozen=True)
class ColumnSpec:
    """Declared type of one column.

    ``bounds`` applies only to numeric kinds; ``categories`` is required for
    (and restricted to) the categorical kind. Identifier columns are always
    PII.
    """

    name: str
    kind: str
    pii: bool = False
    bounds: tuple[float, float] | None = None
    categories: tuple[str, ...] | None = None

    def __post_init__(self):
        if not self.name or not isinstance(self.name, str):
            raise SchemaViolation("column name must be a non-empty string")
        if self.kind not in COLUMN_KINDS:
            raise SchemaViolation(
                f"unknown column kind {self.kind!r}; expected one of {COLUMN_KINDS}",
                column=self.name,
            )
        if self.kind == IDENTIFIER and not self.pii:
            raise SchemaViolation("identifier columns must be flagged pii", column=self.name)
        if self.bounds is not None:
            if self.kind not in NUMERIC_KINDS:
                raise SchemaViolation("bounds only apply to numeric columns", column=self.name)
            lo, hi = self.bounds
            lo, hi = float(lo), float(hi)
            if not (np.isfinite(lo) and np.isfinite(hi)) or lo > hi:
                raise SchemaViolation(f"invalid bounds [{lo}, {hi}]", column=self.name)
            object.__setattr__(self, "bounds", (lo, hi))
        if self.kind == CATEGORICAL:
            if not self.categories:
                raise SchemaViolation("categorical columns need a category list", column=self.name)
            cats = tuple(str(c) for c in self.categories)
            if len(set(cats)) != len(cats):
                raise SchemaViolation("duplicate categories", column=self.name)
            object.__setattr__(self, "categories", cats)
        elif self.categories is not None:
            raise SchemaViolation("categories only apply to categorical columns", column=self.name)

    @property
    def is_numeric(self) -> bool:
        return self.kind in NUMERIC_KINDS

    def code_of(self, label: str) -> int:
        """Category code of ``label`` (categorical columns only)."""
        try:
            return self.categories.index(label)
        except ValueError:
            raise SchemaViolation(
                f"value {label!r} not in declared categories {list(self.categories)}",
                column=self.name,
            ) from None

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "pii": self.pii,
            "bounds": list(self.bounds) if self.bounds is not None else None,
            "categories": list(self.categories) if self.categories is not None else None,
        }

    @classmethod
    def from_json_dict(cls, d: Mapping) -> "ColumnSpec":
        bounds = d.get("bounds")
        categories = d.get("categories")
        return cls(
            name=d["name"],
            kind=d["kind"],
            pii=bool(d.get("pii", False)),
            bounds=tuple(bounds) if bounds is not None else None,
            categories=tuple(categories) if categories is not None else None,
        )


def validate_schema(schema: Sequence[ColumnSpec]) -> tuple[ColumnSpec, ...]:
    """Check cross-column invariants and return the schema as a tuple."""
    schema = tuple(schema)
    names = [c.name for c in schema]
    if len(set(names)) != len(names):
        dupes = sorted({n for n in names if names.count(n) > 1})
        raise SchemaViolation(f"duplicate column names {dupes}")
    return schema


def _coerce_column(spec: ColumnSpec, values) -> np.ndarray:
    """Coerce raw values to the canonical dtype for ``spec``, validating cells.

    Raises SchemaViolation naming the first offending row.
    """
    if spec.kind == NUMERIC_CONTINUOUS:
        arr = np.asarray(values, dtype=np.float64)
    elif spec.kind == NUMERIC_INTEGER:
        raw = np.asarray(values)
        if raw.dtype.kind in "iu":
            arr = raw.astype(np.int64)
        elif raw.dtype.kind == "f":
            if raw.size and not np.all(raw == np.rint(raw)):
                bad = int(np.argmax(raw != np.rint(raw)))
                raise SchemaViolation(
                    f"non-integral value {raw[bad]!r} in integer column", row=bad, column=spec.name
                )
            arr = raw.astype(np.int64)
        else:
            arr = np.asarray([int(v) for v in raw], dtype=np.int64)
    elif spec.kind == CATEGORICAL:
        raw = np.asarray(values)
        if raw.dtype.kind in "iu":
            arr = raw.astype(np.int64)
        else:
            arr = np.asarray([spec.code_of(str(v)) for v in raw], dtype=np.int64)
    else:  # identifier
        arr = np.asarray([str(v) for v in values], dtype=object)

    if arr.ndim != 1:
        raise SchemaViolation("column values must be one-dimensional", column=spec.name)

    if spec.is_numeric:
        vals = arr.astype(np.float64) if arr.dtype.kind != "f" else arr
        finite = np.isfinite(vals)
        if arr.size and not finite.all():
            bad = int(np.argmax(~finite))
            raise SchemaViolation("non-finite numeric value", row=bad, column=spec.name)
        if spec.bounds is not None and arr.size:
            lo, hi = spec.bounds
            inside = (vals >= lo) & (vals <= hi)
            if not inside.all():
                bad = int(np.argmax(~inside))
                raise SchemaViolation(
                    f"value {arr[bad]} outside bounds [{lo}, {hi}]", row=bad, column=spec.name
                )
    elif spec.kind == CATEGORICAL and arr.size:
        k = len(spec.categories)
        inside = (arr >= 0) & (arr < k)
        if not inside.all():
            bad = int(np.argmax(~inside))
            raise SchemaViolation(
                f"category code {arr[bad]} out of range [0, {k})", row=bad, column=spec.name
            )
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Dataset:
    """An immutable, schema-validated table with stable per-row identifiers."""

    schema: tuple[ColumnSpec, ...]
    columns: tuple[np.ndarray, ...]
    row_ids: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        schema = validate_schema(self.schema)
        object.__setattr__(self, "schema", schema)
        if len(self.columns) != len(schema):
            raise SchemaViolation(
                f"expected {len(schema)} columns, got {len(self.columns)}"
            )
        cols = tuple(_coerce_column(spec, col) for spec, col in zip(schema, self.columns))
        lengths = {c.shape[0] for c in cols}
        if len(lengths) > 1:
            raise SchemaViolation(f"ragged columns: lengths {sorted(lengths)}")
        n = cols[0].shape[0] if cols else 0
        ids = np.asarray(self.row_ids, dtype=np.int64)
        if ids.shape != (n,):
            raise SchemaViolation(f"need exactly one row id per row ({n}), got shape {ids.shape}")
        if n and np.unique(ids).size != n:
            raise SchemaViolation("row ids must be unique")
        ids.setflags(write=False)
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "row_ids", ids)

    # -- construction -----------------------------------------------------

    @classmethod
    def from_values(
        cls,
        schema: Sequence[ColumnSpec],
        values: Mapping[str, Sequence],
        row_ids: Sequence[int] | None = None,
        provenance: str = "",
    ) -> "Dataset":
        """Build from per-column value sequences (categorical values as labels or codes)."""
        schema = validate_schema(schema)
        missing = [c.name for c in schema if c.name not in values]
        if missing:
            raise SchemaViolation(f"missing values for columns {missing}")
        extra = [k for k in values if k not in {c.name for c in schema}]
        if extra:
            raise SchemaViolation(f"values given for unknown columns {extra}")
        cols = tuple(values[c.name] for c in schema)
        n = len(cols[0]) if cols else 0
        ids = np.arange(n, dtype=np.int64) if row_ids is None else np.asarray(row_ids)
        return cls(schema, cols, ids, provenance)

    # -- shape ------------------------------------------------------------

    @property
    def n_rows(self) -> int:
        return int(self.row_ids.shape[0])

    @property
    def n_columns(self) -> int:
        return len(self.schema)

    @property
    def column_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.schema)

    # -- access -----------------------------------------------------------

    def column_index(self, name: str) -> int:
        for i, spec in enumerate(self.schema):
            if spec.name == name:
                return i
        raise KeyError(f"unknown column {name!r}; have {list(self.column_names)}")

    def spec(self, name: str) -> ColumnSpec:
        return self.schema[self.column_index(name)]

    def column(self, name: str) -> np.ndarray:
        """Raw stored array (category codes for categorical columns)."""
        return self.columns[self.column_index(name)]

    def decoded_column(self, name: str) -> np.ndarray:
        """Column values with categorical codes decoded to labels."""
        spec = self.spec(name)
        arr = self.column(name)
        if spec.kind == CATEGORICAL:
            labels = np.asarray(spec.categories, dtype=object)
            return labels[arr]
        return arr

    def cell(self, row: int, name: str):
        spec = self.spec(name)
        v = self.column(name)[row]
        if spec.kind == CATEGORICAL:
            return spec.categories[int(v)]
        if spec.kind == NUMERIC_CONTINUOUS:
            return float(v)
        if spec.kind == NUMERIC_INTEGER:
            return int(v)
        return str(v)

    def row_values(self, row: int) -> tuple:
        return tuple(self.cell(row, c.name) for c in self.schema)

    # -- derivation -------------------------------------------------------

    def select_rows(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(
            self.schema,
            tuple(c[idx] for c in self.columns),
            self.row_ids[idx],
            self.provenance,
        )

    def select_columns(self, names: Sequence[str]) -> "Dataset":
        order = [self.column_index(n) for n in names]
        return Dataset(
            tuple(self.schema[i] for i in order),
            tuple(self.columns[i] for i in order),
            self.row_ids,
            self.provenance,
        )

    def drop_columns(self, names: Iterable[str]) -> "Dataset":
        drop = set(names)
        keep = [c.name for c in self.schema if c.name not in drop]
        return self.select_columns(keep)

    def without_identifiers(self) -> "Dataset":
        return self.drop_columns(c.name for c in self.schema if c.kind == IDENTIFIER)

    def with_provenance(self, provenance: str) -> "Dataset":
        return Dataset(self.schema, self.columns, self.row_ids, provenance)

    def with_row_ids(self, row_ids) -> "Dataset":
        return Dataset(self.schema, self.columns, row_ids, self.provenance)

    # -- comparison -------------------------------------------------------

    def equals(self, other: "Dataset", ignore_row_ids: bool = True) -> bool:
        """Cell-by-cell equality; row ids and provenance are ignored by default."""
        if self.schema != other.schema or self.n_rows != other.n_rows:
            return False
        if not ignore_row_ids and not np.array_equal(self.row_ids, other.row_ids):
            return False
        return all(np.array_equal(a, b) for a, b in zip(self.columns, other.columns))


@dataclass(frozen=True)
class SplitResult:
    """A disjoint member/non-member partition of a dataset."""

    members: Dataset
    non_members: Dataset
    seed: int


def split_holdout(dataset: Dataset, member_fraction: float, seed: int) -> SplitResult:
    """Partition rows into members and non-members, deterministically per seed.

    Member count is round-half-to-even of ``member_fraction * n_rows``; an
    empty side is an error because attack evaluation needs both classes.
    """
    n = dataset.n_rows
    if n < 2:
        raise ValueError(f"need at least 2 rows to split, have {n}")
    if not (0.0 < member_fraction < 1.0):
        raise ValueError(f"member_fraction must be in (0, 1), got {member_fraction}")
    n_members = round(member_fraction * n)
    if n_members == 0 or n_members == n:
        raise ValueError(
            f"fraction {member_fraction} of {n} rows leaves one side empty "
            f"({n_members} members)"
        )
    perm = generator(seed, "split-holdout").permutation(n)
    member_idx = np.sort(perm[:n_members])
    non_member_idx = np.sort(perm[n_members:])
    return SplitResult(
        members=dataset.select_rows(member_idx),
        non_members=dataset.select_rows(non_member_idx),
        seed=seed,
    )


def concat_rows(first: Dataset, second: Dataset, provenance: str | None = None) -> Dataset:
    """Stack two datasets with identical schemas; row ids must stay unique."""
    if first.schema != second.schema:
        raise SchemaViolation("cannot concatenate datasets with different schemas")
    ids = np.concatenate([first.row_ids, second.row_ids])
    cols = tuple(
        np.concatenate([a, b]) for a, b in zip(first.columns, second.columns)
    )
    return Dataset(
        first.schema, cols, ids, first.provenance if provenance is None else provenance
    )


# -- CSV ------------------------------------------------------------------


def _render_cell(spec: ColumnSpec, value) -> str:
    if spec.kind == NUMERIC_CONTINUOUS:
        return repr(float(value))  # shortest round-trip decimal
    if spec.kind == NUMERIC_INTEGER:
        return str(int(value))
    if spec.kind == CATEGORICAL:
        return spec.categories[int(value)]
    return str(value)


def _parse_cell(spec: ColumnSpec, text: str, row: int):
    if text == "":
        raise SchemaViolation("missing value (empty cell)", row=row, column=spec.name)
    if spec.kind == NUMERIC_CONTINUOUS:
        try:
            return float(text)
        except ValueError:
            raise SchemaViolation(f"cannot parse {text!r} as a number", row=row, column=spec.name)
    if spec.kind == NUMERIC_INTEGER:
        try:
            return int(text)
        except ValueError:
            raise SchemaViolation(f"cannot parse {text!r} as an integer", row=row, column=spec.name)
    if spec.kind == CATEGORICAL:
        try:
            return spec.code_of(text)
        except SchemaViolation as exc:
            raise SchemaViolation(str(exc).split(": ", 1)[-1], row=row, column=spec.name)
    return text


def load_csv(path: str | Path, schema: Sequence[ColumnSpec]) -> Dataset:
    """Load and validate a comma-delimited UTF-8 file with a mandatory header.

    The header must match the schema names in order. Row ids are assigned
    sequentially from 0; provenance records the path.
    """
    schema = validate_schema(schema)
    path = Path(path)
    expected = [c.name for c in schema]
    raw_columns: list[list] = [[] for _ in schema]
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaViolation(f"{path}: empty file (header row is mandatory)")
        if header != expected:
            raise SchemaViolation(f"{path}: header {header} does not match schema {expected}")
        for row_idx, record in enumerate(reader):
            if len(record) != len(schema):
                raise SchemaViolation(
                    f"expected {len(schema)} cells, got {len(record)}", row=row_idx
                )
            for spec, cells, text in zip(schema, raw_columns, record):
                cells.append(_parse_cell(spec, text, row_idx))
    n = len(raw_columns[0]) if schema else 0
    return Dataset(
        schema,
        tuple(raw_columns),
        np.arange(n, dtype=np.int64),
        provenance=str(path),
    )


def write_csv(dataset: Dataset, path: str | Path) -> None:
    """Write RFC-4180-style CSV; reloading yields a cell-for-cell equal dataset."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([c.name for c in dataset.schema])
        decoded = [dataset.column(c.name) for c in dataset.schema]
        for i in range(dataset.n_rows):
            writer.writerow(
                [_render_cell(spec, col[i]) for spec, col in zip(dataset.schema, decoded)]
            )


# -- schema sidecar ---------------------------------------------------------


def load_schema(path: str | Path) -> tuple[ColumnSpec, ...]:
    """Read a JSON sidecar (list of {name, kind, pii, bounds, categories})."""
    with Path(path).open("r", encoding="utf-8") as fh:
        entries = json.load(fh)
    if not isinstance(entries, list):
        raise SchemaViolation(f"{path}: schema sidecar must be a JSON list")
    return validate_schema([ColumnSpec.from_json_dict(e) for e in entries])


def save_schema(schema: Sequence[ColumnSpec], path: str | Path) -> None:
    entries = [c.to_json_dict() for c in validate_schema(schema)]
    with Path(path).open("w", encoding="utf-8") as fh:
        json.dump(entries, fh, indent=2)
        fh.write("\n")
