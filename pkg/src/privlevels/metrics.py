"""Fidelity and utility scoring for a real/synthetic dataset pair.

Fidelity components, each in [0, 1]:
  * per-numeric-column two-sample Kolmogorov-Smirnov statistic (exact sup
    over the merged sample points, no binning),
  * per-categorical-column total-variation distance,
  * a correlation component: the Frobenius norm of the difference between
    the two Pearson correlation matrices over numeric columns, normalized by
    its maximum 2*sqrt(d*(d-1)) so it fits the [0, 1] composite.

The composite is a weighted mean of the components (equal weights unless
overridden) and is 0 exactly when synthetic == real.

Utility uses a self-contained k-nearest-neighbor classifier on the package's
mixed record distance: train-on-real baseline, train-on-synthetic/test-on-real,
and train-on-(real+synthetic) accuracies, with uplift = augmented - baseline.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .data import CATEGORICAL, IDENTIFIER, ColumnSpec, Dataset
from .distance import column_ranges, comparable_columns, knn_indices


def ks_statistic(x: np.ndarray, y: np.ndarray) -> float:
    """Exact two-sample KS statistic: sup |F_x - F_y| over merged sample points."""
    x = np.sort(np.asarray(x, dtype=np.float64))
    y = np.sort(np.asarray(y, dtype=np.float64))
    if x.size == 0 or y.size == 0:
        raise ValueError("KS statistic needs non-empty samples")
    points = np.concatenate([x, y])
    cdf_x = np.searchsorted(x, points, side="right") / x.size
    cdf_y = np.searchsorted(y, points, side="right") / y.size
    return float(np.max(np.abs(cdf_x - cdf_y)))


def tv_distance(p: np.ndarray, q: np.ndarray) -> float:
    """Total-variation distance between two probability vectors."""
    return float(0.5 * np.sum(np.abs(np.asarray(p, float) - np.asarray(q, float))))


def category_frequencies(dataset: Dataset, column: str) -> np.ndarray:
    spec = dataset.spec(column)
    counts = np.bincount(dataset.column(column), minlength=len(spec.categories))
    total = counts.sum()
    return counts / total if total else np.full(len(spec.categories), 0.0)


def _correlation_matrix(dataset: Dataset, columns: Sequence[str]) -> np.ndarray:
    values = np.column_stack([dataset.column(c).astype(np.float64) for c in columns])
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = np.corrcoef(values, rowvar=False)
    corr = np.atleast_2d(corr)
    corr = np.nan_to_num(corr, nan=0.0)  # constant columns contribute 0 correlation
    np.fill_diagonal(corr, 1.0)
    return corr


@dataclass(frozen=True)
class FidelityReport:
    ks: dict[str, float]
    tv: dict[str, float]
    correlation_distance: float  # normalized to [0, 1]
    correlation_frobenius: float  # raw Frobenius norm, for reference
    composite: float
    weights: dict[str, float]

    @property
    def components(self) -> dict[str, float]:
        out = {f"ks:{k}": v for k, v in self.ks.items()}
        out.update({f"tv:{k}": v for k, v in self.tv.items()})
        if len(self.ks) >= 2:  # correlation is only scored with >= 2 numeric columns
            out["correlation"] = self.correlation_distance
        return out

    def to_json_dict(self) -> dict:
        return {
            "ks": self.ks,
            "tv": self.tv,
            "correlation_distance": self.correlation_distance,
            "correlation_frobenius": self.correlation_frobenius,
            "composite": self.composite,
            "weights": self.weights,
        }


def _shared_columns(real: Dataset, synthetic: Dataset) -> list[str]:
    cols = comparable_columns(real, synthetic)
    if not cols:
        raise ValueError("no comparable columns between real and synthetic datasets")
    expected = [c.name for c in real.schema if c.kind != IDENTIFIER]
    missing = [c for c in expected if c not in cols]
    if missing:
        raise ValueError(f"schema mismatch on columns {missing}")
    return cols


def fidelity(
    real: Dataset, synthetic: Dataset, weights: Mapping[str, float] | None = None
) -> FidelityReport:
    """Distribution distance between ``real`` and ``synthetic`` (0 = indistinguishable)."""
    columns = _shared_columns(real, synthetic)
    numeric = [c for c in columns if real.spec(c).is_numeric]
    categorical = [c for c in columns if real.spec(c).kind == CATEGORICAL]

    ks = {c: ks_statistic(real.column(c), synthetic.column(c)) for c in numeric}
    tv = {
        c: tv_distance(category_frequencies(real, c), category_frequencies(synthetic, c))
        for c in categorical
    }

    d = len(numeric)
    component_values = {f"ks:{c}": v for c, v in ks.items()}
    component_values.update({f"tv:{c}": v for c, v in tv.items()})
    if d >= 2:
        delta = _correlation_matrix(real, numeric) - _correlation_matrix(synthetic, numeric)
        frobenius = float(np.linalg.norm(delta, "fro"))
        corr_component = frobenius / (2.0 * np.sqrt(d * (d - 1)))
        component_values["correlation"] = corr_component
    else:
        # fewer than two numeric columns: no dependence structure to compare
        frobenius = 0.0
        corr_component = 0.0

    used_weights = {name: 1.0 for name in component_values}
    if weights:
        unknown = [k for k in weights if k not in used_weights]
        if unknown:
            raise ValueError(f"weights name unknown components {unknown}")
        used_weights.update({k: float(v) for k, v in weights.items()})
    total_weight = sum(used_weights.values())
    if total_weight <= 0:
        raise ValueError("component weights must not all be zero")
    composite = sum(used_weights[k] * component_values[k] for k in component_values) / total_weight

    return FidelityReport(
        ks=ks,
        tv=tv,
        correlation_distance=corr_component,
        correlation_frobenius=frobenius,
        composite=float(composite),
        weights=used_weights,
    )


@dataclass(frozen=True)
class UtilityTask:
    label: str
    features: tuple[str, ...]

    def __post_init__(self):
        if not self.features:
            raise ValueError("utility task needs at least one feature column")
        if self.label in self.features:
            raise ValueError("label column cannot also be a feature")
        object.__setattr__(self, "features", tuple(self.features))


@dataclass(frozen=True)
class UtilityReport:
    task: UtilityTask
    k: int
    acc_real_baseline: float
    acc_synthetic: float
    acc_augmented: float

    @property
    def uplift(self) -> float:
        return self.acc_augmented - self.acc_real_baseline

    def to_json_dict(self) -> dict:
        return {
            "label": self.task.label,
            "features": list(self.task.features),
            "k": self.k,
            "acc_real_baseline": self.acc_real_baseline,
            "acc_synthetic": self.acc_synthetic,
            "acc_augmented": self.acc_augmented,
            "uplift": self.uplift,
        }


def _knn_predict(train: Dataset, test: Dataset, task: UtilityTask, k: int) -> np.ndarray:
    if k > train.n_rows:
        raise ValueError(f"k={k} exceeds training set size {train.n_rows}")
    ranges = column_ranges(train, task.features)
    neighbor_idx = knn_indices(test, train, task.features, ranges, k)
    labels = train.column(task.label)
    n_classes = len(train.spec(task.label).categories)
    votes = labels[neighbor_idx]
    predictions = np.empty(test.n_rows, dtype=np.int64)
    for i in range(test.n_rows):
        counts = np.bincount(votes[i], minlength=n_classes)
        predictions[i] = int(np.argmax(counts))  # ties resolve to the lowest code
    return predictions


def utility_tstr(
    real_train: Dataset,
    synthetic: Dataset,
    real_test: Dataset,
    task: UtilityTask,
    k: int = 5,
) -> UtilityReport:
    """Train-on-synthetic-test-on-real utility with a deterministic k-NN learner."""
    for ds, role in ((real_train, "real_train"), (synthetic, "synthetic"), (real_test, "real_test")):
        spec = ds.spec(task.label)
        if spec.kind != CATEGORICAL:
            raise ValueError(f"{role}: label column {task.label!r} must be categorical")
        for feature in task.features:
            if ds.spec(feature).kind == IDENTIFIER:
                raise ValueError(f"{role}: identifier column {feature!r} cannot be a feature")
    if real_train.spec(task.label).categories != real_test.spec(task.label).categories:
        raise ValueError("label categories differ between train and test")
    if real_train.spec(task.label).categories != synthetic.spec(task.label).categories:
        raise ValueError("label categories differ between real and synthetic data")
    overlap = set(real_train.row_ids.tolist()) & set(real_test.row_ids.tolist())
    if overlap:
        raise ValueError(f"train/test row ids overlap: {sorted(overlap)[:5]}...")

    truth = real_test.column(task.label)

    def accuracy(train: Dataset) -> float:
        preds = _knn_predict(train, real_test, task, k)
        return float(np.mean(preds == truth))

    needed = list(task.features) + [task.label]
    augmented = _stack_training(real_train.select_columns(needed),
                                synthetic.select_columns(needed))
    return UtilityReport(
        task=task,
        k=k,
        acc_real_baseline=accuracy(real_train),
        acc_synthetic=accuracy(synthetic),
        acc_augmented=accuracy(augmented),
    )


def _stack_training(first: Dataset, second: Dataset) -> Dataset:
    # Bounds may legitimately differ (e.g. simulated sources declare none), so
    # the stacked schema keeps names/kinds/categories and drops bounds.
    schema = []
    for a, b in zip(first.schema, second.schema):
        if (a.name, a.kind, a.categories) != (b.name, b.kind, b.categories):
            raise ValueError(f"cannot combine training sets: {a.name!r} vs {b.name!r} differ")
        schema.append(ColumnSpec(a.name, a.kind, pii=a.pii, categories=a.categories))
    cols = tuple(np.concatenate([a, b]) for a, b in zip(first.columns, second.columns))
    n = first.n_rows + second.n_rows
    return Dataset(tuple(schema), cols, np.arange(n, dtype=np.int64), "augmented-training")
