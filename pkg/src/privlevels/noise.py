"""Level 2: differential-privacy noise, random swapping, randomized response.

Mechanisms and their noise scales:

* Laplace(epsilon, sensitivity): value + Lap(0, b) with b = sensitivity / epsilon.
  Pure epsilon-DP for a query of the given sensitivity.
* Gaussian(epsilon, delta, sensitivity): value + N(0, sigma^2) with
  sigma = sensitivity * sqrt(2 * ln(1.25 / delta)) / epsilon. (epsilon, delta)-DP.
* Swap(seed): an independent uniform permutation of the column, which
  preserves every single-column statistic exactly while breaking row linkage.
* RandomizedResponse(p_truth, seed): keep the category with probability
  p_truth, otherwise redraw uniformly over all k categories (including the
  original one).

Clamping noised values back into schema bounds is post-processing and does
not weaken the DP guarantee. Reported total epsilon is the basic-composition
sum of per-column budgets; fancier accounting is out of scope.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .data import CATEGORICAL, NUMERIC_INTEGER, ColumnSpec, Dataset
from .rng import generator


@dataclass(frozen=True)
class Laplace:
    epsilon: float
    sensitivity: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if not self.sensitivity > 0:
            raise ValueError(f"sensitivity must be > 0, got {self.sensitivity}")

    @property
    def scale(self) -> float:
        return self.sensitivity / self.epsilon


@dataclass(frozen=True)
class Gaussian:
    epsilon: float
    delta: float
    sensitivity: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if not (0.0 < self.delta < 1.0):
            raise ValueError(f"delta must be in (0, 1), got {self.delta}")
        if not self.sensitivity > 0:
            raise ValueError(f"sensitivity must be > 0, got {self.sensitivity}")

    @property
    def sigma(self) -> float:
        return self.sensitivity * math.sqrt(2.0 * math.log(1.25 / self.delta)) / self.epsilon


@dataclass(frozen=True)
class Swap:
    # seed None: derived from the add_noise seed and the column name
    seed: int | None = None


@dataclass(frozen=True)
class RandomizedResponse:
    p_truth: float
    seed: int | None = None

    def __post_init__(self):
        if not (0.0 < self.p_truth <= 1.0):
            raise ValueError(f"p_truth must be in (0, 1], got {self.p_truth}")


Mechanism = Laplace | Gaussian | Swap | RandomizedResponse


@dataclass(frozen=True)
class NoiseConfig:
    """Per-column mechanism assignment plus the clamping switch."""

    mechanisms: Mapping[str, Mechanism]
    clamp_to_bounds: bool = True

    def __post_init__(self):
        object.__setattr__(self, "mechanisms", dict(self.mechanisms))

    def to_json_dict(self) -> dict:
        cols = {}
        for name, mech in self.mechanisms.items():
            if isinstance(mech, Laplace):
                cols[name] = {
                    "mechanism": "laplace",
                    "epsilon": mech.epsilon,
                    "sensitivity": mech.sensitivity,
                }
            elif isinstance(mech, Gaussian):
                cols[name] = {
                    "mechanism": "gaussian",
                    "epsilon": mech.epsilon,
                    "delta": mech.delta,
                    "sensitivity": mech.sensitivity,
                }
            elif isinstance(mech, Swap):
                cols[name] = {"mechanism": "swap", "seed": mech.seed}
            elif isinstance(mech, RandomizedResponse):
                cols[name] = {
                    "mechanism": "randomized_response",
                    "p_truth": mech.p_truth,
                    "seed": mech.seed,
                }
            else:
                raise ValueError(f"unknown mechanism {mech!r}")
        return {"clamp_to_bounds": self.clamp_to_bounds, "columns": cols}

    @classmethod
    def from_json_dict(cls, d: Mapping) -> "NoiseConfig":
        mechanisms: dict[str, Mechanism] = {}
        for name, entry in d.get("columns", {}).items():
            kind = entry.get("mechanism")
            if kind == "laplace":
                mechanisms[name] = Laplace(
                    epsilon=float(entry["epsilon"]), sensitivity=float(entry["sensitivity"])
                )
            elif kind == "gaussian":
                mechanisms[name] = Gaussian(
                    epsilon=float(entry["epsilon"]),
                    delta=float(entry["delta"]),
                    sensitivity=float(entry["sensitivity"]),
                )
            elif kind == "swap":
                seed = entry.get("seed")
                mechanisms[name] = Swap(seed=None if seed is None else int(seed))
            elif kind == "randomized_response":
                seed = entry.get("seed")
                mechanisms[name] = RandomizedResponse(
                    p_truth=float(entry["p_truth"]), seed=None if seed is None else int(seed)
                )
            else:
                raise ValueError(f"column {name!r}: unknown mechanism {kind!r}")
        return cls(mechanisms=mechanisms, clamp_to_bounds=bool(d.get("clamp_to_bounds", True)))


def load_noise_config(path: str | Path) -> NoiseConfig:
    with Path(path).open("r", encoding="utf-8") as fh:
        return NoiseConfig.from_json_dict(json.load(fh))


def total_epsilon(config: NoiseConfig) -> float:
    """Basic-composition budget: the sum of per-column epsilons."""
    return float(
        sum(m.epsilon for m in config.mechanisms.values() if isinstance(m, (Laplace, Gaussian)))
    )


def _check_mechanism_kind(spec: ColumnSpec, mech: Mechanism) -> None:
    if isinstance(mech, (Laplace, Gaussian)) and not spec.is_numeric:
        raise ValueError(
            f"column {spec.name!r}: {type(mech).__name__} requires a numeric column, "
            f"got kind {spec.kind!r}"
        )
    if isinstance(mech, RandomizedResponse) and spec.kind != CATEGORICAL:
        raise ValueError(
            f"column {spec.name!r}: randomized response requires a categorical column, "
            f"got kind {spec.kind!r}"
        )


def _finish_numeric(spec: ColumnSpec, noised: np.ndarray, clamp: bool) -> np.ndarray:
    if spec.kind == NUMERIC_INTEGER:
        noised = np.rint(noised)
    if clamp and spec.bounds is not None:
        noised = np.clip(noised, spec.bounds[0], spec.bounds[1])
    if spec.kind == NUMERIC_INTEGER:
        noised = noised.astype(np.int64)
    return noised


def add_noise(dataset: Dataset, config: NoiseConfig, seed: int) -> Dataset:
    """Apply the configured mechanism to each named column.

    Deterministic per seed: each column consumes its own derived stream, so
    results do not depend on evaluation order. Row count and schema are
    unchanged.
    """
    for name, mech in config.mechanisms.items():
        _check_mechanism_kind(dataset.spec(name), mech)

    n = dataset.n_rows
    out_columns: list[np.ndarray] = []
    for spec, col in zip(dataset.schema, dataset.columns):
        mech = config.mechanisms.get(spec.name)
        if mech is None:
            out_columns.append(col)
            continue
        if isinstance(mech, Laplace):
            rng = generator(seed, f"noise:{spec.name}")
            noised = col.astype(np.float64) + rng.laplace(0.0, mech.scale, size=n)
            out_columns.append(_finish_numeric(spec, noised, config.clamp_to_bounds))
        elif isinstance(mech, Gaussian):
            rng = generator(seed, f"noise:{spec.name}")
            noised = col.astype(np.float64) + rng.normal(0.0, mech.sigma, size=n)
            out_columns.append(_finish_numeric(spec, noised, config.clamp_to_bounds))
        elif isinstance(mech, Swap):
            col_seed = mech.seed if mech.seed is not None else seed
            rng = generator(col_seed, f"swap:{spec.name}")
            out_columns.append(col[rng.permutation(n)])
        else:  # RandomizedResponse
            col_seed = mech.seed if mech.seed is not None else seed
            out_columns.append(
                _randomized_response_codes(col, len(spec.categories), mech.p_truth,
                                           col_seed, spec.name)
            )
    return Dataset(dataset.schema, tuple(out_columns), dataset.row_ids, dataset.provenance)


def swap_columns(dataset: Dataset, columns: Sequence[str], seed: int) -> Dataset:
    """Uniformly permute each named column, independently per column.

    Multisets (and thus all single-column statistics) are preserved exactly;
    only cross-column linkage is destroyed.
    """
    targets = set(columns)
    for name in columns:
        dataset.column_index(name)  # raises on unknown columns
    out_columns = []
    for spec, col in zip(dataset.schema, dataset.columns):
        if spec.name in targets:
            rng = generator(seed, f"swap:{spec.name}")
            out_columns.append(col[rng.permutation(dataset.n_rows)])
        else:
            out_columns.append(col)
    return Dataset(dataset.schema, tuple(out_columns), dataset.row_ids, dataset.provenance)


def _randomized_response_codes(
    codes: np.ndarray, n_categories: int, p_truth: float, seed: int, column: str
) -> np.ndarray:
    rng = generator(seed, f"rr:{column}")
    n = codes.shape[0]
    keep = rng.random(n) < p_truth
    replacement = rng.integers(0, n_categories, size=n, dtype=np.int64)
    return np.where(keep, codes, replacement)


def randomized_response(dataset: Dataset, column: str, p_truth: float, seed: int) -> Dataset:
    """Keep each cell with probability p_truth, else redraw uniformly over all categories."""
    spec = dataset.spec(column)
    if spec.kind != CATEGORICAL:
        raise ValueError(f"column {column!r} is {spec.kind!r}, not categorical")
    if not (0.0 < p_truth <= 1.0):
        raise ValueError(f"p_truth must be in (0, 1], got {p_truth}")
    idx = dataset.column_index(column)
    out_columns = list(dataset.columns)
    out_columns[idx] = _randomized_response_codes(
        dataset.columns[idx], len(spec.categories), p_truth, seed, column
    )
    return Dataset(dataset.schema, tuple(out_columns), dataset.row_ids, dataset.provenance)
