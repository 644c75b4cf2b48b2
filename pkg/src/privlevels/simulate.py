"""Levels 5-6: parametric rule-based simulation, with optional calibration.

A simulator spec is a list of column rules evaluated in declaration order:
either a distribution family (uniform, normal, lognormal, exponential,
categorical) or a structural equation (affine in previously defined numeric
columns plus optional normal noise, optionally thresholded into a 0/1
indicator). The generator never touches real rows — its signature makes that
structurally impossible — which is the defining property of these levels.

Calibration is simulated method of moments: minimize

    L(theta) = sum_i w_i * ((s_i(theta) - t_i) / scale_i)^2,
    scale_i = max(|t_i|, 1e-6)

over the spec's free parameters, where each s_i is a statistic of a simulated
dataset drawn with common random numbers (the same seed at every evaluation,
so L is a deterministic function of theta). The optimizer is a Nelder-Mead
simplex over box-projected parameters, initialized at the box centers with an
edge of 10% of each box width; it stops when the evaluation budget runs out
and returns the best projected point seen, the full evaluation trace, and the
final loss. The calibrator sees only the user-selected aggregate statistics,
never rows of real data.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .data import (
    CATEGORICAL,
    NUMERIC_CONTINUOUS,
    NUMERIC_INTEGER,
    ColumnSpec,
    Dataset,
)
from .rng import generator

# -- column rules -----------------------------------------------------------


@dataclass(frozen=True)
class Uniform:
    a: float
    b: float

    def __post_init__(self):
        if not self.a <= self.b:
            raise ValueError(f"uniform needs a <= b, got [{self.a}, {self.b}]")


@dataclass(frozen=True)
class Normal:
    mu: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")


@dataclass(frozen=True)
class LogNormal:
    mu: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")


@dataclass(frozen=True)
class Exponential:
    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError(f"rate must be > 0, got {self.rate}")


@dataclass(frozen=True)
class CategoricalDist:
    weights: tuple[float, ...]

    def __post_init__(self):
        weights = tuple(float(w) for w in self.weights)
        if not weights or any(w < 0 for w in weights) or sum(weights) <= 0:
            raise ValueError("weights must be non-negative with a positive sum")
        object.__setattr__(self, "weights", weights)


@dataclass(frozen=True)
class Equation:
    """value = intercept + sum(coef * earlier_column) + Normal(0, noise_sigma);
    with ``indicator`` the result is 1.0 where the expression is > 0, else 0.0."""

    intercept: float = 0.0
    terms: Mapping[str, float] = field(default_factory=dict)
    noise_sigma: float = 0.0
    indicator: bool = False

    def __post_init__(self):
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        object.__setattr__(self, "terms", dict(self.terms))


Rule = Uniform | Normal | LogNormal | Exponential | CategoricalDist | Equation


@dataclass(frozen=True)
class ColumnRule:
    name: str
    kind: str
    rule: Rule
    categories: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.kind not in (NUMERIC_CONTINUOUS, NUMERIC_INTEGER, CATEGORICAL):
            raise ValueError(f"column {self.name!r}: unsupported kind {self.kind!r}")
        if self.kind == CATEGORICAL:
            if not isinstance(self.rule, CategoricalDist):
                raise ValueError(f"column {self.name!r}: categorical columns need weights")
            if not self.categories:
                raise ValueError(f"column {self.name!r}: categorical columns need categories")
            cats = tuple(str(c) for c in self.categories)
            if len(cats) != len(self.rule.weights):
                raise ValueError(
                    f"column {self.name!r}: {len(cats)} categories vs "
                    f"{len(self.rule.weights)} weights"
                )
            object.__setattr__(self, "categories", cats)
        else:
            if isinstance(self.rule, CategoricalDist):
                raise ValueError(f"column {self.name!r}: weights rule needs a categorical kind")
            if self.categories is not None:
                raise ValueError(f"column {self.name!r}: categories only for categorical kind")


@dataclass(frozen=True)
class SimulatorSpec:
    """Ordered column rules plus the free parameters exposed for calibration."""

    columns: tuple[ColumnRule, ...]
    free_params: Mapping[str, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise ValueError("duplicate column names in simulator spec")
        defined: set[str] = set()
        numeric: set[str] = set()
        for col in self.columns:
            if isinstance(col.rule, Equation):
                for ref in col.rule.terms:
                    if ref not in defined:
                        raise ValueError(
                            f"column {col.name!r}: equation references {ref!r}, which is "
                            "not defined earlier (dependencies must be acyclic and ordered)"
                        )
                    if ref not in numeric:
                        raise ValueError(
                            f"column {col.name!r}: equation term {ref!r} is not numeric"
                        )
            defined.add(col.name)
            if col.kind in (NUMERIC_CONTINUOUS, NUMERIC_INTEGER):
                numeric.add(col.name)

        params = {str(k): (float(v[0]), float(v[1])) for k, v in dict(self.free_params).items()}
        for path, (lo, hi) in params.items():
            if not (np.isfinite(lo) and np.isfinite(hi)) or not lo < hi:
                raise ValueError(f"free parameter {path!r}: bounds must be finite with lo < hi")
            self._resolve(path)  # raises if the path does not exist
        object.__setattr__(self, "free_params", params)

    # -- parameter paths --------------------------------------------------

    def _resolve(self, path: str) -> tuple[ColumnRule, str, str | int | None]:
        col_name, _, rest = path.partition(".")
        matches = [c for c in self.columns if c.name == col_name]
        if not matches or not rest:
            raise ValueError(f"unknown parameter path {path!r}")
        col = matches[0]
        head, _, tail = rest.partition(".")
        rule = col.rule
        if head == "weights" and isinstance(rule, CategoricalDist):
            idx = int(tail)
            if not (0 <= idx < len(rule.weights)):
                raise ValueError(f"parameter path {path!r}: weight index out of range")
            return col, head, idx
        if head == "terms" and isinstance(rule, Equation):
            if tail not in rule.terms:
                raise ValueError(f"parameter path {path!r}: no such equation term")
            return col, head, tail
        if tail == "" and head in _SCALAR_FIELDS.get(type(rule), ()):
            return col, head, None
        raise ValueError(f"unknown parameter path {path!r}")

    def get_param(self, path: str) -> float:
        col, head, key = self._resolve(path)
        if key is None:
            return float(getattr(col.rule, head))
        if head == "weights":
            return float(col.rule.weights[key])
        return float(col.rule.terms[key])

    def with_params(self, updates: Mapping[str, float]) -> "SimulatorSpec":
        """New spec with the given parameter paths replaced."""
        by_column: dict[str, dict[str, float]] = {}
        for path, value in updates.items():
            self._resolve(path)
            col_name, _, rest = path.partition(".")
            by_column.setdefault(col_name, {})[rest] = float(value)

        new_columns = []
        for col in self.columns:
            changes = by_column.get(col.name)
            if not changes:
                new_columns.append(col)
                continue
            rule = col.rule
            scalar = {}
            weights = list(rule.weights) if isinstance(rule, CategoricalDist) else None
            terms = dict(rule.terms) if isinstance(rule, Equation) else None
            for rest, value in changes.items():
                head, _, tail = rest.partition(".")
                if head == "weights":
                    weights[int(tail)] = value
                elif head == "terms":
                    terms[tail] = value
                else:
                    scalar[head] = value
            if isinstance(rule, CategoricalDist):
                rule = CategoricalDist(weights=tuple(weights))
            elif isinstance(rule, Equation):
                rule = replace(rule, terms=terms, **scalar)
            else:
                rule = replace(rule, **scalar)
            new_columns.append(replace(col, rule=rule))
        return SimulatorSpec(columns=tuple(new_columns), free_params=self.free_params)

    # -- derived views ----------------------------------------------------

    def schema(self) -> tuple[ColumnSpec, ...]:
        return tuple(
            ColumnSpec(name=c.name, kind=c.kind, pii=False, categories=c.categories)
            for c in self.columns
        )

    def content_hash(self) -> str:
        payload = json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def to_json_dict(self) -> dict:
        columns = []
        for col in self.columns:
            entry: dict = {"name": col.name, "kind": col.kind}
            if col.categories is not None:
                entry["categories"] = list(col.categories)
            rule = col.rule
            if isinstance(rule, Uniform):
                entry["rule"] = {"dist": "uniform", "a": rule.a, "b": rule.b}
            elif isinstance(rule, Normal):
                entry["rule"] = {"dist": "normal", "mu": rule.mu, "sigma": rule.sigma}
            elif isinstance(rule, LogNormal):
                entry["rule"] = {"dist": "lognormal", "mu": rule.mu, "sigma": rule.sigma}
            elif isinstance(rule, Exponential):
                entry["rule"] = {"dist": "exponential", "rate": rule.rate}
            elif isinstance(rule, CategoricalDist):
                entry["rule"] = {"dist": "categorical", "weights": list(rule.weights)}
            else:
                entry["rule"] = {
                    "equation": {
                        "intercept": rule.intercept,
                        "terms": dict(rule.terms),
                        "noise_sigma": rule.noise_sigma,
                        "indicator": rule.indicator,
                    }
                }
            columns.append(entry)
        return {
            "columns": columns,
            "free_params": {k: list(v) for k, v in self.free_params.items()},
        }

    @classmethod
    def from_json_dict(cls, d: Mapping) -> "SimulatorSpec":
        columns = []
        for entry in d["columns"]:
            rule_spec = entry["rule"]
            if "equation" in rule_spec:
                eq = rule_spec["equation"]
                rule: Rule = Equation(
                    intercept=float(eq.get("intercept", 0.0)),
                    terms={k: float(v) for k, v in eq.get("terms", {}).items()},
                    noise_sigma=float(eq.get("noise_sigma", 0.0)),
                    indicator=bool(eq.get("indicator", False)),
                )
            else:
                dist = rule_spec["dist"]
                if dist == "uniform":
                    rule = Uniform(a=float(rule_spec["a"]), b=float(rule_spec["b"]))
                elif dist == "normal":
                    rule = Normal(mu=float(rule_spec["mu"]), sigma=float(rule_spec["sigma"]))
                elif dist == "lognormal":
                    rule = LogNormal(mu=float(rule_spec["mu"]), sigma=float(rule_spec["sigma"]))
                elif dist == "exponential":
                    rule = Exponential(rate=float(rule_spec["rate"]))
                elif dist == "categorical":
                    rule = CategoricalDist(weights=tuple(rule_spec["weights"]))
                else:
                    raise ValueError(f"unknown distribution {dist!r}")
            categories = entry.get("categories")
            columns.append(
                ColumnRule(
                    name=entry["name"],
                    kind=entry["kind"],
                    rule=rule,
                    categories=tuple(categories) if categories is not None else None,
                )
            )
        free = {k: (float(v[0]), float(v[1])) for k, v in d.get("free_params", {}).items()}
        return cls(columns=tuple(columns), free_params=free)


def load_simulator_spec(path: str | Path) -> SimulatorSpec:
    with Path(path).open("r", encoding="utf-8") as fh:
        return SimulatorSpec.from_json_dict(json.load(fh))


def save_simulator_spec(spec: SimulatorSpec, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        json.dump(spec.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


_SCALAR_FIELDS = {
    Uniform: ("a", "b"),
    Normal: ("mu", "sigma"),
    LogNormal: ("mu", "sigma"),
    Exponential: ("rate",),
    Equation: ("intercept", "noise_sigma"),
}


# -- simulation ---------------------------------------------------------------


def simulate(spec: SimulatorSpec, n: int, seed: int) -> Dataset:
    """Draw ``n`` independent rows by evaluating the column rules in order.

    Deterministic per seed; each column consumes its own derived substream, so
    samples are prefix-stable in ``n`` for a fixed seed.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    values: dict[str, np.ndarray] = {}
    columns: list[np.ndarray] = []
    for col in spec.columns:
        rng = generator(seed, f"sim:{col.name}")
        rule = col.rule
        if isinstance(rule, Uniform):
            out = rule.a + (rule.b - rule.a) * rng.random(n)
        elif isinstance(rule, Normal):
            out = rule.mu + rule.sigma * rng.standard_normal(n)
        elif isinstance(rule, LogNormal):
            out = np.exp(rule.mu + rule.sigma * rng.standard_normal(n))
        elif isinstance(rule, Exponential):
            out = rng.standard_exponential(n) / rule.rate
        elif isinstance(rule, CategoricalDist):
            weights = np.asarray(rule.weights, dtype=np.float64)
            cum = np.cumsum(weights / weights.sum())
            u = rng.random(n)
            out = np.minimum(np.searchsorted(cum, u, side="right"), len(weights) - 1)
            out = out.astype(np.int64)
        else:  # Equation
            out = np.full(n, rule.intercept, dtype=np.float64)
            for ref, coef in rule.terms.items():
                out = out + coef * values[ref].astype(np.float64)
            if rule.noise_sigma > 0:
                out = out + rule.noise_sigma * rng.standard_normal(n)
            if rule.indicator:
                out = (out > 0).astype(np.float64)
        if col.kind == NUMERIC_INTEGER and not isinstance(rule, CategoricalDist):
            out = np.rint(out).astype(np.int64)
        values[col.name] = out
        columns.append(out)

    return Dataset(
        spec.schema(),
        tuple(columns),
        np.arange(n, dtype=np.int64),
        provenance=f"simulated:{spec.content_hash()[:12]}",
    )


# -- calibration --------------------------------------------------------------


@dataclass(frozen=True)
class TargetStat:
    """One (column, statistic, target, weight) calibration entry.

    ``value`` may be None in a config file and filled from reference data with
    :func:`fill_targets`.
    """

    column: str
    statistic: str  # mean | std | quantile | category_frequency
    q: float | None = None
    category: str | None = None
    value: float | None = None
    weight: float = 1.0

    def __post_init__(self):
        if self.statistic not in ("mean", "std", "quantile", "category_frequency"):
            raise ValueError(f"unknown statistic {self.statistic!r}")
        if self.statistic == "quantile" and (self.q is None or not 0.0 <= self.q <= 1.0):
            raise ValueError("quantile statistic needs q in [0, 1]")
        if self.statistic == "category_frequency" and self.category is None:
            raise ValueError("category_frequency statistic needs a category")
        if self.weight < 0:
            raise ValueError("weight must be >= 0")
        if self.value is not None and not np.isfinite(self.value):
            raise ValueError("target value must be finite")

    def label(self) -> str:
        if self.statistic == "quantile":
            return f"{self.column}:quantile({self.q})"
        if self.statistic == "category_frequency":
            return f"{self.column}:freq({self.category})"
        return f"{self.column}:{self.statistic}"

    def to_json_dict(self) -> dict:
        return {
            "column": self.column,
            "statistic": self.statistic,
            "q": self.q,
            "category": self.category,
            "value": self.value,
            "weight": self.weight,
        }

    @classmethod
    def from_json_dict(cls, d: Mapping) -> "TargetStat":
        return cls(
            column=d["column"],
            statistic=d["statistic"],
            q=d.get("q"),
            category=d.get("category"),
            value=d.get("value"),
            weight=float(d.get("weight", 1.0)),
        )


@dataclass(frozen=True)
class CalibrationTarget:
    stats: tuple[TargetStat, ...]

    def __post_init__(self):
        stats = tuple(self.stats)
        if not stats:
            raise ValueError("calibration target needs at least one statistic")
        if all(s.weight == 0 for s in stats):
            raise ValueError("calibration weights must not all be zero")
        object.__setattr__(self, "stats", stats)

    def to_json_dict(self) -> dict:
        return {"targets": [s.to_json_dict() for s in self.stats]}

    @classmethod
    def from_json_dict(cls, d: Mapping) -> "CalibrationTarget":
        return cls(stats=tuple(TargetStat.from_json_dict(e) for e in d["targets"]))


def compute_statistic(dataset: Dataset, stat: TargetStat) -> float:
    spec = dataset.spec(stat.column)
    if stat.statistic == "category_frequency":
        if spec.kind != CATEGORICAL:
            raise ValueError(f"{stat.column!r}: category_frequency needs a categorical column")
        code = spec.code_of(stat.category)
        col = dataset.column(stat.column)
        return float(np.mean(col == code)) if col.size else 0.0
    if not spec.is_numeric:
        raise ValueError(f"{stat.column!r}: {stat.statistic} needs a numeric column")
    col = dataset.column(stat.column).astype(np.float64)
    if stat.statistic == "mean":
        return float(col.mean())
    if stat.statistic == "std":
        return float(col.std())
    return float(np.quantile(col, stat.q))


def fill_targets(target: CalibrationTarget, reference: Dataset) -> CalibrationTarget:
    """Fill missing target values with the statistics of ``reference``."""
    filled = tuple(
        s if s.value is not None else replace(s, value=compute_statistic(reference, s))
        for s in target.stats
    )
    return CalibrationTarget(stats=filled)


@dataclass(frozen=True)
class TraceEntry:
    index: int
    params: dict[str, float]
    loss: float


@dataclass(frozen=True)
class CalibrationResult:
    spec: SimulatorSpec
    params: dict[str, float]
    loss: float
    trace: tuple[TraceEntry, ...]
    evaluations: int
    seed: int
    sim_n: int


def evaluation_loss(
    spec: SimulatorSpec, target: CalibrationTarget, sim_n: int, seed: int
) -> float:
    """The calibration objective at the spec's current parameters (CRN seed)."""
    dataset = simulate(spec, sim_n, seed)
    loss = 0.0
    for stat in target.stats:
        if stat.value is None:
            raise ValueError(f"target {stat.label()} has no value; fill it first")
        scale = max(abs(stat.value), 1e-6)
        observed = compute_statistic(dataset, stat)
        loss += stat.weight * ((observed - stat.value) / scale) ** 2
    return float(loss)


class _BudgetExhausted(Exception):
    pass


def calibrate(
    spec: SimulatorSpec,
    target: CalibrationTarget,
    budget: int,
    sim_n: int,
    seed: int,
) -> CalibrationResult:
    """Tune the spec's free parameters so simulated statistics match the targets.

    Every objective evaluation simulates ``sim_n`` rows with the same seed
    (common random numbers), so re-evaluating the returned parameters
    reproduces the reported loss exactly.
    """
    paths = sorted(spec.free_params)
    if not paths:
        raise ValueError("spec has no free parameters to calibrate")
    if budget < 10:
        raise ValueError(f"budget must be at least 10 evaluations, got {budget}")
    if budget < len(paths) + 1:
        raise ValueError(
            f"budget {budget} is exhausted before a full initial simplex "
            f"({len(paths) + 1} points)"
        )
    for stat in target.stats:
        if stat.value is None:
            raise ValueError(f"target {stat.label()} has no value; fill it first")

    lo = np.asarray([spec.free_params[p][0] for p in paths])
    hi = np.asarray([spec.free_params[p][1] for p in paths])

    trace: list[TraceEntry] = []
    best: dict = {"loss": np.inf, "theta": None}

    def objective(raw: np.ndarray) -> float:
        if len(trace) >= budget:
            raise _BudgetExhausted()
        theta = np.clip(raw, lo, hi)
        params = {p: float(v) for p, v in zip(paths, theta)}
        try:
            loss = evaluation_loss(spec.with_params(params), target, sim_n, seed)
        except ValueError:
            loss = float("inf")  # rule constraints violated at this point
        trace.append(TraceEntry(index=len(trace), params=params, loss=loss))
        if loss < best["loss"]:
            best["loss"] = loss
            best["theta"] = params
        return loss

    x0 = (lo + hi) / 2.0
    steps = 0.1 * (hi - lo)
    try:
        _nelder_mead(objective, x0, steps)
    except _BudgetExhausted:
        pass

    if best["theta"] is None:
        raise RuntimeError("no successful objective evaluation")
    calibrated = spec.with_params(best["theta"])
    return CalibrationResult(
        spec=calibrated,
        params=best["theta"],
        loss=float(best["loss"]),
        trace=tuple(trace),
        evaluations=len(trace),
        seed=seed,
        sim_n=sim_n,
    )


def _nelder_mead(func, x0: np.ndarray, steps: np.ndarray) -> None:
    """Standard Nelder-Mead (reflect/expand/contract/shrink) around ``x0``.

    Runs until ``func`` raises or the simplex collapses; the caller harvests
    results from the evaluation trace, so nothing is returned.
    """
    alpha, gamma, rho, sigma = 1.0, 2.0, 0.5, 0.5
    d = x0.size
    simplex = [x0.copy()]
    for i in range(d):
        point = x0.copy()
        point[i] += steps[i]
        simplex.append(point)
    values = [func(p) for p in simplex]

    while True:
        order = np.argsort(values, kind="stable")
        simplex = [simplex[i] for i in order]
        values = [values[i] for i in order]

        spread = values[-1] - values[0]
        diameter = max(float(np.max(np.abs(p - simplex[0]))) for p in simplex[1:])
        if spread <= 1e-14 and diameter <= 1e-12:
            return

        centroid = np.mean(simplex[:-1], axis=0)
        reflected = centroid + alpha * (centroid - simplex[-1])
        f_reflected = func(reflected)

        if f_reflected < values[0]:
            expanded = centroid + gamma * (centroid - simplex[-1])
            f_expanded = func(expanded)
            if f_expanded < f_reflected:
                simplex[-1], values[-1] = expanded, f_expanded
            else:
                simplex[-1], values[-1] = reflected, f_reflected
        elif f_reflected < values[-2]:
            simplex[-1], values[-1] = reflected, f_reflected
        else:
            if f_reflected < values[-1]:
                contracted = centroid + rho * (reflected - centroid)
                f_contracted = func(contracted)
                accept = f_contracted <= f_reflected
            else:
                contracted = centroid + rho * (simplex[-1] - centroid)
                f_contracted = func(contracted)
                accept = f_contracted < values[-1]
            if accept:
                simplex[-1], values[-1] = contracted, f_contracted
            else:
                for i in range(1, d + 1):
                    simplex[i] = simplex[0] + sigma * (simplex[i] - simplex[0])
                    values[i] = func(simplex[i])


def write_trace_csv(trace: Sequence[TraceEntry], path: str | Path) -> None:
    """Calibration trace as CSV: iteration, each parameter, loss."""
    path = Path(path)
    params = sorted(trace[0].params) if trace else []
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["iteration", *params, "loss"])
        for entry in trace:
            writer.writerow(
                [entry.index, *(repr(entry.params[p]) for p in params), repr(entry.loss)]
            )


# -- scenario planting --------------------------------------------------------


@dataclass(frozen=True)
class Scenario:
    """A named row template planted ``count`` times for ground-truth testing.

    Template cells are fixed values, ``{"uniform": [lo, hi]}`` draws, or
    ``{"choice": [...]}`` draws; every schema column must be covered.
    """

    name: str
    template: Mapping[str, object]
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise ValueError(f"scenario {self.name!r}: count must be >= 1")
        object.__setattr__(self, "template", dict(self.template))

    def to_json_dict(self) -> dict:
        return {"name": self.name, "template": dict(self.template), "count": self.count}

    @classmethod
    def from_json_dict(cls, d: Mapping) -> "Scenario":
        return cls(name=d["name"], template=d["template"], count=int(d["count"]))


def _template_cell(spec: ColumnSpec, cell, rng: np.random.Generator):
    if isinstance(cell, Mapping):
        if "uniform" in cell:
            lo, hi = cell["uniform"]
            value = float(lo) + (float(hi) - float(lo)) * float(rng.random())
            return int(round(value)) if spec.kind == NUMERIC_INTEGER else value
        if "choice" in cell:
            options = list(cell["choice"])
            return options[int(rng.integers(0, len(options)))]
        raise ValueError(f"column {spec.name!r}: unknown template sampler {dict(cell)!r}")
    return cell


def plant_scenarios(
    dataset: Dataset, scenarios: Sequence[Scenario], seed: int
) -> tuple[Dataset, dict[int, str]]:
    """Insert scenario rows at seeded-random positions.

    Returns the widened dataset and a ground-truth sidecar mapping the planted
    row ids to their scenario names. Non-planted rows are unchanged.
    """
    if not scenarios:
        return dataset, {}
    rng = generator(seed, "plant-scenarios")

    planted_values: list[tuple] = []
    sidecar: dict[int, str] = {}
    next_id = int(dataset.row_ids.max()) + 1 if dataset.n_rows else 0
    planted_ids: list[int] = []
    for scenario in scenarios:
        missing = [c.name for c in dataset.schema if c.name not in scenario.template]
        if missing:
            raise ValueError(f"scenario {scenario.name!r}: template missing columns {missing}")
        for _ in range(scenario.count):
            row = tuple(
                _template_cell(spec, scenario.template[spec.name], rng)
                for spec in dataset.schema
            )
            planted_values.append(row)
            sidecar[next_id] = scenario.name
            planted_ids.append(next_id)
            next_id += 1

    m = len(planted_values)
    n = dataset.n_rows
    positions = np.sort(rng.choice(n + m, size=m, replace=False))

    planted_columns = []
    for j, spec in enumerate(dataset.schema):
        raw = [row[j] for row in planted_values]
        planted_columns.append(raw)
    planted = Dataset.from_values(
        dataset.schema,
        {spec.name: planted_columns[j] for j, spec in enumerate(dataset.schema)},
        row_ids=planted_ids,
        provenance=dataset.provenance,
    )

    order = np.empty(n + m, dtype=np.int64)
    is_planted = np.zeros(n + m, dtype=bool)
    is_planted[positions] = True
    order[is_planted] = np.arange(n, n + m)  # planted rows appended then routed in
    order[~is_planted] = np.arange(n)

    combined_cols = tuple(
        np.concatenate([orig, np.asarray(new)])[order]
        for orig, new in zip(dataset.columns, planted.columns)
    )
    combined_ids = np.concatenate([dataset.row_ids, planted.row_ids])[order]
    widened = Dataset(dataset.schema, combined_cols, combined_ids, dataset.provenance)
    return widened, sidecar


# -- corner-case sweep ---------------------------------------------------------


def corner_case_sweep(
    schema: Sequence[ColumnSpec], extras: Mapping[str, Sequence] | None = None
) -> Dataset:
    """One-factor-at-a-time boundary rows for downstream breakage testing.

    Emits one baseline row plus, per column, a row for each boundary value:
    numeric {min, max, 0 if in bounds, -max if in bounds}, every category for
    categoricals, plus any caller-supplied extras. The full cross product is
    deliberately not generated.
    """
    extras = dict(extras or {})
    schema = tuple(schema)

    baseline: list = []
    for spec in schema:
        if spec.is_numeric:
            if spec.bounds is not None:
                mid = (spec.bounds[0] + spec.bounds[1]) / 2.0
            else:
                mid = 0.0
            baseline.append(int(round(mid)) if spec.kind == NUMERIC_INTEGER else mid)
        elif spec.kind == CATEGORICAL:
            baseline.append(spec.categories[0])
        else:
            baseline.append("baseline")

    variants: list[tuple[int, object]] = []
    for j, spec in enumerate(schema):
        candidates: list = []
        if spec.is_numeric:
            if spec.bounds is not None:
                lo, hi = spec.bounds
                candidates.extend([lo, hi])
                if lo <= 0.0 <= hi:
                    candidates.append(0.0)
                if lo <= -abs(hi) <= hi:
                    candidates.append(-abs(hi))
            else:
                candidates.append(0.0)
            if spec.kind == NUMERIC_INTEGER:
                candidates = [int(round(v)) for v in candidates]
        elif spec.kind == CATEGORICAL:
            candidates.extend(spec.categories)
        deduped: list = []
        for v in candidates:
            if v not in deduped:
                deduped.append(v)
        deduped.extend(extras.get(spec.name, ()))
        variants.extend((j, v) for v in deduped)

    rows = [tuple(baseline)]
    for j, value in variants:
        row = list(baseline)
        row[j] = value
        rows.append(tuple(row))

    values = {spec.name: [row[j] for row in rows] for j, spec in enumerate(schema)}
    return Dataset.from_values(schema, values, provenance="corner-sweep")
