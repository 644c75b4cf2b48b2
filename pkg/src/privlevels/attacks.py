"""Level 4 evaluators: attack a synthetic dataset and certify resistance.

Attack algorithms (named in every report, since scores are only comparable
within an algorithm):

* ``dcr-rank-mia``: rank member/non-member candidates by minus their distance
  to the closest synthetic record; score is the ROC-AUC of membership against
  that ranking, computed by the rank-sum formula with midranks for ties.
* ``knn-attribute-inference``: predict a categorical secret for each target by
  majority vote over its k nearest synthetic records on the quasi-identifier
  columns; score is accuracy, baseline is the targets' majority-class rate.
* ``statistic-recovery-pia``: use the synthetic value of each requested
  statistic as the adversary's estimate of the real one and report the
  relative recovery error (total-variation distance for histograms). Low
  error means the property leaked; the report score is the worst per-statistic
  error and the mean is carried in the details.

Certification compares each required attack's metric against a business-chosen
threshold; there are deliberately no universal defaults, and the thresholds
shipped in the example configs are illustrative only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

from .data import CATEGORICAL, Dataset
from .distance import column_ranges, comparable_columns, dcr, knn_indices
from .metrics import category_frequencies, tv_distance

MIA = "MIA"
ATTRIBUTE_INFERENCE = "AttributeInference"
PROPERTY_INFERENCE = "PropertyInference"
MODEL_INFERENCE = "ModelInference"

ATTACK_NAMES = (MIA, ATTRIBUTE_INFERENCE, PROPERTY_INFERENCE, MODEL_INFERENCE)

_PIA_ERROR_FLOOR = 1e-6  # guards relative error against zero-valued true statistics


@dataclass(frozen=True)
class AttackReport:
    """One attack's configuration, score, and no-information baseline."""

    attack: str
    algorithm: str
    score: float
    baseline: float
    config: dict
    seed: int
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.attack not in ATTACK_NAMES:
            raise ValueError(f"unknown attack {self.attack!r}")
        if self.attack == MIA and not (0.0 <= self.score <= 1.0):
            raise ValueError(f"MIA AUC must be in [0, 1], got {self.score}")
        if self.attack == PROPERTY_INFERENCE and self.score < 0.0:
            raise ValueError("PIA recovery error must be >= 0")

    @property
    def uplift(self) -> float:
        return self.score - self.baseline

    def to_json_dict(self) -> dict:
        return {
            "attack": self.attack,
            "algorithm": self.algorithm,
            "score": self.score,
            "baseline": self.baseline,
            "uplift": self.uplift,
            "config": self.config,
            "seed": self.seed,
            "details": self.details,
        }


def auc_from_scores(positive: np.ndarray, negative: np.ndarray) -> float:
    """ROC-AUC via the Mann-Whitney rank-sum formula, midranks for ties."""
    positive = np.asarray(positive, dtype=np.float64)
    negative = np.asarray(negative, dtype=np.float64)
    if positive.size == 0 or negative.size == 0:
        raise ValueError("AUC needs both classes to be non-empty")
    ranks = rankdata(np.concatenate([positive, negative]), method="average")
    rank_sum = float(ranks[: positive.size].sum())
    n_pos, n_neg = positive.size, negative.size
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def run_mia(
    synthetic: Dataset,
    members: Dataset,
    non_members: Dataset,
    columns: Sequence[str] | None = None,
    seed: int = 0,
) -> AttackReport:
    """Distance-to-closest-record membership inference.

    Candidates closer to the synthetic cloud are ranked more member-like;
    the score is the AUC of true membership against that ranking. Invariant
    under row-id relabeling and any permutation of the synthetic set.
    """
    if members.n_rows == 0 or non_members.n_rows == 0:
        raise ValueError("members and non-members must both be non-empty")
    if synthetic.n_rows == 0:
        raise ValueError("synthetic dataset is empty")
    if members.schema != non_members.schema:
        raise ValueError("members and non-members must share a schema")
    if columns is None:
        columns = comparable_columns(members, synthetic)
    if not columns:
        raise ValueError("schema mismatch: no comparable columns with the synthetic data")

    ranges: dict[str, float] = {}
    for name in columns:
        if members.spec(name).is_numeric:
            lo = min(float(members.column(name).min()), float(non_members.column(name).min()))
            hi = max(float(members.column(name).max()), float(non_members.column(name).max()))
            ranges[name] = (hi - lo) if hi > lo else 1.0

    member_dcr = dcr(members, synthetic, columns, ranges)
    non_member_dcr = dcr(non_members, synthetic, columns, ranges)
    auc = auc_from_scores(-member_dcr, -non_member_dcr)

    return AttackReport(
        attack=MIA,
        algorithm="dcr-rank-mia",
        score=float(auc),
        baseline=0.5,
        config={
            "columns": list(columns),
            "n_members": members.n_rows,
            "n_non_members": non_members.n_rows,
            "n_synthetic": synthetic.n_rows,
        },
        seed=seed,
        details={
            "mean_member_dcr": float(member_dcr.mean()),
            "mean_non_member_dcr": float(non_member_dcr.mean()),
        },
    )


def run_attribute_inference(
    synthetic: Dataset,
    targets: Dataset,
    quasi_ids: Sequence[str],
    secret: str,
    k: int,
    seed: int = 0,
) -> AttackReport:
    """k-NN reconstruction of a categorical secret from quasi-identifiers."""
    secret_spec = targets.spec(secret)
    if secret_spec.kind != CATEGORICAL:
        raise ValueError(f"secret column {secret!r} must be categorical (v1 restriction)")
    if secret in quasi_ids:
        raise ValueError("secret column cannot also be a quasi-identifier")
    if not quasi_ids:
        raise ValueError("need at least one quasi-identifier column")
    if synthetic.spec(secret).categories != secret_spec.categories:
        raise ValueError(f"secret column {secret!r}: category lists differ")
    shared = set(comparable_columns(targets, synthetic))
    missing = [c for c in quasi_ids if c not in shared]
    if missing:
        raise ValueError(f"quasi-identifiers not comparable with synthetic data: {missing}")
    if k > synthetic.n_rows:
        raise ValueError(f"k={k} exceeds synthetic size {synthetic.n_rows}")

    ranges = column_ranges(targets, quasi_ids)
    neighbor_idx = knn_indices(targets, synthetic, quasi_ids, ranges, k)
    n_classes = len(secret_spec.categories)
    votes = synthetic.column(secret)[neighbor_idx]
    predictions = np.empty(targets.n_rows, dtype=np.int64)
    for i in range(targets.n_rows):
        counts = np.bincount(votes[i], minlength=n_classes)
        predictions[i] = int(np.argmax(counts))  # ties resolve to the lowest code

    truth = targets.column(secret)
    accuracy = float(np.mean(predictions == truth))
    baseline = float(np.bincount(truth, minlength=n_classes).max() / targets.n_rows)

    return AttackReport(
        attack=ATTRIBUTE_INFERENCE,
        algorithm="knn-attribute-inference",
        score=accuracy,
        baseline=baseline,
        config={"quasi_ids": list(quasi_ids), "secret": secret, "k": k,
                "n_targets": targets.n_rows, "n_synthetic": synthetic.n_rows},
        seed=seed,
    )


@dataclass(frozen=True)
class PropertySpec:
    """One statistic the adversary tries to recover."""

    column: str
    statistic: str  # mean | quantile | histogram
    q: float | None = None

    def __post_init__(self):
        if self.statistic not in ("mean", "quantile", "histogram"):
            raise ValueError(f"unknown statistic {self.statistic!r}")
        if self.statistic == "quantile":
            if self.q is None or not (0.0 <= self.q <= 1.0):
                raise ValueError("quantile statistic needs q in [0, 1]")

    def label(self) -> str:
        if self.statistic == "quantile":
            return f"{self.column}:quantile({self.q})"
        return f"{self.column}:{self.statistic}"


def default_properties(dataset: Dataset) -> list[PropertySpec]:
    """Mean and 0.1/0.5/0.9 quantiles per numeric column, histogram per categorical."""
    props: list[PropertySpec] = []
    for spec in dataset.schema:
        if spec.is_numeric:
            props.append(PropertySpec(spec.name, "mean"))
            for q in (0.1, 0.5, 0.9):
                props.append(PropertySpec(spec.name, "quantile", q))
        elif spec.kind == CATEGORICAL:
            props.append(PropertySpec(spec.name, "histogram"))
    return props


def _recovery_error(real: Dataset, synthetic: Dataset, prop: PropertySpec) -> dict:
    spec = real.spec(prop.column)
    if prop.statistic == "histogram":
        if spec.kind != CATEGORICAL:
            raise ValueError(f"{prop.column!r}: histogram needs a categorical column")
        if synthetic.spec(prop.column).categories != spec.categories:
            raise ValueError(f"{prop.column!r}: category lists differ")
        true_val = category_frequencies(real, prop.column)
        est = category_frequencies(synthetic, prop.column)
        error = tv_distance(true_val, est)
        return {"property": prop.label(), "real": true_val.tolist(),
                "synthetic": est.tolist(), "error": error}
    if not spec.is_numeric:
        raise ValueError(f"{prop.column!r}: {prop.statistic} needs a numeric column")
    real_col = real.column(prop.column).astype(np.float64)
    synth_col = synthetic.column(prop.column).astype(np.float64)
    if prop.statistic == "mean":
        true_val, est = float(real_col.mean()), float(synth_col.mean())
    else:
        true_val = float(np.quantile(real_col, prop.q))
        est = float(np.quantile(synth_col, prop.q))
    error = abs(est - true_val) / max(abs(true_val), _PIA_ERROR_FLOOR)
    return {"property": prop.label(), "real": true_val, "synthetic": est, "error": error}


def run_property_inference(
    synthetic: Dataset,
    real: Dataset,
    properties: Sequence[PropertySpec] | None = None,
    seed: int = 0,
) -> AttackReport:
    """Statistic recovery: how accurately does synthetic data reveal real aggregates."""
    if properties is None:
        properties = default_properties(real)
    if not properties:
        raise ValueError("need at least one property to evaluate")
    results = [_recovery_error(real, synthetic, p) for p in properties]
    errors = np.asarray([r["error"] for r in results], dtype=np.float64)
    return AttackReport(
        attack=PROPERTY_INFERENCE,
        algorithm="statistic-recovery-pia",
        score=float(errors.max()),
        baseline=1.0,  # no-information reference: order-of-magnitude wrong estimates
        config={"properties": [p.label() for p in properties]},
        seed=seed,
        details={"per_statistic": results, "mean_error": float(errors.mean()),
                 "max_error": float(errors.max())},
    )


@dataclass(frozen=True)
class CertificationThresholds:
    """Business-chosen pass criteria; ``required`` names the attacks that must pass."""

    max_mia_auc: float | None = None
    max_aia_uplift: float | None = None
    max_pia_recovery: float | None = None
    required: tuple[str, ...] = ()

    def __post_init__(self):
        if self.max_mia_auc is not None and not (0.0 <= self.max_mia_auc <= 1.0):
            raise ValueError("max_mia_auc must be in [0, 1]")
        if self.max_aia_uplift is not None and not (-1.0 <= self.max_aia_uplift <= 1.0):
            raise ValueError("max_aia_uplift must be in [-1, 1]")
        if self.max_pia_recovery is not None and self.max_pia_recovery < 0.0:
            raise ValueError("max_pia_recovery must be >= 0")
        bad = [a for a in self.required if a not in (MIA, ATTRIBUTE_INFERENCE, PROPERTY_INFERENCE)]
        if bad:
            raise ValueError(f"unknown attacks in required set: {bad}")
        object.__setattr__(self, "required", tuple(self.required))

    def to_json_dict(self) -> dict:
        return {
            "max_mia_auc": self.max_mia_auc,
            "max_aia_uplift": self.max_aia_uplift,
            "max_pia_recovery": self.max_pia_recovery,
            "required": list(self.required),
        }

    @classmethod
    def from_json_dict(cls, d: Mapping) -> "CertificationThresholds":
        return cls(
            max_mia_auc=d.get("max_mia_auc"),
            max_aia_uplift=d.get("max_aia_uplift"),
            max_pia_recovery=d.get("max_pia_recovery"),
            required=tuple(d.get("required", ())),
        )


def load_thresholds(path: str | Path) -> CertificationThresholds:
    with Path(path).open("r", encoding="utf-8") as fh:
        return CertificationThresholds.from_json_dict(json.load(fh))


@dataclass(frozen=True)
class CertificationVerdict:
    passed: bool
    margins: dict[str, float]  # threshold minus observed metric; negative = fail
    failing: tuple[str, ...]
    warnings: tuple[str, ...]

    def to_json_dict(self) -> dict:
        return {
            "passed": self.passed,
            "margins": self.margins,
            "failing": list(self.failing),
            "warnings": list(self.warnings),
        }


_THRESHOLD_FIELDS = {
    MIA: ("max_mia_auc", lambda r: r.score),
    ATTRIBUTE_INFERENCE: ("max_aia_uplift", lambda r: r.uplift),
    PROPERTY_INFERENCE: ("max_pia_recovery", lambda r: r.score),
}


def certify(
    reports: Sequence[AttackReport], thresholds: CertificationThresholds
) -> CertificationVerdict:
    """Pass iff every required attack's metric is within its threshold.

    Monotone by construction: weakening (raising) any threshold can only grow
    margins, never flip a pass to a fail. An empty required set passes
    vacuously and is flagged with a warning.
    """
    by_attack = {}
    for report in reports:
        by_attack.setdefault(report.attack, report)

    warnings: list[str] = []
    if not thresholds.required:
        warnings.append("required attack set is empty: vacuous pass")

    margins: dict[str, float] = {}
    failing: list[str] = []
    for attack in thresholds.required:
        if attack not in by_attack:
            raise ValueError(f"missing required attack report: {attack}")
        field_name, metric = _THRESHOLD_FIELDS[attack]
        limit = getattr(thresholds, field_name)
        if limit is None:
            raise ValueError(f"required attack {attack} has no threshold ({field_name} unset)")
        margin = float(limit - metric(by_attack[attack]))
        margins[attack] = margin
        if margin < 0:
            failing.append(attack)

    return CertificationVerdict(
        passed=not failing,
        margins=margins,
        failing=tuple(failing),
        warnings=tuple(warnings),
    )
