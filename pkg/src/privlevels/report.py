"""Certification reports and the regulation-risk matrix.

The matrix content is a fixed transcription: which regulation classes each
attack family can breach, independent of observed scores. Evaluated rows are
annotated with their attack score so "Applicable" risks carry evidence; rows
without a report — always including ModelInference, which this toolkit does
not evaluate — are emitted with status "not evaluated".

Reports contain no timestamps or host paths: identical configuration and seed
must reproduce byte-identical report files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .attacks import (
    ATTRIBUTE_INFERENCE,
    MIA,
    MODEL_INFERENCE,
    PROPERTY_INFERENCE,
    AttackReport,
    CertificationVerdict,
)

REGULATIONS = ("FCRA", "UDAAP", "Litigation", "Competitive")

APPLICABLE = "Applicable"
NOT_APPLICABLE = "N/A"

_MATRIX_FLAGS: dict[str, tuple[str, str, str, str]] = {
    MIA: (APPLICABLE, APPLICABLE, APPLICABLE, NOT_APPLICABLE),
    ATTRIBUTE_INFERENCE: (APPLICABLE, APPLICABLE, APPLICABLE, NOT_APPLICABLE),
    PROPERTY_INFERENCE: (NOT_APPLICABLE, NOT_APPLICABLE, APPLICABLE, APPLICABLE),
    MODEL_INFERENCE: (APPLICABLE, APPLICABLE, APPLICABLE, APPLICABLE),
}

MATRIX_ROWS = (MIA, ATTRIBUTE_INFERENCE, PROPERTY_INFERENCE, MODEL_INFERENCE)


def regulation_matrix(reports: Sequence[AttackReport]) -> list[dict]:
    """Static attack-family × regulation flags, annotated with observed scores."""
    by_attack = {}
    for report in reports:
        by_attack.setdefault(report.attack, report)
    rows = []
    for attack in MATRIX_ROWS:
        report = by_attack.get(attack) if attack != MODEL_INFERENCE else None
        flags = dict(zip(REGULATIONS, _MATRIX_FLAGS[attack]))
        rows.append(
            {
                "attack": attack,
                "flags": flags,
                "status": "evaluated" if report is not None else "not evaluated",
                "score": report.score if report is not None else None,
            }
        )
    return rows


@dataclass(frozen=True)
class CertificationReport:
    """What a pipeline run achieved, with the evidence behind the stamp."""

    claimed_level: int
    achieved_level: int
    attacks: tuple[AttackReport, ...]
    verdict: CertificationVerdict | None
    fidelity_composite: float | None
    fidelity: dict | None
    utility: dict | None
    total_epsilon: float | None
    matrix: list[dict]
    toolkit_version: str
    config_hash: str
    seed: int
    generator_label: str | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.achieved_level > self.claimed_level:
            raise ValueError("achieved level cannot exceed the claimed level")

    def to_json_dict(self) -> dict:
        return {
            "claimed_level": self.claimed_level,
            "achieved_level": self.achieved_level,
            "attacks": [r.to_json_dict() for r in self.attacks],
            "verdict": self.verdict.to_json_dict() if self.verdict else None,
            "fidelity_composite": self.fidelity_composite,
            "fidelity": self.fidelity,
            "utility": self.utility,
            "total_epsilon": self.total_epsilon,
            "regulation_matrix": self.matrix,
            "toolkit_version": self.toolkit_version,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "generator": self.generator_label,
            "extra": self.extra,
        }


def write_json(payload: Mapping, path: str | Path) -> None:
    """Deterministic JSON artifact: sorted keys, fixed layout, trailing newline."""
    with Path(path).open("w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _format_matrix(matrix: Sequence[Mapping]) -> list[str]:
    header = f"{'attack':<22}" + "".join(f"{reg:<14}" for reg in REGULATIONS) + "status"
    lines = [header, "-" * len(header)]
    for row in matrix:
        score = "" if row["score"] is None else f" (score={row['score']:.4f})"
        flags = "".join(f"{row['flags'][reg]:<14}" for reg in REGULATIONS)
        lines.append(f"{row['attack']:<22}{flags}{row['status']}{score}")
    return lines


def render_text(report: CertificationReport) -> str:
    lines = [
        "privlevels certification report",
        "=" * 33,
        f"claimed level:   {report.claimed_level}",
        f"achieved level:  {report.achieved_level}",
        f"toolkit version: {report.toolkit_version}",
        f"config hash:     {report.config_hash}",
        f"seed:            {report.seed}",
    ]
    if report.generator_label:
        lines.append(f"generator:       {report.generator_label}")
    if report.total_epsilon is not None:
        lines.append(f"total epsilon:   {report.total_epsilon:.6g}")
    if report.fidelity_composite is not None:
        lines.append(f"fidelity:        {report.fidelity_composite:.4f} (0 = indistinguishable)")
    if report.utility is not None:
        lines.append(
            f"utility uplift:  {report.utility['uplift']:+.4f} "
            f"(baseline {report.utility['acc_real_baseline']:.4f})"
        )
    if report.attacks:
        lines.append("")
        lines.append("attack results")
        lines.append("-" * 14)
        for attack in report.attacks:
            lines.append(
                f"{attack.attack:<22}{attack.algorithm:<28}"
                f"score={attack.score:.4f}  baseline={attack.baseline:.4f}"
            )
    if report.verdict is not None:
        lines.append("")
        status = "PASS" if report.verdict.passed else "FAIL"
        lines.append(f"certification: {status}")
        for attack, margin in sorted(report.verdict.margins.items()):
            lines.append(f"  {attack:<22} margin {margin:+.4f}")
        for warning in report.verdict.warnings:
            lines.append(f"  warning: {warning}")
        if report.verdict.failing:
            lines.append(f"  failing: {', '.join(report.verdict.failing)}")
    lines.append("")
    lines.append("regulation-risk matrix")
    lines.append("-" * 22)
    lines.extend(_format_matrix(report.matrix))
    lines.append("")
    return "\n".join(lines)
