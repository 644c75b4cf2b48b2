"""Config-driven orchestration: run any level, audit, certify, compare.

A pipeline run loads the input table, produces the requested level's output,
scores it, and emits both data and report artifacts. The master seed fans out
to stage seeds through labeled derivation, so adding a stage never perturbs
another stage's randomness, and identical config + seed reproduce every
artifact byte for byte. For the same reason reports never contain wall-clock
times or host paths; stage timing goes to stderr only.

Level semantics:
  1   obscure PII columns
  2   obscure, then per-column noise / swapping / randomized response
  3   fit a generator (copula or kdtree) and sample fresh rows
  4   level-3 output, then the full attack suite; the level-4 stamp is granted
      only when certification passes, otherwise the run is downgraded to 3
  5   calibrate the simulator to aggregate statistics of the input, simulate
  6   simulate uncalibrated, with optional scenario planting and corner sweeps
"""

from __future__ import annotations

import hashlib
import json
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .attacks import (
    ATTRIBUTE_INFERENCE,
    MIA,
    PROPERTY_INFERENCE,
    AttackReport,
    CertificationThresholds,
    CertificationVerdict,
    certify,
    run_attribute_inference,
    run_mia,
    run_property_inference,
)
from .copula import fit_copula, sample_copula
from .data import Dataset, SplitResult, load_csv, load_schema, save_schema, split_holdout, write_csv
from .kdtree import GENERATOR_LABEL as KDTREE_LABEL
from .kdtree import fit_kdtree, sample_kdtree
from .metrics import UtilityTask, fidelity, utility_tstr
from .noise import NoiseConfig, add_noise, total_epsilon
from .obscure import ObscurePolicy, obscure
from .report import CertificationReport, regulation_matrix, render_text, write_json
from .rng import derive_seed
from .simulate import (
    CalibrationResult,
    CalibrationTarget,
    Scenario,
    SimulatorSpec,
    calibrate,
    compute_statistic,
    corner_case_sweep,
    fill_targets,
    plant_scenarios,
    simulate,
)
from .version import __version__


class StageError(RuntimeError):
    """A pipeline stage failed; carries the stage name for diagnosis."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r}: {cause}")
        self.stage = stage
        self.cause = cause


def stage_seed(master: int, name: str) -> int:
    return derive_seed(master, f"stage:{name}")


# -- configuration ------------------------------------------------------------


@dataclass(frozen=True)
class GeneratorConfig:
    kind: str  # copula | kdtree
    sample_n: int | None = None  # default: training row count
    min_leaf: int = 25
    epsilon: float | None = None  # kdtree budget; None means no noise
    max_depth: int = 16

    def __post_init__(self):
        if self.kind not in ("copula", "kdtree"):
            raise ValueError(f"unknown generator kind {self.kind!r}")

    @classmethod
    def from_json_dict(cls, d: Mapping) -> "GeneratorConfig":
        return cls(
            kind=d["kind"],
            sample_n=d.get("sample_n"),
            min_leaf=int(d.get("min_leaf", 25)),
            epsilon=d.get("epsilon"),
            max_depth=int(d.get("max_depth", 16)),
        )


@dataclass(frozen=True)
class AttackConfig:
    member_fraction: float = 0.5
    quasi_ids: tuple[str, ...] = ()
    secret: str | None = None
    k: int = 5
    thresholds: CertificationThresholds | None = None

    @classmethod
    def from_json_dict(cls, d: Mapping) -> "AttackConfig":
        thresholds = d.get("thresholds")
        return cls(
            member_fraction=float(d.get("member_fraction", 0.5)),
            quasi_ids=tuple(d.get("quasi_ids", ())),
            secret=d.get("secret"),
            k=int(d.get("k", 5)),
            thresholds=(
                CertificationThresholds.from_json_dict(thresholds)
                if thresholds is not None
                else None
            ),
        )


@dataclass(frozen=True)
class CalibrationConfig:
    target: CalibrationTarget
    budget: int = 100
    sim_n: int = 5000

    @classmethod
    def from_json_dict(cls, d: Mapping) -> "CalibrationConfig":
        return cls(
            target=CalibrationTarget.from_json_dict(d),
            budget=int(d.get("budget", 100)),
            sim_n=int(d.get("sim_n", 5000)),
        )


@dataclass(frozen=True)
class UtilityConfig:
    task: UtilityTask
    k: int = 5

    @classmethod
    def from_json_dict(cls, d: Mapping) -> "UtilityConfig":
        return cls(
            task=UtilityTask(label=d["label"], features=tuple(d["features"])),
            k=int(d.get("k", 5)),
        )


_LEVEL_REQUIREMENTS = {
    1: ("obscure",),
    2: ("obscure", "noise"),
    3: ("generator",),
    4: ("generator", "attacks"),
    5: ("simulator", "calibration"),
    6: ("simulator",),
}


@dataclass(frozen=True)
class PipelineConfig:
    raw: dict
    data_path: str
    schema_path: str
    level: int
    seed: int
    output_dir: str | None
    obscure_policy: ObscurePolicy | None
    noise: NoiseConfig | None
    generator: GeneratorConfig | None
    attacks: AttackConfig
    simulator: SimulatorSpec | None
    calibration: CalibrationConfig | None
    simulate_n: int | None
    scenarios: tuple[Scenario, ...]
    corner_extras: dict | None  # None disables the sweep; {} runs it bare
    fidelity_weights: dict | None
    utility: UtilityConfig | None

    @classmethod
    def from_dict(cls, d: Mapping) -> "PipelineConfig":
        raw = json.loads(json.dumps(dict(d)))  # defensive deep copy, JSON-typed
        level = int(raw.get("level", 0))
        if level not in range(1, 7):
            raise ValueError(f"level must be in 1..6, got {raw.get('level')!r}")
        missing = [k for k in ("data", "schema", "seed") if k not in raw]
        if missing:
            raise ValueError(f"config missing keys {missing}")
        corner = raw.get("corner_sweep")
        corner_extras: dict | None
        if corner is None or corner is False:
            corner_extras = None
        elif corner is True:
            corner_extras = {}
        else:
            corner_extras = dict(corner.get("extras", {})) if corner.get("enabled", True) else None
        config = cls(
            raw=raw,
            data_path=raw["data"],
            schema_path=raw["schema"],
            level=level,
            seed=int(raw["seed"]),
            output_dir=raw.get("output_dir"),
            obscure_policy=(
                ObscurePolicy.from_json_dict(raw["obscure"]) if "obscure" in raw else None
            ),
            noise=NoiseConfig.from_json_dict(raw["noise"]) if "noise" in raw else None,
            generator=(
                GeneratorConfig.from_json_dict(raw["generator"]) if "generator" in raw else None
            ),
            attacks=AttackConfig.from_json_dict(raw.get("attacks", {})),
            simulator=(
                SimulatorSpec.from_json_dict(raw["simulator"]) if "simulator" in raw else None
            ),
            calibration=(
                CalibrationConfig.from_json_dict(raw["calibration"])
                if "calibration" in raw
                else None
            ),
            simulate_n=raw.get("simulate_n"),
            scenarios=tuple(Scenario.from_json_dict(s) for s in raw.get("scenarios", ())),
            corner_extras=corner_extras,
            fidelity_weights=raw.get("fidelity_weights"),
            utility=UtilityConfig.from_json_dict(raw["utility"]) if "utility" in raw else None,
        )
        config.validate_for_level(level)
        return config

    def validate_for_level(self, level: int) -> None:
        present = {
            "obscure": self.obscure_policy is not None,
            "noise": self.noise is not None,
            "generator": self.generator is not None,
            "attacks": self.attacks.thresholds is not None,
            "simulator": self.simulator is not None,
            "calibration": self.calibration is not None,
        }
        missing = [k for k in _LEVEL_REQUIREMENTS[level] if not present[k]]
        if missing:
            raise ValueError(f"level {level} requires config sections {missing}")

    def config_hash(self) -> str:
        hashable = {k: v for k, v in self.raw.items() if k != "output_dir"}
        payload = json.dumps(hashable, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def load_config(path: str | Path) -> PipelineConfig:
    with Path(path).open("r", encoding="utf-8") as fh:
        return PipelineConfig.from_dict(json.load(fh))


# -- level production ----------------------------------------------------------


@dataclass
class LevelArtifacts:
    output: Dataset
    generator_label: str
    total_epsilon: float | None = None
    model_json: dict | None = None
    calibration: CalibrationResult | None = None
    sidecar: dict[int, str] | None = None
    corner: Dataset | None = None


def produce_level_output(
    level: int, training: Dataset, config: PipelineConfig, master_seed: int
) -> LevelArtifacts:
    """Build the level's output from ``training`` (pure given the seed)."""
    if level == 1:
        out = obscure(training, config.obscure_policy).with_provenance("level1")
        return LevelArtifacts(output=out, generator_label="transcription+obscure")

    if level == 2:
        obscured = obscure(training, config.obscure_policy)
        noised = add_noise(obscured, config.noise, stage_seed(master_seed, "noise"))
        return LevelArtifacts(
            output=noised.with_provenance("level2"),
            generator_label="transcription+obscure+noise",
            total_epsilon=total_epsilon(config.noise),
        )

    if level in (3, 4):
        gen = config.generator
        base = training.without_identifiers()
        n = gen.sample_n if gen.sample_n is not None else training.n_rows
        if gen.kind == "copula":
            model = fit_copula(base)
            out = sample_copula(model, n, stage_seed(master_seed, "sample"))
            return LevelArtifacts(
                output=out,
                generator_label="gaussian-copula",
                model_json=model.to_json_dict(),
            )
        epsilon = math.inf if gen.epsilon is None else float(gen.epsilon)
        model = fit_kdtree(
            base,
            min_leaf=gen.min_leaf,
            epsilon=epsilon,
            seed=stage_seed(master_seed, "fit"),
            max_depth=gen.max_depth,
        )
        out = sample_kdtree(model, n, stage_seed(master_seed, "sample"))
        return LevelArtifacts(
            output=out,
            generator_label=KDTREE_LABEL,
            total_epsilon=None if math.isinf(epsilon) else epsilon,
            model_json=model.to_json_dict(),
        )

    if level == 5:
        calib = config.calibration
        filled = fill_targets(calib.target, training)
        result = calibrate(
            config.simulator,
            filled,
            budget=calib.budget,
            sim_n=calib.sim_n,
            seed=stage_seed(master_seed, "calibrate"),
        )
        n = config.simulate_n if config.simulate_n is not None else training.n_rows
        out = simulate(result.spec, n, stage_seed(master_seed, "simulate"))
        out = out.with_provenance(f"level5:{result.spec.content_hash()[:12]}")
        return LevelArtifacts(
            output=out, generator_label="calibrated-simulator", calibration=result
        )

    # level 6
    spec = config.simulator
    n = config.simulate_n if config.simulate_n is not None else training.n_rows
    out = simulate(spec, n, stage_seed(master_seed, "simulate"))
    out = out.with_provenance(f"level6:{spec.content_hash()[:12]}")
    sidecar = None
    if config.scenarios:
        out, sidecar = plant_scenarios(out, config.scenarios, stage_seed(master_seed, "plant"))
    corner = None
    if config.corner_extras is not None:
        corner = corner_case_sweep(training.schema, config.corner_extras)
    return LevelArtifacts(
        output=out,
        generator_label="uncalibrated-simulator",
        sidecar=sidecar,
        corner=corner,
    )


# -- attacks -------------------------------------------------------------------


def run_attack_suite(
    synthetic: Dataset,
    members: Dataset,
    non_members: Dataset,
    config: AttackConfig,
    master_seed: int,
) -> list[AttackReport]:
    """MIA + (if configured) attribute inference + property inference."""
    reports = [
        run_mia(synthetic, members, non_members, seed=stage_seed(master_seed, "attack-mia"))
    ]
    if config.secret is not None:
        reports.append(
            run_attribute_inference(
                synthetic,
                members,
                quasi_ids=config.quasi_ids,
                secret=config.secret,
                k=config.k,
                seed=stage_seed(master_seed, "attack-aia"),
            )
        )
    reports.append(
        run_property_inference(synthetic, members, seed=stage_seed(master_seed, "attack-pia"))
    )
    return reports


def calibrated_stat_errors(
    real: Dataset, synthetic: Dataset, target: CalibrationTarget
) -> dict[str, float]:
    """Relative recovery error of each calibration statistic, synthetic vs real."""
    errors = {}
    for stat in target.stats:
        truth = compute_statistic(real, stat)
        estimate = compute_statistic(synthetic, stat)
        errors[stat.label()] = abs(estimate - truth) / max(abs(truth), 1e-6)
    return errors


# -- single runs ---------------------------------------------------------------


@dataclass
class RunResult:
    report: CertificationReport
    out_dir: Path
    files: dict[str, Path]
    verdict: CertificationVerdict | None

    @property
    def certification_failed(self) -> bool:
        return self.verdict is not None and not self.verdict.passed


class _StageTimer:
    def __init__(self):
        self.t0 = time.perf_counter()

    def mark(self, stage: str) -> None:
        # stderr only: artifacts must stay byte-identical across reruns
        elapsed = time.perf_counter() - self.t0
        print(f"[privlevels] stage={stage} elapsed={elapsed:.3f}s", file=sys.stderr)
        self.t0 = time.perf_counter()


def run_pipeline(
    config: PipelineConfig,
    out_dir: str | Path | None = None,
    seed: int | None = None,
    level: int | None = None,
) -> RunResult:
    """Execute one level end to end and write its artifacts."""
    level = config.level if level is None else level
    seed = config.seed if seed is None else seed
    config.validate_for_level(level)
    target_dir = out_dir if out_dir is not None else config.output_dir
    if target_dir is None:
        raise ValueError("no output directory: set output_dir in the config or pass --out")
    out = Path(target_dir)
    out.mkdir(parents=True, exist_ok=True)

    timer = _StageTimer()
    try:
        schema = load_schema(config.schema_path)
        data = load_csv(config.data_path, schema)
    except Exception as exc:
        raise StageError("ingest", exc)
    timer.mark("ingest")

    split: SplitResult | None = None
    training = data
    if level == 4:
        try:
            split = split_holdout(
                data, config.attacks.member_fraction, stage_seed(seed, "split")
            )
        except Exception as exc:
            raise StageError("split", exc)
        training = split.members
        timer.mark("split")

    try:
        artifacts = produce_level_output(level, training, config, seed)
    except Exception as exc:
        raise StageError(f"level{level}", exc)
    timer.mark(f"level{level}")

    attack_reports: list[AttackReport] = []
    verdict: CertificationVerdict | None = None
    achieved = level
    if level == 4:
        try:
            attack_reports = run_attack_suite(
                artifacts.output, split.members, split.non_members, config.attacks, seed
            )
            verdict = certify(attack_reports, config.attacks.thresholds)
        except Exception as exc:
            raise StageError("attacks", exc)
        achieved = 4 if verdict.passed else 3
        timer.mark("attacks")

    try:
        fid = fidelity(
            training.without_identifiers(),
            artifacts.output.without_identifiers(),
            config.fidelity_weights,
        )
    except Exception as exc:
        raise StageError("fidelity", exc)
    timer.mark("fidelity")

    utility = None
    if config.utility is not None:
        if level != 4:
            raise StageError(
                "utility",
                ValueError("utility scoring needs level 4's member/holdout split"),
            )
        try:
            utility = utility_tstr(
                split.members.without_identifiers(),
                artifacts.output,
                split.non_members.without_identifiers(),
                config.utility.task,
                k=config.utility.k,
            ).to_json_dict()
        except Exception as exc:
            raise StageError("utility", exc)
        timer.mark("utility")

    extra: dict = {"provenance": artifacts.output.provenance, "rows": artifacts.output.n_rows}
    if artifacts.calibration is not None:
        extra["calibration"] = {
            "loss": artifacts.calibration.loss,
            "evaluations": artifacts.calibration.evaluations,
            "params": artifacts.calibration.params,
        }
    if artifacts.sidecar is not None:
        extra["planted_rows"] = len(artifacts.sidecar)

    report = CertificationReport(
        claimed_level=level,
        achieved_level=achieved,
        attacks=tuple(attack_reports),
        verdict=verdict,
        fidelity_composite=fid.composite,
        fidelity=fid.to_json_dict(),
        utility=utility,
        total_epsilon=artifacts.total_epsilon,
        matrix=regulation_matrix(attack_reports),
        toolkit_version=__version__,
        config_hash=config.config_hash(),
        seed=seed,
        generator_label=artifacts.generator_label,
        extra=extra,
    )

    files = _write_run_artifacts(out, artifacts, report)
    timer.mark("write")
    return RunResult(report=report, out_dir=out, files=files, verdict=verdict)


def _write_run_artifacts(
    out: Path, artifacts: LevelArtifacts, report: CertificationReport
) -> dict[str, Path]:
    files: dict[str, Path] = {}

    def emit(name: str, path: Path) -> Path:
        files[name] = path
        return path

    write_csv(artifacts.output, emit("output", out / "output.csv"))
    save_schema(artifacts.output.schema, emit("output_schema", out / "output.schema.json"))
    if artifacts.model_json is not None:
        write_json(artifacts.model_json, emit("model", out / "model.json"))
    if artifacts.calibration is not None:
        from .simulate import save_simulator_spec, write_trace_csv

        write_trace_csv(
            artifacts.calibration.trace, emit("trace", out / "calibration_trace.csv")
        )
        save_simulator_spec(
            artifacts.calibration.spec, emit("calibrated_spec", out / "calibrated_spec.json")
        )
    if artifacts.sidecar is not None:
        write_json(
            {str(k): v for k, v in artifacts.sidecar.items()},
            emit("ground_truth", out / "ground_truth.json"),
        )
    if artifacts.corner is not None:
        write_csv(artifacts.corner, emit("corner_cases", out / "corner_cases.csv"))
    if report.attacks:
        write_json(
            {
                "attacks": [r.to_json_dict() for r in report.attacks],
                "verdict": report.verdict.to_json_dict() if report.verdict else None,
            },
            emit("attack_reports", out / "attack_reports.json"),
        )
    write_json(report.to_json_dict(), emit("report", out / "certification_report.json"))
    emit("summary", out / "summary.txt").write_text(render_text(report), encoding="utf-8")
    return files


# -- external-synthetic audit ---------------------------------------------------


def audit_synthetic(
    real: Dataset,
    synthetic: Dataset,
    config: AttackConfig,
    seed: int,
    holdout: Dataset | None = None,
) -> tuple[list[AttackReport], CertificationVerdict | None]:
    """Attack an externally produced synthetic dataset.

    With no explicit holdout the real data is split by ``member_fraction``;
    that protocol assumes the synthetic data was derived from the member half
    (which is exactly what `run --level 4` does).
    """
    if holdout is not None:
        members, non_members = real, holdout
    else:
        split = split_holdout(real, config.member_fraction, stage_seed(seed, "split"))
        members, non_members = split.members, split.non_members
    reports = run_attack_suite(synthetic, members, non_members, config, seed)
    verdict = certify(reports, config.thresholds) if config.thresholds is not None else None
    return reports, verdict


# -- level comparison ------------------------------------------------------------

MONOTONICITY_CHAIN = (1, 2, 3, 5, 6)
MONOTONICITY_SLACK = 0.02


@dataclass
class CompareResult:
    table: dict
    out_dir: Path
    files: dict[str, Path]


def compare_levels(
    compare_config: Mapping, out_dir: str | Path, seed: int | None = None
) -> CompareResult:
    """Run all six levels on one input and tabulate attack/fidelity metrics.

    All levels transform the same member half of a single holdout split, so
    their MIA/AIA/PIA scores are directly comparable; the non-member half is
    the control group no level ever sees.
    """
    raw = json.loads(json.dumps(dict(compare_config)))
    seed = int(raw.get("seed", 0)) if seed is None else seed
    levels_cfg = raw.get("levels")
    if not levels_cfg:
        raise ValueError("compare config needs a 'levels' section")
    missing = [str(k) for k in range(1, 7) if str(k) not in levels_cfg]
    if missing:
        raise ValueError(f"compare config missing levels {missing}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    shared = {k: v for k, v in raw.items() if k not in ("levels", "output_dir")}
    hashable = json.dumps(
        {k: v for k, v in raw.items() if k != "output_dir"},
        sort_keys=True,
        separators=(",", ":"),
    )
    config_hash = hashlib.sha256(hashable.encode("utf-8")).hexdigest()

    try:
        schema = load_schema(raw["schema"])
        data = load_csv(raw["data"], schema)
    except Exception as exc:
        raise StageError("ingest", exc)

    attack_cfg = AttackConfig.from_json_dict(raw.get("attacks", {}))
    split = split_holdout(data, attack_cfg.member_fraction, stage_seed(seed, "compare-split"))

    rows: dict[str, dict] = {}
    files: dict[str, Path] = {}
    level5_target: CalibrationTarget | None = None
    calibrated_pia: dict[str, float] = {}

    for level in range(1, 7):
        merged = {**shared, **levels_cfg[str(level)], "level": level}
        try:
            config = PipelineConfig.from_dict(merged)
        except Exception as exc:
            raise StageError(f"level{level}-config", exc)
        level_seed = derive_seed(seed, f"compare-level{level}")
        timer = _StageTimer()
        try:
            artifacts = produce_level_output(level, split.members, config, level_seed)
            reports = run_attack_suite(
                artifacts.output, split.members, split.non_members, attack_cfg, level_seed
            )
            fid = fidelity(
                split.members.without_identifiers(),
                artifacts.output.without_identifiers(),
                config.fidelity_weights,
            )
        except Exception as exc:
            raise StageError(f"level{level}", exc)
        timer.mark(f"compare-level{level}")

        verdict = None
        achieved = level
        if level == 4:
            verdict = certify(reports, config.attacks.thresholds)
            achieved = 4 if verdict.passed else 3

        if level == 5:
            level5_target = fill_targets(config.calibration.target, split.members)
        if level in (5, 6) and level5_target is not None:
            errors = calibrated_stat_errors(split.members, artifacts.output, level5_target)
            calibrated_pia[f"level{level}"] = float(np.mean(list(errors.values())))

        by_attack = {r.attack: r for r in reports}
        pia = by_attack[PROPERTY_INFERENCE]
        row = {
            "level": level,
            "achieved_level": achieved,
            "mia_auc": by_attack[MIA].score,
            "aia_uplift": (
                by_attack[ATTRIBUTE_INFERENCE].uplift
                if ATTRIBUTE_INFERENCE in by_attack
                else None
            ),
            "pia_mean_error": pia.details["mean_error"],
            "fidelity_composite": fid.composite,
        }
        rows[str(level)] = row

        level_dir = out / f"level{level}"
        level_dir.mkdir(parents=True, exist_ok=True)
        write_csv(artifacts.output, level_dir / "output.csv")
        write_json(
            {
                "attacks": [r.to_json_dict() for r in reports],
                "verdict": verdict.to_json_dict() if verdict else None,
            },
            level_dir / "attack_reports.json",
        )
        files[f"level{level}_output"] = level_dir / "output.csv"
        files[f"level{level}_attacks"] = level_dir / "attack_reports.json"

    steps = []
    monotone = True
    for a, b in zip(MONOTONICITY_CHAIN, MONOTONICITY_CHAIN[1:]):
        delta = rows[str(b)]["mia_auc"] - rows[str(a)]["mia_auc"]
        within = delta <= MONOTONICITY_SLACK
        monotone = monotone and within
        steps.append({"from": a, "to": b, "auc_delta": delta, "within_slack": within})

    pia5 = calibrated_pia.get("level5")
    pia6 = calibrated_pia.get("level6")
    table = {
        "seed": seed,
        "config_hash": config_hash,
        "toolkit_version": __version__,
        "levels": rows,
        "mia_monotonicity": {
            "chain": list(MONOTONICITY_CHAIN),
            "slack": MONOTONICITY_SLACK,
            "steps": steps,
            "monotone_within_slack": monotone,
        },
        "pia_on_calibrated_statistics": {
            "level5": pia5,
            "level6": pia6,
            "level5_less_than_level6": (
                pia5 < pia6 if pia5 is not None and pia6 is not None else None
            ),
        },
    }

    write_json(table, out / "comparison.json")
    (out / "comparison.txt").write_text(_render_comparison(table), encoding="utf-8")
    files["comparison"] = out / "comparison.json"
    files["comparison_text"] = out / "comparison.txt"
    return CompareResult(table=table, out_dir=out, files=files)


def _render_comparison(table: Mapping) -> str:
    lines = [
        "privlevels level comparison",
        "=" * 29,
        f"seed:        {table['seed']}",
        f"config hash: {table['config_hash']}",
        "",
        f"{'level':<7}{'achieved':<10}{'MIA AUC':<10}{'AIA uplift':<12}"
        f"{'PIA error':<11}{'fidelity':<9}",
        "-" * 59,
    ]
    for level in range(1, 7):
        row = table["levels"][str(level)]
        aia = "-" if row["aia_uplift"] is None else f"{row['aia_uplift']:+.4f}"
        lines.append(
            f"{row['level']:<7}{row['achieved_level']:<10}{row['mia_auc']:<10.4f}"
            f"{aia:<12}{row['pia_mean_error']:<11.4f}{row['fidelity_composite']:<9.4f}"
        )
    mono = table["mia_monotonicity"]
    lines.append("")
    lines.append(
        f"MIA monotone across {mono['chain']} within +{mono['slack']}: "
        f"{mono['monotone_within_slack']}"
    )
    pia = table["pia_on_calibrated_statistics"]
    if pia["level5"] is not None and pia["level6"] is not None:
        lines.append(
            f"PIA on calibrated statistics: level5={pia['level5']:.4f} "
            f"level6={pia['level6']:.4f} (level5 < level6: {pia['level5_less_than_level6']})"
        )
    lines.append("")
    return "\n".join(lines)
