"""Command-line surface: ingest, run, audit, compare, report.

Exit codes: 0 on success, 1 on certification failure, 2 on error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .attacks import AttackReport
from .data import load_csv, load_schema, write_csv
from .pipeline import (
    AttackConfig,
    StageError,
    audit_synthetic,
    compare_levels,
    load_config,
    run_pipeline,
)
from .report import regulation_matrix, write_json
from .version import __version__


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="privlevels",
        description="Privacy-graded synthetic data: transform, attack, certify.",
    )
    parser.add_argument("--version", action="version", version=f"privlevels {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb, help_text in (
        ("ingest", "validate a CSV against its schema sidecar and write a normalized copy"),
        ("run", "run one privacy level end to end and emit a certification report"),
        ("audit", "attack an existing synthetic dataset and report scores"),
        ("compare", "run all six levels on one input and tabulate the metrics"),
        ("report", "render the text summary for a previous run's output directory"),
    ):
        p = sub.add_parser(verb, help=help_text)
        p.add_argument("--config", type=Path, help="JSON config file")
        p.add_argument("--seed", type=int, help="master seed (overrides config)")
        p.add_argument("--out", type=Path, help="output directory (overrides config)")
        p.add_argument(
            "--level", type=int, choices=range(1, 7), help="privacy level (overrides config)"
        )
    return parser


def _require_config(args) -> Path:
    if args.config is None:
        raise ValueError("--config is required for this verb")
    return args.config


def _cmd_ingest(args) -> int:
    config = _require_config(args)
    with config.open("r", encoding="utf-8") as fh:
        raw = json.load(fh)
    schema = load_schema(raw["schema"])
    data = load_csv(raw["data"], schema)
    out = Path(args.out) if args.out else Path(raw.get("output_dir", "."))
    out.mkdir(parents=True, exist_ok=True)
    write_csv(data, out / "ingested.csv")
    summary = {
        "rows": data.n_rows,
        "columns": [
            {"name": c.name, "kind": c.kind, "pii": c.pii} for c in data.schema
        ],
        "provenance": data.provenance,
    }
    write_json(summary, out / "ingested.summary.json")
    print(f"ingested {data.n_rows} rows x {data.n_columns} columns -> {out / 'ingested.csv'}")
    return 0


def _cmd_run(args) -> int:
    config = load_config(_require_config(args))
    result = run_pipeline(config, out_dir=args.out, seed=args.seed, level=args.level)
    print((result.out_dir / "summary.txt").read_text(encoding="utf-8"))
    return 1 if result.certification_failed else 0


def _cmd_audit(args) -> int:
    config_path = _require_config(args)
    with config_path.open("r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if "synthetic" not in raw:
        raise ValueError("audit config needs a 'synthetic' CSV path")
    schema = load_schema(raw["schema"])
    real = load_csv(raw["data"], schema)
    synthetic_schema = (
        load_schema(raw["synthetic_schema"]) if "synthetic_schema" in raw else schema
    )
    synthetic = load_csv(raw["synthetic"], synthetic_schema)
    holdout = None
    if "holdout" in raw:
        holdout = load_csv(raw["holdout"], schema)
    attack_cfg = AttackConfig.from_json_dict(raw.get("attacks", {}))
    seed = args.seed if args.seed is not None else int(raw.get("seed", 0))
    reports, verdict = audit_synthetic(real, synthetic, attack_cfg, seed, holdout=holdout)

    out = Path(args.out) if args.out else Path(raw.get("output_dir", "."))
    out.mkdir(parents=True, exist_ok=True)
    write_json(
        {
            "attacks": [r.to_json_dict() for r in reports],
            "verdict": verdict.to_json_dict() if verdict else None,
            "regulation_matrix": regulation_matrix(reports),
        },
        out / "attack_reports.json",
    )
    (out / "attacks.txt").write_text(_render_attacks(reports), encoding="utf-8")
    print(_render_attacks(reports))
    if verdict is not None and not verdict.passed:
        print(f"certification: FAIL ({', '.join(verdict.failing)})")
        return 1
    return 0


def _render_attacks(reports: list[AttackReport]) -> str:
    lines = [
        f"{'attack':<22}{'algorithm':<28}{'score':<10}{'baseline':<10}",
        "-" * 70,
    ]
    for r in reports:
        lines.append(f"{r.attack:<22}{r.algorithm:<28}{r.score:<10.4f}{r.baseline:<10.4f}")
    lines.append("")
    return "\n".join(lines)


def _cmd_compare(args) -> int:
    config_path = _require_config(args)
    with config_path.open("r", encoding="utf-8") as fh:
        raw = json.load(fh)
    out = args.out if args.out else raw.get("output_dir")
    if out is None:
        raise ValueError("no output directory: set output_dir in the config or pass --out")
    result = compare_levels(raw, out, seed=args.seed)
    print((result.out_dir / "comparison.txt").read_text(encoding="utf-8"))
    return 0


def _cmd_report(args) -> int:
    out = args.out
    if out is None and args.config is not None:
        with Path(args.config).open("r", encoding="utf-8") as fh:
            out = json.load(fh).get("output_dir")
    if out is None:
        raise ValueError("report needs --out (or a config with output_dir)")
    summary = Path(out) / "summary.txt"
    if not summary.exists():
        raise FileNotFoundError(f"no summary.txt under {out}; run a pipeline first")
    print(summary.read_text(encoding="utf-8"))
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "run": _cmd_run,
    "audit": _cmd_audit,
    "compare": _cmd_compare,
    "report": _cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.verb](args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
