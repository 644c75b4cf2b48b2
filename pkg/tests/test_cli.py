import json

import pytest

from privlevels.cli import main
from privlevels.data import save_schema, write_csv
from privlevels.reference import reference_dataset


@pytest.fixture(scope="module")
def cli_paths(tmp_path_factory):
    root = tmp_path_factory.mktemp("clidata")
    ds = reference_dataset(n=300, seed=6)
    write_csv(ds, root / "d.csv")
    save_schema(ds.schema, root / "d.schema.json")
    return {"data": str(root / "d.csv"), "schema": str(root / "d.schema.json")}


def _write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def test_ingest(cli_paths, tmp_path, capsys):
    config = _write_config(tmp_path, {**cli_paths})
    assert main(["ingest", "--config", config, "--out", str(tmp_path / "out")]) == 0
    assert (tmp_path / "out" / "ingested.csv").exists()
    assert (tmp_path / "out" / "ingested.summary.json").exists()
    assert "300 rows" in capsys.readouterr().out


def test_run_level1_exit_zero(cli_paths, tmp_path, capsys):
    config = _write_config(
        tmp_path,
        {**cli_paths, "level": 1, "seed": 2, "obscure": {"customer_id": {"action": "drop"}}},
    )
    code = main(["run", "--config", config, "--out", str(tmp_path / "out")])
    assert code == 0
    out = capsys.readouterr().out
    assert "achieved level:  1" in out
    assert (tmp_path / "out" / "certification_report.json").exists()


def test_run_level_override_flag(cli_paths, tmp_path):
    # Config says level 1; --level 2 must fail because the noise section is absent.
    config = _write_config(
        tmp_path,
        {**cli_paths, "level": 1, "seed": 2, "obscure": {"customer_id": {"action": "drop"}}},
    )
    assert main(["run", "--config", config, "--out", str(tmp_path / "o"), "--level", "2"]) == 2


def test_run_certification_failure_exit_one(cli_paths, tmp_path):
    config = _write_config(
        tmp_path,
        {
            **cli_paths,
            "level": 4,
            "seed": 2,
            "generator": {"kind": "copula"},
            "attacks": {
                "member_fraction": 0.5,
                "thresholds": {"max_mia_auc": 0.0, "required": ["MIA"]},
            },
        },
    )
    assert main(["run", "--config", config, "--out", str(tmp_path / "out")]) == 1


def test_report_renders_summary(cli_paths, tmp_path, capsys):
    config = _write_config(
        tmp_path,
        {**cli_paths, "level": 1, "seed": 2, "obscure": {"customer_id": {"action": "drop"}}},
    )
    main(["run", "--config", config, "--out", str(tmp_path / "out")])
    capsys.readouterr()
    assert main(["report", "--out", str(tmp_path / "out")]) == 0
    assert "certification report" in capsys.readouterr().out


def test_audit_external_synthetic(cli_paths, tmp_path, capsys):
    run_config = _write_config(
        tmp_path,
        {**cli_paths, "level": 3, "seed": 2, "generator": {"kind": "copula"}},
        name="run.json",
    )
    main(["run", "--config", run_config, "--out", str(tmp_path / "gen")])
    capsys.readouterr()
    audit_config = _write_config(
        tmp_path,
        {
            **cli_paths,
            "seed": 3,
            "synthetic": str(tmp_path / "gen" / "output.csv"),
            "synthetic_schema": str(tmp_path / "gen" / "output.schema.json"),
            "attacks": {"member_fraction": 0.5, "quasi_ids": ["age", "income"],
                        "secret": "segment", "k": 3},
        },
        name="audit.json",
    )
    assert main(["audit", "--config", audit_config, "--out", str(tmp_path / "audit")]) == 0
    payload = json.loads((tmp_path / "audit" / "attack_reports.json").read_text())
    assert {r["attack"] for r in payload["attacks"]} == {
        "MIA",
        "AttributeInference",
        "PropertyInference",
    }
    assert len(payload["regulation_matrix"]) == 4


def test_compare_and_errors(cli_paths, tmp_path, compare_config, capsys):
    config = dict(compare_config)
    config.update(cli_paths)
    path = _write_config(tmp_path, config, name="compare.json")
    assert main(["compare", "--config", path, "--out", str(tmp_path / "cmp"), "--seed", "1"]) == 0
    assert (tmp_path / "cmp" / "comparison.json").exists()
    capsys.readouterr()

    assert main(["run", "--config", str(tmp_path / "missing.json")]) == 2
    bad = _write_config(tmp_path, {"level": 1}, name="bad.json")
    assert main(["run", "--config", bad]) == 2
