import json
from pathlib import Path

import numpy as np
import pytest

from privlevels.data import (
    CATEGORICAL,
    IDENTIFIER,
    NUMERIC_CONTINUOUS,
    NUMERIC_INTEGER,
    ColumnSpec,
    Dataset,
    save_schema,
    write_csv,
)
from privlevels.reference import reference_dataset
from privlevels.rng import generator

REPO_ROOT = Path(__file__).resolve().parents[1]
CONFIG_DIR = REPO_ROOT / "configs"
GOLDEN_DIR = Path(__file__).resolve().parent / "golden"


@pytest.fixture(scope="session")
def reference():
    return reference_dataset()


@pytest.fixture(scope="session")
def reference_paths(tmp_path_factory):
    """Reference CSV + schema sidecar on disk, for pipeline and CLI tests."""
    root = tmp_path_factory.mktemp("refdata")
    dataset = reference_dataset()
    write_csv(dataset, root / "reference.csv")
    save_schema(dataset.schema, root / "reference.schema.json")
    return {"data": str(root / "reference.csv"), "schema": str(root / "reference.schema.json")}


def load_level_config(level: int, reference_paths: dict) -> dict:
    name = f"reference_level{level}.json"
    config = json.loads((CONFIG_DIR / name).read_text(encoding="utf-8"))
    config["data"] = reference_paths["data"]
    config["schema"] = reference_paths["schema"]
    return config


@pytest.fixture(scope="session")
def compare_config(reference_paths):
    config = json.loads(
        (CONFIG_DIR / "reference_compare.json").read_text(encoding="utf-8")
    )
    config["data"] = reference_paths["data"]
    config["schema"] = reference_paths["schema"]
    return config


def mixed_schema() -> tuple[ColumnSpec, ...]:
    return (
        ColumnSpec("x", NUMERIC_CONTINUOUS, bounds=(-100.0, 100.0)),
        ColumnSpec("count", NUMERIC_INTEGER, bounds=(0, 50)),
        ColumnSpec("color", CATEGORICAL, categories=("red", "green", "blue")),
    )


def mixed_dataset(n: int = 60, seed: int = 0) -> Dataset:
    rng = generator(seed, "test-mixed")
    return Dataset.from_values(
        mixed_schema(),
        {
            "x": np.clip(rng.normal(0.0, 20.0, n), -100.0, 100.0),
            "count": rng.integers(0, 51, n),
            "color": rng.integers(0, 3, n),
        },
        provenance="test",
    )


def pii_schema() -> tuple[ColumnSpec, ...]:
    return (
        ColumnSpec("ssn", IDENTIFIER, pii=True),
        ColumnSpec("score", NUMERIC_CONTINUOUS, bounds=(0.0, 1.0)),
        ColumnSpec("group", CATEGORICAL, categories=("a", "b")),
    )


def pii_dataset(n: int = 20, seed: int = 1) -> Dataset:
    rng = generator(seed, "test-pii")
    return Dataset.from_values(
        pii_schema(),
        {
            "ssn": [f"{100 + i:03d}-{i % 100:02d}-{1000 + i:04d}" for i in range(n)],
            "score": rng.random(n),
            "group": rng.integers(0, 2, n),
        },
        provenance="test",
    )
