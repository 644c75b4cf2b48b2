"""Fixed seeded recipe for the repo's reference dataset.

2,000 rows, six columns: three numeric (age, income, balance), two categorical
(region, segment), and one PII identifier (customer_id). Income depends on age,
balance on income, and segment on income, so the attribute-inference and
correlation metrics have real signal to find.
"""

from __future__ import annotations

import numpy as np

from .data import (
    CATEGORICAL,
    IDENTIFIER,
    NUMERIC_CONTINUOUS,
    NUMERIC_INTEGER,
    ColumnSpec,
    Dataset,
)
from .rng import generator

DEFAULT_SEED = 20240511

REGIONS = ("north", "south", "east", "west")
SEGMENTS = ("retail", "premium", "private")


def reference_schema() -> tuple[ColumnSpec, ...]:
    return (
        ColumnSpec("customer_id", IDENTIFIER, pii=True),
        ColumnSpec("age", NUMERIC_INTEGER, bounds=(18, 95)),
        ColumnSpec("income", NUMERIC_CONTINUOUS, bounds=(0.0, 500_000.0)),
        ColumnSpec("balance", NUMERIC_CONTINUOUS, bounds=(-50_000.0, 1_000_000.0)),
        ColumnSpec("region", CATEGORICAL, categories=REGIONS),
        ColumnSpec("segment", CATEGORICAL, categories=SEGMENTS),
    )


def reference_dataset(n: int = 2000, seed: int = DEFAULT_SEED) -> Dataset:
    rng = generator(seed, "reference-data")

    age = np.clip(np.rint(rng.normal(45.0, 14.0, n)), 18, 95).astype(np.int64)
    income = np.clip(
        np.exp(10.2 + 0.012 * (age - 45) + 0.55 * rng.standard_normal(n)),
        0.0,
        500_000.0,
    )
    balance = np.clip(
        0.9 * income + 25_000.0 * rng.standard_normal(n) - 5_000.0,
        -50_000.0,
        1_000_000.0,
    )
    region = rng.choice(len(REGIONS), size=n, p=[0.4, 0.25, 0.2, 0.15]).astype(np.int64)

    affinity = income + 15_000.0 * rng.standard_normal(n)
    segment = np.where(affinity < 24_000.0, 0, np.where(affinity < 50_000.0, 1, 2)).astype(
        np.int64
    )

    customer_id = np.asarray([f"CUST-{i:06d}" for i in range(n)], dtype=object)

    return Dataset(
        reference_schema(),
        (customer_id, age, income, balance, region, segment),
        np.arange(n, dtype=np.int64),
        provenance=f"reference(n={n},seed={seed})",
    )
