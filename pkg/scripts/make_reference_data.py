#!/usr/bin/env python3
"""Generate the repo's reference dataset (fixed seeded recipe) into data/."""

import argparse
from pathlib import Path

from privlevels.data import save_schema, write_csv
from privlevels.reference import DEFAULT_SEED, reference_dataset


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=2000)
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument("--out", type=Path, default=Path("data"))
    args = parser.parse_args()

    dataset = reference_dataset(n=args.rows, seed=args.seed)
    args.out.mkdir(parents=True, exist_ok=True)
    write_csv(dataset, args.out / "reference.csv")
    save_schema(dataset.schema, args.out / "reference.schema.json")
    print(f"wrote {dataset.n_rows} rows to {args.out / 'reference.csv'}")


if __name__ == "__main__":
    main()
