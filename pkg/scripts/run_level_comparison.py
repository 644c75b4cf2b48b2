#!/usr/bin/env python3
"""Multi-seed level comparison on the reference dataset.

Runs the shipped compare config over several seeds, averages the per-level
attack metrics, and checks that mean MIA AUC never rises by more than the
slack along the 1 -> 2 -> 3 -> 5 -> 6 chain (level 4 shares level 3's
generator and is certified rather than ranked).
"""

import argparse
import json
from pathlib import Path

import numpy as np

from privlevels.pipeline import MONOTONICITY_CHAIN, MONOTONICITY_SLACK, compare_levels


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", type=Path, default=Path("configs/reference_compare.json"))
    parser.add_argument("--seeds", type=int, default=10)
    parser.add_argument("--out", type=Path, default=Path("out/comparison"))
    args = parser.parse_args()

    with args.config.open("r", encoding="utf-8") as fh:
        config = json.load(fh)

    metrics = {k: {"mia_auc": [], "pia_mean_error": [], "fidelity_composite": []}
               for k in range(1, 7)}
    pia5, pia6 = [], []
    for seed in range(args.seeds):
        result = compare_levels(config, args.out / f"seed{seed}", seed=seed)
        for k in range(1, 7):
            row = result.table["levels"][str(k)]
            for key in metrics[k]:
                metrics[k][key].append(row[key])
        calibrated = result.table["pia_on_calibrated_statistics"]
        pia5.append(calibrated["level5"])
        pia6.append(calibrated["level6"])

    print(f"\nmeans over {args.seeds} seeds")
    print(f"{'level':<7}{'MIA AUC':<10}{'PIA error':<11}{'fidelity':<9}")
    for k in range(1, 7):
        m = metrics[k]
        print(f"{k:<7}{np.mean(m['mia_auc']):<10.4f}"
              f"{np.mean(m['pia_mean_error']):<11.4f}"
              f"{np.mean(m['fidelity_composite']):<9.4f}")

    means = {k: np.mean(metrics[k]["mia_auc"]) for k in range(1, 7)}
    ok = True
    for a, b in zip(MONOTONICITY_CHAIN, MONOTONICITY_CHAIN[1:]):
        delta = means[b] - means[a]
        within = delta <= MONOTONICITY_SLACK
        ok = ok and within
        print(f"MIA {a}->{b}: delta {delta:+.4f} (within +{MONOTONICITY_SLACK}: {within})")
    print(f"PIA on calibrated stats: level5 {np.mean(pia5):.4f} vs level6 {np.mean(pia6):.4f} "
          f"(level5 < level6: {np.mean(pia5) < np.mean(pia6)})")
    print(f"\nmonotonicity holds: {ok}")


if __name__ == "__main__":
    main()
