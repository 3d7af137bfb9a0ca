"""Measure render/extract round-trip fidelity and write the regression baseline.

    python3 scripts/roundtrip_baseline.py            # print only
    python3 scripts/roundtrip_baseline.py --write    # refresh tests/data/roundtrip_baseline.json
"""

import argparse
import dataclasses
import json
import time
from pathlib import Path

import numpy as np

from bezierglyph.roundtrip import RoundTripConfig, roundtrip_scores

BASELINE = Path(__file__).resolve().parents[1] / "tests" / "data" / "roundtrip_baseline.json"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=RoundTripConfig.seed)
    ap.add_argument("--count", type=int, default=RoundTripConfig.count)
    ap.add_argument("--write", action="store_true")
    args = ap.parse_args()

    cfg = RoundTripConfig(seed=args.seed, count=args.count)
    start = time.perf_counter()
    scores = np.array(roundtrip_scores(cfg))
    elapsed = time.perf_counter() - start
    print(f"n={len(scores)} mean={scores.mean():.4f} min={scores.min():.4f} "
          f"p10={np.percentile(scores, 10):.4f} time={elapsed:.1f}s")
    worst = np.argsort(scores)[:5]
    print("worst samples:", ", ".join(f"#{i}={scores[i]:.3f}" for i in worst))

    if args.write:
        record = {
            "config": dataclasses.asdict(cfg),
            "thresholds": {"mean": 0.75, "min": 0.60},
            # tolerated drop below the recorded observation before CI fails
            "regression_margin": {"mean": 0.02, "min": 0.05},
            "observed": {"mean": round(float(scores.mean()), 4), "min": round(float(scores.min()), 4)},
        }
        BASELINE.parent.mkdir(parents=True, exist_ok=True)
        BASELINE.write_text(json.dumps(record, indent=2) + "\n")
        print(f"wrote {BASELINE}")


if __name__ == "__main__":
    main()
