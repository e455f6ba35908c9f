#!/usr/bin/env python3
"""End-to-end walkthrough on the bundled sample data.

Ingests data/sample_daily_cases.csv, tunes hyperparameters for the
confirmed-cases series at a small search budget, trains the winning
configuration, scores it on the held-out tail and forecasts a week
ahead. Everything lands under runs/demo/.

Run from the repo root:  python scripts/demo_pipeline.py
"""

import sys
from pathlib import Path

from swarmcast.cli import main

ROOT = Path(__file__).resolve().parents[1]
OUT = ROOT / "runs" / "demo"


def run(argv):
    print(f"\n$ swarmcast {' '.join(argv)}")
    code = main(argv)
    if code != 0:
        sys.exit(code)


def main_demo():
    data = ROOT / "data" / "sample_daily_cases.csv"
    ingest_dir = OUT / "ingest"
    tune_dir = OUT / "tune"
    train_dir = OUT / "train"

    run(["ingest", "--data", str(data), "--region", "sample",
         "--output-dir", str(ingest_dir)])
    run(["tune", "--data-dir", str(ingest_dir), "--variable", "confirmed",
         "--algorithm", "rs-gwo-woa", "--population", "5", "--iterations", "4",
         "--fitness-epochs", "10", "--seed", "7", "--output-dir", str(tune_dir)])
    run(["train", "--data-dir", str(ingest_dir), "--variable", "confirmed",
         "--from-tuning", str(tune_dir / "report.json"), "--epochs", "100",
         "--seed", "7", "--output-dir", str(train_dir)])
    run(["evaluate", "--model", str(train_dir / "model.json"),
         "--data-dir", str(ingest_dir), "--variable", "confirmed",
         "--output-dir", str(OUT / "evaluate")])
    run(["forecast", "--model", str(train_dir / "model.json"),
         "--data-dir", str(ingest_dir), "--variable", "confirmed",
         "--steps", "7", "--output-dir", str(OUT / "forecast")])
    print(f"\nall demo artifacts under {OUT}")


if __name__ == "__main__":
    main_demo()
