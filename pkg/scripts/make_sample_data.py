#!/usr/bin/env python3
"""Generate the bundled sample dataset: three daily count series following
seeded logistic growth with noise, plus a few deliberate gaps and NA cells
so the ingest pipeline has something to impute.

Run from the repo root:  python scripts/make_sample_data.py
"""

from datetime import date, timedelta
from pathlib import Path

import numpy as np


def logistic_counts(rng, n, capacity, rate, midpoint, noise_frac):
    t = np.arange(n, dtype=float)
    curve = capacity / (1.0 + np.exp(-rate * (t - midpoint)))
    noisy = curve + rng.normal(0.0, noise_frac * capacity, size=n)
    return np.maximum(np.round(noisy), 0.0)


def main():
    rng = np.random.default_rng(20200322)
    n = 160
    start = date(2020, 3, 22)

    confirmed = logistic_counts(rng, n, capacity=52_000, rate=0.08, midpoint=75, noise_frac=0.01)
    recovered = logistic_counts(rng, n, capacity=47_000, rate=0.075, midpoint=90, noise_frac=0.01)
    deceased = logistic_counts(rng, n, capacity=2_400, rate=0.07, midpoint=80, noise_frac=0.01)

    # a couple of NA cells inside the series (never first/last row)
    na_cells = {(40, 1), (41, 1), (97, 3)}
    # one whole calendar day dropped, to exercise gap materialisation
    dropped_rows = {120}

    out = Path(__file__).resolve().parents[1] / "data" / "sample_daily_cases.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write("date,confirmed,recovered,deceased\n")
        for i in range(n):
            if i in dropped_rows:
                continue
            day = (start + timedelta(days=i)).isoformat()
            cells = []
            for col, series in ((1, confirmed), (2, recovered), (3, deceased)):
                cells.append("NA" if (i, col) in na_cells else str(int(series[i])))
            fh.write(",".join([day] + cells) + "\n")
    print(f"wrote {out} ({n - len(dropped_rows)} rows)")


if __name__ == "__main__":
    main()
