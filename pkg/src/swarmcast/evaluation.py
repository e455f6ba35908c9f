"""Forecast-quality metrics and rank-based multi-method comparison.

Implements MAE, MSE and R-squared plus the Friedman chi-square test and
the Nemenyi critical-difference post hoc over a (tests x methods) loss
matrix. Lower scores are better everywhere; rank 1 is the best method on
a test, ties receive average ranks.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DataError, DegenerateVarianceError

# Studentized range over sqrt(2) at infinite degrees of freedom, the usual
# Nemenyi table for k = 2..10 methods.
NEMENYI_Q = {
    0.05: {2: 1.960, 3: 2.343, 4: 2.569, 5: 2.728, 6: 2.850, 7: 2.949,
           8: 3.031, 9: 3.102, 10: 3.164},
    0.10: {2: 1.645, 3: 2.052, 4: 2.291, 5: 2.459, 6: 2.589, 7: 2.693,
           8: 2.780, 9: 2.855, 10: 2.920},
}

# Chi-square upper quantiles keyed by significance level, for df = 1..9.
CHI2_CRITICAL = {
    0.05: {1: 3.841, 2: 5.991, 3: 7.815, 4: 9.488, 5: 11.070, 6: 12.592,
           7: 14.067, 8: 15.507, 9: 16.919},
    0.10: {1: 2.706, 2: 4.605, 3: 6.251, 4: 7.779, 5: 9.236, 6: 10.645,
           7: 12.017, 8: 13.362, 9: 14.684},
}


def _check_pair(predicted, actual):
    y = np.asarray(predicted, dtype=float)
    x = np.asarray(actual, dtype=float)
    if y.shape != x.shape:
        raise DataError(f"length mismatch: {y.shape} vs {x.shape}")
    if y.size == 0:
        raise DataError("empty input")
    return y, x


def mae(predicted, actual) -> float:
    """Mean absolute deviation between predictions and truth."""
    y, x = _check_pair(predicted, actual)
    return float(np.mean(np.abs(y - x)))


def mse(predicted, actual) -> float:
    """Mean squared deviation between predictions and truth."""
    y, x = _check_pair(predicted, actual)
    return float(np.mean((y - x) ** 2))


def r_squared(predicted, actual) -> float:
    """1 - SS_res / SS_tot about the actual mean; negative when worse than the mean."""
    y, x = _check_pair(predicted, actual)
    ss_tot = float(np.sum((x - x.mean()) ** 2))
    if ss_tot == 0.0:
        raise DegenerateVarianceError("actual series is constant")
    ss_res = float(np.sum((y - x) ** 2))
    return 1.0 - ss_res / ss_tot


@dataclass(frozen=True)
class MetricReport:
    mae: float
    mse: float
    r_squared: float
    n: int


def metric_report(predicted, actual) -> MetricReport:
    y, x = _check_pair(predicted, actual)
    return MetricReport(mae=mae(y, x), mse=mse(y, x), r_squared=r_squared(y, x), n=y.size)


@dataclass(frozen=True)
class RankMatrix:
    """Per-test ranks of k methods over N tests (losses, lower better)."""

    methods: tuple[str, ...]
    tests: tuple[str, ...]
    scores: np.ndarray
    ranks: np.ndarray

    @property
    def rank_sums(self) -> np.ndarray:
        return self.ranks.sum(axis=0)

    @property
    def average_ranks(self) -> np.ndarray:
        return self.ranks.mean(axis=0)


def _tie_average_ranks(row: np.ndarray) -> np.ndarray:
    """Ascending ranks 1..k with tied values sharing the average position."""
    order = np.argsort(row, kind="stable")
    ranks = np.empty(len(row), dtype=float)
    i = 0
    while i < len(row):
        j = i
        while j + 1 < len(row) and row[order[j + 1]] == row[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def rank_methods(scores, methods=None, tests=None) -> RankMatrix:
    """Rank methods per test row: rank 1 = lowest loss, ties averaged."""
    matrix = np.asarray(scores, dtype=float)
    if matrix.ndim != 2:
        raise DataError("scores must be a 2-d (tests x methods) matrix")
    n, k = matrix.shape
    if n < 1 or k < 2:
        raise DataError(f"need at least 1 test and 2 methods, got {n}x{k}")
    if np.isnan(matrix).any():
        raise DataError("scores contain NaN")
    method_names = tuple(methods) if methods else tuple(f"method_{i+1}" for i in range(k))
    test_names = tuple(tests) if tests else tuple(f"test_{i+1}" for i in range(n))
    if len(method_names) != k or len(test_names) != n:
        raise DataError("name lists do not match matrix shape")
    ranks = np.vstack([_tie_average_ranks(row) for row in matrix])
    return RankMatrix(methods=method_names, tests=test_names, scores=matrix, ranks=ranks)


@dataclass(frozen=True)
class FriedmanResult:
    statistic: float
    critical_value: float
    reject: bool
    alpha: float
    degrees_of_freedom: int


def friedman_statistic(rank_matrix: RankMatrix, alpha: float = 0.05) -> FriedmanResult:
    """Friedman chi-square over rank sums.

    statistic = 12 / (n k (k+1)) * sum_i R_i^2 - 3 n (k+1), with R_i the
    rank sum of method i over the n tests. The decision compares against
    the embedded chi-square quantile with k-1 degrees of freedom.
    """
    n, k = rank_matrix.ranks.shape
    if alpha not in CHI2_CRITICAL:
        raise DataError(f"alpha must be one of {sorted(CHI2_CRITICAL)}")
    df = k - 1
    if df not in CHI2_CRITICAL[alpha]:
        raise DataError(f"no chi-square quantile for {k} methods")
    rank_sums = rank_matrix.rank_sums
    statistic = 12.0 / (n * k * (k + 1)) * float(np.sum(rank_sums**2)) - 3.0 * n * (k + 1)
    critical = CHI2_CRITICAL[alpha][df]
    return FriedmanResult(
        statistic=statistic,
        critical_value=critical,
        reject=statistic > critical,
        alpha=alpha,
        degrees_of_freedom=df,
    )


def nemenyi_cd(k: int, n: int, alpha: float = 0.05, q: float | None = None) -> float:
    """Critical difference q_alpha * sqrt(k (k+1) / (6 N)).

    ``q`` overrides the embedded table, which covers k = 2..10 at
    alpha in {0.05, 0.10}.
    """
    if n < 1:
        raise DataError("need at least one test")
    if q is None:
        if alpha not in NEMENYI_Q:
            raise DataError(f"alpha must be one of {sorted(NEMENYI_Q)}")
        if k not in NEMENYI_Q[alpha]:
            raise DataError(f"no q value for k={k}; supply q explicitly")
        q = NEMENYI_Q[alpha][k]
    return float(q * np.sqrt(k * (k + 1) / (6.0 * n)))


@dataclass(frozen=True)
class ComparisonResult:
    methods: tuple[str, ...]
    average_ranks: np.ndarray
    friedman: FriedmanResult
    cd: float
    pairwise_significant: np.ndarray

    def to_dict(self) -> dict:
        return {
            "methods": list(self.methods),
            "average_ranks": [float(r) for r in self.average_ranks],
            "friedman_statistic": self.friedman.statistic,
            "critical_value": self.friedman.critical_value,
            "null_rejected": self.friedman.reject,
            "alpha": self.friedman.alpha,
            "degrees_of_freedom": self.friedman.degrees_of_freedom,
            "cd": self.cd,
            "pairwise_significant": self.pairwise_significant.tolist(),
        }


def compare_methods(
    scores, methods=None, tests=None, alpha: float = 0.05, q: float | None = None
) -> ComparisonResult:
    """Rank, test and post-hoc compare methods on a loss matrix.

    Pairwise flags are |avg_rank_i - avg_rank_j| > CD, reported only when
    the Friedman null is rejected (the post hoc is meaningless otherwise).
    """
    rm = rank_methods(scores, methods=methods, tests=tests)
    n, k = rm.ranks.shape
    fr = friedman_statistic(rm, alpha=alpha)
    cd = nemenyi_cd(k, n, alpha=alpha, q=q)
    avg = rm.average_ranks
    if fr.reject:
        diff = np.abs(avg[:, None] - avg[None, :])
        pairwise = diff > cd
        np.fill_diagonal(pairwise, False)
    else:
        pairwise = np.zeros((k, k), dtype=bool)
    return ComparisonResult(
        methods=rm.methods,
        average_ranks=avg,
        friedman=fr,
        cd=cd,
        pairwise_significant=pairwise,
    )


def parse_score_csv(path) -> tuple[list[str], list[str], np.ndarray]:
    """Read a score matrix: first column test name, one column per method.

    Returns (test names, method names, N x k matrix).
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader if row]
    if len(rows) < 2:
        raise DataError(f"{path}: need a header and at least one test row")
    header = rows[0]
    if len(header) < 3:
        raise DataError(f"{path}: need at least two method columns")
    methods = [h.strip() for h in header[1:]]
    tests, values = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DataError(f"{path}:{lineno}: expected {len(header)} cells")
        tests.append(row[0].strip())
        try:
            values.append([float(c) for c in row[1:]])
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: non-numeric score") from exc
    return tests, methods, np.asarray(values, dtype=float)
