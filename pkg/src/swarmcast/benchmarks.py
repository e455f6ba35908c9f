"""Standard continuous test functions for exercising the optimizers.

Each function takes a 1-d position vector and returns a scalar to
minimise; global minimum value is 0 in every case. ``BENCHMARKS`` maps
CLI names to (function, conventional symmetric bounds per dimension).
"""

import numpy as np


def sphere(x):
    """Sum of squares; minimum at the origin."""
    x = np.asarray(x, dtype=float)
    return float(np.sum(x * x))


def rastrigin(x):
    """Highly multimodal; minimum at the origin."""
    x = np.asarray(x, dtype=float)
    return float(10.0 * x.size + np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x)))


def rosenbrock(x):
    """Banana valley; minimum at (1, ..., 1)."""
    x = np.asarray(x, dtype=float)
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


def ackley(x):
    """Nearly flat outer region with a deep central well at the origin."""
    x = np.asarray(x, dtype=float)
    n = x.size
    return float(
        -20.0 * np.exp(-0.2 * np.sqrt(np.sum(x * x) / n))
        - np.exp(np.sum(np.cos(2.0 * np.pi * x)) / n)
        + 20.0
        + np.e
    )


BENCHMARKS = {
    "sphere": (sphere, (-5.12, 5.12)),
    "rastrigin": (rastrigin, (-5.12, 5.12)),
    "rosenbrock": (rosenbrock, (-5.0, 10.0)),
    "ackley": (ackley, (-32.768, 32.768)),
}
