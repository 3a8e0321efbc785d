"""Smooth acyclicity penalty h(A) = trace(exp(A*A)) - d and its analytic gradient.

h vanishes exactly when the support of A is a DAG, because the (i,i) entry of
exp(A*A) sums weighted closed walks through node i and A*A is entrywise
non-negative.
"""

from __future__ import annotations

import numpy as np

from .linalg import as_matrix, matexp


def _check_adjacency(A) -> np.ndarray:
    A = as_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"adjacency must be square, got shape {A.shape}")
    if not np.isfinite(A).all():
        raise ValueError("adjacency has non-finite entries")
    return A


def h_and_grad(A) -> tuple[float, np.ndarray]:
    """Penalty value and gradient in one matrix exponential."""
    A = _check_adjacency(A)
    E = matexp(A * A)
    value = float(np.trace(E)) - A.shape[0]
    return value, E.T * (2.0 * A)


def h(A) -> float:
    """Acyclicity penalty; >= 0 up to rounding, 0 iff the nonzero pattern is acyclic."""
    A = _check_adjacency(A)
    return float(np.trace(matexp(A * A))) - A.shape[0]


def grad_h(A) -> np.ndarray:
    """Gradient of h: exp(A*A)^T (hadamard) 2A."""
    return h_and_grad(A)[1]


def clamp_reported(value: float) -> float:
    """Zero out tiny negative rounding noise for reporting; raw values stay in use internally."""
    if -1e-12 < value < 0.0:
        return 0.0
    return value
