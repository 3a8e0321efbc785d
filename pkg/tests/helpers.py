"""Shared test oracles: truncated-series matrix exponential, finite differences, random DAGs."""

import numpy as np

from gaedag import acyclicity, model


def series_matexp(M, terms: int = 60) -> np.ndarray:
    """Truncated power-series oracle sum_k M^k / k!."""
    M = np.asarray(M, dtype=np.float64)
    out = np.eye(M.shape[0])
    term = np.eye(M.shape[0])
    for k in range(1, terms):
        term = term @ M / k
        out = out + term
    return out


def random_dag_weights(rng, d: int, p: float = 0.5, low: float = 0.3, high: float = 1.5) -> np.ndarray:
    """Random weighted DAG: permutation-conjugated upper-triangular pattern."""
    perm = rng.permutation(d)
    A = np.zeros((d, d))
    for a in range(d):
        for b in range(a + 1, d):
            if rng.random() < p:
                A[perm[a], perm[b]] = rng.uniform(low, high) * (1 if rng.random() < 0.5 else -1)
    return A


def lagrangian_value(params, X, lam, alpha, rho) -> float:
    """Objective evaluation used as the finite-difference target."""
    xhat, _ = model.forward(params, X)
    recon, l1 = model.loss_terms(X, xhat, params.A, lam)
    hv = acyclicity.h(params.A)
    return recon + l1 + alpha * hv + 0.5 * rho * hv * hv


def fd_check_gradients(params, X, lam, alpha, rho, eps: float = 1e-5,
                       fd_floor: float = 1e-8) -> float:
    """Worst relative error between analytic gradients and central differences."""
    xhat, cache = model.forward(params, X)
    grads = model.backward(params, X, cache, lam, alpha, rho)
    worst = 0.0
    for arr, g in zip(model.param_arrays(params), model.grad_arrays(grads)):
        it = np.nditer(arr, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = arr[idx]
            arr[idx] = orig + eps
            fp = lagrangian_value(params, X, lam, alpha, rho)
            arr[idx] = orig - eps
            fm = lagrangian_value(params, X, lam, alpha, rho)
            arr[idx] = orig
            fd = (fp - fm) / (2 * eps)
            if abs(fd) > fd_floor:
                worst = max(worst, abs(fd - g[idx]) / max(abs(fd), abs(g[idx])))
    return worst


def random_fd_instance(seed: int, d: int = 5, l: int = 2, l_latent: int = 2, n: int = 7):
    """Instance for gradient checks; |A| entries kept away from the l1 kink."""
    rng = np.random.default_rng(seed)
    params = model.init_params(d=d, l=l, l_latent=l_latent, hidden=16, layers=3, seed=seed + 5000)
    signs = np.sign(rng.normal(size=(d, d)))
    signs[signs == 0] = 1.0
    params.A = signs * rng.uniform(0.2, 0.9, size=(d, d))
    X = rng.normal(size=(n, d, l))
    return params, X
