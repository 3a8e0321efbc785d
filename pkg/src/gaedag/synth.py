"""Synthetic benchmarks: random DAGs and ancestral sampling from several SEMs.

All samplers draw the full noise matrix up front and then visit nodes in a
topological order, so any valid order yields the same data. The optional
``noise`` arguments exist as test hooks for noise-free functional checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SEM_KINDS = ("linear", "gim", "pnl", "vector")


@dataclass
class GraphSpec:
    d: int
    expected_degree: float = 3.0
    weight_low: float = 0.5
    weight_high: float = 2.0
    seed: int = 0

    def validate(self) -> None:
        problems = []
        if self.d < 2:
            problems.append(f"d must be >= 2 (got {self.d})")
        if not 0 < self.expected_degree < max(self.d, 1):
            problems.append(f"expected_degree must be in (0, d) (got {self.expected_degree})")
        if not 0 < self.weight_low <= self.weight_high:
            problems.append(f"need 0 < weight_low <= weight_high (got {self.weight_low}, {self.weight_high})")
        if problems:
            raise ValueError("invalid graph spec: " + "; ".join(problems))


@dataclass
class SemSpec:
    kind: str = "linear"
    l: int = 1
    noise_scale: float = 1.0

    def validate(self) -> None:
        problems = []
        if self.kind not in SEM_KINDS:
            problems.append(f"kind must be one of {SEM_KINDS} (got {self.kind!r})")
        if self.kind == "vector" and self.l < 2:
            problems.append(f"vector kind needs l >= 2 (got {self.l})")
        if self.kind != "vector" and self.l != 1:
            problems.append(f"kind {self.kind!r} is scalar-valued, so l must be 1 (got {self.l})")
        if self.noise_scale < 0:
            problems.append(f"noise_scale must be >= 0 (got {self.noise_scale})")
        if problems:
            raise ValueError("invalid SEM spec: " + "; ".join(problems))


@dataclass
class Dataset:
    X: np.ndarray  # (n, d, l)
    truth: np.ndarray  # (d, d) weighted adjacency of the generating DAG
    kind: str
    seed: int
    noise_scale: float = 1.0
    provenance: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def l(self) -> int:
        return self.X.shape[2]


def topological_order(A: np.ndarray) -> list[int]:
    """Kahn's algorithm on the support of A; raises on cycles."""
    d = A.shape[0]
    support = A != 0
    indeg = support.sum(axis=0)
    ready = [i for i in range(d) if indeg[i] == 0]
    order: list[int] = []
    while ready:
        i = ready.pop()
        order.append(i)
        for j in np.flatnonzero(support[i]):
            indeg[j] -= 1
            if indeg[j] == 0:
                ready.append(int(j))
    if len(order) != d:
        raise ValueError("adjacency contains a directed cycle; expected a DAG")
    return order


def random_dag(spec: GraphSpec) -> np.ndarray:
    """Erdos-Renyi DAG over a random node ordering, edge prob degree/(d-1).

    Weights have uniform magnitude in [weight_low, weight_high] and random sign.
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    d = spec.d
    p = spec.expected_degree / (d - 1)
    perm = rng.permutation(d)
    A = np.zeros((d, d))
    for a in range(d):
        for b in range(a + 1, d):
            if rng.random() < p:
                magnitude = rng.uniform(spec.weight_low, spec.weight_high)
                sign = 1.0 if rng.random() < 0.5 else -1.0
                A[perm[a], perm[b]] = sign * magnitude
    return A


def _noise_matrix(rng, n, d, noise_scale, noise):
    if noise is not None:
        Z = np.asarray(noise, dtype=np.float64)
        if Z.shape != (n, d):
            raise ValueError(f"noise must have shape {(n, d)}, got {Z.shape}")
        return Z
    return noise_scale * rng.standard_normal((n, d))


def _ancestral(A: np.ndarray, Z: np.ndarray, parent_term) -> np.ndarray:
    X = np.zeros_like(Z)
    for i in topological_order(A):
        parents = np.flatnonzero(A[:, i])
        X[:, i] = parent_term(X, parents, A[parents, i]) + Z[:, i]
    return X


def sample_linear(A, n: int, seed: int, noise_scale: float = 1.0, noise=None) -> Dataset:
    """Linear SEM X_i = sum_j A[j,i] X_j + Z_i with standard normal noise."""
    A = np.asarray(A, dtype=np.float64)
    rng = np.random.default_rng(seed)
    Z = _noise_matrix(rng, n, A.shape[0], noise_scale, noise)
    X = _ancestral(A, Z, lambda X, pa, w: X[:, pa] @ w)
    return Dataset(X[:, :, None], A, "linear", seed, noise_scale)


def sample_gim(A, n: int, seed: int, noise_scale: float = 1.0, noise=None) -> Dataset:
    """Generalized linear SEM X_i = sum_j A[j,i] cos(X_j + 1) + Z_i."""
    A = np.asarray(A, dtype=np.float64)
    rng = np.random.default_rng(seed)
    Z = _noise_matrix(rng, n, A.shape[0], noise_scale, noise)
    X = _ancestral(A, Z, lambda X, pa, w: np.cos(X[:, pa] + 1.0) @ w)
    return Dataset(X[:, :, None], A, "gim", seed, noise_scale)


def sample_pnl(A, n: int, seed: int, noise_scale: float = 1.0, noise=None) -> Dataset:
    """Post-nonlinear SEM: X_i = 2 sin(M_i) + M_i + Z_i, M_i = sum_j A[j,i] cos(X_j+1) + 0.5."""
    A = np.asarray(A, dtype=np.float64)
    rng = np.random.default_rng(seed)
    Z = _noise_matrix(rng, n, A.shape[0], noise_scale, noise)

    def term(X, pa, w):
        m = np.cos(X[:, pa] + 1.0) @ w + 0.5
        return 2.0 * np.sin(m) + m

    X = _ancestral(A, Z, term)
    return Dataset(X[:, :, None], A, "pnl", seed, noise_scale)


def sample_vector(A, n: int, l: int, seed: int, noise_scale: float = 1.0,
                  noise=None, u=None, v=None, base_noise=None) -> Dataset:
    """Vector-valued dataset: dimension k is u[k]*Xbase + v[k] + z[:,:,k].

    Xbase is a scalar draw from the cos-link SEM; u, v are drawn once per
    dataset from the standard normal, z fresh per sample and dimension.
    """
    if l < 2:
        raise ValueError(f"vector datasets need l >= 2, got {l}")
    A = np.asarray(A, dtype=np.float64)
    d = A.shape[0]
    rng = np.random.default_rng(seed)
    Z_base = _noise_matrix(rng, n, d, noise_scale, base_noise)
    Xbase = _ancestral(A, Z_base, lambda X, pa, w: np.cos(X[:, pa] + 1.0) @ w)
    u = rng.standard_normal(l) if u is None else np.asarray(u, dtype=np.float64)
    v = rng.standard_normal(l) if v is None else np.asarray(v, dtype=np.float64)
    if noise is None:
        z = noise_scale * rng.standard_normal((n, d, l))
    else:
        z = np.asarray(noise, dtype=np.float64)
        if z.shape != (n, d, l):
            raise ValueError(f"noise must have shape {(n, d, l)}, got {z.shape}")
    X = u[None, None, :] * Xbase[:, :, None] + v[None, None, :] + z
    provenance = {"base_kind": "gim", "u": u.tolist(), "v": v.tolist()}
    return Dataset(X, A, "vector", seed, noise_scale, provenance)


_SAMPLERS = {
    "linear": sample_linear,
    "gim": sample_gim,
    "pnl": sample_pnl,
}


def generate(graph: GraphSpec, sem: SemSpec, n: int, seed: int | None = None) -> Dataset:
    """Random DAG plus one sampled dataset; seed defaults to the graph seed."""
    graph.validate()
    sem.validate()
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    seed = graph.seed if seed is None else seed
    A = random_dag(graph)
    if sem.kind == "vector":
        ds = sample_vector(A, n, sem.l, seed, sem.noise_scale)
    else:
        ds = _SAMPLERS[sem.kind](A, n, seed, sem.noise_scale)
    ds.provenance.update(
        {
            "expected_degree": graph.expected_degree,
            "weight_low": graph.weight_low,
            "weight_high": graph.weight_high,
            "graph_seed": graph.seed,
        }
    )
    return ds
