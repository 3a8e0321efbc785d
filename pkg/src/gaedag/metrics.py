"""Post-processing to binary DAGs and structural recovery metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class BinaryGraph:
    edges: np.ndarray  # (d, d) bool, no self-loops after post-processing
    repairs: int = 0  # cycle-breaking removals applied during thresholding

    @property
    def d(self) -> int:
        return self.edges.shape[0]

    def edge_count(self) -> int:
        return int(self.edges.sum())


@dataclass
class GraphMetrics:
    shd: int
    tpr: float
    extra: int
    missing: int
    reversed: int
    wall_time_seconds: float = 0.0


def _as_edges(G) -> np.ndarray:
    if isinstance(G, BinaryGraph):
        return G.edges
    E = np.asarray(G)
    if E.ndim != 2 or E.shape[0] != E.shape[1]:
        raise ValueError(f"expected a square adjacency, got shape {E.shape}")
    return E != 0


def is_dag(G) -> bool:
    """Depth-first search for directed cycles (white/grey/black colouring)."""
    edges = _as_edges(G)
    d = edges.shape[0]
    color = np.zeros(d, dtype=np.int8)  # 0 unvisited, 1 on stack, 2 done
    adj = [list(np.flatnonzero(edges[i])) for i in range(d)]
    for root in range(d):
        if color[root] != 0:
            continue
        stack = [(root, iter(adj[root]))]
        color[root] = 1
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if color[nxt] == 1:
                    return False
                if color[nxt] == 0:
                    color[nxt] = 1
                    stack.append((nxt, iter(adj[nxt])))
                    advanced = True
                    break
            if not advanced:
                color[node] = 2
                stack.pop()
    return True


def _find_cycle(edges: np.ndarray) -> list[tuple[int, int]] | None:
    """One directed cycle as a list of edges, or None if acyclic."""
    d = edges.shape[0]
    color = np.zeros(d, dtype=np.int8)
    adj = [list(np.flatnonzero(edges[i])) for i in range(d)]
    for root in range(d):
        if color[root] != 0:
            continue
        path = [root]
        stack = [iter(adj[root])]
        color[root] = 1
        while stack:
            advanced = False
            for nxt in stack[-1]:
                if color[nxt] == 1:
                    cycle_nodes = path[path.index(nxt):] + [nxt]
                    return list(zip(cycle_nodes[:-1], cycle_nodes[1:]))
                if color[nxt] == 0:
                    color[nxt] = 1
                    path.append(nxt)
                    stack.append(iter(adj[nxt]))
                    advanced = True
                    break
            if not advanced:
                color[path.pop()] = 2
                stack.pop()
    return None


def threshold(A, tau: float) -> BinaryGraph:
    """Binarize by |A| > tau (self-loops dropped), then break any remaining cycles.

    The repair loop removes the smallest-|weight| edge on a found cycle until
    the graph is acyclic; the number of removals is recorded on the result.
    """
    if tau < 0:
        raise ValueError(f"threshold must be >= 0, got {tau}")
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square adjacency, got shape {A.shape}")
    edges = np.abs(A) > tau
    np.fill_diagonal(edges, False)
    repairs = 0
    while (cycle := _find_cycle(edges)) is not None:
        i, j = min(cycle, key=lambda e: abs(A[e[0], e[1]]))
        edges[i, j] = False
        repairs += 1
    return BinaryGraph(edges, repairs)


def _pair_counts(pred, truth) -> tuple[int, int, int, int, int]:
    """(true_positive, reversed, extra, missing, true_edges) over unordered pairs."""
    P = _as_edges(pred)
    T = _as_edges(truth)
    if P.shape != T.shape:
        raise ValueError(f"graph size mismatch: {P.shape} vs {T.shape}")
    tp = int(np.sum(P & T))
    rev = int(np.sum(P & T.T & ~T))
    extra = int(np.sum(P & ~T & ~T.T))
    missing = int(np.sum(T & ~P & ~P.T))
    return tp, rev, extra, missing, int(T.sum())


def shd(pred, truth) -> GraphMetrics:
    """Structural Hamming distance; a reversed edge counts once.

    tpr is filled in when the truth has edges and is NaN otherwise (use tpr()
    for the strict contract).
    """
    tp, rev, extra, missing, n_true = _pair_counts(pred, truth)
    rate = tp / n_true if n_true > 0 else float("nan")
    return GraphMetrics(shd=extra + missing + rev, tpr=rate, extra=extra, missing=missing, reversed=rev)


def tpr(pred, truth) -> float:
    """Correctly directed predicted edges over the number of true edges."""
    tp, _, _, _, n_true = _pair_counts(pred, truth)
    if n_true == 0:
        raise ValueError("tpr is undefined for an empty truth graph")
    return tp / n_true


@dataclass
class MetricsSummary:
    n_runs: int
    shd_mean: float
    shd_std: float
    tpr_mean: float
    tpr_std: float
    wall_time_mean: float
    wall_time_std: float


def aggregate(runs: list[GraphMetrics]) -> MetricsSummary:
    """Mean and sample standard deviation across runs; a single run has std 0."""
    if not runs:
        raise ValueError("aggregate needs at least one run")

    def stats(values):
        arr = np.asarray(values, dtype=np.float64)
        std = float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0
        return float(arr.mean()), std

    shd_mean, shd_std = stats([r.shd for r in runs])
    tpr_mean, tpr_std = stats([r.tpr for r in runs])
    wt_mean, wt_std = stats([r.wall_time_seconds for r in runs])
    return MetricsSummary(len(runs), shd_mean, shd_std, tpr_mean, tpr_std, wt_mean, wt_std)
