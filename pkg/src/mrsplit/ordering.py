"""Per-node scalar scores inducing the strict partial ordering i < j iff r_i < r_j.

Score ties are deliberate: tied endpoints are incomparable and their edges
land in the remainder relation. No jitter is ever added.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .graph import Graph, in_degrees, out_degrees

_MASK64 = (1 << 64) - 1

PRECEDES = "precedes"
SUCCEEDS = "succeeds"
INCOMPARABLE = "incomparable"


@dataclass(frozen=True)
class OrderingScores:
    """Length-n score vector plus the method that produced it."""

    scores: tuple[float, ...]
    method: str
    seed: Optional[int] = None

    def __len__(self) -> int:
        return len(self.scores)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.scores, dtype=np.float64)


def _splitmix64(state: int) -> tuple[int, int]:
    """One step of the splitmix64 generator: (state, output).

    Kept explicit (rather than a library RNG) so score permutations can be
    reproduced byte-for-byte by any other implementation of splitmix64.
    """
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def order_random(n: int, seed: int) -> OrderingScores:
    """Seeded permutation of {0, ..., n-1} via Fisher-Yates over splitmix64.

    Scores are all distinct, deterministic given the seed, and intended to
    stay fixed across layers and epochs. The swap index is drawn by modulo
    reduction, which is uniform enough at these sizes and trivially portable.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    perm = list(range(n))
    state = seed & _MASK64
    for i in range(n - 1, 0, -1):
        state, value = _splitmix64(state)
        j = value % (i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    return OrderingScores(tuple(float(x) for x in perm), method="random", seed=seed)


def order_feature_sum(X: np.ndarray) -> OrderingScores:
    """r_i = sum of the feature row of node i."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("feature matrix must be 2-dimensional")
    return OrderingScores(tuple(float(s) for s in X.sum(axis=1)), method="features")


def order_ppr(g: Graph, alpha: float = 0.1, iters: int = 15) -> OrderingScores:
    """Personalized PageRank scores with a uniform restart vector.

    Runs `iters` steps of p <- alpha*u + (1-alpha)*P^T p starting from the
    uniform distribution u, where P is the row-stochastic out-transition
    matrix and dangling nodes redistribute uniformly.
    """
    if g.n == 0:
        raise ValueError("PPR requires at least one node")
    n = g.n
    u = np.full(n, 1.0 / n)
    outs = out_degrees(g).astype(np.float64)
    p = u.copy()
    srcs = np.array([e[0] for e in g.edges], dtype=np.int64)
    dsts = np.array([e[1] for e in g.edges], dtype=np.int64)
    dangling = outs == 0
    for _ in range(iters):
        nxt = np.zeros(n)
        if len(srcs):
            np.add.at(nxt, dsts, p[srcs] / outs[srcs])
        nxt += p[dangling].sum() / n
        p = alpha * u + (1.0 - alpha) * nxt
    return OrderingScores(tuple(float(x) for x in p), method="ppr")


def order_degree(g: Graph) -> OrderingScores:
    """r_i = node degree: in-degree for directed graphs, symmetric degree
    (in+out)/2 for undirected-expanded inputs (numerically identical there).
    """
    ins = in_degrees(g).astype(np.float64)
    if g.undirected:
        scores = (ins + out_degrees(g).astype(np.float64)) / 2.0
    else:
        scores = ins
    return OrderingScores(tuple(float(x) for x in scores), method="degree")


def compare(scores: OrderingScores, i: int, j: int) -> str:
    """Strict comparison under the induced partial order.

    Equal scores (including i == j) are incomparable.
    """
    r = scores.scores
    if not (0 <= i < len(r)) or not (0 <= j < len(r)):
        raise IndexError(f"node pair ({i}, {j}) out of range for n={len(r)}")
    if r[i] < r[j]:
        return PRECEDES
    if r[i] > r[j]:
        return SUCCEEDS
    return INCOMPARABLE
