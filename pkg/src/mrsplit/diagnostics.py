"""Structural-independence analysis, rank estimation, rank-one distance,
Dirichlet energy, and executable verification suites for the linear-algebra
guarantees of split message passing.

Verification routines report failures instead of raising; a failed trial is
data, not an exception.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .convolution import IDENTITY, LEAKY_RELU
from .ensembles import molecule_like_graph, random_connected_dag
from .graph import Graph, longest_path_length
from .ordering import order_random
from .split import (
    RAW,
    ROW_MEAN,
    SYM_GCN,
    RelationOperator,
    dar_pair_from_dag,
    normalize,
    operator_for_graph,
    split_edges,
)

DEFAULT_RANK_TOL = 1e-8
ROW_ZERO_TOL = 1e-12


@dataclass(frozen=True)
class WeightedInDegreeMatrix:
    """n x l matrix whose row i stacks node i's weighted in-degrees."""

    matrix: np.ndarray

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def row(self, i: int) -> np.ndarray:
        return self.matrix[i]


def in_degree_matrix(ops: Sequence[RelationOperator]) -> WeightedInDegreeMatrix:
    """Exact per-relation row sums of the given operators."""
    sizes = {op.n for op in ops}
    if len(sizes) > 1:
        raise ValueError("operators must share the same node count")
    cols = [op.row_sums() for op in ops]
    return WeightedInDegreeMatrix(np.stack(cols, axis=1))


def numeric_rank(M: np.ndarray, rel_tol: float = DEFAULT_RANK_TOL) -> int:
    """Count of singular values above rel_tol * sigma_max (0 for the zero matrix)."""
    M = np.asarray(M, dtype=np.float64)
    if M.size == 0:
        return 0
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix must have finite entries")
    svals = np.linalg.svd(M, compute_uv=False)
    if svals.size == 0 or svals[0] == 0.0:
        return 0
    return int(np.sum(svals > rel_tol * svals[0]))


def exact_rank_small(M) -> int:
    """Exact rank of a small rational matrix via elimination over Fractions.

    Accepts ints, Fractions, and floats (floats are dyadic rationals, so the
    conversion is exact). Intended as an oracle for numeric_rank on
    integer-weighted instances; dims are capped at 32.
    """
    # Fraction keeps numpy scalars as-is, and int64 arithmetic wraps; unbox
    # them into arbitrary-precision Python numbers before elimination.
    rows = [
        [Fraction(x.item() if hasattr(x, "item") else x) for x in row]
        for row in M
    ]
    nr = len(rows)
    nc = len(rows[0]) if nr else 0
    if nr > 32 or nc > 32:
        raise ValueError("exact_rank_small is limited to 32x32 matrices")
    rank = 0
    col = 0
    while rank < nr and col < nc:
        pivot = next((r for r in range(rank, nr) if rows[r][col] != 0), None)
        if pivot is None:
            col += 1
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        pv = rows[rank][col]
        for r in range(rank + 1, nr):
            factor = rows[r][col] / pv
            if factor != 0:
                rows[r] = [a - factor * b for a, b in zip(rows[r], rows[rank])]
        rank += 1
        col += 1
    return rank


def structurally_independent(d_i, d_j, rel_tol: float = DEFAULT_RANK_TOL) -> bool:
    """True iff the two weighted in-degree vectors are linearly independent.

    A zero vector is dependent on everything. Symmetric in its arguments.
    """
    a = np.asarray(d_i, dtype=np.float64)
    b = np.asarray(d_j, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.size < 1:
        raise ValueError("expected two equal-length vectors")
    return numeric_rank(np.stack([a, b]), rel_tol) == 2


def rows_nonzero(X: np.ndarray, tol: float = ROW_ZERO_TOL) -> bool:
    """Row-wise nonzero predicate: every row has Euclidean norm above tol."""
    return bool(np.all(np.linalg.norm(np.asarray(X), axis=1) > tol))


def rod(X: np.ndarray) -> float:
    """Nuclear-norm distance of X (normalized) to its dominant rank-one part.

    The rank-one reference is u v^T with u the column and v the row of X of
    largest Euclidean norm (ties broken by lowest index). Zero iff X is
    effectively rank one; invariant under positive scaling of X.
    """
    X = np.asarray(X, dtype=np.float64)
    nuc = np.linalg.norm(X, ord="nuc")
    if nuc == 0.0:
        raise ValueError("rank-one distance is undefined for the zero matrix")
    u = X[:, int(np.argmax(np.linalg.norm(X, axis=0)))]
    v = X[int(np.argmax(np.linalg.norm(X, axis=1))), :]
    ref = np.outer(u, v)
    # u and v carry an arbitrary relative sign; orient the reference toward X
    # so exact rank-one inputs measure 0 rather than 2.
    if float(np.sum(X * ref)) < 0.0:
        ref = -ref
    ref_nuc = np.linalg.norm(u) * np.linalg.norm(v)
    return float(np.linalg.norm(X / nuc - ref / ref_nuc, ord="nuc"))


def dirichlet_energy(X: np.ndarray, g: Graph) -> float:
    """Sum over arcs (i, j) of ||x_i - x_j||^2."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape[0] != g.n:
        raise ValueError("feature rows must match graph node count")
    total = 0.0
    for src, dst, _w in g.edges:
        diff = X[src] - X[dst]
        total += float(diff @ diff)
    return total


@dataclass
class VerificationReport:
    """Outcome of one property suite: counts plus the worst observed margin."""

    theorem: str
    trials: int
    failures: int
    min_margin: float
    seed: int
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "trials": self.trials,
            "failures": self.failures,
            "min_margin": self.min_margin,
            "seed": self.seed,
            "passed": self.passed,
            "notes": self.notes,
        }


_SIGMAS = (IDENTITY, LEAKY_RELU)


def _trial_rng(seed: int, t: int) -> np.random.Generator:
    return np.random.default_rng([seed, t])


def verify_rank_theorem(
    ops: Sequence[RelationOperator],
    trials: int = 500,
    seed: int = 0,
    d: int = 8,
) -> VerificationReport:
    """Output rank of one split convolution is at least rank of the
    weighted in-degree matrix, for rank-one inputs and generic transforms."""
    E = in_degree_matrix(ops).matrix
    rank_e = numeric_rank(E)
    n = ops[0].n
    failures = 0
    min_margin = np.inf
    notes: list[str] = []
    for t in range(trials):
        rng = _trial_rng(seed, t)
        X = np.outer(rng.uniform(-1, 1, n), rng.uniform(-1, 1, d))
        weights = [rng.uniform(-1, 1, (d, d)) for _ in ops]
        pre = sum(op.matrix @ (X @ w) for op, w in zip(ops, weights))
        for sigma in _SIGMAS:
            margin = numeric_rank(sigma(pre)) - rank_e
            min_margin = min(min_margin, margin)
            if margin < 0:
                failures += 1
                notes.append(f"trial {t} ({sigma.kind}): rank deficit {margin}")
    return VerificationReport(
        theorem="rank_lower_bound",
        trials=trials,
        failures=failures,
        min_margin=float(min_margin) if trials else 0.0,
        seed=seed,
        notes=notes[:10],
    )


def verify_independence_theorem(
    ops: Sequence[RelationOperator],
    pair: tuple[int, int],
    trials: int = 500,
    seed: int = 0,
    d: int = 8,
) -> VerificationReport:
    """Structurally independent node pairs yield linearly independent output
    rows in every trial. Nothing is asserted for dependent pairs."""
    i, j = pair
    n = ops[0].n
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"pair {pair} out of range for n={n}")
    E = in_degree_matrix(ops)
    independent = structurally_independent(E.row(i), E.row(j))
    failures = 0
    min_margin = np.inf
    notes: list[str] = []
    if not independent:
        notes.append("pair is structurally dependent; no assertion made")
        min_margin = 0.0
    for t in range(trials):
        rng = _trial_rng(seed, t)
        X = np.outer(rng.uniform(-1, 1, n), rng.uniform(-1, 1, d))
        weights = [rng.uniform(-1, 1, (d, d)) for _ in ops]
        pre = sum(op.matrix @ (X @ w) for op, w in zip(ops, weights))
        for sigma in _SIGMAS:
            out = sigma(pre)
            pair_rank = numeric_rank(np.stack([out[i], out[j]]))
            if independent:
                margin = pair_rank - 2
                min_margin = min(min_margin, margin)
                if margin < 0:
                    failures += 1
                    notes.append(f"trial {t} ({sigma.kind}): pair rank {pair_rank}")
    return VerificationReport(
        theorem="independent_pair_rows",
        trials=trials,
        failures=failures,
        min_margin=float(min_margin) if np.isfinite(min_margin) else 0.0,
        seed=seed,
        notes=notes[:10],
    )


def verify_zero_convergence(
    trials: int = 100, seed: int = 0, d: int = 8
) -> VerificationReport:
    """Mean aggregation on a DAG without leaf self-loops drives every state
    to exactly zero after longest-path-length + 1 steps."""
    failures = 0
    min_margin = np.inf
    notes: list[str] = []
    for t in range(trials):
        rng = _trial_rng(seed, t)
        g = random_connected_dag(rng, int(rng.integers(5, 21)))
        op = operator_for_graph(g, ROW_MEAN)
        depth = longest_path_length(g) + 1
        X = rng.uniform(-1, 1, (g.n, d))
        for _ in range(depth):
            X = np.maximum(op.matrix @ (X @ rng.uniform(-1, 1, (d, d))), 0.0)
        peak = float(np.abs(X).max())
        min_margin = min(min_margin, -peak)
        if peak != 0.0:
            failures += 1
            notes.append(f"trial {t}: residual magnitude {peak}")
    return VerificationReport(
        theorem="dag_zero_convergence",
        trials=trials,
        failures=failures,
        min_margin=float(min_margin) if trials else 0.0,
        seed=seed,
        notes=notes[:10],
    )


def verify_dag_pair_rank(
    trials: int = 200, seed: int = 0, depth: int = 16, d: int = 8
) -> VerificationReport:
    """A DAG plus its reverse with distinct transforms keeps every row
    nonzero and rank above one at depth `depth`.

    States are rescaled to unit Frobenius norm between steps; the layer is
    positively homogeneous, so this only changes scale, never rank or
    row-wise nonzeroness.
    """
    failures = 0
    min_margin = np.inf
    notes: list[str] = []
    for t in range(trials):
        rng = _trial_rng(seed, t)
        g = random_connected_dag(rng, int(rng.integers(6, 25)))
        fwd, bwd = dar_pair_from_dag(g)
        for sigma in _SIGMAS:
            X = rng.uniform(-1, 1, (g.n, d))
            ok = True
            for _ in range(depth):
                w1 = rng.uniform(-1, 1, (d, d))
                w2 = rng.uniform(-1, 1, (d, d))
                X = sigma(fwd.matrix @ (X @ w1) + bwd.matrix @ (X @ w2))
                X = X / np.linalg.norm(X)
            row_min = float(np.linalg.norm(X, axis=1).min())
            rank = numeric_rank(X)
            min_margin = min(min_margin, rank - 2, row_min - ROW_ZERO_TOL)
            if row_min <= ROW_ZERO_TOL or rank < 2:
                ok = False
            if not ok:
                failures += 1
                notes.append(
                    f"trial {t} ({sigma.kind}): rank {rank}, min row {row_min:.2e}"
                )
    return VerificationReport(
        theorem="dag_pair_rank_preserved",
        trials=trials,
        failures=failures,
        min_margin=float(min_margin) if trials else 0.0,
        seed=seed,
        notes=notes[:10],
    )


def _ergodic_instance(idx: int) -> list[RelationOperator]:
    """Two cycle relations over n nodes, each mean-normalized row-wise."""
    n = 4 + idx
    step = 2 + (idx % max(1, n - 3))
    rel1 = Graph(
        n=n, edges=tuple(((i, (i + 1) % n, 1.0) for i in range(n)))
    )
    rel2 = Graph(
        n=n, edges=tuple(((i, (i + step) % n, 1.0) for i in range(n)))
    )
    return [operator_for_graph(rel1, ROW_MEAN), operator_for_graph(rel2, ROW_MEAN)]


def verify_ergodic_rank_one(instances: int = 20, seed: int = 0) -> VerificationReport:
    """Mean-normalized ergodic relation sets give a rank-one in-degree matrix,
    so no node pair is structurally independent."""
    failures = 0
    min_margin = np.inf
    notes: list[str] = []
    for idx in range(instances):
        ops = _ergodic_instance(idx)
        rank_e = numeric_rank(in_degree_matrix(ops).matrix)
        min_margin = min(min_margin, 1 - rank_e)
        if rank_e != 1:
            failures += 1
            notes.append(f"instance {idx}: rank(E)={rank_e}")
    return VerificationReport(
        theorem="ergodic_rank_one",
        trials=instances,
        failures=failures,
        min_margin=float(min_margin) if instances else 0.0,
        seed=seed,
        notes=notes[:10],
    )


def verify_dar_independent_pairs(
    trials: int = 100, seed: int = 0
) -> VerificationReport:
    """Two nonempty acyclic relations with different root sets always
    contain at least one structurally independent node pair (checked by
    exhaustive pair scan)."""
    failures = 0
    min_margin = np.inf
    notes: list[str] = []
    for t in range(trials):
        rng = _trial_rng(seed, t)
        g = molecule_like_graph(rng, 8, 24)
        scores = order_random(g.n, int(rng.integers(0, 2**63)))
        mrg = split_edges(g, scores)
        ops = [
            operator_for_graph(mrg.relation_graph(0), RAW),
            operator_for_graph(mrg.relation_graph(1), RAW),
        ]
        E = in_degree_matrix(ops)
        found = 0
        for i in range(g.n):
            for j in range(i + 1, g.n):
                if structurally_independent(E.row(i), E.row(j)):
                    found += 1
        min_margin = min(min_margin, found - 1)
        if found == 0:
            failures += 1
            notes.append(f"trial {t}: no structurally independent pair")
    return VerificationReport(
        theorem="dar_pair_independent_exists",
        trials=trials,
        failures=failures,
        min_margin=float(min_margin) if trials else 0.0,
        seed=seed,
        notes=notes[:10],
    )


def _random_split_ops(rng: np.random.Generator) -> list[RelationOperator]:
    g = molecule_like_graph(rng, 8, 30)
    scores = order_random(g.n, int(rng.integers(0, 2**63)))
    mrg = split_edges(g, scores)
    return normalize(mrg, SYM_GCN)


def verify_rank_theorem_random_splits(
    trials: int = 500, seed: int = 0, d: int = 8
) -> VerificationReport:
    """Rank lower bound over freshly sampled split graphs per trial."""
    failures = 0
    min_margin = np.inf
    notes: list[str] = []
    for t in range(trials):
        rng = _trial_rng(seed, t)
        ops = _random_split_ops(rng)
        n = ops[0].n
        rank_e = numeric_rank(in_degree_matrix(ops).matrix)
        X = np.outer(rng.uniform(-1, 1, n), rng.uniform(-1, 1, d))
        weights = [rng.uniform(-1, 1, (d, d)) for _ in ops]
        pre = sum(op.matrix @ (X @ w) for op, w in zip(ops, weights))
        for sigma in _SIGMAS:
            margin = numeric_rank(sigma(pre)) - rank_e
            min_margin = min(min_margin, margin)
            if margin < 0:
                failures += 1
                notes.append(f"trial {t} ({sigma.kind}): deficit {margin}")
    return VerificationReport(
        theorem="rank_lower_bound_random_splits",
        trials=trials,
        failures=failures,
        min_margin=float(min_margin) if trials else 0.0,
        seed=seed,
        notes=notes[:10],
    )


def _independent_pair_instance(
    rng: np.random.Generator,
) -> tuple[list[RelationOperator], tuple[int, int]]:
    """Two-relation graph where nodes 0 and 1 have linearly independent
    integer in-degree vectors fed by disjoint source nodes."""
    while True:
        a, b = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        c, e = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        if a * e - b * c != 0:
            break
    counts = [(a, b), (c, e)]
    edges1: list[tuple[int, int, float]] = []
    edges2: list[tuple[int, int, float]] = []
    nxt = 2
    for node, (k1, k2) in enumerate(counts):
        for _ in range(k1):
            edges1.append((nxt, node, 1.0))
            nxt += 1
        for _ in range(k2):
            edges2.append((nxt, node, 1.0))
            nxt += 1
    n = nxt
    ops = [
        operator_for_graph(Graph(n=n, edges=tuple(edges1)), RAW),
        operator_for_graph(Graph(n=n, edges=tuple(edges2)), RAW),
    ]
    return ops, (0, 1)


def verify_independence_on_constructions(
    trials: int = 500, seed: int = 0, d: int = 8
) -> VerificationReport:
    """Constructed structurally independent pairs always yield rank-2 output
    row pairs; one freshly built instance per trial."""
    failures = 0
    min_margin = np.inf
    notes: list[str] = []
    for t in range(trials):
        rng = _trial_rng(seed, t)
        ops, pair = _independent_pair_instance(rng)
        i, j = pair
        n = ops[0].n
        X = np.outer(rng.uniform(-1, 1, n), rng.uniform(-1, 1, d))
        weights = [rng.uniform(-1, 1, (d, d)) for _ in ops]
        pre = sum(op.matrix @ (X @ w) for op, w in zip(ops, weights))
        for sigma in _SIGMAS:
            out = sigma(pre)
            margin = numeric_rank(np.stack([out[i], out[j]])) - 2
            min_margin = min(min_margin, margin)
            if margin < 0:
                failures += 1
                notes.append(f"trial {t} ({sigma.kind}): deficit {margin}")
    return VerificationReport(
        theorem="constructed_independent_pairs",
        trials=trials,
        failures=failures,
        min_margin=float(min_margin) if trials else 0.0,
        seed=seed,
        notes=notes[:10],
    )


def run_full_suite(seed: int = 0, trials: int = 500) -> list[VerificationReport]:
    """All verification suites with a shared seed; trial counts scale with
    the requested budget."""
    small = max(trials // 5, 0)
    reports = [
        verify_rank_theorem_random_splits(trials=trials, seed=seed),
        verify_independence_on_constructions(trials=trials, seed=seed),
        verify_zero_convergence(trials=small, seed=seed),
        verify_dag_pair_rank(trials=max(small * 2, 0), seed=seed),
        verify_ergodic_rank_one(instances=20 if trials else 0, seed=seed),
        verify_dar_independent_pairs(trials=small, seed=seed),
    ]
    return reports
