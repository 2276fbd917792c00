"""Weighted digraphs, random DAG generation, and CPDAG conversion.

A graph is a dense d x d float matrix W with zero diagonal; W[i, j] is the
weight of the edge i -> j. Supports are the same matrices with 0/1 entries.
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GraphModelSpec",
    "Cpdag",
    "check_weights",
    "is_dag",
    "topological_order",
    "sample_er_dag",
    "sample_sf_dag",
    "assign_edge_weights",
    "cpdag_of",
    "save_adjacency_csv",
    "load_adjacency_csv",
]


@dataclass(frozen=True)
class GraphModelSpec:
    """Random graph ensemble: Erdos-Renyi ("ER") or scale-free ("SF").

    k is the target average nodal degree; weight_ranges is a list of disjoint
    closed intervals for uniform edge-weight sampling.
    """

    model: str
    d: int
    k: float
    weight_ranges: tuple = field(default=((0.5, 2.0), (-2.0, -0.5)))

    def __post_init__(self):
        if self.model not in ("ER", "SF"):
            raise ValueError(f"unknown graph model {self.model!r}")
        if self.d < 2:
            raise ValueError("d must be at least 2")
        if not (1 <= self.k < self.d):
            raise ValueError("need 1 <= k < d")


@dataclass(frozen=True)
class Cpdag:
    """Completed partially directed acyclic graph.

    directed[i, j] marks a compelled edge i -> j; undirected is a symmetric
    boolean matrix of reversible edges. The two supports are disjoint.
    """

    directed: np.ndarray
    undirected: np.ndarray

    @property
    def d(self) -> int:
        return self.directed.shape[0]

    def __eq__(self, other):
        return (
            isinstance(other, Cpdag)
            and np.array_equal(self.directed, other.directed)
            and np.array_equal(self.undirected, other.undirected)
        )


def check_weights(W: np.ndarray) -> np.ndarray:
    """Validate a weight matrix: square, finite, zero diagonal."""
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1] or W.shape[0] < 1:
        raise ValueError(f"expected square matrix, got shape {W.shape}")
    if not np.all(np.isfinite(W)):
        raise ValueError("weight matrix has non-finite entries")
    if np.any(np.diag(W) != 0):
        raise ValueError("weight matrix diagonal must be zero")
    return W


def _support(W: np.ndarray, tol: float = 0.0) -> np.ndarray:
    return np.abs(W) > tol


def topological_order(W: np.ndarray, tol: float = 0.0):
    """Kahn's algorithm on the thresholded support.

    Returns a list of node indices in topological order, or None if the
    support contains a directed cycle.
    """
    A = _support(np.asarray(W, dtype=float), tol)
    d = A.shape[0]
    indeg = A.sum(axis=0).astype(int)
    ready = [i for i in range(d) if indeg[i] == 0]
    order = []
    while ready:
        u = ready.pop()
        order.append(u)
        for v in np.flatnonzero(A[u]):
            indeg[v] -= 1
            if indeg[v] == 0:
                ready.append(int(v))
    return order if len(order) == d else None


def is_dag(W: np.ndarray, tol: float = 0.0) -> bool:
    """True iff the support {|W[i,j]| > tol} is acyclic."""
    return topological_order(W, tol) is not None


def sample_er_dag(spec: GraphModelSpec, rng: np.random.Generator) -> np.ndarray:
    """Sample an Erdos-Renyi DAG support with edge probability k/(d-1).

    An undirected G(d, p) graph is drawn, then oriented along a uniformly
    random node permutation (earlier -> later), which guarantees acyclicity.
    Expected edge count is d*k/2.
    """
    if spec.model != "ER":
        raise ValueError("spec.model must be 'ER'")
    d = spec.d
    p = spec.k / (d - 1)
    iu = np.triu_indices(d, k=1)
    present = rng.random(len(iu[0])) < p
    perm = rng.permutation(d)  # perm[i] = position of node i in the order
    B = np.zeros((d, d))
    pos = np.empty(d, dtype=int)
    pos[perm] = np.arange(d)
    for i, j, keep in zip(iu[0], iu[1], present):
        if not keep:
            continue
        if pos[i] < pos[j]:
            B[i, j] = 1.0
        else:
            B[j, i] = 1.0
    return B


def sample_sf_dag(spec: GraphModelSpec, rng: np.random.Generator) -> np.ndarray:
    """Sample a scale-free DAG support by preferential attachment.

    Each new node receives m = round(k/2) edges from existing nodes chosen
    proportionally to their current degree; orienting existing -> new makes
    the attachment order a topological order. Edge count is m*(d-m) exactly.
    """
    if spec.model != "SF":
        raise ValueError("spec.model must be 'SF'")
    d = spec.d
    m = int(np.clip(round(spec.k / 2), 1, d - 1))
    B = np.zeros((d, d))
    degree = np.zeros(d)
    for new in range(m, d):
        if degree[:new].sum() == 0:
            targets = np.arange(new)[:m]  # first attachment: all seed nodes
        else:
            targets = _weighted_distinct(np.arange(new), degree[:new], m, rng)
        for t in targets:
            B[t, new] = 1.0
            degree[t] += 1
            degree[new] += 1
    return B


def _weighted_distinct(candidates, weights, m, rng):
    """Draw m distinct candidates with probability proportional to weights."""
    chosen = []
    w = weights.astype(float).copy()
    for _ in range(min(m, len(candidates))):
        p = w / w.sum()
        idx = rng.choice(len(candidates), p=p)
        chosen.append(candidates[idx])
        w[idx] = 0.0
    return np.array(chosen)


def assign_edge_weights(support: np.ndarray, ranges, rng: np.random.Generator) -> np.ndarray:
    """Replace each nonzero support entry with a uniform draw over a union of intervals.

    An interval is picked with probability proportional to its length
    (degenerate [a, a] intervals get equal residual mass), then the weight is
    drawn uniformly within it. Zeros are preserved exactly.
    """
    ranges = [tuple(r) for r in ranges]
    if not ranges:
        raise ValueError("empty range list")
    for lo, hi in ranges:
        if hi < lo:
            raise ValueError(f"bad interval [{lo}, {hi}]")
    support = np.asarray(support, dtype=float)
    mask = support != 0
    n_edges = int(mask.sum())
    lengths = np.array([hi - lo for lo, hi in ranges], dtype=float)
    if lengths.sum() > 0:
        probs = lengths / lengths.sum()
    else:
        probs = np.full(len(ranges), 1.0 / len(ranges))
    which = rng.choice(len(ranges), size=n_edges, p=probs)
    draws = np.array([rng.uniform(*ranges[w]) for w in which])
    W = np.zeros_like(support)
    W[mask] = draws
    return W


# ---------------------------------------------------------------------------
# CPDAG of a DAG: skeleton + v-structures + Meek rules R1-R4.
# ---------------------------------------------------------------------------

def cpdag_of(W: np.ndarray) -> Cpdag:
    """Return the CPDAG of the Markov equivalence class of the DAG W.

    V-structure edges and Meek-compelled edges stay directed; the remaining
    skeleton edges become undirected.
    """
    B = _support(check_weights(W))
    if not is_dag(B):
        raise ValueError("input graph is not a DAG")
    d = B.shape[0]
    adj = B | B.T
    D = np.zeros((d, d), dtype=bool)  # compelled i -> j
    # v-structures: i -> j <- k with i, k non-adjacent
    for j in range(d):
        parents = np.flatnonzero(B[:, j])
        for a in range(len(parents)):
            for b in range(a + 1, len(parents)):
                i, k = parents[a], parents[b]
                if not adj[i, k]:
                    D[i, j] = True
                    D[k, j] = True
    U = adj & ~(D | D.T)
    D, U = _meek_closure(D, U)
    return Cpdag(directed=D, undirected=U)


def _meek_closure(D: np.ndarray, U: np.ndarray):
    """Apply Meek rules R1-R4 until no undirected edge can be oriented."""
    D = D.copy()
    U = U.copy()
    d = D.shape[0]
    adj = lambda a, b: D[a, b] or D[b, a] or U[a, b]  # noqa: E731

    def orient(a, b):
        D[a, b] = True
        U[a, b] = U[b, a] = False

    changed = True
    while changed:
        changed = False
        for a in range(d):
            for b in range(d):
                if not U[a, b]:
                    continue
                # R1: c -> a, a - b, c and b non-adjacent  =>  a -> b
                if any(D[c, a] and not adj(c, b) for c in range(d)):
                    orient(a, b)
                    changed = True
                    continue
                # R2: a -> c -> b and a - b  =>  a -> b
                if any(D[a, c] and D[c, b] for c in range(d)):
                    orient(a, b)
                    changed = True
                    continue
                # R3: a - c, a - e, c -> b, e -> b, c and e non-adjacent  =>  a -> b
                if _rule3(D, U, adj, a, b, d):
                    orient(a, b)
                    changed = True
                    continue
                # R4: u -> v -> b with a - u and a - v  =>  a -> b
                if _rule4(D, U, adj, a, b, d):
                    orient(a, b)
                    changed = True
    return D, U


def _rule3(D, U, adj, a, b, d):
    cands = [c for c in range(d) if U[a, c] and D[c, b]]
    for i in range(len(cands)):
        for j in range(i + 1, len(cands)):
            if not adj(cands[i], cands[j]):
                return True
    return False


def _rule4(D, U, adj, a, b, d):
    for u in range(d):
        if not U[a, u]:
            continue
        for v in range(d):
            if D[u, v] and D[v, b] and U[a, v]:
                return True
    return False


# ---------------------------------------------------------------------------
# Adjacency CSV: d rows x d columns, row i = outgoing weights of node i.
# ---------------------------------------------------------------------------

def save_adjacency_csv(W: np.ndarray, path) -> None:
    W = check_weights(W)
    np.savetxt(path, W, delimiter=",", fmt="%.17g")


def load_adjacency_csv(path) -> np.ndarray:
    W = np.loadtxt(path, delimiter=",", ndmin=2)
    return check_weights(W)
