"""Shared brute-force oracles for the test suite.

Everything here is deliberately independent of the library implementation:
DAG enumeration, Markov-equivalence grouping, path-enumeration d-separation,
and the adjustment criterion checked path by path.
"""

import itertools

import numpy as np


def all_dags(d):
    """Enumerate every DAG on d labeled nodes as a boolean adjacency matrix."""
    pairs = [(i, j) for i in range(d) for j in range(d) if i != j]
    out = []
    for bits in itertools.product([0, 1], repeat=len(pairs)):
        A = np.zeros((d, d), dtype=bool)
        for (i, j), b in zip(pairs, bits):
            if b:
                A[i, j] = True
        if _acyclic(A):
            out.append(A)
    return out


def _acyclic(A):
    d = A.shape[0]
    indeg = A.sum(axis=0).astype(int)
    ready = [i for i in range(d) if indeg[i] == 0]
    seen = 0
    while ready:
        u = ready.pop()
        seen += 1
        for v in np.flatnonzero(A[u]):
            indeg[v] -= 1
            if indeg[v] == 0:
                ready.append(int(v))
    return seen == d


def vstructures(A):
    """Frozen set of v-structures (i, j, k) with i -> j <- k, i < k non-adjacent."""
    d = A.shape[0]
    out = set()
    for j in range(d):
        parents = np.flatnonzero(A[:, j])
        for i, k in itertools.combinations(parents, 2):
            if not (A[i, k] or A[k, i]):
                out.add((min(i, k), j, max(i, k)))
    return frozenset(out)


def skeleton_key(A):
    return tuple(map(tuple, (A | A.T).astype(int)))


def equivalence_classes(dags):
    """Group DAGs by (skeleton, v-structures), the Markov equivalence invariant."""
    classes = {}
    for A in dags:
        classes.setdefault((skeleton_key(A), vstructures(A)), []).append(A)
    return list(classes.values())


def consensus_cpdag(members):
    """CPDAG of a class by consensus: edges directed iff every member agrees."""
    d = members[0].shape[0]
    directed = np.zeros((d, d), dtype=bool)
    undirected = np.zeros((d, d), dtype=bool)
    skel = members[0] | members[0].T
    for i in range(d):
        for j in range(i + 1, d):
            if not skel[i, j]:
                continue
            fwd = any(A[i, j] for A in members)
            bwd = any(A[j, i] for A in members)
            if fwd and bwd:
                undirected[i, j] = undirected[j, i] = True
            elif fwd:
                directed[i, j] = True
            else:
                directed[j, i] = True
    return directed, undirected


# ---------------------------------------------------------------------------
# Path-enumeration d-separation and the adjustment criterion.
# ---------------------------------------------------------------------------

def simple_paths(A, x, y):
    """All simple paths x..y in the skeleton, as node tuples."""
    skel = A | A.T
    paths = []

    def walk(node, seen, path):
        if node == y:
            paths.append(tuple(path))
            return
        for nxt in np.flatnonzero(skel[node]):
            if nxt not in seen:
                walk(int(nxt), seen | {int(nxt)}, path + [int(nxt)])

    walk(x, {x}, [x])
    return paths


def descendants_of(A, node):
    """Proper descendants of node (directed reachability), excluding itself."""
    out = set()
    stack = list(np.flatnonzero(A[node]))
    while stack:
        v = int(stack.pop())
        if v not in out:
            out.add(v)
            stack.extend(np.flatnonzero(A[v]))
    return out


def path_blocked(A, path, Z):
    """Classical blocking rule applied to one skeleton path."""
    Z = set(Z)
    for idx in range(1, len(path) - 1):
        prev, v, nxt = path[idx - 1], path[idx], path[idx + 1]
        collider = A[prev, v] and A[nxt, v]
        if collider:
            opened = v in Z or (descendants_of(A, v) & Z)
            if not opened:
                return True
        elif v in Z:
            return True
    return False


def d_separated_bf(A, x, y, Z):
    return all(path_blocked(A, p, Z) for p in simple_paths(A, x, y))


def is_directed_path(A, path):
    return all(A[a, b] for a, b in zip(path, path[1:]))


def valid_adjustment_bf(A, i, j, Z):
    """Adjustment criterion, checked by exhaustive path enumeration."""
    Z = set(Z)
    if i in Z or j in Z:
        return False
    causal_nodes = set()
    for p in simple_paths(A, i, j):
        if is_directed_path(A, p):
            causal_nodes.update(p[1:])
    forbidden = set(causal_nodes)
    for w in causal_nodes:
        forbidden |= descendants_of(A, w)
    if Z & forbidden:
        return False
    for p in simple_paths(A, i, j):
        if not is_directed_path(A, p) and not path_blocked(A, p, Z):
            return False
    return True


def sid_bf(est, true):
    """Disrupted-pair count via the path-enumeration adjustment oracle."""
    d = est.shape[0]
    count = 0
    for i in range(d):
        pa = set(np.flatnonzero(est[:, i]).tolist())
        for j in range(d):
            if i == j:
                continue
            est_claims_effect = any(is_directed_path(est, p)
                                    for p in simple_paths(est, i, j))
            true_has_effect = any(is_directed_path(true, p)
                                  for p in simple_paths(true, i, j))
            if est_claims_effect:
                if not valid_adjustment_bf(true, i, j, pa):
                    count += 1
            elif true_has_effect:
                count += 1
    return count


def shd_bf(est, true):
    """Pairwise edit count: reversal is one operation."""
    d = est.shape[0]
    count = 0
    for i in range(d):
        for j in range(i + 1, d):
            a = (bool(est[i, j]), bool(est[j, i]))
            b = (bool(true[i, j]), bool(true[j, i]))
            if a != b:
                count += 1
    return count


def random_dag(d, rng, p=0.4):
    """Random DAG support through a random permutation of a triangular mask."""
    perm = rng.permutation(d)
    A = np.zeros((d, d), dtype=bool)
    for i in range(d):
        for j in range(i + 1, d):
            if rng.random() < p:
                A[perm[i], perm[j]] = True
    return A


def random_in_domain(d, s, rng, scale=0.9):
    """Random W with spectral radius of W*W safely below s."""
    W = rng.normal(size=(d, d))
    np.fill_diagonal(W, 0.0)
    rho = max(np.abs(np.linalg.eigvals(W * W)))
    if rho > 0:
        W *= np.sqrt(scale * s / rho)
    return W
