"""Independent oracles used across the test suite.

Everything here is deliberately written as brute force or straight-line
arithmetic, separate from the library's computation paths.
"""

import itertools
from collections import deque
from fractions import Fraction

import numpy as np

from hzsl.hierarchy import ranked_arc_weights


def exhaustive_path_distribution(hierarchy, terms, bias):
    """Enumerate all 2^N binary label configurations, keep the nesting-valid
    ones (exactly the root-to-node paths), and normalize exp(-energy)."""
    n = hierarchy.n
    path_sets = {frozenset(hierarchy.path(v)): v for v in range(n)}
    energies = np.full(n, np.nan)
    hits = 0
    for bits in itertools.product((0, 1), repeat=n):
        on = frozenset(i for i, b in enumerate(bits) if b)
        v = path_sets.get(on)
        if v is not None:
            hits += 1
            energies[v] = sum(terms[i] for i in on) + bias
    assert hits == n, "each node must contribute exactly one valid configuration"
    z = np.exp(-(energies - energies.min()))
    return z / z.sum()


def naive_path_energies(hierarchy, terms, bias):
    """Per-path energies by explicit summation over each stored path."""
    return np.array(
        [sum(terms[c] for c in hierarchy.path(v)) + bias for v in range(hierarchy.n)]
    )


def brute_force_arborescence(graph, root):
    """Try every parent assignment; return (child->parent map, exact total).

    Uses the same documented edge preference as the library (lexicographic
    (parent, child) bonus) so tie decisions are comparable.
    """
    weights = ranked_arc_weights(graph)
    nodes = sorted(graph.nodes)
    others = [v for v in nodes if v != root]
    options = {v: [] for v in others}
    for child, parent, _ in graph.edges():
        if child != root:
            options[child].append(parent)
    if any(not opts for opts in options.values()):
        return None, None

    best_total = None
    best_map = None
    for combo in itertools.product(*(options[v] for v in others)):
        parent_of = dict(zip(others, combo))
        # every node must reach the root without cycles
        ok = True
        for v in others:
            seen = set()
            u = v
            while u != root:
                if u in seen:
                    ok = False
                    break
                seen.add(u)
                u = parent_of[u]
            if not ok:
                break
        if not ok:
            continue
        total = None
        for child, parent in parent_of.items():
            w = weights[(child, parent)]
            total = w if total is None else total + w
        if best_total is None or best_total < total:
            best_total = total
            best_map = parent_of
    return best_map, best_total


def arborescence_weight(graph, hierarchy):
    """Exact total weight of a hierarchy's edges under the graph's weights."""
    weights = ranked_arc_weights(graph)
    total = None
    for v in hierarchy.order[1:]:
        v = int(v)
        child = hierarchy.labels[v]
        parent = hierarchy.labels[int(hierarchy.parent_ids[v])]
        w = weights[(child, parent)]
        total = w if total is None else total + w
    return total


def bfs_distance(hierarchy, a, b):
    """Shortest-path distance on the undirected tree by plain BFS."""
    if a == b:
        return 0
    adj = {v: list(hierarchy.children[v]) for v in range(hierarchy.n)}
    for v in range(hierarchy.n):
        p = hierarchy.parent(v)
        if p is not None:
            adj[v].append(p)
    dist = {a: 0}
    queue = deque([a])
    while queue:
        v = queue.popleft()
        for u in adj[v]:
            if u not in dist:
                dist[u] = dist[v] + 1
                if u == b:
                    return dist[u]
                queue.append(u)
    raise AssertionError("disconnected tree")


def nearest_centroid_accuracy(train_X, train_y, test_X, test_y):
    classes = sorted(set(train_y.tolist()))
    cents = np.stack([train_X[train_y == c].mean(axis=0) for c in classes])
    d = ((test_X[:, None, :] - cents[None, :, :]) ** 2).sum(-1)
    preds = np.array(classes)[d.argmin(axis=1)]
    return float((preds == test_y).mean())


def random_weighted_digraph(rng, max_nodes=5, integer_weights=False):
    """Random small digraph guaranteed to admit an arborescence from 'r'."""
    from hzsl.hierarchy import WeightedDigraph

    n = int(rng.integers(2, max_nodes + 1))
    labels = ["r"] + [f"v{i}" for i in range(1, n)]
    g = WeightedDigraph()
    for lab in labels:
        g.add_node(lab)

    def weight():
        if integer_weights:
            return float(rng.integers(1, 4))
        return float(rng.uniform(0.1, 5.0))

    # spanning skeleton: every non-root node gets an edge toward the root side
    for i in range(1, n):
        parent = labels[int(rng.integers(0, i))]
        g.add_edge(labels[i], parent, weight())
    # extra random edges (no self loops, nothing into the root as child)
    for child in labels[1:]:
        for parent in labels:
            if child != parent and rng.random() < 0.45:
                g.add_edge(child, parent, weight())
    return g
