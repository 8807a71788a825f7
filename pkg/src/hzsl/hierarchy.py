"""Rooted label trees and their construction from general "is-a" graphs.

A :class:`LabelHierarchy` is an immutable tree over dense integer node ids
with the universal category at depth 0. Construction either validates an
explicit child/parent edge list or solves for the maximum-weight spanning
arborescence of a :class:`WeightedDigraph` (after optionally pruning leaves
that are not in a support set).
"""

from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import errors

FORMAT_LINE = "# format: hierarchy-edges v1"


def _read_edge_rows(path):
    """Yield (child, parent, weight, lineno) from a tab-separated edge file."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) not in (2, 3):
                raise errors.ParseError(
                    path, lineno, f"expected child<TAB>parent[<TAB>weight], got {line!r}"
                )
            child, parent = parts[0], parts[1]
            if not child or not parent:
                raise errors.ParseError(path, lineno, "empty label")
            weight = 1.0
            if len(parts) == 3:
                try:
                    weight = float(parts[2])
                except ValueError:
                    raise errors.ParseError(path, lineno, f"bad weight {parts[2]!r}")
            rows.append((child, parent, weight, lineno))
    return rows


class LabelHierarchy:
    """Immutable rooted tree over labels with level/ancestor/path queries.

    Node ids are dense integers assigned in sorted-label order. The root has
    depth 0 and parent id -1. All queries are read-only and safe for
    concurrent use.
    """

    def __init__(self, labels, parent_ids):
        self.labels = tuple(labels)
        self.n = len(self.labels)
        if self.n == 0:
            raise ValueError("hierarchy must contain at least one node")
        if len(set(self.labels)) != self.n:
            raise ValueError("duplicate labels")
        self.index = {lab: i for i, lab in enumerate(self.labels)}
        self.parent_ids = np.ascontiguousarray(parent_ids, dtype=np.int64)
        if self.parent_ids.shape != (self.n,):
            raise ValueError("parent array shape mismatch")

        roots = np.flatnonzero(self.parent_ids < 0)
        if roots.size == 0:
            raise errors.CycleDetected(self._witness_cycle())
        if roots.size > 1:
            raise errors.MultipleRoots([self.labels[r] for r in roots])
        self.root = int(roots[0])

        self.children = [[] for _ in range(self.n)]
        for v in range(self.n):
            p = int(self.parent_ids[v])
            if v == self.root:
                continue
            if p < 0 or p >= self.n:
                raise ValueError(f"parent id {p} out of range")
            self.children[p].append(v)

        # breadth-first order from the root; parents precede children
        order = np.empty(self.n, dtype=np.int64)
        depth = np.full(self.n, -1, dtype=np.int64)
        depth[self.root] = 0
        queue = deque([self.root])
        k = 0
        while queue:
            v = queue.popleft()
            order[k] = v
            k += 1
            for c in self.children[v]:
                depth[c] = depth[v] + 1
                queue.append(c)
        if k != self.n:
            raise errors.CycleDetected(self._witness_cycle())
        self.order = order
        self.depths = depth
        self._levels = None
        self._paths = None
        self._diameter = None

    def _witness_cycle(self):
        # follow parent pointers from each node until a repeat shows up
        seen_global = set()
        for start in range(self.n):
            if start in seen_global:
                continue
            chain, pos = [], {}
            v = start
            while v >= 0 and v not in seen_global:
                if v in pos:
                    cyc = chain[pos[v]:]
                    return [self.labels[u] for u in cyc]
                pos[v] = len(chain)
                chain.append(v)
                v = int(self.parent_ids[v])
            seen_global.update(chain)
        return []

    # ------------------------------------------------------------------
    # construction

    @classmethod
    def from_edges(cls, edges):
        """Validate a (child label, parent label) edge list into a hierarchy."""
        edges = list(edges)
        if not edges:
            raise ValueError("edge list is empty")
        parent_of = {}
        labels = set()
        for child, parent in edges:
            labels.add(child)
            labels.add(parent)
            if child == parent:
                raise errors.CycleDetected([child])
            if child in parent_of and parent_of[child] != parent:
                raise errors.MultipleParents(child)
            parent_of[child] = parent
        roots = sorted(labels - parent_of.keys())
        if not roots:
            raise errors.CycleDetected(_find_label_cycle(parent_of))
        if len(roots) > 1:
            raise errors.MultipleRoots(roots)

        labels = sorted(labels)
        index = {lab: i for i, lab in enumerate(labels)}
        parent_ids = np.full(len(labels), -1, dtype=np.int64)
        for child, parent in parent_of.items():
            parent_ids[index[child]] = index[parent]
        return cls(labels, parent_ids)

    @classmethod
    def read(cls, path):
        rows = _read_edge_rows(path)
        if not rows:
            raise errors.ParseError(path, 0, "no edges in hierarchy file")
        return cls.from_edges([(c, p) for c, p, _, _ in rows])

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(FORMAT_LINE + "\n")
            fh.write(self.canonical_edges())

    def canonical_edges(self):
        """Edge lines in breadth-first (parent before child) order."""
        lines = []
        for v in self.order[1:]:
            v = int(v)
            lines.append(f"{self.labels[v]}\t{self.labels[int(self.parent_ids[v])]}\n")
        return "".join(lines)

    def fingerprint(self):
        """Stable hash of the canonical edge list, used to bind checkpoints."""
        return hashlib.sha256(self.canonical_edges().encode("utf-8")).hexdigest()

    # ------------------------------------------------------------------
    # queries

    def id_of(self, label):
        try:
            return self.index[label]
        except KeyError:
            raise errors.UnknownLabel(label) from None

    def label_of(self, node):
        return self.labels[self._check(node)]

    def _check(self, node):
        node = int(node)
        if not 0 <= node < self.n:
            raise errors.UnknownLabel(node)
        return node

    def depth(self, node):
        return int(self.depths[self._check(node)])

    def parent(self, node):
        p = int(self.parent_ids[self._check(node)])
        return None if p < 0 else p

    def path(self, node):
        """Root-to-node path as a tuple of ids, length depth(node)+1."""
        v = self._check(node)
        out = []
        while v >= 0:
            out.append(v)
            v = int(self.parent_ids[v])
        out.reverse()
        return tuple(out)

    def enumerate_paths(self):
        """All N root-to-node paths, ordered by ending node id."""
        if self._paths is None:
            self._paths = [self.path(v) for v in range(self.n)]
        return self._paths

    def ancestor(self, node, level):
        """The unique node at the given depth on the root-to-node path."""
        v = self._check(node)
        d = int(self.depths[v])
        if level < 0 or level > d:
            raise errors.LevelBelowNode(self.labels[v], level)
        for _ in range(d - level):
            v = int(self.parent_ids[v])
        return v

    def is_ancestor_or_self(self, a, y):
        """True iff ``a`` lies on the root-to-``y`` path (including a == y)."""
        a = self._check(a)
        v = self._check(y)
        da = int(self.depths[a])
        dv = int(self.depths[v])
        if da > dv:
            return False
        for _ in range(dv - da):
            v = int(self.parent_ids[v])
        return v == a

    def lca(self, a, b):
        a = self._check(a)
        b = self._check(b)
        da, db = int(self.depths[a]), int(self.depths[b])
        while da > db:
            a = int(self.parent_ids[a])
            da -= 1
        while db > da:
            b = int(self.parent_ids[b])
            db -= 1
        while a != b:
            a = int(self.parent_ids[a])
            b = int(self.parent_ids[b])
        return a

    def tree_distance(self, a, b):
        l = self.lca(a, b)
        return int(self.depths[a] + self.depths[b] - 2 * self.depths[l])

    def diameter(self):
        """Longest tree distance between any two nodes (two farthest-node passes)."""
        if self._diameter is None:
            u, _ = self._farthest_from(self.root)
            _, d = self._farthest_from(u)
            self._diameter = d
        return self._diameter

    def _farthest_from(self, start):
        dist = np.full(self.n, -1, dtype=np.int64)
        dist[start] = 0
        queue = deque([start])
        far, far_d = start, 0
        while queue:
            v = queue.popleft()
            neighbors = list(self.children[v])
            p = int(self.parent_ids[v])
            if p >= 0:
                neighbors.append(p)
            for u in neighbors:
                if dist[u] < 0:
                    dist[u] = dist[v] + 1
                    if dist[u] > far_d:
                        far, far_d = u, int(dist[u])
                    queue.append(u)
        return far, far_d

    def nodes_at_level(self, level):
        """All node ids with depth exactly ``level``, ascending."""
        if self._levels is None:
            levels = {}
            for v in range(self.n):
                levels.setdefault(int(self.depths[v]), []).append(v)
            self._levels = levels
        return list(self._levels.get(level, []))

    def max_depth(self):
        return int(self.depths.max())

    def subtree(self, node):
        """The node plus all of its descendants, as a set of ids."""
        v = self._check(node)
        out = set()
        stack = [v]
        while stack:
            u = stack.pop()
            out.add(u)
            stack.extend(self.children[u])
        return out

    def leaves(self):
        return [v for v in range(self.n) if not self.children[v]]

    def __repr__(self):
        return f"LabelHierarchy(n={self.n}, root={self.labels[self.root]!r})"


def _find_label_cycle(parent_of):
    seen = set()
    for start in parent_of:
        if start in seen:
            continue
        chain, pos = [], {}
        v = start
        while v in parent_of and v not in seen:
            if v in pos:
                return chain[pos[v]:]
            pos[v] = len(chain)
            chain.append(v)
            v = parent_of[v]
        seen.update(chain)
    return []


def build_from_edges(edges):
    return LabelHierarchy.from_edges(edges)


def random_hierarchy(n, seed, prefix="n"):
    """Random recursive tree on ``n`` nodes; node i attaches below a uniform
    earlier node. Deterministic given the seed."""
    if n < 1:
        raise ValueError("need at least one node")
    rng = np.random.default_rng(seed)
    labels = [f"{prefix}{i:04d}" for i in range(n)]
    parent_ids = np.full(n, -1, dtype=np.int64)
    for v in range(1, n):
        parent_ids[v] = int(rng.integers(0, v))
    return LabelHierarchy(labels, parent_ids)


# ---------------------------------------------------------------------------
# weighted "is-a" digraphs


class WeightedDigraph:
    """Directed graph with child->parent edges and real weights.

    Self-loops are rejected; a repeated edge keeps the maximum weight.
    """

    def __init__(self):
        self._nodes = set()
        self._edges = {}  # (child, parent) -> weight

    def add_node(self, label):
        self._nodes.add(label)

    def add_edge(self, child, parent, weight=1.0):
        if child == parent:
            raise errors.CycleDetected([child])
        self._nodes.add(child)
        self._nodes.add(parent)
        key = (child, parent)
        if key in self._edges:
            self._edges[key] = max(self._edges[key], float(weight))
        else:
            self._edges[key] = float(weight)

    @property
    def nodes(self):
        return frozenset(self._nodes)

    def edges(self):
        """Edges as (child, parent, weight), sorted for determinism."""
        return [(c, p, w) for (c, p), w in sorted(self._edges.items())]

    def __len__(self):
        return len(self._nodes)

    @classmethod
    def read(cls, path):
        g = cls()
        for child, parent, weight, _ in _read_edge_rows(path):
            g.add_edge(child, parent, weight)
        return g

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(FORMAT_LINE + "\n")
            for c, p, w in self.edges():
                fh.write(f"{c}\t{p}\t{w!r}\n")


def prune_to_support(g, keep):
    """Iteratively drop leaves (nodes with no incoming child edge) that are
    not in ``keep`` until a fixpoint is reached."""
    keep = set(keep)
    unknown = keep - g.nodes
    if unknown:
        raise errors.UnknownKeepLabel(sorted(unknown)[0])

    alive = set(g.nodes)
    edges = [(c, p, w) for c, p, w in g.edges()]
    while True:
        has_child = {p for c, p, _ in edges if c in alive and p in alive}
        removable = {v for v in alive if v not in has_child and v not in keep}
        if not removable:
            break
        alive -= removable
        edges = [(c, p, w) for c, p, w in edges if c in alive and p in alive]

    out = WeightedDigraph()
    for v in alive:
        out.add_node(v)
    for c, p, w in edges:
        out.add_edge(c, p, w)
    return out


# ---------------------------------------------------------------------------
# maximum spanning arborescence (cycle-contraction method)
#
# Weights are exact: the float weight becomes a Fraction, and every edge adds
# an infinitesimal bonus 2^-(rank+1) keyed by its (parent, child) rank. The
# bonus makes the optimum unique and realizes the documented tie rule: among
# maximum-weight arborescences, the edge set preferring lexicographically
# smaller (parent label, child label) pairs wins.


@dataclass(frozen=True, order=True)
class _W:
    w: Fraction
    tie: Fraction

    def __add__(self, other):
        return _W(self.w + other.w, self.tie + other.tie)

    def __sub__(self, other):
        return _W(self.w - other.w, self.tie - other.tie)


class _Arc:
    __slots__ = ("child", "parent", "w", "base")

    def __init__(self, child, parent, w, base=None):
        self.child = child
        self.parent = parent
        self.w = w
        self.base = base


def ranked_arc_weights(g):
    """Exact (weight, tiebreak) pairs per edge, ranked by (parent, child)."""
    by_pref = sorted(g.edges(), key=lambda e: (e[1], e[0]))
    table = {}
    for rank, (c, p, w) in enumerate(by_pref):
        table[(c, p)] = _W(Fraction(w), Fraction(1, 2 ** (rank + 1)))
    return table


def max_arborescence(g, root):
    """Maximum-total-weight spanning arborescence of ``g`` rooted at ``root``.

    Edges of ``g`` point child->parent; the result is returned as a validated
    :class:`LabelHierarchy`. Raises :class:`~hzsl.errors.NoArborescence` when
    some node cannot be reached from the root.
    """
    if root not in g.nodes:
        raise errors.NoArborescence([root])

    labels = sorted(g.nodes)
    idx = {lab: i for i, lab in enumerate(labels)}
    rootid = idx[root]

    # reachability along parent->child (reverse of stored direction)
    down = {i: [] for i in range(len(labels))}
    for c, p, _ in g.edges():
        down[idx[p]].append(idx[c])
    seen = {rootid}
    queue = deque([rootid])
    while queue:
        v = queue.popleft()
        for u in down[v]:
            if u not in seen:
                seen.add(u)
                queue.append(u)
    unreachable = [labels[v] for v in range(len(labels)) if v not in seen]
    if unreachable:
        raise errors.NoArborescence(unreachable)

    weights = ranked_arc_weights(g)
    arcs = [
        _Arc(idx[c], idx[p], weights[(c, p)])
        for c, p, _ in g.edges()
    ]
    if len(labels) == 1:
        return LabelHierarchy(labels, np.array([-1], dtype=np.int64))

    chosen = _solve(list(range(len(labels))), arcs, rootid, len(labels))
    edges = [(labels[v], labels[a.parent]) for v, a in chosen.items()]
    return LabelHierarchy.from_edges(edges)


def _solve(nodes, arcs, root, next_id):
    best = {}
    for a in arcs:
        if a.child == root:
            continue
        cur = best.get(a.child)
        if cur is None or cur.w < a.w:
            best[a.child] = a
    for v in nodes:
        if v != root and v not in best:
            raise errors.NoArborescence([v])

    cycle = _pointer_cycle(best, nodes, root)
    if cycle is None:
        return best

    cyc = set(cycle)
    super_id = next_id
    new_arcs = []
    for a in arcs:
        c_in = a.child in cyc
        p_in = a.parent in cyc
        if c_in and p_in:
            continue
        if c_in:
            new_arcs.append(_Arc(super_id, a.parent, a.w - best[a.child].w, a))
        elif p_in:
            new_arcs.append(_Arc(a.child, super_id, a.w, a))
        else:
            new_arcs.append(_Arc(a.child, a.parent, a.w, a))
    new_nodes = [v for v in nodes if v not in cyc] + [super_id]

    sol = _solve(new_nodes, new_arcs, root, next_id + 1)

    enter = sol.pop(super_id).base  # pre-contraction arc entering the cycle
    result = {v: a.base for v, a in sol.items()}
    for v in cyc:
        result[v] = best[v]
    result[enter.child] = enter
    return result


def _pointer_cycle(best, nodes, root):
    done = set()
    for start in nodes:
        if start == root or start in done:
            continue
        pos = {}
        chain = []
        v = start
        while v != root and v not in done:
            if v in pos:
                done.update(chain)
                return chain[pos[v]:]
            pos[v] = len(chain)
            chain.append(v)
            v = best[v].parent
        done.update(chain)
    return None
