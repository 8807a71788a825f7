import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import bfs_distance
from hzsl import errors
from hzsl.hierarchy import LabelHierarchy, WeightedDigraph, build_from_edges, \
    prune_to_support, random_hierarchy


def test_chain_build(chain3):
    assert chain3.n == 3
    b = chain3.id_of("B")
    assert chain3.depth(b) == 2
    assert chain3.labels[chain3.root] == "root"


def test_ids_follow_sorted_label_order():
    h = build_from_edges([("zebra", "root"), ("apple", "root")])
    assert h.labels == ("apple", "root", "zebra")


def test_multiple_parents_rejected():
    with pytest.raises(errors.MultipleParents) as exc:
        build_from_edges([("A", "root"), ("A", "B")])
    assert exc.value.node == "A"


def test_two_cycle_rejected():
    with pytest.raises(errors.CycleDetected):
        build_from_edges([("A", "B"), ("B", "A")])


def test_self_edge_rejected():
    with pytest.raises(errors.CycleDetected):
        build_from_edges([("A", "A")])


def test_multiple_roots_rejected():
    with pytest.raises(errors.MultipleRoots) as exc:
        build_from_edges([("A", "r1"), ("B", "r2")])
    assert set(exc.value.roots) == {"r1", "r2"}


def test_duplicate_edge_tolerated():
    h = build_from_edges([("A", "root"), ("A", "root")])
    assert h.n == 2


def test_ancestor_on_chain(chain3):
    b = chain3.id_of("B")
    assert chain3.ancestor(b, 1) == chain3.id_of("A")
    assert chain3.ancestor(b, 2) == b
    assert chain3.ancestor(b, 0) == chain3.root


def test_ancestor_below_node_level_rejected(chain3):
    with pytest.raises(errors.LevelBelowNode):
        chain3.ancestor(chain3.id_of("A"), 2)


def test_is_ancestor_or_self(five_node):
    root = five_node.root
    c = five_node.id_of("C")
    d = five_node.id_of("D")
    a = five_node.id_of("A")
    for v in range(five_node.n):
        assert five_node.is_ancestor_or_self(root, v)
        assert five_node.is_ancestor_or_self(v, v)
    assert five_node.is_ancestor_or_self(a, c)
    assert not five_node.is_ancestor_or_self(c, d)
    assert not five_node.is_ancestor_or_self(d, c)


def test_enumerate_paths_chain(chain3):
    paths = chain3.enumerate_paths()
    assert len(paths) == 3
    b = chain3.id_of("B")
    assert paths[b] == (chain3.root, chain3.id_of("A"), b)


def test_five_node_hierarchy_has_five_paths(five_node):
    paths = five_node.enumerate_paths()
    assert len(paths) == 5
    assert sorted(p[-1] for p in paths) == list(range(5))


def test_star_paths():
    h = build_from_edges([(f"c{i}", "hub") for i in range(6)])
    assert len(h.enumerate_paths()) == 7


def test_tree_distance_chain(chain3):
    b = chain3.id_of("B")
    assert chain3.tree_distance(b, b) == 0
    assert chain3.tree_distance(chain3.root, b) == 2
    assert chain3.diameter() == 2


def test_tree_distance_matches_bfs_oracle():
    h = random_hierarchy(10, seed=42)
    for a in range(h.n):
        for b in range(h.n):
            assert h.tree_distance(a, b) == bfs_distance(h, a, b)
    assert h.diameter() == max(
        bfs_distance(h, a, b) for a in range(h.n) for b in range(h.n)
    )


def test_tree_distance_metric_properties():
    h = random_hierarchy(12, seed=5)
    rng = np.random.default_rng(0)
    for _ in range(60):
        a, b, c = rng.integers(0, h.n, size=3)
        assert h.tree_distance(a, b) == h.tree_distance(b, a)
        assert h.tree_distance(a, c) <= h.tree_distance(a, b) + h.tree_distance(b, c)
        assert (h.tree_distance(a, b) == 0) == (a == b)


def test_nodes_at_level(five_node):
    assert five_node.nodes_at_level(0) == [five_node.root]
    assert set(five_node.nodes_at_level(1)) == {five_node.id_of("A"), five_node.id_of("B")}
    assert five_node.nodes_at_level(9) == []


def test_subtree_partition(five_node):
    a = five_node.id_of("A")
    got = set()
    for c in five_node.children[a]:
        sub = five_node.subtree(c)
        assert not (got & sub)
        got |= sub
    assert got | {a} == five_node.subtree(a)
    for leaf in five_node.leaves():
        assert five_node.subtree(leaf) == {leaf}


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=1, max_value=24), st.integers(min_value=0, max_value=2**31))
def test_random_tree_invariants(n, seed):
    h = random_hierarchy(n, seed)
    assert int(np.sum(h.parent_ids >= 0)) == h.n - 1
    assert h.depths[h.root] == 0
    for v in range(h.n):
        p = h.parent(v)
        if p is not None:
            assert h.depth(v) == h.depth(p) + 1
        path = h.path(v)
        assert len(path) == h.depth(v) + 1
        assert path[0] == h.root and path[-1] == v
    paths = h.enumerate_paths()
    assert sorted(p[-1] for p in paths) == list(range(h.n))


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=2, max_value=20), st.integers(min_value=0, max_value=2**31),
       st.data())
def test_ancestor_monotonicity(n, seed, data):
    h = random_hierarchy(n, seed)
    y = data.draw(st.integers(min_value=0, max_value=n - 1))
    d = h.depth(y)
    l2 = data.draw(st.integers(min_value=0, max_value=d))
    l1 = data.draw(st.integers(min_value=0, max_value=l2))
    assert h.ancestor(y, l1) == h.ancestor(h.ancestor(y, l2), l1)


# ---------------------------------------------------------------------------
# pruning


def _chain_graph(*labels):
    g = WeightedDigraph()
    for child, parent in zip(labels[1:], labels[:-1]):
        g.add_edge(child, parent)
    return g


def test_prune_single_pass():
    g = _chain_graph("root", "A", "B")
    out = prune_to_support(g, {"A"})
    assert out.nodes == {"root", "A"}


def test_prune_cascades():
    g = _chain_graph("root", "A", "B", "C")
    out = prune_to_support(g, {"A"})
    assert out.nodes == {"root", "A"}


def test_prune_keep_all_leaves_is_identity():
    g = WeightedDigraph()
    g.add_edge("A", "root")
    g.add_edge("B", "root")
    g.add_edge("C", "A")
    out = prune_to_support(g, {"B", "C"})
    assert out.nodes == g.nodes
    assert out.edges() == g.edges()


def test_prune_unknown_keep_label():
    g = _chain_graph("root", "A")
    with pytest.raises(errors.UnknownKeepLabel):
        prune_to_support(g, {"nope"})


def test_prune_idempotent():
    rng = np.random.default_rng(3)
    for _ in range(20):
        h = random_hierarchy(int(rng.integers(3, 12)), int(rng.integers(0, 10**6)))
        g = WeightedDigraph()
        for v in h.order[1:]:
            v = int(v)
            g.add_edge(h.labels[v], h.labels[int(h.parent_ids[v])])
        keep = {h.labels[int(v)] for v in rng.choice(h.n, size=2)}
        keep &= g.nodes
        if not keep:
            continue
        once = prune_to_support(g, keep)
        twice = prune_to_support(once, keep & once.nodes)
        assert once.nodes == twice.nodes
        assert once.edges() == twice.edges()


# ---------------------------------------------------------------------------
# file round-trip


def test_hierarchy_file_roundtrip(tmp_path, five_node):
    path = tmp_path / "tree.tsv"
    five_node.write(path)
    again = LabelHierarchy.read(path)
    assert again.labels == five_node.labels
    assert np.array_equal(again.parent_ids, five_node.parent_ids)
    assert again.fingerprint() == five_node.fingerprint()
    # parent is written before any of its children
    text = path.read_text().splitlines()
    seen = {"root"}
    for line in text[1:]:
        child, parent = line.split("\t")
        assert parent in seen
        seen.add(child)


def test_edge_file_rejects_malformed(tmp_path):
    path = tmp_path / "bad.tsv"
    path.write_text("# format: hierarchy-edges v1\nA\n")
    with pytest.raises(errors.ParseError) as exc:
        LabelHierarchy.read(path)
    assert exc.value.lineno == 2


def test_fingerprint_changes_with_structure(chain3, five_node):
    assert chain3.fingerprint() != five_node.fingerprint()
