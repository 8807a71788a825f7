"""Dataset files and the synthetic desk-scale benchmark generator.

A dataset is four text files: a hierarchy edge list, an embedding file for
the label attribute vectors, a feature file (``id<TAB>label<TAB>v1 ... vd``)
and a split file (``id<TAB>split-name``). The ``train`` split holds the
training instances; test splits are named (conventionally ``train-classes``,
``zeroshot-leaves`` and ``novel``). Zero-shot classes are recovered as the
ground-truth labels of the ``zeroshot-leaves`` split.

The generator builds a complete b-ary tree and runs a branching random walk
in embedding space down the tree, so every node has a latent location and
tree proximity means geometric proximity. Leaf prototypes are the leaves'
latents; node attribute vectors are subtree prototype means plus seeded
noise; features are sampled from per-leaf Gaussians around the prototypes
mapped into feature space by a fixed random linear map. A seeded fraction of
leaves is held out as zero-shot; novel instances come from fresh prototypes
near an internal node's latent and are ground-truthed to that node.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

import numpy as np

from . import errors
from .attributes import AttributeTable, load_embeddings, save_embeddings
from .hierarchy import LabelHierarchy

FEATURES_FORMAT = "# format: features v1"
SPLITS_FORMAT = "# format: splits v1"

TRAIN_SPLIT = "train"
TRAIN_TEST_SPLIT = "train-classes"
ZEROSHOT_SPLIT = "zeroshot-leaves"
NOVEL_SPLIT = "novel"

TASKS = ("finegrained-train", "finegrained-zeroshot", "level", "free")


@dataclass(eq=False)
class Instance:
    id: str
    features: np.ndarray
    label: int


@dataclass(eq=False)
class Dataset:
    hierarchy: LabelHierarchy
    attrs: AttributeTable
    d_feature: int
    train: list
    tests: dict
    y_tr: set
    y_zs: set

    def split(self, name):
        if name == TRAIN_SPLIT:
            return self.train
        return self.tests.get(name, [])

    def split_names(self):
        return [TRAIN_SPLIT] + sorted(self.tests)

    def train_class_ids(self):
        """Sorted node ids observed as training labels."""
        return sorted({inst.label for inst in self.train})

    def matrix(self, instances):
        H = np.stack([inst.features for inst in instances])
        y = np.array([inst.label for inst in instances], dtype=np.int64)
        return H, y

    def train_matrix(self):
        if not self.train:
            raise errors.EmptySplit(TRAIN_SPLIT)
        return self.matrix(self.train)


# ---------------------------------------------------------------------------
# file io


def write_features(path, instances):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(FEATURES_FORMAT + "\n")
        for inst, label in instances:
            values = " ".join(repr(float(x)) for x in inst.features)
            fh.write(f"{inst.id}\t{label}\t{values}\n")


def write_splits(path, pairs):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(SPLITS_FORMAT + "\n")
        for inst_id, split in pairs:
            fh.write(f"{inst_id}\t{split}\n")


def _read_features(path, hierarchy):
    out = []
    d = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise errors.ParseError(path, lineno, "expected id<TAB>label<TAB>values")
            inst_id, label, values = parts
            if label not in hierarchy.index:
                raise errors.CrossFileInconsistency(
                    f"{path}:{lineno}: unknown label {label!r}"
                )
            try:
                vec = np.array([float(x) for x in values.split(" ")], dtype=np.float64)
            except ValueError:
                raise errors.ParseError(path, lineno, "non-numeric feature value") from None
            if d is None:
                d = vec.shape[0]
            elif vec.shape[0] != d:
                raise errors.ParseError(
                    path, lineno, f"feature dimension {vec.shape[0]}, expected {d}"
                )
            out.append((inst_id, hierarchy.index[label], vec, lineno))
    if not out:
        raise errors.ParseError(path, 0, "no instances")
    return out, d


def _read_splits(path):
    out = {}
    order = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise errors.ParseError(path, lineno, "expected id<TAB>split-name")
            inst_id, split = parts
            if inst_id in out:
                raise errors.ParseError(path, lineno, f"duplicate instance id {inst_id!r}")
            out[inst_id] = split
            order.append(inst_id)
    return out, order


def load_dataset(hierarchy_path, embeddings_path, features_path, splits_path):
    """Read and cross-validate the four dataset files eagerly."""
    hierarchy = LabelHierarchy.read(hierarchy_path)
    attrs = load_embeddings(embeddings_path, hierarchy.index)
    attrs.check_covers(hierarchy)

    rows, d_feature = _read_features(features_path, hierarchy)
    split_of, _ = _read_splits(splits_path)

    seen = set()
    train = []
    tests = {}
    for inst_id, label, vec, lineno in rows:
        if inst_id in seen:
            raise errors.ParseError(features_path, lineno, f"duplicate instance id {inst_id!r}")
        seen.add(inst_id)
        if inst_id not in split_of:
            raise errors.CrossFileInconsistency(
                f"instance {inst_id!r} has features but no split assignment"
            )
        inst = Instance(inst_id, vec, label)
        name = split_of[inst_id]
        if name == TRAIN_SPLIT:
            train.append(inst)
        else:
            tests.setdefault(name, []).append(inst)
    missing = set(split_of) - seen
    if missing:
        raise errors.CrossFileInconsistency(
            f"split file names unknown instance ids {sorted(missing)[:3]!r}"
        )

    y_zs = {inst.label for inst in tests.get(ZEROSHOT_SPLIT, [])}
    y_tr = set(range(hierarchy.n)) - y_zs
    for inst in train:
        if inst.label in y_zs:
            raise errors.CrossFileInconsistency(
                f"training instance {inst.id!r} is labeled with zero-shot class "
                f"{hierarchy.labels[inst.label]!r}"
            )
    for inst in tests.get(NOVEL_SPLIT, []):
        if not hierarchy.children[inst.label]:
            raise errors.CrossFileInconsistency(
                f"novel instance {inst.id!r} must be ground-truthed to an interior node"
            )
    return Dataset(hierarchy, attrs, d_feature, train, tests, y_tr, y_zs)


def emit_dataset(dataset, out_dir):
    """Write the four dataset files; returns their paths.

    Ordering is canonical (train first, then test splits sorted by name), so
    emit -> load -> emit is byte-stable.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "hierarchy": os.path.join(out_dir, "hierarchy.tsv"),
        "embeddings": os.path.join(out_dir, "embeddings.txt"),
        "features": os.path.join(out_dir, "features.tsv"),
        "splits": os.path.join(out_dir, "splits.tsv"),
    }
    dataset.hierarchy.write(paths["hierarchy"])
    save_embeddings(paths["embeddings"], dataset.attrs, dataset.hierarchy.labels)

    ordered = [(inst, TRAIN_SPLIT) for inst in dataset.train]
    for name in sorted(dataset.tests):
        ordered.extend((inst, name) for inst in dataset.tests[name])
    write_features(
        paths["features"],
        [(inst, dataset.hierarchy.labels[inst.label]) for inst, _ in ordered],
    )
    write_splits(paths["splits"], [(inst.id, name) for inst, name in ordered])
    return paths


def load_dataset_dir(data_dir):
    return load_dataset(
        os.path.join(data_dir, "hierarchy.tsv"),
        os.path.join(data_dir, "embeddings.txt"),
        os.path.join(data_dir, "features.tsv"),
        os.path.join(data_dir, "splits.tsv"),
    )


# ---------------------------------------------------------------------------
# synthetic generator


@dataclass
class SynthConfig:
    """Knobs for the synthetic benchmark.

    ``separation`` is the one difficulty dial: the typical feature-space
    distance between sibling leaf centroids (the nearest competitors)
    divided by twice the per-component noise scale, i.e. the
    one-dimensional decision margin in noise-sigma units along a
    centroid-to-centroid line. Crossing into another branch widens the
    margin by a sqrt(depth) factor, so coarse decisions stay easier than
    fine-grained ones.
    """

    depth: int = 3
    branching: int = 4
    d_feature: int = 32
    d_embed: int = 16
    per_class: int = 50
    test_per_class: int = 10
    zeroshot_fraction: float = 0.25
    novel_fraction: float = 0.125
    separation: float = 5.0
    attr_noise: float = 0.05
    novel_spread: float = 0.5
    seed: int = 0


def _complete_tree_edges(depth, branching):
    edges = []
    frontier = ["root"]
    for _ in range(depth):
        nxt = []
        for parent in frontier:
            for i in range(branching):
                child = f"{parent}.{i:02d}"
                edges.append((child, parent))
                nxt.append(child)
        frontier = nxt
    return edges


def synth_generate(config):
    """Deterministically generate a Dataset from the config (see module docs)."""
    c = config
    if c.depth < 2 or c.branching < 2:
        raise errors.ConfigInvalid("need depth >= 2 and branching >= 2")
    if c.branching > 99:
        raise errors.ConfigInvalid("branching above 99 breaks label ordering")
    if not (0.0 <= c.zeroshot_fraction < 1.0) or c.novel_fraction < 0.0:
        raise errors.ConfigInvalid("bad split fractions")
    if c.per_class < 1 or c.test_per_class < 1:
        raise errors.ConfigInvalid("per-class counts must be positive")
    if c.separation <= 0.0:
        raise errors.ConfigInvalid("separation must be positive")

    hierarchy = LabelHierarchy.from_edges(_complete_tree_edges(c.depth, c.branching))
    leaves = hierarchy.leaves()
    rng = np.random.default_rng(c.seed)

    # branching random walk: each node steps away from its parent's latent,
    # so subtrees form nested clusters in embedding space
    step = 1.0 / np.sqrt(c.depth)
    latent = np.zeros((hierarchy.n, c.d_embed))
    for v in hierarchy.order[1:]:
        v = int(v)
        parent = int(hierarchy.parent_ids[v])
        latent[v] = latent[parent] + step * rng.normal(size=c.d_embed)
    protos = {leaf: latent[leaf] for leaf in leaves}

    def subtree_proto_mean(node):
        below = sorted(v for v in hierarchy.subtree(node) if v in protos)
        return np.mean([protos[v] for v in below], axis=0)

    vectors = {}
    for v in range(hierarchy.n):
        vectors[v] = subtree_proto_mean(v) + c.attr_noise * rng.normal(size=c.d_embed)
    attrs = AttributeTable(vectors)

    fmap = rng.normal(size=(c.d_feature, c.d_embed)) / np.sqrt(c.d_embed)
    # sibling leaves sit ~sqrt(2 d_feature / depth) apart after the map
    noise_scale = np.sqrt(2.0 * c.d_feature / c.depth) / (2.0 * c.separation)

    n_zs = int(round(c.zeroshot_fraction * len(leaves)))
    zs_leaves = sorted(rng.choice(leaves, size=n_zs, replace=False).tolist()) if n_zs else []
    zs_set = set(zs_leaves)

    counter = 0

    def make(center, count, label):
        nonlocal counter
        X = center + noise_scale * rng.normal(size=(count, c.d_feature))
        out = []
        for row in X:
            out.append(Instance(f"x{counter:06d}", row, label))
            counter += 1
        return out

    train, train_test, zs_test, novel_test = [], [], [], []
    for leaf in leaves:
        center = fmap @ protos[leaf]
        if leaf in zs_set:
            zs_test.extend(make(center, c.per_class, leaf))
        else:
            train.extend(make(center, c.per_class, leaf))
            train_test.extend(make(center, c.test_per_class, leaf))

    n_novel = int(round(c.novel_fraction * len(leaves)))
    internals = [v for v in range(hierarchy.n)
                 if hierarchy.children[v] and v != hierarchy.root]
    for _ in range(n_novel):
        anchor = int(rng.choice(internals))
        fresh = subtree_proto_mean(anchor) + c.novel_spread * rng.normal(size=c.d_embed)
        novel_test.extend(make(fmap @ fresh, c.test_per_class, anchor))

    tests = {TRAIN_TEST_SPLIT: train_test}
    if zs_test:
        tests[ZEROSHOT_SPLIT] = zs_test
    if novel_test:
        tests[NOVEL_SPLIT] = novel_test
    y_tr = set(range(hierarchy.n)) - zs_set
    return Dataset(hierarchy, attrs, c.d_feature, train, tests, y_tr, zs_set)


# ---------------------------------------------------------------------------
# benchmark task slicing


def split_candidates(dataset, task, level=None, split=None):
    """Instances, candidate node set, and ground truths for a benchmark task.

    Level tasks map each ground truth to its ancestor at the level and drop
    instances whose true node sits above it.
    """
    h = dataset.hierarchy
    if task == "finegrained-train":
        instances = dataset.tests.get(TRAIN_TEST_SPLIT, [])
        if not instances:
            raise errors.EmptySplit(TRAIN_TEST_SPLIT)
        candidates = dataset.train_class_ids()
        gt = np.array([inst.label for inst in instances], dtype=np.int64)
        return instances, candidates, gt

    if task == "finegrained-zeroshot":
        instances = dataset.tests.get(ZEROSHOT_SPLIT, [])
        if not instances:
            raise errors.EmptySplit(ZEROSHOT_SPLIT)
        candidates = sorted(dataset.y_zs)
        gt = np.array([inst.label for inst in instances], dtype=np.int64)
        return instances, candidates, gt

    if task == "level":
        if level is None or level < 0:
            raise errors.ConfigInvalid("level task needs --level >= 0")
        name = split or ZEROSHOT_SPLIT
        pool = dataset.split(name)
        if not pool:
            raise errors.EmptySplit(name)
        candidates = h.nodes_at_level(level)
        if not candidates:
            raise errors.EmptyLevel(level)
        instances = [inst for inst in pool if h.depth(inst.label) >= level]
        if not instances:
            raise errors.EmptySplit(f"{name} at level {level}")
        gt = np.array([h.ancestor(inst.label, level) for inst in instances], dtype=np.int64)
        return instances, candidates, gt

    if task == "free":
        name = split or ZEROSHOT_SPLIT
        instances = dataset.split(name)
        if not instances:
            raise errors.EmptySplit(name)
        candidates = list(range(h.n))
        gt = np.array([inst.label for inst in instances], dtype=np.int64)
        return instances, candidates, gt

    raise errors.ConfigInvalid(f"unknown task {task!r}; expected one of {TASKS}")
