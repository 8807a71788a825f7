"""Label attribute vectors: storage, file ingestion, cosine similarity.

Embedding files use the plain word2vec text layout: a ``V d`` header line
followed by ``token v1 ... vd`` lines. Whitespace inside labels is normalized
to underscores when matching tokens. Vectors are kept as 64-bit floats and
written back with shortest round-trip formatting, so emit/parse is lossless.
"""

from __future__ import annotations

import numpy as np

from . import errors


def normalize_token(label):
    return label.replace(" ", "_")


class AttributeTable:
    """Immutable map from label id to a dense real vector of one shared dimension."""

    def __init__(self, vectors):
        if not vectors:
            raise ValueError("attribute table is empty")
        self._vectors = {}
        self.dim = None
        for label, vec in vectors.items():
            arr = np.array(vec, dtype=np.float64)
            if arr.ndim != 1:
                raise errors.DimensionMismatch(f"label {label!r} vector is not 1-d")
            if self.dim is None:
                self.dim = arr.shape[0]
            elif arr.shape[0] != self.dim:
                raise errors.DimensionMismatch(
                    f"label {label!r} has dimension {arr.shape[0]}, expected {self.dim}"
                )
            if not arr.any():
                raise errors.ZeroVector()
            arr.setflags(write=False)
            self._vectors[label] = arr

    def __contains__(self, label):
        return label in self._vectors

    def __getitem__(self, label):
        try:
            return self._vectors[label]
        except KeyError:
            raise errors.MissingAttribute(label) from None

    def __len__(self):
        return len(self._vectors)

    def ids(self):
        return sorted(self._vectors)

    def matrix(self, labels):
        """Stack the vectors for ``labels`` into a (len, dim) array."""
        return np.stack([self[lab] for lab in labels])

    def check_covers(self, hierarchy):
        """Require an entry for every node of the hierarchy."""
        for v in range(hierarchy.n):
            if v not in self._vectors:
                raise errors.MissingLabel(hierarchy.labels[v])


def cosine_similarity(u, v):
    """dot(u, v) / (|u| |v|); raises ZeroVector on a zero input."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise errors.DimensionMismatch(f"{u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise errors.ZeroVector()
    return float(np.dot(u, v) / (nu * nv))


def load_embeddings(path, symbols):
    """Read an embedding file and return a table over the requested symbols.

    ``symbols`` maps label strings to the ids the table should use. Labels
    are matched against file tokens after space->underscore normalization;
    a label without a matching token raises MissingLabel.
    """
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        parts = header.split()
        if len(parts) != 2:
            raise errors.MalformedHeader(f"expected 'V d', got {header.strip()!r}")
        try:
            count, dim = int(parts[0]), int(parts[1])
        except ValueError:
            raise errors.MalformedHeader(f"non-integer header {header.strip()!r}") from None
        if count < 0 or dim <= 0:
            raise errors.MalformedHeader(f"bad sizes in {header.strip()!r}")

        by_token = {}
        for lineno, raw in enumerate(fh, start=2):
            line = raw.rstrip("\n")
            if not line:
                continue
            fields = line.split(" ")
            token = fields[0]
            values = fields[1:]
            if len(values) != dim:
                raise errors.DimensionMismatch(
                    f"{path}:{lineno}: {len(values)} values, expected {dim}"
                )
            try:
                by_token[token] = np.array([float(x) for x in values], dtype=np.float64)
            except ValueError:
                raise errors.ParseError(path, lineno, "non-numeric value") from None

    vectors = {}
    for label, node_id in symbols.items():
        token = normalize_token(label)
        if token not in by_token:
            raise errors.MissingLabel(label)
        vectors[node_id] = by_token[token]
    return AttributeTable(vectors)


def save_embeddings(path, table, names):
    """Write the table in word2vec text layout; ``names`` maps id -> label."""
    ids = table.ids()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(ids)} {table.dim}\n")
        for node_id in ids:
            token = normalize_token(names[node_id])
            values = " ".join(repr(float(x)) for x in table[node_id])
            fh.write(f"{token} {values}\n")
