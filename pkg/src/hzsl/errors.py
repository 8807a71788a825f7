"""Exception types raised across the toolkit.

Every contract violation maps to a named exception so callers (and the CLI)
can distinguish validation failures from numerical-check failures. All of
them derive from :class:`HzslError`.
"""


class HzslError(Exception):
    """Base class for all toolkit errors."""


# ---------------------------------------------------------------------------
# hierarchy construction / queries


class MultipleParents(HzslError):
    def __init__(self, node):
        self.node = node
        super().__init__(f"node {node!r} has more than one parent")


class CycleDetected(HzslError):
    def __init__(self, nodes):
        self.nodes = tuple(nodes)
        super().__init__(f"cycle detected among nodes {sorted(self.nodes)!r}")


class MultipleRoots(HzslError):
    def __init__(self, roots):
        self.roots = tuple(roots)
        super().__init__(f"multiple roots: {sorted(self.roots)!r}")


class Disconnected(HzslError):
    def __init__(self, node):
        self.node = node
        super().__init__(f"node {node!r} is not reachable from the root")


class UnknownKeepLabel(HzslError):
    def __init__(self, label):
        self.label = label
        super().__init__(f"keep-set label {label!r} is not a graph node")


class NoArborescence(HzslError):
    def __init__(self, unreachable):
        self.unreachable = tuple(unreachable)
        super().__init__(
            f"no spanning arborescence: unreachable nodes {sorted(self.unreachable)!r}"
        )


class LevelBelowNode(HzslError):
    def __init__(self, node, level):
        self.node = node
        self.level = level
        super().__init__(f"node {node!r} sits above level {level}")


# ---------------------------------------------------------------------------
# attribute tables / embeddings


class MissingLabel(HzslError):
    def __init__(self, label):
        self.label = label
        super().__init__(f"no embedding for label {label!r}")


class DimensionMismatch(HzslError):
    def __init__(self, detail):
        super().__init__(f"dimension mismatch: {detail}")


class MalformedHeader(HzslError):
    def __init__(self, detail):
        super().__init__(f"malformed embedding header: {detail}")


class ZeroVector(HzslError):
    def __init__(self):
        super().__init__("cosine similarity is undefined for a zero vector")


# ---------------------------------------------------------------------------
# base scorers


class LabelOutsideTrainSet(HzslError):
    def __init__(self, label):
        self.label = label
        super().__init__(f"label {label!r} is outside the training class set")


class EmptyDataset(HzslError):
    def __init__(self):
        super().__init__("dataset is empty")


class MissingAttribute(HzslError):
    def __init__(self, label):
        self.label = label
        super().__init__(f"no attribute vector for candidate {label!r}")


class DegenerateZ(HzslError):
    def __init__(self):
        super().__init__("selected class probabilities sum to zero")


# ---------------------------------------------------------------------------
# tree model


class NonFiniteEnergy(HzslError):
    def __init__(self):
        super().__init__("path energies must be finite")


class UnknownLabel(HzslError):
    def __init__(self, label):
        self.label = label
        super().__init__(f"label {label!r} is not a hierarchy node")


class EmptyLevel(HzslError):
    def __init__(self, level):
        self.level = level
        super().__init__(f"no nodes at level {level}")


class EmptyCandidates(HzslError):
    def __init__(self):
        super().__init__("candidate set is empty")


class CandidateAboveLevel(HzslError):
    def __init__(self, node, level):
        self.node = node
        self.level = level
        super().__init__(f"candidate {node!r} sits above level {level}")


# ---------------------------------------------------------------------------
# utilities


class DegenerateTree(HzslError):
    def __init__(self):
        super().__init__("tree diameter is zero; path-length utility undefined")


class EmptyList(HzslError):
    def __init__(self):
        super().__init__("cannot average over an empty prediction list")


# ---------------------------------------------------------------------------
# data files / CLI


class ParseError(HzslError):
    def __init__(self, path, lineno, detail):
        self.path = str(path)
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {detail}")


class CrossFileInconsistency(HzslError):
    def __init__(self, detail):
        super().__init__(f"inconsistent dataset files: {detail}")


class ConfigInvalid(HzslError):
    def __init__(self, detail):
        super().__init__(f"invalid configuration: {detail}")


class EmptySplit(HzslError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"split {name!r} is empty or missing")


class MissingPrerequisiteCheckpoint(HzslError):
    def __init__(self, kind, path):
        self.kind = kind
        self.path = str(path)
        super().__init__(f"required {kind} checkpoint not found at {path}")


class FingerprintMismatch(HzslError):
    def __init__(self, expected, found):
        self.expected = expected
        self.found = found
        super().__init__(
            f"hierarchy fingerprint mismatch: checkpoint {found} vs dataset {expected}"
        )
