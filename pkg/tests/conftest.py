import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hzsl.hierarchy import build_from_edges


@pytest.fixture
def chain3():
    """root -> A -> B."""
    return build_from_edges([("A", "root"), ("B", "A")])


@pytest.fixture
def five_node():
    """Five nodes, hence five root-to-node paths: root with two children,
    one of which has two children of its own."""
    return build_from_edges([("A", "root"), ("B", "root"), ("C", "A"), ("D", "A")])
