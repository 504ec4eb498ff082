from pathlib import Path

import pytest

from src.check_service import load_workspace
from src.config import CORPUS_DIR
from src.frontend.elaborate import Workspace
from src.kernel.extension import Context
from src.kernel.steps import AddPrimitiveEdge, AddPrimitiveNode, AddPullback, AddTerminal

OB_SOURCE = """
context Ob
  node X
end
"""

COSPAN_SOURCE = """
context Cospan
  node A
  node B
  node C
  edge f : A -> C
  edge g : B -> C
  pullback P[p1, p, p2] = pb(f, g)
end
"""


@pytest.fixture
def corpus_dir() -> Path:
    return CORPUS_DIR


@pytest.fixture
def corpus():
    """Elaborated corpus documents by file stem."""
    def load(stem: str) -> Workspace:
        return load_workspace((CORPUS_DIR / f"{stem}.auk").read_text(encoding="utf-8"))
    return load


@pytest.fixture
def ob() -> Workspace:
    return load_workspace(OB_SOURCE)


@pytest.fixture
def cospan() -> Workspace:
    return load_workspace(COSPAN_SOURCE)


# kernel contexts built from steps: node indices follow declaration order,
# each node is followed by its identity edge


@pytest.fixture
def ob_ctx() -> Context:
    return Context(steps=(AddPrimitiveNode(),))


@pytest.fixture
def arrow_ctx() -> Context:
    """X, Y and f: X -> Y; f is edge 2."""
    return Context(steps=(AddPrimitiveNode(), AddPrimitiveNode(), AddPrimitiveEdge(dom=0, cod=1)))


@pytest.fixture
def cospan_ctx() -> Context:
    """A, B, C with f: A -> C (edge 3), g: B -> C (edge 4) and their pullback (node 3)."""
    return Context(steps=(
        AddPrimitiveNode(), AddPrimitiveNode(), AddPrimitiveNode(),
        AddPrimitiveEdge(dom=0, cod=2), AddPrimitiveEdge(dom=1, cod=2),
        AddPullback(u1=3, u2=4),
    ))


@pytest.fixture
def terminals_ctx() -> Context:
    return Context(steps=(AddTerminal(), AddTerminal()))
