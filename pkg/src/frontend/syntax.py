"""Syntax tree of `.auk` documents. Names are surface only; elaboration maps them to indices."""
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field


class _Node(BaseModel):
    model_config = ConfigDict(frozen=True)


# references -----------------------------------------------------------------


class NameRef(_Node):
    kind: Literal["name"] = "name"
    name: str


class IdRef(_Node):
    kind: Literal["id"] = "id"
    node: str


class TriRef(_Node):
    kind: Literal["tri"] = "tri"
    l: "EdgeRef"
    r: "EdgeRef"
    c: "EdgeRef"


EdgeRef = Annotated[Union[NameRef, IdRef], Field(discriminator="kind")]
Ref = Annotated[Union[NameRef, IdRef, TriRef], Field(discriminator="kind")]
TriRef.model_rebuild()


# model values ---------------------------------------------------------------


class Atom(_Node):
    kind: Literal["atom"] = "atom"
    value: Union[int, str]


class PairValue(_Node):
    kind: Literal["pair"] = "pair"
    first: "Value"
    second: "Value"


class ListValue(_Node):
    kind: Literal["list"] = "list"
    items: tuple["Value", ...] = ()


class Numeral(_Node):
    """nat(n): the list of n points."""

    kind: Literal["nat"] = "nat"
    n: int


Value = Annotated[Union[Atom, PairValue, ListValue, Numeral], Field(discriminator="kind")]
PairValue.model_rebuild()
ListValue.model_rebuild()


# block lines ----------------------------------------------------------------


class NodeLine(_Node):
    kind: Literal["node"] = "node"
    name: str


class EdgeLine(_Node):
    kind: Literal["edge"] = "edge"
    name: str
    dom: str
    cod: str


class CommLine(_Node):
    kind: Literal["comm"] = "comm"
    l: EdgeRef
    r: EdgeRef
    c: EdgeRef


class TerminalLine(_Node):
    kind: Literal["terminal"] = "terminal"
    name: str


class InitialLine(_Node):
    kind: Literal["initial"] = "initial"
    name: str


class PullbackLine(_Node):
    """pullback P[p1, p, p2] = pb(u1, u2)"""

    kind: Literal["pullback"] = "pullback"
    name: str
    parts: tuple[str, str, str]
    u1: EdgeRef
    u2: EdgeRef


class PushoutLine(_Node):
    """pushout Q[j1, j, j2] = po(u1, u2)"""

    kind: Literal["pushout"] = "pushout"
    name: str
    parts: tuple[str, str, str]
    u1: EdgeRef
    u2: EdgeRef


class ListLine(_Node):
    """list L[T, P, eps, cons, p1, p, p2, bA, bL] = list(A)"""

    kind: Literal["list"] = "list"
    name: str
    parts: tuple[str, str, str, str, str, str, str, str, str]
    a: str


class FieldArg(_Node):
    name: str
    value: Ref


class RuleLine(_Node):
    """RuleName field=ref ... [as n1, n2]"""

    kind: Literal["rule"] = "rule"
    rule: str
    fields: tuple[FieldArg, ...] = ()
    names: tuple[str, ...] = ()


class ListRecLine(_Node):
    """listrec r = rec(L, y, g)"""

    kind: Literal["listrec"] = "listrec"
    name: str
    lst: str
    y: EdgeRef
    g: EdgeRef


ContextLine = Annotated[
    Union[NodeLine, EdgeLine, CommLine, TerminalLine, InitialLine, PullbackLine, PushoutLine, ListLine],
    Field(discriminator="kind"),
]
EqLine = Annotated[
    Union[TerminalLine, InitialLine, PullbackLine, PushoutLine, ListLine, RuleLine, ListRecLine],
    Field(discriminator="kind"),
]


class Maplet(_Node):
    source: EdgeRef
    target: EdgeRef


class Entry(_Node):
    """An element, or `key |-> value` in a table."""

    key: Value
    value: Optional[Value] = None


class AssignLine(_Node):
    kind: Literal["assign"] = "assign"
    name: str
    entries: tuple[Entry, ...] = ()


class RenameLine(_Node):
    kind: Literal["rename"] = "rename"
    name: str
    entries: tuple[Entry, ...] = ()


class QueryLine(_Node):
    kind: Literal["eval"] = "eval"
    edge: str
    value: Value


ModelLine = Annotated[Union[AssignLine, RenameLine, QueryLine], Field(discriminator="kind")]


# declarations ---------------------------------------------------------------


class ContextBlock(_Node):
    kind: Literal["context"] = "context"
    name: str
    lines: tuple[ContextLine, ...] = ()


class ContextExpr(_Node):
    """context C = arrow(D) | product(D, E) | chain(D, n)"""

    kind: Literal["context_expr"] = "context_expr"
    name: str
    op: Literal["arrow", "product", "chain"]
    args: tuple[str, ...]
    n: Optional[int] = None


class EqExtBlock(_Node):
    kind: Literal["eqext"] = "eqext"
    name: str
    over: str
    lines: tuple[EqLine, ...] = ()


class HomBlock(_Node):
    kind: Literal["hom"] = "hom"
    name: str
    source: str
    target: str
    lines: tuple[Maplet, ...] = ()


class MapDecl(_Node):
    """map M : T0 -> T1 = (E, h); `id` for an empty extension or identity hom."""

    kind: Literal["map"] = "map"
    name: str
    source: str
    target: str
    ext: Optional[str] = None
    hom: Optional[str] = None


class ComposeDecl(_Node):
    """map M = compose(M1, M2): M1 followed by M2."""

    kind: Literal["compose"] = "compose"
    name: str
    first: str
    second: str


class CellDecl(_Node):
    kind: Literal["cell"] = "cell"
    name: str
    source: str
    target: str
    ext: Optional[str] = None
    hom: str


class ModelBlock(_Node):
    kind: Literal["model"] = "model"
    name: str
    of: str
    using: Optional[str] = None
    lines: tuple[ModelLine, ...] = ()


class ClaimDecl(_Node):
    """claim M0 == M1: the two maps are objectively equal."""

    kind: Literal["claim"] = "claim"
    left: str
    right: str


Decl = Annotated[
    Union[ContextBlock, ContextExpr, EqExtBlock, HomBlock, MapDecl, ComposeDecl, CellDecl, ModelBlock, ClaimDecl],
    Field(discriminator="kind"),
]


class SourceDocument(_Node):
    decls: tuple[Decl, ...] = ()

    def names(self) -> list[str]:
        return [d.name for d in self.decls if not isinstance(d, ClaimDecl)]

    def get(self, name: str) -> Optional[Decl]:
        for d in self.decls:
            if not isinstance(d, ClaimDecl) and d.name == name:
                return d
        return None
