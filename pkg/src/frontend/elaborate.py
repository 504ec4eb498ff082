"""Elaboration of `.auk` syntax into kernel objects.

Every declaration is resolved in order against the declarations before it.
Names are surface only: each sketch carries a `Names` table from node and edge
names to indices. Identity edges are never named and are written `id(X)`;
generated contexts derive their names from their arguments.
"""
import logging
from typing import Any, Optional, Union

from pydantic import BaseModel, ConfigDict

from src.config import get_settings
from src.frontend.syntax import (
    AssignLine, Atom, CellDecl, ClaimDecl, CommLine, ComposeDecl, ContextBlock, ContextExpr, EdgeLine, EqExtBlock, HomBlock, IdRef,
    InitialLine, ListLine, ListRecLine, ListValue, MapDecl, ModelBlock, NameRef, NodeLine, Numeral, PairValue,
    PullbackLine, PushoutLine, QueryLine, RenameLine, RuleLine, SourceDocument, TerminalLine, TriRef,
)
from src.kernel.arrows import chain_context, layout_of, product_context
from src.kernel.aupres import TermSession
from src.kernel.conmap import ContextMap, TwoCell, compose_map, two_cell_from_hom
from src.kernel.errors import ParseError, ShapeError
from src.kernel.extension import Context, EqExtension
from src.kernel.sketch import Sketch, SketchDraft, SketchHom, Sort, complete_hom, identity_hom, same_sketch
from src.kernel.steps import (
    AddCommutativity, AddInitial, AddListObject, AddPrimitiveEdge, AddPrimitiveNode, AddPullback, AddPushout,
    AddTerminal, Delta, RULE_NAMES, RULE_STEPS, Step,
)
from src.setmodel.carriers import POINT, SetObj
from src.setmodel.model import PrimitiveAssignment, SetModel, extend_along_eqext, interpret_context
from src.setmodel.strictify import transport_model

logger = logging.getLogger("aukernel")


class Names:
    """Node and edge names of one sketch, in both directions."""

    def __init__(self) -> None:
        self.nodes: dict[str, int] = {}
        self.edges: dict[str, int] = {}
        self.node_names: dict[int, str] = {}
        self.edge_names: dict[int, str] = {}

    def _free(self, name: str) -> None:
        if name in self.nodes or name in self.edges:
            raise ParseError(f"name {name!r} is already declared", rule="names")

    def add_node(self, name: str, x: int) -> None:
        self._free(name)
        self.nodes[name] = x
        self.node_names[x] = name

    def add_edge(self, name: str, u: int) -> None:
        self._free(name)
        self.edges[name] = u
        self.edge_names[u] = name

    def node(self, name: str) -> int:
        if name not in self.nodes:
            raise ParseError(f"unknown node {name!r}", rule="names")
        return self.nodes[name]

    def edge(self, ref: Union[NameRef, IdRef], sk) -> int:
        if isinstance(ref, IdRef):
            return sk.ident(self.node(ref.node))
        if ref.name not in self.edges:
            raise ParseError(f"unknown edge {ref.name!r}", rule="names")
        return self.edges[ref.name]

    def copy(self) -> "Names":
        other = Names()
        other.nodes, other.edges = dict(self.nodes), dict(self.edges)
        other.node_names, other.edge_names = dict(self.node_names), dict(self.edge_names)
        return other

    def shifted(self, node_offset: int, edge_offset: int, suffix: str) -> "Names":
        other = Names()
        for name, x in self.nodes.items():
            other.add_node(f"{name}{suffix}", x + node_offset)
        for name, u in self.edges.items():
            other.add_edge(f"{name}{suffix}", u + edge_offset)
        return other

    def merge(self, other: "Names") -> None:
        for name, x in other.nodes.items():
            self.add_node(name, x)
        for name, u in other.edges.items():
            self.add_edge(name, u)

    def describe_node(self, x: int) -> str:
        return self.node_names.get(x, f"#{x}")

    def describe_edge(self, u: int, sk) -> str:
        if u in self.edge_names:
            return self.edge_names[u]
        if sk.is_identity(u):
            return f"id({self.describe_node(sk.dom(u))})"
        return f"#{u}"


class Scope(BaseModel):
    """A named sketch: a context, or the extended context of an eq-extension."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: str
    context: Context
    names: Names
    ext: Optional[EqExtension] = None
    over: Optional[str] = None

    @property
    def apex(self) -> Sketch:
        return self.context.apex


class ModelEntry(BaseModel):
    """An interpreted model: `base` of the declared context, `model` of its sketch after `using`."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: str
    of: str
    scope: Scope
    base: SetModel
    model: SetModel
    perturbed: Optional[SetModel] = None
    queries: tuple[tuple[str, int, Any], ...] = ()


class Workspace:
    """Everything declared by one document, by name."""

    def __init__(self) -> None:
        self.scopes: dict[str, Scope] = {}
        self.homs: dict[str, tuple[str, str, SketchHom]] = {}
        self.maps: dict[str, ContextMap] = {}
        self.cells: dict[str, TwoCell] = {}
        self.models: dict[str, ModelEntry] = {}
        self.claims: list[tuple[str, str]] = []
        self.order: list[tuple[str, str]] = []

    def declare(self, kind: str, name: str) -> None:
        taken = (self.scopes, self.homs, self.maps, self.cells, self.models)
        if any(name in table for table in taken):
            raise ParseError(f"{name!r} is declared twice", rule=kind)
        self.order.append((kind, name))

    def scope(self, name: str) -> Scope:
        if name not in self.scopes:
            raise ParseError(f"unknown context {name!r}", rule="names")
        return self.scopes[name]

    def context(self, name: str) -> Context:
        return self.scope(name).context

    def map(self, name: str) -> ContextMap:
        if name not in self.maps:
            raise ParseError(f"unknown map {name!r}", rule="names")
        return self.maps[name]

    def cell(self, name: str) -> TwoCell:
        if name not in self.cells:
            raise ParseError(f"unknown 2-cell {name!r}", rule="names")
        return self.cells[name]

    def model(self, name: str) -> ModelEntry:
        if name not in self.models:
            raise ParseError(f"unknown model {name!r}", rule="names")
        return self.models[name]


# ---------------------------------------------------------------------------
# universal-introduction lines, shared by contexts and eq-extensions


def _universal_step(line, names: Names, sk) -> Step:
    if isinstance(line, TerminalLine):
        return AddTerminal()
    if isinstance(line, InitialLine):
        return AddInitial()
    if isinstance(line, PullbackLine):
        return AddPullback(u1=names.edge(line.u1, sk), u2=names.edge(line.u2, sk))
    if isinstance(line, PushoutLine):
        return AddPushout(u1=names.edge(line.u1, sk), u2=names.edge(line.u2, sk))
    if isinstance(line, ListLine):
        return AddListObject(a=names.node(line.a))
    raise ParseError(f"{line.kind} is not a universal introduction", rule=line.kind)


def _name_universal(line, delta: Delta, names: Names) -> None:
    if isinstance(line, (TerminalLine, InitialLine)):
        names.add_node(line.name, delta.n[0])
    elif isinstance(line, (PullbackLine, PushoutLine)):
        names.add_node(line.name, delta.n[0])
        for part, u in zip(line.parts, delta.e[:3]):
            names.add_edge(part, u)
    else:
        t_name, p_name, *edge_names = line.parts
        t, lst, p = delta.n
        names.add_node(t_name, t)
        names.add_node(line.name, lst)
        names.add_node(p_name, p)
        for part, u in zip(edge_names, delta.e[:7]):
            names.add_edge(part, u)


def _apply(step: Step, sk: SketchDraft, label: str) -> Delta:
    step.check(sk)
    delta = step.apply(sk)
    logger.debug(f"{label}: {step.kind}")
    return delta


# ---------------------------------------------------------------------------
# contexts


def elaborate_context_block(block: ContextBlock) -> Scope:
    names = Names()
    sk = SketchDraft()
    steps: list[Step] = []
    for line in block.lines:
        if isinstance(line, NodeLine):
            step = AddPrimitiveNode()
        elif isinstance(line, EdgeLine):
            step = AddPrimitiveEdge(dom=names.node(line.dom), cod=names.node(line.cod))
        elif isinstance(line, CommLine):
            step = AddCommutativity(l=names.edge(line.l, sk), r=names.edge(line.r, sk), c=names.edge(line.c, sk))
        else:
            step = _universal_step(line, names, sk)
        delta = _apply(step, sk, f"context {block.name}")
        steps.append(step)
        if isinstance(line, NodeLine):
            names.add_node(line.name, delta.n[0])
        elif isinstance(line, EdgeLine):
            names.add_edge(line.name, delta.e[0])
        elif not isinstance(line, CommLine):
            _name_universal(line, delta, names)
    return Scope(name=block.name, context=Context(steps=tuple(steps)), names=names)


def chain_names(names: Names, ctx: Context, n: int) -> Names:
    """Copy k of X is X_k; the level-l edge of X is th_X at level 1 and th{l}_X above."""
    lay = layout_of(ctx, n)
    out = Names()
    for k in range(n + 1):
        out.merge(names.shifted(lay.copy(k, Sort.NODE, 0), lay.copy(k, Sort.EDGE, 0), f"_{k}"))
    for level in range(1, n + 1):
        prefix = "th" if level == 1 else f"th{level}"
        for name, x in names.nodes.items():
            out.add_edge(f"{prefix}_{name}", lay.theta_node(level, x))
        for name, u in names.edges.items():
            out.add_edge(f"{prefix}_{name}", lay.theta_edge(level, u))
    return out


def elaborate_context_expr(decl: ContextExpr, ws: Workspace) -> Scope:
    if decl.op == "product":
        left, right = ws.scope(decl.args[0]), ws.scope(decl.args[1])
        ctx = product_context(left.context, right.context)
        names = left.names.shifted(0, 0, "_0")
        names.merge(right.names.shifted(left.apex.n_count, left.apex.e_count, "_1"))
        return Scope(name=decl.name, context=ctx, names=names)
    arg = ws.scope(decl.args[0])
    n = 1 if decl.op == "arrow" else decl.n
    if n < 1:
        raise ParseError("chain length must be at least 1", rule="chain")
    return Scope(name=decl.name, context=chain_context(arg.context, n), names=chain_names(arg.names, arg.context, n))


# ---------------------------------------------------------------------------
# eq-extensions


def _universal_index(sort: Sort, x: int, sk) -> Optional[int]:
    if sort == Sort.TERMINAL:
        return sk.terminal_of(x)
    if sort == Sort.INITIAL:
        return sk.initial_of(x)
    if sort == Sort.PULLBACK:
        return next((w for w in range(len(sk.upb_tri1)) if sk.pullback_parts(w)["apex"] == x), None)
    if sort == Sort.PUSHOUT:
        return next((w for w in range(len(sk.upo_tri1)) if sk.pushout_parts(w)["apex"] == x), None)
    return next((w for w in range(len(sk.ul_pb)) if sk.list_parts(w)["list"] == x), None)


def _resolve_field(sort: Sort, ref, names: Names, sk, rule: str) -> int:
    if sort == Sort.TRI:
        if not isinstance(ref, TriRef):
            raise ParseError("commutativity fields are written (l . r = c)", rule=rule)
        shape = (names.edge(ref.l, sk), names.edge(ref.r, sk), names.edge(ref.c, sk))
        found = sk.find_tri(*shape)
        if found is None:
            raise ParseError(f"no commutativity {shape} in the current sketch", rule=rule)
        return found
    if isinstance(ref, TriRef):
        raise ParseError(f"a {sort.value} field cannot take a commutativity", rule=rule)
    if sort == Sort.EDGE:
        return names.edge(ref, sk)
    if isinstance(ref, IdRef):
        raise ParseError(f"a {sort.value} field takes a node name", rule=rule)
    x = names.node(ref.name)
    if sort == Sort.NODE:
        return x
    found = _universal_index(sort, x, sk)
    if found is None:
        raise ParseError(f"node {ref.name!r} is not the subject of a {sort.name.lower()} universal", rule=rule)
    return found


def rule_step(line: RuleLine, names: Names, sk) -> Step:
    cls = RULE_NAMES.get(line.rule)
    if cls is None or cls not in RULE_STEPS:
        raise ParseError(f"unknown equivalence rule {line.rule!r}", rule=line.rule)
    given = {f.name: f.value for f in line.fields}
    extra = sorted(set(given) - set(cls.refs))
    if extra:
        raise ParseError(f"{line.rule} has no field {extra[0]!r}", rule=line.rule)
    missing = [name for name in cls.refs if name not in given]
    if missing:
        raise ParseError(f"{line.rule} is missing field {missing[0]!r}", rule=line.rule)
    return cls(**{name: _resolve_field(sort, given[name], names, sk, line.rule) for name, sort in cls.refs.items()})


def _name_fresh(line: RuleLine, delta: Delta, names: Names, sk) -> None:
    fresh = [("node", x) for x in delta.n] + [("edge", u) for u in delta.e if not sk.is_identity(u)]
    if len(line.names) > len(fresh):
        raise ParseError(f"{line.rule} adjoins {len(fresh)} elements, {len(line.names)} names given", rule=line.rule)
    for name, (kind, i) in zip(line.names, fresh):
        if kind == "node":
            names.add_node(name, i)
        else:
            names.add_edge(name, i)


def elaborate_eqext(block: EqExtBlock, ws: Workspace) -> Scope:
    over = ws.scope(block.over)
    names = over.names.copy()
    session = TermSession(over.context)
    b = session.builder
    for line in block.lines:
        label = f"eqext {block.name}"
        if isinstance(line, RuleLine):
            step = rule_step(line, names, b.sk)
            delta = b.add(step)
            _name_fresh(line, delta, names, b.sk)
        elif isinstance(line, ListRecLine):
            lst = names.node(line.lst)
            r = session.recursor(lst, names.edge(line.y, b.sk), names.edge(line.g, b.sk))
            names.add_edge(line.name, r)
        else:
            delta = b.add(_universal_step(line, names, b.sk))
            _name_universal(line, delta, names)
        logger.debug(f"{label}: {line.kind}")
    ext = session.extension()
    return Scope(name=block.name, context=over.context.extended(ext), names=names, ext=ext, over=block.over)


# ---------------------------------------------------------------------------
# homs, maps and cells


def elaborate_hom(block: HomBlock, ws: Workspace) -> SketchHom:
    """Maplets first, then same-name defaults, identities follow their nodes."""
    src, dst = ws.scope(block.source), ws.scope(block.target)
    s, t = src.apex, dst.apex
    node_map: dict[int, int] = {}
    edge_map: dict[int, int] = {}
    for m in block.lines:
        if isinstance(m.source, NameRef) and m.source.name in src.names.nodes:
            if not isinstance(m.target, NameRef):
                raise ParseError(f"node {m.source.name!r} must map to a node", rule="hom")
            node_map[src.names.node(m.source.name)] = dst.names.node(m.target.name)
        else:
            edge_map[src.names.edge(m.source, s)] = dst.names.edge(m.target, t)
    for name, x in src.names.nodes.items():
        if x not in node_map and name in dst.names.nodes:
            node_map[x] = dst.names.nodes[name]
    missing = [src.names.describe_node(x) for x in range(s.n_count) if x not in node_map]
    if missing:
        raise ParseError(f"hom {block.name}: no image for node {missing[0]!r}", rule="hom")
    for x in range(s.n_count):
        edge_map.setdefault(s.ident(x), t.ident(node_map[x]))
    for name, u in src.names.edges.items():
        if u not in edge_map and name in dst.names.edges:
            edge_map[u] = dst.names.edges[name]
    missing = [src.names.describe_edge(u, s) for u in range(s.e_count) if u not in edge_map]
    if missing:
        raise ParseError(f"hom {block.name}: no image for edge {missing[0]!r}", rule="hom")
    hom = complete_hom(s, t, [node_map[x] for x in range(s.n_count)], [edge_map[u] for u in range(s.e_count)])
    if hom is None:
        raise ShapeError(f"hom {block.name} does not preserve commutativities and universals", rule="hom")
    return hom


def _map_parts(ws: Workspace, source: str, target: str, ext_name: Optional[str],
               hom_name: Optional[str], into: Optional[Context] = None) -> tuple[EqExtension, SketchHom]:
    """The eq-extension over `source` and the hom into its apex named by a map or cell declaration."""
    src = ws.scope(source)
    if ext_name is None:
        ext = EqExtension(base=src.apex)
    else:
        e = ws.scope(ext_name)
        if e.ext is None or not same_sketch(e.ext.base, src.apex):
            raise ShapeError(f"{ext_name} is not an eq-extension over {source}", rule="map")
        ext = e.ext
    domain = into if into is not None else ws.context(target)
    if hom_name is None:
        if not same_sketch(domain.apex, ext.apex):
            raise ShapeError(f"{target} is not the apex of the map's eq-extension", rule="map")
        return ext, identity_hom(ext.apex)
    if hom_name not in ws.homs:
        raise ParseError(f"unknown hom {hom_name!r}", rule="names")
    _, _, hom = ws.homs[hom_name]
    if not same_sketch(hom.source, domain.apex) or not same_sketch(hom.target, ext.apex):
        raise ShapeError(f"hom {hom_name} does not run from {target} into the apex of the eq-extension", rule="map")
    return ext, hom


def elaborate_map(decl: MapDecl, ws: Workspace) -> ContextMap:
    ext, hom = _map_parts(ws, decl.source, decl.target, decl.ext, decl.hom)
    return ContextMap(source=ws.context(decl.source), target=ws.context(decl.target), ext=ext, hom=hom)


def elaborate_cell(decl: CellDecl, ws: Workspace) -> TwoCell:
    target = ws.context(decl.target)
    ext, hom = _map_parts(ws, decl.source, decl.target, decl.ext, decl.hom, into=chain_context(target, 1))
    return two_cell_from_hom(ws.context(decl.source), target, ext, hom)


# ---------------------------------------------------------------------------
# models


def to_python(value) -> Any:
    if isinstance(value, Atom):
        return value.value
    if isinstance(value, PairValue):
        return (to_python(value.first), to_python(value.second))
    if isinstance(value, ListValue):
        return tuple(to_python(v) for v in value.items)
    if isinstance(value, Numeral):
        return (POINT,) * value.n
    raise ParseError(f"not a value: {value!r}")


def to_value(x: Any, carrier: Optional[SetObj] = None):
    """Surface value of an element; the carrier decides between lists and pairs."""
    kind = carrier.kind if carrier is not None else None
    if kind == "list":
        if all(v == POINT for v in x):
            return Numeral(n=len(x))
        return ListValue(items=tuple(to_value(v, carrier.base) for v in x))
    if kind == "pullback":
        return PairValue(first=to_value(x[0], carrier.left.dom), second=to_value(x[1], carrier.right.dom))
    if kind == "pushout":
        side = carrier.left.cod if x[0] == 1 else carrier.right.cod
        return PairValue(first=to_value(x[0]), second=to_value(x[1], side))
    if isinstance(x, tuple):
        if len(x) == 2:
            return PairValue(first=to_value(x[0]), second=to_value(x[1]))
        return ListValue(items=tuple(to_value(v) for v in x))
    return Atom(value=x)


def _primitive_assignment(block: ModelBlock, scope: Scope) -> PrimitiveAssignment:
    nodes: dict[int, tuple] = {}
    edges: dict[int, dict] = {}
    for line in block.lines:
        if not isinstance(line, AssignLine):
            continue
        if line.name in scope.names.nodes:
            if any(e.value is not None for e in line.entries):
                raise ParseError(f"node {line.name!r} takes a set of elements, not a table", rule="model")
            nodes[scope.names.nodes[line.name]] = tuple(to_python(e.key) for e in line.entries)
        elif line.name in scope.names.edges:
            if any(e.value is None for e in line.entries):
                raise ParseError(f"edge {line.name!r} takes a table a |-> b", rule="model")
            edges[scope.names.edges[line.name]] = {to_python(e.key): to_python(e.value) for e in line.entries}
        else:
            raise ParseError(f"model {block.name}: unknown name {line.name!r}", rule="model")
    return PrimitiveAssignment(nodes=nodes, edges=edges)


def elaborate_model(block: ModelBlock, ws: Workspace) -> ModelEntry:
    scope = ws.scope(block.of)
    bound = get_settings().list_bound
    base = interpret_context(scope.context, _primitive_assignment(block, scope), bound)
    renamings: dict[int, dict] = {}
    for line in block.lines:
        if isinstance(line, RenameLine):
            if any(e.value is None for e in line.entries):
                raise ParseError(f"rename {line.name!r} takes a table a |-> b", rule="model")
            renamings[scope.names.node(line.name)] = {to_python(e.key): to_python(e.value) for e in line.entries}
    perturbed = transport_model(base, renamings) if renamings else None
    model, names = base, scope.names
    if block.using is not None:
        e = ws.scope(block.using)
        if e.ext is None or e.over != block.of:
            raise ShapeError(f"{block.using} is not an eq-extension over {block.of}", rule="model")
        model, names = extend_along_eqext(base, e.ext, bound), e.names
        scope = e
    queries = []
    for line in block.lines:
        if isinstance(line, QueryLine):
            queries.append((line.edge, names.edge(NameRef(name=line.edge), model.sketch), to_python(line.value)))
    return ModelEntry(name=block.name, of=block.of, scope=scope, base=base, model=model,
                      perturbed=perturbed, queries=tuple(queries))


# ---------------------------------------------------------------------------
# documents


def elaborate(doc: SourceDocument) -> Workspace:
    ws = Workspace()
    for decl in doc.decls:
        if isinstance(decl, ClaimDecl):
            ws.map(decl.left)
            ws.map(decl.right)
            ws.claims.append((decl.left, decl.right))
            continue
        ws.declare(decl.kind, decl.name)
        if isinstance(decl, ContextBlock):
            ws.scopes[decl.name] = elaborate_context_block(decl)
        elif isinstance(decl, ContextExpr):
            ws.scopes[decl.name] = elaborate_context_expr(decl, ws)
        elif isinstance(decl, EqExtBlock):
            ws.scopes[decl.name] = elaborate_eqext(decl, ws)
        elif isinstance(decl, HomBlock):
            ws.homs[decl.name] = (decl.source, decl.target, elaborate_hom(decl, ws))
        elif isinstance(decl, MapDecl):
            ws.maps[decl.name] = elaborate_map(decl, ws)
        elif isinstance(decl, ComposeDecl):
            ws.maps[decl.name] = compose_map(ws.map(decl.first), ws.map(decl.second))
        elif isinstance(decl, CellDecl):
            ws.cells[decl.name] = elaborate_cell(decl, ws)
        elif isinstance(decl, ModelBlock):
            ws.models[decl.name] = elaborate_model(decl, ws)
        logger.debug(f"elaborated {decl.kind} {decl.name}")
    logger.info(f"✓ elaborated {len(ws.order)} declarations")
    return ws
