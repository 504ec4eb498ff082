"""The term model AU⟨𝕋⟩ of a context.

Objects and morphisms are nodes and edges of eq-extensions of the context apex,
considered up to objective equality. Nothing is quotiented: elements are kept as
representatives, and every operation first aligns its arguments over a common
refinement of their extensions (left argument first) and then appends the
steps of the AU construction. `TermSession` keeps one growing extension so that
derived constructions share their prefix.
"""
import logging
from typing import Optional, Sequence, Union

from pydantic import BaseModel, ConfigDict

from src.config import get_settings
from src.kernel.builder import DerivationBuilder
from src.kernel.conmap import ContextMap
from src.kernel.equiv import common_refinement, is_prefix, refine_pair
from src.kernel.errors import KernelError, MissingWitnessError, ShapeError, UnsupportedConstructionError
from src.kernel.extension import Context, EqExtension
from src.kernel.objeq import Witness, find_object_equality
from src.kernel.sketch import Sort, complete_hom, compose_hom, same_sketch
from src.kernel.steps import (
    AddInitial, AddListObject, AddPullback, AddPushout, AddTerminal, RULE_STEPS, Step, unary_forms,
)

logger = logging.getLogger("aukernel")


class TermObject(BaseModel):
    """A node of apex(ext)."""

    model_config = ConfigDict(frozen=True)

    ext: EqExtension
    node: int

    def model_post_init(self, __context) -> None:
        if not 0 <= self.node < self.ext.apex.n_count:
            raise ShapeError(f"node {self.node} is not in the extension apex")


class TermMorphism(BaseModel):
    """An edge of apex(ext); its endpoints live in the same extension."""

    model_config = ConfigDict(frozen=True)

    ext: EqExtension
    edge: int

    def model_post_init(self, __context) -> None:
        if not 0 <= self.edge < self.ext.apex.e_count:
            raise ShapeError(f"edge {self.edge} is not in the extension apex")

    @property
    def dom(self) -> TermObject:
        return TermObject(ext=self.ext, node=self.ext.apex.dom(self.edge))

    @property
    def cod(self) -> TermObject:
        return TermObject(ext=self.ext, node=self.ext.apex.cod(self.edge))


Term = Union[TermObject, TermMorphism]


def _locate(el: Term) -> tuple[Sort, int]:
    return (Sort.NODE, el.node) if isinstance(el, TermObject) else (Sort.EDGE, el.edge)


def align(elements: Sequence[Term]) -> tuple[EqExtension, list[int]]:
    """Common refinement of the elements' extensions and their translated indices."""
    if not elements:
        raise ShapeError("align: nothing to align")
    refined = elements[0].ext
    homs = [None]
    for el in elements[1:]:
        refined_next, r_old, r_new = refine_pair(refined, el.ext)
        homs = [r_old.eps if h is None else compose_hom(h, r_old.eps) for h in homs] + [r_new.eps]
        refined = refined_next
    indices = []
    for el, h in zip(elements, homs):
        sort, i = _locate(el)
        indices.append(i if h is None else h(sort, i))
    return refined, indices


class TermSession:
    """AU operations over one growing eq-extension of `context.apex`.

    Methods take and return indices into the current apex; `obj` and `mor` wrap
    an index as a term element of the current extension.
    """

    def __init__(self, context: Context, ext: Optional[EqExtension] = None, depth: Optional[int] = None):
        if ext is not None and not same_sketch(ext.base, context.apex):
            raise ShapeError("term session: extension is not over the context")
        self.context = context
        self.builder = DerivationBuilder.continuing(ext) if ext is not None else DerivationBuilder(context.apex)
        self.depth = depth if depth is not None else get_settings().search_depth

    def extension(self) -> EqExtension:
        return self.builder.extension()

    def obj(self, x: int) -> TermObject:
        return TermObject(ext=self.extension(), node=x)

    def mor(self, u: int) -> TermMorphism:
        return TermMorphism(ext=self.extension(), edge=u)

    def adopt(self, el: Term) -> int:
        """Index of `el` in the session, appending its steps when needed."""
        sort, i = _locate(el)
        current = self.extension()
        if is_prefix(el.ext, current):
            return i
        if is_prefix(current, el.ext):
            for step in el.ext.steps[len(current.steps):]:
                self.builder.add(step)
            return i
        _, _, r2 = common_refinement(current, el.ext)
        for step in r2.e2.steps[len(current.steps):]:
            self.builder.add(step)
        return r2.eps(sort, i)

    def _universal(self, kind: str, x: int) -> int:
        sk = self.builder.sk
        if kind == "pullback":
            found = [w for w in range(len(sk.upb_tri1)) if sk.pullback_parts(w)["apex"] == x]
        elif kind == "pushout":
            found = [w for w in range(len(sk.upo_tri1)) if sk.pushout_parts(w)["apex"] == x]
        else:
            found = [w for w in range(len(sk.ul_pb)) if sk.list_parts(w)["list"] == x]
        if not found:
            raise ShapeError(f"node {x} is not a {kind} object")
        return found[0]

    # -- objects ---------------------------------------------------------------

    def terminal(self) -> int:
        """The first terminal node, adjoining one if there is none."""
        sk = self.builder.sk
        if sk.ut_n:
            return sk.ut_n[0]
        return self.builder.add(AddTerminal()).n[0]

    def initial(self) -> int:
        sk = self.builder.sk
        if sk.ui_n:
            return sk.ui_n[0]
        return self.builder.add(AddInitial()).n[0]

    def pullback(self, u1: int, u2: int) -> int:
        delta = self.builder.add(AddPullback(u1=u1, u2=u2))
        return self.builder.sk.pullback_parts(delta.upb[0])["apex"]

    def pushout(self, u1: int, u2: int) -> int:
        delta = self.builder.add(AddPushout(u1=u1, u2=u2))
        return self.builder.sk.pushout_parts(delta.upo[0])["apex"]

    def list_of(self, a: int) -> int:
        delta = self.builder.add(AddListObject(a=a))
        return self.builder.sk.list_parts(delta.ul[0])["list"]

    # -- morphisms ---------------------------------------------------------------

    def compose(self, f: int, g: int) -> int:
        """f then g; an object equality bridges cod(f) and dom(g) when they differ."""
        b = self.builder
        if b.cod(f) == b.dom(g):
            return b.comp_edge(f, g)
        found = find_object_equality(b, b.cod(f), b.dom(g), self.depth)
        if found is None:
            raise MissingWitnessError(
                f"no object equality from node {b.cod(f)} to node {b.dom(g)}", rule="composition",
            )
        return b.comp([f, found[0], g])

    def bang(self, x: int) -> int:
        t = self.terminal()
        return self.builder.terminal_edge(self.builder.sk.terminal_of(t), x)

    def from_initial(self, x: int) -> int:
        z = self.initial()
        return self.builder.initial_edge(self.builder.sk.initial_of(z), x)

    def _agree(self, d: int, target: int) -> int:
        """Rewrite the diagonal of commutativity d to `target`."""
        b = self.builder
        current = b.sk.tri_c[d]
        if current == target:
            return d
        eq = b.prove([current], [target], self.depth)
        if eq is None:
            raise MissingWitnessError(f"edges {current} and {target} are not shown equal", rule="cone")
        return b.rewrite_target(d, eq.tri)

    def pair(self, x: int, v1: int, v2: int) -> int:
        """The fillin into the pullback object x for the cone (v1, v2)."""
        b = self.builder
        w = self._universal("pullback", x)
        parts = b.sk.pullback_parts(w)
        d1 = b.composite(v1, parts["u1"])
        d2 = self._agree(b.composite(v2, parts["u2"]), b.sk.tri_c[d1])
        return b.pullback_fill(w, d1, d2)[0]

    def copair(self, x: int, v1: int, v2: int) -> int:
        """The fillin out of the pushout object x for the cocone (v1, v2)."""
        b = self.builder
        w = self._universal("pushout", x)
        parts = b.sk.pushout_parts(w)
        d1 = b.composite(parts["u1"], v1)
        d2 = self._agree(b.composite(parts["u2"], v2), b.sk.tri_c[d1])
        return b.pushout_fill(w, d1, d2)[0]

    def recursor(self, lst: int, y: int, g: int) -> int:
        """r: L × B -> Y for the list object lst, with y: B -> Y and g: A × Y -> Y."""
        b = self.builder
        w = self._universal("list", lst)
        a = b.sk.list_parts(w)["a"]
        ay = None
        for p in range(len(b.sk.upb_tri1)):
            parts = b.sk.pullback_parts(p)
            if parts["apex"] == b.dom(g) and b.dom(parts["u1"]) == a and b.dom(parts["u2"]) == b.cod(g):
                ay = p
                break
        if ay is None:
            raise ShapeError(f"domain of edge {g} is not a product of the list parameter with its codomain")
        return b.list_recursor(w, y, g, ay)

    def rule(self, step: Step) -> Optional[int]:
        """Append an equivalence rule; the fresh edge, or None when it adjoins none."""
        if not isinstance(step, RULE_STEPS):
            raise UnsupportedConstructionError(f"{step.kind} is not an equivalence rule")
        delta = self.builder.add(step)
        return delta.e[0] if delta.e else None

    # -- arithmetic in AU⟨𝟙⟩ -----------------------------------------------------

    def natural_numbers(self) -> int:
        """ℕ as the list object over the terminal, reusing one already built."""
        b = self.builder
        for w in range(len(b.sk.ul_pb)):
            if b.sk.terminal_of(b.sk.list_parts(w)["a"]) is not None:
                return b.sk.list_parts(w)["list"]
        return self.list_of(self.terminal())

    def addition(self) -> int:
        """ℕ × ℕ -> ℕ: list recursion with y = id and g = cons, i.e. append."""
        b = self.builder
        nat = self.natural_numbers()
        w = self._universal("list", nat)
        parts = b.sk.list_parts(w)
        return b.list_recursor(w, b.ident(nat), parts["cons"], parts["pb"])


# ---------------------------------------------------------------------------
# operations on term elements


def term_compose(ctx: Context, f: TermMorphism, g: TermMorphism, depth: Optional[int] = None) -> TermMorphism:
    ext, (fi, gi) = align([f, g])
    session = TermSession(ctx, ext, depth)
    return session.mor(session.compose(fi, gi))


AU_OPS = (
    "terminal", "initial", "pullback", "pushout", "list", "bang", "from_initial",
    "pair", "copair", "recursor", "compose", "rule",
)


def apply_au_op(ctx: Context, op: str, args: Sequence[Term] = (), step: Optional[Step] = None,
                depth: Optional[int] = None) -> Optional[Term]:
    """Apply an AU construction to term elements; returns the fresh element.

    `rule` appends `step`, whose references are indices of the refined apex of
    `args` (of the context apex when there are none).
    """
    if op not in AU_OPS:
        raise UnsupportedConstructionError(f"unknown AU operation {op!r}")
    if args:
        ext, idx = align(args)
        session = TermSession(ctx, ext, depth)
    else:
        idx = []
        session = TermSession(ctx, depth=depth)
    arity = {"pullback": 2, "pushout": 2, "list": 1, "bang": 1, "from_initial": 1,
             "pair": 3, "copair": 3, "recursor": 3, "compose": 2}
    if op in arity and len(idx) != arity[op]:
        raise ShapeError(f"{op} takes {arity[op]} arguments, got {len(idx)}")
    objects = {"pullback": session.pullback, "pushout": session.pushout, "list": session.list_of}
    morphisms = {"bang": session.bang, "from_initial": session.from_initial, "pair": session.pair,
                 "copair": session.copair, "recursor": session.recursor, "compose": session.compose}
    if op in ("terminal", "initial"):
        # always a fresh universal
        delta = session.builder.add(AddTerminal() if op == "terminal" else AddInitial())
        return session.obj(delta.n[0])
    if op in objects:
        return session.obj(objects[op](*idx))
    if op in morphisms:
        return session.mor(morphisms[op](*idx))
    if step is None:
        raise ShapeError("rule: no step given")
    fresh = session.rule(step)
    return None if fresh is None else session.mor(fresh)


def _unary(sk, a: int, b: int) -> bool:
    return a == b or any(sk.find_tri(*shape) is not None for shape in unary_forms(sk, a, b))


def mor_equal(ctx: Context, f: TermMorphism, g: TermMorphism, derivation: Optional[Sequence[Step]] = None,
              depth: Optional[int] = None) -> bool:
    """Whether f ⊴ g is shown; by replaying `derivation` over the refined extension, else by search.

    Never raises: an ill-formed derivation or unrelated morphisms give False.
    """
    try:
        ext, (fi, gi) = align([f, g])
        b = DerivationBuilder.continuing(ext)
        if (b.dom(fi), b.cod(fi)) != (b.dom(gi), b.cod(gi)):
            return False
        if derivation is not None:
            for step in derivation:
                b.add(step)
            return _unary(b.sk, fi, gi)
        if _unary(b.sk, fi, gi):
            return True
        return b.prove([fi], [gi], depth if depth is not None else get_settings().search_depth) is not None
    except KernelError as exc:
        logger.debug(f"mor_equal: {exc}")
        return False


def object_equality(ctx: Context, x: TermObject, y: TermObject,
                    depth: Optional[int] = None) -> Optional[tuple[TermMorphism, Witness]]:
    """A witnessed object equality x => y, or None when none is found within the depth."""
    try:
        ext, (xi, yi) = align([x, y])
        session = TermSession(ctx, ext, depth)
        found = find_object_equality(session.builder, xi, yi, session.depth)
    except KernelError as exc:
        logger.debug(f"object equality search failed: {exc}")
        return None
    if found is None:
        return None
    return session.mor(found[0]), found[1]


# ---------------------------------------------------------------------------
# models of a context in the term model


class TermModel(BaseModel):
    """A strict model of `target` in AU⟨source⟩: a term element per node and edge."""

    model_config = ConfigDict(frozen=True)

    source: Context
    target: Context
    objects: tuple[TermObject, ...]
    morphisms: tuple[TermMorphism, ...]


def map_to_model(m: ContextMap) -> TermModel:
    apex = m.target.apex
    return TermModel(
        source=m.source, target=m.target,
        objects=tuple(TermObject(ext=m.ext, node=m.hom.node(x)) for x in range(apex.n_count)),
        morphisms=tuple(TermMorphism(ext=m.ext, edge=m.hom.edge(u)) for u in range(apex.e_count)),
    )


def model_to_map(model: TermModel) -> ContextMap:
    """Gather the elements over a common refinement and extend to a homomorphism."""
    apex = model.target.apex
    if len(model.objects) != apex.n_count or len(model.morphisms) != apex.e_count:
        raise ShapeError("term model does not cover the target context")
    elements = list(model.objects) + list(model.morphisms)
    if not elements:
        ext = EqExtension(base=model.source.apex)
        indices: list[int] = []
    else:
        ext, indices = align(elements)
    n = apex.n_count
    hom = complete_hom(apex, ext.apex, indices[:n], indices[n:])
    if hom is None:
        raise ShapeError("term model does not respect the target's commutativities and universals")
    return ContextMap(source=model.source, target=model.target, ext=ext, hom=hom)
