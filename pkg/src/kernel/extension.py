"""Extensions, equivalence extensions, contexts, reindexing and canonical expressions.

An extension is a base sketch plus a sequence of steps. Steps reference elements
of the sketch accumulated so far by absolute index; each step appends a fixed
delta, so reindexing along a homomorphism is a pure index translation.
"""
import logging
from functools import cached_property
from typing import Callable, Optional, Sequence

from pydantic import BaseModel, ConfigDict

from src.kernel.errors import KernelError, ShapeError, SoundnessError
from src.kernel.sketch import (
    EMPTY_SKETCH, SORTS, Sketch, SketchDraft, SketchHom, Sort, compose_hom, inclusion_hom, same_sketch,
    validate_sketch,
)
from src.kernel.steps import (
    AddCommutativity, AddPrimitiveEdge, Delta, EqStep, ExtensionStep, Step, UNIV_INTRO_STEPS,
)

logger = logging.getLogger("aukernel")


class Replay(BaseModel):
    """Result of replaying a step sequence over its base."""

    model_config = ConfigDict(frozen=True)

    base: Sketch
    apex: Sketch
    deltas: tuple[Delta, ...]

    @cached_property
    def inclusion(self) -> SketchHom:
        return inclusion_hom(self.base, self.apex)

    @cached_property
    def origins(self) -> dict[tuple[Sort, int], tuple[int, int]]:
        """(sort, index) -> (step position, position inside the step's delta)."""
        found = {}
        for k, delta in enumerate(self.deltas):
            for sort in SORTS:
                for pos, i in enumerate(getattr(delta, sort.value)):
                    found[(sort, i)] = (k, pos)
        return found

    def origin(self, sort: Sort, index: int) -> Optional[tuple[int, int]]:
        return self.origins.get((Sort(sort), index))


def replay_steps(base: Sketch, steps: Sequence[Step]) -> Replay:
    draft = SketchDraft(base)
    deltas = []
    for k, step in enumerate(steps):
        try:
            step.check(draft)
        except KernelError as exc:
            exc.message = f"step {k} ({step.kind}): {exc.message}"
            exc.detail = {**exc.detail, "step": k}
            raise
        deltas.append(step.apply(draft))
        logger.debug(f"replayed step {k} {step.kind}")
    apex = draft.freeze()
    report = validate_sketch(apex)
    if not report.ok:
        raise SoundnessError(f"replay produced an invalid sketch: {report.summary()}")
    return Replay(base=base, apex=apex, deltas=tuple(deltas))


class _StepSequence(BaseModel):
    model_config = ConfigDict(frozen=True)

    base: Sketch = EMPTY_SKETCH

    @cached_property
    def replayed(self) -> Replay:
        return replay_steps(self.base, self.steps)

    @property
    def apex(self) -> Sketch:
        return self.replayed.apex

    @property
    def inclusion(self) -> SketchHom:
        return self.replayed.inclusion

    def __len__(self) -> int:
        return len(self.steps)

    def is_empty(self) -> bool:
        return not self.steps


class Extension(_StepSequence):
    """A composite of simple extensions over `base`."""

    steps: tuple[ExtensionStep, ...] = ()


class EqExtension(_StepSequence):
    """A composite of simple equivalence extensions over `base`."""

    steps: tuple[EqStep, ...] = ()


class Context(Extension):
    """An extension of the empty sketch."""

    def model_post_init(self, __context) -> None:
        if self.base.counts() != EMPTY_SKETCH.counts():
            raise ShapeError("a context must extend the empty sketch")

    def extended(self, ext: "EqExtension | Extension") -> "Context":
        """The context presenting apex(ext), for an extension over this context's apex."""
        if not same_sketch(ext.base, self.apex):
            raise ShapeError("extension is not over this context")
        simple = forget_to_extension(ext) if isinstance(ext, EqExtension) else ext
        return Context(steps=self.steps + simple.steps)


EMPTY_CONTEXT = Context()


def apply_extension(base: Sketch, ext: Extension) -> tuple[Sketch, SketchHom]:
    if not same_sketch(base, ext.base):
        raise ShapeError("extension was built over a different base")
    return ext.apex, ext.inclusion


def apply_eq_extension(base: Sketch, e: EqExtension) -> tuple[Sketch, SketchHom]:
    if not same_sketch(base, e.base):
        raise ShapeError("equivalence extension was built over a different base")
    return e.apex, e.inclusion


def compose_extensions(c1: _StepSequence, c2: _StepSequence) -> _StepSequence:
    if not same_sketch(c2.base, c1.apex):
        raise ShapeError("second extension is not over the apex of the first")
    cls = EqExtension if isinstance(c1, EqExtension) and isinstance(c2, EqExtension) else Extension
    if cls is Extension and (isinstance(c1, EqExtension) or isinstance(c2, EqExtension)):
        c1 = forget_to_extension(c1) if isinstance(c1, EqExtension) else c1
        c2 = forget_to_extension(c2) if isinstance(c2, EqExtension) else c2
    return cls(base=c1.base, steps=tuple(c1.steps) + tuple(c2.steps))


def forget_to_extension(e: EqExtension) -> Extension:
    """Present every equivalence step by simple steps with the same delta."""
    steps: list = []
    for step, delta in zip(e.steps, e.replayed.deltas):
        if isinstance(step, UNIV_INTRO_STEPS):
            steps.append(step)
            continue
        for u in delta.e:
            steps.append(AddPrimitiveEdge(dom=e.apex.dom(u), cod=e.apex.cod(u)))
        for t in delta.tri:
            l, r, c = e.apex.tri(t)
            steps.append(AddCommutativity(l=l, r=r, c=c))
    return Extension(base=e.base, steps=tuple(steps))


# ---------------------------------------------------------------------------
# reindexing


def shift_function(base: Sketch, target: Sketch, f: SketchHom) -> Callable[[Sort, int], int]:
    """Base elements go through f, delta elements are shifted past the target carriers."""
    def fn(sort: Sort, i: int) -> int:
        sort = Sort(sort)
        if i < base.count(sort):
            return f(sort, i)
        return i - base.count(sort) + target.count(sort)
    return fn


def reindex(ext: _StepSequence, f: SketchHom) -> tuple[_StepSequence, SketchHom]:
    """Pushout of ext along f: the translated extension over f.target and the hom eps."""
    if not same_sketch(ext.base, f.source):
        raise ShapeError("reindex: the hom does not start at the extension's base")
    fn = shift_function(ext.base, f.target, f)
    cls = EqExtension if isinstance(ext, EqExtension) else Extension
    translated = cls(base=f.target, steps=tuple(step.translate(fn) for step in ext.steps))
    apex = ext.apex
    eps = SketchHom(
        source=apex, target=translated.apex,
        **{sort.value: tuple(fn(sort, i) for i in range(apex.count(sort))) for sort in SORTS},
    )
    return translated, eps


def reindex_fillin(ext: _StepSequence, f: SketchHom, a: SketchHom, b: SketchHom) -> SketchHom:
    """The copairing apex(f(ext)) -> R of a: f.target -> R and b: apex(ext) -> R with f;a = ext;b."""
    base, target = ext.base, f.target
    if not (same_sketch(a.source, target) and same_sketch(b.source, ext.apex) and same_sketch(a.target, b.target)):
        raise ShapeError("reindex_fillin: cocone legs have the wrong shape")
    restricted = compose_hom(ext.inclusion, b)
    if compose_hom(f, a).n != restricted.n or compose_hom(f, a).e != restricted.e:
        raise ShapeError("reindex_fillin: cocone does not commute on the base")
    translated, _ = reindex(ext, f)
    apex = translated.apex
    tables = {}
    for sort in SORTS:
        offset = target.count(sort) - base.count(sort)
        tables[sort.value] = tuple(
            a(sort, i) if i < target.count(sort) else b(sort, i - offset) for i in range(apex.count(sort))
        )
    return SketchHom(source=apex, target=a.target, **tables)


# ---------------------------------------------------------------------------
# canonical expressions

OBJECT_OPS = {"prim_node", "one", "zero", "pb", "po", "list"}


class Expr(BaseModel):
    """AU expression: `op` applied to sub-expressions; `ref` for primitives."""

    model_config = ConfigDict(frozen=True)

    op: str
    args: tuple["Expr", ...] = ()
    ref: Optional[int] = None

    @property
    def is_object(self) -> bool:
        return self.op in OBJECT_OPS

    def __str__(self) -> str:
        if self.op in ("prim_node", "prim_edge"):
            return f"{'X' if self.op == 'prim_node' else 'f'}{self.ref}"
        if not self.args:
            return self.op
        return f"{self.op}({', '.join(str(a) for a in self.args)})"


Expr.model_rebuild()


def _prim(sort: Sort, i: int) -> Expr:
    return Expr(op="prim_node" if sort == Sort.NODE else "prim_edge", ref=i)


def substitute(expr: Expr, fn: Callable[[Sort, int], int]) -> Expr:
    if expr.op == "prim_node":
        return Expr(op="prim_node", ref=fn(Sort.NODE, expr.ref))
    if expr.op == "prim_edge":
        return Expr(op="prim_edge", ref=fn(Sort.EDGE, expr.ref))
    return Expr(op=expr.op, args=tuple(substitute(a, fn) for a in expr.args), ref=expr.ref)


def canonical_expression(ext: _StepSequence, sort: Sort, index: int) -> Expr:
    """Expression for a node or edge; base and primitive elements are leaves."""
    sort = Sort(sort)
    if sort not in (Sort.NODE, Sort.EDGE):
        raise ShapeError("canonical expressions exist for nodes and edges only")
    replay = ext.replayed
    memo: dict[tuple[Sort, int], Expr] = {}

    def node(x: int) -> Expr:
        return expr_of(Sort.NODE, x)

    def edge(u: int) -> Expr:
        return expr_of(Sort.EDGE, u)

    def expr_of(s: Sort, i: int) -> Expr:
        key = (s, i)
        if key in memo:
            return memo[key]
        found = replay.origin(s, i)
        if found is None:
            result = _prim(s, i)
        else:
            result = _step_expr(ext.steps[found[0]], found[1], s, i)
        memo[key] = result
        return result

    def _step_expr(step: Step, pos: int, s: Sort, i: int) -> Expr:
        apex = replay.apex
        kind = step.kind
        if s == Sort.EDGE and apex.is_identity(i) and kind != "edge":
            return Expr(op="id", args=(node(apex.dom(i)),))
        if kind == "node" or kind == "edge":
            return _prim(s, i)
        if kind == "terminal":
            return Expr(op="one")
        if kind == "initial":
            return Expr(op="zero")
        if kind in ("pullback", "pushout"):
            data = (edge(step.u1), edge(step.u2))
            if s == Sort.NODE:
                return Expr(op="pb" if kind == "pullback" else "po", args=data)
            names = ("proj1", "proj", "proj2") if kind == "pullback" else ("inj1", "inj", "inj2")
            return Expr(op=names[pos], args=data)
        if kind == "list":
            a = node(step.a)
            if s == Sort.NODE:
                return (Expr(op="one"), Expr(op="list", args=(a,)),
                        Expr(op="pb", args=(Expr(op="bang", args=(a,)), Expr(op="bang_list", args=(a,)))))[pos]
            bangs = (Expr(op="bang", args=(a,)), Expr(op="bang_list", args=(a,)))
            return (
                Expr(op="eps", args=(a,)), Expr(op="cons", args=(a,)),
                Expr(op="proj1", args=bangs), Expr(op="proj", args=bangs), Expr(op="proj2", args=bangs),
                Expr(op="bang", args=(a,)), Expr(op="bang_list", args=(a,)),
            )[pos]
        # equivalence steps: the fresh edge is named by its rule and data
        data = tuple(
            expr_of(sort_, value) for _, (sort_, value) in step.references().items()
            if sort_ in (Sort.NODE, Sort.EDGE)
        )
        return Expr(op=f"{kind}.{pos}", args=data)

    return expr_of(sort, index)
