"""Strict set models of contexts and their extension along eq-extensions.

A model interprets every node of a sketch as a carrier and every edge as a map.
Models are built by replaying a presentation: primitive nodes and edges come
from an assignment, universal subjects get the canonical constructions of
`carriers`, and each equivalence step interprets its fresh edges pointwise.
Every delta commutativity is then checked, exactly on finite domains and up
to the list bound on lazy ones.
"""
import logging
from typing import Any, Literal, Optional, Sequence, Union

from pydantic import BaseModel, ConfigDict

from src.kernel.arrows import copy_hom, layout_of
from src.kernel.errors import KernelError, ModelError, ShapeError, SoundnessError, UnsupportedConstructionError
from src.kernel.extension import Context, EqExtension, Expr
from src.kernel.sketch import Sketch, SketchHom, compose_hom, same_sketch
from src.kernel.steps import INVERSION_STEPS, Delta, Step
from src.setmodel.carriers import (
    EMPTY, ONE, POINT, SetMor, SetObj, compose, constant, finite_set, first_difference, identity, injections,
    invert, list_set, make_map, projections, pullback_set, pushout_set, same_carrier, table_map,
)

logger = logging.getLogger("aukernel")


class PrimitiveAssignment(BaseModel):
    """Elements of each primitive node and the table of each primitive edge, by index."""

    model_config = ConfigDict(frozen=True)

    nodes: dict[int, tuple[Any, ...]] = {}
    edges: dict[int, dict[Any, Any]] = {}


class SetModel(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    sketch: Sketch
    nodes: tuple[SetObj, ...]
    edges: tuple[SetMor, ...]
    strict: bool = True

    def node(self, x: int) -> SetObj:
        return self.nodes[x]

    def edge(self, u: int) -> SetMor:
        return self.edges[u]


class Check(BaseModel):
    """Outcome for one commutativity or universal."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["tri", "universal"]
    index: int
    status: Literal["exact", "verified-to-bound", "failed"]
    counterexample: Optional[str] = None


class VerificationReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    checks: tuple[Check, ...] = ()

    @property
    def ok(self) -> bool:
        return all(c.status != "failed" for c in self.checks)

    @property
    def exact(self) -> bool:
        return all(c.status == "exact" for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if c.status == "failed"]

    def summary(self) -> str:
        bounded = sum(c.status == "verified-to-bound" for c in self.checks)
        failed = len(self.failures())
        return f"{len(self.checks)} checks, {bounded} verified to bound, {failed} failed"


# ---------------------------------------------------------------------------
# replay


def _check_tri(nodes: dict, edges: dict, apex: Sketch, t: int, bound: Optional[int]) -> Check:
    l, r, c = apex.tri(t)
    diff = first_difference(compose(edges[l], edges[r]), edges[c], bound)
    dom = nodes[apex.dom(c)]
    if diff is not None:
        return Check(kind="tri", index=t, status="failed", counterexample=repr(diff))
    return Check(kind="tri", index=t, status="exact" if dom.is_finite else "verified-to-bound")


def _list_recursion(y: SetMor, g: SetMor):
    def run(xs: tuple, b: Any) -> Any:
        acc = y(b)
        for a in reversed(xs):
            acc = g((a, acc))
        return acc
    return run


class _Replayer:
    """Interprets the deltas of a step sequence over a partial model."""

    def __init__(self, apex: Sketch, nodes: dict, edges: dict, bound: Optional[int]):
        self.apex = apex
        self.nodes = nodes
        self.edges = edges
        self.bound = bound
        self.checks: list[Check] = []

    def run(self, steps: Sequence[Step], deltas: Sequence[Delta], prim: Optional[PrimitiveAssignment] = None) -> None:
        for k, (step, delta) in enumerate(zip(steps, deltas)):
            self.interpret(step, delta, prim)
            for x in delta.n:
                self.edges[self.apex.ident(x)] = identity(self.nodes[x])
            missing = [u for u in delta.e if u not in self.edges]
            if missing:
                raise UnsupportedConstructionError(f"no set interpretation for edge {missing[0]}", rule=step.rule)
            for t in delta.tri:
                check = _check_tri(self.nodes, self.edges, self.apex, t, self.bound)
                self.checks.append(check)
                if check.status != "failed":
                    continue
                if step.kind == "comm":
                    raise ModelError(
                        f"commutativity {t} fails at element {check.counterexample}", rule=step.rule,
                        detail={"tri": t, "element": check.counterexample},
                    )
                raise SoundnessError(
                    f"step {k} ({step.kind}): commutativity {t} fails at {check.counterexample}", rule=step.rule,
                )
            logger.debug(f"interpreted step {k} {step.kind}")

    def interpret(self, step: Step, delta: Delta, prim: Optional[PrimitiveAssignment]) -> None:
        apex, nodes, edges = self.apex, self.nodes, self.edges
        kind = step.kind
        if kind == "node":
            x = delta.n[0]
            if prim is None or x not in prim.nodes:
                raise ModelError(f"primitive node {x} has no carrier")
            nodes[x] = finite_set(prim.nodes[x])
        elif kind == "edge":
            u = delta.e[0]
            if prim is None or u not in prim.edges:
                raise ModelError(f"primitive edge {u} has no table")
            edges[u] = table_map(nodes[apex.dom(u)], nodes[apex.cod(u)], prim.edges[u])
        elif kind == "terminal":
            nodes[delta.n[0]] = ONE
        elif kind == "initial":
            nodes[delta.n[0]] = EMPTY
        elif kind == "pullback":
            parts = apex.pullback_parts(delta.upb[0])
            obj = pullback_set(edges[parts["u1"]], edges[parts["u2"]])
            nodes[parts["apex"]] = obj
            edges[parts["p1"]], edges[parts["p"]], edges[parts["p2"]] = projections(obj)
        elif kind == "pushout":
            parts = apex.pushout_parts(delta.upo[0])
            obj, reps = pushout_set(edges[parts["u1"]], edges[parts["u2"]])
            nodes[parts["apex"]] = obj
            edges[parts["j1"]], edges[parts["j"]], edges[parts["j2"]] = injections(obj, reps)
        elif kind == "list":
            self._list_object(delta)
        elif kind == "composition":
            edges[delta.e[0]] = compose(edges[step.u], edges[step.v])
        elif kind == "pb_fillin":
            v1, v2 = edges[apex.tri_l[step.d1]], edges[apex.tri_l[step.d2]]
            target = nodes[apex.pullback_parts(step.univ)["apex"]]
            edges[delta.e[0]] = make_map(v1.dom, target, lambda x: (v1(x), v2(x)))
        elif kind == "po_fillin":
            v1, v2 = edges[apex.tri_r[step.d1]], edges[apex.tri_r[step.d2]]
            source = nodes[apex.pushout_parts(step.univ)["apex"]]
            edges[delta.e[0]] = make_map(source, v1.cod, lambda q: v1(q[1]) if q[0] == 1 else v2(q[1]))
        elif kind == "t_fillin":
            w = delta.e[0]
            edges[w] = constant(nodes[step.node], nodes[apex.cod(w)], POINT)
        elif kind == "i_fillin":
            w = delta.e[0]
            edges[w] = make_map(nodes[apex.dom(w)], nodes[step.node], lambda x: x)
        elif kind == "list_fillin":
            self._list_fillin(step, delta)
        elif isinstance(step, INVERSION_STEPS):
            u = apex.tri_l[delta.tri[0]]
            inverse = invert(edges[u])
            if inverse is None:
                if not (edges[u].dom.is_finite and edges[u].cod.is_finite):
                    raise UnsupportedConstructionError(f"edge {u} is not between finite carriers", rule=step.rule)
                raise SoundnessError(f"edge {u} is not a bijection in the model", rule=step.rule)
            edges[delta.e[0]] = inverse

    def _list_object(self, delta: Delta) -> None:
        apex, nodes, edges = self.apex, self.nodes, self.edges
        parts = apex.list_parts(delta.ul[0])
        a = nodes[parts["a"]]
        lst = list_set(a)
        nodes[parts["terminal"]] = ONE
        nodes[parts["list"]] = lst
        edges[parts["bang_a"]] = constant(a, ONE, POINT)
        edges[parts["bang_l"]] = constant(lst, ONE, POINT)
        product = pullback_set(edges[parts["bang_a"]], edges[parts["bang_l"]])
        nodes[parts["product"]] = product
        edges[parts["p1"]], edges[parts["p"]], edges[parts["p2"]] = projections(product)
        edges[parts["eps"]] = constant(ONE, lst, ())
        edges[parts["cons"]] = make_map(product, lst, lambda x: (x[0],) + x[1])

    def _list_fillin(self, step: Step, delta: Delta) -> None:
        apex, nodes, edges = self.apex, self.nodes, self.edges
        lay = step.layout(apex)
        g = edges[step.g]
        run = _list_recursion(edges[step.y], g)
        lb, alb, a_lb, y_node = nodes[lay["lb"]["apex"]], nodes[lay["alb"]["apex"]], nodes[lay["a_lb"]["apex"]], nodes[lay["Y"]]
        ay = nodes[lay["ay"]["apex"]]
        r, r1, r2, g1, g2 = delta.e[:5]
        edges[r] = make_map(lb, y_node, lambda p: run(p[0], p[1]))
        edges[r1] = make_map(a_lb, ay, lambda q: (q[0], run(*q[1])))
        edges[r2] = make_map(a_lb, y_node, lambda q: run(*q[1]))
        edges[g1] = make_map(a_lb, y_node, lambda q: g((q[0], run(*q[1]))))
        edges[g2] = make_map(alb, y_node, lambda q: run((q[0][0],) + q[0][1], q[1]))


def _freeze(apex: Sketch, nodes: dict, edges: dict, strict: bool = True) -> SetModel:
    return SetModel(
        sketch=apex, nodes=tuple(nodes[x] for x in range(apex.n_count)),
        edges=tuple(edges[u] for u in range(apex.e_count)), strict=strict,
    )


def interpret_context(ctx: Context, prim: PrimitiveAssignment, bound: Optional[int] = None) -> SetModel:
    """The strict model of ctx determined by carriers and tables for its primitives."""
    replay = ctx.replayed
    player = _Replayer(replay.apex, {}, {}, bound)
    player.run(ctx.steps, replay.deltas, prim)
    logger.info(f"✓ model of a context with {replay.apex.n_count} nodes interpreted")
    return _freeze(replay.apex, player.nodes, player.edges)


def extend_along_eqext(m: SetModel, e: EqExtension, bound: Optional[int] = None) -> SetModel:
    """The unique strict model of apex(e) restricting to m."""
    if not same_sketch(e.base, m.sketch):
        raise ShapeError("extend_along_eqext: the extension is not over the model's sketch")
    if not m.strict:
        raise ModelError("extend_along_eqext: the model is not strict; strictify it first")
    replay = e.replayed
    player = _Replayer(replay.apex, dict(enumerate(m.nodes)), dict(enumerate(m.edges)), bound)
    player.run(e.steps, replay.deltas)
    return _freeze(replay.apex, player.nodes, player.edges)


# ---------------------------------------------------------------------------
# verification


def _universal_checks(m: SetModel, bound: Optional[int]) -> list[Check]:
    s, nodes, edges = m.sketch, m.nodes, m.edges
    found: list[Check] = []

    def record(index: int, ok: bool, detail: str) -> None:
        status = "exact" if ok else "failed"
        found.append(Check(kind="universal", index=index, status=status, counterexample=None if ok else detail))

    for x in s.ut_n:
        record(x, same_carrier(nodes[x], ONE), f"terminal node {x} is not the one-point set")
    for x in s.ui_n:
        record(x, same_carrier(nodes[x], EMPTY), f"initial node {x} is not empty")
    for w in range(s.upb_count):
        parts = s.pullback_parts(w)
        canonical = pullback_set(edges[parts["u1"]], edges[parts["u2"]])
        ok = same_carrier(nodes[parts["apex"]], canonical, bound)
        if ok:
            p1, _, p2 = projections(canonical)
            ok = (first_difference(p1, edges[parts["p1"]], bound) is None
                  and first_difference(p2, edges[parts["p2"]], bound) is None)
        record(parts["apex"], ok, f"pullback node {parts['apex']} is not the canonical pullback")
    for w in range(s.upo_count):
        parts = s.pushout_parts(w)
        try:
            canonical, reps = pushout_set(edges[parts["u1"]], edges[parts["u2"]])
        except KernelError as exc:
            record(parts["apex"], False, str(exc))
            continue
        j1, _, j2 = injections(canonical, reps)
        ok = (same_carrier(nodes[parts["apex"]], canonical)
              and first_difference(j1, edges[parts["j1"]]) is None and first_difference(j2, edges[parts["j2"]]) is None)
        record(parts["apex"], ok, f"pushout node {parts['apex']} is not the canonical pushout")
    for w in range(s.ul_count):
        parts = s.list_parts(w)
        lst = nodes[parts["list"]]
        ok = lst.kind == "list" and same_carrier(lst.base, nodes[parts["a"]], bound)
        record(parts["list"], ok, f"list node {parts['list']} is not the list set of its parameter")
    return found


def verify_model(m: SetModel, bound: Optional[int] = None) -> VerificationReport:
    """Check every commutativity, and for strict models that universals are canonical. Never raises."""
    nodes, edges = dict(enumerate(m.nodes)), dict(enumerate(m.edges))
    checks = []
    for t in range(m.sketch.tri_count):
        try:
            checks.append(_check_tri(nodes, edges, m.sketch, t, bound))
        except KernelError as exc:
            checks.append(Check(kind="tri", index=t, status="failed", counterexample=str(exc)))
    if m.strict:
        checks.extend(_universal_checks(m, bound))
    report = VerificationReport(checks=tuple(checks))
    mark = "✓" if report.ok else "✗"
    logger.info(f"{mark} model verification: {report.summary()}")
    return report


def reduct(m: SetModel, f: SketchHom) -> SetModel:
    """M|f: the model of f.source read off through f."""
    if not same_sketch(f.target, m.sketch):
        raise ShapeError("reduct: the hom does not land in the model's sketch")
    return SetModel(
        sketch=f.source,
        nodes=tuple(m.nodes[f.node(x)] for x in range(f.source.n_count)),
        edges=tuple(m.edges[f.edge(u)] for u in range(f.source.e_count)),
        strict=m.strict,
    )


# ---------------------------------------------------------------------------
# model homomorphisms


class ModelHom(BaseModel):
    """A carrier map per node, natural for every edge."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    source: SetModel
    target: SetModel
    components: tuple[SetMor, ...]


def verify_model_hom(h: ModelHom, bound: Optional[int] = None) -> bool:
    """Naturality squares checked pointwise. Never raises."""
    s = h.source.sketch
    try:
        if not same_sketch(s, h.target.sketch) or len(h.components) != s.n_count:
            return False
        for u in range(s.e_count):
            x, y = s.dom(u), s.cod(u)
            left = compose(h.components[x], h.target.edges[u])
            right = compose(h.source.edges[u], h.components[y])
            diff = first_difference(left, right, bound)
            if diff is not None:
                logger.debug(f"✗ naturality fails for edge {u} at {diff!r}")
                return False
    except KernelError as exc:
        logger.debug(f"✗ model hom check failed: {exc}")
        return False
    return True


def identity_model_hom(m: SetModel) -> ModelHom:
    return ModelHom(source=m, target=m, components=tuple(identity(x) for x in m.nodes))


def model_hom_from_reduct(m: SetModel, ctx: Context, alpha: SketchHom) -> ModelHom:
    """M|α for α out of the hom context of ctx: a hom between the reducts along the two copies."""
    lay = layout_of(ctx, 1)
    source = reduct(m, compose_hom(copy_hom(ctx, 1, 0), alpha))
    target = reduct(m, compose_hom(copy_hom(ctx, 1, 1), alpha))
    components = tuple(m.edges[alpha.edge(lay.theta_node(1, x))] for x in range(ctx.apex.n_count))
    return ModelHom(source=source, target=target, components=components)


# ---------------------------------------------------------------------------
# canonical expressions


def evaluate_expression(expr: Expr, m: SetModel) -> Union[SetObj, SetMor]:
    """Interpret a canonical expression; equivalence-rule terms other than composites are rejected."""
    op, args = expr.op, expr.args

    def ev(k: int):
        return evaluate_expression(args[k], m)

    if op == "prim_node":
        return m.nodes[expr.ref]
    if op == "prim_edge":
        return m.edges[expr.ref]
    if op == "one":
        return ONE
    if op == "zero":
        return EMPTY
    if op == "id":
        return identity(ev(0))
    if op == "list":
        return list_set(ev(0))
    if op in ("pb", "proj1", "proj", "proj2"):
        obj = pullback_set(ev(0), ev(1))
        return obj if op == "pb" else projections(obj)[("proj1", "proj", "proj2").index(op)]
    if op in ("po", "inj1", "inj", "inj2"):
        obj, reps = pushout_set(ev(0), ev(1))
        return obj if op == "po" else injections(obj, reps)[("inj1", "inj", "inj2").index(op)]
    if op == "bang":
        return constant(ev(0), ONE, POINT)
    if op == "bang_list":
        return constant(list_set(ev(0)), ONE, POINT)
    if op == "eps":
        return constant(ONE, list_set(ev(0)), ())
    if op == "cons":
        a = ev(0)
        lst = list_set(a)
        product = pullback_set(constant(a, ONE, POINT), constant(lst, ONE, POINT))
        return make_map(product, lst, lambda x: (x[0],) + x[1])
    if op == "composition.0":
        return compose(ev(0), ev(1))
    raise UnsupportedConstructionError(f"expression operator {op!r} has no direct set interpretation")
