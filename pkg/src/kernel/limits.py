"""Limits in Con built from chosen representatives.

Products, hom and chain contexts, inserters, equifiers and pullbacks of extension
maps along arbitrary context maps. Every construction returns a `LimitResult`
carrying the constructed context or extension and its legs.
"""
import heapq
import logging
from typing import Callable, Literal, Optional

from pydantic import BaseModel, ConfigDict

from src.kernel.arrows import (
    LevelCells, chain_context, chain_hom, copair_homs, copy_hom, hom_arrow, hom_context, layout_of,
    product_context, product_projections,
)
from src.kernel.conmap import (
    ContextMap, MapEqualityCertificate, compose_map, hom_map, inclusion_map, map_equality_by_refinement,
)
from src.kernel.equiv import Refinement, identity_refinement, refine_pair
from src.kernel.errors import ShapeError, SoundnessError, UnsupportedConstructionError
from src.kernel.extension import Context, EqExtension, Extension, compose_extensions, reindex, reindex_fillin
from src.kernel.objeq import certificate_from_edge_equalities
from src.kernel.sketch import (
    SORTS, Sketch, SketchDraft, SketchHom, Sort, compose_hom, hom_equal, inclusion_hom, is_hom, same_sketch,
)
from src.kernel.steps import AddCommutativity, AddPrimitiveEdge

logger = logging.getLogger("aukernel")


class LimitResult(BaseModel):
    """A constructed limit: the context (or extension of an apex), its leg homs and leg maps."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["product", "hom", "inserter", "equifier", "pullback"]
    context: Optional[Context] = None
    extension: Optional[Extension] = None
    legs: tuple[SketchHom, ...] = ()
    maps: tuple[ContextMap, ...] = ()


def _retarget(h: SketchHom, source: Sketch, target: Sketch) -> SketchHom:
    return SketchHom(source=source, target=target, **{s.value: h.table(s) for s in SORTS})


# ---------------------------------------------------------------------------
# products and hom contexts


def build_product(t0: Context, t1: Context) -> LimitResult:
    prod = product_context(t0, t1)
    left, right = product_projections(t0, t1)
    logger.info(f"✓ product context {prod.apex.describe()}")
    return LimitResult(kind="product", context=prod, legs=(left, right),
                       maps=(hom_map(prod, t0, left), hom_map(prod, t1, right)))


def pairing(t0: Context, t1: Context, g0: SketchHom, g1: SketchHom) -> SketchHom:
    """The unique hom out of t0×t1 with the given components."""
    return copair_homs(t0, t1, g0, g1)


def build_hom_context(t: Context, n: int = 1) -> LimitResult:
    """𝕋^[n] with its n+1 copy homs; copy 0 is realized as an extension of 𝕋."""
    chain = chain_context(t, n)
    copies = tuple(copy_hom(t, n, k) for k in range(n + 1))
    ext = Extension(base=t.apex, steps=chain.steps[len(t.steps):])
    return LimitResult(kind="hom", context=chain, extension=ext, legs=copies,
                       maps=tuple(hom_map(chain, t, f) for f in copies))


# ---------------------------------------------------------------------------
# inserters and equifiers


def build_inserter(ctx1: Context, f0: SketchHom, f1: SketchHom, base: Optional[Context] = None) -> LimitResult:
    """Ins(f0, f1) over A = target of f0, f1: per node Y an edge θ_Y: f0Y -> f1Y,
    per edge u an edge θ_u with (f0u, θ_Y, θ_u) and (θ_X, f1u, θ_u)."""
    if not (same_sketch(f0.source, ctx1.apex) and same_sketch(f1.source, ctx1.apex)
            and same_sketch(f0.target, f1.target)):
        raise ShapeError("build_inserter: homs are not parallel out of the context")
    src, apex = ctx1.apex, f0.target
    steps: list = [AddPrimitiveEdge(dom=f0.node(y), cod=f1.node(y)) for y in range(src.n_count)]
    steps.extend(AddPrimitiveEdge(dom=f0.node(src.dom(u)), cod=f1.node(src.cod(u))) for u in range(src.e_count))
    for u in range(src.e_count):
        theta_u = apex.e_count + src.n_count + u
        steps.append(AddCommutativity(l=f0.edge(u), r=apex.e_count + src.cod(u), c=theta_u))
        steps.append(AddCommutativity(l=apex.e_count + src.dom(u), r=f1.edge(u), c=theta_u))
    ext = Extension(base=apex, steps=tuple(steps))
    legs = (inserter_cell(ctx1, f0, f1, ext),)
    maps: tuple = ()
    context = None
    if base is not None:
        context = base.extended(ext)
        maps = (hom_map(context, base, _retarget(ext.inclusion, base.apex, context.apex)),)
    logger.info(f"✓ inserter adds {len(steps)} steps")
    return LimitResult(kind="inserter", context=context, extension=ext, legs=legs, maps=maps)


def _inserter_cells(src: Sketch, apex: Sketch) -> LevelCells:
    return LevelCells(
        nodes=tuple(apex.e_count + y for y in range(src.n_count)),
        edges=tuple(apex.e_count + src.n_count + u for u in range(src.e_count)),
        left=tuple(apex.tri_count + 2 * u for u in range(src.e_count)),
        right=tuple(apex.tri_count + 2 * u + 1 for u in range(src.e_count)),
    )


def inserter_cell(ctx1: Context, f0: SketchHom, f1: SketchHom, ext: Extension) -> SketchHom:
    """The universal 2-cell hom 𝕋₁→ -> apex(Ins) between f0 and f1."""
    incl = ext.inclusion
    return chain_hom(ctx1, ext.apex, [compose_hom(f0, incl), compose_hom(f1, incl)],
                     [_inserter_cells(ctx1.apex, ext.base)])


def inserter_pair(result: LimitResult, h: SketchHom) -> tuple[SketchHom, SketchHom]:
    """h: apex(Ins) -> U as the pair (g, α) with α a 2-cell hom from f0;g to f1;g."""
    return compose_hom(result.extension.inclusion, h), compose_hom(result.legs[0], h)


def inserter_factor(ctx1: Context, result: LimitResult, g: SketchHom, alpha: SketchHom) -> SketchHom:
    """The hom apex(Ins) -> U for a pair (g, α); inverse of `inserter_pair`."""
    ext = result.extension
    src = ctx1.apex
    lay = layout_of(ctx1, 1)
    tables = {s: list(g.table(s)) for s in SORTS}
    tables[Sort.EDGE].extend(alpha.edge(lay.theta_node(1, y)) for y in range(src.n_count))
    tables[Sort.EDGE].extend(alpha.edge(lay.theta_edge(1, u)) for u in range(src.e_count))
    for u in range(src.e_count):
        tables[Sort.TRI].extend((alpha(Sort.TRI, lay.left_tri(1, u)), alpha(Sort.TRI, lay.right_tri(1, u))))
    h = SketchHom(source=ext.apex, target=g.target, **{s.value: tuple(tables[s]) for s in SORTS})
    if not is_hom(h) or not hom_equal(compose_hom(result.legs[0], h), alpha):
        raise ShapeError("inserter_factor: 2-cell does not run between f0;g and f1;g")
    return h


def build_equifier(ctx1: Context, alpha: SketchHom, beta: SketchHom) -> LimitResult:
    """Eq(α, β): unary commutativities α_Y ⊴ β_Y and α_v ⊴ β_v over the common target."""
    arrow = hom_context(ctx1)
    if not (same_sketch(alpha.source, arrow.apex) and same_sketch(beta.source, arrow.apex)
            and same_sketch(alpha.target, beta.target)):
        raise ShapeError("build_equifier: 2-cell homs are not parallel")
    for k in (0, 1):
        inc = copy_hom(ctx1, 1, k)
        if not hom_equal(compose_hom(inc, alpha), compose_hom(inc, beta)):
            raise ShapeError(f"build_equifier: 2-cells differ on i{k}")
    src, apex = ctx1.apex, alpha.target
    lay = layout_of(ctx1, 1)
    pairs = [(alpha.edge(lay.theta_node(1, y)), beta.edge(lay.theta_node(1, y))) for y in range(src.n_count)]
    pairs.extend((alpha.edge(lay.theta_edge(1, v)), beta.edge(lay.theta_edge(1, v))) for v in range(src.e_count))
    steps = tuple(AddCommutativity(l=apex.ident(apex.dom(a)), r=a, c=b) for a, b in pairs)
    ext = Extension(base=apex, steps=steps)
    logger.info(f"✓ equifier adds {len(steps)} unary commutativities")
    return LimitResult(kind="equifier", extension=ext, legs=(ext.inclusion,))


def equifier_factor(result: LimitResult, h: SketchHom) -> Optional[SketchHom]:
    """The factorization of h: A -> U through Eq(α, β), or None when h does not equify."""
    ext = result.extension
    apex, target = ext.apex, h.target
    tris = list(h.table(Sort.TRI))
    for t in range(ext.base.tri_count, apex.tri_count):
        l, r, c = apex.tri(t)
        found = target.find_tri(h.edge(l), h.edge(r), h.edge(c))
        if found is None:
            return None
        tris.append(found)
    tables = {s.value: h.table(s) for s in SORTS}
    tables[Sort.TRI.value] = tuple(tris)
    return SketchHom(source=apex, target=target, **tables)


# ---------------------------------------------------------------------------
# pullbacks of extension maps


class FillinResult(BaseModel):
    """A fillin into the pullback with certificates for both triangles."""

    model_config = ConfigDict(frozen=True)

    fillin: ContextMap
    first: MapEqualityCertificate
    second: MapEqualityCertificate


def pullback_extension_map(ctx1: Context, c: Extension, m: ContextMap) -> LimitResult:
    """Pullback of (Id, c): ctx1.extended(c) -> ctx1 along m: the reindexing square.

    The pullback context is m.source extended by m.ext followed by c reindexed along m.hom.
    """
    if not same_sketch(c.base, ctx1.apex) or not same_sketch(m.target.apex, ctx1.apex):
        raise ShapeError("pullback_extension_map: extension and map do not meet at the context")
    moved, eps = reindex(c, m.hom)
    total = compose_extensions(m.ext, moved)
    pb = m.source.extended(total)
    top = ctx1.extended(c)
    leg0 = hom_map(pb, m.source, _retarget(inclusion_hom(m.source.apex, pb.apex), m.source.apex, pb.apex))
    leg1 = hom_map(pb, top, _retarget(eps, top.apex, pb.apex))
    logger.info(f"✓ pullback of an extension map with {len(c.steps)} steps")
    return LimitResult(kind="pullback", context=pb, extension=total, legs=(leg0.hom, leg1.hom), maps=(leg0, leg1))


def pullback_fillin(ctx1: Context, c: Extension, m: ContextMap, result: LimitResult,
                    q: ContextMap, p: ContextMap) -> FillinResult:
    """The fillin of a cocone q: 𝕌 -> m.source, p: 𝕌 -> ctx1.extended(c) commuting after refinement."""
    qm = compose_map(q, m)
    pc = compose_map(p, inclusion_map(ctx1, c))
    refined, r0, r1 = refine_pair(qm.ext, pc.ext)
    if not hom_equal(compose_hom(qm.hom, r0.eps), compose_hom(pc.hom, r1.eps)):
        raise UnsupportedConstructionError("fillin needs a cocone commuting after refinement",
                                           rule="pullback fillin")
    _, eps_e = reindex(m.ext, q.hom)
    along_e = compose_hom(eps_e, r0.eps)
    h = reindex_fillin(c, m.hom, along_e, compose_hom(p.hom, r1.eps))
    pb = result.context
    fillin = ContextMap(source=q.source, target=pb, ext=refined, hom=_retarget(h, pb.apex, refined.apex))
    q_in = Refinement(e1=q.ext, e2=refined, eps=compose_hom(inclusion_hom(q.ext.apex, qm.ext.apex), r0.eps))
    first = _leg_certificate(compose_map(fillin, result.maps[0]), q, q_in)
    second = _leg_certificate(compose_map(fillin, result.maps[1]), p, r1)
    logger.info("✓ pullback fillin built")
    return FillinResult(fillin=fillin, first=first, second=second)


def _leg_certificate(composite: ContextMap, leg: ContextMap, into: Refinement) -> MapEqualityCertificate:
    refined = composite.ext
    f0 = composite.hom
    f1 = compose_hom(leg.hom, into.eps)
    return MapEqualityCertificate(
        refined=refined, left=identity_refinement(refined), right=into,
        objective=certificate_from_edge_equalities(leg.target, f0, f1),
    )


def fillin_uniqueness(first: ContextMap, second: ContextMap, depth: Optional[int] = None) -> MapEqualityCertificate:
    """Two fillins into the same pullback are objectively equal."""
    return map_equality_by_refinement(first, second, depth)


# ---------------------------------------------------------------------------
# reordering


def step_dependencies(ctx: Context) -> list[set[int]]:
    """For every step, the earlier steps that created the elements it references."""
    rep = ctx.replayed
    deps = []
    for step in ctx.steps:
        found = set()
        for sort, i in step.references().values():
            origin = rep.origin(sort, i)
            if origin is not None:
                found.add(origin[0])
        deps.append(found)
    return deps


def reorder_extension(ctx: Context, key: Callable[[int], int]) -> tuple[Context, SketchHom]:
    """Stable topological reordering of ctx's steps by key; returns the new context and
    the isomorphism from the old apex onto the new one."""
    deps = step_dependencies(ctx)
    waiting = [len(d) for d in deps]
    users: dict[int, list[int]] = {}
    for k, d in enumerate(deps):
        for j in d:
            users.setdefault(j, []).append(k)
    ready = [(key(k), k) for k in range(len(deps)) if not waiting[k]]
    heapq.heapify(ready)
    rep = ctx.replayed
    mapping: dict[tuple[Sort, int], int] = {}
    draft = SketchDraft(ctx.base)
    steps = []
    while ready:
        _, k = heapq.heappop(ready)
        step = ctx.steps[k].translate(lambda sort, i: mapping[(Sort(sort), i)])
        step.check(draft)
        delta = step.apply(draft)
        for sort in SORTS:
            for old, new in zip(getattr(rep.deltas[k], sort.value), getattr(delta, sort.value)):
                mapping[(sort, old)] = new
        steps.append(step)
        for j in users.get(k, ()):
            waiting[j] -= 1
            if not waiting[j]:
                heapq.heappush(ready, (key(j), j))
    if len(steps) != len(ctx.steps):
        raise SoundnessError("reorder_extension: dependency cycle among steps")
    reordered = Context(steps=tuple(steps))
    apex = ctx.apex
    iso = SketchHom(source=apex, target=reordered.apex,
                    **{s.value: tuple(mapping[(s, i)] for i in range(apex.count(s))) for s in SORTS})
    return reordered, iso


def arrow_extension(ctx1: Context, c: Extension) -> tuple[Extension, SketchHom]:
    """(𝕋₁ extended by c)→ presented as an extension of 𝕋₁→, with the reordering isomorphism."""
    top = ctx1.extended(c)
    arrow = hom_context(top)
    small, big = ctx1.apex, top.apex
    n_steps, n_old = len(top.steps), len(ctx1.steps)

    def key(k: int) -> int:
        if k < 2 * n_steps:
            return 0 if k % n_steps < n_old else 1
        k -= 2 * n_steps
        if k < big.n_count:
            return 0 if k < small.n_count else 1
        return 0 if (k - big.n_count) // 3 < small.e_count else 1

    reordered, iso = reorder_extension(arrow, key)
    prefix = hom_context(ctx1)
    if reordered.steps[:len(prefix.steps)] != prefix.steps:
        raise SoundnessError("arrow_extension: reordered prefix is not the base hom context")
    ext = Extension(base=prefix.apex, steps=reordered.steps[len(prefix.steps):])
    return ext, iso


def arrow_pullback_square(ctx1: Context, c: Extension, m: ContextMap) -> LimitResult:
    """The pullback of c→ along m→ for a map m = (Id, f); 2-cells into the pullback factor through it."""
    if not m.ext.is_empty():
        raise UnsupportedConstructionError("arrow squares are built for maps without eq-extension",
                                           rule="pullback")
    ext, _ = arrow_extension(ctx1, c)
    arrow_map = hom_map(hom_context(m.source), hom_context(ctx1), hom_arrow(m.hom, ctx1, m.source))
    return pullback_extension_map(hom_context(ctx1), ext, arrow_map)


def eq_extension_square(ctx1: Context, e: EqExtension, m: ContextMap) -> LimitResult:
    """Pullback of an equivalence extension map, presented through its simple steps."""
    return pullback_extension_map(ctx1, Extension(base=e.base, steps=ctx1.extended(e).steps[len(ctx1.steps):]), m)
