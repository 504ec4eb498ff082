"""Context maps and 2-cells.

A context map 𝕋₀ -> 𝕋₁ is an opspan (e, f): e an eq-extension of 𝕋₀ and
f: 𝕋₁ -> apex(e). A 2-cell 𝕋₀ ⇒ 𝕋₁ is a context map into the hom context 𝕋₁→.
Maps are kept as representatives; equalities between them are carried by
certificates: a common refinement of the two eq-extensions plus an objective
equality certificate between the refined homomorphisms.
"""
import logging
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict

from src.config import get_settings
from src.kernel.arrows import (
    LevelCells, chain_context, chain_hom, copy_hom, copy_of, hom_arrow, hom_context, i0, i1, layout_of, level_of,
)
from src.kernel.builder import DerivationBuilder, naturality_eq
from src.kernel.equiv import Refinement, check_refinement, refine_pair
from src.kernel.errors import KernelError, MissingWitnessError, ShapeError
from src.kernel.extension import Context, EqExtension, compose_extensions, reindex
from src.kernel.objeq import (
    ObjectiveEqualityCertificate, certificate_from_edge_equalities, search_objective_equality,
    transport_certificate, verify_objective_equality,
)
from src.kernel.sketch import (
    SORTS, Sketch, SketchHom, Sort, compose_hom, hom_equal, hom_problems, identity_hom, inclusion_hom, same_sketch,
)
from src.kernel.transport import agreement_certificate, extend_two_cell, identity_cells

logger = logging.getLogger("aukernel")


class ContextMap(BaseModel):
    """(e, f): source -> target with e over source.apex and f: target.apex -> apex(e)."""

    model_config = ConfigDict(frozen=True)

    source: Context
    target: Context
    ext: EqExtension
    hom: SketchHom

    def model_post_init(self, __context) -> None:
        if not same_sketch(self.ext.base, self.source.apex):
            raise ShapeError("context map: eq-extension is not over the source context")
        if not same_sketch(self.hom.source, self.target.apex) or not same_sketch(self.hom.target, self.ext.apex):
            raise ShapeError("context map: homomorphism does not run from the target into the apex")
        problems = hom_problems(self.hom)
        if problems:
            raise ShapeError(f"context map: {problems[0]}")

    @property
    def apex(self) -> Sketch:
        return self.ext.apex


def identity_map(ctx: Context) -> ContextMap:
    return ContextMap(source=ctx, target=ctx, ext=EqExtension(base=ctx.apex), hom=identity_hom(ctx.apex))


def hom_map(source: Context, target: Context, f: SketchHom) -> ContextMap:
    """(Id, f) for f: target.apex -> source.apex."""
    return ContextMap(source=source, target=target, ext=EqExtension(base=source.apex), hom=f)


def extension_map(ctx: Context, e: EqExtension) -> ContextMap:
    """(e, Id): ctx -> ctx.extended(e)."""
    ext_ctx = ctx.extended(e)
    return ContextMap(source=ctx, target=ext_ctx, ext=e, hom=inclusion_hom(ext_ctx.apex, e.apex))


def inclusion_map(ctx: Context, e: EqExtension) -> ContextMap:
    """(Id, e): ctx.extended(e) -> ctx."""
    ext_ctx = ctx.extended(e)
    return hom_map(ext_ctx, ctx, inclusion_hom(ctx.apex, ext_ctx.apex))


def compose_map(m01: ContextMap, m12: ContextMap) -> ContextMap:
    """(e0, f0)(e1, f1) = (e0 followed by f0(e1), f1;ε) with e1 reindexed along f0."""
    if not same_sketch(m01.target.apex, m12.source.apex):
        raise ShapeError("compose_map: maps are not composable")
    moved, eps = reindex(m12.ext, m01.hom)
    ext = compose_extensions(m01.ext, moved)
    return ContextMap(source=m01.source, target=m12.target, ext=ext, hom=compose_hom(m12.hom, eps))


# ---------------------------------------------------------------------------
# map equality


class MapEqualityCertificate(BaseModel):
    """A common refinement of the two eq-extensions and an objective equality of the refined homs."""

    model_config = ConfigDict(frozen=True)

    refined: EqExtension
    left: Refinement
    right: Refinement
    objective: ObjectiveEqualityCertificate


def _map_equality_problem(m0: ContextMap, m1: ContextMap, cert: MapEqualityCertificate) -> str:
    if not (same_sketch(m0.source.apex, m1.source.apex) and same_sketch(m0.target.apex, m1.target.apex)):
        return "maps are not parallel"
    if cert.left.e1 != m0.ext or cert.right.e1 != m1.ext:
        return "refinements do not start at the maps' eq-extensions"
    if cert.left.e2 != cert.refined or cert.right.e2 != cert.refined:
        return "refinements do not end at the common refinement"
    if not (check_refinement(cert.left) and check_refinement(cert.right)):
        return "refinement equations fail"
    f0 = compose_hom(m0.hom, cert.left.eps)
    f1 = compose_hom(m1.hom, cert.right.eps)
    if not verify_objective_equality(f0, f1, cert.objective):
        return "objective equality certificate does not verify"
    return ""


def maps_objectively_equal(m0: ContextMap, m1: ContextMap, cert: MapEqualityCertificate) -> bool:
    try:
        problem = _map_equality_problem(m0, m1, cert)
    except (KernelError, IndexError) as exc:
        problem = str(exc)
    if problem:
        logger.info(f"✗ map equality rejected: {problem}")
        return False
    logger.info("✓ map equality verified")
    return True


def _refined_homs(m0: ContextMap, m1: ContextMap) -> tuple[EqExtension, Refinement, Refinement, SketchHom, SketchHom]:
    if not (same_sketch(m0.source.apex, m1.source.apex) and same_sketch(m0.target.apex, m1.target.apex)):
        raise ShapeError("map equality: maps are not parallel")
    refined, r0, r1 = refine_pair(m0.ext, m1.ext)
    return refined, r0, r1, compose_hom(m0.hom, r0.eps), compose_hom(m1.hom, r1.eps)


def map_equality_by_refinement(m0: ContextMap, m1: ContextMap,
                               depth: Optional[int] = None) -> MapEqualityCertificate:
    """Certificate from a common refinement: identity carriers when nodes agree, else a search."""
    refined, r0, r1, f0, f1 = _refined_homs(m0, m1)
    objective = None
    if f0.n == f1.n:
        try:
            objective = certificate_from_edge_equalities(m0.target, f0, f1, depth)
        except MissingWitnessError as exc:
            logger.debug(f"identity carriers failed: {exc}")
    if objective is None:
        objective = search_objective_equality(m0.target, f0, f1, depth)
    if objective is None:
        raise MissingWitnessError("no objective equality found between the refined maps", rule="map equality")
    return MapEqualityCertificate(refined=refined, left=r0, right=r1, objective=objective)


def map_equality_by_agreement(m0: ContextMap, m1: ContextMap, base: Context, e: EqExtension,
                              depth: Optional[int] = None) -> MapEqualityCertificate:
    """Maps out of base.extended(e) whose refined homs agree on base.apex."""
    refined, r0, r1, f0, f1 = _refined_homs(m0, m1)
    objective = agreement_certificate(base, e, f0, f1, depth)
    return MapEqualityCertificate(refined=refined, left=r0, right=r1, objective=objective)


def reflexive_map_certificate(m: ContextMap) -> MapEqualityCertificate:
    return map_equality_by_refinement(m, m)


def inverse_certificates(ctx: Context, e: EqExtension,
                         depth: Optional[int] = None) -> tuple[MapEqualityCertificate, MapEqualityCertificate]:
    """(e,Id)(Id,e) = Id on ctx and (Id,e)(e,Id) = Id on ctx.extended(e)."""
    there, back = extension_map(ctx, e), inclusion_map(ctx, e)
    round_here = compose_map(there, back)
    round_there = compose_map(back, there)
    first = map_equality_by_refinement(round_here, identity_map(ctx), depth)
    second = map_equality_by_agreement(round_there, identity_map(ctx.extended(e)), ctx, e, depth)
    return first, second


def precompose_certificate(cert: MapEqualityCertificate, f: SketchHom) -> MapEqualityCertificate:
    """A certificate for (Id,f)m0 = (Id,f)m1 from one for m0 = m1, f: source.apex -> S."""
    refined, eps = reindex(cert.refined, f)
    base, new_base = f.source, f.target

    def moved(r: Refinement) -> Refinement:
        e1, _ = reindex(r.e1, f)
        tables = {}
        for s in SORTS:
            offset = new_base.count(s) - base.count(s)
            tables[s.value] = tuple(
                i if i < new_base.count(s) else eps(s, r.eps(s, i - offset))
                for i in range(e1.apex.count(s))
            )
        return Refinement(e1=e1, e2=refined, eps=SketchHom(source=e1.apex, target=refined.apex, **tables))

    return MapEqualityCertificate(
        refined=refined, left=moved(cert.left), right=moved(cert.right),
        objective=transport_certificate(cert.objective, eps),
    )


# ---------------------------------------------------------------------------
# 2-cells


class TwoCell(BaseModel):
    """A context map source -> target→."""

    model_config = ConfigDict(frozen=True)

    source: Context
    target: Context
    arrow: ContextMap

    def model_post_init(self, __context) -> None:
        if self.arrow.source != self.source:
            raise ShapeError("2-cell: map does not start at the source context")
        if not same_sketch(self.arrow.target.apex, hom_context(self.target).apex):
            raise ShapeError("2-cell: map does not land in the hom context of the target")

    @property
    def ext(self) -> EqExtension:
        return self.arrow.ext

    @property
    def hom(self) -> SketchHom:
        return self.arrow.hom


def two_cell_from_hom(source: Context, target: Context, ext: EqExtension, alpha: SketchHom) -> TwoCell:
    arrow = ContextMap(source=source, target=hom_context(target), ext=ext, hom=alpha)
    return TwoCell(source=source, target=target, arrow=arrow)


def dom_map(a: TwoCell) -> ContextMap:
    return ContextMap(source=a.source, target=a.target, ext=a.ext, hom=compose_hom(i0(a.target), a.hom))


def cod_map(a: TwoCell) -> ContextMap:
    return ContextMap(source=a.source, target=a.target, ext=a.ext, hom=compose_hom(i1(a.target), a.hom))


def identity_two_cell(m: ContextMap) -> TwoCell:
    b = DerivationBuilder.continuing(m.ext)
    cells, _ = identity_cells(b, m.target, m.hom)
    ext = b.extension()
    g = compose_hom(m.hom, inclusion_hom(m.ext.apex, ext.apex))
    return two_cell_from_hom(m.source, m.target, ext, chain_hom(m.target, ext.apex, [g, g], [cells]))


def whisker_left(m: ContextMap, a: TwoCell) -> TwoCell:
    """m followed by a: plain composition into the hom context."""
    return TwoCell(source=m.source, target=a.target, arrow=compose_map(m, a.arrow))


def _whisker_by_hom(a: TwoCell, m: ContextMap) -> TwoCell:
    arrow = hom_map(hom_context(m.source), hom_context(m.target), hom_arrow(m.hom, m.target, m.source))
    return TwoCell(source=a.source, target=m.target, arrow=compose_map(a.arrow, arrow))


def _whisker_by_extension(a: TwoCell, e: EqExtension, depth: Optional[int]) -> TwoCell:
    """a followed by (e, Id): e reindexed along both sides, refined, and the cell extended over e."""
    base = a.target
    alpha = a.hom
    moved0, eps0 = reindex(e, copy_of(alpha, base, 0))
    moved1, eps1 = reindex(e, copy_of(alpha, base, 1))
    refined, r0, r1 = refine_pair(moved0, moved1)
    images = (compose_hom(eps0, r0.eps), compose_hom(eps1, r1.eps))
    start = compose_hom(alpha, refined.inclusion)
    result = extend_two_cell(base, e, start, depth=depth, images=images)
    ext = compose_extensions(compose_extensions(a.ext, refined), result.ext)
    logger.info(f"✓ whiskered by an eq-extension of {len(e.steps)} steps")
    return two_cell_from_hom(a.source, base.extended(e), ext, result.alpha)


def whisker_right(a: TwoCell, m: ContextMap, depth: Optional[int] = None) -> TwoCell:
    """a followed by m = (e, f), done as (e, Id) then (Id, f)."""
    if not same_sketch(m.source.apex, a.target.apex):
        raise ShapeError("whisker_right: map does not start at the 2-cell's target")
    if m.ext.is_empty():
        return _whisker_by_hom(a, m)
    step = _whisker_by_extension(a, m.ext, depth)
    return _whisker_by_hom(step, hom_map(step.target, m.target, m.hom))


def whisker(a: TwoCell, m: ContextMap, side: Literal["left", "right"], depth: Optional[int] = None) -> TwoCell:
    if side == "left":
        return whisker_left(m, a)
    return whisker_right(a, m, depth)


def whisker_certificates(a: TwoCell, m: ContextMap, side: Literal["left", "right"], result: TwoCell,
                         depth: Optional[int] = None) -> tuple[MapEqualityCertificate, MapEqualityCertificate]:
    """dom and cod of a whiskered cell against the composites they should be."""
    if side == "left":
        expected = (compose_map(m, dom_map(a)), compose_map(m, cod_map(a)))
    else:
        expected = (compose_map(dom_map(a), m), compose_map(cod_map(a), m))
    return (map_equality_by_refinement(dom_map(result), expected[0], depth),
            map_equality_by_refinement(cod_map(result), expected[1], depth))


# ---------------------------------------------------------------------------
# composition of 2-cells


def composition_map(ctx: Context, n: int) -> ContextMap:
    """𝕋^[n] -> 𝕋→ composing the n levels: c_X = θ¹_X…θⁿ_X, c_u = u₀θ¹_Y…θⁿ_Y."""
    if n < 1:
        raise ShapeError("composition_map: need at least one level")
    chain = chain_context(ctx, n)
    lay = layout_of(ctx, n)
    src = ctx.apex
    b = DerivationBuilder(chain.apex)
    nodes = tuple(b.comp([lay.theta_node(level, x) for level in range(1, n + 1)]) for x in range(src.n_count))
    edges, left, right = [], [], []
    for u in range(src.e_count):
        thetas_x = [lay.theta_node(level, src.dom(u)) for level in range(1, n + 1)]
        thetas_y = [lay.theta_node(level, src.cod(u)) for level in range(1, n + 1)]
        last = lay.copy(n, Sort.EDGE, u)
        lt = b.split([lay.copy(0, Sort.EDGE, u)], thetas_y)
        ch = b.chain(thetas_x + [last])
        for level in range(n, 0, -1):
            ch.rewrite(level - 1, naturality_eq(b, lay.left_tri(level, u), lay.right_tri(level, u)))
        edges.append(b.tri(lt)[2])
        left.append(lt)
        right.append(b.eq_as_tri(ch.result(), thetas_x, [last]))
    ext = b.extension()
    copies = [compose_hom(copy_hom(ctx, n, k), ext.inclusion) for k in (0, n)]
    h = chain_hom(ctx, ext.apex, copies,
                  [LevelCells(nodes=nodes, edges=tuple(edges), left=tuple(left), right=tuple(right))])
    return ContextMap(source=chain, target=hom_context(ctx), ext=ext, hom=h)


def vertical_compose(a1: TwoCell, a2: TwoCell, cert: MapEqualityCertificate) -> TwoCell:
    """a1 then a2, given cod(a1) = dom(a2): pair into 𝕋→→ and compose the levels."""
    if not maps_objectively_equal(cod_map(a1), dom_map(a2), cert):
        raise MissingWitnessError("vertical_compose: codomain and domain are not certified equal",
                                  rule="vertical composition")
    base = a1.target
    gamma = cert.objective
    inc = gamma.ext.inclusion
    h0 = compose_hom(compose_hom(a1.hom, cert.left.eps), inc)
    h2 = compose_hom(compose_hom(a2.hom, cert.right.eps), inc)
    apex = gamma.ext.apex
    copies = [copy_of(h0, base, 0), copy_of(h0, base, 1), copy_of(h2, base, 0), copy_of(h2, base, 1)]
    levels = [level_of(h0, base, 1), level_of(gamma.gamma, base, 1), level_of(h2, base, 1)]
    paired = ContextMap(source=a1.source, target=chain_context(base, 3),
                        ext=compose_extensions(cert.refined, gamma.ext),
                        hom=chain_hom(base, apex, copies, levels))
    return TwoCell(source=a1.source, target=base, arrow=compose_map(paired, composition_map(base, 3)))


def horizontal_compose(a: TwoCell, b: TwoCell, depth: Optional[int] = None) -> TwoCell:
    """a: m0 ⇒ m1 and b: n0 ⇒ n1 give (a n0) then (m1 b)."""
    first = whisker_right(a, dom_map(b), depth)
    second = whisker_left(cod_map(a), b)
    return vertical_compose(first, second, map_equality_by_refinement(cod_map(first), dom_map(second), depth))


def horizontal_compose_other(a: TwoCell, b: TwoCell, depth: Optional[int] = None) -> TwoCell:
    """The other order: (m0 b) then (a n1)."""
    first = whisker_left(dom_map(a), b)
    second = whisker_right(a, cod_map(b), depth)
    return vertical_compose(first, second, map_equality_by_refinement(cod_map(first), dom_map(second), depth))


def interchange_certificate(a: TwoCell, b: TwoCell, depth: Optional[int] = None) -> MapEqualityCertificate:
    """Both horizontal composites agree.

    The two composites carry different eq-extensions; they are compared over
    their common refinement.
    """
    depth = depth if depth is not None else get_settings().search_depth + 2
    one, other = horizontal_compose(a, b, depth), horizontal_compose_other(a, b, depth)
    try:
        return map_equality_by_refinement(one.arrow, other.arrow, depth)
    except MissingWitnessError as exc:
        raise MissingWitnessError(f"interchange: {exc.message}", rule="interchange") from exc


# ---------------------------------------------------------------------------
# the involution of 𝕋→→


def _arrow_edge(ctx: Context, g: int) -> tuple:
    """Classify an edge of 𝕋→: ("copy", b, u), ("node", x) or ("edge", u)."""
    src = ctx.apex
    n, e = src.n_count, src.e_count
    if g < 2 * e:
        return "copy", g // e, g % e
    if g < 2 * e + n:
        return "node", g - 2 * e
    return "edge", g - 2 * e - n


def arrow_involution(ctx: Context) -> ContextMap:
    """(e, τ) on 𝕋→→ exchanging the inner level θ and the outer level φ."""
    arrow = hom_context(ctx)
    double = hom_context(arrow)
    la, laa = layout_of(ctx, 1), layout_of(arrow, 1)
    src = ctx.apex
    n, e, t = src.n_count, src.e_count, src.tri_count
    b = DerivationBuilder(double.apex)

    def inner(a: int, g: int) -> int:
        return laa.copy(a, Sort.EDGE, g)

    def outer_node(a: int, x: int) -> int:
        return laa.theta_node(1, la.copy(a, Sort.NODE, x))

    def outer_edge(g: int) -> int:
        return laa.theta_edge(1, g)

    swapped_left, swapped_right = {}, {}
    for u in range(e):
        x, y = src.dom(u), src.cod(u)
        u0, u1 = la.copy(0, Sort.EDGE, u), la.copy(1, Sort.EDGE, u)
        theta_x, theta_y, theta_u = la.theta_node(1, x), la.theta_node(1, y), la.theta_edge(1, u)
        ch = b.chain([outer_edge(u0), inner(1, theta_y)])
        ch.rewrite(0, b.eq_tri(laa.left_tri(1, u0)), backwards=True)
        ch.rewrite(1, b.eq_tri(laa.right_tri(1, theta_y)))
        ch.rewrite(1, b.eq_tri(laa.left_tri(1, theta_y)), backwards=True)
        ch.rewrite(0, b.eq_tri(laa.copy(0, Sort.TRI, la.left_tri(1, u))))
        ch.rewrite(0, b.eq_tri(laa.left_tri(1, theta_u)))
        swapped_left[u] = b.eq_as_tri(ch.result(), [outer_edge(u0)], [inner(1, theta_y)])
        ch = b.chain([inner(0, theta_x), outer_edge(u1)])
        ch.rewrite(1, b.eq_tri(laa.left_tri(1, u1)), backwards=True)
        ch.rewrite(0, b.eq_tri(laa.copy(0, Sort.TRI, la.right_tri(1, u))))
        ch.rewrite(0, b.eq_tri(laa.left_tri(1, theta_u)))
        swapped_right[u] = b.eq_as_tri(ch.result(), [inner(0, theta_x)], [outer_edge(u1)])

    arrow_edges = arrow.apex.e_count
    nodes = [laa.copy(k // n, Sort.NODE, la.copy(a, Sort.NODE, k % n)) for a in (0, 1) for k in range(2 * n)]
    edges = []
    for a in (0, 1):
        for g in range(arrow_edges):
            kind = _arrow_edge(ctx, g)
            if kind[0] == "copy":
                edges.append(laa.copy(kind[1], Sort.EDGE, la.copy(a, Sort.EDGE, kind[2])))
            elif kind[0] == "node":
                edges.append(outer_node(a, kind[1]))
            else:
                edges.append(outer_edge(la.copy(a, Sort.EDGE, kind[1])))
    edges.extend(inner(k // n, la.theta_node(1, k % n)) for k in range(2 * n))
    for g in range(arrow_edges):
        kind = _arrow_edge(ctx, g)
        edges.append(inner(kind[1], la.theta_edge(1, kind[2])) if kind[0] == "copy" else outer_edge(g))
    tris = []
    for a in (0, 1):
        for s in range(arrow.apex.tri_count):
            if s < 2 * t:
                tris.append(laa.copy(s // t, Sort.TRI, la.copy(a, Sort.TRI, s % t)))
            else:
                u, side = divmod(s - 2 * t, 2)
                g = la.copy(a, Sort.EDGE, u)
                tris.append(laa.right_tri(1, g) if side else laa.left_tri(1, g))
    for g in range(arrow_edges):
        kind = _arrow_edge(ctx, g)
        if kind[0] == "copy":
            tris.extend((laa.copy(kind[1], Sort.TRI, la.left_tri(1, kind[2])),
                         laa.copy(kind[1], Sort.TRI, la.right_tri(1, kind[2]))))
        elif kind[0] == "node":
            tris.extend((laa.right_tri(1, g), laa.left_tri(1, g)))
        else:
            tris.extend((swapped_left[kind[1]], swapped_right[kind[1]]))
    tables = {Sort.NODE.value: tuple(nodes), Sort.EDGE.value: tuple(edges), Sort.TRI.value: tuple(tris)}
    for s in SORTS[3:]:
        c = src.count(s)
        tables[s.value] = tuple(laa.copy(j // c, s, la.copy(a, s, j % c)) for a in (0, 1) for j in range(2 * c))
    ext = b.extension()
    tau = SketchHom(source=double.apex, target=ext.apex, **tables)
    logger.info(f"✓ involution of the double arrow context built with {len(ext.steps)} derived steps")
    return ContextMap(source=double, target=double, ext=ext, hom=tau)
