"""Chain contexts 𝕋^[n], the hom context 𝕋→ = 𝕋^[1], and product contexts.

𝕋^[n] is n+1 copies of 𝕋 followed, for each level 1..n, by an edge θ_X from copy
level-1 to copy level for every node X, and for every edge u: X -> Y an edge θ_u
with commutativities (u, θ_Y, θ_u) and (θ_X, u, θ_u). Levels are appended in order,
inside a level all node edges come first, then the edges of the edges.
"""
import logging
from functools import lru_cache
from typing import Sequence

from pydantic import BaseModel, ConfigDict

from src.kernel.errors import ShapeError
from src.kernel.extension import Context
from src.kernel.sketch import SORTS, Sketch, SketchHom, Sort, is_hom, hom_problems
from src.kernel.steps import AddCommutativity, AddPrimitiveEdge

logger = logging.getLogger("aukernel")


def shifted_steps(ctx: Context, offsets: dict[Sort, int]) -> tuple:
    """The steps of ctx translated to start after `offsets` elements of each sort."""
    return tuple(step.translate(lambda sort, i: i + offsets[Sort(sort)]) for step in ctx.steps)


class ChainLayout(BaseModel):
    """Index arithmetic of 𝕋^[n]."""

    model_config = ConfigDict(frozen=True)

    n: int
    counts: dict[Sort, int]

    def copy(self, k: int, sort: Sort, i: int) -> int:
        return k * self.counts[Sort(sort)] + i

    @property
    def nodes(self) -> int:
        return self.counts[Sort.NODE]

    @property
    def edges(self) -> int:
        return self.counts[Sort.EDGE]

    def theta_node(self, level: int, x: int) -> int:
        return (self.n + 1) * self.edges + (level - 1) * (self.nodes + self.edges) + x

    def theta_edge(self, level: int, u: int) -> int:
        return (self.n + 1) * self.edges + (level - 1) * (self.nodes + self.edges) + self.nodes + u

    def left_tri(self, level: int, u: int) -> int:
        return (self.n + 1) * self.counts[Sort.TRI] + (level - 1) * 2 * self.edges + 2 * u

    def right_tri(self, level: int, u: int) -> int:
        return self.left_tri(level, u) + 1


def layout_of(ctx: Context, n: int) -> ChainLayout:
    apex = ctx.apex
    return ChainLayout(n=n, counts={s: apex.count(s) for s in SORTS})


@lru_cache(maxsize=256)
def chain_context(ctx: Context, n: int) -> Context:
    if n < 0:
        raise ShapeError("chain length must be non-negative")
    apex = ctx.apex
    counts = {s: apex.count(s) for s in SORTS}
    steps: list = []
    for k in range(n + 1):
        steps.extend(shifted_steps(ctx, {s: k * counts[s] for s in SORTS}))
    lay = ChainLayout(n=n, counts=counts)
    for level in range(1, n + 1):
        for x in range(apex.n_count):
            steps.append(AddPrimitiveEdge(dom=lay.copy(level - 1, Sort.NODE, x), cod=lay.copy(level, Sort.NODE, x)))
        for u in range(apex.e_count):
            x, y = apex.dom(u), apex.cod(u)
            theta_u = lay.theta_edge(level, u)
            steps.append(AddPrimitiveEdge(dom=lay.copy(level - 1, Sort.NODE, x), cod=lay.copy(level, Sort.NODE, y)))
            steps.append(AddCommutativity(l=lay.copy(level - 1, Sort.EDGE, u), r=lay.theta_node(level, y), c=theta_u))
            steps.append(AddCommutativity(l=lay.theta_node(level, x), r=lay.copy(level, Sort.EDGE, u), c=theta_u))
    result = Context(steps=tuple(steps))
    logger.debug(f"chain context of length {n}: {result.apex.describe()}")
    return result


def hom_context(ctx: Context) -> Context:
    return chain_context(ctx, 1)


def copy_hom(ctx: Context, n: int, k: int) -> SketchHom:
    """The inclusion of 𝕋 as copy k of 𝕋^[n]; for n = 1 these are i0 and i1."""
    apex = ctx.apex
    lay = layout_of(ctx, n)
    return SketchHom(
        source=apex, target=chain_context(ctx, n).apex,
        **{s.value: tuple(lay.copy(k, s, i) for i in range(apex.count(s))) for s in SORTS},
    )


def i0(ctx: Context) -> SketchHom:
    return copy_hom(ctx, 1, 0)


def i1(ctx: Context) -> SketchHom:
    return copy_hom(ctx, 1, 1)


class LevelCells(BaseModel):
    """Images of one θ level: per node and edge of 𝕋 an edge, per edge two commutativities."""

    model_config = ConfigDict(frozen=True)

    nodes: tuple[int, ...]
    edges: tuple[int, ...]
    left: tuple[int, ...]
    right: tuple[int, ...]


def chain_hom(ctx: Context, target: Sketch, copies: Sequence[SketchHom],
              levels: Sequence[LevelCells], check: bool = True) -> SketchHom:
    """The hom 𝕋^[n] -> target given by n+1 copy homs and n levels of cells."""
    n = len(levels)
    if len(copies) != n + 1:
        raise ShapeError("chain_hom: need one more copy than levels")
    apex = ctx.apex
    tables = {s: [] for s in SORTS}
    for f in copies:
        for s in SORTS:
            tables[s].extend(f.table(s))
    for cells in levels:
        if len(cells.nodes) != apex.n_count or len(cells.edges) != apex.e_count:
            raise ShapeError("chain_hom: level cells do not cover the context")
        tables[Sort.EDGE].extend(cells.nodes)
        tables[Sort.EDGE].extend(cells.edges)
        for u in range(apex.e_count):
            tables[Sort.TRI].extend((cells.left[u], cells.right[u]))
    h = SketchHom(source=chain_context(ctx, n).apex, target=target,
                  **{s.value: tuple(tables[s]) for s in SORTS})
    if check and not is_hom(h):
        raise ShapeError(f"chain_hom: not a homomorphism ({'; '.join(hom_problems(h)[:3])})")
    return h


def level_of(h: SketchHom, ctx: Context, level: int, n: int = 1) -> LevelCells:
    """Read the cells of a θ level off a hom out of 𝕋^[n]."""
    apex = ctx.apex
    lay = layout_of(ctx, n)
    return LevelCells(
        nodes=tuple(h.edge(lay.theta_node(level, x)) for x in range(apex.n_count)),
        edges=tuple(h.edge(lay.theta_edge(level, u)) for u in range(apex.e_count)),
        left=tuple(h(Sort.TRI, lay.left_tri(level, u)) for u in range(apex.e_count)),
        right=tuple(h(Sort.TRI, lay.right_tri(level, u)) for u in range(apex.e_count)),
    )


def copy_of(h: SketchHom, ctx: Context, k: int, n: int = 1) -> SketchHom:
    """Restriction of a hom out of 𝕋^[n] to copy k."""
    inc = copy_hom(ctx, n, k)
    return SketchHom(
        source=ctx.apex, target=h.target,
        **{s.value: tuple(h(s, i) for i in inc.table(s)) for s in SORTS},
    )


def hom_arrow(f: SketchHom, src: Context, dst: Context, n: int = 1) -> SketchHom:
    """f^[n]: 𝕋₁^[n] -> 𝕋₂^[n] acting copywise and sending θ cells to θ cells."""
    lay = layout_of(dst, n)
    target = chain_context(dst, n).apex
    copies = [
        SketchHom(source=src.apex, target=target,
                  **{s.value: tuple(lay.copy(k, s, f(s, i)) for i in range(src.apex.count(s))) for s in SORTS})
        for k in range(n + 1)
    ]
    levels = [
        LevelCells(
            nodes=tuple(lay.theta_node(level, f.node(x)) for x in range(src.apex.n_count)),
            edges=tuple(lay.theta_edge(level, f.edge(u)) for u in range(src.apex.e_count)),
            left=tuple(lay.left_tri(level, f.edge(u)) for u in range(src.apex.e_count)),
            right=tuple(lay.right_tri(level, f.edge(u)) for u in range(src.apex.e_count)),
        )
        for level in range(1, n + 1)
    ]
    return chain_hom(src, target, copies, levels)


# ---------------------------------------------------------------------------
# products


def product_context(t0: Context, t1: Context) -> Context:
    """Steps of t0, then the steps of t1 shifted past t0."""
    offsets = {s: t0.apex.count(s) for s in SORTS}
    return Context(steps=tuple(t0.steps) + shifted_steps(t1, offsets))


def product_projections(t0: Context, t1: Context) -> tuple[SketchHom, SketchHom]:
    """Homs t0 -> t0×t1 and t1 -> t0×t1 (the reducts giving the two components)."""
    prod = product_context(t0, t1).apex
    a, b = t0.apex, t1.apex
    left = SketchHom(source=a, target=prod, **{s.value: tuple(range(a.count(s))) for s in SORTS})
    right = SketchHom(source=b, target=prod,
                      **{s.value: tuple(a.count(s) + i for i in range(b.count(s))) for s in SORTS})
    return left, right


def copair_homs(t0: Context, t1: Context, g0: SketchHom, g1: SketchHom) -> SketchHom:
    """The unique hom t0×t1 -> U restricting to g0 and g1."""
    if g0.target != g1.target:
        raise ShapeError("copair_homs: homs land in different sketches")
    prod = product_context(t0, t1).apex
    return SketchHom(source=prod, target=g0.target,
                     **{s.value: g0.table(s) + g1.table(s) for s in SORTS})
