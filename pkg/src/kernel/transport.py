"""Extending a 2-cell along an equivalence extension.

Given α: f0 => f1 for f0, f1: 𝕋₁ -> 𝕋₀ (a hom 𝕋₁→ -> 𝕋₀) and an eq-extension
e1 of 𝕋₁, build an eq-extension e0 of 𝕋₀ and α′ on the hom context of
apex(e1) restricting to α. Both f0 and f1 are pushed through e1 by translating
each step; cells for new nodes come from the universal properties, and every
new edge u: X -> Y gets the naturality equality [α_X, f1 u] = [f0 u, α_Y], from
which its cell comp(f0 u, α_Y) and the two cell commutativities are read off.
"""
import logging
from typing import Optional

from pydantic import BaseModel, ConfigDict

from src.config import get_settings
from src.kernel.arrows import LevelCells, chain_hom, copy_of, layout_of
from src.kernel.builder import DerivationBuilder, PathEq, naturality_eq
from src.kernel.errors import MissingWitnessError, ShapeError, SoundnessError, UnsupportedConstructionError
from src.kernel.extension import Context, EqExtension
from src.kernel.objeq import (
    Initials, ObjectiveEqualityCertificate, Pullbacks, Pushouts, SameNode, Terminals, Witness,
)
from src.kernel.sketch import SORTS, SketchHom, Sort, compose_hom, hom_equal, inclusion_hom, same_sketch
from src.kernel.steps import INVERSION_STEPS

logger = logging.getLogger("aukernel")


class TransportResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    context: Context
    ext: EqExtension
    f0: SketchHom
    f1: SketchHom
    alpha: SketchHom
    witnesses: Optional[tuple[Witness, ...]] = None

    def certificate(self) -> ObjectiveEqualityCertificate:
        if self.witnesses is None:
            raise ShapeError("transport was run without node witnesses")
        return ObjectiveEqualityCertificate(context=self.context, ext=self.ext, gamma=self.alpha,
                                            witnesses=self.witnesses)


class _Transport:
    def __init__(self, ctx: Context, e1: EqExtension, alpha: SketchHom,
                 witnesses: Optional[tuple[Witness, ...]], depth: int,
                 images: Optional[tuple[SketchHom, SketchHom]] = None,
                 builder: Optional[DerivationBuilder] = None):
        if not same_sketch(e1.base, ctx.apex):
            raise ShapeError("transport: extension is not over the 2-cell's context")
        self.ctx, self.e1, self.alpha, self.depth = ctx, e1, alpha, depth
        self.b = builder if builder is not None else DerivationBuilder(alpha.target)
        self.src = ctx.apex
        self.apex1 = e1.apex
        self.translate = images is None
        if images is None:
            self.maps = [{s: list(copy_of(alpha, ctx, k).table(s)) for s in SORTS} for k in (0, 1)]
        else:
            for k, g in enumerate(images):
                if not hom_equal(compose_hom(e1.inclusion, g), copy_of(alpha, ctx, k)):
                    raise ShapeError(f"transport: image {k} does not extend the 2-cell's copy {k}")
            self.maps = [{s: list(g.table(s)) for s in SORTS} for g in images]
        lay = layout_of(ctx, 1)
        self.node_cell = {x: alpha.edge(lay.theta_node(1, x)) for x in range(self.src.n_count)}
        self.cells = {
            u: (alpha.edge(lay.theta_edge(1, u)), alpha(Sort.TRI, lay.left_tri(1, u)),
                alpha(Sort.TRI, lay.right_tri(1, u)))
            for u in range(self.src.e_count)
        }
        self._nat: dict[int, PathEq] = {}
        self.witness = dict(enumerate(witnesses)) if witnesses is not None else None

    # -- lookups -----------------------------------------------------------

    def f(self, k: int, sort: Sort, i: int) -> int:
        return self.maps[k][Sort(sort)][i]

    def has_nat(self, u: int) -> bool:
        return u < self.src.e_count or u in self._nat

    def nat(self, u: int) -> PathEq:
        """[α_X, f1 u] = [f0 u, α_Y]."""
        if u not in self._nat:
            if u >= self.src.e_count:
                raise SoundnessError(f"transport: edge {u} has no naturality proof yet")
            _, left, right = self.cells[u]
            self._nat[u] = naturality_eq(self.b, left, right)
        return self._nat[u]

    def cell(self, u: int) -> tuple[int, int, int]:
        """(α_u, (f0u, α_Y, α_u), (α_X, f1u, α_u))."""
        if u not in self.cells:
            b, a1 = self.b, self.apex1
            ax, ay = self.node_cell[a1.dom(u)], self.node_cell[a1.cod(u)]
            left = b.composite(self.f(0, Sort.EDGE, u), ay)
            right = b.eq_as_tri(self.nat(u), [ax], [self.f(1, Sort.EDGE, u)])
            self.cells[u] = (b.tri(left)[2], left, right)
        return self.cells[u]

    def _wit(self, x: int) -> Optional[Witness]:
        return None if self.witness is None else self.witness[x]

    # -- driver ------------------------------------------------------------

    def run(self) -> TransportResult:
        for k, (step, delta) in enumerate(zip(self.e1.steps, self.e1.replayed.deltas)):
            for lam in ((0, 1) if self.translate else ()):
                moved = step.translate(lambda sort, i, lam=lam: self.f(lam, sort, i))
                image = self.b.add(moved)
                for sort in SORTS:
                    self.maps[lam][sort].extend(getattr(image, sort.value))
            self.handle(step, delta)
            for u in delta.e:
                if u not in self._nat:
                    self._nat[u] = self.generic_nat(u, delta)
            logger.debug(f"transported step {k} ({step.kind})")
        return self.finish()

    def handle(self, step, delta) -> None:
        kind = step.kind
        b = self.b
        if kind in ("list", "list_fillin"):
            raise UnsupportedConstructionError("2-cells cannot be extended over list constructions", rule=step.rule)
        if kind == "terminal":
            t, univ = delta.n[0], delta.ut[0]
            u0, u1 = self.f(0, Sort.TERMINAL, univ), self.f(1, Sort.TERMINAL, univ)
            self.node_cell[t] = b.terminal_edge(u1, self.f(0, Sort.NODE, t))
            if self.witness is not None:
                self.witness[t] = Terminals(x=u0, y=u1)
        elif kind == "initial":
            z, univ = delta.n[0], delta.ui[0]
            u0, u1 = self.f(0, Sort.INITIAL, univ), self.f(1, Sort.INITIAL, univ)
            self.node_cell[z] = b.initial_edge(u0, self.f(1, Sort.NODE, z))
            if self.witness is not None:
                self.witness[z] = Initials(x=u0, y=u1)
        elif kind == "pullback":
            self.pullback_node(delta.upb[0])
        elif kind == "pushout":
            self.pushout_node(delta.upo[0])
        elif kind == "pb_fillin":
            self.pullback_fillin(step, delta)
        elif kind == "po_fillin":
            self.pushout_fillin(step, delta)
        elif isinstance(step, INVERSION_STEPS):
            self.inverse(delta)
        elif kind in ("node", "edge", "comm"):
            raise UnsupportedConstructionError("2-cells extend over equivalence steps only", rule=step.rule)

    # -- universals --------------------------------------------------------

    def pullback_node(self, univ: int) -> None:
        b, a1 = self.b, self.apex1
        pe = a1.pullback_parts(univ)
        u0, u1 = self.f(0, Sort.PULLBACK, univ), self.f(1, Sort.PULLBACK, univ)
        q0, q1 = b.sk.pullback_parts(u0), b.sk.pullback_parts(u1)
        az = self.node_cell[pe["base"]]
        cones, legs = {}, {}
        for i in (1, 2):
            ax = self.node_cell[a1.dom(pe[f"u{i}"])]
            ch = b.chain([q0[f"p{i}"], ax, q1[f"u{i}"]])
            ch.rewrite(1, self.nat(pe[f"u{i}"]))
            ch.rewrite(0, b.eq_tri(q0[f"tri{i}"]))
            cones[i] = b.eq_as_tri(ch.result(), [q0[f"p{i}"], ax], [q1[f"u{i}"]])
            legs[i] = b.composite(q0[f"p{i}"], ax)
        cell, fill1, fill2 = b.pullback_fill(u1, cones[1], cones[2])
        p = pe["apex"]
        self.node_cell[p] = cell
        fills = {1: fill1, 2: fill2}
        for i in (1, 2):
            self._nat[pe[f"p{i}"]] = b.eq_trans(b.eq_tri(fills[i]), b.eq_sym(b.eq_tri(legs[i])))
        if self.witness is not None:
            subs = [a1.dom(pe["u1"]), a1.dom(pe["u2"]), pe["base"]]
            cells = {i: self.cell(pe[f"u{i}"]) for i in (1, 2)}
            self.witness[p] = Pullbacks(
                x=u0, y=u1, g1=self.node_cell[subs[0]], g2=self.node_cell[subs[1]], g3=az,
                w1=self.witness[subs[0]], w2=self.witness[subs[1]], w3=self.witness[subs[2]],
                sq1=cells[1][1], sq2=cells[2][1], sqb1=cells[1][2], sqb2=cells[2][2],
                dd1=legs[1], dd2=legs[2], cone1=cones[1], cone2=cones[2], fill1=fill1, fill2=fill2,
            )

    def pushout_node(self, univ: int) -> None:
        b, a1 = self.b, self.apex1
        pe = a1.pushout_parts(univ)
        u0, u1 = self.f(0, Sort.PUSHOUT, univ), self.f(1, Sort.PUSHOUT, univ)
        q0, q1 = b.sk.pushout_parts(u0), b.sk.pushout_parts(u1)
        az = self.node_cell[pe["base"]]
        cones, legs = {}, {}
        for i in (1, 2):
            ax = self.node_cell[a1.cod(pe[f"u{i}"])]
            ch = b.chain([q0[f"u{i}"], ax, q1[f"j{i}"]])
            ch.rewrite(0, self.nat(pe[f"u{i}"]), backwards=True)
            ch.rewrite(1, b.eq_tri(q1[f"tri{i}"]))
            cones[i] = b.rewrite_target(b.split([q0[f"u{i}"]], [ax, q1[f"j{i}"]]), ch.result().tri)
            legs[i] = b.composite(ax, q1[f"j{i}"])
        cell, fill1, fill2 = b.pushout_fill(u0, cones[1], cones[2])
        q = pe["apex"]
        self.node_cell[q] = cell
        fills = {1: fill1, 2: fill2}
        for i in (1, 2):
            self._nat[pe[f"j{i}"]] = b.eq_trans(b.eq_tri(legs[i]), b.eq_sym(b.eq_tri(fills[i])))
        if self.witness is not None:
            subs = [a1.cod(pe["u1"]), a1.cod(pe["u2"]), pe["base"]]
            cells = {i: self.cell(pe[f"u{i}"]) for i in (1, 2)}
            self.witness[q] = Pushouts(
                x=u0, y=u1, g1=self.node_cell[subs[0]], g2=self.node_cell[subs[1]], g3=az,
                w1=self.witness[subs[0]], w2=self.witness[subs[1]], w3=self.witness[subs[2]],
                sq1=cells[1][1], sq2=cells[2][1], sqb1=cells[1][2], sqb2=cells[2][2],
                dd1=legs[1], dd2=legs[2], cone1=cones[1], cone2=cones[2], fill1=fill1, fill2=fill2,
            )

    # -- fillins and inverses ------------------------------------------------

    def pullback_fillin(self, step, delta) -> None:
        b, a1 = self.b, self.apex1
        pe = a1.pullback_parts(step.univ)
        w = delta.e[0]
        av, ap = self.node_cell[a1.dom(w)], self.node_cell[pe["apex"]]
        w0, w1 = self.f(0, Sort.EDGE, w), self.f(1, Sort.EDGE, w)
        univ1 = self.f(1, Sort.PULLBACK, step.univ)
        targets = []
        for i, t in ((1, delta.tri[0]), (2, delta.tri[1])):
            v = a1.tri_c[t]
            q = self.f(1, Sort.EDGE, pe[f"p{i}"])
            ch = b.chain([av, w1, q])
            ch.rewrite(1, b.eq_tri(self.f(1, Sort.TRI, t)))
            targets.append(b.tri(b.eq_as_tri(ch.result(), [av, w1], [q]))[2])
            ch = b.chain([w0, ap, q])
            ch.rewrite(1, self.nat(pe[f"p{i}"]))
            ch.rewrite(0, b.eq_tri(self.f(0, Sort.TRI, t)))
            ch.rewrite(0, self.nat(v), backwards=True)
            b.eq_as_tri(ch.result(), [w0, ap], [q])
        lhs, rhs = b.comp([av, w1]), b.comp([w0, ap])
        unique = b.pullback_unique(univ1, targets[0], targets[1], lhs, rhs)
        self._nat[w] = PathEq(lhs=(av, w1), rhs=(w0, ap), tri=unique)

    def pushout_fillin(self, step, delta) -> None:
        b, a1 = self.b, self.apex1
        pe = a1.pushout_parts(step.univ)
        w = delta.e[0]
        aq, av = self.node_cell[pe["apex"]], self.node_cell[a1.cod(w)]
        w0, w1 = self.f(0, Sort.EDGE, w), self.f(1, Sort.EDGE, w)
        univ0 = self.f(0, Sort.PUSHOUT, step.univ)
        targets = []
        for i, t in ((1, delta.tri[0]), (2, delta.tri[1])):
            v = a1.tri_c[t]
            j = self.f(0, Sort.EDGE, pe[f"j{i}"])
            ch = b.chain([j, aq, w1])
            ch.rewrite(0, self.nat(pe[f"j{i}"]), backwards=True)
            ch.rewrite(1, b.eq_tri(self.f(1, Sort.TRI, t)))
            ch.rewrite(0, self.nat(v))
            targets.append(b.tri(b.rewrite_target(b.split([j], [aq, w1]), ch.result().tri))[2])
            ch = b.chain([j, w0, av])
            ch.rewrite(0, b.eq_tri(self.f(0, Sort.TRI, t)))
            b.rewrite_target(b.split([j], [w0, av]), ch.result().tri)
        lhs, rhs = b.comp([aq, w1]), b.comp([w0, av])
        unique = b.pushout_unique(univ0, targets[0], targets[1], lhs, rhs)
        self._nat[w] = PathEq(lhs=(aq, w1), rhs=(w0, av), tri=unique)

    def inverse(self, delta) -> None:
        b, a1 = self.b, self.apex1
        t1, t2 = delta.tri[0], delta.tri[1]
        u, inv = a1.tri_l[t1], delta.e[0]
        ax, ay = self.node_cell[a1.dom(u)], self.node_cell[a1.cod(u)]
        ch = b.chain([ay, self.f(1, Sort.EDGE, inv)])
        ch.rewrite(0, b.eq_tri(b.left_unit(ay)), backwards=True)
        ch.rewrite(0, b.eq_tri(self.f(0, Sort.TRI, t2)), backwards=True)
        ch.rewrite(1, self.nat(u), backwards=True)
        ch.rewrite(2, b.eq_tri(self.f(1, Sort.TRI, t1)))
        ch.rewrite(1, b.eq_tri(b.right_unit(ax)))
        self._nat[inv] = ch.result()

    # -- edges defined by a commutativity, identities, fillins into 1 / out of 0

    def generic_nat(self, u: int, delta) -> PathEq:
        b, a1 = self.b, self.apex1
        ax, ay = self.node_cell[a1.dom(u)], self.node_cell[a1.cod(u)]
        u0, u1 = self.f(0, Sort.EDGE, u), self.f(1, Sort.EDGE, u)
        candidates = list(delta.tri) + [t for t in range(a1.tri_count) if t not in delta.tri]
        if not a1.is_identity(u):
            for t in candidates:
                l, r, c = a1.tri(t)
                if c == u and l != u and r != u and self.has_nat(l) and self.has_nat(r):
                    return self.nat_from_tri(t)
        eq = b.prove([ax, u1], [u0, ay], self.depth)
        if eq is None:
            raise SoundnessError(f"transport: no naturality proof for edge {u}")
        return eq

    def nat_from_tri(self, t: int) -> PathEq:
        """(l, r, w) with l and r natural makes w natural."""
        b, a1 = self.b, self.apex1
        l, r, _ = a1.tri(t)
        ax = self.node_cell[a1.dom(l)]
        ch = b.chain([ax, self.f(1, Sort.EDGE, a1.tri_c[t])])
        ch.rewrite(1, b.eq_tri(self.f(1, Sort.TRI, t)), backwards=True)
        ch.rewrite(0, self.nat(l))
        ch.rewrite(1, self.nat(r))
        ch.rewrite(0, b.eq_tri(self.f(0, Sort.TRI, t)))
        return ch.result()

    # -- assembly ------------------------------------------------------------

    def finish(self) -> TransportResult:
        a1 = self.apex1
        cells = [self.cell(u) for u in range(a1.e_count)]
        ext = self.b.extension()
        apex0 = ext.apex
        homs = [
            SketchHom(source=a1, target=apex0, **{s.value: tuple(self.maps[k][s]) for s in SORTS})
            for k in (0, 1)
        ]
        context = self.ctx.extended(self.e1)
        levels = [LevelCells(
            nodes=tuple(self.node_cell[x] for x in range(a1.n_count)),
            edges=tuple(c[0] for c in cells),
            left=tuple(c[1] for c in cells),
            right=tuple(c[2] for c in cells),
        )]
        alpha = chain_hom(context, apex0, homs, levels)
        witnesses = None
        if self.witness is not None:
            witnesses = tuple(self.witness[x] for x in range(a1.n_count))
        logger.info(f"✓ 2-cell extended over {len(self.e1.steps)} steps with {len(ext.steps)} derived steps")
        return TransportResult(context=context, ext=ext, f0=homs[0], f1=homs[1], alpha=alpha, witnesses=witnesses)


def extend_two_cell(ctx: Context, e1: EqExtension, alpha: SketchHom,
                    witnesses: Optional[tuple[Witness, ...]] = None,
                    depth: Optional[int] = None,
                    images: Optional[tuple[SketchHom, SketchHom]] = None,
                    builder: Optional[DerivationBuilder] = None) -> TransportResult:
    """α: 𝕋₁→ -> 𝕋₀ and e1 over 𝕋₁ give e0 over 𝕋₀ and α′ on (apex e1)→ restricting to α.

    With `images` the two extensions of f0 and f1 over e1 are given (homs from
    apex(e1) into alpha.target) and only the cells are built; otherwise e1 is
    translated along f0 and along f1 into e0.
    """
    depth = depth if depth is not None else get_settings().search_depth
    return _Transport(ctx, e1, alpha, witnesses, depth, images, builder).run()


def identity_cells(b: DerivationBuilder, ctx: Context, f: SketchHom) -> tuple[LevelCells, tuple[Witness, ...]]:
    """Cells of the identity 2-cell on f: θ_X = id, θ_u = f(u), unit commutativities."""
    src = ctx.apex
    nodes = tuple(b.ident(f.node(x)) for x in range(src.n_count))
    edges = tuple(f.edge(u) for u in range(src.e_count))
    cells = LevelCells(
        nodes=nodes, edges=edges,
        left=tuple(b.right_unit(u) for u in edges),
        right=tuple(b.left_unit(u) for u in edges),
    )
    return cells, tuple(SameNode(tri=b.left_unit(g)) for g in nodes)


def identity_cell_hom(ctx: Context, f: SketchHom) -> tuple[EqExtension, SketchHom, tuple[Witness, ...]]:
    """The identity 2-cell on f: 𝕋 -> S as an eq-extension of S and a hom 𝕋→ -> its apex."""
    b = DerivationBuilder(f.target)
    cells, witnesses = identity_cells(b, ctx, f)
    ext = b.extension()
    g = compose_hom(f, ext.inclusion)
    return ext, chain_hom(ctx, ext.apex, [g, g], [cells]), witnesses


def agreement_certificate(ctx: Context, e1: EqExtension, g0: SketchHom, g1: SketchHom,
                          depth: Optional[int] = None) -> ObjectiveEqualityCertificate:
    """g0, g1: apex(e1) -> S that agree on ctx.apex are objectively equal.

    The identity 2-cell on the common restriction is extended over e1 with g0 and
    g1 as the two images.
    """
    base = compose_hom(e1.inclusion, g0)
    if not hom_equal(base, compose_hom(e1.inclusion, g1)):
        raise MissingWitnessError("homomorphisms differ on the base context", rule="objective equality")
    b = DerivationBuilder(g0.target)
    cells, witnesses = identity_cells(b, ctx, base)
    apex = b.sketch()
    incl = inclusion_hom(g0.target, apex)
    start = compose_hom(base, incl)
    alpha = chain_hom(ctx, apex, [start, start], [cells])
    images = (compose_hom(g0, incl), compose_hom(g1, incl))
    result = extend_two_cell(ctx, e1, alpha, witnesses, depth, images=images, builder=b)
    return result.certificate()
