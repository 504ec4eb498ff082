"""Object equalities and objective equality of homomorphisms.

A witness states why an edge γ: X -> Y is forced to be an identity in strict
models: X and Y are the same node with γ ⊴ id, both are terminal (initial), or
both are pullbacks (pushouts) of data related by object equalities with the
commutativities of the comparison diagram. List witnesses are checked but not
manipulated.

Pullback witness, X = pb(u1, u2) with projections p_i, Y = pb(v1, v2) with q_i:
    sq_i   = (u_i, γ3, c_i)    sqb_i  = (γ_i, v_i, c_i)
    dd_i   = (p_i, γ_i, d_i)   cone_i = (d_i, v_i, e)     fill_i = (γ, q_i, d_i)
Pushout witness, X = po(u1, u2) with injections j_i, Y = po(v1, v2) with k_i:
    sq_i   = (u_i, γ_i, c_i)   sqb_i  = (γ3, v_i, c_i)
    dd_i   = (γ_i, k_i, d_i)   cone_i = (u_i, d_i, e)     fill_i = (j_i, γ, d_i)
"""
import logging
from typing import Annotated, Literal, Optional, Sequence, Union

from pydantic import BaseModel, ConfigDict, Field

from src.config import get_settings
from src.kernel.arrows import LevelCells, chain_hom, hom_arrow, hom_context, layout_of, i0, i1
from src.kernel.builder import DerivationBuilder, PathEq
from src.kernel.errors import KernelError, MissingWitnessError, ShapeError, UnsupportedConstructionError
from src.kernel.extension import Context, EqExtension, reindex
from src.kernel.sketch import (
    Sketch, SketchHom, Sort, compose_hom, hom_equal, inclusion_hom, is_hom, same_sketch,
)
from src.kernel.steps import unary_forms

logger = logging.getLogger("aukernel")


class SameNode(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["same_node"] = "same_node"
    tri: int


class Terminals(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["terminals"] = "terminals"
    x: int
    y: int


class Initials(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["initials"] = "initials"
    x: int
    y: int


class _Comparison(BaseModel):
    model_config = ConfigDict(frozen=True)

    x: int
    y: int
    g1: int
    g2: int
    g3: int
    w1: "Witness"
    w2: "Witness"
    w3: "Witness"
    sq1: int
    sq2: int
    sqb1: int
    sqb2: int
    dd1: int
    dd2: int
    cone1: int
    cone2: int
    fill1: int
    fill2: int

    def sub(self, i: int) -> tuple[int, "Witness"]:
        return ((self.g1, self.w1), (self.g2, self.w2), (self.g3, self.w3))[i - 1]

    def tris(self, name: str, i: int) -> int:
        return getattr(self, f"{name}{i}")


class Pullbacks(_Comparison):
    kind: Literal["pullbacks"] = "pullbacks"


class Pushouts(_Comparison):
    kind: Literal["pushouts"] = "pushouts"


class Lists(BaseModel):
    """γ: L(A) -> L(B) is L(γ_A): it preserves the empty list through a terminal edge τ
    and commutes with cons through the product map π = γ_A × γ."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["lists"] = "lists"
    x: int
    y: int
    ga: int
    wa: "Witness"
    tau: int
    eps1: int
    eps2: int
    pi: int
    pi1a: int
    pi1b: int
    pi2a: int
    pi2b: int
    cons1: int
    cons2: int


Witness = Annotated[
    Union[SameNode, Terminals, Initials, Pullbacks, Pushouts, Lists],
    Field(discriminator="kind"),
]

Pullbacks.model_rebuild()
Pushouts.model_rebuild()
Lists.model_rebuild()


# ---------------------------------------------------------------------------
# verification


class _Mismatch(Exception):
    pass


def _need(condition: bool, message: str) -> None:
    if not condition:
        raise _Mismatch(message)


def _tri(s: Sketch, t: int) -> tuple[int, int, int]:
    _need(0 <= t < s.tri_count, f"commutativity {t} out of range")
    return s.tri(t)


def _shape(s: Sketch, t: int, l: Optional[int], r: Optional[int], c: Optional[int]) -> tuple[int, int, int]:
    found = _tri(s, t)
    for got, want in zip(found, (l, r, c)):
        _need(want is None or got == want, f"commutativity {t} is {found}")
    return found


def _universal_at(s: Sketch, kind: str, x: int) -> Optional[int]:
    if kind == "pullback":
        return next((w for w in range(s.upb_count) if s.pullback_parts(w)["apex"] == x), None)
    if kind == "pushout":
        return next((w for w in range(s.upo_count) if s.pushout_parts(w)["apex"] == x), None)
    return next((w for w in range(s.ul_count) if s.list_parts(w)["list"] == x), None)


def _check(s: Sketch, g: int, w) -> None:
    _need(0 <= g < s.e_count, f"edge {g} out of range")
    x, y = s.dom(g), s.cod(g)
    if w.kind == "same_node":
        _need(x == y, "SameNode needs an endomorphism")
        _need(_tri(s, w.tri) in unary_forms(s, g, s.ident(x)), "commutativity does not relate γ and id")
    elif w.kind == "terminals":
        _need(0 <= w.x < s.ut_count and 0 <= w.y < s.ut_count, "terminal universal out of range")
        _need(s.ut_n[w.x] == x and s.ut_n[w.y] == y, "endpoints are not the terminal nodes")
    elif w.kind == "initials":
        _need(0 <= w.x < s.ui_count and 0 <= w.y < s.ui_count, "initial universal out of range")
        _need(s.ui_n[w.x] == x and s.ui_n[w.y] == y, "endpoints are not the initial nodes")
    elif w.kind == "pullbacks":
        _check_pullbacks(s, g, w)
    elif w.kind == "pushouts":
        _check_pushouts(s, g, w)
    else:
        _check_lists(s, g, w)


def _check_pullbacks(s: Sketch, g: int, w: Pullbacks) -> None:
    _need(0 <= w.x < s.upb_count and 0 <= w.y < s.upb_count, "pullback universal out of range")
    px, py = s.pullback_parts(w.x), s.pullback_parts(w.y)
    _need(px["apex"] == s.dom(g) and py["apex"] == s.cod(g), "endpoints are not the pullback nodes")
    ends = {1: (s.dom(px["u1"]), s.dom(py["u1"])), 2: (s.dom(px["u2"]), s.dom(py["u2"])),
            3: (px["base"], py["base"])}
    for i in (1, 2, 3):
        gi, wi = w.sub(i)
        _need(0 <= gi < s.e_count and (s.dom(gi), s.cod(gi)) == ends[i], f"γ{i} has the wrong endpoints")
        _check(s, gi, wi)
    e = _tri(s, w.cone1)[2]
    for i in (1, 2):
        gi = w.sub(i)[0]
        u, v, p, q = px[f"u{i}"], py[f"u{i}"], px[f"p{i}"], py[f"p{i}"]
        c = _shape(s, w.tris("sq", i), u, w.g3, None)[2]
        _shape(s, w.tris("sqb", i), gi, v, c)
        d = _shape(s, w.tris("dd", i), p, gi, None)[2]
        _shape(s, w.tris("cone", i), d, v, e)
        _shape(s, w.tris("fill", i), g, q, d)


def _check_pushouts(s: Sketch, g: int, w: Pushouts) -> None:
    _need(0 <= w.x < s.upo_count and 0 <= w.y < s.upo_count, "pushout universal out of range")
    px, py = s.pushout_parts(w.x), s.pushout_parts(w.y)
    _need(px["apex"] == s.dom(g) and py["apex"] == s.cod(g), "endpoints are not the pushout nodes")
    ends = {1: (s.cod(px["u1"]), s.cod(py["u1"])), 2: (s.cod(px["u2"]), s.cod(py["u2"])),
            3: (px["base"], py["base"])}
    for i in (1, 2, 3):
        gi, wi = w.sub(i)
        _need(0 <= gi < s.e_count and (s.dom(gi), s.cod(gi)) == ends[i], f"γ{i} has the wrong endpoints")
        _check(s, gi, wi)
    e = _tri(s, w.cone1)[2]
    for i in (1, 2):
        gi = w.sub(i)[0]
        u, v, j, k = px[f"u{i}"], py[f"u{i}"], px[f"j{i}"], py[f"j{i}"]
        c = _shape(s, w.tris("sq", i), u, gi, None)[2]
        _shape(s, w.tris("sqb", i), w.g3, v, c)
        d = _shape(s, w.tris("dd", i), gi, k, None)[2]
        _shape(s, w.tris("cone", i), u, d, e)
        _shape(s, w.tris("fill", i), j, g, d)


def _check_lists(s: Sketch, g: int, w: Lists) -> None:
    _need(0 <= w.x < s.ul_count and 0 <= w.y < s.ul_count, "list universal out of range")
    lx, ly = s.list_parts(w.x), s.list_parts(w.y)
    _need(lx["list"] == s.dom(g) and ly["list"] == s.cod(g), "endpoints are not the list nodes")
    _need(0 <= w.ga < s.e_count and (s.dom(w.ga), s.cod(w.ga)) == (lx["a"], ly["a"]), "γ_A has the wrong endpoints")
    _check(s, w.ga, w.wa)
    _need(0 <= w.tau < s.e_count and (s.dom(w.tau), s.cod(w.tau)) == (lx["terminal"], ly["terminal"]),
          "τ is not an edge between the terminal nodes")
    c0 = _shape(s, w.eps1, lx["eps"], g, None)[2]
    _shape(s, w.eps2, w.tau, ly["eps"], c0)
    _need(0 <= w.pi < s.e_count and (s.dom(w.pi), s.cod(w.pi)) == (lx["product"], ly["product"]),
          "π is not an edge between the products")
    m1 = _shape(s, w.pi1a, w.pi, ly["p1"], None)[2]
    _shape(s, w.pi1b, lx["p1"], w.ga, m1)
    m2 = _shape(s, w.pi2a, w.pi, ly["p2"], None)[2]
    _shape(s, w.pi2b, lx["p2"], g, m2)
    c1 = _shape(s, w.cons1, lx["cons"], g, None)[2]
    _shape(s, w.cons2, w.pi, ly["cons"], c1)


def verify_object_equality(s: Sketch, g: int, w: Witness) -> bool:
    try:
        _check(s, g, w)
    except (_Mismatch, KernelError, IndexError, KeyError) as exc:
        logger.debug(f"✗ object equality at edge {g}: {exc}")
        return False
    return True


def witness_explanation(s: Sketch, g: int, w: Witness) -> str:
    """Why a witness fails, empty when it verifies."""
    try:
        _check(s, g, w)
    except (_Mismatch, KernelError, IndexError, KeyError) as exc:
        return str(exc)
    return ""


# ---------------------------------------------------------------------------
# closure under identity, composition, inverses and parallel edges


def _between(b: DerivationBuilder, t1: int, t2: int) -> PathEq:
    """(l1, r1, c) and (l2, r2, c) read as [l1, r1] = [l2, r2]."""
    return b.eq_trans(b.eq_tri(t1), b.eq_sym(b.eq_tri(t2)))


def _square(b: DerivationBuilder, w, i: int) -> PathEq:
    return _between(b, w.tris("sq", i), w.tris("sqb", i))


def _projection(b: DerivationBuilder, w, i: int) -> PathEq:
    """Pullbacks: [γ, q_i] = [p_i, γ_i].  Pushouts: [j_i, γ] = [γ_i, k_i]."""
    return _between(b, w.tris("fill", i), w.tris("dd", i))


def _lists_unsupported() -> None:
    raise UnsupportedConstructionError("closure of list object equalities is not supported", rule="objeq")


def build_pullback_equality(b: DerivationBuilder, src: int, dst: int, subs: Sequence[tuple[int, Witness]],
                            squares: Sequence[PathEq]) -> tuple[int, Pullbacks]:
    """Fillin γ: pb(src) -> pb(dst) from sub-equalities h_i and squares [u_i, h3] = [h_i, v_i]."""
    sp, dp = b.sk.pullback_parts(src), b.sk.pullback_parts(dst)
    (h1, _), (h2, _), (h3, _) = subs
    hs = {1: h1, 2: h2}
    sq, sqb, dd = {}, {}, {}
    for i in (1, 2):
        sq[i] = b.composite(sp[f"u{i}"], h3)
        sqb[i] = b.eq_as_tri(b.eq_sym(squares[i - 1]), [hs[i]], [dp[f"u{i}"]])
        dd[i] = b.composite(sp[f"p{i}"], hs[i])
    cone1 = b.comp_tri([sp["p1"], h1, dp["u1"]])
    ch = b.chain([sp["p2"], h2, dp["u2"]])
    ch.rewrite(1, squares[1], backwards=True)
    ch.rewrite(0, b.eq_tri(sp["tri2"]))
    ch.rewrite(0, b.eq_tri(sp["tri1"]), backwards=True)
    ch.rewrite(1, squares[0])
    cone2 = b.eq_as_tri(ch.result(), [sp["p2"], h2], [dp["u2"]])
    g, fill1, fill2 = b.pullback_fill(dst, cone1, cone2)
    witness = Pullbacks(
        x=src, y=dst, g1=h1, g2=h2, g3=h3, w1=subs[0][1], w2=subs[1][1], w3=subs[2][1],
        sq1=sq[1], sq2=sq[2], sqb1=sqb[1], sqb2=sqb[2], dd1=dd[1], dd2=dd[2],
        cone1=cone1, cone2=cone2, fill1=fill1, fill2=fill2,
    )
    return g, witness


def build_pushout_equality(b: DerivationBuilder, src: int, dst: int, subs: Sequence[tuple[int, Witness]],
                           squares: Sequence[PathEq]) -> tuple[int, Pushouts]:
    """Fillin γ: po(src) -> po(dst) from sub-equalities h_i and squares [u_i, h_i] = [h3, v_i]."""
    sp, dp = b.sk.pushout_parts(src), b.sk.pushout_parts(dst)
    (h1, _), (h2, _), (h3, _) = subs
    hs = {1: h1, 2: h2}
    sq, sqb, dd = {}, {}, {}
    for i in (1, 2):
        sq[i] = b.composite(sp[f"u{i}"], hs[i])
        sqb[i] = b.eq_as_tri(b.eq_sym(squares[i - 1]), [h3], [dp[f"u{i}"]])
        dd[i] = b.composite(hs[i], dp[f"j{i}"])
    cone1 = b.split([sp["u1"]], [h1, dp["j1"]])
    ch = b.chain([sp["u2"], h2, dp["j2"]])
    ch.rewrite(0, squares[1])
    ch.rewrite(1, b.eq_tri(dp["tri2"]))
    ch.rewrite(1, b.eq_tri(dp["tri1"]), backwards=True)
    ch.rewrite(0, squares[0], backwards=True)
    cone2 = b.rewrite_target(b.split([sp["u2"]], [h2, dp["j2"]]), ch.result().tri)
    g, fill1, fill2 = b.pushout_fill(src, cone1, cone2)
    witness = Pushouts(
        x=src, y=dst, g1=h1, g2=h2, g3=h3, w1=subs[0][1], w2=subs[1][1], w3=subs[2][1],
        sq1=sq[1], sq2=sq[2], sqb1=sqb[1], sqb2=sqb[2], dd1=dd[1], dd2=dd[2],
        cone1=cone1, cone2=cone2, fill1=fill1, fill2=fill2,
    )
    return g, witness


def collapse(b: DerivationBuilder, g: int, w: Witness) -> int:
    """U(id(X), γ) for an object equality γ: X => X."""
    x = b.dom(g)
    ident = b.ident(x)
    if w.kind == "same_node":
        return b.canonical(w.tri, ident, g)
    if w.kind == "terminals":
        return b.terminal_unique(w.x, ident, g)
    if w.kind == "initials":
        return b.initial_unique(w.x, ident, g)
    if w.kind == "lists":
        _lists_unsupported()
    units = {i: collapse(b, *w.sub(i)) for i in (1, 2, 3)}
    if w.kind == "pullbacks":
        parts = b.sk.pullback_parts(w.x)
        for i in (1, 2):
            gi, p = w.sub(i)[0], parts[f"p{i}"]
            ch = b.chain([g, p])
            ch.use(_projection(b, w, i))
            ch.rewrite(1, b.eq_unary(units[i], gi, b.ident(b.cod(p))))
            ch.rewrite(0, b.eq_tri(b.right_unit(p)))
            b.eq_as_tri(ch.result(), [g], [p])
            b.left_unit(p)
        return b.pullback_unique(w.x, parts["p1"], parts["p2"], ident, g)
    parts = b.sk.pushout_parts(w.x)
    for i in (1, 2):
        gi, j = w.sub(i)[0], parts[f"j{i}"]
        ch = b.chain([j, g])
        ch.use(_projection(b, w, i))
        ch.rewrite(0, b.eq_unary(units[i], gi, b.ident(b.dom(j))))
        ch.rewrite(0, b.eq_tri(b.left_unit(j)))
        b.eq_as_tri(ch.result(), [j], [g])
        b.right_unit(j)
    return b.pushout_unique(w.x, parts["j1"], parts["j2"], ident, g)


def compose(b: DerivationBuilder, g: int, w: Witness, g2: int, w2: Witness) -> tuple[int, int, Witness]:
    """An object equality δ with (γ, γ′, δ)."""
    if b.cod(g) != b.dom(g2):
        raise ShapeError("compose: object equalities are not composable")
    if w.kind == "same_node":
        return g2, b.rewrite_left(b.left_unit(g2), collapse(b, g, w)), w2
    if w2.kind == "same_node":
        return g, b.rewrite_right(b.right_unit(g), collapse(b, g2, w2)), w
    if w.kind != w2.kind:
        raise MissingWitnessError(f"cannot compose {w.kind} with {w2.kind} witnesses", rule="objeq")
    if w.kind == "lists":
        _lists_unsupported()
    outer = b.composite(g, g2)
    c = b.tri(outer)[2]
    if w.kind == "terminals":
        return c, outer, Terminals(x=w.x, y=w2.y)
    if w.kind == "initials":
        return c, outer, Initials(x=w.x, y=w2.y)
    subs = {i: compose(b, *w.sub(i), *w2.sub(i)) for i in (1, 2, 3)}
    d3, t3, _ = subs[3]
    squares = []
    if w.kind == "pullbacks":
        src = b.sk.pullback_parts(w.x)
        for i in (1, 2):
            ti = subs[i][1]
            ch = b.chain([src[f"u{i}"], d3])
            ch.rewrite(1, b.eq_tri(t3), backwards=True)
            ch.rewrite(0, _square(b, w, i))
            ch.rewrite(1, _square(b, w2, i))
            ch.rewrite(0, b.eq_tri(ti))
            squares.append(ch.result())
        delta, witness = build_pullback_equality(b, w.x, w2.y, [(s[0], s[2]) for s in subs.values()], squares)
        dst = b.sk.pullback_parts(w2.y)
        legs = []
        for i in (1, 2):
            r = dst[f"p{i}"]
            ch = b.chain([c, r])
            ch.rewrite(0, b.eq_tri(outer), backwards=True)
            ch.rewrite(1, _projection(b, w2, i))
            ch.rewrite(0, _projection(b, w, i))
            ch.rewrite(1, b.eq_tri(subs[i][1]))
            legs.append(b.tri(b.eq_as_tri(ch.result(), [c], [r]))[2])
        unique = b.pullback_unique(w2.y, legs[0], legs[1], c, delta)
    else:
        src = b.sk.pushout_parts(w.x)
        for i in (1, 2):
            di, ti, _ = subs[i]
            ch = b.chain([src[f"u{i}"], di])
            ch.rewrite(1, b.eq_tri(ti), backwards=True)
            ch.rewrite(0, _square(b, w, i))
            ch.rewrite(1, _square(b, w2, i))
            ch.rewrite(0, b.eq_tri(t3))
            squares.append(ch.result())
        delta, witness = build_pushout_equality(b, w.x, w2.y, [(s[0], s[2]) for s in subs.values()], squares)
        legs = []
        for i in (1, 2):
            j = src[f"j{i}"]
            ch = b.chain([j, c])
            ch.rewrite(1, b.eq_tri(outer), backwards=True)
            ch.rewrite(0, _projection(b, w, i))
            ch.rewrite(1, _projection(b, w2, i))
            ch.rewrite(0, b.eq_tri(subs[i][1]))
            legs.append(b.tri(b.eq_as_tri(ch.result(), [j], [c]))[2])
        unique = b.pushout_unique(w.x, legs[0], legs[1], c, delta)
    logger.debug(f"composed {w.kind} object equalities {g}, {g2} into {delta}")
    return delta, b.rewrite_target(outer, unique), witness


def _round_trip(b: DerivationBuilder, a: int, wa, a2: int, wa2, sub_tris: dict[int, int]) -> int:
    """(a, a2, id) for comparison equalities whose components compose to identities."""
    outer = b.composite(a, a2)
    c = b.tri(outer)[2]
    ident = b.ident(b.dom(a))
    if wa.kind == "pullbacks":
        parts = b.sk.pullback_parts(wa.x)
        for i in (1, 2):
            p = parts[f"p{i}"]
            ch = b.chain([c, p])
            ch.rewrite(0, b.eq_tri(outer), backwards=True)
            ch.rewrite(1, _projection(b, wa2, i))
            ch.rewrite(0, _projection(b, wa, i))
            ch.rewrite(1, b.eq_tri(sub_tris[i]))
            ch.rewrite(0, b.eq_tri(b.right_unit(p)))
            b.eq_as_tri(ch.result(), [c], [p])
            b.left_unit(p)
        unique = b.pullback_unique(wa.x, parts["p1"], parts["p2"], ident, c)
    else:
        parts = b.sk.pushout_parts(wa.x)
        for i in (1, 2):
            j = parts[f"j{i}"]
            ch = b.chain([j, c])
            ch.rewrite(1, b.eq_tri(outer), backwards=True)
            ch.rewrite(0, _projection(b, wa, i))
            ch.rewrite(1, _projection(b, wa2, i))
            ch.rewrite(0, b.eq_tri(sub_tris[i]))
            ch.rewrite(0, b.eq_tri(b.left_unit(j)))
            b.eq_as_tri(ch.result(), [j], [c])
            b.right_unit(j)
        unique = b.pushout_unique(wa.x, parts["j1"], parts["j2"], ident, c)
    return b.rewrite_target(outer, b.sym(unique))


def invert(b: DerivationBuilder, g: int, w: Witness) -> tuple[int, Witness, int, int]:
    """An inverse object equality h with (γ, h, id) and (h, γ, id)."""
    x, y = b.dom(g), b.cod(g)
    if w.kind == "same_node":
        ident = b.ident(x)
        back = b.sym(collapse(b, g, w))
        left = b.rewrite_target(b.right_unit(g), back)
        right = b.rewrite_target(b.left_unit(g), back)
        return ident, SameNode(tri=b.left_unit(ident)), left, right
    if w.kind == "terminals":
        h = b.terminal_edge(w.x, y)
        there, back = b.composite(g, h), b.composite(h, g)
        left = b.rewrite_target(there, b.terminal_unique(w.x, b.tri(there)[2], b.ident(x)))
        right = b.rewrite_target(back, b.terminal_unique(w.y, b.tri(back)[2], b.ident(y)))
        return h, Terminals(x=w.y, y=w.x), left, right
    if w.kind == "initials":
        h = b.initial_edge(w.y, x)
        there, back = b.composite(g, h), b.composite(h, g)
        left = b.rewrite_target(there, b.initial_unique(w.x, b.tri(there)[2], b.ident(x)))
        right = b.rewrite_target(back, b.initial_unique(w.y, b.tri(back)[2], b.ident(y)))
        return h, Initials(x=w.y, y=w.x), left, right
    if w.kind == "lists":
        _lists_unsupported()
    subs = {i: invert(b, *w.sub(i)) for i in (1, 2, 3)}
    h3, _, s1_3, s2_3 = subs[3]
    squares = []
    if w.kind == "pullbacks":
        src = b.sk.pullback_parts(w.y)
        dst = b.sk.pullback_parts(w.x)
        for i in (1, 2):
            s2_i = subs[i][3]
            v, u = src[f"u{i}"], dst[f"u{i}"]
            ch = b.chain([v, h3])
            ch.rewrite(0, b.eq_tri(b.left_unit(v)), backwards=True)
            ch.rewrite(0, b.eq_tri(s2_i), backwards=True)
            ch.rewrite(1, _square(b, w, i), backwards=True)
            ch.rewrite(2, b.eq_tri(s1_3))
            ch.rewrite(1, b.eq_tri(b.right_unit(u)))
            squares.append(ch.result())
        h, witness = build_pullback_equality(b, w.y, w.x, [(s[0], s[1]) for s in subs.values()], squares)
    else:
        src = b.sk.pushout_parts(w.y)
        dst = b.sk.pushout_parts(w.x)
        for i in (1, 2):
            hi, s1_i = subs[i][0], subs[i][2]
            v, u = src[f"u{i}"], dst[f"u{i}"]
            ch = b.chain([v, hi])
            ch.rewrite(0, b.eq_tri(b.left_unit(v)), backwards=True)
            ch.rewrite(0, b.eq_tri(s2_3), backwards=True)
            ch.rewrite(1, _square(b, w, i), backwards=True)
            ch.rewrite(2, b.eq_tri(s1_i))
            ch.rewrite(1, b.eq_tri(b.right_unit(u)))
            squares.append(ch.result())
        h, witness = build_pushout_equality(b, w.y, w.x, [(s[0], s[1]) for s in subs.values()], squares)
    left = _round_trip(b, g, w, h, witness, {i: subs[i][2] for i in (1, 2)})
    right = _round_trip(b, h, witness, g, w, {i: subs[i][3] for i in (1, 2)})
    return h, witness, left, right


def unify(b: DerivationBuilder, g: int, w: Witness, g2: int, w2: Witness) -> int:
    """U(γ, γ′) for parallel object equalities."""
    if (b.dom(g), b.cod(g)) != (b.dom(g2), b.cod(g2)):
        raise ShapeError("unify: object equalities are not parallel")
    if b.dom(g) == b.cod(g):
        return b.trans(b.sym(collapse(b, g, w)), collapse(b, g2, w2))
    if w.kind != w2.kind:
        raise MissingWitnessError(f"cannot unify {w.kind} with {w2.kind} witnesses", rule="objeq")
    if w.kind == "terminals":
        return b.terminal_unique(w.y, g, g2)
    if w.kind == "initials":
        return b.initial_unique(w.x, g, g2)
    if w.kind == "lists":
        _lists_unsupported()
    units = {i: unify(b, *w.sub(i), *w2.sub(i)) for i in (1, 2)}
    legs = []
    if w.kind == "pullbacks":
        parts = b.sk.pullback_parts(w.y)
        for i in (1, 2):
            gi, g2i, q = w.sub(i)[0], w2.sub(i)[0], parts[f"p{i}"]
            ch = b.chain([g2, q])
            ch.use(_projection(b, w2, i))
            ch.rewrite(1, b.eq_unary(units[i], g2i, gi))
            ch.rewrite(0, b.eq_tri(w.tris("dd", i)))
            legs.append(b.tri(b.eq_as_tri(ch.result(), [g2], [q]))[2])
        return b.pullback_unique(w.y, legs[0], legs[1], g, g2)
    parts = b.sk.pushout_parts(w.x)
    for i in (1, 2):
        gi, g2i, j = w.sub(i)[0], w2.sub(i)[0], parts[f"j{i}"]
        ch = b.chain([j, g2])
        ch.use(_projection(b, w2, i))
        ch.rewrite(0, b.eq_unary(units[i], g2i, gi))
        ch.rewrite(0, b.eq_tri(w.tris("dd", i)))
        legs.append(b.tri(b.eq_as_tri(ch.result(), [j], [g2]))[2])
    return b.pushout_unique(w.x, legs[0], legs[1], g, g2)


class ObjEqGoal(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["identity_collapse", "compose", "invert", "parallel_unify"]
    edges: tuple[int, ...]
    witnesses: tuple[Witness, ...]


class ClosureResult(BaseModel):
    """The derivation plus what it produced: an edge and its witness, or commutativities."""

    model_config = ConfigDict(frozen=True)

    ext: EqExtension
    edge: Optional[int] = None
    witness: Optional[Witness] = None
    tris: tuple[int, ...] = ()


def objeq_closure(s: Sketch, goal: ObjEqGoal) -> ClosureResult:
    if len(goal.edges) != len(goal.witnesses):
        raise ShapeError("objeq_closure: one witness per edge")
    for g, w in zip(goal.edges, goal.witnesses):
        problem = witness_explanation(s, g, w)
        if problem:
            raise MissingWitnessError(f"edge {g} is not a verified object equality: {problem}", rule=goal.kind)
    b = DerivationBuilder(s)
    if goal.kind == "identity_collapse":
        (g,), (w,) = goal.edges, goal.witnesses
        if b.dom(g) != b.cod(g):
            raise ShapeError("identity_collapse needs an object equality X => X")
        result = dict(tris=(collapse(b, g, w),))
    elif goal.kind == "compose":
        (g, g2), (w, w2) = goal.edges, goal.witnesses
        delta, t, witness = compose(b, g, w, g2, w2)
        result = dict(edge=delta, witness=witness, tris=(t,))
    elif goal.kind == "invert":
        (g,), (w,) = goal.edges, goal.witnesses
        h, witness, left, right = invert(b, g, w)
        result = dict(edge=h, witness=witness, tris=(left, right))
    else:
        (g, g2), (w, w2) = goal.edges, goal.witnesses
        result = dict(tris=(unify(b, g, w, g2, w2),))
    logger.info(f"✓ objeq {goal.kind} in {len(b.steps)} derived steps")
    return ClosureResult(ext=b.extension(), **result)


# ---------------------------------------------------------------------------
# bounded witness search


def find_object_equality(b: DerivationBuilder, x: int, y: int, depth: int) -> Optional[tuple[int, Witness]]:
    """Build an object equality x => y inside b, or None."""
    sk = b.sk
    if x == y:
        ident = b.ident(x)
        return ident, SameNode(tri=b.left_unit(ident))
    tx, ty = sk.terminal_of(x), sk.terminal_of(y)
    if tx is not None and ty is not None:
        return b.terminal_edge(ty, x), Terminals(x=tx, y=ty)
    ix, iy = sk.initial_of(x), sk.initial_of(y)
    if ix is not None and iy is not None:
        return b.initial_edge(ix, y), Initials(x=ix, y=iy)
    if depth <= 0:
        return None
    frozen = b.sketch()
    for kind in ("pullback", "pushout"):
        wx, wy = _universal_at(frozen, kind, x), _universal_at(frozen, kind, y)
        if wx is None or wy is None:
            continue
        parts = sk.pullback_parts if kind == "pullback" else sk.pushout_parts
        px, py = parts(wx), parts(wy)
        end = sk.dom if kind == "pullback" else sk.cod
        pairs = [(end(px["u1"]), end(py["u1"])), (end(px["u2"]), end(py["u2"])), (px["base"], py["base"])]
        subs = []
        for a, c in pairs:
            found = find_object_equality(b, a, c, depth - 1)
            if found is None:
                return None
            subs.append(found)
        h3 = subs[2][0]
        squares = []
        for i in (1, 2):
            hi, u, v = subs[i - 1][0], px[f"u{i}"], py[f"u{i}"]
            lhs, rhs = ([u, h3], [hi, v]) if kind == "pullback" else ([u, hi], [h3, v])
            eq = b.prove(lhs, rhs, depth)
            if eq is None:
                return None
            squares.append(eq)
        build = build_pullback_equality if kind == "pullback" else build_pushout_equality
        return build(b, wx, wy, subs, squares)
    return None


def search_object_equality(base: Sketch, x: int, y: int,
                           depth: Optional[int] = None) -> Optional[tuple[EqExtension, int, Witness]]:
    """Bounded search for a witnessed object equality x => y; None reports NotProved."""
    depth = depth if depth is not None else get_settings().search_depth
    b = DerivationBuilder(base)
    try:
        found = find_object_equality(b, x, y, depth)
    except KernelError as exc:
        logger.debug(f"object equality search {x} => {y} failed: {exc}")
        return None
    if found is None:
        return None
    return b.extension(), found[0], found[1]


# ---------------------------------------------------------------------------
# objective equality of homomorphisms


class ObjectiveEqualityCertificate(BaseModel):
    """f0 =_o f1: an eq-extension of their target, a 2-cell hom γ out of the hom
    context of `context`, and a witness for the carrier edge of every node."""

    model_config = ConfigDict(frozen=True)

    context: Context
    ext: EqExtension
    gamma: SketchHom
    witnesses: tuple[Witness, ...]


def _certificate_problem(f0: SketchHom, f1: SketchHom, cert: ObjectiveEqualityCertificate) -> str:
    src = cert.context.apex
    if not (same_sketch(f0.source, src) and same_sketch(f1.source, src)):
        return "homomorphisms do not start at the certificate's context"
    if not same_sketch(f0.target, f1.target) or not same_sketch(cert.ext.base, f0.target):
        return "eq-extension is not over the common target"
    apex = cert.ext.apex
    arrow = hom_context(cert.context).apex
    if not (same_sketch(cert.gamma.source, arrow) and same_sketch(cert.gamma.target, apex)):
        return "2-cell hom has the wrong source or target"
    if not is_hom(cert.gamma):
        return "2-cell hom is not a homomorphism"
    incl = cert.ext.inclusion
    if not hom_equal(compose_hom(i0(cert.context), cert.gamma), compose_hom(f0, incl)):
        return "i0;γ differs from f0"
    if not hom_equal(compose_hom(i1(cert.context), cert.gamma), compose_hom(f1, incl)):
        return "i1;γ differs from f1"
    if len(cert.witnesses) != src.n_count:
        return "one witness per node is required"
    lay = layout_of(cert.context, 1)
    for x, w in enumerate(cert.witnesses):
        problem = witness_explanation(apex, cert.gamma.edge(lay.theta_node(1, x)), w)
        if problem:
            return f"node {x}: {problem}"
    return ""


def verify_objective_equality(f0: SketchHom, f1: SketchHom, cert: ObjectiveEqualityCertificate) -> bool:
    try:
        problem = _certificate_problem(f0, f1, cert)
    except (KernelError, IndexError) as exc:
        problem = str(exc)
    if problem:
        logger.info(f"✗ objective equality certificate rejected: {problem}")
        return False
    logger.info("✓ objective equality certificate verified")
    return True


def certificate_from_carriers(ctx: Context, f0: SketchHom, f1: SketchHom, b: DerivationBuilder,
                              carriers: Sequence[int], witnesses: Sequence[Witness],
                              depth: Optional[int] = None) -> ObjectiveEqualityCertificate:
    """Complete node carriers γ_X: f0X -> f1X to a certificate by proving naturality per edge."""
    depth = depth if depth is not None else get_settings().search_depth
    src = ctx.apex
    edges, left, right = [], [], []
    for u in range(src.e_count):
        gx, gy = carriers[src.dom(u)], carriers[src.cod(u)]
        a, c = f0.edge(u), f1.edge(u)
        lt = b.composite(a, gy)
        eq = b.prove([gx, c], [a, gy], depth)
        if eq is None:
            raise MissingWitnessError(f"no proof that edge {u} is natural for the carriers", rule="objective equality")
        edges.append(b.tri(lt)[2])
        left.append(lt)
        right.append(b.eq_as_tri(eq, [gx], [c]))
    ext = b.extension()
    apex = ext.apex
    incl = inclusion_hom(f0.target, apex)
    gamma = chain_hom(ctx, apex, [compose_hom(f0, incl), compose_hom(f1, incl)],
                      [LevelCells(nodes=tuple(carriers), edges=tuple(edges), left=tuple(left), right=tuple(right))])
    return ObjectiveEqualityCertificate(context=ctx, ext=ext, gamma=gamma, witnesses=tuple(witnesses))


def certificate_from_edge_equalities(ctx: Context, f0: SketchHom, f1: SketchHom,
                                     depth: Optional[int] = None) -> ObjectiveEqualityCertificate:
    """Certificate with identity carriers, for homs agreeing on nodes with provably equal edges."""
    if f0.n != f1.n:
        raise MissingWitnessError("homomorphisms differ on nodes", rule="objective equality")
    b = DerivationBuilder(f0.target)
    carriers = [b.ident(f0.node(x)) for x in range(ctx.apex.n_count)]
    witnesses = [SameNode(tri=b.left_unit(g)) for g in carriers]
    return certificate_from_carriers(ctx, f0, f1, b, carriers, witnesses, depth)


def reflexive_certificate(ctx: Context, f: SketchHom) -> ObjectiveEqualityCertificate:
    return certificate_from_edge_equalities(ctx, f, f)


_WITNESS_SORTS = {
    "same_node": {"tri": Sort.TRI},
    "terminals": {"x": Sort.TERMINAL, "y": Sort.TERMINAL},
    "initials": {"x": Sort.INITIAL, "y": Sort.INITIAL},
    "pullbacks": {"x": Sort.PULLBACK, "y": Sort.PULLBACK},
    "pushouts": {"x": Sort.PUSHOUT, "y": Sort.PUSHOUT},
    "lists": {"x": Sort.LIST, "y": Sort.LIST, "ga": Sort.EDGE, "tau": Sort.EDGE, "pi": Sort.EDGE},
}
_COMPARISON_EDGES = ("g1", "g2", "g3")
_COMPARISON_TRIS = ("sq1", "sq2", "sqb1", "sqb2", "dd1", "dd2", "cone1", "cone2", "fill1", "fill2")
_LIST_TRIS = ("eps1", "eps2", "pi1a", "pi1b", "pi2a", "pi2b", "cons1", "cons2")


def translate_witness(w: Witness, h: SketchHom) -> Witness:
    """The image of a witness under a homomorphism."""
    sorts = dict(_WITNESS_SORTS[w.kind])
    update = {}
    if w.kind in ("pullbacks", "pushouts"):
        sorts.update({name: Sort.EDGE for name in _COMPARISON_EDGES})
        sorts.update({name: Sort.TRI for name in _COMPARISON_TRIS})
        update.update({f"w{i}": translate_witness(getattr(w, f"w{i}"), h) for i in (1, 2, 3)})
    elif w.kind == "lists":
        sorts.update({name: Sort.TRI for name in _LIST_TRIS})
        update["wa"] = translate_witness(w.wa, h)
    update.update({name: h(sort, getattr(w, name)) for name, sort in sorts.items()})
    return w.model_copy(update=update)


def transport_certificate(cert: ObjectiveEqualityCertificate, h: SketchHom) -> ObjectiveEqualityCertificate:
    """Move a certificate along h: target(f) -> B, reindexing its eq-extension."""
    ext, eps = reindex(cert.ext, h)
    return ObjectiveEqualityCertificate(
        context=cert.context, ext=ext, gamma=compose_hom(cert.gamma, eps),
        witnesses=tuple(translate_witness(w, eps) for w in cert.witnesses),
    )


def restrict_certificate(cert: ObjectiveEqualityCertificate, ctx: Context,
                         f: SketchHom) -> ObjectiveEqualityCertificate:
    """From g0 =_o g1 on cert.context to f;g0 =_o f;g1 on ctx, for f: ctx.apex -> cert.context.apex."""
    gamma = compose_hom(hom_arrow(f, ctx, cert.context), cert.gamma)
    return ObjectiveEqualityCertificate(
        context=ctx, ext=cert.ext, gamma=gamma,
        witnesses=tuple(cert.witnesses[f.node(x)] for x in range(ctx.apex.n_count)),
    )


def search_objective_equality(ctx: Context, f0: SketchHom, f1: SketchHom,
                              depth: Optional[int] = None) -> Optional[ObjectiveEqualityCertificate]:
    """Bounded search for a certificate f0 =_o f1; None reports NotProved."""
    depth = depth if depth is not None else get_settings().search_depth
    b = DerivationBuilder(f0.target)
    carriers, witnesses = [], []
    try:
        for x in range(ctx.apex.n_count):
            found = find_object_equality(b, f0.node(x), f1.node(x), depth)
            if found is None:
                logger.info(f"✗ no object equality for node {x}")
                return None
            carriers.append(found[0])
            witnesses.append(found[1])
        return certificate_from_carriers(ctx, f0, f1, b, carriers, witnesses, depth)
    except KernelError as exc:
        logger.info(f"✗ objective equality search stopped: {exc}")
        return None
