"""Extension and equivalence-extension steps.

Every step references elements of the sketch accumulated so far by absolute
index, checks its data configuration against a draft and appends a fixed,
documented delta.
"""
import logging
from typing import Annotated, Callable, ClassVar, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

from src.kernel.errors import SideConditionError, StepError
from src.kernel.sketch import SORTS, Sort, SketchDraft

logger = logging.getLogger("aukernel")


class Delta(BaseModel):
    """Indices appended by one step, per sort, in append order."""

    model_config = ConfigDict(frozen=True)

    n: tuple[int, ...] = ()
    e: tuple[int, ...] = ()
    tri: tuple[int, ...] = ()
    ut: tuple[int, ...] = ()
    upb: tuple[int, ...] = ()
    ui: tuple[int, ...] = ()
    upo: tuple[int, ...] = ()
    ul: tuple[int, ...] = ()

    def sizes(self) -> tuple[int, ...]:
        return tuple(len(getattr(self, s.value)) for s in SORTS)

    @classmethod
    def between(cls, before: dict[Sort, int], sk: SketchDraft) -> "Delta":
        return cls(**{s.value: tuple(range(before[s], sk.count(s))) for s in SORTS})


def counts_of(sk: SketchDraft) -> dict[Sort, int]:
    return {s: sk.count(s) for s in SORTS}


class Step(BaseModel):
    model_config = ConfigDict(frozen=True)

    rule: ClassVar[str] = ""
    refs: ClassVar[dict[str, Sort]] = {}

    def _fail(self, message: str) -> None:
        raise SideConditionError(message, rule=self.rule)

    def check_refs(self, sk: SketchDraft) -> None:
        for name, sort in self.refs.items():
            value = getattr(self, name)
            if not sk.in_range(sort, value):
                raise StepError(f"{name}={value} is not a valid {sort.value} reference", rule=self.rule)

    def check(self, sk: SketchDraft) -> None:
        self.check_refs(sk)
        self.check_configuration(sk)

    def check_configuration(self, sk: SketchDraft) -> None:
        pass

    def apply(self, sk: SketchDraft) -> Delta:
        before = counts_of(sk)
        self.append(sk)
        return Delta.between(before, sk)

    def append(self, sk: SketchDraft) -> None:
        raise NotImplementedError

    def translate(self, fn: Callable[[Sort, int], int]) -> "Step":
        return self.model_copy(update={name: fn(sort, getattr(self, name)) for name, sort in self.refs.items()})

    def references(self) -> dict[str, tuple[Sort, int]]:
        return {name: (sort, getattr(self, name)) for name, sort in self.refs.items()}


# ---------------------------------------------------------------------------
# helpers shared by steps


def new_node(sk: SketchDraft) -> int:
    x = sk.add_node()
    sk.set_identity(x, sk.add_edge(x, x))
    return x


def unary_forms(sk: SketchDraft, a: int, b: int) -> list[tuple[int, int, int]]:
    """The four triangle shapes expressing a ⊴ b (in either direction)."""
    return [
        (sk.ident(sk.dom(a)), a, b),
        (sk.ident(sk.dom(b)), b, a),
        (a, sk.ident(sk.cod(a)), b),
        (b, sk.ident(sk.cod(b)), a),
    ]


def is_unary_between(sk: SketchDraft, t: int, a: int, b: int) -> bool:
    return sk.tri(t) in unary_forms(sk, a, b)


def adjoin_inverse(sk: SketchDraft, u: int) -> None:
    inv = sk.add_edge(sk.cod(u), sk.dom(u))
    sk.add_tri(u, inv, sk.ident(sk.dom(u)))
    sk.add_tri(inv, u, sk.ident(sk.cod(u)))


def adjoin_unary(sk: SketchDraft, w: int, w2: int) -> None:
    sk.add_tri(sk.ident(sk.dom(w)), w, w2)


# ---------------------------------------------------------------------------
# simple extensions


class AddPrimitiveNode(Step):
    kind: Literal["node"] = "node"
    rule: ClassVar[str] = "primitive node"

    def append(self, sk: SketchDraft) -> None:
        new_node(sk)


class AddPrimitiveEdge(Step):
    kind: Literal["edge"] = "edge"
    dom: int
    cod: int
    rule: ClassVar[str] = "primitive edge"
    refs: ClassVar[dict[str, Sort]] = {"dom": Sort.NODE, "cod": Sort.NODE}

    def append(self, sk: SketchDraft) -> None:
        sk.add_edge(self.dom, self.cod)


class AddCommutativity(Step):
    kind: Literal["comm"] = "comm"
    l: int
    r: int
    c: int
    rule: ClassVar[str] = "commutativity"
    refs: ClassVar[dict[str, Sort]] = {"l": Sort.EDGE, "r": Sort.EDGE, "c": Sort.EDGE}

    def check_configuration(self, sk: SketchDraft) -> None:
        if sk.cod(self.l) != sk.dom(self.r):
            raise StepError(f"edges {self.l} and {self.r} are not composable", rule=self.rule)
        if sk.dom(self.l) != sk.dom(self.c) or sk.cod(self.r) != sk.cod(self.c):
            raise StepError(f"edge {self.c} is not parallel to the composite of {self.l} and {self.r}", rule=self.rule)

    def append(self, sk: SketchDraft) -> None:
        sk.add_tri(self.l, self.r, self.c)


class AddTerminal(Step):
    kind: Literal["terminal"] = "terminal"
    rule: ClassVar[str] = "terminal"

    def append(self, sk: SketchDraft) -> None:
        sk.add_terminal(new_node(sk))


class AddInitial(Step):
    kind: Literal["initial"] = "initial"
    rule: ClassVar[str] = "initial"

    def append(self, sk: SketchDraft) -> None:
        sk.add_initial(new_node(sk))


class AddPullback(Step):
    """Delta: node P; edges p1, p, p2, id(P); tris (p1,u1,p), (p2,u2,p); universal."""

    kind: Literal["pullback"] = "pullback"
    u1: int
    u2: int
    rule: ClassVar[str] = "pullback"
    refs: ClassVar[dict[str, Sort]] = {"u1": Sort.EDGE, "u2": Sort.EDGE}

    def check_configuration(self, sk: SketchDraft) -> None:
        if sk.cod(self.u1) != sk.cod(self.u2):
            raise StepError(f"edges {self.u1} and {self.u2} do not form a cospan", rule=self.rule)

    def append(self, sk: SketchDraft) -> None:
        p_node = sk.add_node()
        p1 = sk.add_edge(p_node, sk.dom(self.u1))
        p = sk.add_edge(p_node, sk.cod(self.u1))
        p2 = sk.add_edge(p_node, sk.dom(self.u2))
        sk.set_identity(p_node, sk.add_edge(p_node, p_node))
        t1 = sk.add_tri(p1, self.u1, p)
        t2 = sk.add_tri(p2, self.u2, p)
        sk.add_pullback(t1, t2)


class AddPushout(Step):
    """Delta: node Q; edges j1, j, j2, id(Q); tris (u1,j1,j), (u2,j2,j); universal."""

    kind: Literal["pushout"] = "pushout"
    u1: int
    u2: int
    rule: ClassVar[str] = "pushout"
    refs: ClassVar[dict[str, Sort]] = {"u1": Sort.EDGE, "u2": Sort.EDGE}

    def check_configuration(self, sk: SketchDraft) -> None:
        if sk.dom(self.u1) != sk.dom(self.u2):
            raise StepError(f"edges {self.u1} and {self.u2} do not form a span", rule=self.rule)

    def append(self, sk: SketchDraft) -> None:
        q = sk.add_node()
        j1 = sk.add_edge(sk.cod(self.u1), q)
        j = sk.add_edge(sk.dom(self.u1), q)
        j2 = sk.add_edge(sk.cod(self.u2), q)
        sk.set_identity(q, sk.add_edge(q, q))
        t1 = sk.add_tri(self.u1, j1, j)
        t2 = sk.add_tri(self.u2, j2, j)
        sk.add_pushout(t1, t2)


class AddListObject(Step):
    """Delta: nodes T, L, P; edges eps, cons, p1, p, p2, !A, !L, id(T), id(L), id(P);
    tris (p1,!A,p), (p2,!L,p); terminal, pullback and list universals."""

    kind: Literal["list"] = "list"
    a: int
    rule: ClassVar[str] = "list object"
    refs: ClassVar[dict[str, Sort]] = {"a": Sort.NODE}

    def append(self, sk: SketchDraft) -> None:
        t_node, l_node, p_node = sk.add_node(), sk.add_node(), sk.add_node()
        eps = sk.add_edge(t_node, l_node)
        cons = sk.add_edge(p_node, l_node)
        p1 = sk.add_edge(p_node, self.a)
        p = sk.add_edge(p_node, t_node)
        p2 = sk.add_edge(p_node, l_node)
        bang_a = sk.add_edge(self.a, t_node)
        bang_l = sk.add_edge(l_node, t_node)
        for x in (t_node, l_node, p_node):
            sk.set_identity(x, sk.add_edge(x, x))
        t1 = sk.add_tri(p1, bang_a, p)
        t2 = sk.add_tri(p2, bang_l, p)
        ut = sk.add_terminal(t_node)
        pb = sk.add_pullback(t1, t2)
        sk.add_list(pb, ut, eps, cons)


# ---------------------------------------------------------------------------
# equivalence rules


class Composition(Step):
    kind: Literal["composition"] = "composition"
    u: int
    v: int
    rule: ClassVar[str] = "composition"
    refs: ClassVar[dict[str, Sort]] = {"u": Sort.EDGE, "v": Sort.EDGE}

    def check_configuration(self, sk: SketchDraft) -> None:
        if sk.cod(self.u) != sk.dom(self.v):
            self._fail(f"edges {self.u} and {self.v} are not composable")

    def append(self, sk: SketchDraft) -> None:
        w = sk.add_edge(sk.dom(self.u), sk.cod(self.v))
        sk.add_tri(self.u, self.v, w)


class LeftUnit(Step):
    kind: Literal["left_unit"] = "left_unit"
    u: int
    rule: ClassVar[str] = "left unit law"
    refs: ClassVar[dict[str, Sort]] = {"u": Sort.EDGE}

    def append(self, sk: SketchDraft) -> None:
        sk.add_tri(sk.ident(sk.dom(self.u)), self.u, self.u)


class RightUnit(Step):
    kind: Literal["right_unit"] = "right_unit"
    u: int
    rule: ClassVar[str] = "right unit law"
    refs: ClassVar[dict[str, Sort]] = {"u": Sort.EDGE}

    def append(self, sk: SketchDraft) -> None:
        sk.add_tri(self.u, sk.ident(sk.cod(self.u)), self.u)


class LeftAssoc(Step):
    """From uv ⊴ k, vw ⊴ l and ul ⊴ m adjoin kw ⊴ m."""

    kind: Literal["left_assoc"] = "left_assoc"
    t1: int
    t2: int
    t3: int
    rule: ClassVar[str] = "associativity"
    refs: ClassVar[dict[str, Sort]] = {"t1": Sort.TRI, "t2": Sort.TRI, "t3": Sort.TRI}

    def check_configuration(self, sk: SketchDraft) -> None:
        u, v, _ = sk.tri(self.t1)
        v2, _, l = sk.tri(self.t2)
        u2, l2, _ = sk.tri(self.t3)
        if v != v2 or u != u2 or l != l2:
            self._fail(f"commutativities {self.t1}, {self.t2}, {self.t3} do not share legs uv, vw, ul")

    def append(self, sk: SketchDraft) -> None:
        k = sk.tri_c[self.t1]
        w = sk.tri_r[self.t2]
        m = sk.tri_c[self.t3]
        sk.add_tri(k, w, m)


class RightAssoc(Step):
    """From uv ⊴ k, vw ⊴ l and kw ⊴ m adjoin ul ⊴ m."""

    kind: Literal["right_assoc"] = "right_assoc"
    t1: int
    t2: int
    t3: int
    rule: ClassVar[str] = "associativity"
    refs: ClassVar[dict[str, Sort]] = {"t1": Sort.TRI, "t2": Sort.TRI, "t3": Sort.TRI}

    def check_configuration(self, sk: SketchDraft) -> None:
        _, v, k = sk.tri(self.t1)
        v2, w, _ = sk.tri(self.t2)
        k2, w2, _ = sk.tri(self.t3)
        if v != v2 or k != k2 or w != w2:
            self._fail(f"commutativities {self.t1}, {self.t2}, {self.t3} do not share legs uv, vw, kw")

    def append(self, sk: SketchDraft) -> None:
        u = sk.tri_l[self.t1]
        l = sk.tri_c[self.t2]
        m = sk.tri_c[self.t3]
        sk.add_tri(u, l, m)


class PullbackFillin(Step):
    """Cone d1 = (v1,u1,v), d2 = (v2,u2,v); adjoins w and (w,p1,v1), (w,p2,v2)."""

    kind: Literal["pb_fillin"] = "pb_fillin"
    univ: int
    d1: int
    d2: int
    rule: ClassVar[str] = "pullback fillin"
    refs: ClassVar[dict[str, Sort]] = {"univ": Sort.PULLBACK, "d1": Sort.TRI, "d2": Sort.TRI}

    def check_configuration(self, sk: SketchDraft) -> None:
        parts = sk.pullback_parts(self.univ)
        if sk.tri_r[self.d1] != parts["u1"] or sk.tri_r[self.d2] != parts["u2"]:
            self._fail("cone legs do not end in the pullback data")
        if sk.tri_c[self.d1] != sk.tri_c[self.d2]:
            self._fail("cone commutativities have different diagonals")

    def append(self, sk: SketchDraft) -> None:
        parts = sk.pullback_parts(self.univ)
        v1, v2 = sk.tri_l[self.d1], sk.tri_l[self.d2]
        w = sk.add_edge(sk.dom(v1), parts["apex"])
        sk.add_tri(w, parts["p1"], v1)
        sk.add_tri(w, parts["p2"], v2)


class PullbackFillinUnique(Step):
    kind: Literal["pb_unique"] = "pb_unique"
    univ: int
    v1: int
    v2: int
    w: int
    w2: int
    rule: ClassVar[str] = "pullback fillin uniqueness"
    refs: ClassVar[dict[str, Sort]] = {
        "univ": Sort.PULLBACK, "v1": Sort.EDGE, "v2": Sort.EDGE, "w": Sort.EDGE, "w2": Sort.EDGE,
    }

    def check_configuration(self, sk: SketchDraft) -> None:
        parts = sk.pullback_parts(self.univ)
        for w in (self.w, self.w2):
            if sk.find_tri(w, parts["p1"], self.v1) is None or sk.find_tri(w, parts["p2"], self.v2) is None:
                self._fail(f"edge {w} is not a fillin for the cone ({self.v1}, {self.v2})")

    def append(self, sk: SketchDraft) -> None:
        adjoin_unary(sk, self.w, self.w2)


class PushoutFillin(Step):
    """Cocone d1 = (u1,v1,v), d2 = (u2,v2,v); adjoins w and (j1,w,v1), (j2,w,v2)."""

    kind: Literal["po_fillin"] = "po_fillin"
    univ: int
    d1: int
    d2: int
    rule: ClassVar[str] = "pushout fillin"
    refs: ClassVar[dict[str, Sort]] = {"univ": Sort.PUSHOUT, "d1": Sort.TRI, "d2": Sort.TRI}

    def check_configuration(self, sk: SketchDraft) -> None:
        parts = sk.pushout_parts(self.univ)
        if sk.tri_l[self.d1] != parts["u1"] or sk.tri_l[self.d2] != parts["u2"]:
            self._fail("cocone legs do not start at the pushout data")
        if sk.tri_c[self.d1] != sk.tri_c[self.d2]:
            self._fail("cocone commutativities have different diagonals")

    def append(self, sk: SketchDraft) -> None:
        parts = sk.pushout_parts(self.univ)
        v1, v2 = sk.tri_r[self.d1], sk.tri_r[self.d2]
        w = sk.add_edge(parts["apex"], sk.cod(v1))
        sk.add_tri(parts["j1"], w, v1)
        sk.add_tri(parts["j2"], w, v2)


class PushoutFillinUnique(Step):
    kind: Literal["po_unique"] = "po_unique"
    univ: int
    v1: int
    v2: int
    w: int
    w2: int
    rule: ClassVar[str] = "pushout fillin uniqueness"
    refs: ClassVar[dict[str, Sort]] = {
        "univ": Sort.PUSHOUT, "v1": Sort.EDGE, "v2": Sort.EDGE, "w": Sort.EDGE, "w2": Sort.EDGE,
    }

    def check_configuration(self, sk: SketchDraft) -> None:
        parts = sk.pushout_parts(self.univ)
        for w in (self.w, self.w2):
            if sk.find_tri(parts["j1"], w, self.v1) is None or sk.find_tri(parts["j2"], w, self.v2) is None:
                self._fail(f"edge {w} is not a fillin for the cocone ({self.v1}, {self.v2})")

    def append(self, sk: SketchDraft) -> None:
        adjoin_unary(sk, self.w, self.w2)


class TerminalFillin(Step):
    kind: Literal["t_fillin"] = "t_fillin"
    univ: int
    node: int
    rule: ClassVar[str] = "terminal fillin"
    refs: ClassVar[dict[str, Sort]] = {"univ": Sort.TERMINAL, "node": Sort.NODE}

    def append(self, sk: SketchDraft) -> None:
        sk.add_edge(self.node, sk.ut_n[self.univ])


class TerminalFillinUnique(Step):
    kind: Literal["t_unique"] = "t_unique"
    univ: int
    w: int
    w2: int
    rule: ClassVar[str] = "terminal fillin uniqueness"
    refs: ClassVar[dict[str, Sort]] = {"univ": Sort.TERMINAL, "w": Sort.EDGE, "w2": Sort.EDGE}

    def check_configuration(self, sk: SketchDraft) -> None:
        t = sk.ut_n[self.univ]
        if sk.cod(self.w) != t or sk.cod(self.w2) != t or sk.dom(self.w) != sk.dom(self.w2):
            self._fail(f"edges {self.w}, {self.w2} are not parallel edges into the terminal node")

    def append(self, sk: SketchDraft) -> None:
        adjoin_unary(sk, self.w, self.w2)


class InitialFillin(Step):
    kind: Literal["i_fillin"] = "i_fillin"
    univ: int
    node: int
    rule: ClassVar[str] = "initial fillin"
    refs: ClassVar[dict[str, Sort]] = {"univ": Sort.INITIAL, "node": Sort.NODE}

    def append(self, sk: SketchDraft) -> None:
        sk.add_edge(sk.ui_n[self.univ], self.node)


class InitialFillinUnique(Step):
    kind: Literal["i_unique"] = "i_unique"
    univ: int
    w: int
    w2: int
    rule: ClassVar[str] = "initial fillin uniqueness"
    refs: ClassVar[dict[str, Sort]] = {"univ": Sort.INITIAL, "w": Sort.EDGE, "w2": Sort.EDGE}

    def check_configuration(self, sk: SketchDraft) -> None:
        z = sk.ui_n[self.univ]
        if sk.dom(self.w) != z or sk.dom(self.w2) != z or sk.cod(self.w) != sk.cod(self.w2):
            self._fail(f"edges {self.w}, {self.w2} are not parallel edges out of the initial node")

    def append(self, sk: SketchDraft) -> None:
        adjoin_unary(sk, self.w, self.w2)


def _product_parts(step: Step, sk: SketchDraft, univ: int, label: str) -> dict:
    parts = sk.pullback_parts(univ)
    if sk.terminal_of(parts["base"]) is None:
        step._fail(f"{label} is not a product: its cospan does not end in a terminal node")
    parts["left"] = sk.dom(parts["u1"])
    parts["right"] = sk.dom(parts["u2"])
    return parts


def _require_tri(step: Step, sk: SketchDraft, t: int, l: int, r: int, c: int, label: str) -> None:
    if sk.tri(t) != (l, r, c):
        step._fail(f"{label}: commutativity {t} is {sk.tri(t)}, expected {(l, r, c)}")


class ListConfiguration(Step):
    """Data of a list fillin: products, the parameters y and g, and the auxiliary
    edges for the pairing with the empty list, cons × B and the associativity."""

    lst: int
    lb: int
    alb: int
    a_lb: int
    ay: int
    y: int
    g: int
    be_def: int
    pair: int
    pair_p1: int
    pair_p2: int
    k_def: int
    cons_b: int
    cons_b_p1: int
    cons_b_p2: int
    a1_def: int
    l1_def: int
    mid: int
    mid_p1: int
    mid_p2: int
    assoc: int
    assoc_p1: int
    assoc_p2: int
    refs: ClassVar[dict[str, Sort]] = {
        "lst": Sort.LIST, "lb": Sort.PULLBACK, "alb": Sort.PULLBACK, "a_lb": Sort.PULLBACK,
        "ay": Sort.PULLBACK, "y": Sort.EDGE, "g": Sort.EDGE, "be_def": Sort.TRI,
        "pair": Sort.EDGE, "pair_p1": Sort.TRI, "pair_p2": Sort.TRI, "k_def": Sort.TRI,
        "cons_b": Sort.EDGE, "cons_b_p1": Sort.TRI, "cons_b_p2": Sort.TRI,
        "a1_def": Sort.TRI, "l1_def": Sort.TRI, "mid": Sort.EDGE, "mid_p1": Sort.TRI,
        "mid_p2": Sort.TRI, "assoc": Sort.EDGE, "assoc_p1": Sort.TRI, "assoc_p2": Sort.TRI,
    }

    def layout(self, sk: SketchDraft) -> dict:
        lst = sk.list_parts(self.lst)
        lb = _product_parts(self, sk, self.lb, "L×B")
        alb = _product_parts(self, sk, self.alb, "(A×L)×B")
        a_lb = _product_parts(self, sk, self.a_lb, "A×(L×B)")
        ay = _product_parts(self, sk, self.ay, "A×Y")
        return {"lst": lst, "lb": lb, "alb": alb, "a_lb": a_lb, "ay": ay,
                "B": lb["right"], "Y": ay["right"]}

    def check_layout(self, sk: SketchDraft) -> dict:
        lay = self.layout(sk)
        lst, lb, alb, a_lb, ay = lay["lst"], lay["lb"], lay["alb"], lay["a_lb"], lay["ay"]
        b, y_node = lay["B"], lay["Y"]
        if lb["left"] != lst["list"]:
            self._fail("L×B does not have the list node as first factor")
        if alb["left"] != lst["product"] or alb["right"] != b:
            self._fail("(A×L)×B does not have factors A×L and B")
        if a_lb["left"] != lst["a"] or a_lb["right"] != lb["apex"]:
            self._fail("A×(L×B) does not have factors A and L×B")
        if ay["left"] != lst["a"]:
            self._fail("A×Y does not have A as first factor")
        if sk.dom(self.y) != b or sk.cod(self.y) != y_node:
            self._fail("y is not an edge B -> Y")
        if sk.dom(self.g) != ay["apex"] or sk.cod(self.g) != y_node:
            self._fail("g is not an edge A×Y -> Y")
        bang_b, eps, be = sk.tri(self.be_def)
        if eps != lst["eps"] or sk.dom(bang_b) != b:
            self._fail("be_def is not a composite B -> 1 -> L through the empty list")
        if sk.dom(self.pair) != b or sk.cod(self.pair) != lb["apex"]:
            self._fail("pair is not an edge B -> L×B")
        _require_tri(self, sk, self.pair_p1, self.pair, lb["p1"], be, "pair_p1")
        _require_tri(self, sk, self.pair_p2, self.pair, lb["p2"], sk.ident(b), "pair_p2")
        p1_alb, cons, k = sk.tri(self.k_def)
        if p1_alb != alb["p1"] or cons != lst["cons"]:
            self._fail("k_def is not the composite (A×L)×B -> A×L -> L through cons")
        _require_tri(self, sk, self.cons_b_p1, self.cons_b, lb["p1"], k, "cons_b_p1")
        _require_tri(self, sk, self.cons_b_p2, self.cons_b, lb["p2"], alb["p2"], "cons_b_p2")
        p1_alb2, p1_list, a1 = sk.tri(self.a1_def)
        if p1_alb2 != alb["p1"] or p1_list != lst["p1"]:
            self._fail("a1_def is not the composite (A×L)×B -> A×L -> A")
        p1_alb3, p2_list, l1 = sk.tri(self.l1_def)
        if p1_alb3 != alb["p1"] or p2_list != lst["p2"]:
            self._fail("l1_def is not the composite (A×L)×B -> A×L -> L")
        _require_tri(self, sk, self.mid_p1, self.mid, lb["p1"], l1, "mid_p1")
        _require_tri(self, sk, self.mid_p2, self.mid, lb["p2"], alb["p2"], "mid_p2")
        _require_tri(self, sk, self.assoc_p1, self.assoc, a_lb["p1"], a1, "assoc_p1")
        _require_tri(self, sk, self.assoc_p2, self.assoc, a_lb["p2"], self.mid, "assoc_p2")
        return lay


class ListFillin(ListConfiguration):
    """Adjoins r, r′, r″, g′, g″ and the seven commutativities
    (pair,r,y), (cons_b,r,g″), (assoc,g′,g″), (r′,g,g′),
    (r′,p1_AY,p1_A(LB)), (r′,p2_AY,r″), (p2_A(LB),r,r″)."""

    kind: Literal["list_fillin"] = "list_fillin"
    rule: ClassVar[str] = "list fillin"

    def check_configuration(self, sk: SketchDraft) -> None:
        self.check_layout(sk)

    def append(self, sk: SketchDraft) -> None:
        lay = self.layout(sk)
        lb, alb, a_lb, ay, y_node = lay["lb"], lay["alb"], lay["a_lb"], lay["ay"], lay["Y"]
        r = sk.add_edge(lb["apex"], y_node)
        r1 = sk.add_edge(a_lb["apex"], ay["apex"])
        r2 = sk.add_edge(a_lb["apex"], y_node)
        g1 = sk.add_edge(a_lb["apex"], y_node)
        g2 = sk.add_edge(alb["apex"], y_node)
        sk.add_tri(self.pair, r, self.y)
        sk.add_tri(self.cons_b, r, g2)
        sk.add_tri(self.assoc, g1, g2)
        sk.add_tri(r1, self.g, g1)
        sk.add_tri(r1, ay["p1"], a_lb["p1"])
        sk.add_tri(r1, ay["p2"], r2)
        sk.add_tri(a_lb["p2"], r, r2)


def list_solution(step: ListConfiguration, sk: SketchDraft, r: int) -> Optional[dict]:
    """Find r′, r″, g′, g″ making r a solution of the list configuration."""
    lay = step.layout(sk)
    a_lb, ay = lay["a_lb"], lay["ay"]
    if sk.find_tri(step.pair, r, step.y) is None:
        return None
    for t2 in sk.tris_where(l=step.cons_b, r=r):
        g2 = sk.tri_c[t2]
        for t3 in sk.tris_where(l=step.assoc, c=g2):
            g1 = sk.tri_r[t3]
            for t4 in sk.tris_where(r=step.g, c=g1):
                r1 = sk.tri_l[t4]
                if sk.find_tri(r1, ay["p1"], a_lb["p1"]) is None:
                    continue
                for t6 in sk.tris_where(l=r1, r=ay["p2"]):
                    r2 = sk.tri_c[t6]
                    if sk.find_tri(a_lb["p2"], r, r2) is not None:
                        return {"r": r, "r1": r1, "r2": r2, "g1": g1, "g2": g2}
    return None


class ListFillinUnique(ListConfiguration):
    kind: Literal["list_unique"] = "list_unique"
    r1: int
    r2: int
    rule: ClassVar[str] = "list fillin uniqueness"
    refs: ClassVar[dict[str, Sort]] = {**ListConfiguration.refs, "r1": Sort.EDGE, "r2": Sort.EDGE}

    def check_configuration(self, sk: SketchDraft) -> None:
        self.check_layout(sk)
        for r in (self.r1, self.r2):
            if list_solution(self, sk, r) is None:
                self._fail(f"edge {r} is not a solution of the list configuration")

    def append(self, sk: SketchDraft) -> None:
        adjoin_unary(sk, self.r1, self.r2)


class Balance(Step):
    """u with kernel pair p1 ⊴ p2 and cokernel pair j1 ⊴ j2 gets an inverse."""

    kind: Literal["balance"] = "balance"
    u: int
    kernel: int
    cokernel: int
    mono: int
    epi: int
    rule: ClassVar[str] = "balance"
    refs: ClassVar[dict[str, Sort]] = {
        "u": Sort.EDGE, "kernel": Sort.PULLBACK, "cokernel": Sort.PUSHOUT, "mono": Sort.TRI, "epi": Sort.TRI,
    }

    def check_configuration(self, sk: SketchDraft) -> None:
        kp = sk.pullback_parts(self.kernel)
        cp = sk.pushout_parts(self.cokernel)
        if kp["u1"] != self.u or kp["u2"] != self.u:
            self._fail("pullback is not the kernel pair of u")
        if cp["u1"] != self.u or cp["u2"] != self.u:
            self._fail("pushout is not the cokernel pair of u")
        if not is_unary_between(sk, self.mono, kp["p1"], kp["p2"]):
            self._fail("kernel-pair projections are not shown equal")
        if not is_unary_between(sk, self.epi, cp["j1"], cp["j2"]):
            self._fail("cokernel-pair injections are not shown equal")

    def append(self, sk: SketchDraft) -> None:
        adjoin_inverse(sk, self.u)


class InitStability(Step):
    kind: Literal["init_stability"] = "init_stability"
    univ: int
    u: int
    rule: ClassVar[str] = "initial stability"
    refs: ClassVar[dict[str, Sort]] = {"univ": Sort.INITIAL, "u": Sort.EDGE}

    def check_configuration(self, sk: SketchDraft) -> None:
        if sk.cod(self.u) != sk.ui_n[self.univ]:
            self._fail(f"edge {self.u} does not end in the initial node")

    def append(self, sk: SketchDraft) -> None:
        adjoin_inverse(sk, self.u)


class PushoutStability(Step):
    """Pullback of a pushout along w: the comparison e from the inner pushout is inverted."""

    kind: Literal["po_stability"] = "po_stability"
    base: int
    w: int
    pb_v: int
    pb_v1: int
    pb_v2: int
    c1_def: int
    u1p: int
    u1p_t1: int
    u1p_t2: int
    c2_def: int
    u2p: int
    u2p_t1: int
    u2p_t2: int
    top: int
    e: int
    e_t1: int
    e_t2: int
    rule: ClassVar[str] = "pushout stability"
    refs: ClassVar[dict[str, Sort]] = {
        "base": Sort.PUSHOUT, "w": Sort.EDGE, "pb_v": Sort.PULLBACK, "pb_v1": Sort.PULLBACK,
        "pb_v2": Sort.PULLBACK, "c1_def": Sort.TRI, "u1p": Sort.EDGE, "u1p_t1": Sort.TRI,
        "u1p_t2": Sort.TRI, "c2_def": Sort.TRI, "u2p": Sort.EDGE, "u2p_t1": Sort.TRI,
        "u2p_t2": Sort.TRI, "top": Sort.PUSHOUT, "e": Sort.EDGE, "e_t1": Sort.TRI, "e_t2": Sort.TRI,
    }

    def check_configuration(self, sk: SketchDraft) -> None:
        base = sk.pushout_parts(self.base)
        if sk.cod(self.w) != base["apex"]:
            self._fail("w does not end in the pushout node")
        pv = sk.pullback_parts(self.pb_v)
        pv1 = sk.pullback_parts(self.pb_v1)
        pv2 = sk.pullback_parts(self.pb_v2)
        for parts, leg, label in ((pv, base["j"], "pb(w,v)"), (pv1, base["j1"], "pb(w,v1)"),
                                  (pv2, base["j2"], "pb(w,v2)")):
            if parts["u1"] != self.w or parts["u2"] != leg:
                self._fail(f"{label} is not the pullback of w along the expected injection")
        for up, t1, t2, cdef, u_i, pvi, label in (
            (self.u1p, self.u1p_t1, self.u1p_t2, self.c1_def, base["u1"], pv1, "u′1"),
            (self.u2p, self.u2p_t1, self.u2p_t2, self.c2_def, base["u2"], pv2, "u′2"),
        ):
            p2v, ui, c = sk.tri(cdef)
            if p2v != pv["p2"] or ui != u_i:
                self._fail(f"{label}: composite of the second projection with the span leg missing")
            _require_tri(self, sk, t1, up, pvi["p1"], pv["p1"], label)
            _require_tri(self, sk, t2, up, pvi["p2"], c, label)
        top = sk.pushout_parts(self.top)
        if top["u1"] != self.u1p or top["u2"] != self.u2p:
            self._fail("inner pushout is not the pushout of u′1 and u′2")
        _require_tri(self, sk, self.e_t1, top["j1"], self.e, pv1["p1"], "e")
        _require_tri(self, sk, self.e_t2, top["j2"], self.e, pv2["p1"], "e")

    def append(self, sk: SketchDraft) -> None:
        adjoin_inverse(sk, self.e)


class Exactness(Step):
    """An equivalence relation (π1, π2) with witnesses r, s, t: the fillin e into the
    kernel pair of its canonical coequalizer is inverted."""

    kind: Literal["exactness"] = "exactness"
    pi1: int
    pi2: int
    prod: int
    pi: int
    pi_t1: int
    pi_t2: int
    kernel: int
    mono: int
    x2: int
    r: int
    r_t1: int
    r_t2: int
    s: int
    s_t1: int
    s_t2: int
    t: int
    t_t1: int
    t_t1b: int
    t_t2: int
    t_t2b: int
    initial: int
    sum: int
    f1: int
    f1_t1: int
    f1_t2: int
    f2: int
    f2_t1: int
    f2_t2: int
    coeq: int
    kpair: int
    e: int
    e_t1: int
    e_t2: int
    rule: ClassVar[str] = "exactness"
    refs: ClassVar[dict[str, Sort]] = {
        "pi1": Sort.EDGE, "pi2": Sort.EDGE, "prod": Sort.PULLBACK, "pi": Sort.EDGE,
        "pi_t1": Sort.TRI, "pi_t2": Sort.TRI, "kernel": Sort.PULLBACK, "mono": Sort.TRI,
        "x2": Sort.PULLBACK, "r": Sort.EDGE, "r_t1": Sort.TRI, "r_t2": Sort.TRI,
        "s": Sort.EDGE, "s_t1": Sort.TRI, "s_t2": Sort.TRI, "t": Sort.EDGE,
        "t_t1": Sort.TRI, "t_t1b": Sort.TRI, "t_t2": Sort.TRI, "t_t2b": Sort.TRI,
        "initial": Sort.INITIAL, "sum": Sort.PUSHOUT, "f1": Sort.EDGE, "f1_t1": Sort.TRI,
        "f1_t2": Sort.TRI, "f2": Sort.EDGE, "f2_t1": Sort.TRI, "f2_t2": Sort.TRI,
        "coeq": Sort.PUSHOUT, "kpair": Sort.PULLBACK, "e": Sort.EDGE, "e_t1": Sort.TRI, "e_t2": Sort.TRI,
    }

    def check_configuration(self, sk: SketchDraft) -> None:
        x1, x0 = sk.dom(self.pi1), sk.cod(self.pi1)
        if sk.dom(self.pi2) != x1 or sk.cod(self.pi2) != x0:
            self._fail("π1 and π2 are not parallel")
        prod = sk.pullback_parts(self.prod)
        if prod["u1"] != prod["u2"] or sk.dom(prod["u1"]) != x0 or sk.terminal_of(prod["base"]) is None:
            self._fail("X0×X0 is not a product over a terminal node")
        _require_tri(self, sk, self.pi_t1, self.pi, prod["p1"], self.pi1, "π")
        _require_tri(self, sk, self.pi_t2, self.pi, prod["p2"], self.pi2, "π")
        kern = sk.pullback_parts(self.kernel)
        if kern["u1"] != self.pi or kern["u2"] != self.pi:
            self._fail("kernel is not the kernel pair of π")
        if not is_unary_between(sk, self.mono, kern["p1"], kern["p2"]):
            self._fail("π is not shown monic")
        x2 = sk.pullback_parts(self.x2)
        if x2["u1"] != self.pi2 or x2["u2"] != self.pi1:
            self._fail("X2 is not the pullback of π2 and π1")
        ident = sk.ident(x0)
        _require_tri(self, sk, self.r_t1, self.r, self.pi1, ident, "r")
        _require_tri(self, sk, self.r_t2, self.r, self.pi2, ident, "r")
        _require_tri(self, sk, self.s_t1, self.s, self.pi1, self.pi2, "s")
        _require_tri(self, sk, self.s_t2, self.s, self.pi2, self.pi1, "s")
        for ta, tb, pi_i, q in ((self.t_t1, self.t_t1b, self.pi1, x2["p1"]),
                                (self.t_t2, self.t_t2b, self.pi2, x2["p2"])):
            tl, tr, tc = sk.tri(ta)
            ql, qr, qc = sk.tri(tb)
            if (tl, tr) != (self.t, pi_i) or (ql, qr) != (q, pi_i) or tc != qc:
                self._fail("t does not compose with π1, π2 as transitivity requires")
        zero = sk.ui_n[self.initial]
        sums = sk.pushout_parts(self.sum)
        if sk.dom(sums["u1"]) != zero or sk.cod(sums["u1"]) != x1 or sk.cod(sums["u2"]) != x0:
            self._fail("X1 + X0 is not a coproduct over the initial node")
        for f, ta, tb, pi_i in ((self.f1, self.f1_t1, self.f1_t2, self.pi1), (self.f2, self.f2_t1, self.f2_t2, self.pi2)):
            _require_tri(self, sk, ta, sums["j1"], f, pi_i, "copairing")
            _require_tri(self, sk, tb, sums["j2"], f, ident, "copairing")
        coeq = sk.pushout_parts(self.coeq)
        if coeq["u1"] != self.f1 or coeq["u2"] != self.f2:
            self._fail("coequalizer is not the pushout of the two copairings")
        gamma = coeq["j1"]
        kp = sk.pullback_parts(self.kpair)
        if kp["u1"] != gamma or kp["u2"] != gamma:
            self._fail("K is not the kernel pair of the coequalizer")
        _require_tri(self, sk, self.e_t1, self.e, kp["p1"], self.pi1, "e")
        _require_tri(self, sk, self.e_t2, self.e, kp["p2"], self.pi2, "e")

    def append(self, sk: SketchDraft) -> None:
        adjoin_inverse(sk, self.e)


SIMPLE_STEPS = (AddPrimitiveNode, AddPrimitiveEdge, AddCommutativity, AddTerminal, AddInitial,
                AddPullback, AddPushout, AddListObject)
UNIV_INTRO_STEPS = (AddTerminal, AddInitial, AddPullback, AddPushout, AddListObject)
RULE_STEPS = (Composition, LeftUnit, RightUnit, LeftAssoc, RightAssoc, PullbackFillin,
              PullbackFillinUnique, PushoutFillin, PushoutFillinUnique, TerminalFillin,
              TerminalFillinUnique, InitialFillin, InitialFillinUnique, ListFillin,
              ListFillinUnique, Balance, InitStability, PushoutStability, Exactness)
INVERSION_STEPS = (Balance, InitStability, PushoutStability, Exactness)

ExtensionStep = Annotated[
    Union[AddPrimitiveNode, AddPrimitiveEdge, AddCommutativity, AddTerminal, AddInitial,
          AddPullback, AddPushout, AddListObject],
    Field(discriminator="kind"),
]

EqStep = Annotated[
    Union[AddTerminal, AddInitial, AddPullback, AddPushout, AddListObject,
          Composition, LeftUnit, RightUnit, LeftAssoc, RightAssoc, PullbackFillin,
          PullbackFillinUnique, PushoutFillin, PushoutFillinUnique, TerminalFillin,
          TerminalFillinUnique, InitialFillin, InitialFillinUnique, ListFillin,
          ListFillinUnique, Balance, InitStability, PushoutStability, Exactness],
    Field(discriminator="kind"),
]

STEP_CLASSES: dict[str, type[Step]] = {
    cls.model_fields["kind"].default: cls for cls in SIMPLE_STEPS + RULE_STEPS
}
RULE_NAMES: dict[str, type[Step]] = {cls.__name__: cls for cls in SIMPLE_STEPS + RULE_STEPS}


def is_simple(step: Step) -> bool:
    return isinstance(step, SIMPLE_STEPS)


def is_eq_step(step: Step) -> bool:
    return isinstance(step, UNIV_INTRO_STEPS + RULE_STEPS)
