from itertools import combinations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.kernel.builder import DerivationBuilder
from src.kernel.errors import ModelError, ShapeError
from src.kernel.extension import Context, EqExtension, canonical_expression
from src.kernel.sketch import EMPTY_SKETCH, Sort, inclusion_hom
from src.kernel.steps import (
    AddCommutativity, AddInitial, AddListObject, AddPrimitiveEdge, AddPrimitiveNode, AddPullback, AddPushout,
    AddTerminal, Balance, Composition, Exactness, InitStability, ListFillinUnique, PullbackFillinUnique,
    PushoutFillinUnique, PushoutStability,
)
from src.setmodel.carriers import (
    ONE, POINT, compose, constant, finite_set, identity, invert, list_set, projections, pullback_set, pushout_set,
    same_carrier, table_map,
)
from src.setmodel.model import (
    PrimitiveAssignment, evaluate_expression, extend_along_eqext, identity_model_hom, interpret_context, reduct,
    verify_model, verify_model_hom,
)
from src.setmodel.strictify import strictify, transport_model

ARROW = PrimitiveAssignment(nodes={0: (0, 1), 1: ("a",)}, edges={2: {0: "a", 1: "a"}})
COSPAN = PrimitiveAssignment(nodes={0: (0, 1), 1: (0,), 2: (0,)}, edges={3: {0: 0, 1: 0}, 4: {0: 0}})
RENAMINGS = [nodes for k in range(1, 5) for nodes in combinations(range(4), k)]


@pytest.fixture
def arrow_model(arrow_ctx):
    return interpret_context(arrow_ctx, ARROW)


class TestCarriers:
    def test_repeated_elements(self):
        with pytest.raises(ModelError, match="repeated"):
            finite_set([1, 1])

    def test_partial_table(self):
        with pytest.raises(ModelError, match="undefined on 1"):
            table_map(finite_set([0, 1]), finite_set([0]), {0: 0})

    def test_table_outside_codomain(self):
        with pytest.raises(ModelError, match="outside its codomain"):
            table_map(finite_set([0]), finite_set([0]), {0: 5})

    def test_pullback(self):
        two = finite_set([0, 1])
        bang = constant(two, ONE, "*")
        pb = pullback_set(bang, bang)
        assert pb.elements == ((0, 0), (0, 1), (1, 0), (1, 1))
        p1, p, p2 = projections(pb)
        assert (p1((1, 0)), p((1, 0)), p2((1, 0))) == (1, "*", 0)

    def test_pushout_representatives(self):
        z = finite_set([0])
        left = table_map(z, finite_set(["a", "b"]), {0: "a"})
        right = table_map(z, finite_set(["c"]), {0: "c"})
        po, reps = pushout_set(left, right)
        assert po.elements == ((1, "a"), (1, "b"))
        assert reps[(2, "c")] == (1, "a")

    def test_lists_by_length(self):
        lst = list_set(finite_set([0, 1]))
        assert list(lst.enumerate(2)) == [(), (0,), (1,), (0, 0), (0, 1), (1, 0), (1, 1)]
        assert lst.size() is None
        assert lst.contains((1, 0, 1))
        assert not lst.contains((2,))

    def test_invert(self):
        two = finite_set([0, 1])
        swap = table_map(two, two, {0: 1, 1: 0})
        back = invert(swap)
        assert back.table == {1: 0, 0: 1}
        assert invert(constant(two, two, 0)) is None

    @given(st.lists(st.integers(), unique=True, max_size=6))
    def test_identity_and_composition(self, items):
        s = finite_set(items)
        twice = compose(identity(s), identity(s))
        assert all(twice(x) == x for x in items)
        assert same_carrier(s, finite_set(reversed(items)))


class TestInterpretation:
    def test_arrow(self, arrow_model):
        assert arrow_model.node(0).elements == (0, 1)
        assert arrow_model.edge(2)(1) == "a"
        report = verify_model(arrow_model)
        assert report.ok and report.exact

    def test_missing_carrier(self, arrow_ctx):
        with pytest.raises(ModelError, match="primitive node 1"):
            interpret_context(arrow_ctx, PrimitiveAssignment(nodes={0: (0,)}))

    def test_pullback_is_canonical(self, cospan_ctx):
        m = interpret_context(cospan_ctx, COSPAN)
        assert m.node(3).elements == ((0, 0), (1, 0))
        assert m.edge(5)((1, 0)) == 1
        assert verify_model(m).ok

    def test_failing_commutativity(self):
        ctx = Context(steps=(
            AddPrimitiveNode(), AddPrimitiveNode(),
            AddPrimitiveEdge(dom=0, cod=1), AddPrimitiveEdge(dom=0, cod=1),
            AddCommutativity(l=0, r=2, c=3),
        ))
        prim = PrimitiveAssignment(nodes={0: (0,), 1: (0, 1)}, edges={2: {0: 0}, 3: {0: 1}})
        with pytest.raises(ModelError, match="commutativity 0"):
            interpret_context(ctx, prim)

    def test_extension_along_a_composite(self, arrow_ctx, arrow_model):
        e = EqExtension(base=arrow_ctx.apex, steps=(Composition(u=2, v=1),))
        extended = extend_along_eqext(arrow_model, e)
        assert extended.edge(3)(0) == "a"
        assert verify_model(extended).ok

    def test_reduct(self, ob_ctx, arrow_ctx, arrow_model):
        small = reduct(arrow_model, inclusion_hom(ob_ctx.apex, arrow_ctx.apex))
        assert small.nodes == (arrow_model.node(0),)

    def test_expression(self, cospan_ctx):
        m = interpret_context(cospan_ctx, COSPAN)
        pb = evaluate_expression(canonical_expression(cospan_ctx, Sort.NODE, 3), m)
        assert same_carrier(pb, m.node(3))

    def test_identity_model_hom(self, arrow_model):
        assert verify_model_hom(identity_model_hom(arrow_model))


class TestStrictification:
    @pytest.fixture
    def pointed(self) -> Context:
        return Context(steps=(AddPrimitiveNode(), AddTerminal()))

    def test_transport_renames_carriers(self, arrow_model):
        moved = transport_model(arrow_model, {1: {"a": "b"}})
        assert not moved.strict
        assert moved.edge(2)(0) == "b"
        assert verify_model(moved).ok

    def test_transport_needs_every_element(self, arrow_model):
        with pytest.raises(ModelError, match="no image for 1"):
            transport_model(arrow_model, {0: {0: 5}})

    def test_non_strict_models_do_not_extend(self, arrow_ctx, arrow_model):
        moved = transport_model(arrow_model, {1: {"a": "b"}})
        with pytest.raises(ModelError, match="strictify"):
            extend_along_eqext(moved, EqExtension(base=arrow_ctx.apex))

    def test_strictify_a_renamed_terminal(self, pointed):
        m = interpret_context(pointed, PrimitiveAssignment(nodes={0: (0, 1)}))
        moved = transport_model(m, {1: {"*": "pt"}})
        strict, iso = strictify(pointed, moved)
        assert strict.strict
        assert strict.node(1).elements == ("*",)
        assert iso.components[1]("*") == "pt"
        assert verify_model_hom(iso)
        assert verify_model(strict).ok

    def test_strictify_checks_the_sketch(self, arrow_ctx, pointed):
        m = interpret_context(pointed, PrimitiveAssignment(nodes={0: (0, 1)}))
        with pytest.raises(ShapeError):
            strictify(arrow_ctx, m)

    @pytest.mark.parametrize("renamed", RENAMINGS)
    def test_strictify_a_perturbed_pullback_model(self, cospan_ctx, renamed):
        m = interpret_context(cospan_ctx, COSPAN)
        moved = transport_model(m, {x: {v: ("renamed", x, v) for v in m.node(x).enumerate()} for x in renamed})
        assert not moved.strict
        strict, iso = strictify(cospan_ctx, moved)
        assert strict.strict
        assert verify_model(strict).ok
        assert verify_model_hom(iso)
        assert strict.node(3).size() == 2
        assert invert(iso.components[3]) is not None
        for x in range(3):
            assert all(iso.components[x](v) == v for v in strict.node(x).enumerate())


class Presentation:
    """Simple steps over the empty sketch, handing back the indices they create."""

    def __init__(self):
        self.b = DerivationBuilder(EMPTY_SKETCH)

    def node(self) -> int:
        return self.b.add(AddPrimitiveNode()).n[0]

    def edge(self, dom: int, cod: int) -> int:
        return self.b.add(AddPrimitiveEdge(dom=dom, cod=cod)).e[0]

    def comm(self, l: int, r: int, c: int) -> int:
        return self.b.add(AddCommutativity(l=l, r=r, c=c)).tri[0]

    def ident(self, x: int) -> int:
        return self.b.ident(x)

    def pullback(self, u1: int, u2: int) -> tuple[int, dict]:
        w = self.b.add(AddPullback(u1=u1, u2=u2)).upb[0]
        return w, self.b.sk.pullback_parts(w)

    def pushout(self, u1: int, u2: int) -> tuple[int, dict]:
        w = self.b.add(AddPushout(u1=u1, u2=u2)).upo[0]
        return w, self.b.sk.pushout_parts(w)

    def context(self) -> Context:
        return Context(steps=tuple(self.b.steps))


def extended_model(ctx: Context, prim: PrimitiveAssignment, b: DerivationBuilder, bound=None):
    """Interpret ctx, extend along the derived steps, and require every commutativity to hold."""
    m = interpret_context(ctx, prim, bound)
    ext = extend_along_eqext(m, b.extension(), bound)
    assert verify_model(ext, bound).ok
    return ext


def balance_instance(table: dict, codomain: tuple):
    """u: X -> Y with its kernel pair and cokernel pair shown trivial."""
    pres = Presentation()
    x, y = pres.node(), pres.node()
    u = pres.edge(x, y)
    kernel, kp = pres.pullback(u, u)
    cokernel, cp = pres.pushout(u, u)
    mono = pres.comm(pres.ident(kp["apex"]), kp["p1"], kp["p2"])
    epi = pres.comm(pres.ident(y), cp["j1"], cp["j2"])
    prim = PrimitiveAssignment(nodes={x: tuple(table), y: codomain}, edges={u: table})
    step = Balance(u=u, kernel=kernel, cokernel=cokernel, mono=mono, epi=epi)
    return pres.context(), prim, step


R = ((0, 0), (1, 1), (2, 2), (0, 1), (1, 0))


def exactness_instance():
    """The equivalence relation R on {0, 1, 2} with its coequalizer and kernel pair."""
    pres = Presentation()
    x0, x1 = pres.node(), pres.node()
    pi1, pi2 = pres.edge(x1, x0), pres.edge(x1, x0)
    terminal = pres.b.add(AddTerminal()).n[0]
    bang = pres.edge(x0, terminal)
    prod, pp = pres.pullback(bang, bang)
    pi = pres.edge(x1, pp["apex"])
    pi_t1, pi_t2 = pres.comm(pi, pp["p1"], pi1), pres.comm(pi, pp["p2"], pi2)
    kernel, kp = pres.pullback(pi, pi)
    mono = pres.comm(pres.ident(kp["apex"]), kp["p1"], kp["p2"])
    x2, xp = pres.pullback(pi2, pi1)
    r = pres.edge(x0, x1)
    r_t1, r_t2 = pres.comm(r, pi1, pres.ident(x0)), pres.comm(r, pi2, pres.ident(x0))
    s = pres.edge(x1, x1)
    s_t1, s_t2 = pres.comm(s, pi1, pi2), pres.comm(s, pi2, pi1)
    t = pres.edge(xp["apex"], x1)
    c1, c2 = pres.edge(xp["apex"], x0), pres.edge(xp["apex"], x0)
    t_t1, t_t1b = pres.comm(t, pi1, c1), pres.comm(xp["p1"], pi1, c1)
    t_t2, t_t2b = pres.comm(t, pi2, c2), pres.comm(xp["p2"], pi2, c2)
    zero = pres.b.add(AddInitial())
    z1, z0 = pres.edge(zero.n[0], x1), pres.edge(zero.n[0], x0)
    total, sp = pres.pushout(z1, z0)
    f1, f2 = pres.edge(sp["apex"], x0), pres.edge(sp["apex"], x0)
    f1_t1, f1_t2 = pres.comm(sp["j1"], f1, pi1), pres.comm(sp["j2"], f1, pres.ident(x0))
    f2_t1, f2_t2 = pres.comm(sp["j1"], f2, pi2), pres.comm(sp["j2"], f2, pres.ident(x0))
    coeq, cp = pres.pushout(f1, f2)
    kpair, kk = pres.pullback(cp["j1"], cp["j1"])
    e = pres.edge(x1, kk["apex"])
    e_t1, e_t2 = pres.comm(e, kk["p1"], pi1), pres.comm(e, kk["p2"], pi2)

    points = (0, 1, 2)
    triples = [(p, q) for p in R for q in R if p[1] == q[0]]
    prim = PrimitiveAssignment(
        nodes={x0: points, x1: R},
        edges={
            pi1: {p: p[0] for p in R}, pi2: {p: p[1] for p in R},
            bang: {v: POINT for v in points}, pi: {p: p for p in R},
            r: {v: (v, v) for v in points}, s: {p: (p[1], p[0]) for p in R},
            t: {(p, q): (p[0], q[1]) for p, q in triples},
            c1: {(p, q): p[0] for p, q in triples}, c2: {(p, q): q[1] for p, q in triples},
            z1: {}, z0: {},
            f1: {**{(1, p): p[0] for p in R}, **{(2, v): v for v in points}},
            f2: {**{(1, p): p[1] for p in R}, **{(2, v): v for v in points}},
            e: {p: p for p in R},
        },
    )
    step = Exactness(
        pi1=pi1, pi2=pi2, prod=prod, pi=pi, pi_t1=pi_t1, pi_t2=pi_t2, kernel=kernel, mono=mono, x2=x2,
        r=r, r_t1=r_t1, r_t2=r_t2, s=s, s_t1=s_t1, s_t2=s_t2, t=t, t_t1=t_t1, t_t1b=t_t1b, t_t2=t_t2,
        t_t2b=t_t2b, initial=zero.ui[0], sum=total, f1=f1, f1_t1=f1_t1, f1_t2=f1_t2, f2=f2, f2_t1=f2_t1,
        f2_t2=f2_t2, coeq=coeq, kpair=kpair, e=e, e_t1=e_t1, e_t2=e_t2,
    )
    return pres.context(), prim, step


class TestRuleSoundness:
    """Each equivalence rule, replayed over a model of its premises, keeps every commutativity."""

    def test_balance_inverts_a_bijection(self):
        ctx, prim, step = balance_instance({0: "b", 1: "c", 2: "a"}, ("a", "b", "c"))
        b = DerivationBuilder(ctx.apex)
        inverse = b.add(step).e[0]
        ext = extended_model(ctx, prim, b)
        assert [ext.edge(inverse)(v) for v in ("a", "b", "c")] == [2, 0, 1]

    def test_balance_premises_fail_for_a_non_injective_map(self):
        ctx, prim, _ = balance_instance({0: "a", 1: "a", 2: "b"}, ("a", "b"))
        with pytest.raises(ModelError, match="commutativity"):
            interpret_context(ctx, prim)

    def test_initial_stability(self):
        pres = Presentation()
        zero = pres.b.add(AddInitial())
        x = pres.node()
        u = pres.edge(x, zero.n[0])
        ctx = pres.context()
        b = DerivationBuilder(ctx.apex)
        inverse = b.add(InitStability(univ=zero.ui[0], u=u)).e[0]
        ext = extended_model(ctx, PrimitiveAssignment(nodes={x: ()}, edges={u: {}}), b)
        assert ext.edge(inverse).dom.size() == 0

    def test_pushout_stability(self):
        pres = Presentation()
        z, a, c = pres.node(), pres.node(), pres.node()
        u1, u2 = pres.edge(z, a), pres.edge(z, c)
        base, po = pres.pushout(u1, u2)
        v = pres.node()
        w = pres.edge(v, po["apex"])
        ctx = pres.context()
        prim = PrimitiveAssignment(
            nodes={z: (0,), a: (0, 1), c: (0,), v: ("v0", "v1", "v2")},
            edges={u1: {0: 0}, u2: {0: 0}, w: {"v0": (1, 0), "v1": (1, 1), "v2": (1, 1)}},
        )

        b = DerivationBuilder(ctx.apex)

        def pullback(leg):
            univ = b.add(AddPullback(u1=w, u2=leg)).upb[0]
            return univ, b.sk.pullback_parts(univ)

        pb_v, pv = pullback(po["j"])
        legs = {}
        for i in (1, 2):
            univ, pvi = pullback(po[f"j{i}"])
            c_def = b.composite(pv["p2"], po[f"u{i}"])
            ci = b.tri(c_def)[2]
            ch = b.chain([ci, po[f"j{i}"]])
            ch.rewrite(0, b.eq_tri(c_def), backwards=True)
            ch.rewrite(1, b.eq_tri(po[f"tri{i}"]))
            ch.rewrite(0, b.eq_tri(pv["tri2"]))
            cone = b.eq_as_tri(ch.result(), [ci], [po[f"j{i}"]])
            up, t1, t2 = b.pullback_fill(univ, pv["tri1"], cone)
            legs[i] = {"pb": univ, "parts": pvi, "c_def": c_def, "up": up, "t1": t1, "t2": t2}
        top = b.add(AddPushout(u1=legs[1]["up"], u2=legs[2]["up"])).upo[0]
        e, e_t1, e_t2 = b.pushout_fill(top, legs[1]["t1"], legs[2]["t1"])
        inverse = b.add(PushoutStability(
            base=base, w=w, pb_v=pb_v, pb_v1=legs[1]["pb"], pb_v2=legs[2]["pb"],
            c1_def=legs[1]["c_def"], u1p=legs[1]["up"], u1p_t1=legs[1]["t1"], u1p_t2=legs[1]["t2"],
            c2_def=legs[2]["c_def"], u2p=legs[2]["up"], u2p_t1=legs[2]["t1"], u2p_t2=legs[2]["t2"],
            top=top, e=e, e_t1=e_t1, e_t2=e_t2,
        )).e[0]
        ext = extended_model(ctx, prim, b)
        assert ext.edge(inverse)("v1") == (1, ("v1", 1))
        assert ext.edge(e)(ext.edge(inverse)("v2")) == "v2"

    def test_exactness(self):
        ctx, prim, step = exactness_instance()
        b = DerivationBuilder(ctx.apex)
        inverse = b.add(step).e[0]
        ext = extended_model(ctx, prim, b)
        assert ext.edge(inverse)((0, 1)) == (0, 1)
        assert ext.edge(step.e).cod.size() == len(R)

    def test_pullback_fillin_uniqueness(self, cospan_ctx):
        b = DerivationBuilder(cospan_ctx.apex)
        parts = b.sk.pullback_parts(0)
        w, _, _ = b.pullback_fill(0, parts["tri1"], parts["tri2"])
        b.left_unit(parts["p1"])
        b.left_unit(parts["p2"])
        u = b.pullback_unique(0, parts["p1"], parts["p2"], w, b.ident(parts["apex"]))
        assert isinstance(b.steps[-1], PullbackFillinUnique)
        ext = extended_model(cospan_ctx, COSPAN, b)
        assert all(ext.edge(w)(x) == x for x in ext.node(parts["apex"]).enumerate())
        assert b.tri(u)[1:] == (w, b.ident(parts["apex"]))

    def test_pushout_fillin_uniqueness(self):
        pres = Presentation()
        z, a, c = pres.node(), pres.node(), pres.node()
        u1, u2 = pres.edge(z, a), pres.edge(z, c)
        base, po = pres.pushout(u1, u2)
        ctx = pres.context()
        prim = PrimitiveAssignment(nodes={z: (0,), a: (0, 1), c: (0,)}, edges={u1: {0: 0}, u2: {0: 0}})
        b = DerivationBuilder(ctx.apex)
        w, _, _ = b.pushout_fill(base, po["tri1"], po["tri2"])
        b.right_unit(po["j1"])
        b.right_unit(po["j2"])
        b.pushout_unique(base, po["j1"], po["j2"], w, b.ident(po["apex"]))
        assert isinstance(b.steps[-1], PushoutFillinUnique)
        ext = extended_model(ctx, prim, b)
        assert ext.node(po["apex"]).elements == ((1, 0), (1, 1))
        assert all(ext.edge(w)(q) == q for q in ext.node(po["apex"]).enumerate())

    def test_list_fillin_uniqueness(self):
        ctx = Context(steps=(AddTerminal(), AddListObject(a=0)))
        b = DerivationBuilder(ctx.apex)
        parts = b.sk.list_parts(0)
        first = b.list_recursor(0, b.ident(parts["list"]), parts["cons"], parts["pb"])
        config = b.steps[-1]
        second = b.add(config).e[0]
        b.add(ListFillinUnique(**config.model_dump(exclude={"kind"}), r1=first, r2=second))
        ext = extended_model(ctx, PrimitiveAssignment(), b, bound=3)
        two, one = (POINT, POINT), (POINT,)
        assert ext.edge(first)((two, one)) == (POINT,) * 3
        assert ext.edge(second)((two, one)) == (POINT,) * 3
