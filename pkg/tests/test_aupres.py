import pytest

from src.kernel.aupres import (
    TermMorphism, TermObject, TermSession, apply_au_op, map_to_model, model_to_map, mor_equal, object_equality,
    term_compose,
)
from src.kernel.conmap import extension_map, identity_map
from src.kernel.errors import MissingWitnessError, ShapeError, UnsupportedConstructionError
from src.kernel.extension import Context, EqExtension
from src.kernel.objeq import Terminals
from src.kernel.sketch import hom_equal
from src.kernel.steps import AddCommutativity, AddPrimitiveEdge, AddPrimitiveNode, AddTerminal, Composition


def element(ctx: Context, node: int = None, edge: int = None):
    ext = EqExtension(base=ctx.apex)
    return TermObject(ext=ext, node=node) if edge is None else TermMorphism(ext=ext, edge=edge)


class TestTerms:
    def test_node_must_exist(self, ob_ctx):
        with pytest.raises(ShapeError):
            element(ob_ctx, node=3)

    def test_edge_must_exist(self, ob_ctx):
        with pytest.raises(ShapeError):
            element(ob_ctx, edge=1)

    def test_morphism_ends(self, arrow_ctx):
        f = element(arrow_ctx, edge=2)
        assert (f.dom.node, f.cod.node) == (0, 1)


class TestOperations:
    def test_fresh_terminal(self, ob_ctx):
        t = apply_au_op(ob_ctx, "terminal")
        assert t.node == 1
        assert len(t.ext.steps) == 1

    def test_unknown_operation(self, ob_ctx):
        with pytest.raises(UnsupportedConstructionError):
            apply_au_op(ob_ctx, "exponential")

    def test_arity(self, ob_ctx):
        with pytest.raises(ShapeError, match="takes 2 arguments"):
            apply_au_op(ob_ctx, "pullback", [element(ob_ctx, edge=0)])

    def test_rule_needs_a_step(self, ob_ctx):
        with pytest.raises(ShapeError):
            apply_au_op(ob_ctx, "rule")

    def test_rule_must_be_an_equivalence_rule(self, ob_ctx):
        with pytest.raises(UnsupportedConstructionError):
            apply_au_op(ob_ctx, "rule", step=AddTerminal())

    def test_rule_returns_the_fresh_edge(self, arrow_ctx):
        composite = apply_au_op(arrow_ctx, "rule", step=Composition(u=2, v=1))
        assert composite.edge == 3
        assert (composite.dom.node, composite.cod.node) == (0, 1)

    def test_bang(self, ob_ctx):
        bang = apply_au_op(ob_ctx, "bang", [element(ob_ctx, node=0)])
        assert bang.dom.node == 0
        assert bang.ext.apex.ut_n == (bang.cod.node,)

    def test_pullback(self, cospan_ctx):
        pb = apply_au_op(cospan_ctx, "pullback", [element(cospan_ctx, edge=3), element(cospan_ctx, edge=4)])
        assert pb.node == 4
        assert pb.ext.apex.upb_count == 2

    def test_compose(self, arrow_ctx):
        f, idy = element(arrow_ctx, edge=2), element(arrow_ctx, edge=1)
        composite = apply_au_op(arrow_ctx, "compose", [f, idy])
        assert composite.ext.apex.tri(0) == (2, 1, composite.edge)
        assert term_compose(arrow_ctx, f, idy).edge == composite.edge

    def test_compose_needs_matching_ends(self, arrow_ctx):
        f = element(arrow_ctx, edge=2)
        with pytest.raises(MissingWitnessError):
            apply_au_op(arrow_ctx, "compose", [f, f])

    def test_addition(self):
        session = TermSession(Context(steps=()))
        add = session.addition()
        nat = session.natural_numbers()
        b = session.builder
        assert b.cod(add) == nat
        assert any(b.sk.pullback_parts(w)["apex"] == b.dom(add) for w in range(len(b.sk.upb_tri1)))
        assert session.natural_numbers() == nat


class TestEquality:
    @pytest.fixture
    def parallel(self) -> Context:
        return Context(steps=(
            AddPrimitiveNode(), AddPrimitiveNode(),
            AddPrimitiveEdge(dom=0, cod=1), AddPrimitiveEdge(dom=0, cod=1),
            AddCommutativity(l=0, r=2, c=3),
        ))

    def test_same_morphism(self, arrow_ctx):
        f = element(arrow_ctx, edge=2)
        assert mor_equal(arrow_ctx, f, f)

    def test_witnessed_morphisms(self, parallel):
        assert mor_equal(parallel, element(parallel, edge=2), element(parallel, edge=3))

    def test_different_ends(self, arrow_ctx):
        assert not mor_equal(arrow_ctx, element(arrow_ctx, edge=2), element(arrow_ctx, edge=0))

    def test_bad_derivation_is_false(self, arrow_ctx):
        f = element(arrow_ctx, edge=2)
        assert not mor_equal(arrow_ctx, f, f, derivation=[Composition(u=2, v=0)])

    def test_terminal_objects(self, terminals_ctx):
        found = object_equality(terminals_ctx, element(terminals_ctx, node=0), element(terminals_ctx, node=1))
        assert found is not None
        g, w = found
        assert (g.dom.node, g.cod.node) == (0, 1)
        assert w == Terminals(x=0, y=1)

    def test_unrelated_objects(self, cospan_ctx):
        assert object_equality(cospan_ctx, element(cospan_ctx, node=0), element(cospan_ctx, node=1)) is None


class TestTermModels:
    def test_identity_map_round_trip(self, arrow_ctx):
        m = identity_map(arrow_ctx)
        model = map_to_model(m)
        assert [x.node for x in model.objects] == [0, 1]
        assert [u.edge for u in model.morphisms] == [0, 1, 2]
        back = model_to_map(model)
        assert hom_equal(back.hom, m.hom)

    @pytest.mark.parametrize("name", ["ob_ctx", "arrow_ctx", "cospan_ctx", "terminals_ctx"])
    def test_round_trips(self, request, name):
        ctx = request.getfixturevalue(name)
        e = EqExtension(base=ctx.apex, steps=(AddTerminal(),))
        for m in (identity_map(ctx), extension_map(ctx, e)):
            back = model_to_map(map_to_model(m))
            assert back.ext == m.ext
            assert hom_equal(back.hom, m.hom)

    def test_model_must_cover_the_target(self, arrow_ctx):
        model = map_to_model(identity_map(arrow_ctx))
        with pytest.raises(ShapeError):
            model_to_map(model.model_copy(update={"objects": model.objects[:1]}))

    def test_model_must_respect_the_edges(self, arrow_ctx):
        model = map_to_model(identity_map(arrow_ctx))
        swapped = model.model_copy(update={"objects": model.objects[::-1]})
        with pytest.raises(ShapeError):
            model_to_map(swapped)
