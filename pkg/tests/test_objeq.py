import pytest

from src.kernel.errors import MissingWitnessError, ShapeError
from src.kernel.extension import Context, EqExtension
from src.kernel.objeq import (
    ObjEqGoal, SameNode, Terminals, objeq_closure, reflexive_certificate, search_object_equality,
    search_objective_equality, verify_object_equality, verify_objective_equality, witness_explanation,
)
from src.kernel.sketch import hom_from_maps, identity_hom, validate_sketch
from src.kernel.steps import AddPullback, TerminalFillin


@pytest.fixture
def two_pullbacks(cospan_ctx) -> Context:
    """The cospan with a second pullback of the same data: nodes 3 and 4."""
    return Context(steps=cospan_ctx.steps + (AddPullback(u1=3, u2=4),))


@pytest.fixture
def bang(terminals_ctx):
    """An edge 2 from the first terminal node to the second, with its witness."""
    ext, g, w = search_object_equality(terminals_ctx.apex, 0, 1)
    return ext.apex, g, w


class TestWitnesses:
    def test_terminals_are_equal(self, terminals_ctx):
        found = search_object_equality(terminals_ctx.apex, 0, 1)
        assert found is not None
        ext, g, w = found
        assert w == Terminals(x=0, y=1)
        assert (ext.apex.dom(g), ext.apex.cod(g)) == (0, 1)
        assert verify_object_equality(ext.apex, g, w)
        assert witness_explanation(ext.apex, g, w) == ""

    def test_swapped_witness_fails(self, bang):
        s, g, _ = bang
        wrong = Terminals(x=1, y=0)
        assert not verify_object_equality(s, g, wrong)
        assert "terminal nodes" in witness_explanation(s, g, wrong)

    def test_same_node(self, arrow_ctx):
        found = search_object_equality(arrow_ctx.apex, 1, 1)
        ext, g, w = found
        assert g == ext.apex.ident(1)
        assert isinstance(w, SameNode)
        assert verify_object_equality(ext.apex, g, w)

    def test_out_of_range_edge(self, arrow_ctx):
        assert not verify_object_equality(arrow_ctx.apex, 99, SameNode(tri=0))

    def test_two_pullbacks_of_one_cospan(self, two_pullbacks):
        found = search_object_equality(two_pullbacks.apex, 3, 4)
        assert found is not None
        ext, g, w = found
        assert w.kind == "pullbacks"
        assert (w.x, w.y) == (0, 1)
        assert (ext.apex.dom(g), ext.apex.cod(g)) == (3, 4)
        assert verify_object_equality(ext.apex, g, w)
        assert validate_sketch(ext.apex).ok

    def test_unrelated_nodes(self, cospan_ctx):
        assert search_object_equality(cospan_ctx.apex, 0, 1) is None


class TestClosure:
    def test_invert_terminals(self, bang):
        s, g, w = bang
        result = objeq_closure(s, ObjEqGoal(kind="invert", edges=(g,), witnesses=(w,)))
        apex = result.ext.apex
        h = result.edge
        assert result.witness == Terminals(x=1, y=0)
        assert apex.tri(result.tris[0]) == (g, h, apex.ident(0))
        assert apex.tri(result.tris[1]) == (h, g, apex.ident(1))
        assert verify_object_equality(apex, h, result.witness)

    def test_identity_collapse(self, terminals_ctx):
        s = terminals_ctx.apex
        result = objeq_closure(s, ObjEqGoal(kind="identity_collapse", edges=(0,), witnesses=(Terminals(x=0, y=0),)))
        assert result.ext.apex.tri(result.tris[0]) == (0, 0, 0)

    def test_parallel_unify(self, terminals_ctx):
        both = EqExtension(base=terminals_ctx.apex, steps=(TerminalFillin(univ=1, node=0),) * 2)
        w = Terminals(x=0, y=1)
        result = objeq_closure(both.apex, ObjEqGoal(kind="parallel_unify", edges=(2, 3), witnesses=(w, w)))
        assert result.ext.apex.tri(result.tris[0]) == (0, 2, 3)

    def test_unverified_witness(self, bang):
        s, g, _ = bang
        with pytest.raises(MissingWitnessError):
            objeq_closure(s, ObjEqGoal(kind="invert", edges=(g,), witnesses=(Terminals(x=1, y=0),)))

    def test_one_witness_per_edge(self, bang):
        s, g, w = bang
        with pytest.raises(ShapeError):
            objeq_closure(s, ObjEqGoal(kind="compose", edges=(g, g), witnesses=(w,)))

    def test_collapse_needs_an_endomorphism(self, bang):
        s, g, w = bang
        with pytest.raises(ShapeError):
            objeq_closure(s, ObjEqGoal(kind="identity_collapse", edges=(g,), witnesses=(w,)))


class TestObjectiveEquality:
    def test_reflexive_certificate(self, arrow_ctx):
        f = identity_hom(arrow_ctx.apex)
        cert = reflexive_certificate(arrow_ctx, f)
        assert len(cert.witnesses) == 2
        assert verify_objective_equality(f, f, cert)

    def test_certificate_is_for_its_homs(self, arrow_ctx):
        s = arrow_ctx.apex
        f = identity_hom(s)
        collapse_x = hom_from_maps(s, s, [0, 0], [0, 0, 0])
        cert = reflexive_certificate(arrow_ctx, f)
        assert not verify_objective_equality(f, collapse_x, cert)

    def test_search(self, arrow_ctx):
        f = identity_hom(arrow_ctx.apex)
        cert = search_objective_equality(arrow_ctx, f, f)
        assert cert is not None
        assert verify_objective_equality(f, f, cert)

    def test_search_fails_on_different_nodes(self, arrow_ctx):
        s = arrow_ctx.apex
        collapse_x = hom_from_maps(s, s, [0, 0], [0, 0, 0])
        assert search_objective_equality(arrow_ctx, identity_hom(s), collapse_x) is None
