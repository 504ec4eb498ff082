import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.kernel.builder import DerivationBuilder
from src.kernel.errors import MissingWitnessError, ShapeError
from src.kernel.equiv import (
    EqualityGoal, check_refinement, common_refinement, derive_equality, identity_refinement, is_prefix,
    prefix_refinement, prove_edge_equality, refine_pair,
)
from src.kernel.extension import Context, EqExtension
from src.kernel.sketch import validate_sketch
from src.kernel.steps import AddCommutativity, AddPrimitiveEdge, AddPrimitiveNode, AddTerminal, Composition
from src.setmodel.model import PrimitiveAssignment, extend_along_eqext, interpret_context, verify_model


@pytest.fixture
def composites(arrow_ctx) -> DerivationBuilder:
    """Three chosen composites of f and id(Y): edges 3, 4, 5 with commutativities 0, 1, 2."""
    return DerivationBuilder(arrow_ctx.apex, [Composition(u=2, v=1)] * 3)


@pytest.fixture
def parallel() -> Context:
    """f, g: X -> Y with the unary commutativity id(X) f = g."""
    return Context(steps=(
        AddPrimitiveNode(), AddPrimitiveNode(),
        AddPrimitiveEdge(dom=0, cod=1), AddPrimitiveEdge(dom=0, cod=1),
        AddCommutativity(l=0, r=2, c=3),
    ))


class TestBuilder:
    def test_refl_is_the_left_unit(self, arrow_ctx):
        b = DerivationBuilder(arrow_ctx.apex)
        t = b.refl(2)
        assert b.tri(t) == (0, 2, 2)
        assert b.refl(2) == t

    def test_composite_is_reused(self, composites):
        assert composites.composite(2, 1) == 0
        assert composites.comp_edge(2, 1) == 3

    def test_comp_unique(self, composites):
        t = composites.comp_unique(0, 1)
        assert composites.tri(t) == (0, 3, 4)

    def test_sym(self, composites):
        t = composites.sym(composites.comp_unique(0, 1))
        assert composites.tri(t) == (0, 4, 3)

    def test_trans(self, composites):
        t = composites.trans(composites.comp_unique(0, 1), composites.comp_unique(1, 2))
        assert composites.tri(t) == (0, 3, 5)

    def test_trans_needs_a_chain(self, composites):
        first = composites.comp_unique(0, 1)
        with pytest.raises(ShapeError):
            composites.trans(first, first)

    def test_comp_unique_needs_the_same_legs(self, arrow_ctx):
        b = DerivationBuilder(arrow_ctx.apex, [Composition(u=2, v=1), Composition(u=0, v=2)])
        with pytest.raises(ShapeError):
            b.comp_unique(0, 1)

    def test_derivation_replays(self, composites):
        composites.sym(composites.comp_unique(0, 1))
        e = composites.extension()
        assert e.apex == composites.sketch()
        assert validate_sketch(e.apex).ok

    def test_canonical_from_right_form(self, arrow_ctx):
        b = DerivationBuilder(arrow_ctx.apex, [Composition(u=2, v=1)])
        t = b.canonical(0, 2, 3)
        assert b.tri(t) == (0, 2, 3)

    def test_canonical_needs_a_unary_form(self, composites):
        with pytest.raises(MissingWitnessError):
            composites.canonical(0, 3, 4)

    def test_terminal_edge(self, arrow_ctx):
        base = Context(steps=arrow_ctx.steps + (AddTerminal(),)).apex
        b = DerivationBuilder(base)
        u = b.terminal_edge(0, 0)
        assert (b.dom(u), b.cod(u)) == (0, 2)
        assert b.terminal_edge(0, 0) == u
        assert b.terminal_edge(0, 2) == b.ident(2)

    def test_prove_by_terminal_uniqueness(self, arrow_ctx):
        base = Context(steps=arrow_ctx.steps + (AddTerminal(),)).apex
        b = DerivationBuilder(base)
        bang_x = b.terminal_edge(0, 0)
        bang_y = b.terminal_edge(0, 1)
        eq = b.prove([2, bang_y], [bang_x], depth=3)
        assert eq is not None
        assert eq.lhs == (2, bang_y) and eq.rhs == (bang_x,)


class TestDeriveEquality:
    def test_refl_goal(self, arrow_ctx):
        e, t = derive_equality(arrow_ctx.apex, EqualityGoal(kind="refl", edges=(2,)))
        assert len(e) == 1
        assert e.apex.tri(t) == (0, 2, 2)

    def test_sym_goal(self, parallel):
        e, t = derive_equality(parallel.apex, EqualityGoal(kind="sym", tris=(0,)))
        assert e.apex.tri(t) == (0, 3, 2)

    def test_sym_needs_a_unary_commutativity(self, cospan_ctx):
        with pytest.raises(MissingWitnessError):
            derive_equality(cospan_ctx.apex, EqualityGoal(kind="sym", tris=(0,)))

    def test_malformed_goal(self, arrow_ctx):
        with pytest.raises(MissingWitnessError, match="malformed"):
            derive_equality(arrow_ctx.apex, EqualityGoal(kind="trans", tris=(0,)))

    def test_unit_transfer(self, parallel):
        e, t = derive_equality(parallel.apex, EqualityGoal(kind="unit_transfer", tris=(0,), edges=(3, 2)))
        assert e.apex.tri(t) == (0, 3, 2)

    def test_search(self, parallel):
        found = prove_edge_equality(parallel.apex, 3, 2)
        assert found is not None
        e, t = found
        assert e.apex.tri(t) == (0, 3, 2)

    def test_search_reports_failure(self, parallel):
        assert prove_edge_equality(parallel.apex, 2, 0) is None


class TestRefinement:
    def test_identity_refinement(self, arrow_ctx):
        e = EqExtension(base=arrow_ctx.apex, steps=(Composition(u=2, v=1),))
        assert check_refinement(identity_refinement(e))

    def test_prefix(self, arrow_ctx):
        short = EqExtension(base=arrow_ctx.apex, steps=(Composition(u=2, v=1),))
        long = EqExtension(base=arrow_ctx.apex, steps=(Composition(u=2, v=1), AddTerminal()))
        assert is_prefix(short, long)
        assert not is_prefix(long, short)
        assert check_refinement(prefix_refinement(short, long))
        with pytest.raises(ShapeError):
            prefix_refinement(long, short)

    def test_refine_pair_reuses_the_prefix(self, arrow_ctx):
        short = EqExtension(base=arrow_ctx.apex, steps=(Composition(u=2, v=1),))
        long = EqExtension(base=arrow_ctx.apex, steps=(Composition(u=2, v=1), AddTerminal()))
        e, r1, r2 = refine_pair(long, short)
        assert e == long
        assert check_refinement(r1) and check_refinement(r2)

    def test_common_refinement(self, arrow_ctx):
        e1 = EqExtension(base=arrow_ctx.apex, steps=(Composition(u=2, v=1),))
        e2 = EqExtension(base=arrow_ctx.apex, steps=(AddTerminal(),))
        e, r1, r2 = common_refinement(e1, e2)
        assert len(e) == 2
        assert check_refinement(r1) and check_refinement(r2)
        assert r2.eps.n == (0, 1, 2)

    def test_refinement_rejects_a_wrong_hom(self, arrow_ctx):
        e1 = EqExtension(base=arrow_ctx.apex, steps=(Composition(u=2, v=1),))
        e2 = EqExtension(base=arrow_ctx.apex, steps=(AddTerminal(),))
        _, r1, _ = common_refinement(e1, e2)
        bad = r1.model_copy(update={"eps": r1.eps.model_copy(update={"n": (1, 1)})})
        assert not check_refinement(bad)


def parallel_chain(k: int) -> Context:
    """k parallel edges X -> Y (edges 2 .. k+1) with U(f_i, f_i+1) as commutativity i."""
    return Context(steps=(
        AddPrimitiveNode(), AddPrimitiveNode(),
        *[AddPrimitiveEdge(dom=0, cod=1)] * k,
        *[AddCommutativity(l=0, r=2 + i, c=3 + i) for i in range(k - 1)],
    ))


class TestDerivedGoals:
    @settings(max_examples=60, deadline=None)
    @given(k=st.integers(min_value=3, max_value=6), data=st.data())
    def test_goals_hold_in_a_model(self, k, data):
        ctx = parallel_chain(k)
        kind = data.draw(st.sampled_from(["refl", "sym", "trans", "unit_transfer"]))
        i = data.draw(st.integers(min_value=0, max_value=k - 3))
        goal, expected = {
            "refl": (EqualityGoal(kind="refl", edges=(2 + i,)), (0, 2 + i, 2 + i)),
            "sym": (EqualityGoal(kind="sym", tris=(i,)), (0, 3 + i, 2 + i)),
            "trans": (EqualityGoal(kind="trans", tris=(i, i + 1)), (0, 2 + i, 4 + i)),
            "unit_transfer": (EqualityGoal(kind="unit_transfer", tris=(i,), edges=(3 + i, 2 + i)),
                              (0, 3 + i, 2 + i)),
        }[kind]
        e, t = derive_equality(ctx.apex, goal)
        assert e.apex.tri(t) == expected
        assert validate_sketch(e.apex).ok
        prim = PrimitiveAssignment(nodes={0: (0, 1), 1: ("y", "z")},
                                   edges={2 + j: {0: "y", 1: "z"} for j in range(k)})
        assert verify_model(extend_along_eqext(interpret_context(ctx, prim), e)).ok
