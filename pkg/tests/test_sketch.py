import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.kernel.errors import EnumerationLimitError, ShapeError
from src.kernel.extension import Context
from src.kernel.sketch import (
    Sketch, SketchDraft, Sort, compose_hom, enumerate_homs, hom_equal, hom_from_maps, hom_problems,
    identity_hom, inclusion_hom, is_hom, validate_sketch,
)
from src.kernel.steps import AddPrimitiveEdge, AddPrimitiveNode


@st.composite
def primitive_graphs(draw) -> Context:
    """Contexts of primitive nodes followed by primitive edges between them."""
    n = draw(st.integers(min_value=1, max_value=3))
    ends = st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))
    edges = draw(st.lists(ends, max_size=3))
    return Context(steps=(AddPrimitiveNode(),) * n + tuple(AddPrimitiveEdge(dom=d, cod=c) for d, c in edges))


class TestValidation:
    def test_ob_apex(self, ob_ctx):
        s = ob_ctx.apex
        assert s.counts() == {"n": 1, "e": 1, "tri": 0, "ut": 0, "upb": 0, "ui": 0, "upo": 0, "ul": 0}
        assert s.ident(0) == 0
        assert validate_sketch(s).ok

    def test_pullback_apex_is_valid(self, cospan_ctx):
        report = validate_sketch(cospan_ctx.apex)
        assert report.ok
        assert report.summary() == "ok"

    def test_identity_with_wrong_codomain(self, arrow_ctx):
        broken = arrow_ctx.apex.model_copy(update={"e_cod": (1, 1, 1)})
        report = validate_sketch(broken)
        assert not report.ok
        assert [v.equation for v in report.violations] == ["n_id;e_cod = Id"]
        assert report.violations[0].index == 0

    def test_table_shorter_than_carrier(self, ob_ctx):
        broken = ob_ctx.apex.model_copy(update={"n_count": 2})
        report = validate_sketch(broken)
        assert "range:n_id" in {v.equation for v in report.violations}
        assert "range:n_id" in report.summary()

    def test_draft_round_trip(self, cospan_ctx):
        s = cospan_ctx.apex
        assert SketchDraft(s).freeze() == s

    def test_find_tri(self, cospan_ctx):
        s = cospan_ctx.apex
        assert s.find_tri(5, 3, 6) == 0
        assert s.find_tri(7, 4, 6) == 1
        assert s.find_tri(3, 5, 6) is None

    def test_pullback_parts(self, cospan_ctx):
        parts = cospan_ctx.apex.pullback_parts(0)
        assert (parts["p1"], parts["p"], parts["p2"]) == (5, 6, 7)
        assert (parts["u1"], parts["u2"]) == (3, 4)
        assert (parts["apex"], parts["base"]) == (3, 2)


class TestHoms:
    def test_identity_is_a_hom(self, cospan_ctx):
        assert is_hom(identity_hom(cospan_ctx.apex))

    def test_inclusion_into_extension(self, ob_ctx, arrow_ctx):
        h = inclusion_hom(ob_ctx.apex, arrow_ctx.apex)
        assert is_hom(h)
        assert h.n == (0,) and h.e == (0,)

    def test_inclusion_cannot_shrink(self, ob_ctx, arrow_ctx):
        with pytest.raises(ShapeError):
            inclusion_hom(arrow_ctx.apex, ob_ctx.apex)

    def test_compose_with_identity(self, ob_ctx, arrow_ctx):
        h = inclusion_hom(ob_ctx.apex, arrow_ctx.apex)
        assert hom_equal(compose_hom(h, identity_hom(arrow_ctx.apex)), h)
        assert hom_equal(compose_hom(identity_hom(ob_ctx.apex), h), h)

    def test_compose_needs_matching_ends(self, ob_ctx, arrow_ctx):
        h = inclusion_hom(ob_ctx.apex, arrow_ctx.apex)
        with pytest.raises(ShapeError):
            compose_hom(h, h)

    def test_problems_name_the_operator(self, arrow_ctx):
        s = arrow_ctx.apex
        swapped = identity_hom(s).model_copy(update={"n": (1, 0)})
        problems = hom_problems(swapped)
        assert problems and problems[0].startswith("e_dom not preserved")

    def test_from_maps(self, ob_ctx, arrow_ctx):
        h = hom_from_maps(ob_ctx.apex, arrow_ctx.apex, [1], [1])
        assert h.node(0) == 1 and h.edge(0) == 1

    def test_from_maps_rejects_non_identity(self, ob_ctx, arrow_ctx):
        with pytest.raises(ShapeError):
            hom_from_maps(ob_ctx.apex, arrow_ctx.apex, [0], [2])

    @pytest.mark.parametrize("source, target, expected", [
        ("ob_ctx", "ob_ctx", 1),
        ("ob_ctx", "arrow_ctx", 2),
        ("arrow_ctx", "ob_ctx", 1),
        ("arrow_ctx", "arrow_ctx", 3),
    ])
    def test_enumerate(self, request, source, target, expected):
        s1 = request.getfixturevalue(source).apex
        s2 = request.getfixturevalue(target).apex
        homs = enumerate_homs(s1, s2, limit=10)
        assert len(homs) == expected
        assert all(is_hom(h) for h in homs)

    def test_enumerate_reports_the_limit(self, ob_ctx, arrow_ctx):
        with pytest.raises(EnumerationLimitError):
            enumerate_homs(ob_ctx.apex, arrow_ctx.apex, limit=1)

    def test_universal_pins_the_endomorphism(self, cospan_ctx):
        s = cospan_ctx.apex
        [h] = enumerate_homs(s, s, limit=200)
        assert hom_equal(h, identity_hom(s))


class TestGeneratedSketches:
    @given(primitive_graphs())
    @settings(max_examples=40, deadline=None)
    def test_primitive_graphs_validate(self, ctx):
        assert validate_sketch(ctx.apex).ok

    @given(primitive_graphs())
    @settings(max_examples=25, deadline=None)
    def test_identity_is_an_endomorphism(self, ctx):
        s = ctx.apex
        homs = enumerate_homs(s, s, limit=1000)
        assert any(hom_equal(h, identity_hom(s)) for h in homs)

    @given(primitive_graphs())
    @settings(max_examples=25, deadline=None)
    def test_node_and_edge_maps_determine_a_hom(self, ctx):
        s = ctx.apex
        h = hom_from_maps(s, s, range(s.count(Sort.NODE)), range(s.count(Sort.EDGE)))
        assert hom_equal(h, identity_hom(s))


def test_empty_sketch_counts():
    assert Sketch().describe().startswith("|N|=0 |E|=0")
