import pytest

from src.config import get_settings
from src.kernel.arrows import chain_context, hom_context, i0, i1, layout_of
from src.kernel.conmap import (
    ContextMap, TwoCell, arrow_involution, cod_map, compose_map, composition_map, dom_map, extension_map,
    horizontal_compose, horizontal_compose_other, hom_map, identity_map, identity_two_cell, inclusion_map,
    interchange_certificate, inverse_certificates, map_equality_by_refinement, maps_objectively_equal,
    vertical_compose, whisker_certificates, whisker_left, whisker_right,
)
from src.kernel.errors import MissingWitnessError, ShapeError
from src.kernel.extension import EqExtension
from src.kernel.sketch import Sort, hom_equal, hom_from_maps, identity_hom
from src.kernel.steps import AddTerminal


@pytest.fixture
def with_terminal(ob_ctx) -> EqExtension:
    return EqExtension(base=ob_ctx.apex, steps=(AddTerminal(),))


class TestHomContext:
    def test_counts(self, ob_ctx):
        apex = hom_context(ob_ctx).apex
        assert (apex.n_count, apex.e_count, apex.tri_count) == (2, 4, 2)

    def test_theta_edges(self, arrow_ctx):
        apex = hom_context(arrow_ctx).apex
        lay = layout_of(arrow_ctx, 1)
        theta_x = lay.theta_node(1, 0)
        assert (apex.dom(theta_x), apex.cod(theta_x)) == (0, 2)
        theta_f = lay.theta_edge(1, 2)
        assert (apex.dom(theta_f), apex.cod(theta_f)) == (0, 3)
        assert apex.tri(lay.left_tri(1, 2)) == (2, lay.theta_node(1, 1), theta_f)
        assert apex.tri(lay.right_tri(1, 2)) == (theta_x, 5, theta_f)

    def test_copies(self, arrow_ctx):
        assert i0(arrow_ctx).n == (0, 1)
        assert i1(arrow_ctx).n == (2, 3)
        assert i1(arrow_ctx).e == (3, 4, 5)

    def test_chain_length(self, ob_ctx):
        assert chain_context(ob_ctx, 3).apex.n_count == 4
        with pytest.raises(ShapeError):
            chain_context(ob_ctx, -1)


class TestContextMaps:
    def test_extension_must_be_over_the_source(self, ob_ctx, arrow_ctx):
        with pytest.raises(ShapeError):
            ContextMap(source=ob_ctx, target=ob_ctx, ext=EqExtension(base=arrow_ctx.apex), hom=identity_hom(ob_ctx.apex))

    def test_hom_must_land_in_the_apex(self, ob_ctx, arrow_ctx):
        with pytest.raises(ShapeError):
            ContextMap(source=ob_ctx, target=arrow_ctx, ext=EqExtension(base=ob_ctx.apex),
                       hom=identity_hom(arrow_ctx.apex))

    def test_hom_must_be_a_hom(self, arrow_ctx):
        s = arrow_ctx.apex
        swapped = identity_hom(s).model_copy(update={"n": (1, 0)})
        with pytest.raises(ShapeError, match="not preserved"):
            hom_map(arrow_ctx, arrow_ctx, swapped)

    def test_extension_and_inclusion(self, ob_ctx, with_terminal):
        there = extension_map(ob_ctx, with_terminal)
        back = inclusion_map(ob_ctx, with_terminal)
        assert there.target == ob_ctx.extended(with_terminal)
        assert there.apex == with_terminal.apex
        assert back.ext.is_empty()
        assert back.hom.n == (0,)

    def test_compose_with_identity(self, arrow_ctx):
        m = identity_map(arrow_ctx)
        composite = compose_map(m, m)
        assert composite.ext.is_empty()
        assert hom_equal(composite.hom, m.hom)
        cert = map_equality_by_refinement(composite, m)
        assert maps_objectively_equal(composite, m, cert)

    def test_compose_needs_matching_contexts(self, ob_ctx, arrow_ctx):
        with pytest.raises(ShapeError):
            compose_map(identity_map(ob_ctx), identity_map(arrow_ctx))

    def test_certificate_is_specific(self, arrow_ctx):
        s = arrow_ctx.apex
        collapse = hom_map(arrow_ctx, arrow_ctx, hom_from_maps(s, s, [0, 0], [0, 0, 0]))
        identity = identity_map(arrow_ctx)
        cert = map_equality_by_refinement(identity, identity)
        assert not maps_objectively_equal(identity, collapse, cert)

    def test_extension_maps_are_inverse(self, ob_ctx, with_terminal):
        first, second = inverse_certificates(ob_ctx, with_terminal)
        there, back = extension_map(ob_ctx, with_terminal), inclusion_map(ob_ctx, with_terminal)
        assert maps_objectively_equal(compose_map(there, back), identity_map(ob_ctx), first)
        assert maps_objectively_equal(compose_map(back, there), identity_map(ob_ctx.extended(with_terminal)), second)


class TestTwoCells:
    def test_identity_two_cell_boundary(self, arrow_ctx):
        m = identity_map(arrow_ctx)
        cell = identity_two_cell(m)
        for side in (dom_map(cell), cod_map(cell)):
            assert maps_objectively_equal(side, m, map_equality_by_refinement(side, m))

    def test_identity_cells_are_identities(self, ob_ctx):
        cell = identity_two_cell(identity_map(ob_ctx))
        theta = layout_of(ob_ctx, 1).theta_node(1, 0)
        apex = cell.arrow.apex
        assert apex.is_identity(cell.hom.edge(theta))

    def test_cell_needs_the_hom_context(self, ob_ctx):
        with pytest.raises(ShapeError):
            TwoCell(source=ob_ctx, target=ob_ctx, arrow=identity_map(ob_ctx))

    def test_composition_map(self, ob_ctx):
        m = composition_map(ob_ctx, 2)
        assert m.source == chain_context(ob_ctx, 2)
        assert m.target == hom_context(ob_ctx)
        lay = layout_of(ob_ctx, 2)
        assert m.hom(Sort.NODE, 0) == 0
        assert m.hom(Sort.NODE, 1) == lay.copy(2, Sort.NODE, 0)
        with pytest.raises(ShapeError):
            composition_map(ob_ctx, 0)

    def test_composition_map_of_one_level(self, ob_ctx):
        m = composition_map(ob_ctx, 1)
        assert m.source == hom_context(ob_ctx)
        assert m.hom.n == (0, 1)


CONTEXTS = ["ob_ctx", "arrow_ctx", "cospan_ctx", "terminals_ctx"]


def _maps_of(ctx):
    e = EqExtension(base=ctx.apex, steps=(AddTerminal(),))
    return identity_map(ctx), extension_map(ctx, e), inclusion_map(ctx, e)


class TestCompositionLaws:
    @pytest.mark.parametrize("name", CONTEXTS)
    def test_units(self, request, name):
        ctx = request.getfixturevalue(name)
        for m in _maps_of(ctx)[1:]:
            for composite in (compose_map(identity_map(m.source), m), compose_map(m, identity_map(m.target))):
                assert maps_objectively_equal(composite, m, map_equality_by_refinement(composite, m))

    @pytest.mark.parametrize("name", CONTEXTS)
    def test_associativity(self, request, name):
        _, there, back = _maps_of(request.getfixturevalue(name))
        for a, b, c in ((there, back, there), (back, there, back)):
            left = compose_map(compose_map(a, b), c)
            right = compose_map(a, compose_map(b, c))
            assert maps_objectively_equal(left, right, map_equality_by_refinement(left, right))

    @pytest.mark.parametrize("name", CONTEXTS)
    def test_round_trips(self, request, name):
        ctx = request.getfixturevalue(name)
        e = EqExtension(base=ctx.apex, steps=(AddTerminal(),))
        first, second = inverse_certificates(ctx, e)
        there, back = extension_map(ctx, e), inclusion_map(ctx, e)
        assert maps_objectively_equal(compose_map(there, back), identity_map(ctx), first)
        assert maps_objectively_equal(compose_map(back, there), identity_map(ctx.extended(e)), second)


@pytest.fixture
def unit_cell(ob_ctx) -> TwoCell:
    return identity_two_cell(identity_map(ob_ctx))


class TestTwoCellAlgebra:
    def test_whisker_right_by_a_hom(self, ob_ctx, unit_cell):
        m = identity_map(ob_ctx)
        result = whisker_right(unit_cell, m)
        first, second = whisker_certificates(unit_cell, m, "right", result)
        assert maps_objectively_equal(dom_map(result), compose_map(dom_map(unit_cell), m), first)
        assert maps_objectively_equal(cod_map(result), compose_map(cod_map(unit_cell), m), second)

    def test_whisker_right_by_an_extension(self, ob_ctx, with_terminal, unit_cell):
        m = extension_map(ob_ctx, with_terminal)
        result = whisker_right(unit_cell, m)
        assert result.target == ob_ctx.extended(with_terminal)
        first, second = whisker_certificates(unit_cell, m, "right", result)
        assert maps_objectively_equal(dom_map(result), compose_map(dom_map(unit_cell), m), first)
        assert maps_objectively_equal(cod_map(result), compose_map(cod_map(unit_cell), m), second)

    def test_whisker_left(self, ob_ctx, with_terminal, unit_cell):
        m = inclusion_map(ob_ctx, with_terminal)
        result = whisker_left(m, unit_cell)
        first, second = whisker_certificates(unit_cell, m, "left", result)
        assert maps_objectively_equal(dom_map(result), compose_map(m, dom_map(unit_cell)), first)
        assert maps_objectively_equal(cod_map(result), compose_map(m, cod_map(unit_cell)), second)

    def test_whisker_right_needs_the_target(self, arrow_ctx, unit_cell):
        with pytest.raises(ShapeError):
            whisker_right(unit_cell, identity_map(arrow_ctx))

    def test_vertical_composite_of_identities(self, ob_ctx, unit_cell):
        cert = map_equality_by_refinement(cod_map(unit_cell), dom_map(unit_cell))
        v = vertical_compose(unit_cell, unit_cell, cert)
        m = identity_map(ob_ctx)
        for side in (dom_map(v), cod_map(v)):
            assert maps_objectively_equal(side, m, map_equality_by_refinement(side, m))

    def test_vertical_compose_checks_the_certificate(self, ob_ctx, with_terminal, unit_cell):
        other = identity_two_cell(extension_map(ob_ctx, with_terminal))
        cert = map_equality_by_refinement(cod_map(unit_cell), dom_map(unit_cell))
        with pytest.raises(MissingWitnessError):
            vertical_compose(other, unit_cell, cert)

    def test_horizontal_composite_boundary(self, ob_ctx, unit_cell):
        h = horizontal_compose(unit_cell, unit_cell)
        m = identity_map(ob_ctx)
        for side in (dom_map(h), cod_map(h)):
            assert maps_objectively_equal(side, m, map_equality_by_refinement(side, m))

    def test_interchange_of_identity_cells(self, unit_cell):
        assert not unit_cell.ext.is_empty()
        depth = get_settings().search_depth + 2
        cert = interchange_certificate(unit_cell, unit_cell)
        one = horizontal_compose(unit_cell, unit_cell, depth)
        other = horizontal_compose_other(unit_cell, unit_cell, depth)
        assert maps_objectively_equal(one.arrow, other.arrow, cert)

    def test_interchange_with_a_whiskered_cell(self, ob_ctx, unit_cell):
        w = whisker_left(identity_map(ob_ctx), unit_cell)
        depth = get_settings().search_depth + 2
        cert = interchange_certificate(w, unit_cell)
        one = horizontal_compose(w, unit_cell, depth)
        other = horizontal_compose_other(w, unit_cell, depth)
        assert maps_objectively_equal(one.arrow, other.arrow, cert)

    @pytest.mark.parametrize("name", ["ob_ctx", "arrow_ctx"])
    def test_involution_squares_to_the_identity(self, request, name):
        ctx = request.getfixturevalue(name)
        tau = arrow_involution(ctx)
        double = hom_context(hom_context(ctx))
        assert tau.source.apex == double.apex and tau.target.apex == double.apex
        twice = compose_map(tau, tau)
        ident = identity_map(tau.source)
        assert maps_objectively_equal(twice, ident, map_equality_by_refinement(twice, ident))
