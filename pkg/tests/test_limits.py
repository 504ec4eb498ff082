import pytest

from src.kernel.arrows import hom_context, i0, i1, product_context
from src.kernel.conmap import compose_map, hom_map, identity_map, maps_objectively_equal
from src.kernel.errors import ShapeError, UnsupportedConstructionError
from src.kernel.extension import Extension
from src.kernel.limits import (
    build_equifier, build_hom_context, build_inserter, build_product, equifier_factor, fillin_uniqueness,
    inserter_factor, inserter_pair, pairing, pullback_extension_map, pullback_fillin, reorder_extension,
    step_dependencies,
)
from src.kernel.sketch import (
    compose_hom, enumerate_homs, hom_equal, hom_from_maps, identity_hom, inclusion_hom, is_hom,
)
from src.kernel.steps import AddPrimitiveEdge, AddTerminal


@pytest.fixture
def inserter(ob_ctx, terminals_ctx):
    """Ins(f0, f1) for the two points of the pair of terminal nodes."""
    t = terminals_ctx.apex
    f0 = hom_from_maps(ob_ctx.apex, t, [0], [0])
    f1 = hom_from_maps(ob_ctx.apex, t, [1], [1])
    return build_inserter(ob_ctx, f0, f1, base=terminals_ctx)


class TestProducts:
    def test_product_counts(self, ob_ctx, arrow_ctx):
        result = build_product(ob_ctx, arrow_ctx)
        apex = result.context.apex
        assert (apex.n_count, apex.e_count) == (3, 4)
        assert result.legs[1].n == (1, 2)
        assert result.legs[1].e == (1, 2, 3)
        assert all(is_hom(h) for h in result.legs)
        assert [m.target for m in result.maps] == [ob_ctx, arrow_ctx]

    def test_pairing(self, ob_ctx, arrow_ctx):
        g0 = inclusion_hom(ob_ctx.apex, arrow_ctx.apex)
        g1 = identity_hom(arrow_ctx.apex)
        paired = pairing(ob_ctx, arrow_ctx, g0, g1)
        assert paired.n == (0, 0, 1)
        left, right = build_product(ob_ctx, arrow_ctx).legs
        assert hom_equal(compose_hom(left, paired), g0)
        assert hom_equal(compose_hom(right, paired), g1)

    def test_pairing_needs_one_target(self, ob_ctx):
        with pytest.raises(ShapeError):
            pairing(ob_ctx, ob_ctx, identity_hom(ob_ctx.apex), inclusion_hom(ob_ctx.apex, hom_context(ob_ctx).apex))

    def test_hom_context(self, ob_ctx):
        result = build_hom_context(ob_ctx)
        assert result.context == hom_context(ob_ctx)
        assert len(result.legs) == 2
        assert len(result.extension.steps) == 5
        assert result.extension.apex == result.context.apex


class TestInserters:
    def test_cells(self, inserter):
        apex = inserter.extension.apex
        assert (apex.dom(2), apex.cod(2)) == (0, 1)
        assert apex.tri(0) == (0, 2, 3)
        assert apex.tri(1) == (2, 1, 3)
        assert is_hom(inserter.legs[0])

    def test_context_and_projection(self, inserter, terminals_ctx):
        assert inserter.context.apex == inserter.extension.apex
        [projection] = inserter.maps
        assert projection.target == terminals_ctx

    def test_factor_inverts_pair(self, ob_ctx, inserter):
        apex = inserter.extension.apex
        g, alpha = inserter_pair(inserter, identity_hom(apex))
        assert hom_equal(inserter_factor(ob_ctx, inserter, g, alpha), identity_hom(apex))

    def test_factor_checks_the_cell(self, ob_ctx, inserter):
        apex = inserter.extension.apex
        g, alpha = inserter_pair(inserter, identity_hom(apex))
        wrong = alpha.model_copy(update={"e": alpha.e[:2] + (3, 3)})
        with pytest.raises(ShapeError):
            inserter_factor(ob_ctx, inserter, g, wrong)

    def test_homs_must_be_parallel(self, ob_ctx, terminals_ctx):
        f0 = hom_from_maps(ob_ctx.apex, terminals_ctx.apex, [0], [0])
        with pytest.raises(ShapeError):
            build_inserter(ob_ctx, f0, identity_hom(ob_ctx.apex))


class TestEquifiers:
    def test_equifier_of_a_cell_with_itself(self, ob_ctx, inserter):
        alpha = inserter.legs[0]
        result = build_equifier(ob_ctx, alpha, alpha)
        apex = result.extension.apex
        assert len(result.extension.steps) == 2
        assert apex.tri(2) == (0, 2, 2)
        factored = equifier_factor(result, result.legs[0])
        assert factored is not None
        assert is_hom(factored)

    def test_unwitnessed_equation_does_not_factor(self, ob_ctx, inserter):
        alpha = inserter.legs[0]
        result = build_equifier(ob_ctx, alpha, alpha)
        assert equifier_factor(result, identity_hom(alpha.target)) is None

    def test_cells_must_be_parallel(self, ob_ctx, inserter):
        with pytest.raises(ShapeError):
            build_equifier(ob_ctx, inserter.legs[0], identity_hom(inserter.extension.apex))


class TestPullbacks:
    def test_terminal_along_a_map(self, ob_ctx, arrow_ctx):
        c = Extension(base=ob_ctx.apex, steps=(AddTerminal(),))
        f = inclusion_hom(ob_ctx.apex, arrow_ctx.apex)
        m = hom_map(arrow_ctx, ob_ctx, f)
        result = pullback_extension_map(ob_ctx, c, m)
        pb = result.context.apex
        assert result.kind == "pullback"
        assert pb.n_count == 3
        leg0, leg1 = result.legs
        assert leg1.n == (0, 2)
        assert hom_equal(compose_hom(c.inclusion, leg1), compose_hom(f, leg0))

    def test_extension_must_meet_the_map(self, ob_ctx, arrow_ctx):
        c = Extension(base=arrow_ctx.apex, steps=(AddTerminal(),))
        m = hom_map(arrow_ctx, ob_ctx, inclusion_hom(ob_ctx.apex, arrow_ctx.apex))
        with pytest.raises(ShapeError):
            pullback_extension_map(ob_ctx, c, m)

    def test_fillin_of_the_pullback_cone(self, ob_ctx, arrow_ctx):
        c = Extension(base=ob_ctx.apex, steps=(AddTerminal(),))
        m = hom_map(arrow_ctx, ob_ctx, inclusion_hom(ob_ctx.apex, arrow_ctx.apex))
        result = pullback_extension_map(ob_ctx, c, m)
        q, p = result.maps
        filled = pullback_fillin(ob_ctx, c, m, result, q, p)
        pb = result.context
        assert hom_equal(filled.fillin.hom, identity_hom(pb.apex))
        assert maps_objectively_equal(compose_map(filled.fillin, q), q, filled.first)
        assert maps_objectively_equal(compose_map(filled.fillin, p), p, filled.second)
        ident = identity_map(pb)
        assert maps_objectively_equal(filled.fillin, ident, fillin_uniqueness(filled.fillin, ident))

    def test_fillin_needs_a_commuting_cone(self, ob_ctx, arrow_ctx):
        c = Extension(base=ob_ctx.apex, steps=(AddTerminal(),))
        m = hom_map(arrow_ctx, ob_ctx, inclusion_hom(ob_ctx.apex, arrow_ctx.apex))
        result = pullback_extension_map(ob_ctx, c, m)
        q, p = result.maps
        pb = result.context
        moved = hom_map(pb, p.target, hom_from_maps(p.target.apex, pb.apex, [1, 2], [1, 3]))
        with pytest.raises(UnsupportedConstructionError):
            pullback_fillin(ob_ctx, c, m, result, q, moved)


class TestReordering:
    def test_dependencies(self, cospan_ctx):
        deps = step_dependencies(cospan_ctx)
        assert deps[0] == set()
        assert deps[3] == {0, 2}
        assert deps[5] == {3, 4}

    def test_stable_order_is_unchanged(self, cospan_ctx):
        reordered, iso = reorder_extension(cospan_ctx, lambda k: k)
        assert reordered.steps == cospan_ctx.steps
        assert hom_equal(iso, identity_hom(cospan_ctx.apex))

    def test_swapping_independent_steps(self, arrow_ctx):
        reordered, iso = reorder_extension(arrow_ctx, lambda k: -k)
        assert reordered.steps[2] == AddPrimitiveEdge(dom=1, cod=0)
        assert iso.n == (1, 0)
        assert iso.e == (1, 0, 2)
        assert is_hom(iso)


def _restricting(homs, leg, target):
    return [h for h in homs if hom_equal(compose_hom(leg, h), target)]


class TestUniversalProperties:
    """Factorizations agree with brute-force enumeration of homomorphisms."""

    def test_product_pairs_are_the_homs_out_of_the_product(self, ob_ctx, arrow_ctx):
        u = arrow_ctx.apex
        left, right = build_product(ob_ctx, arrow_ctx).legs
        out = enumerate_homs(product_context(ob_ctx, arrow_ctx).apex, u)
        pairs = [(g0, g1) for g0 in enumerate_homs(ob_ctx.apex, u) for g1 in enumerate_homs(arrow_ctx.apex, u)]
        assert len(out) == len(pairs) == 6
        for g0, g1 in pairs:
            paired = pairing(ob_ctx, arrow_ctx, g0, g1)
            assert hom_equal(compose_hom(left, paired), g0) and hom_equal(compose_hom(right, paired), g1)
            assert len(_restricting(_restricting(out, left, g0), right, g1)) == 1

    def test_inserter_pairs_match_homs_out_of_the_inserter(self, ob_ctx, inserter):
        u = inserter.extension.apex
        out = enumerate_homs(u, u)
        assert out
        for h in out:
            g, alpha = inserter_pair(inserter, h)
            assert hom_equal(inserter_factor(ob_ctx, inserter, g, alpha), h)
        base = inserter.extension.base
        f0 = hom_from_maps(ob_ctx.apex, base, [0], [0])
        f1 = hom_from_maps(ob_ctx.apex, base, [1], [1])
        incl = inserter.extension.inclusion
        cells = enumerate_homs(hom_context(ob_ctx).apex, u)
        compatible = 0
        for g in enumerate_homs(base, u):
            for alpha in cells:
                if not (hom_equal(compose_hom(i0(ob_ctx), alpha), compose_hom(f0, g))
                        and hom_equal(compose_hom(i1(ob_ctx), alpha), compose_hom(f1, g))):
                    continue
                compatible += 1
                h = inserter_factor(ob_ctx, inserter, g, alpha)
                assert any(hom_equal(h, k) for k in out)
                assert len(_restricting(_restricting(out, incl, g), inserter.legs[0], alpha)) == 1
        assert compatible >= 1

    def test_equifier_factors_exactly_the_equifying_homs(self, ob_ctx, inserter):
        alpha = inserter.legs[0]
        result = build_equifier(ob_ctx, alpha, alpha)
        u = result.extension.apex
        out = enumerate_homs(u, u)
        factored = 0
        for h in enumerate_homs(alpha.target, u):
            k = equifier_factor(result, h)
            lifts = _restricting(out, result.legs[0], h)
            if k is None:
                assert not lifts
                continue
            factored += 1
            assert is_hom(k) and hom_equal(compose_hom(result.legs[0], k), h)
            assert len(lifts) == 1
        assert factored >= 1
