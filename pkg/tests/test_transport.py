import pytest

from src.kernel.arrows import i0, i1
from src.kernel.errors import ShapeError
from src.kernel.extension import EqExtension
from src.kernel.objeq import verify_objective_equality
from src.kernel.sketch import compose_hom, hom_equal, identity_hom, is_hom
from src.kernel.steps import AddPullback, AddTerminal
from src.kernel.transport import extend_two_cell, identity_cell_hom


def extended_identity_cell(ctx, steps):
    _, alpha, witnesses = identity_cell_hom(ctx, identity_hom(ctx.apex))
    e1 = EqExtension(base=ctx.apex, steps=steps)
    return e1, extend_two_cell(ctx, e1, alpha, witnesses)


class TestExtendTwoCell:
    @pytest.mark.parametrize("count", [1, 2])
    def test_identity_cell_over_terminals(self, ob_ctx, count):
        e1, result = extended_identity_cell(ob_ctx, (AddTerminal(),) * count)
        assert result.context == ob_ctx.extended(e1)
        assert is_hom(result.alpha)
        assert hom_equal(compose_hom(i0(result.context), result.alpha), result.f0)
        assert hom_equal(compose_hom(i1(result.context), result.alpha), result.f1)
        assert verify_objective_equality(result.f0, result.f1, result.certificate())

    def test_identity_cell_over_a_second_pullback(self, cospan_ctx):
        e1, result = extended_identity_cell(cospan_ctx, (AddPullback(u1=3, u2=4),))
        assert is_hom(result.alpha)
        assert verify_objective_equality(result.f0, result.f1, result.certificate())

    def test_extension_must_be_over_the_context(self, ob_ctx, arrow_ctx):
        _, alpha, _ = identity_cell_hom(ob_ctx, identity_hom(ob_ctx.apex))
        with pytest.raises(ShapeError):
            extend_two_cell(ob_ctx, EqExtension(base=arrow_ctx.apex), alpha)
