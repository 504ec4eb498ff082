import logging
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict

from src.config import get_settings
from src.kernel.builder import DerivationBuilder, search_equality
from src.kernel.errors import KernelError, MissingWitnessError, ShapeError
from src.kernel.extension import EqExtension, compose_extensions, reindex
from src.kernel.sketch import (
    Sketch, SketchHom, compose_hom, hom_equal, identity_hom, inclusion_hom, same_sketch,
)

logger = logging.getLogger("aukernel")


class Refinement(BaseModel):
    """e2 refines e1 by eps: apex(e1) -> apex(e2), with e1;eps = e2."""

    model_config = ConfigDict(frozen=True)

    e1: EqExtension
    e2: EqExtension
    eps: SketchHom


def check_refinement(r: Refinement) -> bool:
    try:
        if not (same_sketch(r.e1.base, r.e2.base) and same_sketch(r.eps.source, r.e1.apex)
                and same_sketch(r.eps.target, r.e2.apex)):
            return False
        return hom_equal(compose_hom(r.e1.inclusion, r.eps), r.e2.inclusion)
    except KernelError:
        return False


def identity_refinement(e: EqExtension) -> Refinement:
    return Refinement(e1=e, e2=e, eps=identity_hom(e.apex))


def common_refinement(e1: EqExtension, e2: EqExtension) -> tuple[EqExtension, Refinement, Refinement]:
    """e1 followed by e2 reindexed along the inclusion of e1."""
    if not same_sketch(e1.base, e2.base):
        raise ShapeError("common_refinement: extensions have different bases")
    moved, eps2 = reindex(e2, e1.inclusion)
    e = compose_extensions(e1, moved)
    r1 = Refinement(e1=e1, e2=e, eps=moved.inclusion)
    r2 = Refinement(e1=e2, e2=e, eps=eps2)
    return e, r1, r2


def is_prefix(e1: EqExtension, e2: EqExtension) -> bool:
    return same_sketch(e1.base, e2.base) and tuple(e2.steps[:len(e1.steps)]) == tuple(e1.steps)


def prefix_refinement(e1: EqExtension, e2: EqExtension) -> Refinement:
    """e2 = e1 followed by more steps: refinement by ordinal inclusion."""
    if not is_prefix(e1, e2):
        raise ShapeError("prefix_refinement: first extension is not a prefix of the second")
    return Refinement(e1=e1, e2=e2, eps=inclusion_hom(e1.apex, e2.apex))


def refine_pair(e1: EqExtension, e2: EqExtension) -> tuple[EqExtension, Refinement, Refinement]:
    """Common refinement that reuses a shared prefix instead of duplicating it."""
    if is_prefix(e1, e2):
        return e2, prefix_refinement(e1, e2), identity_refinement(e2)
    if is_prefix(e2, e1):
        return e1, identity_refinement(e1), prefix_refinement(e2, e1)
    return common_refinement(e1, e2)


def extend(e: EqExtension, more: EqExtension) -> EqExtension:
    return compose_extensions(e, more)


class EqualityGoal(BaseModel):
    """A goal of the derived equality logic.

    refl: edges=(u,); sym: tris=(U(u,u′),); trans: tris=(U(u,u′), U(u′,u″));
    congruence: tris=(U(u,u′), U(v,v′), (u,v,w)); unit_transfer: tris=(t,), edges=(a, b).
    """

    model_config = ConfigDict(frozen=True)

    kind: Literal["refl", "sym", "trans", "congruence", "unit_transfer"]
    edges: tuple[int, ...] = ()
    tris: tuple[int, ...] = ()


def derive_equality(base: Sketch, goal: EqualityGoal) -> tuple[EqExtension, int]:
    """Derivation over `base` whose apex contains the goal commutativity; returns its index."""
    b = DerivationBuilder(base)
    try:
        if goal.kind == "refl":
            (u,) = goal.edges
            t = b.refl(u)
        elif goal.kind == "sym":
            (t0,) = goal.tris
            if not b.sk.is_identity(b.tri(t0)[0]):
                raise MissingWitnessError(f"commutativity {t0} is not a unary commutativity", rule="sym")
            t = b.sym(t0)
        elif goal.kind == "trans":
            t1, t2 = goal.tris
            t = b.trans(t1, t2)
        elif goal.kind == "congruence":
            uu, uv, t0 = goal.tris
            t = b.congruence(uu, uv, t0)
        else:
            (t0,) = goal.tris
            a, c = goal.edges
            t = b.canonical(t0, a, c)
    except (KernelError, ValueError, IndexError) as exc:
        if isinstance(exc, KernelError):
            raise MissingWitnessError(exc.message, rule=goal.kind) from exc
        raise MissingWitnessError(f"malformed {goal.kind} goal: {exc}", rule=goal.kind) from exc
    logger.debug(f"derived {goal.kind} in {len(b.steps)} steps")
    return b.extension(), t


def prove_edge_equality(base: Sketch, u: int, u2: int,
                        depth: Optional[int] = None) -> Optional[tuple[EqExtension, int]]:
    """Bounded search for U(u, u2); None reports that nothing was proved."""
    depth = depth if depth is not None else get_settings().search_depth
    return search_equality(base, u, u2, depth)
