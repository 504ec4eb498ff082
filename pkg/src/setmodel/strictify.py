"""Strictification of set models whose universals hold only up to isomorphism.

The presentation of the context is replayed: primitive nodes keep their
carriers, primitive edges are conjugated by the isomorphisms built so far, and
every universal subject is replaced by its canonical construction together with
the comparison isomorphism into the given carrier. Components on primitive
nodes are identities.
"""
import logging
from typing import Any, Optional

from src.kernel.errors import ModelError, ShapeError, UnsupportedConstructionError
from src.kernel.extension import Context
from src.kernel.sketch import same_sketch
from src.setmodel.carriers import (
    POINT, SetMor, SetObj, compose, finite_set, identity, invert, make_map, same_carrier,
)
from src.setmodel.model import ModelHom, SetModel, _Replayer, _freeze, verify_model, verify_model_hom

logger = logging.getLogger("aukernel")


def _table_iso(source: SetObj, target: SetObj, pairs: dict, label: str) -> tuple[SetMor, SetMor]:
    """The bijection given by `pairs` and its inverse; ModelError when it is not one."""
    phi = SetMor(dom=source, cod=target, table=pairs)
    psi = invert(phi)
    if psi is None:
        raise ModelError(f"{label} does not have the universal property", detail={"carrier": target.describe()})
    return phi, psi


def strictify(ctx: Context, m: SetModel, bound: Optional[int] = None) -> tuple[SetModel, ModelHom]:
    """The strict model isomorphic to m and the isomorphism strict -> m."""
    replay = ctx.replayed
    apex = replay.apex
    if not same_sketch(apex, m.sketch):
        raise ShapeError("strictify: the model is not a model of this context")
    player = _Replayer(apex, {}, {}, bound)
    nodes, edges = player.nodes, player.edges
    phi: dict[int, SetMor] = {}
    psi: dict[int, SetMor] = {}

    for step, delta in zip(ctx.steps, replay.deltas):
        kind = step.kind
        if kind == "node":
            x = delta.n[0]
            nodes[x] = m.nodes[x]
            phi[x] = psi[x] = identity(m.nodes[x])
        elif kind == "edge":
            u = delta.e[0]
            x, y = apex.dom(u), apex.cod(u)
            edges[u] = compose(compose(phi[x], m.edges[u]), psi[y])
        else:
            player.interpret(step, delta, None)
        for x in delta.n:
            edges[apex.ident(x)] = identity(nodes[x])
        if kind in ("node", "edge", "comm"):
            continue
        if kind == "terminal":
            _terminal(m, delta.n[0], nodes, phi, psi)
        elif kind == "initial":
            x = delta.n[0]
            if m.nodes[x].size() != 0:
                raise ModelError(f"node {x} is claimed initial but is not empty")
            phi[x] = psi[x] = identity(nodes[x])
        elif kind == "pullback":
            parts = apex.pullback_parts(delta.upb[0])
            x = parts["apex"]
            given = m.nodes[x]
            if not given.is_finite:
                raise UnsupportedConstructionError(f"pullback node {x} has a lazy carrier", rule=step.rule)
            p1, p2 = m.edges[parts["p1"]], m.edges[parts["p2"]]
            back = {z: (psi[apex.dom(parts["u1"])](p1(z)), psi[apex.dom(parts["u2"])](p2(z)))
                    for z in given.enumerate()}
            if set(back.values()) != set(nodes[x].enumerate()) or len(set(back.values())) != len(back):
                raise ModelError(f"node {x} does not have the pullback property", rule=step.rule)
            psi[x], phi[x] = _table_iso(given, nodes[x], back, f"pullback node {x}")
        elif kind == "pushout":
            parts = apex.pushout_parts(delta.upo[0])
            x = parts["apex"]
            j1, j2 = m.edges[parts["j1"]], m.edges[parts["j2"]]
            x1, x2 = apex.cod(parts["u1"]), apex.cod(parts["u2"])
            forth = {q: (j1(phi[x1](q[1])) if q[0] == 1 else j2(phi[x2](q[1]))) for q in nodes[x].enumerate()}
            if set(forth.values()) != set(m.nodes[x].enumerate()) or len(set(forth.values())) != len(forth):
                raise ModelError(f"node {x} does not have the pushout property", rule=step.rule)
            phi[x], psi[x] = _table_iso(nodes[x], m.nodes[x], forth, f"pushout node {x}")
        elif kind == "list":
            _list(m, apex.list_parts(delta.ul[0]), nodes, phi, psi, step.rule)
        else:
            raise UnsupportedConstructionError(f"{kind} steps do not occur in contexts")

    strict = _freeze(apex, nodes, edges)
    report = verify_model(strict, bound)
    if not report.ok:
        first = report.failures()[0]
        raise ModelError(f"model fails commutativity {first.index} at {first.counterexample}")
    iso = ModelHom(source=strict, target=m, components=tuple(phi[x] for x in range(apex.n_count)))
    if not verify_model_hom(iso, bound):
        raise ModelError("universal edges of the model do not match their canonical comparisons")
    logger.info(f"✓ strictified a model with {apex.n_count} nodes")
    return strict, iso


def _terminal(m: SetModel, x: int, nodes: dict, phi: dict, psi: dict) -> None:
    given = m.nodes[x]
    if given.size() != 1:
        raise ModelError(f"node {x} is claimed terminal but has {given.size()} elements")
    point = given.elements[0]
    phi[x] = SetMor(dom=nodes[x], cod=given, table={POINT: point})
    psi[x] = SetMor(dom=given, cod=nodes[x], table={point: POINT})


def _list(m: SetModel, parts: dict, nodes: dict, phi: dict, psi: dict, rule: str) -> None:
    lst, a = parts["list"], parts["a"]
    given = m.nodes[lst]
    if given.kind != "list" or not same_carrier(given.base, m.nodes[a]):
        raise UnsupportedConstructionError(f"list node {lst} must already be the list set of its parameter", rule=rule)
    _terminal(m, parts["terminal"], nodes, phi, psi)
    fa, ba = phi[a], psi[a]
    phi[lst] = make_map(nodes[lst], given, lambda xs: tuple(fa(v) for v in xs))
    psi[lst] = make_map(given, nodes[lst], lambda xs: tuple(ba(v) for v in xs))
    p = parts["product"]
    fl, bl = phi[lst], psi[lst]
    phi[p] = make_map(nodes[p], m.nodes[p], lambda z: (fa(z[0]), fl(z[1])))
    psi[p] = make_map(m.nodes[p], nodes[p], lambda z: (ba(z[0]), bl(z[1])))


# ---------------------------------------------------------------------------
# perturbation


def transport_model(m: SetModel, renamings: dict[int, dict[Any, Any]]) -> SetModel:
    """A non-strict copy of m with the carriers of the given nodes renamed by bijections."""
    s = m.sketch
    parameters = {s.list_parts(w)["a"] for w in range(s.ul_count)}
    nodes = list(m.nodes)
    forth: dict[int, SetMor] = {}
    back: dict[int, SetMor] = {}
    for x, renaming in renamings.items():
        old = m.nodes[x]
        if not old.is_finite or x in parameters:
            raise ShapeError(f"node {x} cannot be renamed")
        missing = [e for e in old.enumerate() if e not in renaming]
        if missing:
            raise ModelError(f"renaming of node {x} has no image for {missing[0]!r}")
        nodes[x] = finite_set(renaming[e] for e in old.enumerate())
        forth[x], back[x] = _table_iso(old, nodes[x], {e: renaming[e] for e in old.enumerate()}, f"renaming of {x}")
    edges = []
    for u, f in enumerate(m.edges):
        x, y = s.dom(u), s.cod(u)
        g = f
        if x in back:
            g = compose(back[x], g)
        if y in forth:
            g = compose(g, forth[y])
        edges.append(g)
    return SetModel(sketch=s, nodes=tuple(nodes), edges=tuple(edges), strict=False)
