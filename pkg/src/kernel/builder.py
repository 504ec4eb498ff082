"""Incremental construction of equivalence extensions.

`DerivationBuilder` appends checked steps over a fixed base and offers the derived
equality logic: reflexivity, symmetry, transitivity, uniqueness of composites,
rewriting a commutativity along a unary one and congruence. `PathEq` records an
equality between composites of edge paths; paths compose left-nested, so the
composite of `p + [x]` is always the chosen composite of `comp(p)` and `x`.

A unary commutativity U(a, b) is canonically the triangle (id(dom a), a, b).
"""
import logging
from typing import Iterable, Optional, Sequence

from pydantic import BaseModel, ConfigDict

from src.kernel.errors import KernelError, MissingWitnessError, ShapeError
from src.kernel.extension import EqExtension
from src.kernel.sketch import Sketch, SketchDraft
from src.kernel.steps import (
    AddPullback, Composition, Delta, InitialFillin, InitialFillinUnique, LeftAssoc, LeftUnit, ListFillin,
    PullbackFillin,
    PullbackFillinUnique, PushoutFillin, PushoutFillinUnique, RightAssoc, RightUnit, Step,
    TerminalFillin, TerminalFillinUnique,
)

logger = logging.getLogger("aukernel")

Path = tuple[int, ...]


class PathEq(BaseModel):
    """comp(lhs) ⊴ comp(rhs), proved by the canonical unary commutativity `tri`."""

    model_config = ConfigDict(frozen=True)

    lhs: Path
    rhs: Path
    tri: int


class DerivationBuilder:
    def __init__(self, base: Sketch, steps: Iterable[Step] = ()):
        self.base = base
        self.draft = SketchDraft(base)
        self.steps: list[Step] = []
        self._legs: dict[tuple[int, int], int] = {}
        for t in range(len(self.draft.tri_l)):
            self._legs.setdefault((self.draft.tri_l[t], self.draft.tri_r[t]), t)
        for step in steps:
            self.add(step)

    @classmethod
    def continuing(cls, e: EqExtension) -> "DerivationBuilder":
        return cls(e.base, e.steps)

    # -- bookkeeping -------------------------------------------------------

    def add(self, step: Step) -> Delta:
        try:
            step.check(self.draft)
        except KernelError as exc:
            exc.message = f"derived step {len(self.steps)} ({step.kind}): {exc.message}"
            raise
        delta = step.apply(self.draft)
        for t in delta.tri:
            self._legs.setdefault((self.draft.tri_l[t], self.draft.tri_r[t]), t)
        self.steps.append(step)
        return delta

    def extension(self) -> EqExtension:
        return EqExtension(base=self.base, steps=tuple(self.steps))

    def sketch(self) -> Sketch:
        return self.draft.freeze()

    @property
    def sk(self) -> SketchDraft:
        return self.draft

    def ident(self, x: int) -> int:
        return self.draft.ident(x)

    def dom(self, u: int) -> int:
        return self.draft.dom(u)

    def cod(self, u: int) -> int:
        return self.draft.cod(u)

    def tri(self, t: int) -> tuple[int, int, int]:
        return self.draft.tri(t)

    def _last_tri(self) -> int:
        return len(self.draft.tri_l) - 1

    def _last_edge(self) -> int:
        return len(self.draft.e_dom) - 1

    def _find_or(self, shape: tuple[int, int, int], step: Step) -> int:
        found = self.draft.find_tri(*shape)
        if found is not None:
            return found
        self.add(step)
        t = self._last_tri()
        if self.tri(t) != shape:
            raise ShapeError(f"{step.rule} produced {self.tri(t)}, expected {shape}")
        return t

    # -- basic rules -------------------------------------------------------

    def composite(self, u: int, v: int) -> int:
        """The chosen commutativity (u, v, w) naming a composite of u and v."""
        found = self._legs.get((u, v))
        if found is not None:
            return found
        self.add(Composition(u=u, v=v))
        return self._last_tri()

    def comp_edge(self, u: int, v: int) -> int:
        return self.draft.tri_c[self.composite(u, v)]

    def left_unit(self, u: int) -> int:
        return self._find_or((self.ident(self.dom(u)), u, u), LeftUnit(u=u))

    def right_unit(self, u: int) -> int:
        return self._find_or((u, self.ident(self.cod(u)), u), RightUnit(u=u))

    def refl(self, u: int) -> int:
        return self.left_unit(u)

    def unary_ends(self, t: int) -> tuple[int, int]:
        _, a, b = self.tri(t)
        return a, b

    def sym(self, t: int) -> int:
        """From U(a, b) derive U(b, a)."""
        ida, a, b = self.tri(t)
        if a == b:
            return t
        shape = (ida, b, a)
        return self._find_or(shape, RightAssoc(t1=self.left_unit(ida), t2=t, t3=self.left_unit(a)))

    def trans(self, t1: int, t2: int) -> int:
        """From U(a, b) and U(b, c) derive U(a, c)."""
        ida, a, b = self.tri(t1)
        _, b2, c = self.tri(t2)
        if b != b2:
            raise ShapeError(f"trans: commutativities {t1} and {t2} do not chain")
        if a == b:
            return t2
        if b == c:
            return t1
        if a == c:
            return self.left_unit(a)
        return self._find_or((ida, a, c), LeftAssoc(t1=self.left_unit(ida), t2=t1, t3=t2))

    def comp_unique(self, t1: int, t2: int) -> int:
        """Two composites (u, v, w), (u, v, w′) give U(w, w′)."""
        u, v, w = self.tri(t1)
        u2, v2, w2 = self.tri(t2)
        if (u, v) != (u2, v2):
            raise ShapeError(f"comp_unique: commutativities {t1}, {t2} compose different edges")
        if w == w2:
            return self.left_unit(w)
        shape = (self.ident(self.dom(w)), w, w2)
        return self._find_or(shape, RightAssoc(t1=self.left_unit(u), t2=t1, t3=t2))

    def canonical(self, t: int, a: int, b: int) -> int:
        """U(a, b) from any of the four unary forms relating a and b."""
        shape = self.tri(t)
        ida, idb = self.ident(self.dom(a)), self.ident(self.dom(b))
        ca, cb = self.ident(self.cod(a)), self.ident(self.cod(b))
        if shape == (ida, a, b):
            return t
        if shape == (idb, b, a):
            return self.sym(t)
        if shape == (a, ca, b):
            return self._find_or((ida, a, b), RightAssoc(t1=self.left_unit(a), t2=self.right_unit(a), t3=t))
        if shape == (b, cb, a):
            return self.sym(self.canonical(t, b, a))
        raise MissingWitnessError(f"commutativity {t} does not relate edges {a} and {b}", rule="unit transfer")

    def right_form(self, t: int) -> int:
        """From U(a, b) derive (a, id, b)."""
        _, a, b = self.tri(t)
        shape = (a, self.ident(self.cod(a)), b)
        return self._find_or(shape, LeftAssoc(t1=self.left_unit(a), t2=self.right_unit(a), t3=t))

    def rewrite_target(self, t: int, u: int) -> int:
        """(x, y, w) and U(w, w′) give (x, y, w′)."""
        x, y, w = self.tri(t)
        _, w1, w2 = self.tri(u)
        if w1 != w:
            raise ShapeError("rewrite_target: unary commutativity does not start at the target")
        if w2 == w:
            return t
        return self._find_or((x, y, w2), LeftAssoc(t1=self.left_unit(x), t2=t, t3=u))

    def rewrite_left(self, t: int, u: int) -> int:
        """(x, y, w) and U(x, x′) give (x′, y, w)."""
        x, y, w = self.tri(t)
        _, x1, x2 = self.tri(u)
        if x1 != x:
            raise ShapeError("rewrite_left: unary commutativity does not start at the left leg")
        if x2 == x:
            return t
        return self._find_or((x2, y, w), LeftAssoc(t1=u, t2=t, t3=self.left_unit(w)))

    def rewrite_right(self, t: int, u: int) -> int:
        """(x, y, w) and U(y, y′) give (x, y′, w)."""
        x, y, w = self.tri(t)
        _, y1, y2 = self.tri(u)
        if y1 != y:
            raise ShapeError("rewrite_right: unary commutativity does not start at the right leg")
        if y2 == y:
            return t
        return self._find_or((x, y2, w), RightAssoc(t1=t, t2=self.right_form(u), t3=self.right_unit(w)))

    def congruence(self, uu: int, uv: int, t: int) -> int:
        """U(u, u′), U(v, v′) and (u, v, w) give (u′, v′, w)."""
        return self.rewrite_right(self.rewrite_left(t, uu), uv)

    # -- universals ----------------------------------------------------------

    def terminal_edge(self, univ: int, x: int) -> int:
        """An edge x -> T for the terminal universal `univ`, reusing one if present."""
        t_node = self.draft.ut_n[univ]
        if x == t_node:
            return self.ident(x)
        for u in range(len(self.draft.e_dom)):
            if self.draft.e_dom[u] == x and self.draft.e_cod[u] == t_node:
                return u
        self.add(TerminalFillin(univ=univ, node=x))
        return self._last_edge()

    def initial_edge(self, univ: int, x: int) -> int:
        z = self.draft.ui_n[univ]
        if x == z:
            return self.ident(x)
        for u in range(len(self.draft.e_dom)):
            if self.draft.e_dom[u] == z and self.draft.e_cod[u] == x:
                return u
        self.add(InitialFillin(univ=univ, node=x))
        return self._last_edge()

    def terminal_unique(self, univ: int, w: int, w2: int) -> int:
        if w == w2:
            return self.left_unit(w)
        shape = (self.ident(self.dom(w)), w, w2)
        return self._find_or(shape, TerminalFillinUnique(univ=univ, w=w, w2=w2))

    def initial_unique(self, univ: int, w: int, w2: int) -> int:
        if w == w2:
            return self.left_unit(w)
        shape = (self.ident(self.dom(w)), w, w2)
        return self._find_or(shape, InitialFillinUnique(univ=univ, w=w, w2=w2))

    def pullback_unique(self, univ: int, v1: int, v2: int, w: int, w2: int) -> int:
        """U(w, w2) for two fillins of the cone (v1, v2)."""
        if w == w2:
            return self.left_unit(w)
        shape = (self.ident(self.dom(w)), w, w2)
        return self._find_or(shape, PullbackFillinUnique(univ=univ, v1=v1, v2=v2, w=w, w2=w2))

    def pushout_unique(self, univ: int, v1: int, v2: int, w: int, w2: int) -> int:
        if w == w2:
            return self.left_unit(w)
        shape = (self.ident(self.dom(w)), w, w2)
        return self._find_or(shape, PushoutFillinUnique(univ=univ, v1=v1, v2=v2, w=w, w2=w2))

    def pullback_fill(self, univ: int, d1: int, d2: int) -> tuple[int, int, int]:
        """Fillin for the cone (d1, d2); returns (w, (w,p1,v1), (w,p2,v2))."""
        delta = self.add(PullbackFillin(univ=univ, d1=d1, d2=d2))
        return delta.e[0], delta.tri[0], delta.tri[1]

    def pushout_fill(self, univ: int, d1: int, d2: int) -> tuple[int, int, int]:
        delta = self.add(PushoutFillin(univ=univ, d1=d1, d2=d2))
        return delta.e[0], delta.tri[0], delta.tri[1]

    def pair_into_product(self, univ: int, a: int, b: int) -> tuple[int, int, int]:
        """Pairing ⟨a, b⟩ into a product presented as a pullback over a terminal node."""
        parts = self.draft.pullback_parts(univ)
        terminal = self.draft.terminal_of(parts["base"])
        if terminal is None:
            raise ShapeError("pair_into_product: pullback is not over a terminal node")
        d1 = self.composite(a, parts["u1"])
        d2 = self.composite(b, parts["u2"])
        v1, v2 = self.draft.tri_c[d1], self.draft.tri_c[d2]
        d2 = self.rewrite_target(d2, self.terminal_unique(terminal, v2, v1))
        return self.pullback_fill(univ, d1, d2)

    def product(self, x: int, y: int, terminal: int) -> int:
        """A pullback universal presenting x × y over the terminal universal, reusing one if present."""
        u1, u2 = self.terminal_edge(terminal, x), self.terminal_edge(terminal, y)
        for w in range(len(self.draft.upb_tri1)):
            parts = self.draft.pullback_parts(w)
            if parts["u1"] == u1 and parts["u2"] == u2:
                return w
        return self.add(AddPullback(u1=u1, u2=u2)).upb[0]

    def list_recursor(self, lst: int, y: int, g: int, ay: int) -> int:
        """r: L×B -> Y with r([], b) = y(b) and r(a:x, b) = g(a, r(x, b)).

        `ay` is a product universal for A × Y whose apex is the domain of g. Builds the
        products L×B, (A×L)×B and A×(L×B), the pairings and the association edge,
        then adjoins the list fillin.
        """
        parts = self.draft.list_parts(lst)
        ut, b_node = parts["ut"], self.dom(y)
        bang_b = self.terminal_edge(ut, b_node)
        be_def = self.composite(bang_b, parts["eps"])
        be = self.draft.tri_c[be_def]
        lb = self.product(parts["list"], b_node, ut)
        alb = self.product(parts["product"], b_node, ut)
        pair, pair_p1, pair_p2 = self.pair_into_product(lb, be, self.ident(b_node))
        alb_parts = self.draft.pullback_parts(alb)
        k_def = self.composite(alb_parts["p1"], parts["cons"])
        k = self.draft.tri_c[k_def]
        cons_b, cons_b_p1, cons_b_p2 = self.pair_into_product(lb, k, alb_parts["p2"])
        a1_def = self.composite(alb_parts["p1"], parts["p1"])
        l1_def = self.composite(alb_parts["p1"], parts["p2"])
        mid, mid_p1, mid_p2 = self.pair_into_product(lb, self.draft.tri_c[l1_def], alb_parts["p2"])
        a_lb = self.product(parts["a"], self.draft.pullback_parts(lb)["apex"], ut)
        assoc, assoc_p1, assoc_p2 = self.pair_into_product(a_lb, self.draft.tri_c[a1_def], mid)
        delta = self.add(ListFillin(
            lst=lst, lb=lb, alb=alb, a_lb=a_lb, ay=ay, y=y, g=g, be_def=be_def,
            pair=pair, pair_p1=pair_p1, pair_p2=pair_p2, k_def=k_def,
            cons_b=cons_b, cons_b_p1=cons_b_p1, cons_b_p2=cons_b_p2,
            a1_def=a1_def, l1_def=l1_def, mid=mid, mid_p1=mid_p1, mid_p2=mid_p2,
            assoc=assoc, assoc_p1=assoc_p1, assoc_p2=assoc_p2,
        ))
        logger.debug(f"list recursor adjoined as edge {delta.e[0]}")
        return delta.e[0]

    # -- path equalities -------------------------------------------------------

    def comp(self, path: Sequence[int]) -> int:
        if not path:
            raise ShapeError("empty path")
        edge = path[0]
        for nxt in path[1:]:
            edge = self.comp_edge(edge, nxt)
        return edge

    def comp_tri(self, path: Sequence[int]) -> int:
        """The defining commutativity (comp(path[:-1]), path[-1], comp(path))."""
        return self.composite(self.comp(path[:-1]), path[-1])

    def split(self, a: Sequence[int], b: Sequence[int]) -> int:
        """Commutativity (comp a, comp b, comp(a + b)) for nonempty a and b."""
        a, b = tuple(a), tuple(b)
        if len(b) == 1:
            return self.comp_tri(a + b)
        shape = (self.comp(a), self.comp(b), self.comp(a + b))
        found = self.draft.find_tri(*shape)
        if found is not None:
            return found
        t1 = self.split(a, b[:-1])
        d1 = self.comp_tri(b)
        d2 = self.comp_tri(a + b)
        return self._find_or(shape, RightAssoc(t1=t1, t2=d1, t3=d2))

    def eq_refl(self, path: Sequence[int]) -> PathEq:
        path = tuple(path)
        return PathEq(lhs=path, rhs=path, tri=self.refl(self.comp(path)))

    def eq_tri(self, t: int) -> PathEq:
        """(l, r, c) read as [l, r] = [c]."""
        l, r, c = self.tri(t)
        return PathEq(lhs=(l, r), rhs=(c,), tri=self.comp_unique(self.composite(l, r), t))

    def eq_unary(self, t: int, a: int, b: int) -> PathEq:
        return PathEq(lhs=(a,), rhs=(b,), tri=self.canonical(t, a, b))

    def eq_sym(self, eq: PathEq) -> PathEq:
        return PathEq(lhs=eq.rhs, rhs=eq.lhs, tri=self.sym(eq.tri))

    def eq_trans(self, first: PathEq, second: PathEq) -> PathEq:
        if self.comp(first.rhs) != self.comp(second.lhs):
            raise ShapeError(f"eq_trans: paths {first.rhs} and {second.lhs} have different composites")
        return PathEq(lhs=first.lhs, rhs=second.rhs, tri=self.trans(first.tri, second.tri))

    def eq_context(self, eq: PathEq, prefix: Sequence[int] = (), suffix: Sequence[int] = ()) -> PathEq:
        prefix, suffix = tuple(prefix), tuple(suffix)
        lhs, rhs, u = eq.lhs, eq.rhs, eq.tri
        if prefix:
            s1 = self.rewrite_right(self.split(prefix, lhs), u)
            s2 = self.split(prefix, rhs)
            u = self.comp_unique(s1, s2)
            lhs, rhs = prefix + lhs, prefix + rhs
        if suffix:
            s1 = self.rewrite_left(self.split(lhs, suffix), u)
            s2 = self.split(rhs, suffix)
            u = self.comp_unique(s1, s2)
            lhs, rhs = lhs + suffix, rhs + suffix
        return PathEq(lhs=lhs, rhs=rhs, tri=u)

    def eq_as_tri(self, eq: PathEq, left: Sequence[int], right: Sequence[int]) -> int:
        """From eq with lhs = left + right derive (comp left, comp right, comp eq.rhs)."""
        left, right = tuple(left), tuple(right)
        if left + right != eq.lhs:
            raise ShapeError("eq_as_tri: split does not match the left side")
        return self.rewrite_target(self.split(left, right), eq.tri)

    def eq_unary_tri(self, eq: PathEq) -> int:
        """U(comp lhs, comp rhs)."""
        return eq.tri

    def chain(self, path: Sequence[int]) -> "Chain":
        return Chain(self, tuple(path))

    # -- bounded search ------------------------------------------------------

    def search(self, u: int, u2: int, depth: int) -> Optional[int]:
        """U(u, u2) by breadth-first search along unary commutativities, or None."""
        sk = self.draft
        if sk.dom(u) != sk.dom(u2) or sk.cod(u) != sk.cod(u2):
            return None
        if u == u2:
            return self.refl(u)
        parents: dict[int, int] = {u: u}
        frontier = [u]
        for _ in range(depth):
            nxt = []
            for x in frontier:
                for y in unary_links(sk, x):
                    if y not in parents:
                        parents[y] = x
                        nxt.append(y)
            frontier = nxt
            if u2 in parents:
                break
        if u2 not in parents:
            return None
        hops = [u2]
        while hops[-1] != u:
            hops.append(parents[hops[-1]])
        hops.reverse()
        proof = self.refl(u)
        for x, y in zip(hops, hops[1:]):
            link = next(t for t in range(len(sk.tri_l)) if _relates(sk, t, x, y))
            proof = self.trans(proof, self.canonical(link, x, y))
        return proof

    def simplify(self, path: Sequence[int]) -> PathEq:
        """Drop identity edges from a path using the unit laws."""
        ch = self.chain(path)
        self._drop_identities(ch)
        return ch.result()

    def path_search(self, lhs: Sequence[int], rhs: Sequence[int], depth: int,
                    limit: int = 5000, max_length: int = 6) -> Optional[PathEq]:
        """Bidirectional search for [lhs] = [rhs] by contracting and expanding commutativities.

        Exploration does not touch the draft; steps are only added when the found
        sequence of rewrites is replayed.
        """
        start, goal = self._normal(tuple(lhs)), self._normal(tuple(rhs))
        index = self._rewrite_index()
        seen = ({start: None}, {goal: None})
        frontiers = ([start], [goal])
        meet = start if start == goal else None
        for _ in range(depth):
            if meet is not None:
                break
            for side in (0, 1):
                nxt = []
                for path in frontiers[side]:
                    for move, new in self._moves(path, index, max_length):
                        if new in seen[side]:
                            continue
                        seen[side][new] = (path, move)
                        nxt.append(new)
                        if new in seen[1 - side]:
                            meet = new
                            break
                    if meet is not None or sum(map(len, seen)) > limit:
                        break
                frontiers[side][:] = nxt
                if meet is not None:
                    break
            if sum(map(len, seen)) > limit:
                logger.debug(f"path search gave up after {sum(map(len, seen))} paths")
                break
        if meet is None:
            return None
        there = self._replay(tuple(lhs), self._trail(seen[0], meet))
        back = self._replay(tuple(rhs), self._trail(seen[1], meet))
        return self.eq_trans(there, self.eq_sym(back))

    def _normal(self, path: Path) -> Path:
        kept = list(path)
        while len(kept) > 1:
            ids = [k for k, x in enumerate(kept) if self.draft.is_identity(x)]
            if not ids:
                break
            del kept[ids[0]]
        return tuple(kept)

    def _rewrite_index(self) -> dict:
        sk = self.draft
        legs: dict[tuple[int, int], list[int]] = {}
        by_c: dict[int, list[int]] = {}
        unary: dict[int, list[tuple[int, int]]] = {}
        for t in range(len(sk.tri_l)):
            l, r, c = sk.tri(t)
            if sk.is_identity(l) or sk.is_identity(r):
                a = r if sk.is_identity(l) else l
                if a != c:
                    unary.setdefault(a, []).append((t, c))
                    unary.setdefault(c, []).append((t, a))
                continue
            legs.setdefault((l, r), []).append(t)
            if l != c and r != c:
                by_c.setdefault(c, []).append(t)
        return {"legs": legs, "by_c": by_c, "unary": unary}

    def _moves(self, path: Path, index: dict, max_length: int) -> Iterable[tuple[tuple, Path]]:
        sk = self.draft
        for k in range(len(path) - 1):
            for t in index["legs"].get((path[k], path[k + 1]), ()):
                yield ("contract", k, t), self._normal(path[:k] + (sk.tri_c[t],) + path[k + 2:])
        for k, x in enumerate(path):
            for t, y in index["unary"].get(x, ()):
                yield ("unary", k, t, x, y), self._normal(path[:k] + (y,) + path[k + 1:])
            if len(path) < max_length:
                for t in index["by_c"].get(x, ()):
                    yield ("expand", k, t), self._normal(path[:k] + (sk.tri_l[t], sk.tri_r[t]) + path[k + 1:])

    @staticmethod
    def _trail(seen: dict, end: Path) -> list[tuple]:
        moves = []
        while seen[end] is not None:
            end, move = seen[end]
            moves.append(move)
        moves.reverse()
        return moves

    def _replay(self, path: Path, moves: list[tuple]) -> PathEq:
        ch = self.chain(path)
        self._drop_identities(ch)
        for move in moves:
            if move[0] == "contract":
                ch.rewrite(move[1], self.eq_tri(move[2]))
            elif move[0] == "expand":
                ch.rewrite(move[1], self.eq_tri(move[2]), backwards=True)
            else:
                _, k, t, x, y = move
                ch.rewrite(k, self.eq_unary(t, x, y))
            self._drop_identities(ch)
        return ch.result()

    def _drop_identities(self, ch: "Chain") -> None:
        while len(ch.path) > 1:
            ids = [k for k, x in enumerate(ch.path) if self.draft.is_identity(x)]
            if not ids:
                break
            k = ids[0]
            if k > 0:
                ch.rewrite(k - 1, self.eq_tri(self.right_unit(ch.path[k - 1])))
            else:
                ch.rewrite(0, self.eq_tri(self.left_unit(ch.path[1])))

    def prove(self, lhs: Sequence[int], rhs: Sequence[int], depth: int) -> Optional[PathEq]:
        """Try to show comp(lhs) ⊴ comp(rhs): units, universal uniqueness, unary search, path rewriting."""
        left, right = self.simplify(lhs), self.simplify(rhs)
        if left.rhs == right.rhs:
            return self.eq_trans(left, self.eq_sym(right))
        a, c = self.comp(left.rhs), self.comp(right.rhs)
        if self.dom(a) != self.dom(c) or self.cod(a) != self.cod(c):
            return None
        terminal = self.draft.terminal_of(self.cod(a))
        initial = self.draft.initial_of(self.dom(a))
        if terminal is not None:
            t = self.terminal_unique(terminal, a, c)
        elif initial is not None:
            t = self.initial_unique(initial, a, c)
        else:
            t = self.search(a, c, depth)
        if t is not None:
            middle = PathEq(lhs=left.rhs, rhs=right.rhs, tri=t)
        else:
            middle = self.path_search(left.rhs, right.rhs, depth)
            if middle is None:
                return None
        return self.eq_trans(self.eq_trans(left, middle), self.eq_sym(right))


class Chain:
    """Equational reasoning over paths: a running PathEq from the starting path."""

    def __init__(self, b: DerivationBuilder, path: Path):
        self.b = b
        self.eq = b.eq_refl(path)

    @property
    def path(self) -> Path:
        return self.eq.rhs

    def rewrite(self, at: int, eq: PathEq, backwards: bool = False) -> "Chain":
        """Replace the segment equal to eq.lhs (eq.rhs when backwards) starting at `at`."""
        if backwards:
            eq = self.b.eq_sym(eq)
        path = self.path
        seg = path[at:at + len(eq.lhs)]
        if seg != eq.lhs:
            raise ShapeError(f"chain: segment {seg} at {at} is not {eq.lhs}")
        step = self.b.eq_context(eq, path[:at], path[at + len(eq.lhs):])
        self.eq = self.b.eq_trans(self.eq, step)
        return self

    def find(self, segment: Path) -> int:
        path = self.path
        for i in range(len(path) - len(segment) + 1):
            if path[i:i + len(segment)] == segment:
                return i
        raise ShapeError(f"chain: segment {segment} not found in {path}")

    def use(self, eq: PathEq, backwards: bool = False) -> "Chain":
        """Rewrite at the first occurrence of the relevant side of eq."""
        target = eq.rhs if backwards else eq.lhs
        return self.rewrite(self.find(target), eq, backwards)

    def result(self) -> PathEq:
        return self.eq


def naturality_eq(b: DerivationBuilder, left: int, right: int) -> PathEq:
    """From (f0u, a_Y, a_u) and (a_X, f1u, a_u) derive [a_X, f1u] = [f0u, a_Y]."""
    return b.eq_trans(b.eq_tri(right), b.eq_sym(b.eq_tri(left)))


def unary_links(sk: SketchDraft, u: int) -> Iterable[int]:
    """Edges related to u by a commutativity in one of the unary forms."""
    for t in range(len(sk.tri_l)):
        l, r, c = sk.tri(t)
        if sk.is_identity(l) and r == u:
            yield c
        elif sk.is_identity(l) and c == u:
            yield r
        elif sk.is_identity(r) and l == u:
            yield c
        elif sk.is_identity(r) and c == u:
            yield l


def search_equality(base: Sketch, u: int, u2: int, depth: int,
                    steps: Sequence[Step] = ()) -> Optional[tuple[EqExtension, int]]:
    """Breadth-first search along existing unary commutativities; None means not proved."""
    b = DerivationBuilder(base, steps)
    proof = b.search(u, u2, depth)
    if proof is None:
        return None
    return b.extension(), proof


def _relates(sk: SketchDraft, t: int, x: int, y: int) -> bool:
    l, r, c = sk.tri(t)
    return (sk.is_identity(l) and {r, c} == {x, y}) or (sk.is_identity(r) and {l, c} == {x, y})
