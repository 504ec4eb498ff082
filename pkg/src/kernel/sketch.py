import logging
from enum import Enum
from functools import cached_property
from typing import Iterable, Iterator, Optional

from pydantic import BaseModel, ConfigDict

from src.config import get_settings
from src.kernel.errors import EnumerationLimitError, ShapeError

logger = logging.getLogger("aukernel")


class Sort(str, Enum):
    NODE = "n"
    EDGE = "e"
    TRI = "tri"
    TERMINAL = "ut"
    PULLBACK = "upb"
    INITIAL = "ui"
    PUSHOUT = "upo"
    LIST = "ul"


SORTS: tuple[Sort, ...] = tuple(Sort)

# operator tables per domain sort, in the order they are validated
OPERATORS: dict[str, tuple[Sort, Sort]] = {
    "e_dom": (Sort.EDGE, Sort.NODE),
    "e_cod": (Sort.EDGE, Sort.NODE),
    "n_id": (Sort.NODE, Sort.EDGE),
    "tri_l": (Sort.TRI, Sort.EDGE),
    "tri_r": (Sort.TRI, Sort.EDGE),
    "tri_c": (Sort.TRI, Sort.EDGE),
    "ut_n": (Sort.TERMINAL, Sort.NODE),
    "upb_tri1": (Sort.PULLBACK, Sort.TRI),
    "upb_tri2": (Sort.PULLBACK, Sort.TRI),
    "ui_n": (Sort.INITIAL, Sort.NODE),
    "upo_tri1": (Sort.PUSHOUT, Sort.TRI),
    "upo_tri2": (Sort.PUSHOUT, Sort.TRI),
    "ul_pb": (Sort.LIST, Sort.PULLBACK),
    "ul_t": (Sort.LIST, Sort.TERMINAL),
    "ul_e": (Sort.LIST, Sort.EDGE),
    "ul_cons": (Sort.LIST, Sort.EDGE),
}

COUNT_FIELD = {
    Sort.NODE: "n_count",
    Sort.EDGE: "e_count",
    Sort.TRI: "tri_count",
    Sort.TERMINAL: "ut_count",
    Sort.PULLBACK: "upb_count",
    Sort.INITIAL: "ui_count",
    Sort.PUSHOUT: "upo_count",
    Sort.LIST: "ul_count",
}


class _SketchAccess:
    """Read accessors shared by frozen sketches and drafts."""

    def count(self, sort: Sort) -> int:
        raise NotImplementedError

    def dom(self, e: int) -> int:
        return self.e_dom[e]

    def cod(self, e: int) -> int:
        return self.e_cod[e]

    def ident(self, x: int) -> int:
        return self.n_id[x]

    def tri(self, t: int) -> tuple[int, int, int]:
        return (self.tri_l[t], self.tri_r[t], self.tri_c[t])

    def is_identity(self, e: int) -> bool:
        return self.e_dom[e] == self.e_cod[e] and self.n_id[self.e_dom[e]] == e

    def pullback_parts(self, w: int) -> dict:
        """Named parts of a pullback universal: data u1, u2, projections p1, p2, diagonal p."""
        t1, t2 = self.upb_tri1[w], self.upb_tri2[w]
        return {
            "tri1": t1, "tri2": t2,
            "p1": self.tri_l[t1], "u1": self.tri_r[t1], "p": self.tri_c[t1],
            "p2": self.tri_l[t2], "u2": self.tri_r[t2],
            "apex": self.e_dom[self.tri_l[t1]], "base": self.e_cod[self.tri_r[t1]],
        }

    def pushout_parts(self, w: int) -> dict:
        """Named parts of a pushout universal: data u1, u2, injections j1, j2, diagonal j."""
        t1, t2 = self.upo_tri1[w], self.upo_tri2[w]
        return {
            "tri1": t1, "tri2": t2,
            "u1": self.tri_l[t1], "j1": self.tri_r[t1], "j": self.tri_c[t1],
            "u2": self.tri_l[t2], "j2": self.tri_r[t2],
            "apex": self.e_cod[self.tri_r[t1]], "base": self.e_dom[self.tri_l[t1]],
        }

    def list_parts(self, w: int) -> dict:
        """Named parts of a list universal over A."""
        pb = self.ul_pb[w]
        parts = self.pullback_parts(pb)
        return {
            "pb": pb, "ut": self.ul_t[w],
            "eps": self.ul_e[w], "cons": self.ul_cons[w],
            "terminal": self.ut_n[self.ul_t[w]],
            "list": self.e_cod[self.ul_e[w]],
            "product": parts["apex"],
            "a": self.e_cod[parts["p1"]],
            "p1": parts["p1"], "p": parts["p"], "p2": parts["p2"],
            "bang_a": parts["u1"], "bang_l": parts["u2"],
        }

    def terminal_of(self, x: int) -> Optional[int]:
        for w, n in enumerate(self.ut_n):
            if n == x:
                return w
        return None

    def initial_of(self, x: int) -> Optional[int]:
        for w, n in enumerate(self.ui_n):
            if n == x:
                return w
        return None


class Sketch(_SketchAccess, BaseModel):
    """A finite AU-sketch: carriers are ordinals, operators are index tables."""

    model_config = ConfigDict(frozen=True)

    n_count: int = 0
    e_count: int = 0
    tri_count: int = 0
    ut_count: int = 0
    upb_count: int = 0
    ui_count: int = 0
    upo_count: int = 0
    ul_count: int = 0
    e_dom: tuple[int, ...] = ()
    e_cod: tuple[int, ...] = ()
    n_id: tuple[int, ...] = ()
    tri_l: tuple[int, ...] = ()
    tri_r: tuple[int, ...] = ()
    tri_c: tuple[int, ...] = ()
    ut_n: tuple[int, ...] = ()
    upb_tri1: tuple[int, ...] = ()
    upb_tri2: tuple[int, ...] = ()
    ui_n: tuple[int, ...] = ()
    upo_tri1: tuple[int, ...] = ()
    upo_tri2: tuple[int, ...] = ()
    ul_pb: tuple[int, ...] = ()
    ul_t: tuple[int, ...] = ()
    ul_e: tuple[int, ...] = ()
    ul_cons: tuple[int, ...] = ()

    def count(self, sort: Sort) -> int:
        return getattr(self, COUNT_FIELD[Sort(sort)])

    def counts(self) -> dict[str, int]:
        return {s.value: self.count(s) for s in SORTS}

    @cached_property
    def shape_index(self) -> dict[tuple[int, int, int], list[int]]:
        index: dict[tuple[int, int, int], list[int]] = {}
        for t in range(min(len(self.tri_l), len(self.tri_r), len(self.tri_c))):
            index.setdefault(self.tri(t), []).append(t)
        return index

    def find_tri(self, l: int, r: int, c: int) -> Optional[int]:
        found = self.shape_index.get((l, r, c))
        return found[0] if found else None

    def describe(self) -> str:
        return (
            f"|N|={self.n_count} |E|={self.e_count} |tri|={self.tri_count} "
            f"|UT|={self.ut_count} |UPb|={self.upb_count} |UI|={self.ui_count} "
            f"|UPo|={self.upo_count} |UL|={self.ul_count}"
        )


EMPTY_SKETCH = Sketch()


class SketchDraft(_SketchAccess):
    """Append-only working copy of a sketch used while replaying steps."""

    def __init__(self, base: Sketch = EMPTY_SKETCH):
        for name in OPERATORS:
            setattr(self, name, list(getattr(base, name)))
        self._shapes: dict[tuple[int, int, int], list[int]] = {}
        for t in range(len(self.tri_l)):
            self._shapes.setdefault(self.tri(t), []).append(t)

    def count(self, sort: Sort) -> int:
        sort = Sort(sort)
        return {
            Sort.NODE: len(self.n_id),
            Sort.EDGE: len(self.e_dom),
            Sort.TRI: len(self.tri_l),
            Sort.TERMINAL: len(self.ut_n),
            Sort.PULLBACK: len(self.upb_tri1),
            Sort.INITIAL: len(self.ui_n),
            Sort.PUSHOUT: len(self.upo_tri1),
            Sort.LIST: len(self.ul_pb),
        }[sort]

    def in_range(self, sort: Sort, index: int) -> bool:
        return isinstance(index, int) and 0 <= index < self.count(sort)

    def add_node(self) -> int:
        self.n_id.append(-1)
        return len(self.n_id) - 1

    def set_identity(self, x: int, e: int) -> None:
        self.n_id[x] = e

    def add_edge(self, dom: int, cod: int) -> int:
        self.e_dom.append(dom)
        self.e_cod.append(cod)
        return len(self.e_dom) - 1

    def add_tri(self, l: int, r: int, c: int) -> int:
        self.tri_l.append(l)
        self.tri_r.append(r)
        self.tri_c.append(c)
        t = len(self.tri_l) - 1
        self._shapes.setdefault((l, r, c), []).append(t)
        return t

    def add_terminal(self, x: int) -> int:
        self.ut_n.append(x)
        return len(self.ut_n) - 1

    def add_initial(self, x: int) -> int:
        self.ui_n.append(x)
        return len(self.ui_n) - 1

    def add_pullback(self, t1: int, t2: int) -> int:
        self.upb_tri1.append(t1)
        self.upb_tri2.append(t2)
        return len(self.upb_tri1) - 1

    def add_pushout(self, t1: int, t2: int) -> int:
        self.upo_tri1.append(t1)
        self.upo_tri2.append(t2)
        return len(self.upo_tri1) - 1

    def add_list(self, pb: int, ut: int, eps: int, cons: int) -> int:
        self.ul_pb.append(pb)
        self.ul_t.append(ut)
        self.ul_e.append(eps)
        self.ul_cons.append(cons)
        return len(self.ul_pb) - 1

    def find_tri(self, l: int, r: int, c: int) -> Optional[int]:
        found = self._shapes.get((l, r, c))
        return found[0] if found else None

    def tris_where(self, l: Optional[int] = None, r: Optional[int] = None,
                   c: Optional[int] = None) -> Iterator[int]:
        for t in range(len(self.tri_l)):
            if l is not None and self.tri_l[t] != l:
                continue
            if r is not None and self.tri_r[t] != r:
                continue
            if c is not None and self.tri_c[t] != c:
                continue
            yield t

    def freeze(self) -> Sketch:
        data = {name: tuple(getattr(self, name)) for name in OPERATORS}
        counts = {COUNT_FIELD[s]: self.count(s) for s in SORTS}
        return Sketch(**counts, **data)


# ---------------------------------------------------------------------------
# validation


class Violation(BaseModel):
    model_config = ConfigDict(frozen=True)

    equation: str
    sort: str
    index: int
    message: str


class ValidationReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    ok: bool
    violations: tuple[Violation, ...] = ()

    def summary(self) -> str:
        if self.ok:
            return "ok"
        return "; ".join(f"{v.equation} at {v.sort}[{v.index}]: {v.message}" for v in self.violations)


def _range_violations(s: Sketch) -> list[Violation]:
    found = []
    for sort in SORTS:
        declared = s.count(sort)
        for name, (src, _) in OPERATORS.items():
            if src == sort and len(getattr(s, name)) != declared:
                found.append(Violation(
                    equation=f"range:{name}", sort=sort.value, index=len(getattr(s, name)),
                    message=f"table {name} has {len(getattr(s, name))} entries, carrier has {declared}",
                ))
    for name, (_, dst) in OPERATORS.items():
        bound = s.count(dst)
        for i, v in enumerate(getattr(s, name)):
            if not 0 <= v < bound:
                found.append(Violation(
                    equation=f"range:{name}", sort=OPERATORS[name][0].value, index=i,
                    message=f"{name}({i})={v} outside 0..{bound - 1}",
                ))
                break
    return found


def _safe(table: tuple[int, ...], i: int) -> Optional[int]:
    if i is None or not 0 <= i < len(table):
        return None
    return table[i]


def _chain(s: Sketch, i: int, *names: str) -> Optional[int]:
    v: Optional[int] = i
    for name in names:
        v = _safe(getattr(s, name), v)
        if v is None:
            return None
    return v


# (equation label, domain sort, left chain, right chain); an empty chain is the identity
EQUATIONS: tuple[tuple[str, Sort, tuple[str, ...], tuple[str, ...]], ...] = (
    ("n_id;e_dom = Id", Sort.NODE, ("n_id", "e_dom"), ()),
    ("n_id;e_cod = Id", Sort.NODE, ("n_id", "e_cod"), ()),
    ("tri_l;e_cod = tri_r;e_dom", Sort.TRI, ("tri_l", "e_cod"), ("tri_r", "e_dom")),
    ("tri_l;e_dom = tri_c;e_dom", Sort.TRI, ("tri_l", "e_dom"), ("tri_c", "e_dom")),
    ("tri_r;e_cod = tri_c;e_cod", Sort.TRI, ("tri_r", "e_cod"), ("tri_c", "e_cod")),
    ("upb_tri1;tri_c = upb_tri2;tri_c", Sort.PULLBACK, ("upb_tri1", "tri_c"), ("upb_tri2", "tri_c")),
    ("upo_tri1;tri_c = upo_tri2;tri_c", Sort.PUSHOUT, ("upo_tri1", "tri_c"), ("upo_tri2", "tri_c")),
    ("ul_pb;upb_tri1;tri_c;e_cod = ul_t;ut_n", Sort.LIST,
     ("ul_pb", "upb_tri1", "tri_c", "e_cod"), ("ul_t", "ut_n")),
    ("ul_e;e_dom = ul_t;ut_n", Sort.LIST, ("ul_e", "e_dom"), ("ul_t", "ut_n")),
    ("ul_cons;e_dom = ul_pb;upb_tri1;tri_l;e_dom", Sort.LIST,
     ("ul_cons", "e_dom"), ("ul_pb", "upb_tri1", "tri_l", "e_dom")),
    ("ul_e;e_cod = ul_pb;upb_tri2;tri_l;e_cod", Sort.LIST,
     ("ul_e", "e_cod"), ("ul_pb", "upb_tri2", "tri_l", "e_cod")),
    ("ul_cons;e_cod = ul_pb;upb_tri2;tri_l;e_cod", Sort.LIST,
     ("ul_cons", "e_cod"), ("ul_pb", "upb_tri2", "tri_l", "e_cod")),
)


def validate_sketch(s: Sketch) -> ValidationReport:
    """Check the defining equations of an AU-sketch; report the first offender per equation."""
    violations = _range_violations(s)
    for label, sort, left, right in EQUATIONS:
        for i in range(s.count(sort)):
            lhs = _chain(s, i, *left)
            rhs = _chain(s, i, *right) if right else i
            if lhs is None or rhs is None:
                continue
            if lhs != rhs:
                violations.append(Violation(
                    equation=label, sort=sort.value, index=i,
                    message=f"left side gives {lhs}, right side gives {rhs}",
                ))
                break
    return ValidationReport(ok=not violations, violations=tuple(violations))


# ---------------------------------------------------------------------------
# homomorphisms


class SketchHom(BaseModel):
    """A sketch homomorphism, one index map per sort."""

    model_config = ConfigDict(frozen=True)

    source: Sketch
    target: Sketch
    n: tuple[int, ...] = ()
    e: tuple[int, ...] = ()
    tri: tuple[int, ...] = ()
    ut: tuple[int, ...] = ()
    upb: tuple[int, ...] = ()
    ui: tuple[int, ...] = ()
    upo: tuple[int, ...] = ()
    ul: tuple[int, ...] = ()

    def table(self, sort: Sort) -> tuple[int, ...]:
        return getattr(self, Sort(sort).value)

    def __call__(self, sort: Sort, index: int) -> int:
        return self.table(sort)[index]

    def node(self, x: int) -> int:
        return self.n[x]

    def edge(self, u: int) -> int:
        return self.e[u]


def hom_problems(h: SketchHom) -> list[str]:
    """Operator-commutation failures of h, empty when h is a homomorphism."""
    s, t = h.source, h.target
    problems = []
    for sort in SORTS:
        if len(h.table(sort)) != s.count(sort):
            problems.append(f"map on {sort.value} has {len(h.table(sort))} entries, source has {s.count(sort)}")
        elif any(not 0 <= v < t.count(sort) for v in h.table(sort)):
            problems.append(f"map on {sort.value} leaves the target carrier")
    if problems:
        return problems
    for name, (src, dst) in OPERATORS.items():
        source_table, target_table = getattr(s, name), getattr(t, name)
        for i, v in enumerate(source_table):
            if h(dst, v) != target_table[h(src, i)]:
                problems.append(f"{name} not preserved at {src.value}[{i}]")
                break
    return problems


def is_hom(h: SketchHom) -> bool:
    return not hom_problems(h)


def identity_hom(s: Sketch) -> SketchHom:
    return SketchHom(source=s, target=s, **{sort.value: tuple(range(s.count(sort))) for sort in SORTS})


def inclusion_hom(small: Sketch, big: Sketch) -> SketchHom:
    """The ordinal inclusion of a sketch into one of its extensions."""
    for sort in SORTS:
        if small.count(sort) > big.count(sort):
            raise ShapeError(f"inclusion impossible: {sort.value} carrier shrinks")
    return SketchHom(source=small, target=big, **{sort.value: tuple(range(small.count(sort))) for sort in SORTS})


def same_sketch(a: Sketch, b: Sketch) -> bool:
    return a is b or a == b


def compose_hom(f: SketchHom, g: SketchHom) -> SketchHom:
    """Diagrammatic composite f;g."""
    if not same_sketch(f.target, g.source):
        raise ShapeError("compose_hom: target of the first hom differs from source of the second")
    return SketchHom(
        source=f.source, target=g.target,
        **{sort.value: tuple(g.table(sort)[i] for i in f.table(sort)) for sort in SORTS},
    )


def hom_equal(f: SketchHom, g: SketchHom) -> bool:
    """Homomorphisms are equal when they agree on nodes and edges."""
    if not (same_sketch(f.source, g.source) and same_sketch(f.target, g.target)):
        raise ShapeError("hom_equal: homomorphisms are not parallel")
    return f.n == g.n and f.e == g.e


def complete_hom(source: Sketch, target: Sketch, node_map: Iterable[int],
                 edge_map: Iterable[int]) -> Optional[SketchHom]:
    """Extend node and edge maps to commutativities and universals, or None.

    Commutativities take the first target commutativity of the image shape;
    universals take the first target universal whose data match, and pin the
    images of their commutativities.
    """
    n = tuple(node_map)
    e = tuple(edge_map)
    tri: list[int] = []
    for t in range(source.tri_count):
        l, r, c = source.tri(t)
        found = target.find_tri(e[l], e[r], e[c])
        if found is None:
            return None
        tri.append(found)
    pinned: dict[int, int] = {}

    def pin(t: int, image: int) -> bool:
        if pinned.get(t, image) != image:
            return False
        pinned[t] = image
        return True

    def image_shape(t: int) -> tuple[int, int, int]:
        l, r, c = source.tri(t)
        return (e[l], e[r], e[c])

    ul: list[int] = []
    upb: dict[int, int] = {}
    ut: dict[int, int] = {}
    for w in range(source.ul_count):
        choice = None
        for w2 in range(target.ul_count):
            if target.ul_e[w2] != e[source.ul_e[w]] or target.ul_cons[w2] != e[source.ul_cons[w]]:
                continue
            if target.ut_n[target.ul_t[w2]] != n[source.ut_n[source.ul_t[w]]]:
                continue
            pb, pb2 = source.ul_pb[w], target.ul_pb[w2]
            if target.tri(target.upb_tri1[pb2]) != image_shape(source.upb_tri1[pb]):
                continue
            if target.tri(target.upb_tri2[pb2]) != image_shape(source.upb_tri2[pb]):
                continue
            if upb.get(pb, pb2) != pb2 or ut.get(source.ul_t[w], target.ul_t[w2]) != target.ul_t[w2]:
                continue
            choice = w2
            break
        if choice is None:
            return None
        ul.append(choice)
        pb, pb2 = source.ul_pb[w], target.ul_pb[choice]
        upb[pb] = pb2
        ut[source.ul_t[w]] = target.ul_t[choice]
        if not (pin(source.upb_tri1[pb], target.upb_tri1[pb2]) and pin(source.upb_tri2[pb], target.upb_tri2[pb2])):
            return None

    for w in range(source.upb_count):
        if w in upb:
            continue
        for w2 in range(target.upb_count):
            t1, t2 = target.upb_tri1[w2], target.upb_tri2[w2]
            if target.tri(t1) != image_shape(source.upb_tri1[w]) or target.tri(t2) != image_shape(source.upb_tri2[w]):
                continue
            if pinned.get(source.upb_tri1[w], t1) != t1 or pinned.get(source.upb_tri2[w], t2) != t2:
                continue
            upb[w] = w2
            pin(source.upb_tri1[w], t1)
            pin(source.upb_tri2[w], t2)
            break
        else:
            return None

    upo: list[int] = []
    for w in range(source.upo_count):
        for w2 in range(target.upo_count):
            t1, t2 = target.upo_tri1[w2], target.upo_tri2[w2]
            if target.tri(t1) != image_shape(source.upo_tri1[w]) or target.tri(t2) != image_shape(source.upo_tri2[w]):
                continue
            if pinned.get(source.upo_tri1[w], t1) != t1 or pinned.get(source.upo_tri2[w], t2) != t2:
                continue
            upo.append(w2)
            pin(source.upo_tri1[w], t1)
            pin(source.upo_tri2[w], t2)
            break
        else:
            return None

    for w in range(source.ut_count):
        if w in ut:
            continue
        for w2 in range(target.ut_count):
            if target.ut_n[w2] == n[source.ut_n[w]]:
                ut[w] = w2
                break
        else:
            return None

    ui: list[int] = []
    for w in range(source.ui_count):
        for w2 in range(target.ui_count):
            if target.ui_n[w2] == n[source.ui_n[w]]:
                ui.append(w2)
                break
        else:
            return None

    for t, image in pinned.items():
        tri[t] = image
    h = SketchHom(
        source=source, target=target, n=n, e=e, tri=tuple(tri),
        ut=tuple(ut[w] for w in range(source.ut_count)),
        upb=tuple(upb[w] for w in range(source.upb_count)),
        ui=tuple(ui), upo=tuple(upo), ul=tuple(ul),
    )
    return h if is_hom(h) else None


def hom_from_maps(source: Sketch, target: Sketch, node_map: Iterable[int],
                  edge_map: Iterable[int]) -> SketchHom:
    h = complete_hom(source, target, node_map, edge_map)
    if h is None:
        raise ShapeError("node and edge maps do not extend to a sketch homomorphism")
    return h


def enumerate_homs(s1: Sketch, s2: Sketch, limit: Optional[int] = None) -> list[SketchHom]:
    """All homomorphisms s1 -> s2 up to hom_equal, by backtracking over nodes then edges."""
    limit = limit if limit is not None else get_settings().enumeration_limit
    by_ends: dict[tuple[int, int], list[int]] = {}
    for u in range(s2.e_count):
        by_ends.setdefault((s2.e_dom[u], s2.e_cod[u]), []).append(u)
    identity_of = {s1.n_id[x]: x for x in range(s1.n_count)}
    # commutativities become checkable once their largest edge is assigned
    ready: dict[int, list[int]] = {}
    for t in range(s1.tri_count):
        ready.setdefault(max(s1.tri(t)), []).append(t)

    results: list[SketchHom] = []
    node_map = [-1] * s1.n_count
    edge_map = [-1] * s1.e_count
    budget = [limit * 64 + 1024]

    def tick() -> None:
        budget[0] -= 1
        if budget[0] < 0:
            raise EnumerationLimitError(f"hom enumeration exceeded its search budget (limit {limit})")

    def assign_edges(k: int) -> None:
        tick()
        if k == s1.e_count:
            h = complete_hom(s1, s2, node_map, edge_map)
            if h is not None:
                results.append(h)
                if len(results) > limit:
                    raise EnumerationLimitError(f"more than {limit} homomorphisms")
            return
        if k in identity_of:
            candidates = [s2.n_id[node_map[identity_of[k]]]]
        else:
            candidates = by_ends.get((node_map[s1.e_dom[k]], node_map[s1.e_cod[k]]), [])
        for u in candidates:
            edge_map[k] = u
            if all(
                s2.find_tri(edge_map[s1.tri_l[t]], edge_map[s1.tri_r[t]], edge_map[s1.tri_c[t]]) is not None
                for t in ready.get(k, ())
            ):
                assign_edges(k + 1)
        edge_map[k] = -1

    def assign_nodes(k: int) -> None:
        tick()
        if k == s1.n_count:
            assign_edges(0)
            return
        for x in range(s2.n_count):
            node_map[k] = x
            assign_nodes(k + 1)
        node_map[k] = -1

    assign_nodes(0)
    logger.debug(f"enumerate_homs: {len(results)} homomorphisms")
    return results
