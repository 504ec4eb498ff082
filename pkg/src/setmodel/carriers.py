"""Computable sets and maps.

Encodings are fixed: the one-point set is {"*"}, pullback elements are pairs
(x1, x2), pushout elements are class representatives tagged (1, x) or (2, y),
chosen minimal in the order all (1, x) then all (2, y), and lists are tuples.
Finite carriers hold their elements; list carriers and pullbacks over them are
lazy and enumerate by nondecreasing length up to a bound.
"""
import itertools
import logging
from typing import Any, Callable, Iterable, Iterator, Literal, Optional

from pydantic import BaseModel, ConfigDict

from src.config import get_settings
from src.kernel.errors import ModelError, UnsupportedConstructionError

logger = logging.getLogger("aukernel")

POINT = "*"


class SetObj(BaseModel):
    """A carrier: finite, list over a base, pullback of a cospan, or pushout of a finite span."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: Literal["finite", "list", "pullback", "pushout"] = "finite"
    elements: tuple[Any, ...] = ()
    base: Optional["SetObj"] = None
    left: Optional["SetMor"] = None
    right: Optional["SetMor"] = None

    @property
    def is_finite(self) -> bool:
        if self.kind == "list":
            return False
        if self.kind == "pullback":
            return self.left.dom.is_finite and self.right.dom.is_finite
        return True

    def contains(self, x: Any) -> bool:
        if self.kind in ("finite", "pushout"):
            return x in self.elements
        if self.kind == "list":
            return isinstance(x, tuple) and all(self.base.contains(a) for a in x)
        if not (isinstance(x, tuple) and len(x) == 2):
            return False
        return (self.left.dom.contains(x[0]) and self.right.dom.contains(x[1])
                and self.left(x[0]) == self.right(x[1]))

    def enumerate(self, bound: Optional[int] = None) -> Iterator[Any]:
        """Elements in a fixed order; lazy carriers stop at lists of length `bound`."""
        if self.kind in ("finite", "pushout") or (self.kind == "pullback" and self.is_finite):
            yield from self.elements
            return
        bound = bound if bound is not None else get_settings().list_bound
        limit = get_settings().carrier_limit
        produced = 0
        for x in self._lazy(bound):
            if produced >= limit:
                logger.debug(f"enumeration of a {self.kind} carrier stopped at {limit} elements")
                return
            produced += 1
            yield x

    def _lazy(self, bound: int) -> Iterator[Any]:
        if self.kind == "list":
            base = list(self.base.enumerate(bound))
            for n in range(bound + 1):
                yield from itertools.product(base, repeat=n)
            return
        rights = list(self.right.dom.enumerate(bound))
        for a in self.left.dom.enumerate(bound):
            fa = self.left(a)
            for b in rights:
                if fa == self.right(b):
                    yield (a, b)

    def size(self) -> Optional[int]:
        return len(self.elements) if self.is_finite else None

    def describe(self) -> str:
        if self.kind == "list":
            return f"List({self.base.describe()})"
        if self.is_finite:
            return "{" + ", ".join(repr(x) for x in self.elements) + "}"
        return f"{self.kind} carrier"


class SetMor(BaseModel):
    """A total map, tabulated on finite domains and given by a rule otherwise."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dom: SetObj
    cod: SetObj
    table: Optional[dict[Any, Any]] = None
    rule: Optional[Callable[[Any], Any]] = None

    def __call__(self, x: Any) -> Any:
        if self.table is not None:
            try:
                return self.table[x]
            except KeyError:
                raise ModelError(f"{x!r} is not in the domain of the map") from None
        return self.rule(x)


SetObj.model_rebuild()

ONE = SetObj(elements=(POINT,))
EMPTY = SetObj()


def finite_set(elements: Iterable[Any]) -> SetObj:
    items = tuple(elements)
    if len(set(items)) != len(items):
        raise ModelError(f"carrier has repeated elements: {items}")
    return SetObj(elements=items)


def make_map(dom: SetObj, cod: SetObj, fn: Callable[[Any], Any]) -> SetMor:
    """Tabulate fn on finite domains, keep it as a rule on lazy ones."""
    if dom.is_finite:
        return SetMor(dom=dom, cod=cod, table={x: fn(x) for x in dom.enumerate()})
    return SetMor(dom=dom, cod=cod, rule=fn)


def table_map(dom: SetObj, cod: SetObj, table: dict) -> SetMor:
    missing = [x for x in dom.enumerate() if x not in table]
    if missing:
        raise ModelError(f"map is undefined on {missing[0]!r}")
    for x in dom.enumerate():
        if not cod.contains(table[x]):
            raise ModelError(f"map sends {x!r} to {table[x]!r}, outside its codomain")
    return SetMor(dom=dom, cod=cod, table={x: table[x] for x in dom.enumerate()})


def identity(obj: SetObj) -> SetMor:
    return make_map(obj, obj, lambda x: x)


def constant(dom: SetObj, cod: SetObj, value: Any) -> SetMor:
    return make_map(dom, cod, lambda _: value)


def compose(f: SetMor, g: SetMor) -> SetMor:
    """f then g."""
    return make_map(f.dom, g.cod, lambda x: g(f(x)))


def pullback_set(u1: SetMor, u2: SetMor) -> SetObj:
    if u1.dom.is_finite and u2.dom.is_finite:
        pairs = tuple((a, b) for a in u1.dom.enumerate() for b in u2.dom.enumerate() if u1(a) == u2(b))
        return SetObj(kind="pullback", elements=pairs, left=u1, right=u2)
    return SetObj(kind="pullback", left=u1, right=u2)


def projections(obj: SetObj) -> tuple[SetMor, SetMor, SetMor]:
    """p1, p, p2 of a pullback carrier."""
    p1 = make_map(obj, obj.left.dom, lambda x: x[0])
    p = make_map(obj, obj.left.cod, lambda x: obj.left(x[0]))
    p2 = make_map(obj, obj.right.dom, lambda x: x[1])
    return p1, p, p2


def _union_find_reps(u1: SetMor, u2: SetMor) -> dict:
    order = [(1, x) for x in u1.cod.enumerate()] + [(2, y) for y in u2.cod.enumerate()]
    rank = {tag: k for k, tag in enumerate(order)}
    parent = {tag: tag for tag in order}

    def find(t):
        while parent[t] != t:
            parent[t] = parent[parent[t]]
            t = parent[t]
        return t

    for z in u1.dom.enumerate():
        a, b = find((1, u1(z))), find((2, u2(z)))
        if a != b:
            lo, hi = (a, b) if rank[a] < rank[b] else (b, a)
            parent[hi] = lo
    return {tag: find(tag) for tag in order}


def pushout_set(u1: SetMor, u2: SetMor) -> tuple[SetObj, dict]:
    """The pushout carrier of a finite span and the map tag -> representative."""
    if not (u1.dom.is_finite and u1.cod.is_finite and u2.cod.is_finite):
        raise UnsupportedConstructionError("pushouts are computed over finite carriers only", rule="pushout")
    reps = _union_find_reps(u1, u2)
    elements = tuple(dict.fromkeys(reps[t] for t in reps))
    return SetObj(kind="pushout", elements=elements, left=u1, right=u2), reps


def injections(obj: SetObj, reps: dict) -> tuple[SetMor, SetMor, SetMor]:
    """j1, j, j2 of a pushout carrier."""
    j1 = make_map(obj.left.cod, obj, lambda x: reps[(1, x)])
    j = make_map(obj.left.dom, obj, lambda z: reps[(1, obj.left(z))])
    j2 = make_map(obj.right.cod, obj, lambda y: reps[(2, y)])
    return j1, j, j2


def pushout_reps(obj: SetObj) -> dict:
    return _union_find_reps(obj.left, obj.right)


def list_set(base: SetObj) -> SetObj:
    return SetObj(kind="list", base=base)


def invert(f: SetMor) -> Optional[SetMor]:
    """The inverse of a finite bijection, or None."""
    if not (f.dom.is_finite and f.cod.is_finite):
        return None
    back = {f(x): x for x in f.dom.enumerate()}
    if len(back) != len(f.dom.elements) or set(back) != set(f.cod.enumerate()):
        return None
    return SetMor(dom=f.cod, cod=f.dom, table=back)


def same_carrier(a: SetObj, b: SetObj, bound: Optional[int] = None) -> bool:
    if a.is_finite != b.is_finite:
        return False
    if a.is_finite:
        return set(a.enumerate()) == set(b.enumerate()) and len(a.elements) == len(b.elements)
    return list(a.enumerate(bound)) == list(b.enumerate(bound))


def first_difference(f: SetMor, g: SetMor, bound: Optional[int] = None) -> Optional[Any]:
    """An element where f and g disagree, or None."""
    for x in f.dom.enumerate(bound):
        if f(x) != g(x):
            return x
    return None
