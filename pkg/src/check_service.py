"""Checks shared by the command line and the HTTP routes.

Every function here returns report records (see `src.utilities.record`); parse and
name-resolution problems surface as `ParseError`, everything the kernel rejects
afterwards becomes a failed record.
"""
import logging
from pathlib import Path
from typing import Literal, Optional

from src.config import get_settings
from src.frontend.dot import export_dot
from src.frontend.elaborate import ModelEntry, Workspace, elaborate, to_value
from src.frontend.parser import parse_document
from src.frontend.printer import print_value
from src.kernel.conmap import (
    ContextMap, MapEqualityCertificate, TwoCell, cod_map, compose_map, dom_map, map_equality_by_refinement,
    maps_objectively_equal, whisker, whisker_certificates,
)
from src.kernel.errors import KernelError, ParseError, ShapeError
from src.kernel.extension import Extension
from src.kernel.limits import (
    LimitResult, build_equifier, build_inserter, build_product, pullback_extension_map,
)
from src.setmodel.model import verify_model, verify_model_hom
from src.setmodel.strictify import strictify
from src.utilities import FAILED, OK, record

logger = logging.getLogger("aukernel")


def load_workspace(source: str) -> Workspace:
    return elaborate(parse_document(source))


def _failure(kind: str, name: str, exc: KernelError) -> dict:
    return record(kind, name, FAILED, **exc.to_record())


# ---------------------------------------------------------------------------
# check


def _declaration_record(ws: Workspace, kind: str, name: str) -> list[dict]:
    if kind in ("context", "context_expr"):
        return [record("context", name, summary=ws.scope(name).apex.describe())]
    if kind == "eqext":
        scope = ws.scope(name)
        return [record("eqext", name, over=scope.over, steps=len(scope.ext.steps), summary=scope.apex.describe())]
    if kind == "hom":
        source, target, _ = ws.homs[name]
        return [record("hom", name, summary=f"{source} -> {target}")]
    if kind in ("map", "compose"):
        m = ws.map(name)
        return [record("map", name, ext_steps=len(m.ext.steps), summary=m.apex.describe())]
    if kind == "cell":
        return [record("cell", name, summary=ws.cell(name).arrow.apex.describe())]
    if kind == "model":
        entry = ws.model(name)
        records = model_records(entry)
        if entry.perturbed is not None:
            records.extend(strictify_model(ws, name))
        return records
    raise ShapeError(f"unknown declaration kind {kind!r}")


def check_document(source: str, document: str = "<source>") -> list[dict]:
    """Elaborate everything, verify models and queries, then certify every claim."""
    try:
        ws = load_workspace(source)
    except ParseError:
        raise
    except KernelError as exc:
        logger.error(f"✗ {document}: {exc}")
        return [_failure("document", document, exc)]
    records = []
    for kind, name in ws.order:
        try:
            records.extend(_declaration_record(ws, kind, name))
        except KernelError as exc:
            records.append(_failure(kind, name, exc))
    records.extend(check_claims(ws))
    bad = sum(r["status"] == FAILED for r in records)
    logger.info(f"{'✗' if bad else '✓'} {document}: {len(records)} records, {bad} failed")
    return records


# ---------------------------------------------------------------------------
# models


def query_records(entry: ModelEntry) -> list[dict]:
    records = []
    for edge, u, arg in entry.queries:
        name = f"{entry.name}.{edge}"
        f = entry.model.edge(u)
        shown = print_value(to_value(arg, f.dom))
        if not f.dom.contains(arg):
            records.append(record("eval", name, FAILED, input=shown, message=f"{shown} is not in the domain of {edge}"))
            continue
        try:
            out = print_value(to_value(f(arg), f.cod))
        except KernelError as exc:
            records.append(_failure("eval", name, exc))
            continue
        records.append(record("eval", name, input=shown, output=out, message=f"{edge} {shown} = {out}"))
    return records


def model_records(entry: ModelEntry, bound: Optional[int] = None) -> list[dict]:
    report = verify_model(entry.model, bound)
    head = record("model", entry.name, OK if report.ok else FAILED, summary=report.summary(), exact=report.exact)
    if not report.ok:
        head["failures"] = [c.model_dump() for c in report.failures()]
    return [head] + query_records(entry)


def evaluate_model(ws: Workspace, name: str, bound: Optional[int] = None) -> list[dict]:
    """Carriers of every named node plus the model's queries and verification."""
    entry = ws.model(name)
    bound = bound if bound is not None else get_settings().list_bound
    records = []
    for node, x in entry.scope.names.nodes.items():
        carrier = entry.model.node(x)
        sample = [print_value(to_value(v, carrier)) for v in carrier.enumerate(bound)]
        records.append(record("carrier", f"{name}.{node}", size=carrier.size(), elements=sample,
                              summary=carrier.describe() if carrier.is_finite else f"{len(sample)} elements to bound {bound}"))
    return records + model_records(entry, bound)


def strictify_model(ws: Workspace, name: str, bound: Optional[int] = None) -> list[dict]:
    """Strictify the renamed model when there is one, else the declared one."""
    entry = ws.model(name)
    m = entry.perturbed if entry.perturbed is not None else entry.base
    strict, iso = strictify(ws.context(entry.of), m, bound)
    report = verify_model(strict, bound)
    natural = verify_model_hom(iso, bound)
    status = OK if report.ok and natural else FAILED
    return [record("strictify", name, status, summary=report.summary(), iso_natural=natural)]


# ---------------------------------------------------------------------------
# maps and claims


def certify(left: ContextMap, right: ContextMap, certificate: Optional[MapEqualityCertificate] = None,
            depth: Optional[int] = None) -> tuple[bool, Optional[MapEqualityCertificate], str]:
    """Check a given certificate, or search for one; (verified, certificate, reason)."""
    if certificate is None:
        try:
            certificate = map_equality_by_refinement(left, right, depth if depth is not None else get_settings().search_depth)
        except KernelError as exc:
            return False, None, str(exc)
    ok = maps_objectively_equal(left, right, certificate)
    return ok, certificate, "" if ok else "certificate does not verify"


def check_claims(ws: Workspace) -> list[dict]:
    records = []
    for left, right in ws.claims:
        ok, _, reason = certify(ws.map(left), ws.map(right))
        name = f"{left} == {right}"
        records.append(record("claim", name, OK if ok else FAILED,
                              message="objectively equal" if ok else reason))
    return records


def verify_map_json(left: str, right: str, certificate: Optional[str] = None,
                    name: str = "left == right") -> tuple[list[dict], Optional[MapEqualityCertificate]]:
    """Maps (and optionally a certificate) in their JSON form, as written by `compose`."""
    m0 = ContextMap.model_validate_json(left)
    m1 = ContextMap.model_validate_json(right)
    cert = None if certificate is None else MapEqualityCertificate.model_validate_json(certificate)
    ok, cert, reason = certify(m0, m1, cert)
    return [record("eqcheck", name, OK if ok else FAILED, message="verified" if ok else reason)], cert


def verify_map_files(left: Path, right: Path,
                     certificate: Optional[Path] = None) -> tuple[list[dict], Optional[MapEqualityCertificate]]:
    def read(p: Path) -> str:
        return Path(p).read_text(encoding="utf-8")

    return verify_map_json(read(left), read(right), None if certificate is None else read(certificate),
                           name=f"{Path(left).name} == {Path(right).name}")


def compose_maps(ws: Workspace, first: str, second: str) -> tuple[ContextMap, dict]:
    m = compose_map(ws.map(first), ws.map(second))
    return m, record("compose", f"{first};{second}", ext_steps=len(m.ext.steps), summary=m.apex.describe())


def whisker_cell(ws: Workspace, cell: str, map_name: str,
                 side: Literal["left", "right"]) -> tuple[TwoCell, list[dict]]:
    """Whisker and certify that the result's boundary is the composite of the boundary."""
    a, m = ws.cell(cell), ws.map(map_name)
    depth = get_settings().search_depth
    result = whisker(a, m, side, depth)
    records = [record("whisker", f"{cell}*{map_name}", side=side, summary=result.arrow.apex.describe())]
    expected = _whiskered_boundary(a, m, side)
    actual = (dom_map(result), cod_map(result))
    certs = whisker_certificates(a, m, side, result, depth)
    for which, got, want, cert in zip(("dom", "cod"), actual, expected, certs):
        ok = maps_objectively_equal(got, want, cert)
        records.append(record("boundary", f"{cell}*{map_name}.{which}", OK if ok else FAILED))
    return result, records


def _whiskered_boundary(a: TwoCell, m: ContextMap, side: str) -> tuple[ContextMap, ContextMap]:
    if side == "left":
        return compose_map(m, dom_map(a)), compose_map(m, cod_map(a))
    return compose_map(dom_map(a), m), compose_map(cod_map(a), m)


# ---------------------------------------------------------------------------
# limits


def _extension_between(ws: Workspace, base: str, top: str) -> Extension:
    """The simple extension taking context `base` to context `top`, which must continue it."""
    lower, upper = ws.context(base), ws.context(top)
    if upper.steps[:len(lower.steps)] != lower.steps:
        raise ShapeError(f"context {top} does not extend context {base}", rule="pullback")
    return Extension(base=lower.apex, steps=upper.steps[len(lower.steps):])


def build_limit(ws: Workspace, kind: str, args: list[str]) -> tuple[LimitResult, dict]:
    arity = {"product": 2, "inserter": 3, "equifier": 2, "pullback": 3}
    if kind not in arity:
        raise ParseError(f"unknown limit {kind!r}; expected one of {', '.join(arity)}", rule="limit")
    if len(args) != arity[kind]:
        raise ParseError(f"limit {kind} takes {arity[kind]} names, got {len(args)}", rule="limit")
    if kind == "product":
        result = build_product(ws.context(args[0]), ws.context(args[1]))
    elif kind == "inserter":
        ctx, f0, f1 = args
        if f0 not in ws.homs or f1 not in ws.homs:
            raise ParseError(f"unknown hom {f0 if f0 not in ws.homs else f1!r}", rule="names")
        target = ws.homs[f0][1]
        result = build_inserter(ws.context(ctx), ws.homs[f0][2], ws.homs[f1][2], ws.context(target))
    elif kind == "equifier":
        a, b = ws.cell(args[0]), ws.cell(args[1])
        result = build_equifier(a.target, a.hom, b.hom)
    else:
        base, top, map_name = args
        result = pullback_extension_map(ws.context(base), _extension_between(ws, base, top), ws.map(map_name))
    shown = result.context.apex if result.context is not None else result.extension.apex
    return result, record("limit", f"{kind}({', '.join(args)})", legs=len(result.legs), summary=shown.describe())


def dot_for(ws: Workspace, name: str) -> str:
    scope = ws.scope(name)
    return export_dot(scope.apex, scope.names, title=name)
