"""Pretty printer: syntax tree back to `.auk` source that parses to the same tree."""
from src.frontend.syntax import (
    AssignLine, Atom, CellDecl, ClaimDecl, CommLine, ComposeDecl, ContextBlock, ContextExpr, EdgeLine, Entry, EqExtBlock,
    HomBlock, IdRef, InitialLine, ListLine, ListRecLine, ListValue, MapDecl, ModelBlock, NameRef, NodeLine,
    Numeral, PairValue, PullbackLine, PushoutLine, QueryLine, RenameLine, RuleLine, SourceDocument, TerminalLine,
    TriRef,
)

INDENT = "  "


def print_ref(ref) -> str:
    if isinstance(ref, NameRef):
        return ref.name
    if isinstance(ref, IdRef):
        return f"id({ref.node})"
    if isinstance(ref, TriRef):
        return f"({print_ref(ref.l)} . {print_ref(ref.r)} = {print_ref(ref.c)})"
    raise TypeError(f"not a reference: {ref!r}")


def print_value(value) -> str:
    if isinstance(value, Atom):
        return str(value.value)
    if isinstance(value, PairValue):
        return f"({print_value(value.first)}, {print_value(value.second)})"
    if isinstance(value, ListValue):
        return "[" + ", ".join(print_value(v) for v in value.items) + "]"
    if isinstance(value, Numeral):
        return f"nat({value.n})"
    raise TypeError(f"not a value: {value!r}")


def _entries(entries: tuple[Entry, ...]) -> str:
    shown = []
    for e in entries:
        key = print_value(e.key)
        shown.append(key if e.value is None else f"{key} |-> {print_value(e.value)}")
    return "{" + ", ".join(shown) + "}"


def print_line(line) -> str:
    if isinstance(line, NodeLine):
        return f"node {line.name}"
    if isinstance(line, EdgeLine):
        return f"edge {line.name} : {line.dom} -> {line.cod}"
    if isinstance(line, CommLine):
        return f"comm {print_ref(line.l)} . {print_ref(line.r)} = {print_ref(line.c)}"
    if isinstance(line, TerminalLine):
        return f"terminal {line.name}"
    if isinstance(line, InitialLine):
        return f"initial {line.name}"
    if isinstance(line, PullbackLine):
        return f"pullback {line.name}[{', '.join(line.parts)}] = pb({print_ref(line.u1)}, {print_ref(line.u2)})"
    if isinstance(line, PushoutLine):
        return f"pushout {line.name}[{', '.join(line.parts)}] = po({print_ref(line.u1)}, {print_ref(line.u2)})"
    if isinstance(line, ListLine):
        return f"list {line.name}[{', '.join(line.parts)}] = list({line.a})"
    if isinstance(line, RuleLine):
        text = " ".join([line.rule] + [f"{f.name}={print_ref(f.value)}" for f in line.fields])
        if line.names:
            text += " as " + ", ".join(line.names)
        return text
    if isinstance(line, ListRecLine):
        return f"listrec {line.name} = rec({line.lst}, {print_ref(line.y)}, {print_ref(line.g)})"
    if isinstance(line, AssignLine):
        return f"{line.name} := {_entries(line.entries)}"
    if isinstance(line, RenameLine):
        return f"rename {line.name} := {_entries(line.entries)}"
    if isinstance(line, QueryLine):
        return f"eval {line.edge} {print_value(line.value)}"
    raise TypeError(f"not a block line: {line!r}")


def _block(header: str, lines) -> str:
    body = [header] + [INDENT + print_line(line) for line in lines] + ["end"]
    return "\n".join(body)


def print_decl(decl) -> str:
    if isinstance(decl, ContextBlock):
        return _block(f"context {decl.name}", decl.lines)
    if isinstance(decl, ContextExpr):
        if decl.op == "chain":
            return f"context {decl.name} = chain({decl.args[0]}, {decl.n})"
        return f"context {decl.name} = {decl.op}({', '.join(decl.args)})"
    if isinstance(decl, EqExtBlock):
        return _block(f"eqext {decl.name} over {decl.over}", decl.lines)
    if isinstance(decl, HomBlock):
        header = f"hom {decl.name} : {decl.source} -> {decl.target}"
        body = [header] + [f"{INDENT}{print_ref(m.source)} |-> {print_ref(m.target)}" for m in decl.lines] + ["end"]
        return "\n".join(body)
    if isinstance(decl, MapDecl):
        return f"map {decl.name} : {decl.source} -> {decl.target} = ({decl.ext or 'id'}, {decl.hom or 'id'})"
    if isinstance(decl, ComposeDecl):
        return f"map {decl.name} = compose({decl.first}, {decl.second})"
    if isinstance(decl, CellDecl):
        return f"cell {decl.name} : {decl.source} -> {decl.target} = ({decl.ext or 'id'}, {decl.hom})"
    if isinstance(decl, ModelBlock):
        header = f"model {decl.name} of {decl.of}" + (f" using {decl.using}" if decl.using else "")
        return _block(header, decl.lines)
    if isinstance(decl, ClaimDecl):
        return f"claim {decl.left} == {decl.right}"
    raise TypeError(f"not a declaration: {decl!r}")


def print_document(doc: SourceDocument) -> str:
    return "\n\n".join(print_decl(d) for d in doc.decls) + "\n"
