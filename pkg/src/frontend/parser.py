"""Parser for `.auk` documents: lark LALR grammar, transformed straight into syntax.py nodes."""
import logging
from functools import lru_cache
from pathlib import Path

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import LarkError, UnexpectedCharacters, UnexpectedInput, UnexpectedToken, VisitError

from src.frontend.syntax import (
    AssignLine, Atom, CellDecl, ClaimDecl, CommLine, ComposeDecl, ContextBlock, ContextExpr, EdgeLine, Entry, EqExtBlock,
    FieldArg, HomBlock, IdRef, InitialLine, ListLine, ListRecLine, ListValue, MapDecl, Maplet, ModelBlock, NameRef,
    NodeLine, Numeral, PairValue, PullbackLine, PushoutLine, QueryLine, RenameLine, RuleLine, SourceDocument,
    TerminalLine, TriRef,
)
from src.kernel.errors import KernelError, ParseError

logger = logging.getLogger("aukernel")

GRAMMAR_FILE = Path(__file__).with_name("grammar.lark")


def _names(items) -> tuple[str, ...]:
    return tuple(str(t) for t in items if t is not None)


def _present(items) -> list:
    return [x for x in items if x is not None]


class AukTransformer(Transformer):
    """Parse tree -> syntax tree. Tokens arrive as NAME, INT and STAR only."""

    def start(self, children):
        return SourceDocument(decls=tuple(children))

    # -- references and values -------------------------------------------------

    @v_args(inline=True)
    def name_ref(self, name):
        return NameRef(name=str(name))

    @v_args(inline=True)
    def id_ref(self, node):
        return IdRef(node=str(node))

    @v_args(inline=True)
    def tri_ref(self, l, r, c):
        return TriRef(l=l, r=r, c=c)

    @v_args(inline=True)
    def atom(self, token: Token):
        if token.type == "INT":
            return Atom(value=int(token))
        return Atom(value=str(token))

    @v_args(inline=True)
    def pair(self, first, second):
        return PairValue(first=first, second=second)

    def list_value(self, children):
        return ListValue(items=tuple(_present(children)))

    @v_args(inline=True)
    def numeral(self, n):
        return Numeral(n=int(n))

    def name_list(self, children):
        return _names(children)

    # -- contexts ------------------------------------------------------------------

    def context_block(self, children):
        return ContextBlock(name=str(children[0]), lines=tuple(children[1:]))

    @v_args(inline=True)
    def arrow_expr(self, name, arg):
        return ContextExpr(name=str(name), op="arrow", args=(str(arg),))

    @v_args(inline=True)
    def product_expr(self, name, left, right):
        return ContextExpr(name=str(name), op="product", args=(str(left), str(right)))

    @v_args(inline=True)
    def chain_expr(self, name, arg, n):
        return ContextExpr(name=str(name), op="chain", args=(str(arg),), n=int(n))

    @v_args(inline=True)
    def node_line(self, name):
        return NodeLine(name=str(name))

    @v_args(inline=True)
    def edge_line(self, name, dom, cod):
        return EdgeLine(name=str(name), dom=str(dom), cod=str(cod))

    @v_args(inline=True)
    def comm_line(self, l, r, c):
        return CommLine(l=l, r=r, c=c)

    @v_args(inline=True)
    def terminal_line(self, name):
        return TerminalLine(name=str(name))

    @v_args(inline=True)
    def initial_line(self, name):
        return InitialLine(name=str(name))

    @v_args(inline=True)
    def pullback_line(self, name, p1, p, p2, u1, u2):
        return PullbackLine(name=str(name), parts=_names((p1, p, p2)), u1=u1, u2=u2)

    @v_args(inline=True)
    def pushout_line(self, name, j1, j, j2, u1, u2):
        return PushoutLine(name=str(name), parts=_names((j1, j, j2)), u1=u1, u2=u2)

    @v_args(inline=True)
    def list_line(self, name, parts, a):
        if len(parts) != 9:
            raise ParseError(f"list {name} needs 9 part names (T, P, eps, cons, p1, p, p2, bA, bL), got {len(parts)}",
                             name.line, name.column, rule="list")
        return ListLine(name=str(name), parts=parts, a=str(a))

    # -- eq-extensions ---------------------------------------------------------

    def eqext_block(self, children):
        return EqExtBlock(name=str(children[0]), over=str(children[1]), lines=tuple(children[2:]))

    @v_args(inline=True)
    def field(self, name, value):
        return FieldArg(name=str(name), value=value)

    def rule_line(self, children):
        rule, *rest = children
        fields = tuple(x for x in rest if isinstance(x, FieldArg))
        names = next((x for x in rest if isinstance(x, tuple)), ())
        return RuleLine(rule=str(rule), fields=fields, names=names)

    @v_args(inline=True)
    def listrec_line(self, name, lst, y, g):
        return ListRecLine(name=str(name), lst=str(lst), y=y, g=g)

    # -- homs and maps ---------------------------------------------------------

    def hom_block(self, children):
        name, source, target, *lines = children
        return HomBlock(name=str(name), source=str(source), target=str(target), lines=tuple(lines))

    @v_args(inline=True)
    def maplet(self, source, target):
        return Maplet(source=source, target=target)

    @v_args(inline=True)
    def part(self, name):
        return str(name)

    def id_part(self, _children):
        return None

    @v_args(inline=True)
    def map_decl(self, name, source, target, ext, hom):
        return MapDecl(name=str(name), source=str(source), target=str(target), ext=ext, hom=hom)

    @v_args(inline=True)
    def compose_decl(self, name, first, second):
        return ComposeDecl(name=str(name), first=str(first), second=str(second))

    @v_args(inline=True)
    def cell_decl(self, name, source, target, ext, hom):
        return CellDecl(name=str(name), source=str(source), target=str(target), ext=ext, hom=str(hom))

    # -- models ----------------------------------------------------------------

    def model_block(self, children):
        name, of, using, *lines = children
        return ModelBlock(name=str(name), of=str(of), using=None if using is None else str(using),
                          lines=tuple(lines))

    def entry(self, children):
        key, value = children
        return Entry(key=key, value=value)

    def assign_line(self, children):
        name, *entries = children
        return AssignLine(name=str(name), entries=tuple(_present(entries)))

    def rename_line(self, children):
        name, *entries = children
        return RenameLine(name=str(name), entries=tuple(_present(entries)))

    @v_args(inline=True)
    def query_line(self, edge, value):
        return QueryLine(edge=str(edge), value=value)

    @v_args(inline=True)
    def claim_decl(self, left, right):
        return ClaimDecl(left=str(left), right=str(right))


@lru_cache(maxsize=1)
def get_parser() -> Lark:
    return Lark(GRAMMAR_FILE.read_text(encoding="utf-8"), parser="lalr", maybe_placeholders=True)


def parse_document(text: str) -> SourceDocument:
    """Parse `.auk` source; failures raise ParseError with the offending line and column."""
    if not text.endswith("\n"):
        text += "\n"
    try:
        tree = get_parser().parse(text)
        return AukTransformer().transform(tree)
    except UnexpectedToken as e:
        expected = ", ".join(sorted(e.expected)[:6])
        found = "end of input" if e.token.type == "$END" else repr(str(e.token))
        raise ParseError(f"unexpected {found}; expected one of: {expected}", e.line, e.column) from None
    except UnexpectedCharacters as e:
        raise ParseError(f"unexpected character {text[e.pos_in_stream]!r}", e.line, e.column) from None
    except UnexpectedInput as e:
        raise ParseError(f"unexpected input: {e}", getattr(e, "line", 0), getattr(e, "column", 0)) from None
    except VisitError as e:
        if isinstance(e.orig_exc, KernelError):
            raise e.orig_exc from None
        raise ParseError(f"malformed {e.rule}: {e.orig_exc}") from None
    except LarkError as e:
        raise ParseError(f"failed to parse document: {e}") from None


def parse_file(path: Path) -> SourceDocument:
    logger.debug(f"parsing {path}")
    return parse_document(Path(path).read_text(encoding="utf-8"))
