"""Graphviz DOT export of a sketch with its surface names."""
from src.frontend.elaborate import Names
from src.kernel.sketch import Sketch


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def universal_subjects(apex: Sketch) -> list[tuple[str, int, int]]:
    """(kind, universal index, subject node) in a fixed order."""
    return (
        [("terminal", w, x) for w, x in enumerate(apex.ut_n)]
        + [("initial", w, x) for w, x in enumerate(apex.ui_n)]
        + [("pullback", w, apex.pullback_parts(w)["apex"]) for w in range(apex.upb_count)]
        + [("pushout", w, apex.pushout_parts(w)["apex"]) for w in range(apex.upo_count)]
        + [("list", w, apex.list_parts(w)["list"]) for w in range(apex.ul_count)]
    )


def export_dot(apex: Sketch, names: Names, title: str = "sketch") -> str:
    """Nodes and edges in index order, then one marker per commutativity.

    Each universal gets a cluster with its subject node and the edges into or out
    of it that no earlier cluster took; identity edges are dotted self-loops. A
    commutativity (l, r, c) is a small note node t<i> labelled "l . r = c" with
    dashed spokes to the three corners dom(l), cod(l) and cod(c).
    """
    def node_line(x: int, indent: str) -> str:
        return f"{indent}n{x} [label={_quote(names.describe_node(x))}];"

    def edge_line(u: int, indent: str) -> str:
        style = ", style=dotted" if apex.is_identity(u) else ""
        label = _quote(names.describe_edge(u, apex))
        return f"{indent}n{apex.dom(u)} -> n{apex.cod(u)} [label={label}{style}];"

    def comm_lines(t: int) -> list[str]:
        l, r, c = apex.tri(t)
        label = (f"{names.describe_edge(l, apex)} . {names.describe_edge(r, apex)}"
                 f" = {names.describe_edge(c, apex)}")
        corners = [apex.dom(l), apex.cod(l), apex.cod(c)]
        body = [f"  t{t} [label={_quote(label)}, shape=note, fontsize=9];"]
        body.extend(f"  t{t} -> n{x} [style=dashed, arrowhead=none];" for x in corners)
        return body

    placed_nodes: set[int] = set()
    placed_edges: set[int] = set()
    clusters = []
    for kind, w, x in universal_subjects(apex):
        body = [f"  subgraph cluster_{kind}_{w} {{",
                f"    label={_quote(kind + ' ' + names.describe_node(x))};"]
        if x not in placed_nodes:
            body.append(node_line(x, "    "))
            placed_nodes.add(x)
        for u in range(apex.e_count):
            if u not in placed_edges and x in (apex.dom(u), apex.cod(u)):
                body.append(edge_line(u, "    "))
                placed_edges.add(u)
        body.append("  }")
        clusters.extend(body)

    lines = [f"digraph {_quote(title)} {{", "  rankdir=LR;", "  node [shape=plaintext];"]
    lines.extend(node_line(x, "  ") for x in range(apex.n_count) if x not in placed_nodes)
    lines.extend(edge_line(u, "  ") for u in range(apex.e_count) if u not in placed_edges)
    lines.extend(clusters)
    for t in range(apex.tri_count):
        lines.extend(comm_lines(t))
    lines.append("}")
    return "\n".join(lines) + "\n"
