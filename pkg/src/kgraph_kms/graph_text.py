"""The line-oriented k-graph input format.

Sections, in any order, one entry per line; ``#`` starts a comment::

    [k]
    2
    [vertices]
    v
    [edges]
    e 1 v v          # id color source range
    [squares]
    e g h e          # means eg = he as 2-colored morphisms

Parsing failures raise :class:`GraphSyntaxError` with a line reference;
axiom violations are reported by ``KGraph.validate`` afterwards.
"""

from __future__ import annotations

from typing import Dict, List, Tuple

from .kgraph import Edge, KGraph


class GraphSyntaxError(Exception):
    def __init__(self, message: str, line_no: int = 0):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}" if line_no else message)


_SECTIONS = ("k", "vertices", "edges", "squares")


def parse_kgraph_text(text: str) -> KGraph:
    """Parse the text format into an (unvalidated) KGraph."""
    k = None
    vertices: List[str] = []
    edges: List[Edge] = []
    squares: Dict[Tuple[str, str], Tuple[str, str]] = {}
    section = None
    seen_any = False

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        seen_any = True
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip().lower()
            if name not in _SECTIONS:
                raise GraphSyntaxError(f"unknown section [{name}]", line_no)
            section = name
            continue
        if section is None:
            raise GraphSyntaxError("content before any section header", line_no)
        fields = line.split()
        if section == "k":
            if k is not None:
                raise GraphSyntaxError("duplicate k value", line_no)
            try:
                k = int(fields[0])
            except ValueError:
                raise GraphSyntaxError(f"k must be an integer, got {fields[0]!r}", line_no)
            if len(fields) != 1 or k < 1:
                raise GraphSyntaxError("the [k] section needs a single positive integer", line_no)
        elif section == "vertices":
            vertices.extend(fields)
        elif section == "edges":
            if len(fields) != 4:
                raise GraphSyntaxError("edge lines are: id color source range", line_no)
            eid, color_s, src, rng = fields
            try:
                color = int(color_s)
            except ValueError:
                raise GraphSyntaxError(f"edge color must be an integer, got {color_s!r}", line_no)
            edges.append(Edge(eid, color, src, rng))
        elif section == "squares":
            if len(fields) != 4:
                raise GraphSyntaxError("square lines are: e f f' e' (meaning ef = f'e')", line_no)
            e, f, fp, ep = fields
            if (e, f) in squares:
                raise GraphSyntaxError(f"duplicate square for ({e}, {f})", line_no)
            squares[(e, f)] = (fp, ep)

    if not seen_any:
        raise GraphSyntaxError("empty input")
    if k is None:
        raise GraphSyntaxError("missing [k] section")
    if not vertices:
        raise GraphSyntaxError("missing [vertices] section")
    ids = [e.eid for e in edges]
    if len(set(ids)) != len(ids):
        dup = next(i for i in ids if ids.count(i) > 1)
        raise GraphSyntaxError(f"duplicate edge id {dup!r}")
    return KGraph(k, vertices, edges, squares)


def format_kgraph_text(g: KGraph) -> str:
    lines = ["[k]", str(g.k), "", "[vertices]"]
    lines.extend(g.vertices)
    lines.extend(["", "[edges]"])
    for e in sorted(g.edges.values(), key=lambda e: (e.color, e.eid)):
        lines.append(f"{e.eid} {e.color} {e.source} {e.range}")
    if g.squares:
        lines.extend(["", "[squares]"])
        for (e, f), (fp, ep) in sorted(g.squares.items()):
            lines.append(f"{e} {f} {fp} {ep}")
    return "\n".join(lines) + "\n"
