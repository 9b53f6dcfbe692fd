"""Text format for graphs and quantum graphs.

    graph <name>
    n <node_count>
    e <u> <v> [b|r]      1-indexed; repeat a line for multiplicity
    l <position> <node>  label assignment, positions 1..k
    end
    term <p/q> <name>    quantum graph term referencing a graph above
"""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

from .graphs import BLUE, COLORS, Graph, GraphError, QuantumGraph


class ParseError(ValueError):
    def __init__(self, msg: str, line: int, col: int = 1, source: str = "<text>"):
        super().__init__(f"{source}:{line}:{col}: {msg}")
        self.line, self.col = line, col


class GraphFile:
    def __init__(self, graphs: dict[str, Graph], terms: list[tuple[Fraction, str]]):
        self.graphs = graphs
        self.terms = terms

    def get(self, name: str) -> Graph:
        if name not in self.graphs:
            raise GraphError(f"no graph named {name!r}; have {sorted(self.graphs)}")
        return self.graphs[name]

    def quantum(self) -> QuantumGraph:
        return QuantumGraph([(self.graphs[n], c) for c, n in self.terms])

    def main(self, name: str | None = None):
        """The object a density query refers to: the named graph, the quantum
        graph when ``term`` lines exist, else the only graph."""
        if name is not None:
            return self.get(name)
        if self.terms:
            return self.quantum()
        if len(self.graphs) == 1:
            return next(iter(self.graphs.values()))
        raise GraphError(f"file defines {len(self.graphs)} graphs; pick one by name")


def _int(tok: str, ln: int, col: int, src: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"expected an integer, got {tok!r}", ln, col, src) from None


def parse_graphs(text: str, source: str = "<text>") -> GraphFile:
    graphs: dict[str, Graph] = {}
    terms: list[tuple[Fraction, str]] = []
    cur = None  # [name, n, edges, labels, start line]
    for ln, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        tok = body.split()
        if not tok:
            continue
        cols = []
        pos = 0
        for t in tok:
            pos = body.index(t, pos)
            cols.append(pos + 1)
            pos += len(t)
        head = tok[0]

        def need(k):
            if len(tok) != k:
                raise ParseError(f"'{head}' takes {k - 1} argument(s)", ln, cols[0], source)

        if head == "graph":
            if cur is not None:
                raise ParseError("nested 'graph' (missing 'end')", ln, cols[0], source)
            need(2)
            if tok[1] in graphs:
                raise ParseError(f"graph {tok[1]!r} defined twice", ln, cols[1], source)
            cur = [tok[1], None, [], {}, ln]
        elif head == "term":
            if cur is not None:
                raise ParseError("'term' inside a graph block", ln, cols[0], source)
            need(3)
            try:
                c = Fraction(tok[1])
            except (ValueError, ZeroDivisionError):
                raise ParseError(f"bad rational {tok[1]!r}", ln, cols[1], source) from None
            if tok[2] not in graphs:
                raise ParseError(f"unknown graph {tok[2]!r}", ln, cols[2], source)
            terms.append((c, tok[2]))
        elif head in ("n", "e", "l", "end"):
            if cur is None:
                raise ParseError(f"'{head}' outside a graph block", ln, cols[0], source)
            if head == "n":
                need(2)
                cur[1] = _int(tok[1], ln, cols[1], source)
            elif head == "e":
                if len(tok) not in (3, 4):
                    raise ParseError("expected 'e <u> <v> [b|r]'", ln, cols[0], source)
                u, v = _int(tok[1], ln, cols[1], source), _int(tok[2], ln, cols[2], source)
                c = tok[3] if len(tok) == 4 else BLUE
                if c not in COLORS:
                    raise ParseError(f"edge color must be b or r, got {c!r}", ln, cols[3], source)
                cur[2].append((u - 1, v - 1, c))
            elif head == "l":
                need(3)
                p, v = _int(tok[1], ln, cols[1], source), _int(tok[2], ln, cols[2], source)
                if p in cur[3]:
                    raise ParseError(f"label position {p} assigned twice", ln, cols[1], source)
                cur[3][p] = v - 1
            else:
                need(1)
                name, n, edges, labs, start = cur
                if n is None:
                    raise ParseError(f"graph {name!r} has no 'n' line", start, 1, source)
                if sorted(labs) != list(range(1, len(labs) + 1)):
                    raise ParseError(f"label positions of {name!r} must be 1..k", start, 1, source)
                try:
                    graphs[name] = Graph(n, tuple(edges), tuple(labs[p] for p in sorted(labs)))
                except GraphError as e:
                    raise ParseError(f"graph {name!r}: {e}", start, 1, source) from None
                cur = None
        else:
            raise ParseError(f"unknown directive {head!r}", ln, cols[0], source)
    if cur is not None:
        raise ParseError(f"graph {cur[0]!r} is missing 'end'", cur[4], 1, source)
    return GraphFile(graphs, terms)


def load_graphs(path: str | Path) -> GraphFile:
    p = Path(path)
    return parse_graphs(p.read_text(), str(p))


def format_graph(g: Graph, name: str) -> str:
    lines = [f"graph {name}", f"n {g.n}"]
    lines += [f"e {u + 1} {v + 1} {c}" for u, v, c in g.edges]
    lines += [f"l {p + 1} {v + 1}" for p, v in enumerate(g.labels)]
    lines.append("end")
    return "\n".join(lines) + "\n"
