"""S-expression grammar for graphons.

    (const c) | (half) | (levelset (poly (i j c)...)) | (step (w...) ((v...)...))
    (graph FILE NAME) | (complement E) | (affine a b E) | (dsum (w E)+)
    (pprod E E) | (oprod E E [m]) | (tensor E E)
    (cr binary) | (cr lexc4) | (cr cf ALPHA DEPTH) | (cr file PATH)
    (specsolve (coeffs a1..an) E)

Numbers written as integers, ``p/q`` or finite decimals are read exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import cr as crmod
from . import graphon as gmod
from .graphio import ParseError, load_graphs
from .spectral import spectral_solve


@dataclass
class Atom:
    text: str
    line: int
    col: int


@dataclass
class SList:
    items: list
    line: int
    col: int


def _tokens(text: str):
    line, col, i = 1, 1, 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line, col, i = line + 1, 1, i + 1
        elif ch.isspace():
            col, i = col + 1, i + 1
        elif ch in "()":
            yield ch, line, col
            col, i = col + 1, i + 1
        else:
            j = i
            while j < len(text) and not text[j].isspace() and text[j] not in "()":
                j += 1
            yield text[i:j], line, col
            col, i = col + (j - i), j


def read(text: str, src: str = "<expr>") -> SList | Atom:
    stack: list[SList] = []
    top = None
    for tok, ln, col in _tokens(text):
        if top is not None and not stack and tok != ")":
            raise ParseError("trailing input after expression", ln, col, src)
        if tok == "(":
            stack.append(SList([], ln, col))
        elif tok == ")":
            if not stack:
                raise ParseError("unbalanced ')'", ln, col, src)
            node = stack.pop()
            if stack:
                stack[-1].items.append(node)
            else:
                top = node
        else:
            a = Atom(tok, ln, col)
            if stack:
                stack[-1].items.append(a)
            else:
                top = a
    if stack:
        s = stack[-1]
        raise ParseError("unclosed '('", s.line, s.col, src)
    if top is None:
        raise ParseError("empty expression", 1, 1, src)
    return top


class _Eval:
    def __init__(self, src: str, base: Path):
        self.src = src
        self.base = base

    def err(self, node, msg):
        return ParseError(msg, node.line, node.col, self.src)

    def num(self, node):
        if not isinstance(node, Atom):
            raise self.err(node, "expected a number")
        try:
            return Fraction(node.text)
        except (ValueError, ZeroDivisionError):
            raise self.err(node, f"expected a number, got {node.text!r}") from None

    def int_(self, node):
        v = self.num(node)
        if v.denominator != 1:
            raise self.err(node, f"expected an integer, got {node.text!r}")
        return int(v)

    def lst(self, node, what):
        if not isinstance(node, SList):
            raise self.err(node, f"expected {what}")
        return node.items

    def arity(self, node, lo, hi=None):
        n = len(node.items) - 1
        hi = lo if hi is None else hi
        if not lo <= n <= hi:
            want = str(lo) if lo == hi else f"{lo}-{hi}"
            raise self.err(node, f"'{node.items[0].text}' takes {want} argument(s), got {n}")

    def path(self, node):
        if not isinstance(node, Atom):
            raise self.err(node, "expected a path")
        p = Path(node.text)
        return p if p.is_absolute() or p.exists() else self.base / p

    def __call__(self, node):
        if not isinstance(node, SList) or not node.items:
            raise self.err(node, "expected a parenthesized graphon expression")
        head = node.items[0]
        if not isinstance(head, Atom):
            raise self.err(head, "expected an operator name")
        op, args = head.text, node.items[1:]
        try:
            return self.dispatch(node, op, args)
        except ParseError:
            raise
        except (ValueError, OSError) as e:
            raise self.err(node, f"{op}: {e}") from None

    def dispatch(self, node, op, args):
        if op == "const":
            self.arity(node, 1)
            return gmod.const(self.num(args[0]))
        if op == "half":
            self.arity(node, 0)
            return gmod.half()
        if op == "levelset":
            self.arity(node, 1)
            items = self.lst(args[0], "(poly (i j c)...)")
            if not items or not isinstance(items[0], Atom) or items[0].text != "poly":
                raise self.err(args[0], "expected (poly (i j c)...)")
            terms = []
            for t in items[1:]:
                ijc = self.lst(t, "a term (i j c)")
                if len(ijc) != 3:
                    raise self.err(t, "a term needs exactly (i j c)")
                terms.append((self.int_(ijc[0]), self.int_(ijc[1]), self.num(ijc[2])))
            return gmod.levelset(terms)
        if op == "step":
            self.arity(node, 2)
            ws = [self.num(a) for a in self.lst(args[0], "a weight list")]
            rows = [[self.num(a) for a in self.lst(r, "a value row")] for r in self.lst(args[1], "value rows")]
            if any(len(r) != len(ws) for r in rows) or len(rows) != len(ws):
                raise self.err(args[1], f"value matrix must be {len(ws)}x{len(ws)}")
            return gmod.step(ws, rows)
        if op == "graph":
            self.arity(node, 2)
            gf = load_graphs(self.path(args[0]))
            return gmod.from_graph(gf.get(args[1].text), name=args[1].text)
        if op == "complement":
            self.arity(node, 1)
            return gmod.complement(self(args[0]))
        if op == "affine":
            self.arity(node, 3)
            return gmod.affine(self(args[2]), self.num(args[0]), self.num(args[1]))
        if op == "dsum":
            if len(args) < 1:
                raise self.err(node, "dsum needs at least one (w E) part")
            parts = []
            for p in args:
                we = self.lst(p, "a part (w E)")
                if len(we) != 2:
                    raise self.err(p, "a part needs exactly (w E)")
                parts.append((self.num(we[0]), self(we[1])))
            return gmod.dsum(parts)
        if op == "pprod":
            self.arity(node, 2)
            return gmod.pprod(self(args[0]), self(args[1]))
        if op == "oprod":
            self.arity(node, 2, 3)
            m = self.int_(args[2]) if len(args) == 3 else 1024
            return gmod.oprod(self(args[0]), self(args[1]), m)
        if op == "tensor":
            self.arity(node, 2)
            return gmod.tensor(self(args[0]), self(args[1]))
        if op == "cr":
            if not args or not isinstance(args[0], Atom):
                raise self.err(node, "expected (cr binary|lexc4|cf ALPHA DEPTH|file PATH)")
            kind = args[0].text
            if kind == "binary":
                self.arity(node, 1)
                return crmod.binary_graphon()
            if kind == "lexc4":
                self.arity(node, 1)
                return crmod.lexpower_graphon()
            if kind == "cf":
                self.arity(node, 3)
                return crmod.make_cf(self.num(args[1]), self.int_(args[2])).graphon()
            if kind == "file":
                self.arity(node, 2)
                p = self.path(args[1])
                return crmod.parse_tree(p.read_text(), name=p.stem).graphon()
            raise self.err(args[0], f"unknown cr kind {kind!r}")
        if op == "specsolve":
            self.arity(node, 2)
            items = self.lst(args[0], "(coeffs a1..an)")
            if not items or not isinstance(items[0], Atom) or items[0].text != "coeffs":
                raise self.err(args[0], "expected (coeffs a1..an)")
            return spectral_solve(self(args[1]), [float(self.num(a)) for a in items[1:]])
        raise self.err(node.items[0], f"unknown operator {op!r}")


def parse_graphon(text: str, base: str | Path = ".", src: str = "<expr>") -> gmod.Graphon:
    """Build the graphon denoted by ``text``; its name is the expression text."""
    tree = read(text, src)
    g = _Eval(src, Path(base))(tree)
    g.name = " ".join(text.split())
    return g
