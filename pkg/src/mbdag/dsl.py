"""Line-oriented text format for DAGs, plus canonical serializer and DOT export.

Grammar, one statement per line, ``#`` to end of line is a comment::

    node NAME [role=ROLE] [of=NAME]
    NAME -> NAME
    adjust NAME {, NAME}

``ROLE`` is one of true, measured, system, knowledge, selection, aux
(default aux). ``of=`` is only legal on measured nodes and binds the proxy
to the variable it records. Names match ``[A-Za-z_][A-Za-z0-9_]*`` with an
optional trailing ``*``. Statements may appear in any order.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from .dag import Dag, Role
from .errors import CycleError, DuplicateEdge, MbdagError

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\*?")
_TOKEN_RE = re.compile(r"(?P<ident>[A-Za-z_][A-Za-z0-9_]*\*?)|(?P<arrow>->)|(?P<comma>,)|(?P<eq>=)|(?P<ws>[ \t]+)")

ROLE_NAMES = {r.value: r for r in Role}


class ErrorKind(enum.Enum):
    LEX = "LexError"
    UNKNOWN_ROLE = "UnknownRole"
    UNKNOWN_NODE = "UnknownNode"
    DUPLICATE_NODE = "DuplicateNode"
    DUPLICATE_EDGE = "DuplicateEdge"
    CYCLE = "CycleError"
    BAD_DIRECTIVE = "BadDirective"


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int = 1


@dataclass(frozen=True)
class ParseError:
    span: SourceSpan
    kind: ErrorKind
    message: str

    def __str__(self):
        return f"{self.span.line}:{self.span.column}: {self.kind.value}: {self.message}"


class DslParseFailure(MbdagError):
    """Raised by :func:`parse`; ``errors`` holds every independent problem found."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("\n".join(str(e) for e in self.errors))


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    span: SourceSpan


def _lex_line(text, lineno):
    """Tokenize one comment-stripped line. Returns (tokens, error or None)."""
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            bad = text[pos]
            err = ParseError(SourceSpan(lineno, pos + 1, 1), ErrorKind.LEX,
                             f"unexpected character {bad!r}")
            return toks, err
        if m.lastgroup != "ws":
            toks.append(_Tok(m.lastgroup, m.group(), SourceSpan(lineno, pos + 1, len(m.group()))))
        pos = m.end()
    return toks, None


@dataclass
class _NodeDecl:
    name: _Tok
    role: Role
    of: _Tok | None
    of_key: _Tok | None


def _end_span(lineno, toks):
    last = toks[-1].span
    return SourceSpan(lineno, last.column + last.length, 1)


def _parse_node(toks, lineno, errors):
    if len(toks) < 2 or toks[1].kind != "ident":
        span = toks[1].span if len(toks) > 1 else _end_span(lineno, toks)
        got = repr(toks[1].text) if len(toks) > 1 else "end of line"
        errors.append(ParseError(span, ErrorKind.BAD_DIRECTIVE, f"'node' expects a name, got {got}"))
        return None
    decl = _NodeDecl(toks[1], Role.AUX, None, None)
    seen = set()
    rest = toks[2:]
    i = 0
    while i < len(rest):
        key = rest[i]
        if (key.kind != "ident" or i + 2 >= len(rest)
                or rest[i + 1].kind != "eq" or rest[i + 2].kind != "ident"):
            errors.append(ParseError(key.span, ErrorKind.BAD_DIRECTIVE,
                                     f"expected key=value attribute at {key.text!r}"))
            return None
        value = rest[i + 2]
        if key.text in seen:
            errors.append(ParseError(key.span, ErrorKind.BAD_DIRECTIVE,
                                     f"attribute {key.text!r} given twice"))
            return None
        seen.add(key.text)
        if key.text == "role":
            if value.text not in ROLE_NAMES:
                # keep the node declared so later lines do not cascade
                errors.append(ParseError(value.span, ErrorKind.UNKNOWN_ROLE,
                                         f"unknown role {value.text!r}"))
            else:
                decl.role = ROLE_NAMES[value.text]
        elif key.text == "of":
            decl.of, decl.of_key = value, key
        else:
            errors.append(ParseError(key.span, ErrorKind.BAD_DIRECTIVE,
                                     f"unknown attribute {key.text!r}"))
            return None
        i += 3
    if decl.of is not None and decl.role is not Role.MEASURED:
        errors.append(ParseError(decl.of_key.span, ErrorKind.BAD_DIRECTIVE,
                                 f"'of' on {decl.name.text!r} requires role=measured"))
        decl.of = decl.of_key = None
    return decl


def _parse_adjust(toks, lineno, errors):
    rest = toks[1:]
    if not rest:
        errors.append(ParseError(_end_span(lineno, toks), ErrorKind.BAD_DIRECTIVE,
                                 "'adjust' expects at least one name"))
        return None
    for i, tok in enumerate(rest):
        want = "ident" if i % 2 == 0 else "comma"
        if tok.kind != want:
            errors.append(ParseError(tok.span, ErrorKind.BAD_DIRECTIVE,
                                     f"unexpected {tok.text!r} in adjust list"))
            return None
    if rest[-1].kind == "comma":
        errors.append(ParseError(rest[-1].span, ErrorKind.BAD_DIRECTIVE, "trailing ',' in adjust list"))
        return None
    names = [t for t in rest if t.kind == "ident"]
    return names


def parse(text: str) -> Dag:
    """Parse DSL text into a :class:`Dag`.

    Raises :class:`DslParseFailure` listing all statement-level errors; a
    bad line does not stop later lines from being checked.
    """
    errors: list[ParseError] = []
    decls: list[_NodeDecl] = []
    edges: list[tuple[_Tok, _Tok]] = []
    adjusts: list[_Tok] = []

    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r").split("#", 1)[0]
        toks, lex_err = _lex_line(line, lineno)
        if lex_err is not None:
            errors.append(lex_err)
            continue
        if not toks:
            continue
        head = toks[0]
        is_edge_form = len(toks) > 1 and toks[1].kind == "arrow"
        if head.kind == "ident" and head.text == "node" and not is_edge_form:
            decl = _parse_node(toks, lineno, errors)
            if decl is not None:
                decls.append(decl)
        elif head.kind == "ident" and head.text == "adjust" and not is_edge_form:
            names = _parse_adjust(toks, lineno, errors)
            if names is not None:
                adjusts.extend(names)
        elif len(toks) == 3 and [t.kind for t in toks] == ["ident", "arrow", "ident"]:
            edges.append((toks[0], toks[2]))
        else:
            errors.append(ParseError(head.span, ErrorKind.BAD_DIRECTIVE,
                                     f"unrecognised statement starting at {head.text!r}"))

    dag = Dag()
    for decl in decls:
        if decl.name.text in dag:
            errors.append(ParseError(decl.name.span, ErrorKind.DUPLICATE_NODE,
                                     f"node {decl.name.text!r} declared twice"))
            continue
        dag = dag.add_node(decl.name.text, decl.role)

    bound = []
    for decl in decls:
        if decl.of is None or dag.roles.get(decl.name.text) is not Role.MEASURED:
            continue
        if decl.of.text not in dag:
            errors.append(ParseError(decl.of.span, ErrorKind.UNKNOWN_NODE,
                                     f"unknown node {decl.of.text!r}"))
            continue
        if decl.name.text in dag.measures:
            continue
        dag = dag.bind(decl.name.text, decl.of.text)
        bound.append(decl)

    for src, dst in edges:
        missing = [t for t in (src, dst) if t.text not in dag]
        for t in missing:
            errors.append(ParseError(t.span, ErrorKind.UNKNOWN_NODE, f"unknown node {t.text!r}"))
        if missing:
            continue
        try:
            dag = dag.add_edge(src.text, dst.text)
        except DuplicateEdge:
            errors.append(ParseError(src.span, ErrorKind.DUPLICATE_EDGE,
                                     f"duplicate edge {src.text} -> {dst.text}"))
        except CycleError as exc:
            errors.append(ParseError(src.span, ErrorKind.CYCLE,
                                     f"edge {src.text} -> {dst.text} closes the cycle "
                                     + " -> ".join(exc.cycle)))

    for tok in adjusts:
        if tok.text not in dag:
            errors.append(ParseError(tok.span, ErrorKind.UNKNOWN_NODE, f"unknown node {tok.text!r}"))
        else:
            dag = dag.condition(tok.text)

    for decl in bound:
        if (decl.of.text, decl.name.text) not in dag.edges:
            errors.append(ParseError(
                decl.of.span, ErrorKind.BAD_DIRECTIVE,
                f"{decl.name.text!r} of={decl.of.text!r} needs the edge {decl.of.text} -> {decl.name.text}"))

    if errors:
        errors.sort(key=lambda e: (e.span.line, e.span.column))
        raise DslParseFailure(errors)
    return dag


def serialize(dag: Dag) -> str:
    """Canonical text: sorted nodes, sorted edges, then one adjust line."""
    lines = []
    for n in dag.nodes:
        decl = f"node {n} role={dag.roles[n].value}"
        if n in dag.measures:
            decl += f" of={dag.measures[n]}"
        lines.append(decl)
    lines.extend(f"{a} -> {b}" for a, b in sorted(dag.edges))
    if dag.conditioned:
        lines.append("adjust " + ", ".join(sorted(dag.conditioned)))
    return "".join(line + "\n" for line in lines)


ROLE_SHAPES = {
    Role.TRUE: "ellipse",
    Role.MEASURED: "doublecircle",
    Role.SYSTEM: "hexagon",
    Role.KNOWLEDGE: "parallelogram",
    Role.SELECTION: "invtriangle",
    Role.AUX: "circle",
}


def _dot_id(name):
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(dag: Dag, name: str = "G") -> str:
    """Graphviz text; conditioned nodes are drawn as boxes whatever their role."""
    out = [f"digraph {_dot_id(name)} {{", "  rankdir=LR;"]
    for n in dag.nodes:
        shape = "box" if n in dag.conditioned else ROLE_SHAPES[dag.roles[n]]
        out.append(f"  {_dot_id(n)} [label={_dot_id(n)}, shape={shape}];")
    for a, b in sorted(dag.edges):
        out.append(f"  {_dot_id(a)} -> {_dot_id(b)};")
    out.append("}")
    return "\n".join(out) + "\n"
