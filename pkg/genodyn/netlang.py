# netlang.py - The .grn network-definition language
#
# Line-oriented, keyword-led statements:
#
#   network NAME
#   gene ID max=R degrade=R [combine=sum|product]
#   input ID signal=R|ID
#   param ID default=R [min=R] [max=R]
#   edge A -> B activate(beta=V, K=V, exp=V)      V = number or param id
#   edge A -> B repress(beta=V, K=V, exp=V)
#   # comment
#
# parse_network() returns a RawNetwork or raises NetworkSyntaxError carrying
# every diagnostic found (never a partial result).

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from .errors import Diagnostic, NetworkSyntaxError

KEYWORDS = frozenset({"network", "gene", "input", "param", "edge", "activate", "repress"})
EDGE_KINDS = ("activate", "repress")
COMBINE_MODES = ("sum", "product")


# =============================================================================
# RAW NETWORK TYPES
# =============================================================================

@dataclass(frozen=True)
class Ref:
    """A symbolic reference to a param (or a registered signal function)."""

    name: str

    def __str__(self) -> str:
        return self.name


Value = Union[float, Ref]


@dataclass(frozen=True)
class GeneDecl:
    id: str
    k_max: float
    degrade: float
    combine: str = "sum"


@dataclass(frozen=True)
class InputDecl:
    id: str
    signal: Value


@dataclass(frozen=True)
class ParamDecl:
    id: str
    default: float
    min: Optional[float] = None
    max: Optional[float] = None


@dataclass(frozen=True)
class EdgeDecl:
    source: str
    target: str
    kind: str
    beta: Value
    K: Value
    exp: Value

    def refs(self) -> List[Ref]:
        return [v for v in (self.beta, self.K, self.exp) if isinstance(v, Ref)]


@dataclass(frozen=True)
class RawNetwork:
    name: str
    genes: Tuple[GeneDecl, ...] = ()
    inputs: Tuple[InputDecl, ...] = ()
    edges: Tuple[EdgeDecl, ...] = ()
    params: Tuple[ParamDecl, ...] = ()


# =============================================================================
# LEXER
# =============================================================================

_TOKEN_RE = re.compile(r"""
    (?P<WS>[ \t]+)
  | (?P<COMMENT>\#.*)
  | (?P<ARROW>->)
  | (?P<NUMBER>[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<IDENT>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<EQUALS>=)
  | (?P<LPAREN>\()
  | (?P<RPAREN>\))
  | (?P<COMMA>,)
""", re.VERBOSE)

_TOKEN_NAMES = {
    "ARROW": "'->'",
    "NUMBER": "number",
    "IDENT": "identifier",
    "EQUALS": "'='",
    "LPAREN": "'('",
    "RPAREN": "')'",
    "COMMA": "','",
    "EOL": "end of line",
}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


class _Abort(Exception):
    """Stops parsing the current statement."""

    def __init__(self, diagnostic: Diagnostic):
        self.diagnostic = diagnostic


def _tokenize(text: str, line_no: int) -> List[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise _Abort(Diagnostic("lexical-error", f"unexpected character {text[pos]!r}",
                                    line_no, pos + 1))
        kind = m.lastgroup
        if kind not in ("WS", "COMMENT"):
            tokens.append(Token(kind, m.group(), line_no, pos + 1))
        pos = m.end()
    tokens.append(Token("EOL", "", line_no, len(text) + 1))
    return tokens


# =============================================================================
# PARSER
# =============================================================================

@dataclass
class _Attr:
    value: Union[float, str]
    is_ident: bool
    token: Token


@dataclass
class _Statement:
    keyword: str
    token: Token
    id_token: Optional[Token] = None
    attrs: Dict[str, _Attr] = field(default_factory=dict)
    # edge only
    target_token: Optional[Token] = None
    kind: Optional[str] = None


_STATEMENT_ATTRS = {
    "gene": ({"max", "degrade"}, {"combine"}),
    "input": ({"signal"}, set()),
    "param": ({"default"}, {"min", "max"}),
    "edge": ({"beta", "K", "exp"}, set()),
}


class _LineParser:
    def __init__(self, tokens: List[Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def nt(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, kind: str) -> bool:
        return self.nt.kind == kind

    def advance(self) -> Token:
        tok = self.nt
        if tok.kind != "EOL":
            self.pos += 1
        return tok

    def match(self, kind: str) -> Token:
        if self.nt.kind != kind:
            raise _Abort(Diagnostic(
                "syntax-error",
                f"expected {_TOKEN_NAMES[kind]}, encountered {_TOKEN_NAMES[self.nt.kind]} instead",
                self.nt.line, self.nt.column))
        return self.advance()

    def match_identifier(self) -> Token:
        tok = self.match("IDENT")
        if tok.text in KEYWORDS:
            raise _Abort(Diagnostic("reserved-word", f"{tok.text!r} is a reserved word",
                                    tok.line, tok.column))
        return tok

    def parse_statement(self) -> Optional[_Statement]:
        if self.peek("EOL"):
            return None
        head = self.nt
        if head.kind != "IDENT":
            raise _Abort(Diagnostic("syntax-error",
                                    f"expected a keyword, encountered {_TOKEN_NAMES[head.kind]} instead",
                                    head.line, head.column))
        if head.text not in ("network", "gene", "input", "param", "edge"):
            raise _Abort(Diagnostic("unknown-keyword", f"unknown keyword {head.text!r}",
                                    head.line, head.column))
        self.advance()
        stmt = _Statement(head.text, head)
        if head.text == "network":
            stmt.id_token = self.match_identifier()
        elif head.text == "edge":
            stmt.id_token = self.match_identifier()
            self.match("ARROW")
            stmt.target_token = self.match_identifier()
            kind_tok = self.match("IDENT")
            if kind_tok.text not in EDGE_KINDS:
                raise _Abort(Diagnostic("unknown-keyword",
                                        f"expected 'activate' or 'repress', found {kind_tok.text!r}",
                                        kind_tok.line, kind_tok.column))
            stmt.kind = kind_tok.text
            self.match("LPAREN")
            if not self.peek("RPAREN"):
                self.parse_attr(stmt)
                while self.peek("COMMA"):
                    self.advance()
                    self.parse_attr(stmt)
            self.match("RPAREN")
        else:
            stmt.id_token = self.match_identifier()
            while not self.peek("EOL"):
                self.parse_attr(stmt)
        self.match("EOL")
        if stmt.keyword != "network":
            self.check_attrs(stmt)
        return stmt

    def parse_attr(self, stmt: _Statement) -> None:
        key = self.match("IDENT")
        self.match("EQUALS")
        tok = self.nt
        if tok.kind == "NUMBER":
            self.advance()
            value = float(tok.text)
            if not math.isfinite(value):
                raise _Abort(Diagnostic("number-range", f"number {tok.text} is out of range",
                                        tok.line, tok.column))
            attr = _Attr(value, False, tok)
        elif tok.kind == "IDENT":
            self.advance()
            attr = _Attr(tok.text, True, tok)
        else:
            raise _Abort(Diagnostic("syntax-error",
                                    f"expected number or identifier, encountered {_TOKEN_NAMES[tok.kind]} instead",
                                    tok.line, tok.column))
        if key.text in stmt.attrs:
            raise _Abort(Diagnostic("duplicate-attribute", f"attribute {key.text!r} given twice",
                                    key.line, key.column))
        required, optional = _STATEMENT_ATTRS[stmt.keyword]
        if key.text not in required | optional:
            raise _Abort(Diagnostic("unknown-attribute",
                                    f"{stmt.keyword} does not take attribute {key.text!r}",
                                    key.line, key.column))
        stmt.attrs[key.text] = attr

    def check_attrs(self, stmt: _Statement) -> None:
        required, _ = _STATEMENT_ATTRS[stmt.keyword]
        missing = sorted(required - set(stmt.attrs))
        if missing:
            raise _Abort(Diagnostic("missing-attribute",
                                    f"{stmt.keyword} {stmt.id_token.text!r} is missing {', '.join(missing)}",
                                    stmt.token.line, stmt.token.column))


# =============================================================================
# SEMANTIC CHECKS
# =============================================================================

class _Builder:
    """Turns parsed statements into a RawNetwork, collecting diagnostics."""

    def __init__(self):
        self.diags: List[Diagnostic] = []
        self.network_tok: Optional[Token] = None
        self.genes: List[GeneDecl] = []
        self.inputs: List[InputDecl] = []
        self.params: List[ParamDecl] = []
        self.edges: List[Tuple[_Statement, EdgeDecl]] = []
        self.declared: Dict[str, Token] = {}

    def error(self, code: str, message: str, tok: Token) -> None:
        self.diags.append(Diagnostic(code, message, tok.line, tok.column))

    def number(self, stmt: _Statement, key: str, positive: bool = False,
               nonnegative: bool = False) -> Optional[float]:
        attr = stmt.attrs.get(key)
        if attr is None:
            return None
        if attr.is_ident:
            self.error("type-error", f"{key} must be a number, found {attr.value!r}", attr.token)
            return None
        if positive and attr.value <= 0.0:
            self.error("non-positive", f"{key} must be positive, found {attr.token.text}", attr.token)
        if nonnegative and attr.value < 0.0:
            self.error("negative", f"{key} must be nonnegative, found {attr.token.text}", attr.token)
        return attr.value

    def declare(self, tok: Token) -> None:
        if tok.text in self.declared:
            first = self.declared[tok.text]
            self.error("duplicate-identifier",
                       f"{tok.text!r} already declared at {first.line}:{first.column}", tok)
        else:
            self.declared[tok.text] = tok

    def add(self, stmt: _Statement) -> None:
        kw = stmt.keyword
        if kw == "network":
            if self.network_tok is not None:
                self.error("duplicate-network", "network name given twice", stmt.token)
            else:
                self.network_tok = stmt.id_token
            return
        if kw != "edge":
            self.declare(stmt.id_token)
        ident = stmt.id_token.text
        if kw == "gene":
            k_max = self.number(stmt, "max", positive=True)
            degrade = self.number(stmt, "degrade", positive=True)
            combine = "sum"
            if "combine" in stmt.attrs:
                attr = stmt.attrs["combine"]
                if not attr.is_ident or attr.value not in COMBINE_MODES:
                    self.error("bad-value", "combine must be 'sum' or 'product'", attr.token)
                else:
                    combine = attr.value
            self.genes.append(GeneDecl(ident, k_max, degrade, combine))
        elif kw == "input":
            attr = stmt.attrs["signal"]
            if attr.is_ident:
                signal: Value = Ref(attr.value)
            else:
                signal = self.number(stmt, "signal", nonnegative=True)
            self.inputs.append(InputDecl(ident, signal))
        elif kw == "param":
            default = self.number(stmt, "default")
            lo = self.number(stmt, "min")
            hi = self.number(stmt, "max")
            if lo is not None and hi is not None and lo > hi:
                self.error("bad-range", f"param {ident!r} has min > max", stmt.id_token)
            elif default is not None and ((lo is not None and default < lo)
                                          or (hi is not None and default > hi)):
                self.error("bad-range", f"param {ident!r} default lies outside its range",
                           stmt.attrs["default"].token)
            self.params.append(ParamDecl(ident, default, lo, hi))
        else:
            values = {}
            for key in ("beta", "K", "exp"):
                attr = stmt.attrs[key]
                if attr.is_ident:
                    values[key] = Ref(attr.value)
                else:
                    values[key] = self.number(stmt, key, positive=(key != "exp"),
                                              nonnegative=(key == "exp"))
            decl = EdgeDecl(stmt.id_token.text, stmt.target_token.text, stmt.kind,
                            values["beta"], values["K"], values["exp"])
            self.edges.append((stmt, decl))

    def finish(self) -> RawNetwork:
        if self.network_tok is None:
            self.diags.append(Diagnostic("missing-network", "missing 'network NAME' statement", 1, 1))
        nodes = {g.id for g in self.genes} | {i.id for i in self.inputs}
        params = {p.id for p in self.params}
        for stmt, decl in self.edges:
            for tok in (stmt.id_token, stmt.target_token):
                if tok.text not in nodes:
                    self.error("dangling-endpoint",
                               f"dangling edge endpoint {tok.text!r} (no such gene or input)", tok)
            for key in ("beta", "K", "exp"):
                attr = stmt.attrs[key]
                if attr.is_ident and attr.value not in params:
                    self.error("unknown-parameter", f"unknown parameter {attr.value!r}", attr.token)
        if self.diags:
            raise NetworkSyntaxError(sorted(self.diags, key=lambda d: (d.line, d.column)))
        return RawNetwork(
            name=self.network_tok.text,
            genes=tuple(self.genes),
            inputs=tuple(self.inputs),
            edges=tuple(decl for _, decl in self.edges),
            params=tuple(self.params),
        )


def parse_network(src: str) -> RawNetwork:
    """
    Parse .grn text into a RawNetwork.

    Lines are counted on LF only; a trailing CR is dropped, so CRLF files
    parse the same.

    Args:
        src: The network source text.

    Returns:
        RawNetwork with genes, inputs, params and edges in source order.

    Raises:
        NetworkSyntaxError: carrying every diagnostic, sorted by position.
    """
    builder = _Builder()
    lines = [line[:-1] if line.endswith("\r") else line for line in src.split("\n")]
    for line_no, text in enumerate(lines, start=1):
        try:
            stmt = _LineParser(_tokenize(text, line_no)).parse_statement()
        except _Abort as abort:
            builder.diags.append(abort.diagnostic)
            continue
        if stmt is not None:
            builder.add(stmt)
    return builder.finish()


def load_network(path) -> RawNetwork:
    """Read and parse a .grn file."""
    data = Path(path).read_bytes()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        line = data[:exc.start].count(b"\n") + 1
        raise NetworkSyntaxError([Diagnostic("encoding", "file is not valid UTF-8", line, 1)]) from exc
    return parse_network(text)


# =============================================================================
# FORMATTER
# =============================================================================

def format_number(value: float) -> str:
    """Shortest text that reads back to exactly `value`."""
    if float(value).is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(float(value))


def _fmt(value: Value) -> str:
    return value.name if isinstance(value, Ref) else format_number(value)


def format_network(net: RawNetwork) -> str:
    """
    Render a RawNetwork as canonical .grn text.

    Args:
        net: The network to print.

    Returns:
        str: genes, inputs, params, then edges, one declaration per line.
            Param references are kept symbolic.
    """
    lines = [f"network {net.name}"]
    for g in net.genes:
        line = f"gene {g.id} max={format_number(g.k_max)} degrade={format_number(g.degrade)}"
        if g.combine != "sum":
            line += f" combine={g.combine}"
        lines.append(line)
    for i in net.inputs:
        lines.append(f"input {i.id} signal={_fmt(i.signal)}")
    for p in net.params:
        line = f"param {p.id} default={format_number(p.default)}"
        if p.min is not None:
            line += f" min={format_number(p.min)}"
        if p.max is not None:
            line += f" max={format_number(p.max)}"
        lines.append(line)
    for e in net.edges:
        lines.append(f"edge {e.source} -> {e.target} {e.kind}"
                     f"(beta={_fmt(e.beta)}, K={_fmt(e.K)}, exp={_fmt(e.exp)})")
    return "\n".join(lines) + "\n"
