"""Formula AST, recursive-descent parser and canonical printer.

Grammar::

    formula  := or ;
    or       := and { "|" and } ;
    and      := unary { "&" unary } ;
    unary    := "!" unary | "EX" unary | "EF" unary | "EG" unary | primary ;
    primary  := "border" | atom | call | "(" formula ")" ;
    atom     := "intensity" cmp INT | "cluster" "==" INT ;
    cmp      := "<" | "<=" | ">" | ">=" | "==" ;
    call     := "connect" "(" formula "," [ REAL "," ] formula ")"
              | "str" "(" REAL "," formula ")"
              | "increase" "(" formula "," formula ")"
              | "background" "(" formula ")"
              | "brain" "(" formula "," formula ")" ;

Spec files hold ``name = formula ;`` bindings and ``check name`` lines.
``//`` starts a comment running to the end of the line.
"""
import re
from dataclasses import dataclass
from typing import Optional, Union

from .errors import OutOfRangeLiteral, ParseError, UnknownIdentifier

CMP_OPS = ("<", "<=", ">", ">=", "==")
MAX_DEPTH = 200


@dataclass(frozen=True)
class IntensityCmp:
    op: str
    value: int


@dataclass(frozen=True)
class ClusterEq:
    level: int


@dataclass(frozen=True)
class Border:
    pass


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class EX:
    arg: "Formula"


@dataclass(frozen=True)
class EF:
    arg: "Formula"


@dataclass(frozen=True)
class EG:
    arg: "Formula"


@dataclass(frozen=True)
class Connect:
    left: "Formula"
    threshold: Optional[float]
    right: "Formula"


@dataclass(frozen=True)
class Str:
    distance: float
    arg: "Formula"


@dataclass(frozen=True)
class Increase:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Background:
    arg: "Formula"


@dataclass(frozen=True)
class Brain:
    left: "Formula"
    right: "Formula"


Formula = Union[IntensityCmp, ClusterEq, Border, Not, And, Or, EX, EF, EG,
                Connect, Str, Increase, Background, Brain]

KEYWORDS = {"border", "intensity", "cluster", "connect", "str", "increase",
            "background", "brain", "EX", "EF", "EG", "check"}

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+|//[^\n]*)
  | (?P<num>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|>=|==|[<>!&|(),;=])
""", re.VERBOSE)


@dataclass
class Token:
    kind: str  # "num", "ident", "op", "eof"
    text: str
    offset: int


def _position(text, offset):
    line = text.count("\n", 0, offset) + 1
    column = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, column


def _error(cls, text, offset, message, expected=None, found=None):
    line, column = _position(text, offset)
    return cls(message, line, column, offset, expected, found)


def tokenize(text):
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise _error(ParseError, text, pos, f"unexpected character {text[pos]!r}",
                         expected="token", found=text[pos])
        if m.lastgroup != "ws":
            tokens.append(Token(m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(Token("eof", "", n))
    return tokens


def _decode(source):
    if isinstance(source, (bytes, bytearray)):
        try:
            return bytes(source).decode("utf-8")
        except UnicodeDecodeError as exc:
            prefix = bytes(source[:exc.start]).decode("utf-8")
            raise _error(ParseError, prefix, len(prefix), "invalid UTF-8",
                         expected="UTF-8 text", found=repr(source[exc.start:exc.start + 1]))
    return source


class Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0
        self.depth = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def fail(self, expected, cls=ParseError, tok=None):
        tok = tok or self.tok
        found = tok.text or "end of input"
        return _error(cls, self.text, tok.offset, f"expected {expected}, found {found!r}",
                      expected=expected, found=found)

    def accept(self, text):
        if self.tok.kind in ("op", "ident") and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text):
        if not self.accept(text):
            raise self.fail(repr(text))

    def number(self, what):
        tok = self.tok
        if tok.kind != "num":
            raise self.fail(what)
        self.i += 1
        return tok

    def integer(self, what, lo=0, hi=255):
        tok = self.number(what)
        if not re.fullmatch(r"\d+", tok.text):
            raise self.fail(f"integer {what}", tok=tok)
        value = int(tok.text)
        if not lo <= value <= hi:
            raise _error(OutOfRangeLiteral, self.text, tok.offset,
                         f"{what} {value} outside [{lo}, {hi}]", expected=f"[{lo}, {hi}]",
                         found=tok.text)
        return value

    def real(self, what, check):
        tok = self.number(what)
        value = float(tok.text)
        if not check(value):
            raise _error(OutOfRangeLiteral, self.text, tok.offset, f"{what} {tok.text} out of range",
                         expected=what, found=tok.text)
        return value

    def formula(self):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise self.fail("shallower nesting")
        try:
            node = self.conj()
            while self.accept("|"):
                node = Or(node, self.conj())
            return node
        finally:
            self.depth -= 1

    def conj(self):
        node = self.unary()
        while self.accept("&"):
            node = And(node, self.unary())
        return node

    def unary(self):
        for text, cls in (("!", Not), ("EX", EX), ("EF", EF), ("EG", EG)):
            if self.accept(text):
                self.depth += 1
                if self.depth > MAX_DEPTH:
                    raise self.fail("shallower nesting")
                try:
                    return cls(self.unary())
                finally:
                    self.depth -= 1
        return self.primary()

    def primary(self):
        tok = self.tok
        if self.accept("("):
            node = self.formula()
            self.expect(")")
            return node
        if tok.kind != "ident":
            raise self.fail("formula")
        name = tok.text
        if name not in KEYWORDS or name == "check":
            raise self.fail("formula", cls=UnknownIdentifier)
        self.i += 1
        if name == "border":
            return Border()
        if name == "intensity":
            op = self.tok
            if op.kind != "op" or op.text not in CMP_OPS:
                raise self.fail("comparison operator")
            self.i += 1
            return IntensityCmp(op.text, self.integer("intensity"))
        if name == "cluster":
            self.expect("==")
            return ClusterEq(self.integer("cluster level"))
        self.expect("(")
        if name == "connect":
            left = self.formula()
            self.expect(",")
            threshold = None
            if self.tok.kind == "num":
                threshold = self.real("threshold in [0, 1]", lambda v: 0.0 <= v <= 1.0)
                self.expect(",")
            node = Connect(left, threshold, self.formula())
        elif name == "str":
            d = self.real("distance > 0", lambda v: v > 0 and v != float("inf"))
            self.expect(",")
            node = Str(d, self.formula())
        elif name == "increase":
            left = self.formula()
            self.expect(",")
            node = Increase(left, self.formula())
        elif name == "background":
            node = Background(self.formula())
        else:  # brain
            left = self.formula()
            self.expect(",")
            node = Brain(left, self.formula())
        self.expect(")")
        return node

    def end(self):
        if self.tok.kind != "eof":
            raise self.fail("end of input")


def parse(source):
    """Parse one formula from text (or UTF-8 bytes)."""
    p = Parser(_decode(source))
    node = p.formula()
    p.end()
    return node


@dataclass
class SpecFile:
    bindings: dict
    checks: list

    def __getitem__(self, name):
        return self.bindings[name]


def parse_spec(source):
    """Parse a spec file of ``name = formula ;`` bindings and ``check name`` lines.

    Names may not be keywords; ``check`` must name an earlier binding. The
    trailing ``;`` after a check is optional.
    """
    p = Parser(_decode(source))
    bindings, checks = {}, []
    while p.tok.kind != "eof":
        tok = p.tok
        if tok.kind == "ident" and tok.text == "check":
            p.i += 1
            target = p.tok
            if target.kind != "ident":
                raise p.fail("binding name")
            if target.text not in bindings:
                raise p.fail("a bound name", cls=UnknownIdentifier)
            p.i += 1
            checks.append(target.text)
            p.accept(";")
            continue
        if tok.kind != "ident" or tok.text in KEYWORDS:
            raise p.fail("binding name or 'check'")
        p.i += 1
        p.expect("=")
        bindings[tok.text] = p.formula()
        p.expect(";")
    return SpecFile(bindings, checks)


def _real(v):
    return repr(float(v))


def to_source(f):
    """Canonical, fully parenthesized rendering; ``parse(to_source(f)) == f``."""
    if isinstance(f, Border):
        return "border"
    if isinstance(f, IntensityCmp):
        return f"intensity {f.op} {f.value}"
    if isinstance(f, ClusterEq):
        return f"cluster == {f.level}"
    if isinstance(f, Not):
        return "!" + _operand(f.arg)
    if isinstance(f, (EX, EF, EG)):
        return f"{type(f).__name__} " + _operand(f.arg)
    if isinstance(f, And):
        return f"({to_source(f.left)} & {to_source(f.right)})"
    if isinstance(f, Or):
        return f"({to_source(f.left)} | {to_source(f.right)})"
    if isinstance(f, Connect):
        if f.threshold is None:
            return f"connect({to_source(f.left)}, {to_source(f.right)})"
        return f"connect({to_source(f.left)}, {_real(f.threshold)}, {to_source(f.right)})"
    if isinstance(f, Str):
        return f"str({_real(f.distance)}, {to_source(f.arg)})"
    if isinstance(f, Increase):
        return f"increase({to_source(f.left)}, {to_source(f.right)})"
    if isinstance(f, Background):
        return f"background({to_source(f.arg)})"
    if isinstance(f, Brain):
        return f"brain({to_source(f.left)}, {to_source(f.right)})"
    raise TypeError(f"not a formula node: {f!r}")


def _operand(f):
    # atoms with an infix comparison need parentheses under a prefix operator
    text = to_source(f)
    if isinstance(f, (IntensityCmp, ClusterEq)):
        return f"({text})"
    return text
