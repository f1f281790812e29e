"""Reader and printer for the s-expression surface syntax.

The dialect is the one used by all bundled world models: ``;`` line comments,
``'x`` quote sugar, ``true``/``false`` (also ``#t``/``#f``) booleans, a single
64-bit float numeric type, and square brackets as interchangeable list
delimiters. Comments are kept on the parsed unit because prompt assembly needs
the model text verbatim.
"""

from __future__ import annotations

import re

from .errors import ChurchParseError

__all__ = [
    "SExpr",
    "Sym",
    "Num",
    "Bool",
    "Str",
    "SList",
    "SourceUnit",
    "Comment",
    "parse",
    "parse_one",
    "print_form",
    "strip_prompt_forms",
]

_SYMBOL_RE = re.compile(r"[^\s()\[\]'\";]+")
_NUMBER_RE = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


class SExpr:
    """Base class; equality is structural and ignores source spans."""

    __slots__ = ("span",)


class Sym(SExpr):
    __slots__ = ("name",)

    def __init__(self, name, span=(0, 0)):
        self.name = name
        self.span = span

    def __eq__(self, other):
        return type(other) is Sym and other.name == self.name

    def __hash__(self):
        return hash(("sym", self.name))

    def __repr__(self):
        return f"Sym({self.name!r})"


class Num(SExpr):
    __slots__ = ("value",)

    def __init__(self, value, span=(0, 0)):
        self.value = float(value)
        self.span = span

    def __eq__(self, other):
        return type(other) is Num and other.value == self.value

    def __hash__(self):
        return hash(("num", self.value))

    def __repr__(self):
        return f"Num({self.value!r})"


class Bool(SExpr):
    __slots__ = ("value",)

    def __init__(self, value, span=(0, 0)):
        self.value = bool(value)
        self.span = span

    def __eq__(self, other):
        return type(other) is Bool and other.value == self.value

    def __hash__(self):
        return hash(("bool", self.value))

    def __repr__(self):
        return f"Bool({self.value!r})"


class Str(SExpr):
    __slots__ = ("value",)

    def __init__(self, value, span=(0, 0)):
        self.value = value
        self.span = span

    def __eq__(self, other):
        return type(other) is Str and other.value == self.value

    def __hash__(self):
        return hash(("str", self.value))

    def __repr__(self):
        return f"Str({self.value!r})"


class SList(SExpr):
    __slots__ = ("items",)

    def __init__(self, items, span=(0, 0)):
        self.items = list(items)
        self.span = span

    def __eq__(self, other):
        return type(other) is SList and other.items == self.items

    def __hash__(self):
        return hash(("list", tuple(self.items)))

    def __len__(self):
        return len(self.items)

    def __getitem__(self, i):
        return self.items[i]

    def __iter__(self):
        return iter(self.items)

    def __repr__(self):
        return f"SList({self.items!r})"


class Comment:
    __slots__ = ("text", "span")

    def __init__(self, text, span):
        self.text = text
        self.span = span

    def __repr__(self):
        return f"Comment({self.text!r})"


class SourceUnit:
    """All top-level forms of one source text, plus its line comments."""

    __slots__ = ("forms", "comments", "text")

    def __init__(self, forms, comments, text=""):
        self.forms = list(forms)
        self.comments = list(comments)
        self.text = text

    def __repr__(self):
        return f"SourceUnit({len(self.forms)} forms, {len(self.comments)} comments)"


def _line_col(text, pos):
    line = text.count("\n", 0, pos) + 1
    last = text.rfind("\n", 0, pos)
    return line, pos - last


class _Reader:
    def __init__(self, text):
        self.text = text
        self.pos = 0
        self.comments = []

    def error(self, message, pos=None):
        line, col = _line_col(self.text, self.pos if pos is None else pos)
        return ChurchParseError(message, line, col)

    def skip_blank(self):
        text, n = self.text, len(self.text)
        while self.pos < n:
            ch = text[self.pos]
            if ch in " \t\r\n":
                self.pos += 1
            elif ch == ";":
                start = self.pos
                end = text.find("\n", start)
                if end == -1:
                    end = n
                self.comments.append(Comment(text[start:end], (start, end)))
                self.pos = end
            else:
                return

    def read_form(self):
        self.skip_blank()
        if self.pos >= len(self.text):
            raise self.error("unexpected end of input")
        ch = self.text[self.pos]
        if ch in "([":
            return self.read_list(")" if ch == "(" else "]")
        if ch in ")]":
            raise self.error(f"unexpected '{ch}'")
        if ch == "'":
            start = self.pos
            self.pos += 1
            quoted = self.read_form()
            span = (start, quoted.span[1])
            return SList([Sym("quote", (start, start + 1)), quoted], span)
        if ch == '"':
            return self.read_string()
        return self.read_atom()

    def read_list(self, closer):
        start = self.pos
        self.pos += 1
        items = []
        while True:
            self.skip_blank()
            if self.pos >= len(self.text):
                raise self.error("unbalanced parenthesis: missing closer", start)
            ch = self.text[self.pos]
            if ch in ")]":
                if ch != closer:
                    raise self.error(f"mismatched delimiter: expected '{closer}', found '{ch}'")
                self.pos += 1
                return SList(items, (start, self.pos))
            items.append(self.read_form())

    def read_string(self):
        start = self.pos
        self.pos += 1
        out = []
        text, n = self.text, len(self.text)
        while self.pos < n:
            ch = text[self.pos]
            if ch == "\\":
                if self.pos + 1 >= n:
                    raise self.error("unterminated string escape", start)
                nxt = text[self.pos + 1]
                if nxt not in '"\\':
                    raise self.error(f"unsupported string escape '\\{nxt}'")
                out.append(nxt)
                self.pos += 2
            elif ch == '"':
                self.pos += 1
                return Str("".join(out), (start, self.pos))
            else:
                out.append(ch)
                self.pos += 1
        raise self.error("unterminated string literal", start)

    def read_atom(self):
        start = self.pos
        m = _SYMBOL_RE.match(self.text, start)
        if m is None:
            raise self.error(f"illegal character {self.text[start]!r}")
        token = m.group(0)
        self.pos = m.end()
        span = (start, self.pos)
        if token in ("true", "#t"):
            return Bool(True, span)
        if token in ("false", "#f"):
            return Bool(False, span)
        if _NUMBER_RE.match(token):
            return Num(float(token), span)
        return Sym(token, span)


def parse(text: str) -> SourceUnit:
    """Parse UTF-8 source text into all of its top-level forms."""
    reader = _Reader(text)
    forms = []
    while True:
        reader.skip_blank()
        if reader.pos >= len(text):
            break
        forms.append(reader.read_form())
    return SourceUnit(forms, reader.comments, text)


def parse_one(text: str) -> SExpr:
    """Parse text expected to hold exactly one form."""
    unit = parse(text)
    if len(unit.forms) != 1:
        raise ChurchParseError(f"expected exactly one form, found {len(unit.forms)}", 1, 1)
    return unit.forms[0]


def _format_number(value: float) -> str:
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def print_form(expr: SExpr) -> str:
    """Canonical single-line rendering; ``parse(print_form(e))`` equals ``e``."""
    if type(expr) is Sym:
        return expr.name
    if type(expr) is Num:
        return _format_number(expr.value)
    if type(expr) is Bool:
        return "true" if expr.value else "false"
    if type(expr) is Str:
        escaped = expr.value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    items = expr.items
    if len(items) == 2 and type(items[0]) is Sym and items[0].name == "quote":
        return "'" + print_form(items[1])
    return "(" + " ".join(print_form(item) for item in items) + ")"


_TAG_RE = re.compile(r"^;+\s*(Condition|Query|Define|ConstructFragment)\s*:\s*(.*?)\s*$")


def strip_prompt_forms(unit: SourceUnit):
    """Pair ``;; Tag: text`` comments with the top-level forms that follow them.

    Returns (tag, comment text, forms) triples in source order. A tagged
    comment claims every form up to the next tagged comment, so a single
    utterance may carry several forms (a define plus a trailing condition).
    Raises if a tagged comment has no following form.
    """
    tagged = []
    for comment in unit.comments:
        m = _TAG_RE.match(comment.text)
        if m:
            tagged.append((comment.span[0], m.group(1), m.group(2)))
    triples = []
    for i, (start, tag, text) in enumerate(tagged):
        end = tagged[i + 1][0] if i + 1 < len(tagged) else len(unit.text) + 1
        forms = [f for f in unit.forms if start < f.span[0] < end]
        if not forms:
            raise ChurchParseError(
                f"tagged comment '{tag}: {text}' has no following form",
                *_line_col(unit.text, start),
            )
        triples.append((tag, text, forms))
    return triples
