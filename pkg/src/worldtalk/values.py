"""Runtime values for the evaluator.

Numbers are Python floats, booleans are Python bools, and strings are plain
``str``; symbols get their own class so ``'mug`` never compares equal to
``"mug"``. Proper lists are Pair chains ending in NIL; ``pair`` may build
dotted pairs whose tail is any value.
"""

from __future__ import annotations

from .sexpr import Bool, Num, SExpr, Str, Sym

__all__ = [
    "Symbol",
    "NIL",
    "Pair",
    "Closure",
    "Builtin",
    "MemoizedFn",
    "is_true",
    "church_equal",
    "freeze",
    "datum_from_sexpr",
    "print_value",
    "iter_list",
    "list_to_pairs",
]

_INTERN = {}


class Symbol:
    __slots__ = ("name",)

    def __new__(cls, name):
        sym = _INTERN.get(name)
        if sym is None:
            sym = object.__new__(cls)
            sym.name = name
            _INTERN[name] = sym
        return sym

    def __eq__(self, other):
        return self is other or (type(other) is Symbol and other.name == self.name)

    def __hash__(self):
        return hash(("symbol", self.name))

    def __repr__(self):
        return f"Symbol({self.name!r})"

    def __reduce__(self):
        return (Symbol, (self.name,))


class _Nil:
    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = object.__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NIL"

    def __reduce__(self):
        return (_Nil, ())


NIL = _Nil()


class Pair:
    # _frozen caches the freeze() form; cells are immutable so it never stales.
    __slots__ = ("head", "tail", "_frozen")

    def __init__(self, head, tail):
        self.head = head
        self.tail = tail
        self._frozen = None

    def __repr__(self):
        return f"Pair({self.head!r}, {self.tail!r})"


class Closure:
    __slots__ = ("params", "run_body", "frame", "name", "extra_slots")

    def __init__(self, params, run_body, frame, name, extra_slots):
        self.params = params
        self.run_body = run_body
        self.frame = frame
        self.name = name
        self.extra_slots = extra_slots

    def __repr__(self):
        return f"<procedure {self.name or 'lambda'}>"


class Builtin:
    __slots__ = ("name", "fn")

    def __init__(self, name, fn):
        self.name = name
        self.fn = fn

    def __repr__(self):
        return f"<builtin {self.name}>"


class MemoizedFn:
    __slots__ = ("inner", "memo_id")

    def __init__(self, inner, memo_id):
        self.inner = inner
        self.memo_id = memo_id

    def __repr__(self):
        return f"<mem {self.inner!r}>"


def is_true(value) -> bool:
    """Scheme truthiness: everything except boolean false counts as true."""
    return value is not False


def church_equal(a, b) -> bool:
    """Deep structural equality (``equal?``)."""
    while True:
        if a is b:
            return True
        ta, tb = type(a), type(b)
        if ta is not tb:
            # bool is not float, Symbol is not str, etc.
            return False
        if ta is float or ta is bool or ta is str:
            return a == b
        if ta is Symbol:
            return a.name == b.name
        if ta is Pair:
            if not church_equal(a.head, b.head):
                return False
            a, b = a.tail, b.tail
            continue
        return a is b


def freeze(value):
    """A hashable stand-in for a value, used as a memoization key."""
    t = type(value)
    if t is float or t is bool or t is str or t is Symbol or t is _Nil:
        return value
    if t is Pair:
        frozen = value._frozen
        if frozen is None:
            frozen = ("pair", freeze(value.head), freeze(value.tail))
            value._frozen = frozen
        return frozen
    # Functions and other opaque values memoize by identity.
    return ("id", id(value))


def datum_from_sexpr(expr: SExpr):
    """Convert quoted syntax to runtime data (symbols, numbers, lists)."""
    t = type(expr)
    if t is Sym:
        return Symbol(expr.name)
    if t is Num:
        return expr.value
    if t is Bool:
        return expr.value
    if t is Str:
        return expr.value
    out = NIL
    for item in reversed(expr.items):
        out = Pair(datum_from_sexpr(item), out)
    return out


def iter_list(value):
    """Iterate over a proper list; raises TypeError on a dotted tail."""
    while value is not NIL:
        if type(value) is not Pair:
            raise TypeError(f"not a proper list: {print_value(value)}")
        yield value.head
        value = value.tail


def list_to_pairs(items):
    out = NIL
    for item in reversed(items):
        out = Pair(item, out)
    return out


def _format_number(value: float) -> str:
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def print_value(value) -> str:
    """Render a value the way the language prints data."""
    t = type(value)
    if t is bool:
        return "true" if value else "false"
    if t is float:
        return _format_number(value)
    if t is Symbol:
        return value.name
    if t is str:
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if t is _Nil:
        return "()"
    if t is Pair:
        parts = []
        node = value
        while type(node) is Pair:
            parts.append(print_value(node.head))
            node = node.tail
        if node is NIL:
            return "(" + " ".join(parts) + ")"
        return "(" + " ".join(parts) + " . " + print_value(node) + ")"
    return repr(value)
