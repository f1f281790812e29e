"""The builtin function catalog.

Everything the bundled world models call that is not a special form lives
here: arithmetic, list machinery, higher-order helpers, string utilities, the
stochastic primitives, and the memoization/gensym plumbing. Underscore and
hyphen spellings are registered for the few names the sources write both ways.
"""

from __future__ import annotations

import math

from .errors import ArityError, ChurchEvalError
from .runtime import apply_function
from .values import (
    NIL,
    Builtin,
    MemoizedFn,
    Pair,
    Symbol,
    church_equal,
    is_true,
    iter_list,
    list_to_pairs,
    print_value,
)

BUILTINS = {}


def _register(name, fn):
    BUILTINS[name] = Builtin(name, fn)


def builtin(*names):
    def wrap(fn):
        for name in names:
            _register(name, fn)
        return fn

    return wrap


def _need(args, n, name):
    if len(args) != n:
        raise ArityError(f"{name} expects {n} argument(s), got {len(args)}")


def _number(x, name):
    if type(x) is float:
        return x
    if type(x) is bool:
        raise ChurchEvalError(f"{name} expects a number, got {print_value(x)}")
    try:
        return float(x)
    except (TypeError, ValueError):
        raise ChurchEvalError(f"{name} expects a number, got {print_value(x)}") from None


# --- arithmetic and comparison ---------------------------------------------


@builtin("+")
def _add(args, world):
    try:
        return math.fsum(args) if len(args) > 2 else float(sum(args))
    except TypeError:
        raise ChurchEvalError("+ expects numbers") from None


@builtin("-")
def _sub(args, world):
    if not args:
        raise ArityError("- expects at least 1 argument")
    try:
        if len(args) == 1:
            return -args[0]
        acc = args[0]
        for x in args[1:]:
            acc = acc - x
        return acc
    except TypeError:
        raise ChurchEvalError("- expects numbers") from None


@builtin("*")
def _mul(args, world):
    try:
        acc = 1.0
        for x in args:
            acc = acc * x
        return acc
    except TypeError:
        raise ChurchEvalError("* expects numbers") from None


@builtin("/")
def _div(args, world):
    if len(args) < 2:
        raise ArityError("/ expects at least 2 arguments")
    try:
        acc = args[0]
        for x in args[1:]:
            acc = acc / x
        return acc
    except TypeError:
        raise ChurchEvalError("/ expects numbers") from None
    except ZeroDivisionError:
        raise ChurchEvalError("division by zero") from None


def _chain(name, op):
    def fn(args, world):
        if len(args) < 2:
            raise ArityError(f"{name} expects at least 2 arguments")
        try:
            prev = args[0]
            for x in args[1:]:
                if not op(prev, x):
                    return False
                prev = x
            return True
        except TypeError:
            raise ChurchEvalError(f"{name} expects numbers") from None

    return fn


_register(">", _chain(">", lambda a, b: a > b))
_register("<", _chain("<", lambda a, b: a < b))
_register(">=", _chain(">=", lambda a, b: a >= b))
_register("<=", _chain("<=", lambda a, b: a <= b))
_register("leq", _chain("leq", lambda a, b: a <= b))
_register("=", _chain("=", lambda a, b: a == b))


@builtin("abs")
def _abs(args, world):
    _need(args, 1, "abs")
    return abs(_number(args[0], "abs"))


@builtin("expt")
def _expt(args, world):
    _need(args, 2, "expt")
    return _number(args[0], "expt") ** _number(args[1], "expt")


@builtin("floor")
def _floor(args, world):
    _need(args, 1, "floor")
    return float(math.floor(_number(args[0], "floor")))


@builtin("min")
def _min(args, world):
    if not args:
        raise ArityError("min expects at least 1 argument")
    return min(_number(x, "min") for x in args)


@builtin("max")
def _max(args, world):
    if not args:
        raise ArityError("max expects at least 1 argument")
    return max(_number(x, "max") for x in args)


@builtin("not")
def _not(args, world):
    _need(args, 1, "not")
    return args[0] is False


# --- pairs and lists ---------------------------------------------------------


@builtin("pair", "cons")
def _pair(args, world):
    _need(args, 2, "pair")
    return Pair(args[0], args[1])


@builtin("list")
def _list(args, world):
    return list_to_pairs(args)


def _head(x, name):
    if type(x) is Pair:
        return x.head
    raise ChurchEvalError(f"{name} expects a pair, got {print_value(x)}")


def _tail(x, name):
    if type(x) is Pair:
        return x.tail
    raise ChurchEvalError(f"{name} expects a pair, got {print_value(x)}")


@builtin("first", "car")
def _first(args, world):
    _need(args, 1, "first")
    return _head(args[0], "first")


@builtin("rest", "cdr")
def _rest(args, world):
    _need(args, 1, "rest")
    return _tail(args[0], "rest")


@builtin("second")
def _second(args, world):
    _need(args, 1, "second")
    return _head(_tail(args[0], "second"), "second")


@builtin("third")
def _third(args, world):
    _need(args, 1, "third")
    return _head(_tail(_tail(args[0], "third"), "third"), "third")


@builtin("last")
def _last(args, world):
    _need(args, 1, "last")
    node = args[0]
    if type(node) is not Pair:
        raise ChurchEvalError("last expects a non-empty list")
    while type(node.tail) is Pair:
        node = node.tail
    return node.head


@builtin("append")
def _append(args, world):
    items = []
    for lst in args:
        items.extend(iter_list(lst))
    return list_to_pairs(items)


@builtin("length")
def _length(args, world):
    _need(args, 1, "length")
    n = 0
    for _ in iter_list(args[0]):
        n += 1
    return float(n)


@builtin("null?")
def _null(args, world):
    _need(args, 1, "null?")
    return args[0] is NIL


@builtin("list-ref")
def _list_ref(args, world):
    # 0-indexed.
    _need(args, 2, "list-ref")
    node, i = args[0], int(_number(args[1], "list-ref"))
    for _ in range(i):
        node = _tail(node, "list-ref")
    return _head(node, "list-ref")


@builtin("list-elt")
def _list_elt(args, world):
    # 1-indexed.
    _need(args, 2, "list-elt")
    node, i = args[0], int(_number(args[1], "list-elt"))
    if i < 1:
        raise ChurchEvalError(f"list-elt index must be >= 1, got {i}")
    for _ in range(i - 1):
        node = _tail(node, "list-elt")
    return _head(node, "list-elt")


@builtin("member")
def _member(args, world):
    _need(args, 2, "member")
    node = args[1]
    while node is not NIL:
        if type(node) is not Pair:
            raise ChurchEvalError("member expects a proper list")
        if church_equal(args[0], node.head):
            return node
        node = node.tail
    return False


@builtin("member?")
def _member_p(args, world):
    return _member(args, world) is not False


@builtin("equal?")
def _equal(args, world):
    _need(args, 2, "equal?")
    return church_equal(args[0], args[1])


@builtin("eq?")
def _eq(args, world):
    _need(args, 2, "eq?")
    a, b = args
    if type(a) is not type(b):
        return False
    if type(a) in (float, bool, str, Symbol):
        return a == b
    return a is b


@builtin("assoc")
def _assoc(args, world):
    # (assoc key alist) -> the matching pair, or false.
    _need(args, 2, "assoc")
    key = args[0]
    for entry in iter_list(args[1]):
        if type(entry) is Pair and church_equal(entry.head, key):
            return entry
    return False


@builtin("lookup")
def _lookup(args, world):
    # (lookup alist key) -> the matching pair's tail, or ().
    _need(args, 2, "lookup")
    key = args[1]
    node = args[0]
    while type(node) is Pair:
        entry = node.head
        if type(entry) is Pair and church_equal(entry.head, key):
            return entry.tail
        node = node.tail
    return NIL


@builtin("update-list")
def _update_list(args, world):
    # Copy with the 0-indexed element replaced.
    _need(args, 3, "update-list")
    items = list(iter_list(args[0]))
    i = int(_number(args[1], "update-list"))
    if not 0 <= i < len(items):
        raise ChurchEvalError(f"update-list index {i} out of range")
    items[i] = args[2]
    return list_to_pairs(items)


@builtin("shallow-flatten")
def _shallow_flatten(args, world):
    _need(args, 1, "shallow-flatten")
    items = []
    for sub in iter_list(args[0]):
        items.extend(iter_list(sub))
    return list_to_pairs(items)


@builtin("zip")
def _zip(args, world):
    _need(args, 2, "zip")
    a = list(iter_list(args[0]))
    b = list(iter_list(args[1]))
    return list_to_pairs([list_to_pairs([x, y]) for x, y in zip(a, b)])


@builtin("repeat")
def _repeat(args, world):
    _need(args, 2, "repeat")
    n = int(_number(args[0], "repeat"))
    return list_to_pairs([apply_function(args[1], [], world) for _ in range(n)])


@builtin("max_cdr", "max-cdr")
def _max_cdr(args, world):
    # The entry whose tail is maximal; first occurrence wins ties.
    _need(args, 1, "max_cdr")
    best = None
    for entry in iter_list(args[0]):
        if type(entry) is not Pair:
            raise ChurchEvalError("max_cdr expects a list of pairs")
        if best is None or entry.tail > best.tail:
            best = entry
    if best is None:
        raise ChurchEvalError("max_cdr expects a non-empty list")
    return best


# --- higher-order ------------------------------------------------------------


@builtin("map")
def _map(args, world):
    if len(args) < 2:
        raise ArityError("map expects a function and at least one list")
    fn = args[0]
    if len(args) == 2:
        return list_to_pairs([apply_function(fn, [x], world) for x in iter_list(args[1])])
    cols = [list(iter_list(lst)) for lst in args[1:]]
    return list_to_pairs([apply_function(fn, list(row), world) for row in zip(*cols)])


@builtin("filter")
def _filter(args, world):
    _need(args, 2, "filter")
    fn = args[0]
    return list_to_pairs([x for x in iter_list(args[1]) if is_true(apply_function(fn, [x], world))])


@builtin("fold")
def _fold(args, world):
    # (fold fn init lst): fn receives (element, accumulator).
    _need(args, 3, "fold")
    fn, acc = args[0], args[1]
    for x in iter_list(args[2]):
        acc = apply_function(fn, [x, acc], world)
    return acc


@builtin("apply")
def _apply(args, world):
    _need(args, 2, "apply")
    return apply_function(args[0], list(iter_list(args[1])), world)


@builtin("some")
def _some(args, world):
    _need(args, 1, "some")
    for x in iter_list(args[0]):
        if is_true(x):
            return True
    return False


@builtin("all")
def _all(args, world):
    _need(args, 1, "all")
    for x in iter_list(args[0]):
        if not is_true(x):
            return False
    return True


@builtin("sum")
def _sum(args, world):
    _need(args, 1, "sum")
    try:
        return float(sum(iter_list(args[0])))
    except TypeError:
        raise ChurchEvalError("sum expects a list of numbers") from None


# --- strings -----------------------------------------------------------------


@builtin("stringify")
def _stringify(args, world):
    _need(args, 1, "stringify")
    x = args[0]
    if type(x) is str:
        return x
    return print_value(x)


@builtin("string-length")
def _string_length(args, world):
    _need(args, 1, "string-length")
    if type(args[0]) is not str:
        raise ChurchEvalError("string-length expects a string")
    return float(len(args[0]))


@builtin("string-slice")
def _string_slice(args, world):
    if len(args) not in (2, 3):
        raise ArityError("string-slice expects 2 or 3 arguments")
    s = args[0]
    if type(s) is not str:
        raise ChurchEvalError("string-slice expects a string")
    start = int(_number(args[1], "string-slice"))
    end = int(_number(args[2], "string-slice")) if len(args) == 3 else len(s)
    return s[start:end]


@builtin("string->number")
def _string_to_number(args, world):
    _need(args, 1, "string->number")
    try:
        return float(args[0])
    except (TypeError, ValueError):
        return False


# --- stochastic primitives ---------------------------------------------------


@builtin("flip")
def _flip(args, world):
    if len(args) > 1:
        raise ArityError("flip expects 0 or 1 arguments")
    p = _number(args[0], "flip") if args else 0.5
    if not 0.0 <= p <= 1.0:
        raise ChurchEvalError(f"flip probability must be in [0, 1], got {print_value(args[0])}")
    return world.rng.flip(p)


@builtin("gaussian", "normal")
def _gaussian(args, world):
    _need(args, 2, "gaussian")
    mu = _number(args[0], "gaussian")
    sigma = _number(args[1], "gaussian")
    if sigma < 0:
        raise ChurchEvalError(f"gaussian sigma must be >= 0, got {sigma}")
    return world.rng.gaussian(mu, sigma)


@builtin("uniform")
def _uniform(args, world):
    _need(args, 2, "uniform")
    return world.rng.uniform(_number(args[0], "uniform"), _number(args[1], "uniform"))


@builtin("uniform-draw")
def _uniform_draw(args, world):
    _need(args, 1, "uniform-draw")
    items = list(iter_list(args[0]))
    if not items:
        raise ChurchEvalError("uniform-draw expects a non-empty list")
    return items[world.rng.randint_below(len(items))]


@builtin("exponential")
def _exponential(args, world):
    _need(args, 1, "exponential")
    rate = _number(args[0], "exponential")
    if rate <= 0:
        raise ChurchEvalError(f"exponential rate must be > 0, got {rate}")
    return world.rng.exponential(rate)


@builtin("bounded-geometric")
def _bounded_geometric(args, world):
    # Failures before the first success, shifted by lo and clamped to hi.
    _need(args, 3, "bounded-geometric")
    p = _number(args[0], "bounded-geometric")
    lo = _number(args[1], "bounded-geometric")
    hi = _number(args[2], "bounded-geometric")
    if not 0.0 <= p <= 1.0:
        raise ChurchEvalError(f"bounded-geometric probability must be in [0, 1], got {p}")
    if lo > hi:
        raise ChurchEvalError(f"bounded-geometric bounds are inverted: {lo} > {hi}")
    k = lo
    while k < hi and not world.rng.flip(p):
        k += 1
    return float(k)


@builtin("shuffle-unique")
def _shuffle_unique(args, world):
    _need(args, 1, "shuffle-unique")
    items = list(iter_list(args[0]))
    # Fisher-Yates on the world's stream, so permutations replay per seed.
    for i in range(len(items) - 1, 0, -1):
        j = world.rng.randint_below(i + 1)
        items[i], items[j] = items[j], items[i]
    return list_to_pairs(items)


# --- memoization and gensym --------------------------------------------------


@builtin("mem")
def _mem(args, world):
    _need(args, 1, "mem")
    return MemoizedFn(args[0], world.new_memo_id())


@builtin("make-gensym", "make_gensym")
def _make_gensym(args, world):
    _need(args, 1, "make-gensym")
    prefix = args[0]
    if type(prefix) is Symbol:
        prefix = prefix.name
    if type(prefix) is not str:
        raise ChurchEvalError("make-gensym expects a string prefix")

    def gensym(call_args, call_world):
        if call_args:
            raise ArityError("gensym expects no arguments")
        return Symbol(call_world.gensym(prefix))

    return Builtin(f"gensym:{prefix}", gensym)
