"""Compile parsed forms into Python closures.

Each expression is translated once into a ``step(frame, world)`` callable;
evaluating a program against a fresh WorldTrace then costs no re-dispatch on
syntax. Local variables get lexical (depth, index) addresses resolved at
compile time; anything unresolved falls through to the world's global table,
which top-level ``define`` mutates.

Frames are ``(slots, parent)`` pairs; ``None`` is the empty chain whose
lookups all land in ``world.globals``.
"""

from __future__ import annotations

from .errors import ChurchEvalError, UnboundSymbolError
from .runtime import UNASSIGNED, apply_function
from .sexpr import Bool, Num, SExpr, SList, Str, Sym
from .values import NIL, Closure, Symbol, church_equal, datum_from_sexpr

__all__ = ["compile_expr", "compile_program", "run_program"]


class _Scope:
    __slots__ = ("names", "count", "parent")

    def __init__(self, parent):
        self.names = {}
        self.count = 0
        self.parent = parent

    def add(self, name):
        # Rebinding the same name in one frame gets a fresh slot so earlier
        # captures keep seeing the old one (let* shadows itself this way).
        idx = self.count
        self.count += 1
        self.names[name] = idx
        return idx

    def lookup(self, name):
        depth = 0
        scope = self
        while scope is not None:
            idx = scope.names.get(name)
            if idx is not None:
                return depth, idx
            depth += 1
            scope = scope.parent
        return None


def _syntax_error(message, expr):
    return ChurchEvalError(message, getattr(expr, "span", None))


def _compile_const(value):
    def step(frame, world):
        return value

    return step


def _compile_local_ref(depth, idx):
    if depth == 0:

        def step(frame, world):
            return frame[0][idx]

    elif depth == 1:

        def step(frame, world):
            return frame[1][0][idx]

    else:

        def step(frame, world):
            f = frame
            for _ in range(depth):
                f = f[1]
            return f[0][idx]

    return step


def _compile_global_ref(name, span):
    def step(frame, world):
        try:
            return world.globals[name]
        except KeyError:
            raise UnboundSymbolError(name, span) from None

    return step


def _compile_ref(expr, scope):
    if scope is not None:
        found = scope.lookup(expr.name)
        if found is not None:
            return _compile_local_ref(*found)
    return _compile_global_ref(expr.name, expr.span)


def _sequence(steps):
    if len(steps) == 1:
        return steps[0]
    init, last = steps[:-1], steps[-1]

    def step(frame, world):
        for s in init:
            s(frame, world)
        return last(frame, world)

    return step


def _compile_body(forms, scope):
    """Compile a lambda/let body, allocating slots for internal defines.

    Returns (run_step, number of extra slots). Define names are registered
    before any body form compiles, so mutually recursive internal defines
    resolve.
    """
    if not forms:
        raise ChurchEvalError("empty body")
    base = scope.count
    define_slots = {}
    for form in forms:
        name = _define_name(form)
        if name is not None:
            define_slots[id(form)] = scope.add(name)
    extra = scope.count - base
    steps = []
    for form in forms:
        name = _define_name(form)
        if name is None:
            steps.append(compile_expr(form, scope))
        else:
            idx = define_slots[id(form)]
            value_step = _compile_define_value(form, scope)
            steps.append(_compile_slot_assign(idx, value_step))
    return _sequence(steps), extra


def _compile_slot_assign(idx, value_step):
    def step(frame, world):
        frame[0][idx] = value_step(frame, world)
        return NIL

    return step


def _define_name(form):
    if type(form) is SList and len(form) >= 1 and type(form[0]) is Sym and form[0].name == "define":
        if len(form) < 2:
            raise _syntax_error("define needs a target", form)
        target = form[1]
        if type(target) is Sym:
            return target.name
        if type(target) is SList and target.items and type(target[0]) is Sym:
            return target[0].name
        raise _syntax_error("malformed define target", form)
    return None


def _compile_define_value(form, scope):
    target = form[1]
    if type(target) is Sym:
        if len(form.items) != 3:
            raise _syntax_error(f"define {target.name} needs exactly one value", form)
        return compile_expr(form[2], scope)
    params = [p.name if type(p) is Sym else None for p in target.items[1:]]
    if None in params:
        raise _syntax_error("define parameters must be symbols", form)
    return _compile_lambda(params, form.items[2:], scope, target[0].name)


def _compile_lambda(params, body_forms, scope, name):
    child = _Scope(scope)
    for p in params:
        child.add(p)
    run_body, extra = _compile_body(body_forms, child)
    nparams = len(params)

    def step(frame, world):
        return Closure(nparams, run_body, frame, name, extra)

    return step


def _compile_let(expr, scope):
    if len(expr.items) < 3 or type(expr[1]) is not SList:
        raise _syntax_error("malformed let", expr)
    bindings = []
    for binding in expr[1]:
        if type(binding) is not SList or len(binding) != 2 or type(binding[0]) is not Sym:
            raise _syntax_error("malformed let binding", expr)
        bindings.append((binding[0].name, binding[1]))
    init_steps = [compile_expr(value, scope) for _, value in bindings]
    child = _Scope(scope)
    for bname, _ in bindings:
        child.add(bname)
    run_body, extra = _compile_body(expr.items[2:], child)

    def step(frame, world):
        slots = [s(frame, world) for s in init_steps]
        if extra:
            slots += [UNASSIGNED] * extra
        return run_body((slots, frame), world)

    return step


def _compile_let_star(expr, scope):
    if len(expr.items) < 3 or type(expr[1]) is not SList:
        raise _syntax_error("malformed let*", expr)
    child = _Scope(scope)
    assigns = []
    for binding in expr[1]:
        if type(binding) is not SList or len(binding) != 2 or type(binding[0]) is not Sym:
            raise _syntax_error("malformed let* binding", expr)
        # The init sees bindings declared before it; the name is added after.
        init_step = compile_expr(binding[1], child)
        idx = child.add(binding[0].name)
        assigns.append((idx, init_step))
    run_body, extra = _compile_body(expr.items[2:], child)
    total = child.count

    def step(frame, world):
        slots = [UNASSIGNED] * total
        new_frame = (slots, frame)
        for idx, init in assigns:
            slots[idx] = init(new_frame, world)
        return run_body(new_frame, world)

    return step


def _compile_if(expr, scope):
    if len(expr.items) not in (3, 4):
        raise _syntax_error("if expects a test, a consequent, and an optional alternative", expr)
    test = compile_expr(expr[1], scope)
    then = compile_expr(expr[2], scope)
    if len(expr.items) == 4:
        alt = compile_expr(expr[3], scope)

        def step(frame, world):
            return then(frame, world) if test(frame, world) is not False else alt(frame, world)

    else:

        def step(frame, world):
            return then(frame, world) if test(frame, world) is not False else NIL

    return step


def _compile_cond(expr, scope):
    clauses = []
    for clause in expr.items[1:]:
        if type(clause) is not SList or not clause.items:
            raise _syntax_error("malformed cond clause", expr)
        head = clause[0]
        if type(head) is Sym and head.name == "else":
            clauses.append((None, _sequence([compile_expr(f, scope) for f in clause.items[1:]])))
        else:
            test = compile_expr(head, scope)
            body = (
                _sequence([compile_expr(f, scope) for f in clause.items[1:]])
                if len(clause.items) > 1
                else None
            )
            clauses.append((test, body))

    def step(frame, world):
        for test, body in clauses:
            if test is None:
                return body(frame, world)
            value = test(frame, world)
            if value is not False:
                return body(frame, world) if body is not None else value
        return NIL

    return step


def _case_datum(expr):
    # Clause datums are literal; a quoted datum means the thing it quotes.
    if (
        type(expr) is SList
        and len(expr) == 2
        and type(expr[0]) is Sym
        and expr[0].name == "quote"
    ):
        expr = expr[1]
    return datum_from_sexpr(expr)


def _compile_case(expr, scope):
    if len(expr.items) < 2:
        raise _syntax_error("malformed case", expr)
    key_step = compile_expr(expr[1], scope)
    clauses = []
    for clause in expr.items[2:]:
        if type(clause) is not SList or len(clause) < 2:
            raise _syntax_error("malformed case clause", expr)
        head = clause[0]
        body = _sequence([compile_expr(f, scope) for f in clause.items[1:]])
        if type(head) is Sym and head.name == "else":
            clauses.append((None, body))
        elif type(head) is SList:
            clauses.append(([_case_datum(d) for d in head.items], body))
        else:
            raise _syntax_error("case clause datums must be a list or else", expr)

    def step(frame, world):
        key = key_step(frame, world)
        for datums, body in clauses:
            if datums is None:
                return body(frame, world)
            for datum in datums:
                if church_equal(key, datum):
                    return body(frame, world)
        return NIL

    return step


def _compile_and(expr, scope):
    steps = [compile_expr(f, scope) for f in expr.items[1:]]

    def step(frame, world):
        value = True
        for s in steps:
            value = s(frame, world)
            if value is False:
                return False
        return value

    return step


def _compile_or(expr, scope):
    steps = [compile_expr(f, scope) for f in expr.items[1:]]

    def step(frame, world):
        for s in steps:
            value = s(frame, world)
            if value is not False:
                return value
        return False

    return step


def _compile_call(expr, scope):
    fn_step = compile_expr(expr[0], scope)
    arg_steps = [compile_expr(a, scope) for a in expr.items[1:]]
    span = expr.span
    n = len(arg_steps)
    if n == 0:

        def step(frame, world):
            return apply_function(fn_step(frame, world), [], world, span)

    elif n == 1:
        a0 = arg_steps[0]

        def step(frame, world):
            return apply_function(fn_step(frame, world), [a0(frame, world)], world, span)

    elif n == 2:
        a0, a1 = arg_steps

        def step(frame, world):
            return apply_function(
                fn_step(frame, world), [a0(frame, world), a1(frame, world)], world, span
            )

    elif n == 3:
        a0, a1, a2 = arg_steps

        def step(frame, world):
            return apply_function(
                fn_step(frame, world),
                [a0(frame, world), a1(frame, world), a2(frame, world)],
                world,
                span,
            )

    else:

        def step(frame, world):
            fn = fn_step(frame, world)
            return apply_function(fn, [s(frame, world) for s in arg_steps], world, span)

    return step


def compile_expr(expr: SExpr, scope=None):
    """Compile one expression; ``define`` is only legal at top level or in bodies."""
    t = type(expr)
    if t is Num:
        return _compile_const(expr.value)
    if t is Bool:
        return _compile_const(expr.value)
    if t is Str:
        return _compile_const(expr.value)
    if t is Sym:
        return _compile_ref(expr, scope)
    if not expr.items:
        return _compile_const(NIL)
    head = expr[0]
    if type(head) is Sym:
        name = head.name
        if name == "quote":
            if len(expr.items) != 2:
                raise _syntax_error("quote expects one form", expr)
            return _compile_const(datum_from_sexpr(expr[1]))
        if name == "lambda":
            if len(expr.items) < 3 or type(expr[1]) is not SList:
                raise _syntax_error("malformed lambda", expr)
            params = []
            for p in expr[1]:
                if type(p) is not Sym:
                    raise _syntax_error("lambda parameters must be symbols", expr)
                params.append(p.name)
            return _compile_lambda(params, expr.items[2:], scope, None)
        if name == "if":
            return _compile_if(expr, scope)
        if name == "let":
            return _compile_let(expr, scope)
        if name == "let*":
            return _compile_let_star(expr, scope)
        if name == "cond":
            return _compile_cond(expr, scope)
        if name == "case":
            return _compile_case(expr, scope)
        if name == "and":
            return _compile_and(expr, scope)
        if name == "or":
            return _compile_or(expr, scope)
        if name == "begin":
            return _sequence([compile_expr(f, scope) for f in expr.items[1:]])
        if name == "define":
            raise _syntax_error("define is not allowed in expression position", expr)
    return _compile_call(expr, scope)


def _compile_toplevel_define(form):
    name = _define_name(form)
    value_step = _compile_define_value(form, None)
    sym = Symbol(name)

    def step(frame, world):
        world.globals[name] = value_step(frame, world)
        return sym

    return step


def compile_program(forms):
    """Compile a sequence of top-level forms into executable steps."""
    steps = []
    for form in forms:
        if _define_name(form) is not None:
            steps.append(_compile_toplevel_define(form))
        else:
            steps.append(compile_expr(form, None))
    return steps


def run_program(steps, world):
    """Execute compiled top-level steps in order; returns the last value."""
    value = NIL
    for step in steps:
        value = step(None, world)
    return value


def evaluate(expr: SExpr, world):
    """One-shot evaluation of an expression against a world's global scope.

    Compiles on every call; prefer compile_expr for anything hot.
    """
    return compile_expr(expr)(None, world)
