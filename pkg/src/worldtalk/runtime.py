"""Per-world evaluation state and the function-application core.

One WorldTrace is one sampled possible world: a seeded random stream, the
memoization table backing ``mem``, per-prefix gensym counters, and the global
environment built by executing the program's top-level forms. Two traces with
equal seeds replay the exact same world.
"""

from __future__ import annotations

import sys

from .errors import ArityError, NotApplicableError, RecursionBudgetError
from .rng import RandomStream
from .values import Builtin, Closure, MemoizedFn, freeze

__all__ = ["WorldTrace", "apply_function", "UNASSIGNED", "ensure_stack_headroom"]

DEFAULT_MAX_DEPTH = 10_000

_BUILTINS = None
_HEADROOM_DONE = False


def ensure_stack_headroom(max_depth: int = DEFAULT_MAX_DEPTH):
    """Give CPython room for the application-depth cap.

    Deep programs hit the budget cap and raise a reportable error; without
    this, Python's own recursion limit (or the default 8 MiB C stack) fires
    first and aborts the process instead. Call once per process before deep
    evaluation; new threads inherit a larger stack too.
    """
    global _HEADROOM_DONE
    if _HEADROOM_DONE:
        return
    _HEADROOM_DONE = True
    # ~8 Python frames per application, plus slack for the caller.
    sys.setrecursionlimit(max(sys.getrecursionlimit(), max_depth * 12 + 10_000))
    try:
        import threading

        threading.stack_size(64 * 1024 * 1024)
    except (ValueError, RuntimeError):
        pass


def call_with_stack(fn, *args):
    """Run ``fn(*args)`` on a thread whose stack fits the depth cap.

    The default C stack cannot hold ``DEFAULT_MAX_DEPTH`` nested
    applications, so anything that may evaluate adversarially deep programs
    (the sampler, dry runs) hops onto an explicitly sized thread; the budget
    check then fires before the stack does.
    """
    import threading

    ensure_stack_headroom()
    box = {}

    def runner():
        try:
            box["value"] = fn(*args)
        except BaseException as exc:  # re-raised on the caller's thread
            box["error"] = exc

    thread = threading.Thread(target=runner, daemon=True)
    thread.start()
    thread.join()
    if "error" in box:
        raise box["error"]
    return box["value"]


class _Unassigned:
    __slots__ = ()

    def __repr__(self):
        return "<unassigned>"


UNASSIGNED = _Unassigned()


def _builtin_table():
    global _BUILTINS
    if _BUILTINS is None:
        from .builtins import BUILTINS

        _BUILTINS = BUILTINS
    return _BUILTINS


class WorldTrace:
    __slots__ = ("seed", "rng", "globals", "memo", "gensym_counters", "depth", "max_depth", "_memo_seq")

    def __init__(self, seed: int, max_depth: int = DEFAULT_MAX_DEPTH):
        if not _HEADROOM_DONE:
            ensure_stack_headroom()
        self.seed = seed
        self.rng = RandomStream(seed)
        self.globals = dict(_builtin_table())
        self.memo = {}
        self.gensym_counters = {}
        self.depth = 0
        self.max_depth = max_depth
        self._memo_seq = 0

    def new_memo_id(self) -> int:
        self._memo_seq += 1
        return self._memo_seq

    def gensym(self, prefix: str):
        n = self.gensym_counters.get(prefix, 0)
        self.gensym_counters[prefix] = n + 1
        return f"{prefix}{n}"


def apply_function(fn, args, world, span=None):
    """Apply a callable value. MemoizedFns consult the world's memo table."""
    t = type(fn)
    if t is Closure:
        if len(args) != fn.params:
            raise ArityError(
                f"{fn.name or 'lambda'} expects {fn.params} argument(s), got {len(args)}", span
            )
        depth = world.depth + 1
        if depth > world.max_depth:
            raise RecursionBudgetError(
                f"application depth exceeded {world.max_depth} (runaway recursion?)", span
            )
        world.depth = depth
        slots = list(args)
        if fn.extra_slots:
            slots += [UNASSIGNED] * fn.extra_slots
        try:
            return fn.run_body((slots, fn.frame), world)
        finally:
            world.depth = depth - 1
    if t is Builtin:
        return fn.fn(args, world)
    if t is MemoizedFn:
        key = (fn.memo_id, tuple(freeze(a) for a in args))
        memo = world.memo
        if key in memo:
            return memo[key]
        result = apply_function(fn.inner, args, world, span)
        memo[key] = result
        return result
    raise NotApplicableError(f"not a function: {fn!r}", span)
