"""Rejection-sampling inference with cumulative dialogue-session semantics.

A Session owns a world model plus the ordered log of accepted ``define``
extensions and ``condition`` bodies. Queries simulate fresh seeded worlds,
reject any world that falsifies a condition (checked in commit order, first
false wins), and evaluate the query body in each accepted world.

Sampling is deterministic: the world for global attempt ``a`` is seeded by
``derive_chain_seed(master, 0, a)``, and runs are chunked so that any worker
count replays the exact serial outcome (accepted values ordered by attempt
index, early stop at the target'th accept).
"""

from __future__ import annotations

import dataclasses
import logging
import math
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .compiler import compile_expr, compile_program
from .errors import ChurchEvalError, WorldtalkError, ZeroAcceptanceError
from .rng import derive_chain_seed, mix64
from .runtime import WorldTrace, call_with_stack
from .sexpr import SExpr, SList, Sym, parse, parse_one, print_form
from .values import Symbol, print_value

__all__ = [
    "SamplingBudget",
    "Session",
    "PosteriorSamples",
    "PosteriorSummary",
    "rejection_sample",
    "add_condition",
    "add_definition",
    "run_query",
    "summarize",
    "evaluate_on_accepted",
]

log = logging.getLogger(__name__)

_QUERY_STREAM = 0x51C7
_DRYRUN_STREAM = 0xD247


@dataclass(frozen=True)
class SamplingBudget:
    target_accepted: int = 1000
    max_attempts: int = 1_000_000
    parallel_chains: int = field(default_factory=lambda: os.cpu_count() or 1)

    def __post_init__(self):
        if self.target_accepted < 1:
            raise WorldtalkError("target_accepted must be >= 1")
        if self.max_attempts < self.target_accepted:
            raise WorldtalkError("max_attempts must be >= target_accepted")
        if self.parallel_chains < 1:
            raise WorldtalkError("parallel_chains must be >= 1")


@dataclass(frozen=True)
class Session:
    """World model plus the cumulative, append-only dialogue state."""

    world: object  # WorldModel
    extensions: tuple = ()
    conditions: tuple = ()
    seed: int = 0
    budget: SamplingBudget = field(default_factory=SamplingBudget)
    transcript_ref: str | None = None

    @property
    def program_forms(self):
        return list(self.world.program_forms) + list(self.extensions)

    def committed_count(self):
        return len(self.extensions) + len(self.conditions)


@dataclass
class PosteriorSamples:
    query: SExpr
    values: list
    attempts: int
    accepted: int
    seed: int
    accepted_attempts: list
    condition_warnings: dict

    @property
    def acceptance_rate(self):
        return self.accepted / self.attempts if self.attempts else 0.0


@dataclass
class PosteriorSummary:
    kind: str  # boolean-probability | numeric | categorical | generic
    data: dict
    acceptance_rate: float
    n: int

    def to_json(self):
        return {
            "kind": self.kind,
            "data": self.data,
            "acceptance_rate": self.acceptance_rate,
            "n": self.n,
        }


# --- one attempt -------------------------------------------------------------

_WORKER = {}


def _compile_texts(program_text, condition_texts, query_text):
    program_steps = compile_program(parse(program_text).forms)
    condition_steps = [compile_expr(parse_one(t)) for t in condition_texts]
    query_step = compile_expr(parse_one(query_text)) if query_text is not None else None
    return program_steps, condition_steps, query_step


def _init_worker(program_text, condition_texts, query_text, master_seed, max_depth):
    _WORKER["compiled"] = _compile_texts(program_text, condition_texts, query_text)
    _WORKER["master"] = master_seed
    _WORKER["max_depth"] = max_depth


def _run_chunk_compiled(compiled, master_seed, max_depth, start, count):
    """Attempts [start, start+count): returns accepts, failure counts, error."""
    program_steps, condition_steps, query_step = compiled
    accepts = []
    fail_counts = [0] * len(condition_steps)
    warn_counts = [0] * len(condition_steps)
    error = None
    for attempt in range(start, start + count):
        world = WorldTrace(derive_chain_seed(master_seed, 0, attempt), max_depth)
        try:
            for step in program_steps:
                step(None, world)
            rejected = False
            for i, cond in enumerate(condition_steps):
                value = cond(None, world)
                if value is False:
                    fail_counts[i] += 1
                    rejected = True
                    break
                if value is not True:
                    warn_counts[i] += 1
            if rejected:
                continue
            value = query_step(None, world) if query_step is not None else True
            accepts.append((attempt, value))
        except ChurchEvalError as exc:
            error = (attempt, str(exc), exc.span)
            break
    return accepts, fail_counts, warn_counts, error


def _worker_chunk(args):
    start, count = args
    return call_with_stack(
        _run_chunk_compiled, _WORKER["compiled"], _WORKER["master"], _WORKER["max_depth"], start, count
    )


# --- the sampler -------------------------------------------------------------


def rejection_sample(
    program_forms,
    conditions,
    query,
    budget: SamplingBudget,
    master_seed: int,
    max_depth: int = 10_000,
) -> PosteriorSamples:
    """Sample worlds until target_accepted accepted or max_attempts exhausted."""
    program_text = "\n".join(print_form(f) for f in program_forms)
    condition_texts = [print_form(c) for c in conditions]
    query_text = print_form(query) if query is not None else None

    workers = budget.parallel_chains
    use_pool = workers > 1 and budget.max_attempts >= 20_000
    accepted = []
    fail_totals = [0] * len(conditions)
    warn_totals = [0] * len(conditions)
    stop_attempt = None  # index of the target'th accept
    first_error = None
    # Fixed chunking makes the failure/warning tallies (counted through the
    # chunk where sampling stops) identical for any worker count.
    chunk = 4096

    def consume(result):
        nonlocal stop_attempt, first_error
        if stop_attempt is not None or first_error is not None:
            return
        accepts, fails, warns, error = result
        for i, n in enumerate(fails):
            fail_totals[i] += n
        for i, n in enumerate(warns):
            warn_totals[i] += n
        for attempt, value in accepts:
            if stop_attempt is None:
                accepted.append((attempt, value))
                if len(accepted) == budget.target_accepted:
                    stop_attempt = attempt
        if error is not None and (stop_attempt is None or error[0] <= stop_attempt):
            first_error = error

    if not use_pool:
        compiled = _compile_texts(program_text, condition_texts, query_text)
        start = 0
        while start < budget.max_attempts and stop_attempt is None and first_error is None:
            count = min(chunk, budget.max_attempts - start)
            consume(call_with_stack(_run_chunk_compiled, compiled, master_seed, max_depth, start, count))
            start += count
    else:
        import multiprocessing as mp

        ctx = mp.get_context("fork")
        with ProcessPoolExecutor(
            max_workers=workers,
            mp_context=ctx,
            initializer=_init_worker,
            initargs=(program_text, condition_texts, query_text, master_seed, max_depth),
        ) as pool:
            pending = []
            start = 0
            done = False
            while not done:
                while (
                    start < budget.max_attempts
                    and len(pending) < workers * 3
                    and stop_attempt is None
                    and first_error is None
                ):
                    count = min(chunk, budget.max_attempts - start)
                    pending.append(pool.submit(_worker_chunk, (start, count)))
                    start += count
                if not pending:
                    break
                consume(pending.pop(0).result())
                if (stop_attempt is not None or first_error is not None) and pending:
                    for future in pending:
                        future.cancel()
                    pending = [f for f in pending if not f.cancelled()]
                    for future in pending:
                        future.result()
                    pending = []
                    done = True

    if first_error is not None:
        attempt, message, span = first_error
        raise ChurchEvalError(f"evaluation failed in sampled world (attempt {attempt}): {message}", span)

    if stop_attempt is not None:
        attempts = stop_attempt + 1
    else:
        attempts = budget.max_attempts

    if not accepted:
        raise ZeroAcceptanceError(
            attempts,
            fail_totals,
            suspect_continuous_equality=_suspect_continuous_equality(program_forms, conditions, master_seed, max_depth),
        )

    warnings = {i: n for i, n in enumerate(warn_totals) if n}
    if warnings:
        log.warning("non-boolean condition values treated as true: %s", warnings)
    return PosteriorSamples(
        query=query,
        values=[v for _, v in accepted],
        attempts=attempts,
        accepted=len(accepted),
        seed=master_seed,
        accepted_attempts=[a for a, _ in accepted],
        condition_warnings=warnings,
    )


def _iter_subforms(expr):
    yield expr
    if type(expr) is SList:
        for item in expr.items:
            yield from _iter_subforms(item)


def _suspect_continuous_equality(program_forms, conditions, master_seed, max_depth):
    """Heuristic: does some condition test ``=`` on a continuously varying value?

    Evaluates the arguments of each ``=`` subform in a couple of fresh worlds;
    an argument that comes back as a non-integer float that differs across
    worlds has acceptance probability zero under exact equality.
    """
    probes = []
    for cond in conditions:
        for sub in _iter_subforms(cond):
            if type(sub) is SList and sub.items and type(sub[0]) is Sym and sub[0].name == "=":
                probes.extend(sub.items[1:])
    if not probes:
        return False

    def probe_worlds():
        program_steps = compile_program(program_forms)
        samples = []
        for k in range(2):
            world = WorldTrace(derive_chain_seed(master_seed, _DRYRUN_STREAM, k), max_depth)
            for step in program_steps:
                step(None, world)
            row = []
            for probe in probes:
                try:
                    row.append(compile_expr(probe)(None, world))
                except ChurchEvalError:
                    row.append(None)
            samples.append(row)
        return samples

    try:
        samples = call_with_stack(probe_worlds)
        for a, b in zip(*samples):
            if type(a) is float and type(b) is float and a != b:
                if a != int(a) or b != int(b):
                    return True
    except (ChurchEvalError, WorldtalkError):
        return False
    return False


# --- session operations --------------------------------------------------------


def _dry_run(session: Session, extra_forms, body=None):
    """Evaluate the composed program (plus candidates) in one throwaway world."""

    def run():
        seed = derive_chain_seed(session.seed, _DRYRUN_STREAM, session.committed_count())
        world = WorldTrace(seed)
        steps = compile_program(session.program_forms + list(extra_forms))
        for step in steps:
            step(None, world)
        for cond in session.conditions:
            compile_expr(cond)(None, world)
        if body is not None:
            compile_expr(body)(None, world)
        return world

    return call_with_stack(run)


def add_condition(session: Session, body: SExpr) -> Session:
    """Append a condition body after a dry run proves it evaluates."""
    _dry_run(session, [], body)
    return dataclasses.replace(session, conditions=session.conditions + (body,))


def _is_define(form):
    return (
        type(form) is SList
        and form.items
        and type(form[0]) is Sym
        and form[0].name == "define"
    )


def add_definition(session: Session, forms) -> Session:
    """Append define forms after a dry run of the extended program."""
    forms = list(forms)
    for form in forms:
        if not _is_define(form):
            raise WorldtalkError(f"not a define form: {print_form(form)}")
    _dry_run(session, forms)
    return dataclasses.replace(session, extensions=session.extensions + tuple(forms))


def query_master_seed(session: Session, body: SExpr) -> int:
    """Master seed for one query: session seed, committed-state size, query text."""
    h = 0xCBF29CE484222325
    for ch in print_form(body).encode("utf-8"):
        h = ((h ^ ch) * 0x100000001B3) & ((1 << 64) - 1)
    return derive_chain_seed(session.seed, _QUERY_STREAM + session.committed_count(), mix64(h))


def run_query(session: Session, body: SExpr):
    """Rejection-sample the session's cumulative state against one query."""
    _dry_run(session, [], body)
    samples = rejection_sample(
        session.program_forms,
        list(session.conditions),
        body,
        session.budget,
        query_master_seed(session, body),
    )
    return samples, summarize(samples)


def evaluate_on_accepted(session: Session, samples: PosteriorSamples, body: SExpr):
    """Re-evaluate an expression in each accepted world of a previous query.

    Replays the program and conditions so memoized draws line up, then
    evaluates ``body``; used to verify invariants on posterior worlds.
    """
    steps = compile_program(session.program_forms)
    condition_steps = [compile_expr(c) for c in session.conditions]
    body_step = compile_expr(body)

    def replay():
        out = []
        for attempt in samples.accepted_attempts:
            world = WorldTrace(derive_chain_seed(samples.seed, 0, attempt))
            for step in steps:
                step(None, world)
            for cond in condition_steps:
                cond(None, world)
            out.append(body_step(None, world))
        return out

    return call_with_stack(replay)


# --- summaries -----------------------------------------------------------------


def summarize(samples: PosteriorSamples) -> PosteriorSummary:
    values = samples.values
    if not values:
        raise WorldtalkError("cannot summarize zero samples")
    n = len(values)
    rate = samples.acceptance_rate
    if all(type(v) is bool for v in values):
        p = sum(1 for v in values if v) / n
        stderr = math.sqrt(p * (1 - p) / n)
        return PosteriorSummary("boolean-probability", {"p": p, "stderr": stderr}, rate, n)
    if all(type(v) is float for v in values):
        mean = sum(values) / n
        var = sum((v - mean) ** 2 for v in values) / n
        lo, hi = min(values), max(values)
        bins = min(40, max(10, math.ceil(math.sqrt(n))))
        if lo == hi:
            lo, hi = lo - 0.5, hi + 0.5
        width = (hi - lo) / bins
        counts = [0] * bins
        for v in values:
            idx = min(int((v - lo) / width), bins - 1)
            counts[idx] += 1
        edges = [lo + i * width for i in range(bins + 1)]
        return PosteriorSummary(
            "numeric",
            {"mean": mean, "stdev": math.sqrt(var), "min": min(values), "max": max(values), "bin_edges": edges, "counts": counts},
            rate,
            n,
        )
    if all(type(v) is Symbol for v in values):
        freq = Counter(v.name for v in values)
        table = {k: c / n for k, c in sorted(freq.items())}
        return PosteriorSummary("categorical", {"proportions": table, "counts": dict(sorted(freq.items()))}, rate, n)
    freq = Counter(print_value(v) for v in values)
    return PosteriorSummary("generic", {"counts": dict(sorted(freq.items()))}, rate, n)
