"""Translation from tagged natural-language utterances to program expressions.

A prompt is the verbatim world-model source, the example translations, the
accepted dialogue history rendered in comment-then-code style, and a final
``;; <Tag>: <utterance>`` line. A pluggable backend completes it; candidates
are parsed, checked against the session environment, de-duplicated, and
ranked. The mock backend replays bundled fixture translations and keeps the
whole pipeline offline and deterministic.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import httpx

from .compiler import compile_expr, compile_program
from .errors import BackendError, ChurchEvalError, NoValidCandidateError, WorldtalkError
from .rng import derive_chain_seed
from .runtime import WorldTrace, call_with_stack
from .sexpr import SList, Sym, parse, print_form, strip_prompt_forms

__all__ = [
    "TAGS",
    "Utterance",
    "PromptBundle",
    "TranslationCandidate",
    "MockBackend",
    "HttpBackend",
    "build_prompt",
    "translate",
    "translate_model_fragment",
    "validate_candidate",
    "load_fixture_table",
    "bound_symbols",
]

TAGS = ("Condition", "Query", "Define", "ConstructFragment")

STOP_SEQUENCE = "\n\n;;"
HISTORY_CAP = 30
DEFAULT_SAMPLES = 5
DEFAULT_TEMPERATURE = 0.7


@dataclass(frozen=True)
class Utterance:
    text: str
    tag: str
    index: int = 0

    def __post_init__(self):
        if self.tag not in TAGS:
            raise WorldtalkError(f"unknown utterance tag: {self.tag!r}")


@dataclass(frozen=True)
class PromptBundle:
    model_text: str
    examples_text: str
    history_text: str
    final_line: str

    def render(self) -> str:
        parts = [self.model_text.rstrip("\n")]
        if self.examples_text.strip():
            parts.append(self.examples_text.rstrip("\n"))
        if self.history_text.strip():
            parts.append(self.history_text.rstrip("\n"))
        parts.append(self.final_line)
        return "\n\n".join(parts) + "\n"


@dataclass
class TranslationCandidate:
    raw_text: str
    forms: list | None
    parse_error: str | None
    valid: bool
    reasons: list
    temperature: float
    sample_index: int
    score: float | None = None
    frequency: int = 1

    def brief(self):
        return {
            "code": self.raw_text,
            "valid": self.valid,
            "reasons": list(self.reasons),
            "temperature": self.temperature,
            "score": self.score,
        }


def render_history(history) -> str:
    """Accepted (tag, text, code) triples in the comment-then-code style."""
    blocks = []
    for tag, text, code in history[-HISTORY_CAP:]:
        blocks.append(f";; {tag}: {text}\n{code.strip()}")
    return "\n\n".join(blocks)


def build_prompt(world, history, utterance: Utterance, construct_model_text: str | None = None) -> PromptBundle:
    """Assemble the byte-stable prompt for one utterance."""
    if utterance.tag == "ConstructFragment":
        if construct_model_text is None:
            raise WorldtalkError("construct mode needs an example world model text")
        model_text = construct_model_text
        examples_text = ""
    else:
        model_text = world.model_source.text
        examples_text = world.examples_source.text
    return PromptBundle(
        model_text=model_text,
        examples_text=examples_text,
        history_text=render_history(history),
        final_line=f";; {utterance.tag}: {utterance.text}",
    )


# --- backends ------------------------------------------------------------------


@dataclass
class Completion:
    text: str
    score: float | None = None


_FINAL_LINE_RE = re.compile(r";;\s*(Condition|Query|Define|ConstructFragment)\s*:\s*(.*?)\s*$")


def load_fixture_table(texts) -> dict:
    """Build a (tag, utterance text) -> completion map from fixture sources.

    Fixture files use the same tagged comment-then-code format as the bundled
    example translations; the completion is the verbatim source slice of the
    forms that follow each tag.
    """
    table = {}
    for text in texts:
        unit = parse(text)
        for tag, utterance_text, forms in strip_prompt_forms(unit):
            start = forms[0].span[0]
            end = forms[-1].span[1]
            table[(tag, utterance_text)] = unit.text[start:end]
    return table


class MockBackend:
    """Pure fixture-replay backend: equal prompts yield equal completions."""

    name = "mock"

    def __init__(self, fixtures: dict, fallback: str | None = None):
        self.fixtures = dict(fixtures)
        self.fallback = fallback

    def complete(self, prompt: str, n: int, temperature: float, stop) -> list:
        final = prompt.rstrip("\n").rsplit("\n", 1)[-1]
        m = _FINAL_LINE_RE.match(final.strip())
        completion = None
        if m:
            completion = self.fixtures.get((m.group(1), m.group(2)))
        if completion is None:
            text = m.group(2) if m else final
            completion = self.fallback or f'(untranslatable-utterance "{_escape(text)}")'
        return [Completion(completion)] * n


def _escape(text):
    return text.replace("\\", "\\\\").replace('"', '\\"')


class HttpBackend:
    """JSON-over-HTTP completion backend.

    Request: ``{"model", "prompt", "n", "temperature", "stop", "max_tokens"}``;
    response: ``{"choices": [{"text", "score"?}]}``. Anything matching that
    shape works; there is no vendor-specific typing.
    """

    name = "http"

    def __init__(self, base_url: str, model: str, api_key: str = "", timeout: float = 60.0, max_tokens: int = 512):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key = api_key
        self.timeout = timeout
        self.max_tokens = max_tokens

    def complete(self, prompt: str, n: int, temperature: float, stop) -> list:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        payload = {
            "model": self.model,
            "prompt": prompt,
            "n": n,
            "temperature": temperature,
            "stop": list(stop),
            "max_tokens": self.max_tokens,
        }
        try:
            response = httpx.post(self.base_url, json=payload, headers=headers, timeout=self.timeout)
            response.raise_for_status()
            body = response.json()
        except httpx.HTTPError as exc:
            raise BackendError(f"completion request failed: {exc}") from exc
        try:
            choices = body["choices"]
            return [Completion(c["text"], c.get("score")) for c in choices]
        except (KeyError, TypeError) as exc:
            raise BackendError(f"malformed completion response: {body!r}") from exc


# --- validation ------------------------------------------------------------------

_SPECIAL_FORMS = {
    "define",
    "lambda",
    "let",
    "let*",
    "if",
    "cond",
    "case",
    "and",
    "or",
    "quote",
    "begin",
    "else",
    "condition",
    "query",
}


def _toplevel_define_names(forms):
    names = set()
    for form in forms:
        if _form_kind(form) == "define":
            target = form[1]
            names.add(target.name if type(target) is Sym else target[0].name)
    return names


def bound_symbols(session) -> set:
    """Names resolvable in the session's composed environment."""
    from .builtins import BUILTINS

    return set(BUILTINS) | _toplevel_define_names(session.program_forms)


def _form_kind(form):
    if type(form) is SList and form.items and type(form[0]) is Sym:
        return form[0].name
    return None


def _free_symbols(expr, bound, out):
    t = type(expr)
    if t is Sym:
        if expr.name not in bound and expr.name not in _SPECIAL_FORMS:
            out.add(expr.name)
        return
    if t is not SList or not expr.items:
        return
    head = expr[0]
    name = head.name if type(head) is Sym else None
    if name == "quote":
        return
    if name == "lambda" and len(expr.items) >= 3 and type(expr[1]) is SList:
        inner = bound | {p.name for p in expr[1] if type(p) is Sym}
        inner |= _body_define_names(expr.items[2:])
        for form in expr.items[2:]:
            _free_symbols(form, inner, out)
        return
    if name == "define" and len(expr.items) >= 3:
        target = expr[1]
        if type(target) is SList:
            inner = bound | {p.name for p in target.items if type(p) is Sym}
            inner |= _body_define_names(expr.items[2:])
            for form in expr.items[2:]:
                _free_symbols(form, inner, out)
            return
        for form in expr.items[2:]:
            _free_symbols(form, bound, out)
        return
    if name in ("let", "let*") and len(expr.items) >= 3 and type(expr[1]) is SList:
        inner = set(bound)
        for binding in expr[1]:
            if type(binding) is SList and len(binding) == 2 and type(binding[0]) is Sym:
                _free_symbols(binding[1], inner if name == "let*" else bound, out)
                inner.add(binding[0].name)
        inner |= _body_define_names(expr.items[2:])
        for form in expr.items[2:]:
            _free_symbols(form, inner, out)
        return
    if name == "case" and len(expr.items) >= 2:
        _free_symbols(expr[1], bound, out)
        for clause in expr.items[2:]:
            if type(clause) is SList and len(clause) >= 2:
                for form in clause.items[1:]:
                    _free_symbols(form, bound, out)
        return
    for item in expr.items:
        _free_symbols(item, bound, out)


def _body_define_names(forms):
    names = set()
    for form in forms:
        if _form_kind(form) == "define" and len(form.items) >= 2:
            target = form[1]
            if type(target) is Sym:
                names.add(target.name)
            elif type(target) is SList and target.items and type(target[0]) is Sym:
                names.add(target[0].name)
    return names


def _check_tag_shape(tag, forms):
    kinds = [_form_kind(f) for f in forms]
    if tag == "Condition":
        if kinds.count("condition") < 1:
            return "a Condition must contain at least one (condition ...) form"
        if any(k not in ("condition", "define") for k in kinds):
            return "a Condition may only contain condition and define forms"
    elif tag == "Query":
        if kinds != ["query"]:
            return "a Query must be exactly one (query ...) form"
    elif tag == "Define":
        if kinds.count("define") < 1 or any(k not in ("define", "condition") for k in kinds):
            return "a Define must be define forms, optionally followed by condition forms"
        first_cond = kinds.index("condition") if "condition" in kinds else len(kinds)
        if any(k == "define" for k in kinds[first_cond:]):
            return "defines must precede condition forms"
    elif tag == "ConstructFragment":
        if not kinds or any(k != "define" for k in kinds):
            return "a model fragment must contain only define forms"
    return None


def _strip_wrapper(form):
    kind = _form_kind(form)
    if kind in ("condition", "query"):
        if len(form.items) != 2:
            raise ChurchEvalError(f"({kind} ...) takes exactly one body form", form.span)
        return kind, form[1]
    return kind, form


def split_commit_forms(forms):
    """Split validated candidate forms into (defines, condition bodies, query body)."""
    defines, condition_bodies, query_body = [], [], None
    for form in forms:
        kind, payload = _strip_wrapper(form)
        if kind == "define":
            defines.append(payload)
        elif kind == "condition":
            condition_bodies.append(payload)
        elif kind == "query":
            query_body = payload
    return defines, condition_bodies, query_body


def validate_candidate(code_text: str, tag: str, session) -> TranslationCandidate:
    """Parse and statically/dynamically check one candidate translation."""
    candidate = TranslationCandidate(
        raw_text=code_text.strip(),
        forms=None,
        parse_error=None,
        valid=False,
        reasons=[],
        temperature=0.0,
        sample_index=0,
    )
    try:
        unit = parse(candidate.raw_text)
    except WorldtalkError as exc:
        candidate.parse_error = str(exc)
        candidate.reasons.append(f"parse error: {exc}")
        return candidate
    if not unit.forms:
        candidate.reasons.append("empty completion")
        return candidate
    candidate.forms = unit.forms

    shape_error = _check_tag_shape(tag, unit.forms)
    if shape_error:
        candidate.reasons.append(shape_error)
        return candidate

    bound = bound_symbols(session) | _toplevel_define_names(unit.forms)
    free = set()
    for form in unit.forms:
        try:
            _, payload = _strip_wrapper(form)
        except ChurchEvalError as exc:
            candidate.reasons.append(str(exc))
            return candidate
        _free_symbols(payload, bound, free)
    if free:
        candidate.reasons.append("unbound symbols: " + ", ".join(sorted(free)))
        return candidate

    try:
        _dry_run_candidate(session, unit.forms)
    except ChurchEvalError as exc:
        candidate.reasons.append(f"dry run failed: {exc}")
        return candidate

    candidate.valid = True
    return candidate


def _dry_run_candidate(session, forms):
    defines, condition_bodies, query_body = split_commit_forms(forms)

    def run():
        seed = derive_chain_seed(session.seed, 0xD247, session.committed_count() + 1)
        world = WorldTrace(seed)
        steps = compile_program(session.program_forms + defines)
        for step in steps:
            step(None, world)
        for body in condition_bodies:
            compile_expr(body)(None, world)
        if query_body is not None:
            compile_expr(query_body)(None, world)

    call_with_stack(run)


# --- translation ------------------------------------------------------------------


def _clean_completion(text: str) -> str:
    for stop in (STOP_SEQUENCE, "\n;; "):
        idx = text.find(stop)
        if idx != -1:
            text = text[:idx]
    return text.strip()


def translate(
    utterance: Utterance,
    session,
    history,
    backend,
    k: int = DEFAULT_SAMPLES,
    temperature: float = DEFAULT_TEMPERATURE,
    construct_model_text: str | None = None,
):
    """Translate one utterance; returns (ranked candidates, prompt bundle).

    Requests ``k`` sampled completions plus one greedy completion, validates
    and de-duplicates them, and ranks by (validity, backend score, frequency).
    Raises NoValidCandidateError when nothing survives.
    """
    prompt = build_prompt(session.world, history, utterance, construct_model_text)
    rendered = prompt.render()
    completions = []
    sampled = backend.complete(rendered, k, temperature, [STOP_SEQUENCE])
    completions.extend((temperature, c) for c in sampled)
    if getattr(backend, "name", "") != "mock":
        greedy = backend.complete(rendered, 1, 0.0, [STOP_SEQUENCE])
        completions.extend((0.0, c) for c in greedy)

    by_key = {}
    order = []
    for i, (temp, completion) in enumerate(completions):
        cleaned = _clean_completion(completion.text)
        candidate = validate_candidate(cleaned, utterance.tag, session)
        candidate.temperature = temp
        candidate.sample_index = i
        candidate.score = completion.score
        key = (
            tuple(print_form(f) for f in candidate.forms) if candidate.forms else candidate.raw_text
        )
        if key in by_key:
            kept = by_key[key]
            kept.frequency += 1
            if completion.score is not None and (kept.score is None or completion.score > kept.score):
                kept.score = completion.score
        else:
            by_key[key] = candidate
            order.append(key)

    candidates = [by_key[key] for key in order]
    candidates.sort(key=lambda c: (not c.valid, -(c.score or 0.0), -c.frequency, c.sample_index))
    if not any(c.valid for c in candidates):
        raise NoValidCandidateError(utterance.text, [r for c in candidates for r in c.reasons] or ["no completions"])
    return candidates, prompt


def translate_model_fragment(sentence: str, session, constructed_history, backend, k: int = DEFAULT_SAMPLES):
    """Construct-from-scratch translation: sentences become define fragments."""
    if not sentence.strip():
        raise NoValidCandidateError(sentence, ["empty sentence"])
    from .worlds import asset_text

    utterance = Utterance(text=sentence, tag="ConstructFragment")
    return translate(
        utterance,
        session,
        constructed_history,
        backend,
        k=k,
        construct_model_text=asset_text("construct/medical.church"),
    )
