"""Dialogue orchestration: sessions, utterance processing, persistence, HTTP API.

A session binds a world model to a growing transcript. Tagged utterances are
translated (mock or live backend), the top valid candidate is committed into
the inference session, queries produce posterior summaries, and conditions on
renderable worlds produce a strip of conditioned sample-world renders.
Transcripts are JSONL, written atomically (write-then-rename) per entry.
"""

from __future__ import annotations

import datetime
import json
import os
import secrets
import threading
from dataclasses import dataclass, field
from pathlib import Path

from .engine import (
    SamplingBudget,
    Session,
    add_condition,
    add_definition,
    rejection_sample,
    run_query,
)
from .errors import (
    BackendError,
    ChurchEvalError,
    NoValidCandidateError,
    TranscriptError,
    WorldtalkError,
    ZeroAcceptanceError,
)
from .meaning import MockBackend, HttpBackend, Utterance, load_fixture_table, translate, split_commit_forms
from .render import render_scene
from .rng import derive_chain_seed
from .sexpr import parse, print_form
from .worlds import SCRATCH_WORLD_ID, WORLD_IDS, asset_text, load_world

__all__ = [
    "ServiceConfig",
    "SessionStore",
    "backend_from_env",
    "default_mock_backend",
    "create_app",
    "run_script",
    "SCHEMA_VERSION",
]

SCHEMA_VERSION = 1
_RENDER_STREAM = 0xE44D


def default_mock_backend(extra_fixture_paths=()) -> MockBackend:
    """Mock backend over the union of all bundled fixture translations."""
    texts = [load_world(world_id).translations_text for world_id in WORLD_IDS]
    texts.append(asset_text("construct/translations.church"))
    for path in extra_fixture_paths:
        texts.append(Path(path).read_text("utf-8"))
    return MockBackend(load_fixture_table(texts))


def backend_from_env(environ=None):
    """Backend selection from environment variables.

    WORLDTALK_BACKEND: "mock" (default) or "http".
    WORLDTALK_BACKEND_URL / _MODEL / _API_KEY / _TIMEOUT configure http.
    WORLDTALK_MOCK_FIXTURES: extra fixture files for the mock (path list,
    separated by os.pathsep).
    """
    env = os.environ if environ is None else environ
    kind = env.get("WORLDTALK_BACKEND", "mock").lower()
    if kind == "mock":
        extra = env.get("WORLDTALK_MOCK_FIXTURES", "")
        paths = [p for p in extra.split(os.pathsep) if p]
        return default_mock_backend(paths)
    if kind == "http":
        url = env.get("WORLDTALK_BACKEND_URL")
        if not url:
            raise WorldtalkError("WORLDTALK_BACKEND_URL is required for the http backend")
        return HttpBackend(
            base_url=url,
            model=env.get("WORLDTALK_BACKEND_MODEL", ""),
            api_key=env.get("WORLDTALK_BACKEND_API_KEY", ""),
            timeout=float(env.get("WORLDTALK_BACKEND_TIMEOUT", "60")),
        )
    raise WorldtalkError(f"unknown backend kind: {kind!r}")


@dataclass
class ServiceConfig:
    persist_dir: Path
    backend: object = None
    default_budget: SamplingBudget = field(default_factory=SamplingBudget)
    renders_per_condition: int = 4
    render_max_attempts: int = 2000
    translation_samples: int = 5

    def __post_init__(self):
        self.persist_dir = Path(self.persist_dir)
        self.persist_dir.mkdir(parents=True, exist_ok=True)
        if self.backend is None:
            self.backend = backend_from_env()


class _LiveSession:
    """One session's engine state plus its write lock (single writer)."""

    def __init__(self, record, session):
        self.record = record
        self.session = session
        self.lock = threading.Lock()


def _budget_json(budget: SamplingBudget):
    return {
        "target_accepted": budget.target_accepted,
        "max_attempts": budget.max_attempts,
        "parallel_chains": budget.parallel_chains,
    }


def _budget_from_json(data, default: SamplingBudget):
    if not data:
        return default
    return SamplingBudget(
        target_accepted=int(data.get("target_accepted", default.target_accepted)),
        max_attempts=int(data.get("max_attempts", default.max_attempts)),
        parallel_chains=int(data.get("parallel_chains", default.parallel_chains)),
    )


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


class SessionStore:
    """Creates, advances, persists, and reloads dialogue sessions."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self._sessions: dict[str, _LiveSession] = {}
        self._registry_lock = threading.Lock()

    # -- lifecycle ------------------------------------------------------------

    def create_session(self, world_id: str, seed=None, budget=None, deterministic_id=None, created_at=None) -> dict:
        if world_id not in WORLD_IDS and world_id != SCRATCH_WORLD_ID:
            raise WorldtalkError(f"unknown world: {world_id!r}")
        world = load_world(world_id)
        seed = secrets.randbits(48) if seed is None else int(seed)
        budget = _budget_from_json(budget, self.config.default_budget)
        session_id = deterministic_id or secrets.token_hex(8)
        record = {
            "schema_version": SCHEMA_VERSION,
            "session_id": session_id,
            "world_id": world_id,
            "created_at": created_at or datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "seed": seed,
            "budget": _budget_json(budget),
            "status": "active",
            "entries": [],
        }
        live = _LiveSession(record, Session(world=world, seed=seed, budget=budget))
        with self._registry_lock:
            self._sessions[session_id] = live
        self._persist(live)
        return self._public_record(live)

    def get(self, session_id: str) -> _LiveSession:
        with self._registry_lock:
            live = self._sessions.get(session_id)
        if live is None:
            live = self._load_from_disk(session_id)
            with self._registry_lock:
                self._sessions.setdefault(session_id, live)
        return live

    def record(self, session_id: str) -> dict:
        return self._public_record(self.get(session_id))

    def _public_record(self, live) -> dict:
        return json.loads(_dump(live.record))

    # -- persistence ------------------------------------------------------------

    def _path(self, session_id: str) -> Path:
        return self.config.persist_dir / f"{session_id}.jsonl"

    def _render_dir(self, session_id: str) -> Path:
        return self.config.persist_dir / "renders" / session_id

    def _persist(self, live):
        record = live.record
        header = {k: v for k, v in record.items() if k != "entries"}
        lines = [_dump(header)]
        lines.extend(_dump(entry) for entry in record["entries"])
        path = self._path(record["session_id"])
        tmp = path.with_suffix(".jsonl.tmp")
        tmp.write_text("\n".join(lines) + "\n", "utf-8")
        os.replace(tmp, path)

    def _load_from_disk(self, session_id: str) -> _LiveSession:
        path = self._path(session_id)
        if not path.exists():
            raise WorldtalkError(f"unknown session: {session_id!r}")
        record = load_transcript(path)
        live = _LiveSession(record, self._rebuild_session(record))
        return live

    def _rebuild_session(self, record) -> Session:
        world = load_world(record["world_id"])
        session = Session(
            world=world,
            seed=record["seed"],
            budget=_budget_from_json(record["budget"], self.config.default_budget),
        )
        for entry in record["entries"]:
            code = entry.get("code")
            if not code or entry.get("result", {}).get("kind") == "error":
                continue
            defines, condition_bodies, _query = split_commit_forms(parse(code).forms)
            if defines:
                session = add_definition(session, defines)
            for body in condition_bodies:
                session = add_condition(session, body)
        return session

    # -- utterance processing ------------------------------------------------------

    def post_utterance(self, session_id: str, payload: dict) -> dict:
        live = self.get(session_id)
        with live.lock:
            if live.record["status"] != "active":
                raise WorldtalkError("session is closed")
            if "code" in payload and payload.get("code"):
                entry = self._process_code(live, payload)
            else:
                entry = self._process_tagged(live, payload)
            live.record["entries"].append(entry)
            self._persist(live)
            return json.loads(_dump(entry))

    def _history(self, live):
        out = []
        for entry in live.record["entries"]:
            if entry.get("result", {}).get("kind") != "error" and entry.get("tag") and entry.get("code"):
                out.append((entry["tag"], entry["text"], entry["code"]))
        return out

    def _process_tagged(self, live, payload) -> dict:
        text = payload.get("text", "")
        tag = payload.get("tag", "")
        utterance = Utterance(text=text, tag=tag, index=len(live.record["entries"]))
        construct_text = asset_text("construct/medical.church") if tag == "ConstructFragment" else None
        candidates, _prompt = translate(
            utterance,
            live.session,
            self._history(live),
            self.config.backend,
            k=self.config.translation_samples,
            construct_model_text=construct_text,
        )
        chosen = payload.get("override_candidate")
        if chosen is None:
            chosen = next(i for i, c in enumerate(candidates) if c.valid)
        else:
            chosen = int(chosen)
            if not 0 <= chosen < len(candidates):
                raise IndexError(f"override_candidate {chosen} out of range (have {len(candidates)})")
            if not candidates[chosen].valid:
                raise WorldtalkError(f"candidate {chosen} is invalid: {candidates[chosen].reasons}")
        code = candidates[chosen].raw_text
        entry = {
            "index": len(live.record["entries"]),
            "tag": tag,
            "text": text,
            "candidates": [c.brief() for c in candidates],
            "chosen": chosen,
            "code": code,
            "result": None,
            "render_ref": None,
        }
        self._commit(live, entry, candidates[chosen].forms)
        return entry

    def _process_code(self, live, payload) -> dict:
        code = payload["code"]
        forms = parse(code).forms
        if not forms:
            raise WorldtalkError("empty code payload")
        entry = {
            "index": len(live.record["entries"]),
            "tag": payload.get("tag") or _infer_tag(forms),
            "text": payload.get("text", code),
            "candidates": [],
            "chosen": None,
            "code": code,
            "result": None,
            "render_ref": None,
        }
        self._commit(live, entry, forms)
        return entry

    def _commit(self, live, entry, forms):
        defines, condition_bodies, query_body = split_commit_forms(forms)
        if defines:
            live.session = add_definition(live.session, defines)
        for body in condition_bodies:
            live.session = add_condition(live.session, body)
        if query_body is not None:
            samples, summary = run_query(live.session, query_body)
            entry["result"] = {
                "kind": "posterior",
                "summary": summary.to_json(),
                "attempts": samples.attempts,
                "accepted": samples.accepted,
            }
        elif condition_bodies:
            entry["result"] = {"kind": "none"}
            entry["render_ref"] = self._render_conditioned(live, entry["index"])
        else:
            entry["result"] = {
                "kind": "definition-installed",
                "forms": [print_form(d) for d in defines],
            }

    def _render_conditioned(self, live, entry_index):
        world = live.session.world
        if world.render_kind == "none" or self.config.renders_per_condition < 1:
            return None
        try:
            samples = rejection_sample(
                live.session.program_forms,
                list(live.session.conditions),
                world.root_expr,
                SamplingBudget(
                    target_accepted=self.config.renders_per_condition,
                    max_attempts=self.config.render_max_attempts,
                    parallel_chains=1,
                ),
                derive_chain_seed(live.session.seed, _RENDER_STREAM, entry_index),
            )
        except (ZeroAcceptanceError, ChurchEvalError):
            return None
        render_dir = self._render_dir(live.record["session_id"])
        render_dir.mkdir(parents=True, exist_ok=True)
        for k, state in enumerate(samples.values):
            scene, svg = render_scene(state, world)
            (render_dir / f"{entry_index}-{k}.svg").write_text(svg, "utf-8")
            (render_dir / f"{entry_index}-{k}.json").write_text(_dump(scene.to_json()), "utf-8")
        return {"count": len(samples.values), "entry": entry_index}

    def render_svg(self, session_id: str, entry_index: int, k: int) -> str:
        path = self._render_dir(session_id) / f"{entry_index}-{k}.svg"
        if not path.exists():
            raise WorldtalkError(f"no render for entry {entry_index} sample {k}")
        return path.read_text("utf-8")


def _infer_tag(forms):
    kinds = {f[0].name for f in forms if hasattr(f, "items") and f.items}
    if "query" in kinds:
        return "Query"
    if "condition" in kinds:
        return "Condition"
    return "Define"


def load_transcript(path) -> dict:
    """Reconstruct a SessionRecord from its JSONL transcript."""
    lines = Path(path).read_text("utf-8").splitlines()
    if not lines:
        raise TranscriptError(f"{path}: empty transcript")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise TranscriptError(f"{path}: corrupt header: {exc}") from exc
    version = header.get("schema_version")
    if version != SCHEMA_VERSION:
        raise TranscriptError(f"{path}: unsupported schema version {version!r} (expected {SCHEMA_VERSION})")
    entries = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            entries.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise TranscriptError(f"{path}: corrupt entry at line {lineno}: {exc}") from exc
    header["entries"] = entries
    return header


# --- dialogue scripts -----------------------------------------------------------


def run_script(script_path, out_path, store: SessionStore) -> dict:
    """Execute a dialogue script and write the full transcript JSON.

    Everything in the output, including the created-at stamp, is a function
    of (script, budget, fixtures), so a rerun is byte-identical.
    """
    script = json.loads(Path(script_path).read_text("utf-8"))
    world_id = script["world"]
    record = store.create_session(
        world_id,
        seed=script.get("seed", 0),
        budget=script.get("budget"),
        deterministic_id=script.get("session_id", f"script-{Path(script_path).stem}"),
        created_at=script.get("created_at", "1970-01-01T00:00:00+00:00"),
    )
    session_id = record["session_id"]
    for utterance in script["utterances"]:
        store.post_utterance(session_id, utterance)
    final = store.record(session_id)
    if out_path:
        text = json.dumps(final, sort_keys=True, ensure_ascii=False, indent=2) + "\n"
        Path(out_path).write_text(text, "utf-8")
    return final


# --- HTTP API --------------------------------------------------------------------


def create_app(config: ServiceConfig = None, store: SessionStore = None, static_dir=None):
    from fastapi import FastAPI, HTTPException, Response

    if store is None:
        store = SessionStore(config or ServiceConfig(persist_dir=Path("sessions")))

    app = FastAPI(title="worldtalk", version="0.1.0")
    app.state.store = store

    def _http_error(exc):
        if isinstance(exc, NoValidCandidateError):
            return HTTPException(status_code=422, detail={"error": "no-valid-candidate", "reasons": exc.reasons})
        if isinstance(exc, ZeroAcceptanceError):
            return HTTPException(
                status_code=409,
                detail={
                    "error": "zero-acceptance",
                    "attempts": exc.attempts,
                    "first_failure_counts": exc.first_failure_counts,
                    "suspect_continuous_equality": exc.suspect_continuous_equality,
                },
            )
        if isinstance(exc, BackendError):
            return HTTPException(status_code=502, detail={"error": "backend", "message": str(exc)})
        if isinstance(exc, IndexError):
            return HTTPException(status_code=400, detail={"error": "bad-request", "message": str(exc)})
        if isinstance(exc, WorldtalkError) and "unknown session" in str(exc):
            return HTTPException(status_code=404, detail={"error": "not-found", "message": str(exc)})
        if isinstance(exc, WorldtalkError) and "unknown world" in str(exc):
            return HTTPException(status_code=404, detail={"error": "not-found", "message": str(exc)})
        if isinstance(exc, WorldtalkError):
            return HTTPException(status_code=400, detail={"error": "bad-request", "message": str(exc)})
        raise exc

    @app.get("/worlds")
    def http_list_worlds():
        out = []
        for world_id in WORLD_IDS:
            world = load_world(world_id)
            out.append(
                {
                    "id": world_id,
                    "render_kind": world.render_kind,
                    "forms": len(world.model_source.forms),
                }
            )
        return out

    @app.post("/sessions", status_code=201)
    def http_create_session(payload: dict):
        try:
            return store.create_session(
                payload.get("world", ""), seed=payload.get("seed"), budget=payload.get("budget")
            )
        except (WorldtalkError, ValueError) as exc:
            raise _http_error(exc) from exc

    @app.get("/sessions/{session_id}")
    def http_get_session(session_id: str):
        try:
            return store.record(session_id)
        except WorldtalkError as exc:
            raise _http_error(exc) from exc

    @app.post("/sessions/{session_id}/utterances")
    def http_post_utterance(session_id: str, payload: dict):
        try:
            return store.post_utterance(session_id, payload)
        except (WorldtalkError, ChurchEvalError, IndexError) as exc:
            raise _http_error(exc) from exc

    @app.get("/sessions/{session_id}/entries/{entry_index}/render")
    def http_get_render(session_id: str, entry_index: int, k: int = 0):
        try:
            svg = store.render_svg(session_id, entry_index, k)
        except WorldtalkError as exc:
            raise HTTPException(status_code=404, detail={"error": "not-found", "message": str(exc)}) from exc
        return Response(content=svg, media_type="image/svg+xml")

    if static_dir and Path(static_dir).exists():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
