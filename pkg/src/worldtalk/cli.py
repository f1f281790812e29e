"""Command-line interface: repl, run, serve, worlds, check."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .engine import SamplingBudget, Session, add_condition, add_definition, run_query
from .errors import WorldtalkError
from .meaning import Utterance, split_commit_forms, translate
from .sexpr import parse
from .service import ServiceConfig, SessionStore, backend_from_env, run_script
from .worlds import WORLD_IDS, check_world_statistics, load_world


@click.group()
def main():
    """Talk to generative world models in plain language."""


@main.command()
def worlds():
    """List the bundled world models."""
    for world_id in WORLD_IDS:
        world = load_world(world_id)
        click.echo(f"{world_id:16s} render={world.render_kind:14s} forms={len(world.model_source.forms)}")


@main.command()
@click.option("--world", "world_id", default=None, help="Check one world (default: all).")
@click.option("--seeds", default=1000, show_default=True, help="Seeded samples per world.")
def check(world_id, seeds):
    """Run the prior statistics checks over seeded world samples."""
    targets = [world_id] if world_id else WORLD_IDS
    failed = False
    for wid in targets:
        report = check_world_statistics(wid, n_seeds=seeds)
        for item in report["checks"]:
            mark = "ok " if item["passed"] else "FAIL"
            click.echo(f"[{mark}] {wid}: {item['name']} observed={item['observed']} expected={item['expected']}")
            failed = failed or not item["passed"]
    sys.exit(1 if failed else 0)


def _print_summary(summary):
    data = summary.data
    if summary.kind == "boolean-probability":
        click.echo(f"P(true) = {data['p']:.4f} +/- {data['stderr']:.4f}  (n={summary.n}, acceptance={summary.acceptance_rate:.2%})")
    elif summary.kind == "numeric":
        click.echo(f"mean={data['mean']:.3f} stdev={data['stdev']:.3f}  (n={summary.n}, acceptance={summary.acceptance_rate:.2%})")
        counts = data["counts"]
        peak = max(counts) or 1
        for i, count in enumerate(counts):
            lo, hi = data["bin_edges"][i], data["bin_edges"][i + 1]
            bar = "#" * max(1, round(24 * count / peak)) if count else ""
            click.echo(f"  [{lo:8.2f},{hi:8.2f}) {bar} {count}")
    elif summary.kind == "categorical":
        for name, share in data["proportions"].items():
            click.echo(f"  {name}: {share:.3f}")
    else:
        for value, count in data["counts"].items():
            click.echo(f"  {value}: {count}")


@main.command()
@click.option("--world", "world_id", default="tug-of-war", show_default=True)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--target", default=1000, show_default=True, help="Accepted samples per query.")
@click.option("--max-attempts", default=1_000_000, show_default=True, type=int)
@click.option("--chains", default=None, type=int, help="Worker processes (default: cpu count).")
def repl(world_id, seed, target, max_attempts, chains):
    """Interactive dialogue loop.

    Lines starting with C:, Q:, D:, F: are Condition/Query/Define/fragment
    utterances routed through the translator; bare (...) lines are committed
    directly as code.
    """
    budget_kwargs = {"target_accepted": target, "max_attempts": max_attempts}
    if chains:
        budget_kwargs["parallel_chains"] = chains
    session = Session(world=load_world(world_id), seed=seed, budget=SamplingBudget(**budget_kwargs))
    backend = backend_from_env()
    history = []
    prefix_tags = {"C": "Condition", "Q": "Query", "D": "Define", "F": "ConstructFragment"}
    click.echo(f"world={world_id} seed={seed} backend={getattr(backend, 'name', 'unknown')}; blank line to exit")
    while True:
        try:
            line = input(f"{world_id}> ").strip()
        except EOFError:
            break
        if not line:
            break
        try:
            if line.startswith("("):
                forms = parse(line).forms
                code = line
                tag = None
            elif len(line) > 1 and line[1] == ":" and line[0].upper() in prefix_tags:
                tag = prefix_tags[line[0].upper()]
                text = line[2:].strip()
                utterance = Utterance(text=text, tag=tag, index=len(history))
                construct_text = None
                if tag == "ConstructFragment":
                    from .worlds import asset_text

                    construct_text = asset_text("construct/medical.church")
                candidates, _ = translate(utterance, session, history, backend, construct_model_text=construct_text)
                chosen = next(c for c in candidates if c.valid)
                code = chosen.raw_text
                forms = chosen.forms
                click.echo(code)
                history.append((tag, text, code))
            else:
                click.echo("usage: C:/Q:/D:/F: <utterance>, a bare (...) form, or a blank line to exit")
                continue
            defines, condition_bodies, query_body = split_commit_forms(forms)
            if defines:
                session = add_definition(session, defines)
            for body in condition_bodies:
                session = add_condition(session, body)
            if query_body is not None:
                _samples, summary = run_query(session, query_body)
                _print_summary(summary)
            elif condition_bodies:
                click.echo(f"ok: {len(session.conditions)} condition(s) committed")
            else:
                click.echo(f"ok: {len(session.extensions)} definition form(s) installed")
        except Exception as exc:  # noqa: BLE001 - surface and keep the loop alive
            click.echo(f"error: {exc}")


@main.command()
@click.argument("script", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--out", "out_path", type=click.Path(dir_okay=False), default=None)
@click.option("--persist-dir", type=click.Path(file_okay=False), default=".worldtalk-sessions", show_default=True)
def run(script, out_path, persist_dir):
    """Execute a dialogue script (JSON) and write the transcript."""
    try:
        store = SessionStore(ServiceConfig(persist_dir=Path(persist_dir)))
        record = run_script(script, out_path, store)
    except WorldtalkError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except Exception as exc:  # noqa: BLE001 - script failures exit nonzero
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    if not out_path:
        click.echo(json.dumps(record, sort_keys=True, ensure_ascii=False, indent=2))
    sys.exit(0)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8430, show_default=True, type=int)
@click.option("--persist-dir", type=click.Path(file_okay=False), default=".worldtalk-sessions", show_default=True)
@click.option("--static-dir", type=click.Path(file_okay=False), default=None, help="Built chat UI assets to serve at /ui.")
def serve(host, port, persist_dir, static_dir):
    """Serve the HTTP JSON API (and optionally the chat UI)."""
    import uvicorn

    from .service import create_app

    app = create_app(ServiceConfig(persist_dir=Path(persist_dir)), static_dir=static_dir)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
