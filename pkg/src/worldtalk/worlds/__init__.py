"""Bundled world models: loading, sampling, and prior sanity checks.

Each world ships three text assets: the generative model, the prompt examples
used for translation, and the canned translations the mock backend replays.
A shared prelude of list helpers is composed in front of every model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources

from ..compiler import compile_expr, compile_program, run_program
from ..errors import WorldtalkError
from ..rng import derive_chain_seed
from ..runtime import WorldTrace
from ..sexpr import SExpr, SourceUnit, parse, parse_one
from ..values import NIL, Symbol, iter_list

__all__ = [
    "WorldModel",
    "WORLD_IDS",
    "SCRATCH_WORLD_ID",
    "load_world",
    "list_worlds",
    "sample_world_state",
    "check_world_statistics",
    "asset_text",
]

WORLD_IDS = ["tug-of-war", "kinship", "scenes-static", "scenes-physics", "agents"]

# Pseudo-world for building a model from scratch: empty model, no examples of
# its own (the construct prompt shows an unrelated world model instead).
SCRATCH_WORLD_ID = "scratch"

_CATALOG = {
    "tug-of-war": {
        "dir": "tug_of_war",
        "render_kind": "none",
        "root_expr": "(map (lambda (p) (list p (strength p) (laziness p))) '(josh lio alex gabe))",
    },
    "kinship": {
        "dir": "kinship",
        "render_kind": "family-tree",
        "root_expr": "T",
    },
    "scenes-static": {
        "dir": "scenes_static",
        "render_kind": "table-scene",
        "root_expr": "(objects-in-scene 'scene)",
    },
    "scenes-physics": {
        "dir": "scenes_physics",
        "render_kind": "frame-sequence",
        "root_expr": "base_states_for_times",
    },
    "agents": {
        "dir": "agents",
        "render_kind": "gridworld",
        "root_expr": "(optimal_policy_with_trajectory 'agent gridworld initial_x initial_y)",
    },
}


def asset_text(relpath: str) -> str:
    return resources.files(__package__).joinpath("assets").joinpath(relpath).read_text("utf-8")


@dataclass
class WorldModel:
    id: str
    prelude: SourceUnit
    model_source: SourceUnit
    examples_source: SourceUnit
    render_kind: str
    root_expr: SExpr | None
    translations_text: str = ""
    _compiled: list = field(default_factory=list, repr=False)
    _compiled_root: object = field(default=None, repr=False)

    @property
    def program_forms(self):
        return self.prelude.forms + self.model_source.forms

    def compiled_steps(self):
        if not self._compiled:
            self._compiled = compile_program(self.program_forms)
        return self._compiled

    def compiled_root(self):
        if self._compiled_root is None and self.root_expr is not None:
            self._compiled_root = compile_expr(self.root_expr)
        return self._compiled_root

    def fresh_world(self, seed: int) -> WorldTrace:
        world = WorldTrace(seed)
        run_program(self.compiled_steps(), world)
        return world


_CACHE = {}


def load_world(world_id: str) -> WorldModel:
    """Load, compose with the prelude, and dry-run one seeded world."""
    if world_id in _CACHE:
        return _CACHE[world_id]
    prelude = parse(asset_text("prelude.church"))
    if world_id == SCRATCH_WORLD_ID:
        world = WorldModel(
            id=world_id,
            prelude=prelude,
            model_source=parse(""),
            examples_source=parse(""),
            render_kind="none",
            root_expr=None,
            translations_text=asset_text("construct/translations.church"),
        )
    else:
        entry = _CATALOG.get(world_id)
        if entry is None:
            raise WorldtalkError(f"unknown world: {world_id!r} (known: {', '.join(WORLD_IDS)})")
        base = entry["dir"]
        world = WorldModel(
            id=world_id,
            prelude=prelude,
            model_source=parse(asset_text(f"{base}/model.church")),
            examples_source=parse(asset_text(f"{base}/examples.church")),
            render_kind=entry["render_kind"],
            root_expr=parse_one(entry["root_expr"]),
            translations_text=asset_text(f"{base}/translations.church"),
        )
    world.fresh_world(derive_chain_seed(0, 0, 0))  # dry-run: a broken asset should fail at load
    _CACHE[world_id] = world
    return world


def list_worlds():
    return list(WORLD_IDS)


def sample_world_state(world: WorldModel, seed: int):
    """Evaluate the world's root expression in a fresh seeded trace."""
    trace = world.fresh_world(seed)
    root = world.compiled_root()
    if root is None:
        return NIL
    return root(None, trace)


# --- prior statistics ---------------------------------------------------------


def _eval_in(world: WorldModel, seed: int, exprs: list[str]):
    trace = world.fresh_world(seed)
    return [compile_expr(parse_one(e))(None, trace) for e in exprs]


def _check(name, observed, expected, tolerance):
    return {
        "name": name,
        "observed": observed,
        "expected": expected,
        "tolerance": tolerance,
        "passed": abs(observed - expected) <= tolerance,
    }


def _flag(name, passed, detail=""):
    return {"name": name, "observed": detail or passed, "expected": True, "tolerance": 0, "passed": passed}


def _proportion_check(name, hits, n, expected):
    se = math.sqrt(expected * (1 - expected) / n)
    return _check(name, hits / n, expected, max(4 * se, 0.03))


def check_world_statistics(world_id: str, n_seeds: int = 1000, master_seed: int = 7):
    """Empirical prior statistics vs. analytic expectations, per world."""
    world = load_world(world_id)
    seeds = [derive_chain_seed(master_seed, 11, i) for i in range(n_seeds)]
    checks = []
    if world_id == "tug-of-war":
        strengths = []
        lazies = []
        for seed in seeds:
            for row in iter_list(sample_world_state(world, seed)):
                items = list(iter_list(row))
                strengths.append(items[1])
                lazies.append(items[2])
        n = len(strengths)
        mean_s = sum(strengths) / n
        se_s = 20 / math.sqrt(n)
        checks.append(_check("mean player strength", mean_s, 50.0, max(4 * se_s, 1.0)))
        checks.append(_check("mean laziness", sum(lazies) / n, 0.5, 4 * (1 / math.sqrt(12)) / math.sqrt(n)))
    elif world_id == "kinship":
        partnered = 0
        ok_sizes = 0
        for seed in seeds:
            tree = list(iter_list(sample_world_state(world, seed)))
            if len(tree) >= 2:
                partnered += 1
            if 1 <= len(tree) <= 27:
                ok_sizes += 1
        checks.append(_proportion_check("root has partner", partnered, n_seeds, 0.5))
        checks.append(_flag("tree size within bound", ok_sizes == n_seeds, f"{ok_sizes}/{n_seeds}"))
    elif world_id == "scenes-static":
        shapes_ok = True
        count_ok = True
        allowed = {Symbol("mug"), Symbol("can"), Symbol("bowl")}
        for seed in seeds:
            objects = list(iter_list(sample_world_state(world, seed)))
            if not 1 <= len(objects) <= 13:
                count_ok = False
            for obj in objects:
                entries = {e.head.name: e.tail for e in iter_list(obj)}
                if entries["shape"] not in allowed:
                    shapes_ok = False
        checks.append(_flag("shapes drawn from the catalog", shapes_ok))
        checks.append(_flag("object count within generator bound", count_ok))
    elif world_id == "scenes-physics":
        frames_ok = True
        for seed in seeds:
            states = list(iter_list(sample_world_state(world, seed)))
            if len(states) != 10:
                frames_ok = False
        checks.append(_flag("ten frames per simulation", frames_ok))
    elif world_id == "agents":
        bikes = 0
        for seed in seeds:
            (has_bike,) = _eval_in(world, seed, ["(has_bike 'agent)"])
            bikes += 1 if has_bike is True else 0
        checks.append(_proportion_check("agent owns a bike", bikes, n_seeds, 0.5))
    else:
        raise WorldtalkError(f"unknown world: {world_id!r}")
    return {"world": world_id, "n_seeds": n_seeds, "checks": checks, "passed": all(c["passed"] for c in checks)}
