"""Schematic renderings of sampled world states.

Sampled states become a SceneDescription (a documented JSON shape) plus an
SVG string. The drawings are deliberately flat: shape, color, and position
are exactly the abstractions the language conditions on, so the SVG is
deterministic and diffable per seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .compiler import compile_expr
from .errors import WorldtalkError
from .sexpr import parse_one
from .values import NIL, Pair, Symbol, iter_list

__all__ = ["SceneDescription", "Entity", "render_scene"]

CELL = 60


@dataclass
class Entity:
    id: str
    glyph: str
    color: tuple
    x: float
    y: float
    width: float
    height: float
    label: str = ""

    def to_json(self):
        return {
            "id": self.id,
            "glyph": self.glyph,
            "color": list(self.color),
            "x": self.x,
            "y": self.y,
            "width": self.width,
            "height": self.height,
            "label": self.label,
        }


@dataclass
class SceneDescription:
    kind: str
    entities: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    overlay: list = field(default_factory=list)
    frames: list | None = None

    def to_json(self):
        out = {
            "kind": self.kind,
            "entities": [e.to_json() for e in self.entities],
            "edges": list(self.edges),
            "overlay": list(self.overlay),
        }
        if self.frames is not None:
            out["frames"] = [f.to_json() for f in self.frames]
        return out


def _alist(value):
    out = {}
    for entry in iter_list(value):
        if type(entry) is Pair and type(entry.head) is Symbol:
            out[entry.head.name] = entry.tail
    return out


def _color_triple(value):
    if value is NIL or value is None:
        return (128, 128, 128)
    rgb = [int(v) for v in iter_list(value)]
    return tuple(rgb[:3]) if len(rgb) >= 3 else (128, 128, 128)


def _sym(value, default=""):
    return value.name if type(value) is Symbol else default


def render_scene(state, world):
    """Render a sampled root state for the given world; returns (scene, svg)."""
    kind = world.render_kind
    if kind == "table-scene":
        scene = _table_scene(state)
    elif kind == "frame-sequence":
        scene = _frame_sequence(state)
    elif kind == "family-tree":
        scene = _family_tree(state)
    elif kind == "gridworld":
        scene = _gridworld_scene(state, world)
    else:
        raise WorldtalkError(f"world {world.id!r} has no renderable state")
    return scene, _svg(scene)


# --- tabletop scenes -----------------------------------------------------------


def _table_scene(state):
    scene = SceneDescription(kind="table-scene")
    x = 40.0
    for obj in iter_list(state):
        fields = _alist(obj)
        shape = _sym(fields.get("shape"), "mug")
        scene.entities.append(
            Entity(
                id=_sym(fields.get("object-id"), "obj"),
                glyph=shape,
                color=_color_triple(fields.get("color")),
                x=x,
                y=120.0,
                width=36.0,
                height=36.0,
                label=shape,
            )
        )
        x += 52.0
    return scene


# --- physics frames ------------------------------------------------------------


def _frame_sequence(state):
    frames = sorted(
        ((entry.head, _alist(entry.tail)) for entry in iter_list(state)), key=lambda kv: kv[0]
    )
    scene = SceneDescription(kind="frame-sequence", frames=[])
    for time, content in frames:
        frame = SceneDescription(kind="physics-frame")
        for obj in iter_list(content.get("scene_states", NIL)):
            fields = _alist(obj)
            radius = float(fields.get("object_radius", 1.0))
            x = float(fields.get("x", 0.0))
            shape = _sym(fields.get("shape"), "sphere")
            frame.entities.append(
                Entity(
                    id=f"{_sym(fields.get('object_id'), 'obj')}@t{int(time)}",
                    glyph="sphere" if shape == "sphere" else "block",
                    color=_color_triple(fields.get("color")),
                    x=220.0 + x * 28.0,
                    y=40.0,
                    width=radius * 28.0,
                    height=radius * 28.0,
                    label=f"v={float(fields.get('v', 0.0)):.2f}",
                )
            )
        for event in iter_list(content.get("event_states", NIL)):
            fields = _alist(event)
            frame.overlay.append(
                {
                    "type": "event",
                    "predicates": [p.name for p in iter_list(fields.get("event_predicates", NIL))],
                    "subject": _sym(fields.get("event_subject")),
                }
            )
        scene.frames.append(frame)
    return scene


# --- family trees ---------------------------------------------------------------


def _family_tree(state):
    persons = []
    for node in iter_list(state):
        fields = _alist(node)
        persons.append(
            {
                "id": _sym(fields.get("person-id")),
                "name": _sym(fields.get("name")),
                "gender": _sym(fields.get("gender")),
                "parent_1": _sym(fields.get("parent-1-id")),
                "partner": _sym(fields.get("partner-id")),
                "children": [_sym(c) for c in iter_list(fields.get("child-ids", NIL))],
            }
        )
    depth = {}

    def person_depth(pid):
        if pid in depth:
            return depth[pid]
        record = next((p for p in persons if p["id"] == pid), None)
        if record is None:
            return 0
        if record["parent_1"]:
            d = person_depth(record["parent_1"]) + 1
        else:
            partner = next((p for p in persons if p["id"] == record["partner"]), None)
            d = person_depth(partner["parent_1"]) + 1 if partner and partner["parent_1"] else 0
        depth[pid] = d
        return d

    scene = SceneDescription(kind="family-tree")
    columns = {}
    positions = {}
    for p in persons:
        d = person_depth(p["id"])
        col = columns.get(d, 0)
        columns[d] = col + 1
        x, y = 60.0 + col * 110.0, 50.0 + d * 90.0
        positions[p["id"]] = (x, y)
        scene.entities.append(
            Entity(
                id=p["id"],
                glyph="person",
                color=(70, 130, 180) if p["gender"] == "male" else (210, 105, 30),
                x=x,
                y=y,
                width=40.0,
                height=40.0,
                label=p["name"],
            )
        )
    for p in persons:
        if p["partner"] and p["id"] < p["partner"]:
            scene.edges.append({"kind": "partner", "source": p["id"], "target": p["partner"]})
        for child in p["children"]:
            scene.edges.append({"kind": "parent", "source": p["id"], "target": child})
    scene.overlay = [
        {"type": "edge-points", "points": {pid: list(xy) for pid, xy in sorted(positions.items())}}
    ]
    return scene


# --- gridworld -------------------------------------------------------------------

_CELL_COLORS = {
    "lawn": (144, 200, 120),
    "office": (250, 210, 120),
    "sushi": (240, 130, 130),
    "pizza": (240, 130, 130),
    "vegetarian": (240, 130, 130),
}
_STREET_COLOR = (200, 200, 205)

_X_INC = {"west": -1, "east": 1, "north": 0, "south": 0, "stay": 0}
_Y_INC = {"north": -1, "south": 1, "west": 0, "east": 0, "stay": 0}


def _gridworld_scene(state, world):
    grid_value = compile_expr(parse_one("gridworld"))(None, world.fresh_world(0))
    rows = [[_sym(c) for c in iter_list(row)] for row in iter_list(grid_value)]
    scene = SceneDescription(kind="gridworld")
    for yi, row in enumerate(rows):
        for xi, cell in enumerate(row):
            scene.entities.append(
                Entity(
                    id=f"cell-{xi + 1}-{yi + 1}",
                    glyph="cell",
                    color=_CELL_COLORS.get(cell, _STREET_COLOR),
                    x=xi * CELL,
                    y=yi * CELL,
                    width=CELL,
                    height=CELL,
                    label=cell,
                )
            )
    # Re-walk the policy to recover coordinates (the trace stores locations only).
    steps = []
    for pair_value in iter_list(state):
        action_loc = list(iter_list(pair_value))
        action = action_loc[0]
        motion = _sym(action.head) if type(action) is Pair else "start"
        direction = _sym(action.tail) if type(action) is Pair else "start"
        steps.append((motion, direction))
    x, y = 1, 3
    path = [(x, y)]
    max_x, max_y = len(rows[0]), len(rows)
    for motion, direction in steps[1:]:
        nx = x if x >= max_x else x + _X_INC.get(direction, 0)
        nx = x if nx < 1 else nx
        ny = y if y >= max_y else y + _Y_INC.get(direction, 0)
        ny = y if ny < 1 else ny
        path.append((nx, ny))
        x, y = nx, ny
    for i in range(len(path) - 1):
        (x0, y0), (x1, y1) = path[i], path[i + 1]
        scene.overlay.append(
            {
                "type": "arrow",
                "from": [(x0 - 0.5) * CELL, (y0 - 0.5) * CELL],
                "to": [(x1 - 0.5) * CELL, (y1 - 0.5) * CELL],
                "motion": steps[i + 1][0],
            }
        )
    return scene


# --- SVG -------------------------------------------------------------------------


def _fill(color):
    return f"rgb({color[0]},{color[1]},{color[2]})"


def _entity_svg(entity):
    x, y, w, h = entity.x, entity.y, entity.width, entity.height
    fill = _fill(entity.color)
    label = (
        f'<text x="{x + w / 2:.1f}" y="{y + h + 14:.1f}" font-size="11" text-anchor="middle">{entity.label}</text>'
        if entity.label
        else ""
    )
    if entity.glyph == "sphere" or entity.glyph == "person":
        r = w / 2
        return f'<circle cx="{x + r:.1f}" cy="{y + r:.1f}" r="{r:.1f}" fill="{fill}" stroke="#333"/>' + label
    if entity.glyph == "bowl":
        return (
            f'<path d="M {x:.1f} {y + h * 0.4:.1f} a {w / 2:.1f} {h * 0.6:.1f} 0 0 0 {w:.1f} 0 z" '
            f'fill="{fill}" stroke="#333"/>' + label
        )
    if entity.glyph == "mug":
        body = f'<rect x="{x:.1f}" y="{y:.1f}" width="{w * 0.8:.1f}" height="{h:.1f}" fill="{fill}" stroke="#333"/>'
        handle = (
            f'<path d="M {x + w * 0.8:.1f} {y + h * 0.25:.1f} a {w * 0.2:.1f} {h * 0.25:.1f} 0 0 1 0 {h * 0.5:.1f}" '
            f'fill="none" stroke="#333" stroke-width="3"/>'
        )
        return body + handle + label
    if entity.glyph == "can":
        return (
            f'<rect x="{x + w * 0.15:.1f}" y="{y - h * 0.2:.1f}" width="{w * 0.7:.1f}" height="{h * 1.2:.1f}" '
            f'rx="4" fill="{fill}" stroke="#333"/>' + label
        )
    if entity.glyph == "cell":
        rect = f'<rect x="{x:.1f}" y="{y:.1f}" width="{w:.1f}" height="{h:.1f}" fill="{fill}" stroke="#555"/>'
        text = (
            f'<text x="{x + w / 2:.1f}" y="{y + h / 2 + 4:.1f}" font-size="10" text-anchor="middle">{entity.label}</text>'
        )
        return rect + text
    # default block
    return f'<rect x="{x:.1f}" y="{y:.1f}" width="{w:.1f}" height="{h:.1f}" fill="{fill}" stroke="#333"/>' + label


def _scene_body(scene, y_offset=0.0):
    parts = []
    if scene.kind == "table-scene":
        parts.append(f'<line x1="20" y1="{170 + y_offset:.1f}" x2="680" y2="{170 + y_offset:.1f}" stroke="#444" stroke-width="3"/>')
    points = {}
    for item in scene.overlay:
        if item.get("type") == "edge-points":
            points = item["points"]
    for edge in scene.edges:
        src, dst = points.get(edge["source"]), points.get(edge["target"])
        if src and dst:
            dash = ' stroke-dasharray="5,4"' if edge["kind"] == "partner" else ""
            parts.append(
                f'<line x1="{src[0] + 20:.1f}" y1="{src[1] + 20 + y_offset:.1f}" '
                f'x2="{dst[0] + 20:.1f}" y2="{dst[1] + 20 + y_offset:.1f}" stroke="#666"{dash}/>'
            )
    for entity in scene.entities:
        shifted = Entity(
            entity.id, entity.glyph, entity.color, entity.x, entity.y + y_offset, entity.width, entity.height, entity.label
        )
        parts.append(_entity_svg(shifted))
    for item in scene.overlay:
        if item.get("type") == "arrow":
            (x0, y0), (x1, y1) = item["from"], item["to"]
            parts.append(
                f'<line x1="{x0:.1f}" y1="{y0 + y_offset:.1f}" x2="{x1:.1f}" y2="{y1 + y_offset:.1f}" '
                f'stroke="#202080" stroke-width="3" marker-end="url(#arrowhead)"/>'
            )
    return parts


def _svg(scene):
    parts = [
        '<defs><marker id="arrowhead" markerWidth="8" markerHeight="8" refX="6" refY="3" orient="auto">'
        '<path d="M0,0 L6,3 L0,6 z" fill="#202080"/></marker></defs>'
    ]
    if scene.frames is not None:
        height = 110 * len(scene.frames) + 40
        for i, frame in enumerate(scene.frames):
            parts.append(f'<text x="8" y="{i * 110 + 60:.1f}" font-size="11">t={i}</text>')
            parts.extend(_scene_body(frame, y_offset=i * 110.0))
        width = 700
    else:
        parts.extend(_scene_body(scene))
        if scene.kind == "gridworld":
            width, height = 320, 380
        elif scene.kind == "family-tree":
            width, height = 760, 420
        else:
            width, height = 700, 220
    body = "".join(parts)
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width} {height}" '
        f'width="{width}" height="{height}">{body}</svg>'
    )
