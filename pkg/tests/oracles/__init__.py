"""Independent oracles plus small helpers to lift interpreter values into Python."""

from worldtalk.values import NIL, Pair, Symbol


def to_python(value):
    """Church value -> plain Python (proper lists -> list, dotted pair -> tuple)."""
    if type(value) is Symbol:
        return value.name
    if value is NIL:
        return []
    if type(value) is Pair:
        items = []
        node = value
        while type(node) is Pair:
            items.append(to_python(node.head))
            node = node.tail
        if node is NIL:
            return items
        return tuple(items + [to_python(node)])
    return value


def alist_to_dict(value):
    out = {}
    for entry in to_python(value):
        if isinstance(entry, tuple) and len(entry) == 2:
            out[entry[0]] = entry[1]
        elif isinstance(entry, list) and len(entry) >= 1:
            out[entry[0]] = entry[1:] if len(entry) > 2 else (entry[1] if len(entry) == 2 else [])
    return out
