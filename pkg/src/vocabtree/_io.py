"""Small text/JSON helpers shared by the file formats."""

import json
import math
import re
import unicodedata

_ESCAPED = re.compile(r"^U\+([0-9A-F]{4,6})$")


def escape_token(token):
    """Render a single-character whitespace/control token as ``U+XXXX``."""
    if len(token) == 1 and (token.isspace()
                            or unicodedata.category(token) in ("Cc", "Cf", "Zs", "Zl", "Zp")):
        return "U+%04X" % ord(token)
    return token


def unescape_token(field):
    m = _ESCAPED.match(field)
    if m:
        return chr(int(m.group(1), 16))
    return field


def _format_float(x):
    if not math.isfinite(x):
        raise ValueError("non-finite float cannot be written as JSON: %r" % x)
    s = format(x, ".17g")
    if "e" not in s and "." not in s and "inf" not in s:
        s += ".0"
    return s


def dumps_json(obj, indent=None, _level=0):
    """Deterministic JSON: insertion-ordered keys, 17 significant digits for floats."""
    if isinstance(obj, bool) or obj is None:
        return {True: "true", False: "false", None: "null"}[obj]
    if isinstance(obj, int):
        return str(int(obj))
    if isinstance(obj, float):
        return _format_float(obj)
    if hasattr(obj, "item") and not isinstance(obj, (list, tuple, dict, str)):
        return dumps_json(obj.item(), indent, _level)  # numpy scalar
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        items = [(dumps_json(str(k)), dumps_json(v, indent, _level + 1)) for k, v in obj.items()]
        if not items:
            return "{}"
        if indent is None:
            return "{" + ", ".join("%s: %s" % kv for kv in items) + "}"
        pad = " " * (indent * (_level + 1))
        body = ",\n".join("%s%s: %s" % (pad, k, v) for k, v in items)
        return "{\n" + body + "\n" + " " * (indent * _level) + "}"
    if isinstance(obj, (list, tuple)) or hasattr(obj, "tolist"):
        seq = obj.tolist() if hasattr(obj, "tolist") else obj
        parts = [dumps_json(v, None, 0) if indent is None or _is_flat(v)
                 else dumps_json(v, indent, _level + 1) for v in seq]
        if indent is None or all(_is_flat(v) for v in seq):
            return "[" + ", ".join(parts) + "]"
        pad = " " * (indent * (_level + 1))
        return "[\n" + ",\n".join(pad + p for p in parts) + "\n" + " " * (indent * _level) + "]"
    raise TypeError("cannot serialise %r" % type(obj))


def _is_flat(v):
    if isinstance(v, dict):
        return False
    if isinstance(v, (list, tuple)):
        return all(not isinstance(x, (list, tuple, dict)) for x in v)
    return True
