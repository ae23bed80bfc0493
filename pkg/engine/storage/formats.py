"""
Canonical JSON: sorted keys, floats at 17 significant digits, non-finite values as strings
"""
import json
import math
from pathlib import Path

from config.settings import Config
from models.base import to_plain

FLOAT_FORMAT = Config.FLOAT_FORMAT


def _scalar(value):
    if value is None:
        return 'null'
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return '"nan"'
        if math.isinf(value):
            return '"inf"' if value > 0 else '"-inf"'
        return format(value, FLOAT_FORMAT)
    return json.dumps(str(value), ensure_ascii=False)


def _render(value, indent, level):
    pad = ' ' * (indent * (level + 1))
    close = ' ' * (indent * level)
    if isinstance(value, dict):
        if not value:
            return '{}'
        items = [f'{pad}{json.dumps(str(key), ensure_ascii=False)}: {_render(value[key], indent, level + 1)}'
                 for key in sorted(value, key=str)]
        return '{\n' + ',\n'.join(items) + '\n' + close + '}'
    if isinstance(value, (list, tuple)):
        if not value:
            return '[]'
        if all(not isinstance(item, (dict, list, tuple)) for item in value):
            return '[' + ', '.join(_scalar(item) for item in value) + ']'
        items = [pad + _render(item, indent, level + 1) for item in value]
        return '[\n' + ',\n'.join(items) + '\n' + close + ']'
    return _scalar(value)


def canonical_json(value, indent=2):
    """Deterministic JSON text for models, numpy values and plain containers"""
    return _render(to_plain(value), indent, 0) + '\n'


def write_json(path, value):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(canonical_json(value), encoding='utf-8')
    return path
