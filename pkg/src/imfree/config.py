"""Declarative run configuration: YAML (JSON is a subset) with strict key checking."""

from __future__ import annotations

import yaml


class ConfigError(ValueError):
    def __init__(self, msg, line=None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


NUM = (int, float)
ANY = object()


def _list_of(kind):
    return ("list", kind)


MODEL = {"name": str, "params": dict, "domain": _list_of(_list_of(NUM))}
POVM = {
    "canonical": str,
    "params": dict,
    "invariant": {"rotations": int, "seed": int, "include_reference": bool},
    "file": str,
    "elements": _list_of({"label": str, "entries": _list_of(_list_of(NUM))}),
    "dim": int,
}
SCHEMA = {
    "command": str,
    "model": MODEL,
    "points": _list_of(_list_of(NUM)),
    "grid": _list_of(_list_of(NUM)),
    "povm": POVM,
    "gas_samples": int,
    "simulation": {"true_x": _list_of(NUM), "n_c": int, "n_trials": int, "grid": int, "seed": int},
    "asymmetry": {"n_starts": int, "seed": int},
    "fig3": {"delta_step": NUM, "delta_max": NUM, "targets": _list_of(_list_of(NUM)), "bases": _list_of(str)},
}


def _to_python(node):
    """Convert a composed YAML node, remembering the line of every mapping key."""
    if isinstance(node, yaml.MappingNode):
        out, lines = {}, {}
        for k, v in node.value:
            key = k.value
            if key in out:
                raise ConfigError(f"duplicate key {key!r}", k.start_mark.line + 1)
            out[key], lines[key] = _to_python(v), (k.start_mark.line + 1, v)
        return _Mapping(out, lines, node.start_mark.line + 1)
    if isinstance(node, yaml.SequenceNode):
        return _Sequence([_to_python(v) for v in node.value], node.start_mark.line + 1)
    return _Scalar(yaml.constructor.SafeConstructor().construct_object(node), node.start_mark.line + 1)


class _Mapping(dict):
    def __init__(self, data, lines, line):
        super().__init__(data)
        self.lines, self.line = lines, line


class _Sequence(list):
    def __init__(self, data, line):
        super().__init__(data)
        self.line = line


class _Scalar:
    def __init__(self, value, line):
        self.value, self.line = value, line


def _plain(obj):
    if isinstance(obj, _Mapping):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, _Sequence):
        return [_plain(v) for v in obj]
    return obj.value


def _check(obj, schema, where):
    line = getattr(obj, "line", None)
    if schema is ANY:
        return
    if isinstance(schema, dict):
        if not isinstance(obj, _Mapping):
            raise ConfigError(f"{where} must be a mapping", line)
        for key, val in obj.items():
            if key not in schema:
                raise ConfigError(f"unknown key {key!r} in {where}", obj.lines[key][0])
            _check(val, schema[key], f"{where}.{key}")
        return
    if schema is dict:
        if not isinstance(obj, _Mapping):
            raise ConfigError(f"{where} must be a mapping", line)
        return
    if isinstance(schema, tuple) and schema and schema[0] == "list":
        if not isinstance(obj, _Sequence):
            raise ConfigError(f"{where} must be a list", line)
        for i, item in enumerate(obj):
            _check(item, schema[1], f"{where}[{i}]")
        return
    if not isinstance(obj, _Scalar):
        raise ConfigError(f"{where} must be a scalar", line)
    v = obj.value
    kinds = schema if isinstance(schema, tuple) else (schema,)
    if isinstance(v, bool) and bool not in kinds:
        raise ConfigError(f"{where} must be {_kind_name(kinds)}, got a boolean", line)
    if not isinstance(v, kinds):
        raise ConfigError(f"{where} must be {_kind_name(kinds)}, got {type(v).__name__}", line)


def _kind_name(kinds) -> str:
    return " or ".join(k.__name__ for k in kinds)


def parse_config(text: str) -> dict:
    """Parse and validate configuration text; raises :class:`ConfigError`."""
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"syntax error: {getattr(exc, 'problem', exc)}",
                          mark.line + 1 if mark is not None else None) from None
    if node is None:
        return {}
    tree = _to_python(node)
    _check(tree, SCHEMA, "config")
    return _plain(tree)


def load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_config(text)
