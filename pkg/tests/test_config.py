import pytest

from imfree.config import ConfigError, parse_config


def test_valid_config_round_trip():
    cfg = parse_config("command: analyze\nmodel:\n  name: noon\n  params: {N: 3}\npoints: [[0.1], [0.2]]\n")
    assert cfg == {"command": "analyze", "model": {"name": "noon", "params": {"N": 3}}, "points": [[0.1], [0.2]]}


def test_json_is_accepted():
    assert parse_config('{"model": {"name": "spin"}}') == {"model": {"name": "spin"}}


def test_empty_config():
    assert parse_config("") == {}


@pytest.mark.parametrize("text,line,fragment", [
    ("model:\n  name: spin\n  colour: red\n", 3, "unknown key 'colour'"),
    ("model:\n  name: spin\n  name: noon\n", 3, "duplicate key"),
    ("simulation:\n  n_c: 1.5\n", 2, "must be int"),
    ("simulation:\n  n_trials: true\n", 2, "boolean"),
    ("points: 3\n", 1, "must be a list"),
    ("model: [1, 2]\n", 1, "must be a mapping"),
    ("povm:\n  invariant:\n    rotations: two\n", 3, "must be int"),
])
def test_errors_carry_line_numbers(text, line, fragment):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.line == line and fragment in str(info.value)


def test_syntax_error():
    with pytest.raises(ConfigError) as info:
        parse_config("model: {name: spin\n")
    assert "syntax error" in str(info.value)
