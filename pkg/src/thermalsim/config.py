"""Flat key/value experiment configs.

The file format is one ``dotted.key = value`` pair per line with ``#``
comments; values are integers, floats, booleans, quoted or bare strings,
or ``[...]`` lists of those.  Example::

    experiment = error-vs-tau
    model.kind = mixed_field_ising
    model.n = 12
    time.t = 4.0
    grid.tau = [0.05, 0.08, 0.1, 0.125, 0.16, 0.2, 0.25, 0.4]
    noise.p0 = 3.5e-4
    noise.p1 = 9.5e-4
    initial.source = rpe
    initial.energy_per_site = -1.4
    seed = 7
"""

from __future__ import annotations


class ConfigError(ValueError):
    """Malformed config file or inconsistent experiment settings."""


def parse_value(text: str):
    text = text.strip()
    if not text:
        raise ConfigError("empty value")
    if text.startswith("[") and text.endswith("]"):
        inner = text[1:-1].strip()
        return [parse_value(part) for part in _split_list(inner)] if inner else []
    if text.startswith('"') and text.endswith('"') and len(text) >= 2:
        return text[1:-1]
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def _split_list(inner: str) -> list[str]:
    parts = []
    depth = 0
    current = []
    for ch in inner:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(current))
            current = []
        else:
            current.append(ch)
    if current:
        parts.append("".join(current))
    return parts


def parse_config_text(text: str) -> dict:
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: missing key")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            out[key] = parse_value(value)
        except ConfigError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
    return out


def parse_config_file(path) -> dict:
    try:
        with open(path) as fh:
            return parse_config_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
