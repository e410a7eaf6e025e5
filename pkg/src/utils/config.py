from dataclasses import fields

from dotenv import dotenv_values

from utils.errors import ConfigError

TRUE_WORDS = ("1", "true", "yes", "on")
FALSE_WORDS = ("0", "false", "no", "off")


def parse_bool(key, raw):
    word = str(raw).strip().lower()
    if word in TRUE_WORDS:
        return True
    if word in FALSE_WORDS:
        return False
    raise ConfigError(f"{key}: expected a boolean, got '{raw}'")


def coerce(key, raw, default):
    """Parse `raw` into the type of `default`."""
    if raw is None:
        raise ConfigError(f"{key}: missing value")
    if isinstance(default, bool):
        return parse_bool(key, raw)
    try:
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a {type(default).__name__}, got '{raw}'") from None
    return str(raw)


def format_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dataclass_from_mapping(cls, mapping, prefix=""):
    """Build `cls` from string values; keys missing from `mapping` keep their defaults."""
    defaults = cls()
    kwargs = {}
    for f in fields(cls):
        key = prefix + f.name
        if key in mapping:
            kwargs[f.name] = coerce(key, mapping[key], getattr(defaults, f.name))
    return cls(**kwargs)


def dataclass_lines(obj, prefix=""):
    return {prefix + f.name: format_value(getattr(obj, f.name)) for f in fields(obj)}


def read_key_values(path):
    """key=value pairs of a config file, `#` comments allowed."""
    try:
        values = dotenv_values(path)
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from None
    empty = sorted(key for key, value in values.items() if value is None)
    if empty:
        raise ConfigError(f"{path}: keys without a value: {', '.join(empty)}")
    return dict(values)
