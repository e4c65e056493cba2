"""Flat key=value configuration with dotted namespaces, plus the experiment
specification shared by the CLI and the experiment registry."""

import os
from dataclasses import dataclass, field

from .errors import ConfigurationError


def parse_config_text(text):
    """Parse `a.b = value` lines; '#' starts a comment; blanks ignored."""
    out = {}
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {ln}: expected key=value, got {raw!r}")
        key, val = line.split("=", 1)
        out[key.strip()] = val.strip()
    return out


def parse_config_file(path):
    with open(path) as fh:
        return parse_config_text(fh.read())


def coerce(value, typ):
    if typ is bool:
        low = value.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigurationError(f"not a boolean: {value!r}")
    if typ is list:
        return [float(v) for v in value.split(",") if v.strip()]
    try:
        return typ(value)
    except ValueError as exc:
        raise ConfigurationError(f"cannot read {value!r} as {typ.__name__}") from exc


def apply_overrides(schema, overrides):
    """Type-checked merge of string overrides into a schema's defaults.

    schema maps dotted key -> (type, default).  Unknown keys are refused.
    """
    params = {key: default for key, (_, default) in schema.items()}
    for key, val in overrides.items():
        if key not in schema:
            known = ", ".join(sorted(schema))
            raise ConfigurationError(f"unknown key {key!r}; known keys: {known}")
        params[key] = coerce(val, schema[key][0])
    return params


@dataclass
class ExperimentSpec:
    """A named experiment plus overrides, output directory and seed."""

    name: str
    overrides: dict = field(default_factory=dict)
    out_dir: str = "out"
    seed: int = 0
    threads: int = 1

    def out_path(self, filename):
        return os.path.join(self.out_dir, filename)


def resolve_threads(cli_value=None):
    """--threads beats VPFP_THREADS beats 1."""
    if cli_value is not None:
        return max(1, int(cli_value))
    env = os.environ.get("VPFP_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigurationError(f"VPFP_THREADS={env!r} is not an integer")
    return 1
