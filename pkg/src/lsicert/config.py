"""Run configuration: a TOML file with a schema version and fixed sections.

Example::

    schema_version = 1

    [model]
    type = "gaussian"
    precision = [
      [1.0, 0.25],
      [0.25, 1.0],
    ]

    [run]
    seed = 7

Sections ``model`` and ``run`` are required; ``output``, ``sweep``,
``initial`` and ``pathological`` are optional. Unknown keys are rejected
and every problem is reported with its line and column.
"""

from __future__ import annotations

import re
from dataclasses import MISSING, asdict, dataclass, field, fields

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
import tomli_w

from .errors import ConfigError, ConfigSyntaxError, MissingRequired, UnknownKey
from .expr import parse_hamiltonian
from .model import build_gaussian, build_grid

SCHEMA_VERSION = 1


@dataclass
class ModelConfig:
    type: str
    precision: list | None = None
    linear: list | None = None
    grids: list | None = None
    hamiltonian: str | None = None
    base: list | None = None
    rho: str | list | None = None


@dataclass
class RunSettings:
    seed: int
    samples: int = 2000
    sweeps: int = 1000
    trials: int = 100
    exhaustive: bool = False
    tolerance: float = 1e-9
    safety_factor: float = 0.9


@dataclass
class OutputConfig:
    format: str = "json"
    path: str | None = None


@dataclass
class SweepConfig:
    multipliers: list | None = None
    start: float | None = None
    stop: float | None = None
    steps: int | None = None
    coupling: list | None = None

    def values(self) -> list:
        if self.multipliers is not None:
            return [float(m) for m in self.multipliers]
        return [float(m) for m in np.linspace(self.start, self.stop, self.steps)]


@dataclass
class InitialConfig:
    mean: list | None = None
    cov: list | None = None
    masses: list | None = None
    point: list | None = None


@dataclass
class PathologicalConfig:
    M: float = 1.0
    n: list = field(default_factory=lambda: [2, 5, 10])
    scale: float = 1.0


@dataclass
class RunConfig:
    model: ModelConfig
    run: RunSettings
    output: OutputConfig = field(default_factory=OutputConfig)
    sweep: SweepConfig | None = None
    initial: InitialConfig | None = None
    pathological: PathologicalConfig | None = None
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        """Plain nested dict with unset (``None``) entries dropped."""

        def prune(obj):
            if isinstance(obj, dict):
                return {k: prune(v) for k, v in obj.items() if v is not None}
            return obj

        data = {"schema_version": self.schema_version}
        for name in ("model", "run", "output", "sweep", "initial", "pathological"):
            section = getattr(self, name)
            if section is not None:
                data[name] = prune(asdict(section))
        return data

    def build_model(self):
        return build_model(self.model)


_SECTIONS = {
    "model": ModelConfig,
    "run": RunSettings,
    "output": OutputConfig,
    "sweep": SweepConfig,
    "initial": InitialConfig,
    "pathological": PathologicalConfig,
}
_REQUIRED_SECTIONS = ("model", "run")

_TOML_POSITION = re.compile(r"\(at line (\d+), column (\d+)\)")


def _locate(text: str, section: str | None, key: str) -> tuple[int, int]:
    """Line and column of ``key`` inside ``[section]`` (1-based; 0, 0 if absent)."""
    current = None
    header = re.compile(r"^\s*\[\s*([A-Za-z0-9_.\-]+)\s*\]")
    assign = re.compile(r"^(\s*)(" + re.escape(key) + r'|"' + re.escape(key) + r'")\s*=')
    for lineno, line in enumerate(text.splitlines(), start=1):
        m = header.match(line)
        if m:
            current = m.group(1)
            if section is not None and current == section and key == section:
                return lineno, line.index("[") + 1
            continue
        m = assign.match(line)
        if m and current == section:
            return lineno, len(m.group(1)) + 1
    return 0, 0


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _is_vector(x) -> bool:
    return isinstance(x, list) and all(_is_number(v) for v in x)


def _is_matrix(x) -> bool:
    return isinstance(x, list) and len(x) > 0 and all(_is_vector(r) for r in x)


_INT_KEYS = {"seed", "samples", "sweeps", "trials", "steps"}
_CHECKS = {
    ("model", "type"): (lambda v: v in ("gaussian", "grid"), 'must be "gaussian" or "grid"'),
    ("model", "precision"): (_is_matrix, "must be a matrix given as a list of rows"),
    ("model", "linear"): (_is_vector, "must be a list of numbers"),
    ("model", "grids"): (_is_matrix, "must be a list of per-coordinate point lists"),
    ("model", "hamiltonian"): (lambda v: isinstance(v, str), "must be an expression string"),
    ("model", "base"): (_is_matrix, "must be a list of per-coordinate weight lists"),
    ("model", "rho"): (
        lambda v: v == "empirical" or _is_vector(v),
        'must be "empirical" or a list of weights',
    ),
    ("run", "exhaustive"): (lambda v: isinstance(v, bool), "must be true or false"),
    ("output", "format"): (lambda v: v in ("json", "csv"), 'must be "json" or "csv"'),
    ("output", "path"): (lambda v: isinstance(v, str), "must be a string"),
    ("sweep", "multipliers"): (_is_vector, "must be a list of numbers"),
    ("sweep", "coupling"): (_is_matrix, "must be a matrix"),
    ("initial", "mean"): (_is_vector, "must be a list of numbers"),
    ("initial", "cov"): (_is_matrix, "must be a matrix"),
    ("initial", "masses"): (lambda v: isinstance(v, list), "must be a nested list of masses"),
    ("initial", "point"): (_is_vector, "must be a list of numbers"),
    ("pathological", "n"): (
        lambda v: isinstance(v, list) and all(isinstance(k, int) and k >= 2 for k in v),
        "must be a list of integers >= 2",
    ),
}


def _check_value(section: str, key: str, value):
    if key in _INT_KEYS:
        if not isinstance(value, int) or isinstance(value, bool) or value < 0:
            return "must be a nonnegative integer"
        if key in ("samples", "sweeps", "steps") and value < 1:
            return "must be at least 1"
        return None
    rule = _CHECKS.get((section, key))
    if rule is not None:
        ok, message = rule
        return None if ok(value) else message
    if key in ("tolerance", "safety_factor", "start", "stop", "M", "scale"):
        return None if _is_number(value) else "must be a number"
    return None


def _coerce(key: str, value):
    if _is_number(value) and key not in _INT_KEYS:
        return float(value)
    if isinstance(value, list):
        return value if key == "n" else [_coerce(key, v) for v in value]
    return value


def parse_config(text: str) -> RunConfig:
    """Parse and validate a configuration.

    Raises:
        ConfigSyntaxError: malformed TOML.
        UnknownKey: keys or sections outside the schema.
        MissingRequired: absent required sections or keys.
        ConfigError: values of the wrong shape or type.
    """
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = _TOML_POSITION.search(str(exc))
        line, col = (int(m.group(1)), int(m.group(2))) if m else (0, 0)
        raise ConfigSyntaxError([(line, col, _TOML_POSITION.sub("", str(exc)).strip())]) from None

    unknown, missing, invalid = [], [], []
    for key, value in raw.items():
        if key == "schema_version":
            continue
        if key not in _SECTIONS:
            unknown.append((*_locate(text, None, key), f"unknown key {key!r}"))
            if isinstance(value, dict):
                unknown[-1] = (*_locate(text, key, key), f"unknown section [{key}]")
        elif not isinstance(value, dict):
            invalid.append((*_locate(text, None, key), f"{key!r} must be a section"))

    if "schema_version" not in raw:
        missing.append((1, 1, "missing required key 'schema_version'"))
    elif raw["schema_version"] != SCHEMA_VERSION:
        invalid.append(
            (*_locate(text, None, "schema_version"), f"unsupported schema_version {raw['schema_version']!r}")
        )
    for name in _REQUIRED_SECTIONS:
        if name not in raw:
            missing.append((0, 0, f"missing required section [{name}]"))

    sections = {}
    for name, cls in _SECTIONS.items():
        body = raw.get(name)
        if not isinstance(body, dict):
            continue
        allowed = {f.name: f for f in fields(cls)}
        values = {}
        for key, value in body.items():
            where = _locate(text, name, key)
            if key not in allowed:
                unknown.append((*where, f"unknown key {key!r} in [{name}]"))
                continue
            problem = _check_value(name, key, value)
            if problem:
                invalid.append((*where, f"{name}.{key} {problem}"))
                continue
            values[key] = _coerce(key, value)
        for f in fields(cls):
            required = f.default is MISSING and f.default_factory is MISSING
            if required and f.name not in body:
                missing.append((*_locate(text, name, name), f"missing required key {name}.{f.name}"))
        sections[name] = values

    if "model" in sections and not any(e[2].startswith("model.") for e in invalid):
        absent, bad = _model_problems(text, sections["model"])
        missing.extend(absent)
        invalid.extend(bad)
    sweep = sections.get("sweep")
    if sweep is not None and "multipliers" not in sweep:
        if not all(k in sweep for k in ("start", "stop", "steps")):
            missing.append(
                (*_locate(text, "sweep", "sweep"), "[sweep] needs multipliers or start, stop and steps")
            )

    errors = unknown + missing + invalid
    if errors:
        # the class names the first kind of problem; the list holds them all
        cls = UnknownKey if unknown else MissingRequired if missing else ConfigError
        raise cls(sorted(errors, key=lambda e: (e[0], e[1])))

    return RunConfig(
        schema_version=raw["schema_version"],
        **{name: _SECTIONS[name](**values) for name, values in sections.items()},
    )


def _model_problems(text, model: dict):
    """Variant-specific ``(missing, invalid)`` problems of the model section."""
    where = lambda key: _locate(text, "model", key)  # noqa: E731
    kind = model.get("type")
    absent, problems = [], []
    if kind == "gaussian":
        J = model.get("precision")
        if J is None:
            return [(*where("model"), "missing required key model.precision for a gaussian model")], []
        n = len(J)
        if any(len(row) != n for row in J):
            problems.append((*where("precision"), "model.precision must be square"))
        if model.get("linear") is not None and len(model["linear"]) != n:
            problems.append((*where("linear"), f"model.linear must have {n} entries"))
        for key in ("grids", "hamiltonian", "base", "rho"):
            if key in model:
                problems.append((*where(key), f"model.{key} does not apply to a gaussian model"))
    elif kind == "grid":
        for key in ("grids", "hamiltonian"):
            if key not in model:
                absent.append((*where("model"), f"missing required key model.{key} for a grid model"))
        for key in ("precision", "linear"):
            if key in model:
                problems.append((*where(key), f"model.{key} does not apply to a grid model"))
        if "grids" in model and "hamiltonian" in model:
            try:
                parse_hamiltonian(model["hamiltonian"], len(model["grids"]))
            except Exception as exc:  # located at the expression
                line, col = where("hamiltonian")
                problems.append((line, col, f"model.hamiltonian: {exc}"))
    return absent, problems


def build_model(m: ModelConfig):
    """Instantiate the model described by a validated config section."""
    if m.type == "gaussian":
        return build_gaussian(m.precision, m.linear)
    expr = parse_hamiltonian(m.hamiltonian, len(m.grids))
    return build_grid([np.asarray(g, float) for g in m.grids], expr, base=m.base, rho=m.rho)


def serialize_config(cfg: RunConfig) -> str:
    """TOML text that parses back to an equal :class:`RunConfig`."""
    return tomli_w.dumps(cfg.to_dict(), multiline_strings=False)


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
