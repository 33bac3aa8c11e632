"""Scenario files: INI-style text with explicit units in key names.

Numbers may be written as arithmetic on literals and ``pi`` (``pi/2.5``,
``3/7``); vectors are whitespace separated and matrix rows are separated by
``;``. A scenario is validated completely when it is loaded.
"""

from __future__ import annotations

import ast
import configparser
import math
import operator
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from ..errors import ConfigError

ATTITUDE_FILTERS = ("varest_implicit", "varest_explicit", "varest_symmetric", "game", "mekf", "cgo", "noop")
SE3_KINDS = {"se3_gravity": "gravity", "se3_force": "force", "se3_finite_time": "finite_time"}
KINDS = ("attitude",) + tuple(SE3_KINDS)

_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
        ast.Div: operator.truediv, ast.Pow: operator.pow, ast.USub: operator.neg,
        ast.UAdd: operator.pos}


def _eval(node):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id == "pi":
        return math.pi
    if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
        return _OPS[type(node.op)](_eval(node.left), _eval(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
        return _OPS[type(node.op)](_eval(node.operand))
    raise ValueError("unsupported expression")


def num(text: str) -> float:
    try:
        return float(_eval(ast.parse(text.strip(), mode="eval").body))
    except (SyntaxError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot read number {text!r}") from exc


def vec(text: str, n: int | None = None) -> np.ndarray:
    out = np.array([num(t) for t in text.replace(",", " ").split()])
    if n is not None and out.size != n:
        raise ConfigError(f"expected {n} values, got {text!r}")
    return out


def mat(text: str) -> np.ndarray:
    rows = [vec(r) for r in text.split(";") if r.strip()]
    if not rows or len({r.size for r in rows}) != 1:
        raise ConfigError(f"ragged matrix {text!r}")
    return np.vstack(rows)


@dataclass
class Section:
    """Typed accessors over one config section."""

    name: str
    raw: dict = field(default_factory=dict)

    def has(self, key: str) -> bool:
        return key in self.raw

    def _get(self, key, default):
        if key in self.raw:
            return self.raw[key]
        if default is _REQUIRED:
            raise ConfigError(f"[{self.name}] is missing {key}")
        return default

    def str(self, key, default=None):
        v = self._get(key, default)
        return v.strip() if isinstance(v, str) else v

    def num(self, key, default=None):
        v = self._get(key, default)
        return num(v) if isinstance(v, str) else v

    def vec(self, key, n=None, default=None):
        v = self._get(key, default)
        return vec(v, n) if isinstance(v, str) else v

    def mat(self, key, default=None):
        v = self._get(key, default)
        return mat(v) if isinstance(v, str) else v

    def flag(self, key, default=False):
        v = self._get(key, default)
        if isinstance(v, bool):
            return v
        if v.strip().lower() in ("1", "yes", "true", "on"):
            return True
        if v.strip().lower() in ("0", "no", "false", "off"):
            return False
        raise ConfigError(f"[{self.name}] {key} must be on/off")


_REQUIRED = object()
REQUIRED = _REQUIRED


@dataclass
class Scenario:
    name: str
    kind: str
    h: float
    duration: float
    seed: int
    filters: list
    sections: dict
    out_dir: str = "out"
    source: str = ""

    def section(self, name: str) -> Section:
        return self.sections.get(name, Section(name))

    @property
    def steps(self) -> int:
        return int(round(self.duration / self.h))


def _validate(s: Scenario) -> None:
    if s.kind not in KINDS:
        raise ConfigError(f"unknown scenario kind {s.kind!r}")
    if not (s.h > 0.0):
        raise ConfigError("h_s must be positive")
    if not (s.duration >= s.h):
        raise ConfigError("duration_s must be at least h_s")
    if s.kind == "attitude":
        if not s.filters:
            raise ConfigError("no filters configured")
        bad = [f for f in s.filters if f not in ATTITUDE_FILTERS]
        if bad:
            raise ConfigError(f"unknown filters {bad}")
        if any(f.startswith("varest") for f in s.filters) and "varest" not in s.sections:
            raise ConfigError("varest filters need a [varest] section")
        if any(f in ("game", "mekf", "cgo") for f in s.filters) and "baselines" not in s.sections:
            raise ConfigError("baseline filters need a [baselines] section")
    elif s.filters != [SE3_KINDS[s.kind]]:
        raise ConfigError(f"{s.kind} runs exactly the {SE3_KINDS[s.kind]} observer")


def parse_scenario(text: str, source: str = "<string>", overrides: dict | None = None) -> Scenario:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    sections = {name: Section(name, dict(cp[name])) for name in cp.sections()}
    for sec, kv in (overrides or {}).items():
        sections.setdefault(sec, Section(sec)).raw.update(kv)
    if "scenario" not in sections:
        raise ConfigError("missing [scenario] section")
    top = sections["scenario"]
    kind = top.str("kind", REQUIRED)
    default_filter = [SE3_KINDS[kind]] if kind in SE3_KINDS else []
    filters = [f.strip() for f in top.str("filters", "").replace(",", " ").split()] or default_filter
    s = Scenario(
        name=top.str("name", Path(source).stem),
        kind=kind,
        h=top.num("h_s", REQUIRED),
        duration=top.num("duration_s", REQUIRED),
        seed=int(top.num("seed", 0)),
        filters=filters,
        sections=sections,
        out_dir=top.str("out_dir", "out"),
        source=source,
    )
    _validate(s)
    return s


def load_scenario(path, overrides: dict | None = None) -> Scenario:
    """Load a scenario file, or a shipped scenario by bare name (``ch5_case1``)."""
    p = Path(path)
    if not p.exists() and p.suffix == "" and str(path) in shipped_scenarios():
        text = (resources.files("geoest") / "scenarios" / f"{path}.cfg").read_text()
        return parse_scenario(text, f"{path}.cfg", overrides)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
    return parse_scenario(text, str(p), overrides)


def load_overrides(path) -> dict:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read overrides {path}: {exc}") from exc
    return {name: dict(cp[name]) for name in cp.sections()}


def shipped_scenarios() -> list[str]:
    root = resources.files("geoest") / "scenarios"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".cfg"))
