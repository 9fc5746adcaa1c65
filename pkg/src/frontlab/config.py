"""Line-oriented experiment configs.

    [reaction]
    reaction = monostable_kpp(a=4)

    [front]
    source = analytic            # analytic | shooting

    [grid]
    x_min = -60
    x_max = 60
    dx = 0.01

    [time]
    T = 50
    dt = 0.005
    stride = 100

    [components]
    left = front_left_of(a=0)

    [observers]
    err = p_error(window=(-10, 10))

    [output]
    dir = out/a4
    spectrum = false
    seed = 0

Values are Python literals or calls ``name(args)`` whose arguments are
literals; ``inf`` is accepted for infinity. ``#`` starts a comment.
"""
from __future__ import annotations

import ast
import dataclasses
import math
import re
from dataclasses import dataclass, field

from . import reaction as rx
from . import sim
from .errors import ConfigError, FrontLabError
from .front import Grid

SECTIONS = ("reaction", "front", "grid", "time", "components", "observers", "output", "spectrum")

REACTIONS = {
    "monostable_kpp": rx.monostable_kpp,
    "bistable_cubic": rx.bistable_cubic,
    "ignition": rx.ignition,
}

COMPONENTS = {
    "front_left_of": sim.FrontLeftOf,
    "front_indicator": sim.FrontIndicator,
    "front_fraction": sim.FrontFraction,
    "gaussian": sim.Gaussian,
    "tabulated": sim.Tabulated,
}

OBSERVERS = ("W", "Z", "D", "p_error", "ray_max", "sup_global", "point", "sum_check", "min_v", "max_excess", "window_max")
# observers whose meaning relies on the discrete comparison principle
COMPARISON_OBSERVERS = ("min_v", "max_excess")


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple = ()
    kwargs: tuple = ()  # sorted (key, value) pairs, hashable

    @property
    def kw(self) -> dict:
        return dict(self.kwargs)

    def with_kw(self, **kw) -> "Call":
        d = self.kw
        d.update(kw)
        return Call(self.name, self.args, tuple(sorted(d.items())))

    def __str__(self):
        parts = [repr(a) for a in self.args] + [f"{k}={v!r}" for k, v in self.kwargs]
        return f"{self.name}({', '.join(parts)})"


@dataclass(frozen=True)
class ExperimentConfig:
    reaction: Call = Call("monostable_kpp", (), (("a", 4.0),))
    front_source: str = "analytic"
    grid: Grid = Grid()
    T: float = 50.0
    dt: float = 0.005
    stride: int = 100
    snapshots: tuple = ()
    components: tuple = (("c0", Call("front_left_of", (), (("a", 0.0),))),)
    observers: tuple = ()
    out_dir: str = "out"
    spectrum: bool = False
    spectrum_m: int = 6
    seed: int = 0
    text: str = field(default="", compare=False, repr=False)

    def build_reaction(self) -> rx.ReactionTerm:
        fn = REACTIONS.get(self.reaction.name)
        if fn is None:
            raise ConfigError(f"unknown reaction {self.reaction.name!r}")
        return fn(*self.reaction.args, **self.reaction.kw)

    def build_components(self):
        out = []
        for label, call in self.components:
            cls = COMPONENTS.get(call.name)
            if cls is None:
                raise ConfigError(f"unknown component shape {call.name!r}")
            kw = call.kw
            if cls is sim.Tabulated:
                kw = {k: tuple(v) for k, v in kw.items()}
            out.append((label, cls(*call.args, **kw)))
        return out

    def echo(self) -> dict:
        return {
            "reaction": str(self.reaction),
            "front_source": self.front_source,
            "grid": {"x_min": self.grid.x_min, "x_max": self.grid.x_max, "dx": self.grid.dx},
            "time": {"T": self.T, "dt": self.dt, "stride": self.stride, "snapshots": list(self.snapshots)},
            "components": {label: str(c) for label, c in self.components},
            "observers": {label: str(c) for label, c in self.observers},
            "spectrum": self.spectrum,
            "seed": self.seed,
        }


class _Literal(ast.NodeTransformer):
    def visit_Name(self, node):
        if node.id in ("inf", "Infinity"):
            return ast.copy_location(ast.Constant(math.inf), node)
        if node.id in ("true", "True"):
            return ast.copy_location(ast.Constant(True), node)
        if node.id in ("false", "False"):
            return ast.copy_location(ast.Constant(False), node)
        # bare words are strings: source = analytic
        return ast.copy_location(ast.Constant(node.id), node)


def _literal(node, line):
    node = _Literal().visit(node)
    try:
        return ast.literal_eval(node)
    except (ValueError, TypeError, SyntaxError) as exc:
        raise ConfigError(f"not a literal: {ast.unparse(node)}", line) from exc


def parse_value(text: str, line=None):
    """A literal, or a Call for ``name(args)``."""
    text = text.strip()
    try:
        node = ast.parse(text, mode="eval").body
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse value {text!r}", line) from exc
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name):
        args = tuple(_freeze(_literal(a, line)) for a in node.args)
        kwargs = tuple(sorted((k.arg, _freeze(_literal(k.value, line))) for k in node.keywords))
        return Call(node.func.id, args, kwargs)
    return _literal(node, line)


def _freeze(v):
    if isinstance(v, list):
        return tuple(_freeze(a) for a in v)
    if isinstance(v, int) and not isinstance(v, bool):
        return float(v)
    return v


_SECTION = re.compile(r"^\[(\w+)\]$")


def parse_sections(text: str) -> dict:
    """{section: [(key, raw_value, line_no)]}."""
    out: dict = {}
    cur = None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SECTION.match(line)
        if m:
            cur = m.group(1)
            if cur not in SECTIONS:
                raise ConfigError(f"unknown section [{cur}]", no)
            out.setdefault(cur, [])
            continue
        if cur is None:
            raise ConfigError("entry before any [section]", no)
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", no)
        key, val = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError("empty key", no)
        out[cur].append((key, val, no))
    return out


def _number(val, line, kind=float):
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"expected a number, got {val!r}", line)
    if kind is int:
        if val != int(val):
            raise ConfigError(f"expected an integer, got {val!r}", line)
        return int(val)
    return float(val)


def loads(text: str, overrides=()) -> ExperimentConfig:
    """Parse config text; ``overrides`` are ``section.key=value`` or ``key=value`` strings."""
    sections = parse_sections(text)
    for ov in overrides:
        if "=" not in ov:
            raise ConfigError(f"override {ov!r} is not key=value")
        k, v = (s.strip() for s in ov.split("=", 1))
        if "." in k:
            sec, key = k.split(".", 1)
        else:
            sec = next((s for s, entries in sections.items() if any(e[0] == k for e in entries)), None)
            key = k
            if sec is None:
                raise ConfigError(f"override key {k!r} not found; use section.key=value")
        if sec not in SECTIONS:
            raise ConfigError(f"unknown section {sec!r} in override")
        entries = [e for e in sections.get(sec, []) if e[0] != key]
        entries.append((key, v, None))
        sections[sec] = entries

    kw: dict = {"text": text}
    for key, val, no in sections.get("reaction", []):
        if key != "reaction":
            raise ConfigError(f"unknown key {key!r} in [reaction]", no)
        call = parse_value(val, no)
        if not isinstance(call, Call) or call.name not in REACTIONS:
            raise ConfigError(f"reaction must be one of {sorted(REACTIONS)}(...)", no)
        kw["reaction"] = call
    for key, val, no in sections.get("front", []):
        if key != "source":
            raise ConfigError(f"unknown key {key!r} in [front]", no)
        src = parse_value(val, no)
        if src not in ("analytic", "shooting"):
            raise ConfigError("front source must be analytic or shooting", no)
        kw["front_source"] = src
    g = {}
    for key, val, no in sections.get("grid", []):
        if key not in ("x_min", "x_max", "dx"):
            raise ConfigError(f"unknown key {key!r} in [grid]", no)
        g[key] = (_number(parse_value(val, no), no), no)
    if g:
        base = dataclasses.asdict(Grid())
        base.update({k: v for k, (v, _) in g.items()})
        try:
            kw["grid"] = Grid(**base)
        except FrontLabError as exc:
            first = min((n for _, n in g.values() if n is not None), default=None)
            raise ConfigError(str(exc), first) from exc
    for key, val, no in sections.get("time", []):
        v = parse_value(val, no)
        if key in ("T", "dt"):
            kw[key] = _number(v, no)
        elif key == "stride":
            kw["stride"] = _number(v, no, int)
        elif key == "snapshots":
            v = v if isinstance(v, tuple) else (v,)
            kw["snapshots"] = tuple(_number(a, no) for a in v)
        else:
            raise ConfigError(f"unknown key {key!r} in [time]", no)
    comps = []
    for key, val, no in sections.get("components", []):
        call = parse_value(val, no)
        if not isinstance(call, Call) or call.name not in COMPONENTS:
            raise ConfigError(f"component must be one of {sorted(COMPONENTS)}(...)", no)
        comps.append((key, call))
    if "components" in sections:
        kw["components"] = tuple(comps)
    obs = []
    for key, val, no in sections.get("observers", []):
        call = parse_value(val, no)
        if isinstance(call, str):
            call = Call(call)
        if not isinstance(call, Call) or call.name not in OBSERVERS:
            raise ConfigError(f"observer must be one of {list(OBSERVERS)}", no)
        obs.append((key, call))
    kw["observers"] = tuple(obs)
    for key, val, no in sections.get("output", []) + sections.get("spectrum", []):
        if key == "dir":
            # paths are taken verbatim (optionally quoted)
            kw["out_dir"] = val.strip().strip("\"'")
            continue
        v = parse_value(val, no)
        if key in ("spectrum", "enabled"):
            kw["spectrum"] = bool(v)
        elif key in ("spectrum_m", "m"):
            kw["spectrum_m"] = _number(v, no, int)
        elif key == "seed":
            kw["seed"] = _number(v, no, int)
        else:
            raise ConfigError(f"unknown key {key!r} in [output]", no)
    cfg = ExperimentConfig(**kw)
    if cfg.T < 0 or not cfg.dt > 0 or cfg.stride < 1:
        raise ConfigError("need T >= 0, dt > 0 and stride >= 1")
    return cfg


def load(path, overrides=()) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read(), overrides)


def replace_param(cfg: ExperimentConfig, param: str, value) -> ExperimentConfig:
    """Copy of ``cfg`` with one sweep parameter set."""
    if param in ("a", "rho"):
        return dataclasses.replace(cfg, reaction=cfg.reaction.with_kw(**{param: float(value)}))
    if param == "dx":
        return dataclasses.replace(cfg, grid=dataclasses.replace(cfg.grid, dx=float(value)))
    if param == "dt":
        return dataclasses.replace(cfg, dt=float(value))
    if param == "alpha":
        obs = tuple((k, c.with_kw(alpha=float(value)) if c.name == "ray_max" else c) for k, c in cfg.observers)
        return dataclasses.replace(cfg, observers=obs)
    raise ConfigError(f"cannot sweep {param!r}; choose from a, rho, alpha, dx, dt")
