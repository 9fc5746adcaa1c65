"""Run configured experiments and write their artifacts."""
from __future__ import annotations

import dataclasses
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import analysis as an
from . import front as fr
from . import reaction as rx
from . import sim
from . import spectral as sp
from .config import COMPARISON_OBSERVERS, ExperimentConfig, replace_param
from .errors import ConfigError, FrontLabError, GridTooNarrow, PulledFrontError, ValidationError

SWEEP_PARAMS = ("a", "rho", "alpha", "dx", "dt")


def dump_json(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=1, allow_nan=True)
        fh.write("\n")


def build_front(cfg: ExperimentConfig):
    term = cfg.build_reaction()
    if cfg.front_source == "analytic":
        kw = cfg.reaction.kw
        if term.kind == "monostable_kpp":
            return fr.analytic_front_monostable(kw.get("a", 0.0), cfg.grid), term
        if term.kind == "bistable_cubic":
            return fr.analytic_front_bistable(kw.get("rho", 0.25), cfg.grid), term
        raise ConfigError(f"no closed-form front for {term.describe()}; use source = shooting")
    return fr.solve_front(term, cfg.grid), term


def _component_index(call, labels):
    c = call.kw.get("component", 0)
    if isinstance(c, str):
        if c not in labels:
            raise ConfigError(f"observer refers to unknown component {c!r}")
        return labels.index(c)
    c = int(c)
    if not 0 <= c < len(labels):
        raise ConfigError(f"observer component index {c} out of range")
    return c


def build_observers(cfg: ExperimentConfig, front, proportions, labels):
    obs = []
    for key, call in cfg.observers:
        i = _component_index(call, labels)
        kw = call.kw
        suffix = "" if len(labels) == 1 else f"[{labels[i]}]"
        n = call.name
        if n == "W":
            o = an.observe_W(front, i)
        elif n == "Z":
            o = an.observe_Z(front, kw.get("K"), i)
        elif n == "D":
            o = an.observe_dissipation(front, i)
        elif n == "p_error":
            p = proportions[i] if proportions[i] is not None else 0.0
            o = an.observe_p_error(front, p, tuple(kw.get("window", (-10.0, 10.0))), i)
        elif n == "window_max":
            o = an.observe_window_max(front, tuple(kw.get("window", (-10.0, 10.0))), i)
        elif n == "ray_max":
            o = an.observe_ray_max(front, kw.get("alpha", 1.0), kw.get("side", "right"), i)
        elif n == "sup_global":
            o = an.observe_sup_global(front, i)
        elif n == "point":
            o = an.observe_point(front, kw.get("x", call.args[0] if call.args else 0.0), i)
        elif n == "sum_check":
            o = an.observe_sum_check(front)
            suffix = ""
        elif n == "min_v":
            o = an.observe_min(front)
            suffix = ""
        elif n == "max_excess":
            o = an.observe_excess(front)
            suffix = ""
        else:  # pragma: no cover - config parsing rejects it
            raise ConfigError(f"unknown observer {n!r}")
        obs.append(sim.Observer(o.name + suffix, o.fn))
    if not obs:
        if proportions[0] is not None:
            obs.append(an.observe_p_error(front, proportions[0]))
        else:
            obs.append(an.observe_window_max(front))
    if len(labels) > 1 and "sum_check" not in [o.name for o in obs]:
        obs.append(an.observe_sum_check(front))
    names = [o.name for o in obs]
    if len(set(names)) != len(names):
        raise ConfigError(f"duplicate observer columns {names}")
    return obs


def _p_or_none(v0, front):
    try:
        return an.proportion(v0, front)
    except PulledFrontError:
        return None


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> dict:
    """Solve the front, evolve the components, write artifacts; returns the manifest."""
    out_dir = out_dir or cfg.out_dir
    os.makedirs(out_dir, exist_ok=True)
    front, term = build_front(cfg)
    comps = cfg.build_components()
    labels = [label for label, _ in comps]
    states = [sim.init_component(front, spec) for _, spec in comps]
    proportions = [_p_or_none(s.v, front) for s in states]
    observers = build_observers(cfg, front, proportions, labels)

    outputs = []

    def out(name):
        outputs.append(name)
        return os.path.join(out_dir, name)

    fr.write_front_csv(front, out("front.csv"))
    fr.write_front_json(front, out("front.json"))

    snaps = tuple(sorted(set(cfg.snapshots) | {cfg.T})) if cfg.T > 0 else ()
    series, final = sim.evolve(states, cfg.T, observers, cfg.stride, cfg.dt, snapshot_times=snaps)
    series.to_csv(out("timeseries.csv"))
    if cfg.T == 0:
        series.snapshots[0.0] = (0.0, np.column_stack([s.v for s in states]))
    for t_req, (t, V) in sorted(series.snapshots.items()):
        for i, label in enumerate(labels):
            sim.write_snapshot_csv(front, V[:, i], out(f"snapshot_{label}_t{t_req:g}.csv"))

    spectral_summary = None
    if cfg.spectrum:
        res = sp.spectrum(front, term, cfg.spectrum_m)
        sp.write_spectrum_csv(res, out("spectrum.csv"))
        sp.write_ground_state_csv(res, front, out("ground_state.csv"))
        spectral_summary = {
            "lambda0": res.lambda0,
            "essential_edge": res.essential_edge,
            "gap": res.gap,
            "gap_unreliable": res.gap_unreliable,
        }

    final_obs = dict(series.records[-1]) if series.records else {}
    manifest = {
        "code_version": __version__,
        "config": cfg.echo(),
        "outputs": outputs,
        "results": {
            "speed": front.speed,
            "classification": front.classification.value,
            "fitted_right_rate": front.decay.fitted_right_rate,
            "proportions": dict(zip(labels, proportions)),
            "final": final_obs,
            "spectral": spectral_summary,
        },
    }
    dump_json(manifest, os.path.join(out_dir, "manifest.json"))
    return manifest


# ---------------------------------------------------------------- sweep


def _sweep_row(args):
    cfg, param, value, out_dir = args
    row = {"param": param, "value": float(value)}
    try:
        m = run_experiment(replace_param(cfg, param, value), out_dir)
        r = m["results"]
        row.update(
            speed=r["speed"],
            classification=r["classification"],
            p=r["proportions"],
            final=r["final"],
            fitted_right_rate=r["fitted_right_rate"],
            error=None,
        )
    except (FrontLabError, ValueError, ArithmeticError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def sweep(base: ExperimentConfig, param: str, values, parallelism: int = 1, out_dir=None) -> dict:
    """One row per value, in input order; a failing value is recorded, not fatal."""
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"cannot sweep {param!r}; choose from {SWEEP_PARAMS}")
    out_dir = out_dir or base.out_dir
    values = [float(v) for v in values]
    jobs = [(base, param, v, os.path.join(out_dir, f"{param}={v!r}")) for v in values]
    if parallelism <= 1 or len(jobs) <= 1:
        rows = [_sweep_row(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            rows = list(pool.map(_sweep_row, jobs))
    summary = {"param": param, "values": values, "rows": rows}
    if values:
        os.makedirs(out_dir, exist_ok=True)
        dump_json(summary, os.path.join(out_dir, "sweep.json"))
    return summary


# ---------------------------------------------------------------- validate


@dataclass
class Report:
    checks: list = field(default_factory=list)

    def add(self, name, ok, message=""):
        self.checks.append((name, bool(ok), message))

    @property
    def ok(self):
        return all(ok for _, ok, _ in self.checks)

    def render(self) -> str:
        lines = [f"{'PASS' if ok else 'FAIL'} {name}" + (f": {msg}" if msg else "") for name, ok, msg in self.checks]
        lines.append("PASS" if self.ok else "FAIL")
        return "\n".join(lines)


E_FOLDINGS = 20.0


def validate(cfg: ExperimentConfig) -> Report:
    """Dry-run checks; never raises for a bad config, reports instead."""
    rep = Report()
    try:
        term = cfg.build_reaction()
        rep.add("reaction", True, term.describe())
    except (FrontLabError, ValueError, TypeError) as exc:
        rep.add("reaction", False, f"{type(exc).__name__}: {exc}")
        return rep
    kw = cfg.reaction.kw
    try:
        if cfg.front_source == "analytic" and term.kind == "monostable_kpp":
            a = kw.get("a", 0.0)
            if a < 2:
                raise ConfigError("closed-form monostable front needs a >= 2")
            c = math.sqrt(2 / a) + math.sqrt(a / 2)
        elif cfg.front_source == "analytic" and term.kind == "bistable_cubic":
            c = (1 - 2 * kw.get("rho", 0.25)) / math.sqrt(2)
        elif cfg.front_source == "analytic":
            raise ConfigError(f"no closed-form front for {term.describe()}")
        else:
            c = fr.front_speed(term)[1]
        rates = fr.decay_rates(term, c)
        if rates.mu is not None:
            right = rates.mu
        elif c > 2 * math.sqrt(term.fprime0) + fr.DEGENERATE_TOL:
            right = rates.lambda_plus
        else:
            right = c / 2
        rep.add("front", True, f"c = {c:.6g}, nu = {rates.nu:.4g}, right rate = {right:.4g}")
        need_left, need_right = E_FOLDINGS / rates.nu, E_FOLDINGS / right
        g = cfg.grid
        ok = -g.x_min >= need_left and g.x_max >= need_right
        msg = f"need x_min <= {-need_left:.3g} and x_max >= {need_right:.3g}, have [{g.x_min:g}, {g.x_max:g}]"
        rep.add("grid", ok, msg if ok else f"{GridTooNarrow.__name__}: {msg}")
    except (FrontLabError, ValueError) as exc:
        rep.add("front", False, f"{type(exc).__name__}: {exc}")
        return rep
    try:
        cfg.build_components()
        rep.add("components", bool(cfg.components), f"{len(cfg.components)} component(s)")
    except (FrontLabError, TypeError, ValueError) as exc:
        rep.add("components", False, str(exc))
    comparison = any(call.name in COMPARISON_OBSERVERS for _, call in cfg.observers)
    if comparison:
        dmax = sim.dt_max(cfg.grid.dx, c)
        ok = cfg.dt <= dmax
        rep.add("dt", ok, f"dt = {cfg.dt:g}, dt_max = {dmax:.6g}" + ("" if ok else f"; suggest dt = {dmax:.3g}"))
    else:
        rep.add("dt", cfg.dt > 0, f"dt = {cfg.dt:g} (no comparison observers)")
    return rep
