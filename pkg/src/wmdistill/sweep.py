"""Grid sweeps over (d, w, ...) with deterministic CSV output."""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import __version__, bell_edp, multipartite_edp as mp
from .exceptions import ConfigError, NotDistillableError

PROTOCOLS = (
    "bell-twocopy",
    "bell-bisection",
    "bell-nonmax",
    "ghz",
    "w-state",
    "w-ratio",
    "w-asymptotic",
    "optimal-w",
    "validate",
)

DEFAULTS = {"m": 10, "n": 32, "N": 3, "epsilon": 1e-6}

UNIT_PARAMS = ("d", "w", "d1", "d2", "w1", "w2")
INT_PARAMS = ("N", "m", "n")

# axes each protocol accepts, besides N/m/n/epsilon
PROTOCOL_AXES = {
    "bell-twocopy": UNIT_PARAMS,
    "bell-bisection": ("d", "w"),
    "bell-nonmax": ("d", "w"),
    "ghz": ("d", "w"),
    "w-state": ("d", "w"),
    "w-ratio": ("d", "w"),
    "w-asymptotic": ("d", "w"),
    "optimal-w": ("d",),
    "validate": (),
}

OUTPUT_COLUMNS = {
    "bell-twocopy": ("P_w", "C_w", "E_f_prime", "E_f"),
    "bell-bisection": ("t", "P_w", "E_s_prime", "E_s"),
    "bell-nonmax": ("P_w", "E_f"),
    "ghz": ("P_w", "E"),
    "w-state": ("F_w", "p_w", "steps", "F_m", "E"),
    "w-ratio": ("steps", "steps_unfiltered", "E", "E_unfiltered", "R", "R_le_1_boundary"),
    "w-asymptotic": ("R_asymptotic",),
    "optimal-w": ("w_opt", "E_opt", "steps_opt", "E_unfiltered"),
}


@dataclass(frozen=True)
class AxisRange:
    start: float
    stop: float
    step: float

    @classmethod
    def parse(cls, text) -> AxisRange:
        """``"start:stop:step"``, a ``[start, stop, step]`` list, or a single value."""
        if isinstance(text, AxisRange):
            return text
        if isinstance(text, (list, tuple)):
            parts = list(text)
        elif isinstance(text, (int, float)):
            parts = [text]
        else:
            parts = str(text).split(":")
        try:
            values = [float(p) for p in parts]
        except ValueError:
            raise ConfigError(f"cannot parse range {text!r}") from None
        if len(values) == 1:
            return cls(values[0], values[0], 1.0)
        if len(values) != 3:
            raise ConfigError(f"range must be start:stop:step, got {text!r}")
        return cls(*values)

    def values(self) -> list[float]:
        if not self.step > 0:
            raise ConfigError(f"range step must be positive, got {self.step}")
        if self.stop < self.start:
            raise ConfigError(f"range stop {self.stop} below start {self.start}")
        count = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return [round(self.start + i * self.step, 12) for i in range(count)]


@dataclass
class SweepConfig:
    protocol: str
    axes: dict = field(default_factory=dict)
    fixed: dict = field(default_factory=dict)
    out: str | None = None
    jobs: int = 1

    def __post_init__(self):
        self.axes = {k: AxisRange.parse(v) for k, v in self.axes.items()}
        self.fixed = {k: v for k, v in self.fixed.items() if v is not None}

    @classmethod
    def from_dict(cls, data: dict) -> SweepConfig:
        unknown = set(data) - {"protocol", "axes", "fixed", "out", "jobs"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "protocol" not in data:
            raise ConfigError("config needs a protocol")
        return cls(data["protocol"], dict(data.get("axes", {})), dict(data.get("fixed", {})),
                   data.get("out"), int(data.get("jobs", 1)))

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "axes": {k: [v.start, v.stop, v.step] for k, v in self.axes.items()},
            "fixed": dict(self.fixed),
            "out": self.out,
            "jobs": self.jobs,
        }

    def validate(self) -> None:
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"unknown protocol {self.protocol!r}; choose from {', '.join(PROTOCOLS)}")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        allowed = set(PROTOCOL_AXES[self.protocol]) | {"N", "m", "n", "epsilon"}
        for name, rng in self.axes.items():
            if name not in allowed:
                raise ConfigError(f"protocol {self.protocol} has no axis {name!r}")
            for v in rng.values():
                _check_param(name, v)
        for name, v in self.fixed.items():
            if name not in allowed:
                raise ConfigError(f"protocol {self.protocol} has no parameter {name!r}")
            _check_param(name, v)

    def points(self) -> list[dict]:
        names = list(self.axes)
        grids = [self.axes[k].values() for k in names]
        base = {**DEFAULTS, **self.fixed}
        pts = []
        for combo in itertools.product(*grids):
            pt = dict(base)
            pt.update(zip(names, combo))
            for k in INT_PARAMS:
                pt[k] = int(pt[k])
            pts.append(pt)
        return pts


def _check_param(name, value) -> None:
    if name in UNIT_PARAMS:
        if not 0 <= float(value) < 1:
            raise ConfigError(f"{name} must lie in [0, 1), got {value}")
    elif name == "epsilon":
        if not 0 < float(value) < 1:
            raise ConfigError(f"epsilon must lie in (0, 1), got {value}")
    elif name in INT_PARAMS:
        if float(value) != int(value):
            raise ConfigError(f"{name} must be an integer, got {value}")
        v = int(value)
        if name == "N" and v < 2:
            raise ConfigError("N must be >= 2")
        if name == "m" and v < 1:
            raise ConfigError("m must be >= 1")
        if name == "n" and (v < 2 or v & (v - 1)):
            raise ConfigError(f"n must be a power of two >= 2, got {v}")


def _bell_params(pt) -> bell_edp.BellScenario:
    d1 = pt.get("d1", pt.get("d", 0.0))
    d2 = pt.get("d2", pt.get("d", 0.0))
    w1 = pt.get("w1", pt.get("w", 0.0))
    w2 = pt.get("w2", pt.get("w", 0.0))
    return bell_edp.BellScenario(d1, d2, w1, w2)


def evaluate_point(protocol: str, pt: dict) -> dict:
    """Quantities of one grid point. Never raises for out-of-regime points:
    those come back with a non-``ok`` status and blank columns."""
    out = {"status": "ok"}
    d, w = pt.get("d", 0.0), pt.get("w", 0.0)
    n_par, eps = pt["N"], pt["epsilon"]
    if protocol == "bell-twocopy":
        s = _bell_params(pt)
        _, p_w, c = bell_edp.bell_filtered_state(s)
        rep = bell_edp.two_copy_efficiency(s, pt["m"])
        out.update(P_w=p_w, C_w=c, E_f_prime=rep.distillation_yield, E_f=rep.cumulative)
    elif protocol == "bell-bisection":
        rep = bell_edp.bisection_efficiency(d, w, pt["n"])
        out.update(t=bell_edp.bisection_t(d, w), P_w=rep.filter_probability,
                   E_s_prime=rep.distillation_yield, E_s=rep.cumulative)
    elif protocol == "bell-nonmax":
        rep = bell_edp.nonmax_initial_pipeline(d, w, pt["m"])
        out.update(P_w=rep.filter_probability, E_f=rep.cumulative)
    elif protocol == "ghz":
        rep = mp.ghz_efficiency(d, w, pt["m"])
        out.update(P_w=rep.filter_probability, E=rep.cumulative)
    elif protocol == "w-state":
        f_w, p_w = mp.w_filtered(n_par, d, w)
        out.update(F_w=f_w, p_w=p_w)
        try:
            traj = mp.w_trajectory(n_par, d, w, eps)
        except NotDistillableError:
            out["status"] = "not-distillable"
        else:
            out.update(steps=traj.steps, F_m=traj.fidelities[-1], E=traj.efficiency)
    elif protocol == "w-ratio":
        try:
            traj = mp.w_trajectory(n_par, d, w, eps)
            out.update(steps=traj.steps, E=traj.efficiency)
        except NotDistillableError:
            out["status"] = "not-distillable"
            return out
        try:
            base = mp.w_trajectory(n_par, d, 0.0, eps)
        except NotDistillableError:
            out["status"] = "nrwm-only"
            return out
        y = n_par * d / (1 - d)
        out.update(
            steps_unfiltered=base.steps,
            E_unfiltered=base.efficiency,
            R=traj.efficiency / base.efficiency,
            R_le_1_boundary=int(mp.boundary_inequality(traj.steps, base.steps, 1 - w, y, n_par)),
        )
    elif protocol == "w-asymptotic":
        try:
            out["R_asymptotic"] = mp.asymptotic_ratio(n_par, d, w)
        except ValueError:
            out["status"] = "domain"
    elif protocol == "optimal-w":
        try:
            opt = mp.optimal_w(n_par, d, eps)
            out.update(w_opt=opt.w, E_opt=opt.efficiency, steps_opt=opt.steps)
        except NotDistillableError:
            out["status"] = "not-distillable"
        try:
            out["E_unfiltered"] = mp.w_efficiency(n_par, d, 0.0, eps)
        except NotDistillableError:
            pass
    else:
        raise ConfigError(f"protocol {protocol!r} is not a sweep")
    return out


def _evaluate_task(task):
    protocol, pt = task
    return evaluate_point(protocol, pt)


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def run_sweep(cfg: SweepConfig) -> tuple[list[str], list[list[str]]]:
    """Evaluate the whole grid; rows come back in row-major axis order."""
    cfg.validate()
    if cfg.protocol == "validate":
        raise ConfigError("use the validate command for oracle runs")
    points = cfg.points()
    tasks = [(cfg.protocol, pt) for pt in points]
    if cfg.jobs == 1 or len(tasks) < 2:
        results = [_evaluate_task(t) for t in tasks]
    else:
        chunk = max(1, len(tasks) // (cfg.jobs * 8))
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_evaluate_task, tasks, chunksize=chunk))

    axis_names = list(cfg.axes)
    param_names = [k for k in ("N", "m", "n", "epsilon") if k not in axis_names and _uses(cfg.protocol, k)]
    fixed_names = [k for k in cfg.fixed if k not in axis_names and k not in param_names]
    header = axis_names + fixed_names + param_names + list(OUTPUT_COLUMNS[cfg.protocol]) + ["status"]
    rows = []
    for pt, res in zip(points, results):
        merged = {**pt, **res}
        rows.append([format_value(merged.get(k)) for k in header])
    return header, rows


def _uses(protocol: str, name: str) -> bool:
    return {
        "m": protocol in ("bell-twocopy", "bell-nonmax", "ghz"),
        "n": protocol == "bell-bisection",
        "N": protocol.startswith("w-") or protocol == "optimal-w",
        "epsilon": protocol in ("w-state", "w-ratio", "optimal-w"),
    }[name]


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def write_outputs(cfg: SweepConfig, header, rows, path: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(to_csv(header, rows))
    meta = {"tool": "wmdistill", "version": __version__, "config": {**cfg.to_dict(), "jobs": None, "out": None}}
    with open(path + ".meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


FIGURES = {
    "1a": dict(protocol="bell-twocopy", axes={"d1": "0:0.99:0.01", "w1": "0:0.99:0.01"},
               fixed={"d2": 0.0, "w2": 0.0, "m": 10}),
    "1b": dict(protocol="bell-twocopy", axes={"d": "0:0.99:0.01", "w": "0:0.99:0.01"}, fixed={"m": 10}),
    "1c": dict(protocol="bell-twocopy", axes={"w1": "0:0.99:0.01", "w2": "0:0.99:0.01"},
               fixed={"d1": 0.3, "d2": 0.7, "m": 10}),
    "1d": dict(protocol="bell-twocopy", axes={"w1": "0:0.99:0.01", "w2": "0:0.99:0.01"},
               fixed={"d1": 0.5, "d2": 0.5, "m": 10}),
    "2": dict(protocol="bell-nonmax", axes={"d": "0:0.99:0.01", "w": "0:0.99:0.01"}, fixed={"m": 10}),
    "3": dict(protocol="bell-bisection", axes={"d": "0:0.99:0.01", "w": "0:0.99:0.01"}, fixed={"n": 32}),
    "4": dict(protocol="ghz", axes={"d": "0:0.99:0.01", "w": "0:0.99:0.01"}, fixed={"m": 10}),
    "5": dict(protocol="w-state", axes={"d": "0.0025:0.2475:0.0025", "w": "0:0.99:0.01"},
              fixed={"N": 3, "epsilon": 1e-6}),
    "6": dict(protocol="w-ratio", axes={"d": "0.0025:0.2475:0.0025", "w": "0:0.99:0.01"},
              fixed={"N": 3, "epsilon": 1e-6}),
    "7": dict(protocol="optimal-w", axes={"d": "0.001:0.249:0.001"}, fixed={"N": 3, "epsilon": 1e-6}),
    "8": dict(protocol="optimal-w", axes={"N": "3:5:1", "d": "0.005:0.9:0.005"}, fixed={"epsilon": 1e-6}),
    "9": dict(protocol="w-asymptotic", axes={"d": "0.0025:0.2475:0.0025", "w": "0:0.99:0.01"},
              fixed={"N": 3}),
}


def figure_config(figure_id: str, out: str | None = None, jobs: int = 1) -> SweepConfig:
    if figure_id not in FIGURES:
        raise ConfigError(f"unknown figure {figure_id!r}; choose from {', '.join(FIGURES)}")
    preset = FIGURES[figure_id]
    return SweepConfig(preset["protocol"], dict(preset["axes"]), dict(preset["fixed"]), out, jobs)
