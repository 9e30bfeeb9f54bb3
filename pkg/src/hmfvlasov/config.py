"""YAML job files for the command-line interface.

One file describes one job. ``command`` selects the job type and the
remaining top-level keys configure it::

    command: simulate
    out: runs/t06
    workers: 1
    state: {kind: ModifiedThermal, T: 0.6, eps: 0.05, delta: 1.4, mu: 1.0e-4}
    grid: {n_q: 256, n_p: 256, p_max: 3.0}
    run: {dt: 0.05, t_end: 500, diag_stride: 20}

Every value is validated against the preconditions of the module that will
consume it; violations raise :class:`ConfigError` naming the key path and
the line where it appears.
"""

import dataclasses
import math
import re
from dataclasses import dataclass, field

import yaml

from .exceptions import ConfigError, DomainError
from .neighborhood import SweepProtocol, default_workers
from .stability import StateKind, StationarySpec
from .vlasov import SimConfig

COMMANDS = ("stability", "simulate", "sweep", "check")


@dataclass
class StateConfig:
    kind: str = "ThermalHomogeneous"
    T: float = 0.6
    eps: float = 0.0
    delta: float = None
    alpha: float = None
    mu: float = 0.0

    def build(self):
        return StationarySpec(StateKind(self.kind), self.T, self.eps, self.delta, self.alpha, self.mu)


@dataclass
class GridConfig:
    n_q: int = 256
    n_p: int = 256
    p_max: float = 3.0


@dataclass
class RunSection:
    dt: float = 0.05
    t_end: float = 100.0
    diag_stride: int = 20
    interpolation: str = "cubic"
    max_mass_drift: float = 1e-2

    def build(self):
        cfg = SimConfig(dt=self.dt, t_end=self.t_end, diag_stride=self.diag_stride,
                        interpolation=self.interpolation, max_mass_drift=self.max_mass_drift)
        cfg.n_steps  # raises when t_end is not a multiple of dt
        return cfg


@dataclass
class StabilityJob:
    state: StateConfig = field(default_factory=StateConfig)


@dataclass
class SimulateJob:
    state: StateConfig = field(default_factory=StateConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    run: RunSection = field(default_factory=RunSection)
    M: float = None


@dataclass
class SweepJob:
    family: str = "homogeneous"
    eps: list = field(default_factory=lambda: [0.005, 0.01, 0.02, 0.03, 0.04, 0.05])
    delta: list = field(default_factory=lambda: [1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.55, 1.6, 1.7, 1.8])
    protocol: dict = field(default_factory=dict)

    def build_protocol(self):
        base = {} if self.family == "homogeneous" else {"T": 0.4, "t_end": 200.0, "keep_trace": True}
        return SweepProtocol(**{**base, **self.protocol})


@dataclass
class CheckJob:
    ua_a: list = field(default_factory=lambda: [3.0, 4.0])
    ua_b: list = field(default_factory=lambda: [1.3, 1.5, 1.8, 2.5])
    ua_m: float = 0.5
    band_M: float = 0.5
    band_dM: list = field(default_factory=lambda: [1e-4, 1e-3, 1e-2, 2e-2])
    delta_I: bool = True


JOBS = {"stability": StabilityJob, "simulate": SimulateJob, "sweep": SweepJob, "check": CheckJob}


@dataclass
class RunConfig:
    command: str
    job: object
    out: str = "."
    workers: int = None
    deterministic: bool = True

    def resolved_workers(self):
        return self.workers if self.workers is not None else default_workers()

    def to_dict(self):
        data = {"command": self.command, "out": self.out, "deterministic": self.deterministic}
        if self.workers is not None:
            data["workers"] = self.workers
        data.update(dataclasses.asdict(self.job))
        return data

    def dump(self):
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    def with_resolution(self, n_q, n_p):
        """Copy with the grid size replaced (simulate and sweep jobs)."""
        job = self.job
        if isinstance(job, SimulateJob):
            job = dataclasses.replace(job, grid=dataclasses.replace(job.grid, n_q=n_q, n_p=n_p))
        elif isinstance(job, SweepJob):
            job = dataclasses.replace(job, protocol={**job.protocol, "n_q": n_q, "n_p": n_p})
        else:
            raise ConfigError(f"--resolution does not apply to '{self.command}' jobs", "resolution")
        cfg = dataclasses.replace(self, job=job)
        validate(cfg)
        return cfg


# -- parsing ------------------------------------------------------------------


def _line_index(node, path=(), out=None):
    """Map key paths to 1-based source lines from a composed YAML node."""
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for key, value in node.value:
            sub = path + (str(key.value),)
            out[sub] = key.start_mark.line + 1
            _line_index(value, sub, out)
    elif isinstance(node, yaml.SequenceNode):
        for i, value in enumerate(node.value):
            sub = path + (str(i),)
            out[sub] = value.start_mark.line + 1
            _line_index(value, sub, out)
    return out


class _Context:
    def __init__(self, lines):
        self.lines = lines

    def error(self, message, *path):
        line = None
        for n in range(len(path), 0, -1):
            line = self.lines.get(tuple(path[:n]))
            if line is not None:
                break
        return ConfigError(message, ".".join(path) or None, line)


def _coerce(value, default, annotation, ctx, path):
    """Type-check one scalar or list value against its dataclass field."""
    if annotation is bool or isinstance(default, bool):
        if not isinstance(value, bool):
            raise ctx.error(f"expected true/false, got {value!r}", *path)
        return value
    if annotation is int:
        if isinstance(value, bool) or not isinstance(value, int):
            if isinstance(value, float) and value.is_integer():
                return int(value)
            raise ctx.error(f"expected an integer, got {value!r}", *path)
        return value
    if annotation is float:
        if value is None and default is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ctx.error(f"expected a number, got {value!r}", *path)
        if not math.isfinite(value):
            raise ctx.error(f"expected a finite number, got {value!r}", *path)
        return float(value)
    if annotation is str:
        if not isinstance(value, str):
            raise ctx.error(f"expected a string, got {value!r}", *path)
        return value
    if annotation is list:
        if not isinstance(value, list) or not value:
            raise ctx.error("expected a non-empty list", *path)
        for i, v in enumerate(value):
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ctx.error(f"expected a finite number, got {v!r}", *path, str(i))
        return [float(v) for v in value]
    if annotation is dict:
        if not isinstance(value, dict):
            raise ctx.error("expected a mapping", *path)
        return dict(value)
    return value


def _build(cls, data, ctx, path):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ctx.error("expected a mapping", *path)
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(fields))
    if unknown:
        raise ctx.error(f"unknown key (allowed: {', '.join(fields)})", *path, str(unknown[0]))
    kwargs = {}
    defaults = cls()
    for name, f in fields.items():
        if name not in data:
            continue
        default = getattr(defaults, name)
        if dataclasses.is_dataclass(f.type):
            kwargs[name] = _build(f.type, data[name], ctx, path + (name,))
        else:
            kwargs[name] = _coerce(data[name], default, f.type, ctx, path + (name,))
    return cls(**kwargs)


def _blame(message, section, keys):
    """Pick the key a downstream error message is about, if it names one."""
    for word in re.findall(r"[A-Za-z_]+", message):
        if word in keys:
            return section + (word,)
    return section


def _check(ctx, section, keys, build):
    try:
        return build()
    except (DomainError, TypeError, ValueError) as exc:
        raise ctx.error(str(exc), *_blame(str(exc), section, keys)) from None


def validate(cfg, ctx=None):
    """Check the job against the downstream preconditions."""
    ctx = ctx or _Context({})
    job = cfg.job
    if cfg.workers is not None and cfg.workers < 1:
        raise ctx.error("workers must be >= 1", "workers")
    if isinstance(job, (StabilityJob, SimulateJob)):
        kinds = [k.value for k in StateKind]
        if job.state.kind not in kinds:
            raise ctx.error(f"kind must be one of {', '.join(kinds)}, got {job.state.kind!r}",
                            "state", "kind")
        keys = [f.name for f in dataclasses.fields(StateConfig)]
        _check(ctx, ("state",), keys, job.state.build)
    if isinstance(job, SimulateJob):
        g = job.grid
        for name in ("n_q", "n_p"):
            if getattr(g, name) < 4:
                raise ctx.error("grid needs at least 4 points per direction", "grid", name)
        if not g.p_max > 0:
            raise ctx.error("p_max must be > 0", "grid", "p_max")
        if job.M is not None and not job.M >= 0:
            raise ctx.error("M must be >= 0", "M")
        _check(ctx, ("run",), [f.name for f in dataclasses.fields(RunSection)], job.run.build)
    if isinstance(job, SweepJob):
        if job.family not in ("homogeneous", "inhomogeneous"):
            raise ctx.error("family must be 'homogeneous' or 'inhomogeneous'", "family")
        if any(not e > 0 for e in job.eps):
            raise ctx.error("eps values must be > 0", "eps")
        keys = [f.name for f in dataclasses.fields(SweepProtocol)]
        unknown = sorted(set(job.protocol) - set(keys))
        if unknown:
            raise ctx.error("unknown protocol key", "protocol", unknown[0])
        defaults = SweepProtocol()
        types = {f.name: f.type for f in dataclasses.fields(SweepProtocol)}
        for key, value in list(job.protocol.items()):
            job.protocol[key] = _coerce(value, getattr(defaults, key), types[key], ctx, ("protocol", key))
        protocol = _check(ctx, ("protocol",), keys, job.build_protocol)
        _check(ctx, ("protocol",), keys, lambda: protocol.sim_config().n_steps)
        if protocol.n_q < 4 or protocol.n_p < 4:
            raise ctx.error("grid needs at least 4 points per direction", "protocol", "n_q")
        if not protocol.mu > 0 or not protocol.mu < 1:
            raise ctx.error("mu must lie in (0, 1)", "protocol", "mu")
        if job.family == "homogeneous" and protocol.T < 0.5:
            raise ctx.error("the homogeneous sweep needs T >= 1/2", "protocol", "T")
        if job.family == "inhomogeneous" and protocol.T >= 0.5:
            raise ctx.error("the inhomogeneous sweep needs T < 1/2", "protocol", "T")
    if isinstance(job, CheckJob):
        if any(not a > 0 for a in job.ua_a):
            raise ctx.error("a values must be > 0", "ua_a")
        if not job.ua_m > 0:
            raise ctx.error("m must be > 0", "ua_m")
        if not 0 < job.band_M < 1:
            raise ctx.error("M must lie in (0, 1)", "band_M")
        for i, dM in enumerate(job.band_dM):
            if not 0 < 2 * dM < job.band_M:
                raise ctx.error("need 0 < dM < M/2", "band_dM", str(i))
    return cfg


def parse(text):
    """Parse a YAML job description into a validated :class:`RunConfig`."""
    try:
        node = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"invalid YAML: {getattr(exc, 'problem', exc)}",
                          line=mark.line + 1 if mark else None) from None
    ctx = _Context(_line_index(node) if node is not None else {})
    if not isinstance(data, dict):
        raise ConfigError("a job file must be a mapping", line=1)
    data = dict(data)
    command = data.pop("command", None)
    if command not in COMMANDS:
        raise ctx.error(f"command must be one of {', '.join(COMMANDS)}, got {command!r}", "command")
    common = {}
    for name, kind, default in (("out", str, "."), ("workers", int, None), ("deterministic", bool, True)):
        if name in data:
            value = data.pop(name)
            common[name] = None if value is None and default is None else _coerce(value, default, kind, ctx, (name,))
    job = _build(JOBS[command], data, ctx, ())
    return validate(RunConfig(command, job, **common), ctx)


def load(path):
    with open(path) as fh:
        return parse(fh.read())
