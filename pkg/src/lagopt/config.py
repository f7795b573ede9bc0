"""Experiment configuration: a flat INI-style key-value format with sections.

Example (single-speed)::

    [experiment]
    case = single-speed
    solver = fd

    [landscape]
    terms = quartic_plus(h=2.5, center=35); quadratic_plus(h=2.5, center=40)
    offset = 0.5

    [shift]
    epsilon = 0.1
    c = 1.0

    [grid]
    length = 75.0
    nodes = 1500

    [time]
    t_final = 20.0
    dt = auto

    [initial]
    kind = gaussian
    amp = 0.1
    center = 37.5
    width = 10.0

    [output]
    snapshot_times = 5, 10, 15, 20
    stride = auto

Two-speed configs replace ``[landscape]`` by ``[landscape.a1]`` and
``[landscape.a2]`` (terms only), keep ``delta`` in ``[landscape]``, and give
``c1``/``c2`` under ``[shift]``.  Parsing and serialization round-trip: the
serialized text parses back to an equal configuration.
"""

from __future__ import annotations

import configparser
import hashlib
import io
import re
from dataclasses import dataclass, replace
from importlib import resources

import numpy as np

from .errors import ConfigError
from .fd import Grid, gaussian_profile
from .landscape import BumpTerm, FitnessLandscape, ShiftSpec, TwoPeakLandscape

CASES = ("single-speed", "two-speed")
SOLVERS = ("fd", "hj-eps", "hj-limit", "eigen")
INITIAL_KINDS = ("gaussian", "log_quadratic")

_TERM_RE = re.compile(
    r"(?P<family>\w+)\s*\(\s*h\s*=\s*(?P<h>[^,\s]+)\s*,\s*center\s*=\s*(?P<center>[^)\s]+)\s*\)"
)


@dataclass(frozen=True)
class GridSpec:
    length: float
    nodes: int

    def build(self) -> Grid:
        return Grid(self.length, self.nodes)


@dataclass(frozen=True)
class TimeSpec:
    t_final: float
    dt: float | None  # None = auto-CFL


@dataclass(frozen=True)
class InitialSpec:
    kind: str
    amp: float
    center: float
    width: float


@dataclass(frozen=True)
class OutputSpec:
    snapshot_times: tuple[float, ...] = ()
    stride: int | None = None  # None = auto
    directory: str | None = None


@dataclass(frozen=True)
class EigenSpec:
    radius: float
    nodes: int
    center: float
    # optional sweep for the (radius, eps, lambda) convergence table
    eps_list: tuple[float, ...] = ()
    radii: tuple[float, ...] = ()


@dataclass(frozen=True)
class ExperimentConfig:
    case: str
    solver: str
    landscape: FitnessLandscape | TwoPeakLandscape
    shift: ShiftSpec
    grid: GridSpec
    time: TimeSpec
    initial: InitialSpec
    output: OutputSpec
    eigen: EigenSpec | None = None

    @property
    def combined_landscape(self) -> FitnessLandscape:
        """The single-speed landscape (identity for case 1)."""
        if self.case != "single-speed":
            raise ConfigError("experiment.case", "combined landscape is single-speed only")
        return self.landscape


def _parse_terms(text: str, field: str) -> tuple[BumpTerm, ...]:
    entries = [e.strip() for e in text.split(";") if e.strip()]
    if not entries:
        raise ConfigError(field, "no landscape terms given")
    out = []
    for entry in entries:
        m = _TERM_RE.fullmatch(entry)
        if not m:
            raise ConfigError(field, f"cannot parse term {entry!r}")
        try:
            out.append(BumpTerm(m["family"], float(m["h"]), float(m["center"])))
        except ValueError as exc:
            raise ConfigError(field, str(exc)) from exc
    return tuple(out)


def _format_terms(terms: tuple[BumpTerm, ...]) -> str:
    return "; ".join(f"{t.family}(h={t.height!r}, center={t.center!r})" for t in terms)


def _get(parser: configparser.ConfigParser, section: str, key: str, *, default=None):
    if not parser.has_option(section, key):
        if default is not None:
            return default
        raise ConfigError(f"{section}.{key}", "missing required key")
    return parser.get(section, key)


def _get_float(parser, section, key, *, default=None) -> float:
    raw = _get(parser, section, key, default=default)
    if isinstance(raw, float):
        return raw
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{section}.{key}", f"not a number: {raw!r}") from exc


def _get_int(parser, section, key) -> int:
    raw = _get(parser, section, key)
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{section}.{key}", f"not an integer: {raw!r}") from exc


def parse_config(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("<file>", f"malformed config: {exc}") from exc

    for section in ("experiment", "shift", "grid", "time", "initial"):
        if not parser.has_section(section):
            raise ConfigError(section, "missing section")

    case = _get(parser, "experiment", "case")
    if case not in CASES:
        raise ConfigError("experiment.case", f"must be one of {CASES}, got {case!r}")
    solver = _get(parser, "experiment", "solver")
    if solver not in SOLVERS:
        raise ConfigError("experiment.solver", f"must be one of {SOLVERS}, got {solver!r}")

    if case == "single-speed":
        if not parser.has_section("landscape"):
            raise ConfigError("landscape", "missing section")
        terms = _parse_terms(_get(parser, "landscape", "terms"), "landscape.terms")
        offset = _get_float(parser, "landscape", "offset", default=0.0)
        landscape: FitnessLandscape | TwoPeakLandscape = FitnessLandscape(terms, offset)
        c_val = _get_float(parser, "shift", "c")
        shift = ShiftSpec(epsilon=_get_float(parser, "shift", "epsilon"), c=c_val)
    else:
        for sec in ("landscape", "landscape.a1", "landscape.a2"):
            if not parser.has_section(sec):
                raise ConfigError(sec, "missing section")
        a1 = FitnessLandscape(_parse_terms(_get(parser, "landscape.a1", "terms"), "landscape.a1.terms"))
        a2 = FitnessLandscape(_parse_terms(_get(parser, "landscape.a2", "terms"), "landscape.a2.terms"))
        delta = _get_float(parser, "landscape", "delta")
        try:
            landscape = TwoPeakLandscape(a1, a2, delta)
        except ValueError as exc:
            raise ConfigError("landscape", str(exc)) from exc
        try:
            shift = ShiftSpec(
                epsilon=_get_float(parser, "shift", "epsilon"),
                c1=_get_float(parser, "shift", "c1"),
                c2=_get_float(parser, "shift", "c2"),
            )
        except ValueError as exc:
            raise ConfigError("shift", str(exc)) from exc
        if solver in ("hj-eps", "hj-limit"):
            raise ConfigError("experiment.solver", "log-density schemes support single-speed only")

    grid = GridSpec(_get_float(parser, "grid", "length"), _get_int(parser, "grid", "nodes"))
    if grid.nodes < 3:
        raise ConfigError("grid.nodes", "need at least 3 nodes")

    dt_raw = _get(parser, "time", "dt", default="auto")
    dt = None if str(dt_raw).strip() == "auto" else _get_float(parser, "time", "dt")
    t_final = _get_float(parser, "time", "t_final")
    if t_final <= 0:
        raise ConfigError("time.t_final", "must be positive")
    time = TimeSpec(t_final, dt)

    kind = _get(parser, "initial", "kind")
    if kind not in INITIAL_KINDS:
        raise ConfigError("initial.kind", f"must be one of {INITIAL_KINDS}, got {kind!r}")
    initial = InitialSpec(
        kind,
        _get_float(parser, "initial", "amp"),
        _get_float(parser, "initial", "center"),
        _get_float(parser, "initial", "width"),
    )
    if initial.amp <= 0 or initial.width <= 0:
        raise ConfigError("initial.amp", "amp and width must be positive")

    snap: tuple[float, ...] = ()
    stride = None
    directory = None
    if parser.has_section("output"):
        raw = _get(parser, "output", "snapshot_times", default="")
        if raw.strip():
            try:
                snap = tuple(float(s) for s in raw.split(",") if s.strip())
            except ValueError as exc:
                raise ConfigError("output.snapshot_times", str(exc)) from exc
        stride_raw = _get(parser, "output", "stride", default="auto")
        stride = None if str(stride_raw).strip() == "auto" else int(stride_raw)
        directory = _get(parser, "output", "directory", default="") or None
    for t in snap:
        if t < 0 or t > t_final + 1e-12:
            raise ConfigError("output.snapshot_times", f"snapshot {t} outside [0, t_final]")
    output = OutputSpec(snap, stride, directory)

    eigen_spec = None
    if parser.has_section("eigen"):

        def _float_list(key: str) -> tuple[float, ...]:
            raw = _get(parser, "eigen", key, default="")
            if not raw.strip():
                return ()
            try:
                return tuple(float(s) for s in raw.split(",") if s.strip())
            except ValueError as exc:
                raise ConfigError(f"eigen.{key}", str(exc)) from exc

        eigen_spec = EigenSpec(
            radius=_get_float(parser, "eigen", "radius"),
            nodes=_get_int(parser, "eigen", "nodes"),
            center=_get_float(parser, "eigen", "center", default=0.0),
            eps_list=_float_list("eps_list"),
            radii=_float_list("radii"),
        )
    elif solver == "eigen":
        raise ConfigError("eigen", "solver 'eigen' needs an [eigen] section")

    return ExperimentConfig(case, solver, landscape, shift, grid, time, initial, output, eigen_spec)


def serialize_config(cfg: ExperimentConfig) -> str:
    out = io.StringIO()
    w = out.write
    w("[experiment]\n")
    w(f"case = {cfg.case}\n")
    w(f"solver = {cfg.solver}\n\n")
    if cfg.case == "single-speed":
        land = cfg.landscape
        w("[landscape]\n")
        w(f"terms = {_format_terms(land.terms)}\n")
        w(f"offset = {land.offset!r}\n\n")
        w("[shift]\n")
        w(f"epsilon = {cfg.shift.epsilon!r}\n")
        w(f"c = {cfg.shift.c!r}\n\n")
    else:
        tp = cfg.landscape
        w("[landscape]\n")
        w(f"delta = {tp.delta!r}\n\n")
        w("[landscape.a1]\n")
        w(f"terms = {_format_terms(tp.a1.terms)}\n\n")
        w("[landscape.a2]\n")
        w(f"terms = {_format_terms(tp.a2.terms)}\n\n")
        w("[shift]\n")
        w(f"epsilon = {cfg.shift.epsilon!r}\n")
        w(f"c1 = {cfg.shift.c1!r}\n")
        w(f"c2 = {cfg.shift.c2!r}\n\n")
    w("[grid]\n")
    w(f"length = {cfg.grid.length!r}\n")
    w(f"nodes = {cfg.grid.nodes}\n\n")
    w("[time]\n")
    w(f"t_final = {cfg.time.t_final!r}\n")
    w(f"dt = {'auto' if cfg.time.dt is None else repr(cfg.time.dt)}\n\n")
    w("[initial]\n")
    w(f"kind = {cfg.initial.kind}\n")
    w(f"amp = {cfg.initial.amp!r}\n")
    w(f"center = {cfg.initial.center!r}\n")
    w(f"width = {cfg.initial.width!r}\n\n")
    w("[output]\n")
    w(f"snapshot_times = {', '.join(repr(t) for t in cfg.output.snapshot_times)}\n")
    w(f"stride = {'auto' if cfg.output.stride is None else cfg.output.stride}\n")
    if cfg.output.directory:
        w(f"directory = {cfg.output.directory}\n")
    if cfg.eigen is not None:
        w("\n[eigen]\n")
        w(f"radius = {cfg.eigen.radius!r}\n")
        w(f"nodes = {cfg.eigen.nodes}\n")
        w(f"center = {cfg.eigen.center!r}\n")
        if cfg.eigen.eps_list:
            w(f"eps_list = {', '.join(repr(e) for e in cfg.eigen.eps_list)}\n")
        if cfg.eigen.radii:
            w(f"radii = {', '.join(repr(r) for r in cfg.eigen.radii)}\n")
    return out.getvalue()


def config_hash(cfg: ExperimentConfig) -> str:
    return hashlib.sha256(serialize_config(cfg).encode()).hexdigest()[:16]


def load_config(path: str) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def load_preset(name: str) -> str:
    """Raw text of a shipped preset, e.g. ``fig1`` or ``fig3_fast``."""
    ref = resources.files("lagopt.presets").joinpath(f"{name}.cfg")
    if not ref.is_file():
        raise ConfigError("preset", f"unknown preset {name!r}")
    return ref.read_text(encoding="utf-8")


def with_overrides(
    cfg: ExperimentConfig,
    *,
    nx: int | None = None,
    dt: float | None = None,
    snapshot_times: tuple[float, ...] | None = None,
    directory: str | None = None,
) -> ExperimentConfig:
    if nx is not None:
        cfg = replace(cfg, grid=GridSpec(cfg.grid.length, nx))
    if dt is not None:
        cfg = replace(cfg, time=TimeSpec(cfg.time.t_final, dt))
    if snapshot_times is not None:
        cfg = replace(cfg, output=replace(cfg.output, snapshot_times=tuple(snapshot_times)))
    if directory is not None:
        cfg = replace(cfg, output=replace(cfg.output, directory=directory))
    return cfg


def build_initial_density(cfg: ExperimentConfig, grid: Grid) -> np.ndarray:
    """Initial density ``amp * exp(-((x-center)/width)^2)`` on the grid."""
    return gaussian_profile(grid, cfg.initial.amp, cfg.initial.center, cfg.initial.width)


def build_initial_logfield(cfg: ExperimentConfig, grid: Grid, eps: float) -> np.ndarray:
    """Initial log-density ``-eps*(log(amp) - ((x-center)/width)^2)``.

    This is the exact log transform of the gaussian density, extended
    quadratically where the density would underflow, so both initial kinds
    map to the same datum.
    """
    z = (grid.nodes - cfg.initial.center) / cfg.initial.width
    return -eps * (np.log(cfg.initial.amp) - z ** 2)
