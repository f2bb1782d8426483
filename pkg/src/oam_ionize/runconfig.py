"""Run configuration files: flat "key = value" sections, line-precise
validation errors, and an exact serialize/parse round trip.

Sections: [beam], [grid], [prop], [analysis], [run].  Comments start
with '#' or ';'.  Every run is fully deterministic given its file.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .angular import Polarization
from .beam import PulseConfig
from .grid import GridSpec
from .tdse import AbsorberSpec, PropagatorConfig, _absorber_width

__all__ = ["ConfigError", "AnalysisConfig", "RunConfig",
           "parse_run_config", "load_run_config", "serialize_run_config"]

CONFIG_VERSION = 1


class ConfigError(ValueError):
    def __init__(self, message: str, path: str = "<config>", line: int | None = None,
                 section: str | None = None, key: str | None = None):
        loc = f"{path}:{line}" if line is not None else path
        ctx = f"[{section}] {key}: " if section and key else ""
        super().__init__(f"{loc}: {ctx}{message}")
        self.path, self.line, self.section, self.key = path, line, section, key


@dataclass(frozen=True)
class AnalysisConfig:
    l_max: int = 8
    n_radial: int = 64
    r_max: float | None = None  # None: auto, inside the absorber
    closure_order: int = 3

    def resolved_r_max(self, grid: GridSpec, absorber: AbsorberSpec) -> float:
        if self.r_max is not None:
            return self.r_max
        half = min(grid.box_lengths) / 2.0
        width = _absorber_width(grid, absorber) if absorber.type != "none" else 0.0
        return 0.95 * (half - width)


@dataclass(frozen=True)
class RunConfig:
    beam: PulseConfig
    grid: GridSpec
    prop: PropagatorConfig
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    label: str = "run"
    out_dir: str = "out"
    record_every: int = 10
    checkpoint_every: int = 0
    tail_time: float = 0.0
    version: int = CONFIG_VERSION


class _Raw:
    """Parsed key/value store with source line numbers."""

    def __init__(self, path: str):
        self.path = path
        self.values: dict[tuple[str, str], str] = {}
        self.lines: dict[tuple[str, str], int] = {}

    def error(self, message, section=None, key=None):
        line = self.lines.get((section, key))
        return ConfigError(message, self.path, line, section, key)

    def take(self, section, key, conv, default=..., choices=None):
        if (section, key) not in self.values:
            if default is ...:
                raise ConfigError(f"missing required key", self.path,
                                  None, section, key)
            return default
        text = self.values.pop((section, key))
        try:
            val = conv(text)
        except (ValueError, TypeError) as exc:
            raise self.error(f"bad value {text!r} ({exc})", section, key) from None
        if choices is not None and val not in choices:
            raise self.error(f"{val!r} not one of {sorted(choices)}", section, key)
        return val


def _parse_lines(text: str, path: str) -> _Raw:
    raw = _Raw(path)
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith(("#", ";")):
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            section = stripped[1:-1].strip().lower()
            continue
        if "=" not in stripped:
            raise ConfigError("expected 'key = value'", path, lineno, section)
        if section is None:
            raise ConfigError("key outside any [section]", path, lineno)
        key, _, value = stripped.partition("=")
        key = key.strip().lower()
        value = value.split("#", 1)[0].split(";", 1)[0].strip()
        if (section, key) in raw.values:
            raise ConfigError("duplicate key", path, lineno, section, key)
        raw.values[(section, key)] = value
        raw.lines[(section, key)] = lineno
    return raw


def _floats(text: str, count: int) -> tuple[float, ...]:
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != count:
        raise ValueError(f"expected {count} numbers")
    return tuple(float(p) for p in parts)


def _polarization(text: str) -> Polarization:
    text = text.strip()
    try:
        return Polarization.from_name(text)
    except ValueError:
        pass
    vals = _floats(text, 4)
    return Polarization(vals[0] + 1j * vals[1], vals[2] + 1j * vals[3])


def _grid_n(text: str) -> tuple[int, int, int]:
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) == 1:
        n = int(parts[0])
        return (n, n, n)
    if len(parts) == 3:
        return tuple(int(p) for p in parts)
    raise ValueError("expected 1 or 3 integers")


def _opt_float(text: str) -> float | None:
    return None if text.lower() in ("auto", "none") else float(text)


def parse_run_config(text: str, path: str = "<config>") -> RunConfig:
    raw = _parse_lines(text, path)
    t = raw.take

    version = t("run", "version", int, CONFIG_VERSION)
    if version != CONFIG_VERSION:
        raise raw.error(f"unsupported config version {version}", "run", "version")

    try:
        grid = GridSpec(
            n=t("grid", "n", _grid_n),
            h=t("grid", "h", float),
            center=t("grid", "center", lambda s: _floats(s, 3), (0.0, 0.0, 0.0)),
        )
    except ValueError as exc:
        raise raw.error(str(exc), "grid", "n") from None

    amplitude = t("beam", "amplitude", float, None)
    e_ref = t("beam", "target_e_field", float, None)
    rho_ref = t("beam", "target_radius", float, None)
    if (e_ref is None) != (rho_ref is None):
        raise raw.error("target_e_field and target_radius must be given together",
                        "beam", "target_e_field")
    try:
        beam = PulseConfig(
            omega=t("beam", "omega", float),
            n_cyc=t("beam", "n_cyc", int),
            ell=t("beam", "ell", int),
            pol=t("beam", "polarization", _polarization),
            w0=t("beam", "waist", float),
            p=t("beam", "p", int, 0),
            amplitude=amplitude,
            target_field=None if e_ref is None else (rho_ref, e_ref),
            chi=t("beam", "chi", float, 0.0),
            origin_offset=t("beam", "origin_offset", float, 1.0),
            atom_displacement=t("beam", "atom_displacement",
                                lambda s: _floats(s, 3), (0.0, 0.0, 0.0)),
        )
    except ValueError as exc:
        raise raw.error(str(exc), "beam", "omega") from None

    try:
        absorber = AbsorberSpec(
            type=t("prop", "absorber", str, "cos_mask",
                   choices={"cos_mask", "none"}),
            width=t("prop", "absorber_width", _opt_float, None),
            strength=t("prop", "absorber_strength", float, 1.0),
        )
        prop = PropagatorConfig(
            dt=t("prop", "dt", float, 0.005),
            soft_core_a=t("prop", "soft_core_a", float, 0.05),
            absorber=absorber,
            q=t("prop", "q", float, -1.0),
            potential=t("prop", "potential", str, "soft_core",
                        choices={"soft_core", "none"}),
            field_model=t("prop", "field_model", str, "near_origin",
                          choices={"near_origin", "full"}),
            scheme=t("prop", "scheme", str, "chirp", choices={"chirp", "taylor"}),
            taylor_order=t("prop", "taylor_order", int, 4),
            precision=t("prop", "precision", str, "double",
                        choices={"double", "single"}),
        )
    except ValueError as exc:
        raise raw.error(str(exc), "prop", "dt") from None

    analysis = AnalysisConfig(
        l_max=t("analysis", "l_max", int, 8),
        n_radial=t("analysis", "n_radial", int, 64),
        r_max=t("analysis", "r_max", _opt_float, None),
        closure_order=t("analysis", "closure_order", int, 3),
    )

    cfg = RunConfig(
        beam=beam,
        grid=grid,
        prop=prop,
        analysis=analysis,
        label=t("run", "label", str, "run"),
        out_dir=t("run", "out_dir", str, "out"),
        record_every=t("run", "record_every", int, 10),
        checkpoint_every=t("run", "checkpoint_every", int, 0),
        tail_time=t("run", "tail_time", float, 0.0),
        version=version,
    )

    if raw.values:
        (section, key) = next(iter(raw.values))
        raise raw.error("unknown key", section, key)

    _cross_validate(cfg, raw)
    return cfg


def _cross_validate(cfg: RunConfig, raw: _Raw | None = None) -> None:
    def err(msg, section, key):
        if raw is not None:
            raise ConfigError(msg, raw.path, raw.lines.get((section, key)),
                              section, key)
        raise ConfigError(msg, section=section, key=key)

    half = min(cfg.grid.box_lengths) / 2.0
    if cfg.prop.absorber.type != "none":
        width = _absorber_width(cfg.grid, cfg.prop.absorber)
        if width >= half:
            err(f"absorber width {width} must be < half box {half}",
                "prop", "absorber_width")
        inner = half - width
    else:
        inner = half
    r_max = cfg.analysis.resolved_r_max(cfg.grid, cfg.prop.absorber)
    if r_max > inner + 1e-9:
        err(f"analysis r_max {r_max} extends into the absorber (inner {inner})",
            "analysis", "r_max")
    if cfg.record_every < 0 or cfg.checkpoint_every < 0:
        err("cadence values must be >= 0", "run", "record_every")
    if cfg.tail_time < 0:
        err("tail_time must be >= 0", "run", "tail_time")


def load_run_config(path) -> RunConfig:
    path = Path(path)
    return parse_run_config(path.read_text(), str(path))


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def serialize_run_config(cfg: RunConfig) -> str:
    b, g, p, a = cfg.beam, cfg.grid, cfg.prop, cfg.analysis
    pol = b.pol
    named = {
        (1.0, 0.0, 0.0, 0.0): "linear-x",
        (0.0, 0.0, 1.0, 0.0): "linear-y",
    }
    key = (pol.alpha.real, pol.alpha.imag, pol.beta.real, pol.beta.imag)
    s = 1.0 / math.sqrt(2.0)
    if key in named:
        pol_text = named[key]
    elif key == (s, 0.0, 0.0, s):
        pol_text = "circ-right"
    elif key == (s, 0.0, 0.0, -s):
        pol_text = "circ-left"
    else:
        pol_text = f"{key[0]!r}, {key[1]!r}, {key[2]!r}, {key[3]!r}"

    lines = ["[beam]"]
    lines.append(f"omega = {_fmt(b.omega)}")
    lines.append(f"n_cyc = {b.n_cyc}")
    lines.append(f"ell = {b.ell}")
    lines.append(f"p = {b.p}")
    lines.append(f"polarization = {pol_text}")
    lines.append(f"waist = {_fmt(b.w0)}")
    if b.amplitude is not None:
        lines.append(f"amplitude = {_fmt(b.amplitude)}")
    else:
        lines.append(f"target_radius = {_fmt(b.target_field[0])}")
        lines.append(f"target_e_field = {_fmt(b.target_field[1])}")
    lines.append(f"chi = {_fmt(b.chi)}")
    lines.append(f"origin_offset = {_fmt(b.origin_offset)}")
    lines.append("atom_displacement = " + ", ".join(_fmt(v) for v in b.atom_displacement))

    lines += ["", "[grid]"]
    lines.append("n = " + ", ".join(str(c) for c in g.n))
    lines.append(f"h = {_fmt(g.h)}")
    lines.append("center = " + ", ".join(_fmt(v) for v in g.center))

    lines += ["", "[prop]"]
    lines.append(f"dt = {_fmt(p.dt)}")
    lines.append(f"soft_core_a = {_fmt(p.soft_core_a)}")
    lines.append(f"q = {_fmt(p.q)}")
    lines.append(f"potential = {p.potential}")
    lines.append(f"absorber = {p.absorber.type}")
    lines.append("absorber_width = "
                 + ("auto" if p.absorber.width is None else _fmt(p.absorber.width)))
    lines.append(f"absorber_strength = {_fmt(p.absorber.strength)}")
    lines.append(f"field_model = {p.field_model}")
    lines.append(f"scheme = {p.scheme}")
    lines.append(f"taylor_order = {p.taylor_order}")
    lines.append(f"precision = {p.precision}")

    lines += ["", "[analysis]"]
    lines.append(f"l_max = {a.l_max}")
    lines.append(f"n_radial = {a.n_radial}")
    lines.append("r_max = " + ("auto" if a.r_max is None else _fmt(a.r_max)))
    lines.append(f"closure_order = {a.closure_order}")

    lines += ["", "[run]"]
    lines.append(f"version = {cfg.version}")
    lines.append(f"label = {cfg.label}")
    lines.append(f"out_dir = {cfg.out_dir}")
    lines.append(f"record_every = {cfg.record_every}")
    lines.append(f"checkpoint_every = {cfg.checkpoint_every}")
    lines.append(f"tail_time = {_fmt(cfg.tail_time)}")
    return "\n".join(lines) + "\n"
