"""Scenario configuration: a small sectioned key-value format with unit suffixes.

Example::

    [geometry]
    w = 200nm
    p = 4.6um

    [illumination]
    wavelength = 810nm
    amplitudes = [1, 1, 1]

    [coupling]
    n_eff = 1.65
    hops = [0.3, 0.15]
    max_hops = 1

Lines starting with ``#`` and trailing ``# ...`` are comments. Lists use
brackets and may nest one level (``table_hops``). Unknown sections and keys
are errors, since a typo in a physics parameter should never pass silently.
"""

from __future__ import annotations

import re
from decimal import Decimal
from dataclasses import dataclass, field, replace
from typing import Any, Callable

from .model import (
    CouplingModel,
    CouplingTable,
    DetectorGrid,
    Illumination,
    ModelError,
    SlitArray,
    validate_config,
)


class ConfigError(ValueError):
    pass


# decimal exponents, so "200nm" parses to exactly float("200e-9")
LENGTH_UNITS = {"m": 0, "cm": -2, "mm": -3, "um": -6, "µm": -6, "μm": -6, "nm": -9, "pm": -12}
ANGLE_UNITS = {"rad": 0, "mrad": -3, "deg": 3.141592653589793 / 180.0}
_NUMBER = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-zµμ]*)\s*$")


def _quantity(text: str, units: dict[str, float], kind: str, default_unit: str) -> float:
    m = _NUMBER.match(text)
    if not m:
        raise ValueError(f"cannot parse {text!r} as a {kind}")
    unit = m.group(2) or default_unit
    if unit not in units:
        raise ValueError(f"unknown {kind} unit {unit!r} in {text!r} (use one of {', '.join(units)})")
    scale = units[unit]
    if isinstance(scale, int):
        return float(Decimal(m.group(1)).scaleb(scale))
    return float(m.group(1)) * scale


def parse_length(text: str) -> float:
    """``"4.6um"`` -> 4.6e-06. A bare number is taken as meters."""
    return _quantity(text, LENGTH_UNITS, "length", "m")


def parse_angle(text: str) -> float:
    """``"10deg"`` -> radians. A bare number is taken as radians."""
    return _quantity(text, ANGLE_UNITS, "angle", "rad")


def _float(text: str) -> float:
    m = _NUMBER.match(text)
    if not m or m.group(2):
        raise ValueError(f"cannot parse {text!r} as a dimensionless number")
    return float(m.group(1))


def _int(text: str) -> int:
    t = text.strip()
    if not re.fullmatch(r"[-+]?\d+", t):
        raise ValueError(f"cannot parse {text!r} as an integer")
    return int(t)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "on", "yes", "1"):
        return True
    if t in ("false", "off", "no", "0"):
        return False
    raise ValueError(f"cannot parse {text!r} as a boolean")


def _complex(text: str) -> complex:
    try:
        return complex(text.strip().replace(" ", ""))
    except ValueError:
        raise ValueError(f"cannot parse {text!r} as a complex amplitude") from None


def _string(text: str) -> str:
    t = text.strip()
    if len(t) >= 2 and t[0] == t[-1] and t[0] in "\"'":
        return t[1:-1]
    return t


def split_list(text: str) -> list[str]:
    """Split ``"[a, [b, c], d]"`` into top-level items ``["a", "[b, c]", "d"]``."""
    t = text.strip()
    if not (t.startswith("[") and t.endswith("]")):
        raise ValueError(f"expected a bracketed list, got {text!r}")
    body = t[1:-1].strip()
    if not body:
        return []
    items, depth, cur = [], 0, []
    for ch in body:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
            if depth < 0:
                raise ValueError(f"unbalanced brackets in {text!r}")
        if ch == "," and depth == 0:
            items.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    if depth != 0:
        raise ValueError(f"unbalanced brackets in {text!r}")
    items.append("".join(cur).strip())
    if any(not it for it in items):
        raise ValueError(f"empty list item in {text!r}")
    return items


def _list_of(conv: Callable[[str], Any]) -> Callable[[str], list]:
    return lambda text: [conv(item) for item in split_list(text)]


def _nested_floats(text: str) -> list[list[float]]:
    return [_list_of(_float)(row) for row in split_list(text)]


# section -> key -> converter
SCHEMA: dict[str, dict[str, Callable[[str], Any]]] = {
    "geometry": {"w": parse_length, "p": parse_length, "n_slits": _int, "h": parse_length, "t": parse_length},
    "illumination": {"wavelength": parse_length, "amplitudes": _list_of(_complex)},
    "coupling": {
        "n_eff": _float,
        "hops": _list_of(_float),
        "max_hops": _int,
        "table_wavelengths": _list_of(parse_length),
        "table_n_eff": _list_of(_float),
        "table_hops": _nested_floats,
    },
    "grid": {"theta_min": parse_angle, "theta_max": parse_angle, "points": _int},
    "pattern": {"masks": _list_of(_string)},
    "sweep": {
        "kind": _string,
        "wavelengths": _list_of(parse_length),
        "wavelength_start": parse_length,
        "wavelength_stop": parse_length,
        "wavelength_count": _int,
        "widths": _list_of(parse_length),
    },
    "rs": {"samples_per_slit": _int, "screen_distance": parse_length},
    "outputs": {"plot": _bool, "plot_format": _string},
}
REQUIRED = (("geometry", "w"), ("geometry", "p"), ("illumination", "wavelength"))
TABLE_KEYS = ("table_wavelengths", "table_n_eff", "table_hops")


@dataclass(frozen=True)
class SweepConfig:
    kind: str = "intensity_map"
    wavelengths_m: tuple[float, ...] = ()
    widths_m: tuple[float, ...] = ()


@dataclass(frozen=True)
class ScenarioConfig:
    slits: SlitArray
    illum: Illumination
    coupling: CouplingModel = field(default_factory=CouplingModel)
    coupling_table: CouplingTable | None = None
    theta_min: float = -0.4
    theta_max: float = 0.4
    points: int = 1024
    masks: tuple[str, ...] = ()
    sweep: SweepConfig = field(default_factory=SweepConfig)
    samples_per_slit: int = 32
    screen_distance_m: float = 1.0
    plot: bool = False
    plot_format: str = "svg"
    height_m: float | None = None
    thickness_m: float | None = None

    def grid(self) -> DetectorGrid:
        return DetectorGrid.linspace(self.theta_min, self.theta_max, self.points)

    def mask_labels(self) -> tuple[str, ...]:
        if self.masks:
            return self.masks
        if self.slits.slit_count == 3:
            return ("A", "B", "C", "AB", "BC", "AC", "ABC")
        return ("".join(self.slits.labels),)

    def coupling_for(self, wavelength_m: float) -> CouplingModel:
        if self.coupling_table is not None:
            return self.coupling_table.at(wavelength_m)
        return self.coupling

    def with_loops(self, on: bool) -> "ScenarioConfig":
        if on:
            return self
        table = self.coupling_table.with_max_hops(0) if self.coupling_table else None
        return replace(self, coupling=self.coupling.with_max_hops(0), coupling_table=table)

    def with_max_hops(self, max_hops: int) -> "ScenarioConfig":
        table = self.coupling_table.with_max_hops(max_hops) if self.coupling_table else None
        return replace(self, coupling=self.coupling.with_max_hops(max_hops), coupling_table=table)


def _tokenize(text: str) -> dict[str, dict[str, tuple[int, str]]]:
    sections: dict[str, dict[str, tuple[int, str]]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            m = re.fullmatch(r"\[\s*([A-Za-z_]\w*)\s*\]", line)
            if not m:
                raise ConfigError(f"line {lineno}: malformed section header {raw.strip()!r}")
            current = m.group(1)
            if current not in SCHEMA:
                raise ConfigError(
                    f"line {lineno}: unknown section [{current}] (expected one of {', '.join(SCHEMA)})"
                )
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        if current is None:
            raise ConfigError(f"line {lineno}: key outside of any [section]")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in SCHEMA[current]:
            raise ConfigError(
                f"line {lineno}: unknown key {key!r} in [{current}] (allowed: {', '.join(SCHEMA[current])})"
            )
        if key in sections[current]:
            raise ConfigError(f"line {lineno}: duplicate key {current}.{key}")
        if not value:
            raise ConfigError(f"line {lineno}: {current}.{key} has no value")
        sections[current][key] = (lineno, value)
    return sections


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a scenario document.

    Raises
    ------
    ConfigError
        Unknown or duplicate key, missing required key, a value that does not
        parse (with its line number) or a model invariant violated by the
        values (with the field name).
    """
    tokens = _tokenize(text)
    missing = [f"{s}.{k}" for s, k in REQUIRED if k not in tokens.get(s, {})]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")

    values: dict[str, dict[str, Any]] = {}
    lines: dict[str, int] = {}
    for sec, entries in tokens.items():
        values[sec] = {}
        for key, (lineno, raw) in entries.items():
            try:
                values[sec][key] = SCHEMA[sec][key](raw)
            except ValueError as exc:
                raise ConfigError(f"line {lineno} ({sec}.{key}): {exc}") from None
            lines[f"{sec}.{key}"] = lineno

    def get(sec, key, default=None):
        return values.get(sec, {}).get(key, default)

    def build(field_name: str, ctor, *args, **kwargs):
        try:
            return ctor(*args, **kwargs)
        except ModelError as exc:
            where = f"line {lines[field_name]} " if field_name in lines else ""
            raise ConfigError(f"{where}({field_name}): {exc}") from None

    n = get("geometry", "n_slits", 3)
    w, p = get("geometry", "w"), get("geometry", "p")
    field_name = "geometry.w" if not w > 0 else ("geometry.p" if not p > w else "geometry.n_slits")
    slits = build(field_name, SlitArray, w, p, n)
    amps = tuple(get("illumination", "amplitudes", [1.0] * n))
    illum = build(
        "illumination.wavelength" if get("illumination", "wavelength") <= 0 else "illumination.amplitudes",
        Illumination,
        get("illumination", "wavelength"),
        amps,
    )
    max_hops = get("coupling", "max_hops", 1)
    coupling = build(
        "coupling.hops",
        CouplingModel,
        get("coupling", "n_eff", 1.65),
        tuple(get("coupling", "hops", [0.3, 0.15])),
        max_hops,
    )

    table = None
    present = [k for k in TABLE_KEYS if k in values.get("coupling", {})]
    if present:
        absent = [f"coupling.{k}" for k in TABLE_KEYS if k not in present]
        if absent:
            raise ConfigError(f"coupling table is incomplete, missing: {', '.join(absent)}")
        table = build(
            "coupling.table_wavelengths",
            CouplingTable,
            tuple(get("coupling", "table_wavelengths")),
            tuple(get("coupling", "table_n_eff")),
            tuple(tuple(r) for r in get("coupling", "table_hops")),
            max_hops,
        )

    sweep_kind = get("sweep", "kind", "intensity_map")
    wavelengths = get("sweep", "wavelengths")
    ramp = [get("sweep", k) for k in ("wavelength_start", "wavelength_stop", "wavelength_count")]
    if wavelengths is not None and any(v is not None for v in ramp):
        raise ConfigError("sweep: give either wavelengths or wavelength_start/stop/count, not both")
    if any(v is not None for v in ramp):
        if any(v is None for v in ramp):
            raise ConfigError("sweep: wavelength_start, wavelength_stop and wavelength_count go together")
        start, stop, count = ramp
        if count < 1:
            raise ConfigError(f"line {lines['sweep.wavelength_count']} (sweep.wavelength_count): must be >= 1")
        step = (stop - start) / (count - 1) if count > 1 else 0.0
        wavelengths = [start + i * step for i in range(count)]
    sweep_cfg = SweepConfig(sweep_kind, tuple(wavelengths or ()), tuple(get("sweep", "widths", ())))

    cfg = ScenarioConfig(
        slits=slits,
        illum=illum,
        coupling=coupling,
        coupling_table=table,
        theta_min=get("grid", "theta_min", -0.4),
        theta_max=get("grid", "theta_max", 0.4),
        points=get("grid", "points", 1024),
        masks=tuple(get("pattern", "masks", ())),
        sweep=sweep_cfg,
        samples_per_slit=get("rs", "samples_per_slit", 32),
        screen_distance_m=get("rs", "screen_distance", 1.0),
        plot=get("outputs", "plot", False),
        plot_format=get("outputs", "plot_format", "svg"),
        height_m=get("geometry", "h"),
        thickness_m=get("geometry", "t"),
    )
    check_config(cfg, lines)
    return cfg


def check_config(cfg: ScenarioConfig, lines: dict[str, int] | None = None) -> None:
    lines = lines or {}

    def fail(field_name: str, msg: str):
        where = f"line {lines[field_name]} " if field_name in lines else ""
        raise ConfigError(f"{where}({field_name}): {msg}")

    if cfg.points < 1:
        fail("grid.points", "points >= 1")
    try:
        grid = cfg.grid()
    except ModelError as exc:
        fail("grid.theta_min", str(exc))
    try:
        validate_config(cfg.slits, cfg.illum, cfg.coupling, grid)
    except ModelError as exc:
        fail("illumination.amplitudes" if "amplitude" in str(exc) and "hop" not in str(exc) else "coupling.hops", str(exc))
    for lab in cfg.masks:
        if not lab or any(ch not in cfg.slits.labels for ch in lab.upper()):
            fail("pattern.masks", f"mask {lab!r} must use slit labels {''.join(cfg.slits.labels)}")
    if cfg.samples_per_slit < 8:
        fail("rs.samples_per_slit", "samples_per_slit >= 8")
    if cfg.screen_distance_m <= 0:
        fail("rs.screen_distance", "screen_distance > 0")
    if cfg.plot_format not in ("svg", "pdf", "eps"):
        fail("outputs.plot_format", "plot_format must be a vector format: svg, pdf or eps")
    if cfg.sweep.kind not in ("intensity_map", "kappa_map", "kappa_at_center"):
        fail("sweep.kind", f"unknown sweep kind {cfg.sweep.kind!r}")
    if any(x <= 0 for x in cfg.sweep.wavelengths_m):
        fail("sweep.wavelengths", "wavelengths > 0")
    for wd in cfg.sweep.widths_m:
        try:
            SlitArray(wd, cfg.slits.pitch_m, cfg.slits.slit_count)
        except ModelError as exc:
            fail("sweep.widths", str(exc))


def _fmt(x: float) -> str:
    return repr(float(x))


def _fmt_complex(z: complex) -> str:
    z = complex(z)
    return _fmt(z.real) if z.imag == 0 else repr(z).strip("()")


def dump_config(cfg: ScenarioConfig) -> str:
    """Serialize so that ``parse_config(dump_config(cfg)) == cfg``."""
    out = ["[geometry]", f"w = {_fmt(cfg.slits.slit_width_m)}m", f"p = {_fmt(cfg.slits.pitch_m)}m"]
    out.append(f"n_slits = {cfg.slits.slit_count}")
    if cfg.height_m is not None:
        out.append(f"h = {_fmt(cfg.height_m)}m")
    if cfg.thickness_m is not None:
        out.append(f"t = {_fmt(cfg.thickness_m)}m")
    out += ["", "[illumination]", f"wavelength = {_fmt(cfg.illum.wavelength_m)}m"]
    out.append("amplitudes = [" + ", ".join(_fmt_complex(a) for a in cfg.illum.slit_amplitudes) + "]")
    c = cfg.coupling
    out += ["", "[coupling]", f"n_eff = {_fmt(c.n_eff)}"]
    out.append("hops = [" + ", ".join(_fmt(x) for x in c.hop_amplitudes) + "]")
    out.append(f"max_hops = {c.max_hops}")
    if cfg.coupling_table is not None:
        t = cfg.coupling_table
        out.append("table_wavelengths = [" + ", ".join(f"{_fmt(x)}m" for x in t.wavelengths_m) + "]")
        out.append("table_n_eff = [" + ", ".join(_fmt(x) for x in t.n_eff) + "]")
        rows = ", ".join("[" + ", ".join(_fmt(x) for x in r) + "]" for r in t.hop_amplitudes)
        out.append(f"table_hops = [{rows}]")
    out += [
        "",
        "[grid]",
        f"theta_min = {_fmt(cfg.theta_min)}rad",
        f"theta_max = {_fmt(cfg.theta_max)}rad",
        f"points = {cfg.points}",
    ]
    if cfg.masks:
        out += ["", "[pattern]", "masks = [" + ", ".join(cfg.masks) + "]"]
    s = cfg.sweep
    out += ["", "[sweep]", f"kind = {s.kind}"]
    if s.wavelengths_m:
        out.append("wavelengths = [" + ", ".join(f"{_fmt(x)}m" for x in s.wavelengths_m) + "]")
    if s.widths_m:
        out.append("widths = [" + ", ".join(f"{_fmt(x)}m" for x in s.widths_m) + "]")
    out += [
        "",
        "[rs]",
        f"samples_per_slit = {cfg.samples_per_slit}",
        f"screen_distance = {_fmt(cfg.screen_distance_m)}m",
        "",
        "[outputs]",
        f"plot = {'true' if cfg.plot else 'false'}",
        f"plot_format = {cfg.plot_format}",
    ]
    return "\n".join(out) + "\n"
