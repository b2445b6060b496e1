"""Sectioned key=value run configuration.

Five sections are recognised: ``[grid]``, ``[hamiltonian]``, ``[integrator]``,
``[scenario]`` and ``[output]``. Dimensional values carry an SI unit suffix
(``R = 2.0 mm``); with ``natural=True`` they are plain numbers in the
caller's own units and suffixes are refused. Per-axis keys take
comma-separated lists, and a single value is broadcast over all axes.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .dynamics import IntegratorConfig
from .hamiltonians import ExternalPoly, HamiltonianSpec, LinearCoupling, Nonlinear, PairShortRange
from .scenarios import KINDS, ScenarioConfig
from .wavefield import Axis, GridSpec, PacketSpec


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending entry when known."""

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(f"[{key}] {message}" if key else message)
        self.key = key


SI_PREFIXES = {
    "Y": 1e24, "Z": 1e21, "E": 1e18, "P": 1e15, "T": 1e12, "G": 1e9, "M": 1e6, "k": 1e3,
    "": 1.0, "c": 1e-2, "m": 1e-3, "u": 1e-6, "µ": 1e-6, "n": 1e-9, "p": 1e-12, "f": 1e-15,
    "a": 1e-18, "z": 1e-21, "y": 1e-24,
}

LENGTH, ENERGY, MASS, TIME = "m", "J", "kg", "s"
NONE = None

# section -> key -> (unit, kind); kind is "float", "floats", "int", "ints", "str", "bool"
SCHEMA = {
    "grid": {
        "ndim": (NONE, "int"),
        "x_min": (LENGTH, "floats"),
        "x_max": (LENGTH, "floats"),
        "n_points": (NONE, "ints"),
        "max_points": (NONE, "int"),
    },
    "hamiltonian": {
        "hbar": ("J s", "float"),
        "mass": (MASS, "floats"),
        "nonlinear": (NONE, "str"),
        "w": ("w", "float"),
        "nl_coords": (NONE, "ints"),
        "ext_a": ("J/m", "float"),
        "ext_b": ("J/m^2", "float"),
        "ext_c": ("J/m^3", "float"),
        "ext_d": ("J/m^4", "float"),
        "ext_offset": (ENERGY, "float"),
        "ext_coords": (NONE, "ints"),
        "pair_u0": (ENERGY, "float"),
        "pair_lambda": (LENGTH, "float"),
        "pair_coords": (NONE, "ints"),
        "coupling_alpha": ("J/m^2", "float"),
        "coupling_micro": (NONE, "int"),
        "coupling_coords": (NONE, "ints"),
    },
    "integrator": {
        "method": (NONE, "str"),
        "dt": (TIME, "float"),
        "t_end": (TIME, "float"),
        "sample_every": (NONE, "int"),
        "norm_drift": (NONE, "float"),
        "energy_drift": (NONE, "float"),
    },
    "scenario": {
        "kind": (NONE, "str"),
        "center": (LENGTH, "floats"),
        "sigma": (LENGTH, "floats"),
        "momentum_k": ("1/m", "floats"),
        "r": (LENGTH, "float"),
        "R": (LENGTH, "float"),
        "N_eff": (NONE, "float"),
        "delta_V": (ENERGY, "float"),
        "kick": ("J s/m^2", "float"),
        "micro_offset": (LENGTH, "float"),
        "micro_sigma": (LENGTH, "float"),
        "pointer_sigma": (LENGTH, "float"),
        "spin_up": (NONE, "float"),
        "spin_down": (NONE, "float"),
        "gamma": (NONE, "float"),
        "gradient": ("J/m", "float"),
        "coupling": ("J/m^2", "float"),
    },
    "output": {
        "csv": (NONE, "str"),
        "summary": (NONE, "str"),
        "plot": (NONE, "bool"),
    },
}

_NUMBER = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(.*?)\s*$")


def _unit_factor(unit: str, expected: str, key: str) -> float:
    """Scale factor for ``unit`` given the expected SI unit; a prefix may lead."""
    unit = " ".join(unit.split())
    if unit == expected:
        return 1.0
    head = expected.split("/")[0].split(" ")[0]
    if head == "1":
        raise ConfigError(f"unit {unit!r} does not match {expected!r}", key)
    for prefix, scale in SI_PREFIXES.items():
        if prefix and unit == prefix + expected:
            if head == "kg":
                break
            return scale
    if head == "kg":
        for prefix, scale in SI_PREFIXES.items():
            if unit == prefix + "g":
                return scale * 1e-3
    raise ConfigError(f"unit {unit!r} does not match {expected!r}", key)


def parse_quantity(text: str, expected: Optional[str], key: str, natural: bool) -> float:
    m = _NUMBER.match(text)
    if not m:
        raise ConfigError(f"cannot parse {text!r} as a number", key)
    value, unit = float(m.group(1)), m.group(2)
    if expected is None:
        if unit:
            raise ConfigError(f"{key} is dimensionless, got unit {unit!r}", key)
        return value
    if natural:
        if unit:
            raise ConfigError(f"unit {unit!r} given in natural-units mode", key)
        return value
    if not unit:
        raise ConfigError(f"missing unit (expected {expected}); use natural-units mode for plain numbers", key)
    return value * _unit_factor(unit, expected, key)


@dataclass
class RunConfig:
    """Parsed configuration plus the output directory."""

    scenario: ScenarioConfig
    values: dict
    out_dir: Path = Path(".")
    natural: bool = False
    csv_name: str = "trajectory.csv"
    summary_name: str = "summary.csv"
    plot: bool = False
    source: Optional[Path] = field(default=None, repr=False)


def _read(text: str, natural: bool, nl_form: str) -> dict:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keep key case (R vs r)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    values: dict = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]", section)
        spec = SCHEMA[section]
        out = values.setdefault(section, {})
        for key, raw in parser.items(section):
            if key not in spec:
                raise ConfigError(f"unknown key {key!r} in [{section}]", key)
            unit, kind = spec[key]
            if unit == "w":
                form = parser.get("hamiltonian", "nonlinear", fallback=nl_form).strip()
                unit = "1/kg" if form == "momentum" else "J/m^2"
            try:
                if kind == "str":
                    out[key] = raw.strip()
                elif kind == "bool":
                    out[key] = parser.getboolean(section, key)
                elif kind in ("int", "ints"):
                    items = [int(v) for v in raw.split(",")]
                    out[key] = items[0] if kind == "int" else items
                else:
                    items = [parse_quantity(v, unit, key, natural) for v in raw.split(",")]
                    out[key] = items[0] if kind == "float" else items
            except ConfigError:
                raise
            except ValueError as exc:
                raise ConfigError(f"bad value {raw!r}: {exc}", key) from exc
    return values


def _per_axis(values, n, key):
    if not isinstance(values, list):
        values = [values]
    if len(values) == 1:
        return values * n
    if len(values) != n:
        raise ConfigError(f"expected 1 or {n} values, got {len(values)}", key)
    return values


def _require(section: dict, key: str, name: str):
    if key not in section:
        raise ConfigError(f"missing required key in [{name}]", key)
    return section[key]


def build_scenario(values: dict) -> ScenarioConfig:
    g = values.get("grid", {})
    h = values.get("hamiltonian", {})
    i = values.get("integrator", {})
    s = values.get("scenario", {})

    ndim = g.get("ndim", len(g["x_min"]) if isinstance(g.get("x_min"), list) else 1)
    lo = _per_axis(_require(g, "x_min", "grid"), ndim, "x_min")
    hi = _per_axis(_require(g, "x_max", "grid"), ndim, "x_max")
    npts = _per_axis(_require(g, "n_points", "grid"), ndim, "n_points")
    try:
        kw = {"max_points": g["max_points"]} if "max_points" in g else {}
        grid = GridSpec(tuple(Axis(a, b, n) for a, b, n in zip(lo, hi, npts)), **kw)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc), "grid") from exc

    potentials = []
    try:
        if any(k.startswith("ext_") and k != "ext_coords" for k in h):
            potentials.append(ExternalPoly(
                h.get("ext_a", 0.0), h.get("ext_b", 0.0), h.get("ext_c", 0.0), h.get("ext_d", 0.0),
                h.get("ext_offset", 0.0), tuple(h["ext_coords"]) if "ext_coords" in h else None,
            ))
        if "pair_u0" in h:
            potentials.append(PairShortRange(
                h["pair_u0"], _require(h, "pair_lambda", "hamiltonian"),
                tuple(h["pair_coords"]) if "pair_coords" in h else None,
            ))
        if "coupling_alpha" in h:
            potentials.append(LinearCoupling(
                h["coupling_alpha"], _require(h, "coupling_micro", "hamiltonian"),
                tuple(h["coupling_coords"]) if "coupling_coords" in h else None,
            ))
        nl = Nonlinear(h.get("nonlinear", "off"), h.get("w", 0.0),
                       tuple(h["nl_coords"]) if "nl_coords" in h else None)
        ham = HamiltonianSpec(
            tuple(_per_axis(h.get("mass", 1.0), grid.ndim, "mass")), h.get("hbar", 1.0), potentials, nl
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc), "hamiltonian") from exc

    try:
        integ = IntegratorConfig(
            dt=_require(i, "dt", "integrator"),
            t_end=_require(i, "t_end", "integrator"),
            method=i.get("method", "split"),
            sample_every=i.get("sample_every", 1),
            norm_drift=i.get("norm_drift", 1e-6),
            energy_drift=i.get("energy_drift", 1e-2),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc), "integrator") from exc

    kind = s.get("kind", "gaussian")
    if kind not in KINDS:
        raise ConfigError(f"unknown scenario kind {kind!r}; choose from {KINDS}", "kind")
    packets = ()
    if "sigma" in s or "center" in s or "momentum_k" in s:
        centers = _per_axis(s.get("center", 0.0), grid.ndim, "center")
        sigmas = _per_axis(s.get("sigma", 1.0), grid.ndim, "sigma")
        ks = _per_axis(s.get("momentum_k", 0.0), grid.ndim, "momentum_k")
        packets = tuple(PacketSpec(c, sg, k) for c, sg, k in zip(centers, sigmas, ks))
    extra = {k: s[k] for k in ("r", "R", "N_eff", "delta_V", "kick", "micro_offset", "micro_sigma",
                               "pointer_sigma", "gamma", "gradient", "coupling") if k in s}
    if "spin_up" in s or "spin_down" in s:
        up, down = s.get("spin_up", 0.0), s.get("spin_down", 0.0)
        norm = math.hypot(up, down)
        if norm == 0:
            raise ConfigError("spin amplitudes are both zero", "spin_up")
        extra["spin_amplitudes"] = (up / norm, down / norm)
    try:
        return ScenarioConfig(kind, grid, ham, integ, packets, **extra)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc), "scenario") from exc


def loads(text: str, *, natural: bool = False, out_dir: Path | str = ".") -> RunConfig:
    values = _read(text, natural, "position")
    cfg = build_scenario(values)
    out = values.get("output", {})
    return RunConfig(
        scenario=cfg,
        values=values,
        out_dir=Path(out_dir),
        natural=natural,
        csv_name=out.get("csv", "trajectory.csv"),
        summary_name=out.get("summary", "summary.csv"),
        plot=out.get("plot", False),
    )


def load(path: Path | str, *, natural: bool = False, out_dir: Path | str = ".") -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    rc = loads(text, natural=natural, out_dir=out_dir)
    rc.source = path
    return rc


def parse_sweep_values(param: str, text: str, natural: bool) -> list[float]:
    """Comma-separated sweep values with the unit of the swept key."""
    units = {"w": "J/m^2", "N_eff": None, "delta_V": ENERGY, "R": LENGTH, "kick": "J s/m^2"}
    if param not in units:
        raise ConfigError(f"{param!r} is not sweepable; choose from {sorted(units)}", param)
    return [parse_quantity(v, units[param], param, natural) for v in text.split(",") if v.strip()]


def bundled_config(name: str) -> Path:
    from importlib import resources

    path = resources.files("nlqm") / "configs" / f"{name}.ini"
    if not path.is_file():
        raise ConfigError(f"no bundled config named {name!r}")
    return Path(str(path))


def bundled_names() -> list[str]:
    from importlib import resources

    folder = resources.files("nlqm") / "configs"
    return sorted(p.name[:-4] for p in folder.iterdir() if p.name.endswith(".ini"))
