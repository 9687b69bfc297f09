from __future__ import annotations

import logging
import re
from pathlib import Path
from typing import Callable, Optional, TypeVar, Union

from crossflow.config.schema import is_valid_key, normalize_key
from crossflow.config.scenario import InitialCondition, InitialKind, ModelKind, Profile, Scenario
from crossflow.core.exceptions import ConfigError, ParameterError
from crossflow.core.grid import Grid, MixedBoundary, PeriodicBoundary
from crossflow.core.params import ModelParams
from crossflow.lattice.state import Scheduler
from crossflow.pde.boundary import Mode
from crossflow.stability.region import RegionMethod

logger = logging.getLogger(__name__)

T = TypeVar("T")

PRESET_KEY = "preset"

# key -> (default, one-line description); order is the rendering order
CONFIG_KEYS: dict[str, tuple[str, str]] = {
    "name": ("scenario", "Scenario name, used for output file names."),
    "description": ("", "Free-text description."),
    "model": ("pde2d", "lattice | compartment | pde2d | pde1d | stability_map"),
    "alpha": ("1.0", "Transition-rate scale (lattice, compartment)."),
    "gamma0": ("0.0", "Base side-step rate."),
    "gamma1": ("0.0", "Side-step rate against the other group's direction."),
    "gamma2": ("0.0", "Side-step rate with the other group's direction."),
    "epsilon": ("0.0", "Diffusion scale of the parabolic systems."),
    "dt": ("0.0", "Maximum time step (0: solver's stable step; compartment: time per step)."),
    "n": ("64", "Cells per axis."),
    "length": ("1.0", "Domain extent per axis."),
    "bc": ("periodic", "periodic | mixed"),
    "inflow": ("0.1", "Entrance density of mixed boundaries."),
    "outflux": ("0.8", "Exit flux coefficient of mixed boundaries."),
    "mode": ("parabolic", "hyperbolic | parabolic"),
    "initial": ("uniform", "uniform | perturbed | random"),
    "profile": ("sin", "sin | cos (1D) | cos_sin (2D)"),
    "r_inf": ("0.0", "Uniform red density."),
    "b_inf": ("0.0", "Uniform blue density."),
    "amplitude": ("0.0", "Perturbation amplitude."),
    "density": ("0.0", "Total lattice density for random placement."),
    "red_fraction": ("0.5", "Share of red walkers in random placement."),
    "seed": ("0", "Random seed."),
    "scheduler": ("random_sequential", "synchronous | random_sequential"),
    "steps": ("0", "Number of lattice or compartment steps."),
    "t_end": ("0.0", "Final time of PDE runs."),
    "diagnostics_every": ("1.0", "Diagnostics cadence (steps or model time)."),
    "snapshot_every": ("0.0", "Snapshot cadence (steps or model time); 0 disables snapshots."),
    "out_dir": ("", "Output directory (empty: CROSSFLOW_OUT or ./runs)."),
    "resolution": ("128", "Samples per axis of stability rasters."),
    "method": ("scan", "curve | scan"),
    "refinements": ("", "Comma-separated cells per axis for convergence studies."),
    "fine_n": ("0", "Cells per axis of the reference solution in convergence studies."),
    "swap_gammas": ("false", "Exchange gamma1 and gamma2 before running."),
}

_TRUE = {"true", "yes", "1", "on"}
_FALSE = {"false", "no", "0", "off"}
_QUOTED_KEY_RE = re.compile(r"'([a-z][a-z0-9_]*)'")


def _parse_bool(raw: str) -> bool:
    v = raw.strip().lower()
    if v in _TRUE:
        return True
    if v in _FALSE:
        return False
    raise ValueError("expected true or false")


def _parse_int_list(raw: str) -> tuple[int, ...]:
    return tuple(int(part) for part in raw.split(",") if part.strip())


def _convert(key: str, values: dict[str, str], lines: dict[str, int], fn: Callable[[str], T]) -> T:
    raw = values[key]
    try:
        return fn(raw)
    except ValueError as exc:
        raise ConfigError(f"Invalid value for '{key}': {raw!r} ({exc}).", lines.get(key)) from exc


def _read_pairs(text: str) -> tuple[dict[str, str], dict[str, int]]:
    values: dict[str, str] = {}
    lines: dict[str, int] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"Expected 'key = value', got {raw_line.strip()!r}.", lineno)
        raw_key, raw_value = line.split("=", 1)
        key = normalize_key(raw_key)
        if not is_valid_key(key):
            raise ConfigError(f"Malformed key {raw_key.strip()!r}.", lineno)
        if key != PRESET_KEY and key not in CONFIG_KEYS:
            raise ConfigError(f"Unknown key '{key}'.", lineno)
        if key in values:
            raise ConfigError(f"Duplicate key '{key}' (first set on line {lines[key]}).", lineno)
        values[key] = raw_value.strip()
        lines[key] = lineno
    return values, lines


def scenario_from_mapping(values: dict[str, str], lines: Optional[dict[str, int]] = None) -> Scenario:
    """Build a validated Scenario from string values; missing keys take their documented defaults."""
    lines = lines or {}
    merged = {key: default for key, (default, _) in CONFIG_KEYS.items()}
    merged.update(values)

    def get(key: str, fn: Callable[[str], T]) -> T:
        return _convert(key, merged, lines, fn)

    try:
        model = get("model", ModelKind)
        n = get("n", int)
        length = get("length", float)
        bc_name = get("bc", str).lower()
        if bc_name == "periodic":
            bc = PeriodicBoundary()
        elif bc_name == "mixed":
            bc = MixedBoundary(inflow=get("inflow", float), outflux=get("outflux", float))
        else:
            raise ConfigError(f"Invalid value for 'bc': {bc_name!r} (expected periodic or mixed).", lines.get("bc"))
        grid = Grid(dims=1 if model is ModelKind.PDE1D else 2, n=n, length=length, bc=bc)
        params = ModelParams(
            alpha=get("alpha", float),
            gamma0=get("gamma0", float),
            gamma1=get("gamma1", float),
            gamma2=get("gamma2", float),
            epsilon=get("epsilon", float),
            h=grid.h,
            dt=get("dt", float),
        )
        initial = InitialCondition(
            kind=get("initial", InitialKind),
            r_inf=get("r_inf", float),
            b_inf=get("b_inf", float),
            amplitude=get("amplitude", float),
            profile=get("profile", Profile),
            density=get("density", float),
            red_fraction=get("red_fraction", float),
        )
        out_dir = merged["out_dir"].strip() or None
        return Scenario(
            name=get("name", str),
            description=merged["description"],
            model=model,
            params=params,
            grid=grid,
            initial=initial,
            mode=get("mode", Mode),
            scheduler=get("scheduler", Scheduler),
            seed=get("seed", int),
            steps=get("steps", int),
            t_end=get("t_end", float),
            diagnostics_every=get("diagnostics_every", float),
            snapshot_every=get("snapshot_every", float),
            out_dir=out_dir,
            resolution=get("resolution", int),
            method=get("method", RegionMethod),
            refinements=get("refinements", _parse_int_list),
            fine_n=get("fine_n", int),
            swap_gammas=get("swap_gammas", _parse_bool),
        )
    except ParameterError as exc:
        match = _QUOTED_KEY_RE.search(str(exc))
        line = lines.get(match.group(1)) if match else None
        raise ConfigError(str(exc), line) from exc


def _format(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    if hasattr(value, "value"):
        return str(value.value)
    if value is None:
        return ""
    return str(value)


def scenario_to_mapping(s: Scenario) -> dict[str, str]:
    p = s.params
    bc = s.grid.bc
    mixed = isinstance(bc, MixedBoundary)
    raw: dict[str, object] = {
        "name": s.name,
        "description": s.description,
        "model": s.model,
        "alpha": p.alpha,
        "gamma0": p.gamma0,
        "gamma1": p.gamma1,
        "gamma2": p.gamma2,
        "epsilon": p.epsilon,
        "dt": p.dt,
        "n": s.grid.n,
        "length": float(s.grid.length),
        "bc": bc.name,
        "inflow": bc.inflow if mixed else 0.1,
        "outflux": bc.outflux if mixed else 0.8,
        "mode": s.mode,
        "initial": s.initial.kind,
        "profile": s.initial.profile,
        "r_inf": s.initial.r_inf,
        "b_inf": s.initial.b_inf,
        "amplitude": s.initial.amplitude,
        "density": s.initial.density,
        "red_fraction": s.initial.red_fraction,
        "seed": s.seed,
        "scheduler": s.scheduler,
        "steps": s.steps,
        "t_end": s.t_end,
        "diagnostics_every": s.diagnostics_every,
        "snapshot_every": s.snapshot_every,
        "out_dir": s.out_dir,
        "resolution": s.resolution,
        "method": s.method,
        "refinements": s.refinements,
        "fine_n": s.fine_n,
        "swap_gammas": s.swap_gammas,
    }
    return {key: _format(raw[key]) for key in CONFIG_KEYS}


def render_config(s: Scenario) -> str:
    """Write ``s`` in the ``key = value`` format read by :func:`parse_config`."""
    lines = [f"# crossflow scenario '{s.name}'"]
    lines.extend(f"{key} = {value}" for key, value in scenario_to_mapping(s).items())
    return "\n".join(lines) + "\n"


def parse_config_text(text: str) -> Scenario:
    """Parse scenario text; ``preset = <name>`` inherits every unlisted key from that preset."""
    from crossflow.config.presets import get_preset

    values, lines = _read_pairs(text)
    base: dict[str, str] = {}
    if PRESET_KEY in values:
        preset_name = values.pop(PRESET_KEY)
        try:
            base = scenario_to_mapping(get_preset(preset_name))
        except KeyError as exc:
            raise ConfigError(f"Unknown preset '{preset_name}'.", lines.get(PRESET_KEY)) from exc
    base.update(values)
    return scenario_from_mapping(base, lines)


def parse_config(source: Union[str, Path]) -> Scenario:
    """Load a scenario from a config file or by preset name.

    Raises
    ------
    ConfigError
        If the file is malformed, has unknown keys or invalid values (with the
        offending line where known), or if ``source`` is neither a file nor a
        preset name.
    """
    from crossflow.config.presets import PRESETS, get_preset

    path = Path(source)
    if path.is_file():
        logger.debug("Reading scenario file %s.", path)
        return parse_config_text(path.read_text(encoding="utf-8"))
    if str(source) in PRESETS:
        return get_preset(str(source))
    raise ConfigError(f"No such config file or preset: {source}.")
