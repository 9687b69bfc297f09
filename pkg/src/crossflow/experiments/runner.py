from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
import pandas as pd

import crossflow
from crossflow.compartment.model import CompartmentState, run_compartment
from crossflow.config.parser import render_config, scenario_to_mapping
from crossflow.config.presets import get_preset
from crossflow.config.scenario import InitialKind, ModelKind, Profile, Scenario
from crossflow.config.schema import CONSERVATION_TOL, CONVERGENCE_COLUMNS, CSV_FLOAT_FORMAT
from crossflow.core.exceptions import ParameterError, SolverAbortError
from crossflow.core.grid import Grid, MixedBoundary
from crossflow.core.params import validate_entropy_regime
from crossflow.diagnostics.entropy import EntropyConfig, monitor_entropy_growth
from crossflow.diagnostics.fits import convergence_order, windowed_growth_rate
from crossflow.diagnostics.observers import (
    AnisotropyObserver,
    BaseObserver,
    DiagonalPhaseObserver,
    Entropy1DObserver,
    Entropy2DObserver,
    ExitFluxObserver,
    LyapunovObserver,
    MassObserver,
    ModeAmplitudeObserver,
    PerturbationObserver,
    SegregationObserver,
)
from crossflow.diagnostics.patterns import coarse_grain
from crossflow.diagnostics.series import DiagnosticsSeries
from crossflow.experiments.output import write_field_snapshot, write_lattice_snapshot, write_manifest
from crossflow.lattice.simulation import run as run_lattice
from crossflow.lattice.state import LatticeState
from crossflow.pde.boundary import Mode
from crossflow.pde.fields import DensityField1D, DensityField2D
from crossflow.pde.solver1d import perturbed_state_1d, run_1d
from crossflow.pde.solver2d import perturbed_state_2d, run_2d
from crossflow.stability.linear import max_growth_parabolic
from crossflow.stability.region import count_connected_regions, elliptic_mask, raster_region_map

logger = logging.getLogger(__name__)

# wavenumber (in units of pi) of the 1D perturbation profiles
PERTURBATION_K = 2
# a mixed-boundary run is deadlocked when a cell is this full, the exit flux fell
# below DEADLOCK_RATIO of its peak and mass accumulated inside
JAM_DENSITY = 0.99
DEADLOCK_RATIO = 0.5
GROWTH_WINDOW = (1.5, 5.0)
DECAY_WINDOW = (0.2, 0.7)
# lattice fields are block-averaged to this many cells per axis for pattern metrics
PATTERN_CELLS = 25


@dataclass(frozen=True)
class ConvergenceResult:
    """L1 errors of the compartment model against a fine parabolic reference."""

    table: pd.DataFrame
    order: float
    fine_n: int


@dataclass(frozen=True)
class RunReport:
    """Everything a finished run produced.

    Attributes
    ----------
    scenario:
        The scenario as executed (after seed and cadence overrides).
    out_dir:
        Directory holding every written file.
    manifest:
        Contents of ``manifest.json``.
    series:
        Diagnostics series, ``None`` for stability maps and convergence studies.
    final:
        Final state of time-dependent runs.
    table:
        Raster or convergence table when the run produced one.
    files:
        Written files, in order of creation.
    """

    scenario: Scenario
    out_dir: Path
    manifest: dict[str, Any]
    series: Optional[DiagnosticsSeries] = None
    final: Any = None
    table: Optional[pd.DataFrame] = None
    files: tuple[Path, ...] = field(default_factory=tuple)


def _initial_2d(grid: Grid, s: Scenario) -> DensityField2D:
    ic = s.initial
    if ic.kind is InitialKind.UNIFORM:
        return DensityField2D.uniform(grid, ic.r_inf, ic.b_inf)
    if ic.kind is InitialKind.PERTURBED:
        k = 2 if ic.profile is Profile.COS_SIN_PERIODIC else 1
        return perturbed_state_2d(grid, ic.r_inf, ic.b_inf, ic.amplitude, k=k)
    raise ParameterError(f"Initial condition '{ic.kind.value}' is not available for {s.model.value} runs.")


def _initial_1d(s: Scenario) -> DensityField1D:
    ic = s.initial
    if ic.kind is InitialKind.UNIFORM:
        return DensityField1D.uniform(s.grid, ic.r_inf, ic.b_inf)
    if ic.kind is InitialKind.PERTURBED:
        return perturbed_state_1d(s.grid, ic.r_inf, ic.b_inf, ic.amplitude, ic.profile.value, k=PERTURBATION_K)
    raise ParameterError(f"Initial condition '{ic.kind.value}' is not available for pde1d runs.")


def _pattern_coarsening(n: int) -> int:
    factor = n // PATTERN_CELLS
    return factor if factor > 1 and n % factor == 0 else 1


def _mass_drift(series: DiagnosticsSeries) -> float:
    drift = 0.0
    for name in ("M_r", "M_b"):
        m = series.column(name)
        m0 = m[0]
        rel = np.abs(m - m0) / m0 if m0 > 0 else np.abs(m - m0)
        drift = max(drift, float(np.nanmax(rel)))
    return drift


def _deadlock(series: DiagnosticsSeries, max_density: float) -> bool:
    """Gridlocked cells, exit flux down from its peak, and mass piling up inside."""
    exit_flux = series.column("exit_flux")
    mass = series.column("M_r") + series.column("M_b")
    peak = float(np.nanmax(exit_flux))
    return bool(
        max_density >= JAM_DENSITY
        and peak > 0
        and exit_flux[-1] < DEADLOCK_RATIO * peak
        and mass[-1] > mass[0]
    )


def exit_flux_contrast(free: RunReport, jammed: RunReport) -> float:
    """Final exit flux of ``jammed`` as a fraction of the final exit flux of ``free``.

    Both reports must come from mixed-boundary 2D runs.

    Raises
    ------
    ParameterError
        If either run recorded no exit flux or ``free`` has none left.
    """
    values = []
    for report in (free, jammed):
        series = report.series
        if series is None or "exit_flux" not in series.columns:
            raise ParameterError(f"Run '{report.scenario.name}' recorded no exit flux.")
        values.append(series.last("exit_flux"))
    if not values[0] > 0:
        raise ParameterError(f"Run '{free.scenario.name}' ends with no outflow to compare against.")
    return values[1] / values[0]


def convergence_study(scenario: Scenario) -> ConvergenceResult:
    """Compare compartment runs on each refinement with a fine-grid parabolic solution.

    Each refinement ``n`` runs with ``h = 1/n`` and ``dt = alpha h`` up to
    ``t_end``; the reference solves the parabolic system with
    ``epsilon = h_fine / 2`` (or the configured epsilon) on ``fine_n`` cells
    and is block-averaged onto each coarse grid.

    Raises
    ------
    ParameterError
        If no refinements are given, a refinement does not divide ``fine_n``,
        or ``t_end`` is not a whole number of compartment steps.
    """
    s = scenario
    if not s.refinements:
        raise ParameterError("A convergence study needs 'refinements'.")
    fine_n = s.fine_n or 2 * max(s.refinements)
    if any(fine_n % n for n in s.refinements):
        raise ParameterError(f"Every refinement must divide fine_n={fine_n}.")
    p = s.effective_params

    fine_grid = Grid(dims=2, n=fine_n, length=s.grid.length)
    eps = p.epsilon if p.epsilon > 0 else fine_grid.h / 2.0
    fine_params = replace(p, epsilon=eps, h=fine_grid.h, dt=0.0)
    reference = run_2d(_initial_2d(fine_grid, s), fine_params, Mode.PARABOLIC, s.t_end).final

    rows = []
    for n in sorted(s.refinements):
        grid = Grid(dims=2, n=n, length=s.grid.length)
        dt = p.alpha * grid.h
        steps = int(round(s.t_end / dt))
        if not np.isclose(steps * dt, s.t_end, rtol=1e-9, atol=1e-12):
            raise ParameterError(f"t_end={s.t_end} is not a multiple of the compartment step {dt} at n={n}.")
        start = _initial_2d(grid, s)
        final = run_compartment(CompartmentState(start.r, start.b), replace(p, h=grid.h, dt=dt), steps).final
        factor = fine_n // n
        err = np.abs(final.r - coarse_grain(reference.r, factor)) + np.abs(final.b - coarse_grain(reference.b, factor))
        rows.append({"n": n, "h": grid.h, "l1_error": float(err.sum() * grid.cell_volume)})
        logger.info("Refinement n=%d: L1 error %.3e after %d steps.", n, rows[-1]["l1_error"], steps)

    table = pd.DataFrame(rows, columns=list(CONVERGENCE_COLUMNS))
    order = convergence_order(table["h"], table["l1_error"])
    logger.info("Observed convergence order %.3f.", order)
    return ConvergenceResult(table=table, order=order, fine_n=fine_n)


class ScenarioRunner:
    """Runs scenarios and writes their outputs below ``out_dir / <scenario name>``.

    Parameters
    ----------
    out_dir:
        Root output directory.
    seed:
        Overrides the scenario's seed when given.
    snapshot_every:
        Overrides the scenario's snapshot cadence when given (``0`` disables).
    images:
        Write greyscale images next to 2D field snapshots.
    """

    def __init__(
        self,
        out_dir: Union[str, Path],
        *,
        seed: Optional[int] = None,
        snapshot_every: Optional[float] = None,
        images: bool = True,
    ) -> None:
        self.out_dir = Path(out_dir)
        self.seed = seed
        self.snapshot_every = snapshot_every
        self.images = images

    def _prepare(self, scenario: Scenario) -> Scenario:
        changes: dict[str, Any] = {}
        if self.seed is not None:
            changes["seed"] = self.seed
        if self.snapshot_every is not None:
            changes["snapshot_every"] = self.snapshot_every
        return replace(scenario, **changes) if changes else scenario

    def run(self, scenario: Scenario) -> RunReport:
        """Execute ``scenario`` and write its files; the input scenario is never modified.

        Raises
        ------
        ParameterError
            If the scenario cannot be run as configured.
        SolverAbortError
            If the solver aborts; ``manifest.json`` then records the reason.
        """
        s = self._prepare(scenario)
        run_dir = self.out_dir / s.name
        run_dir.mkdir(parents=True, exist_ok=True)
        files: list[Path] = []
        config_path = run_dir / "scenario.cfg"
        config_path.write_text(render_config(s), encoding="utf-8")
        files.append(config_path)

        manifest: dict[str, Any] = {
            "name": s.name,
            "model": s.model,
            "description": s.description,
            "config": scenario_to_mapping(s),
            "params": s.effective_params.to_dict(),
            "seed": s.seed,
            "version": crossflow.__version__,
            "status": "ok",
            "exploratory": False,
            "deadlock": False,
            "conservation_ok": None,
            "max_mass_drift": None,
            "clamp_count": 0,
            "growth_rate": None,
        }
        logger.info("Starting %s run '%s' (seed %d).", s.model.value, s.name, s.seed)
        started = time.perf_counter()
        try:
            report = self._dispatch(s, run_dir, manifest, files)
        except SolverAbortError as exc:
            manifest["status"] = "aborted"
            manifest["abort_reason"] = str(exc)
            manifest["wall_time_s"] = time.perf_counter() - started
            write_manifest(manifest, run_dir / "manifest.json")
            logger.error("Run '%s' aborted: %s", s.name, exc)
            raise
        manifest["wall_time_s"] = time.perf_counter() - started
        manifest["files"] = [p.name for p in files]
        files.append(write_manifest(manifest, run_dir / "manifest.json"))
        logger.info("Finished '%s' in %.2f s; outputs in %s.", s.name, manifest["wall_time_s"], run_dir)
        return replace(report, manifest=manifest, files=tuple(files))

    def _dispatch(self, s: Scenario, run_dir: Path, manifest: dict[str, Any], files: list[Path]) -> RunReport:
        if s.model is ModelKind.LATTICE:
            return self._run_lattice(s, run_dir, manifest, files)
        if s.model is ModelKind.COMPARTMENT:
            if s.refinements:
                return self._run_convergence(s, run_dir, manifest, files)
            return self._run_compartment(s, run_dir, manifest, files)
        if s.model is ModelKind.PDE2D:
            return self._run_pde2d(s, run_dir, manifest, files)
        if s.model is ModelKind.PDE1D:
            return self._run_pde1d(s, run_dir, manifest, files)
        return self._run_map(s, run_dir, manifest, files)

    # ------------------------------------------------------------------
    # Model runs
    # ------------------------------------------------------------------

    def _snapshot_dir(self, run_dir: Path) -> Path:
        path = run_dir / "snapshots"
        path.mkdir(exist_ok=True)
        return path

    def _write_series(self, series: DiagnosticsSeries, run_dir: Path, files: list[Path]) -> None:
        path = run_dir / "diagnostics.csv"
        series.to_csv(path)
        files.append(path)

    def _run_lattice(self, s: Scenario, run_dir: Path, manifest: dict[str, Any], files: list[Path]) -> RunReport:
        ic = s.initial
        initial = LatticeState.random_placement(s.grid.n, ic.density, s.seed, ic.red_fraction)
        coarse = _pattern_coarsening(s.grid.n)
        observers: list[BaseObserver] = [
            MassObserver(),
            SegregationObserver(),
            AnisotropyObserver(coarse=coarse),
            DiagonalPhaseObserver(coarse=coarse),
        ]
        snap_every = int(round(s.snapshot_every))
        snap_dir = self._snapshot_dir(run_dir) if snap_every > 0 else run_dir

        def _snapshot(state: LatticeState) -> None:
            files.extend(write_lattice_snapshot(state, snap_dir, f"lattice_{state.step_count:06d}"))

        result = run_lattice(
            initial,
            s.effective_params,
            s.scheduler,
            s.steps,
            observers,
            every=max(1, int(round(s.diagnostics_every))),
            snapshot_every=snap_every,
            on_snapshot=_snapshot,
        )
        self._write_series(result.series, run_dir, files)
        files.extend(write_lattice_snapshot(result.final, run_dir, "final"))
        final = result.final
        manifest["conservation_ok"] = (
            final.red_count == initial.red_count and final.blue_count == initial.blue_count
        )
        manifest["max_mass_drift"] = _mass_drift(result.series)
        manifest["steps"] = s.steps
        return RunReport(s, run_dir, manifest, series=result.series, final=final)

    def _run_compartment(self, s: Scenario, run_dir: Path, manifest: dict[str, Any], files: list[Path]) -> RunReport:
        p = s.effective_params
        start = _initial_2d(s.grid, s)
        observers: list[BaseObserver] = [MassObserver(), AnisotropyObserver(), PerturbationObserver(s.initial.r_inf, s.initial.b_inf)]
        if p.epsilon > 0:
            observers.append(Entropy2DObserver(EntropyConfig(p.epsilon)))
        result = run_compartment(
            CompartmentState(start.r, start.b),
            p,
            s.steps,
            observers,
            every=max(1, int(round(s.diagnostics_every))),
        )
        self._write_series(result.series, run_dir, files)
        files.extend(write_field_snapshot(result.final, run_dir, "final", images=self.images))
        drift = _mass_drift(result.series)
        manifest["max_mass_drift"] = drift
        manifest["conservation_ok"] = drift <= CONSERVATION_TOL
        manifest["steps"] = s.steps
        return RunReport(s, run_dir, manifest, series=result.series, final=result.final)

    def _run_convergence(self, s: Scenario, run_dir: Path, manifest: dict[str, Any], files: list[Path]) -> RunReport:
        result = convergence_study(s)
        path = run_dir / "convergence.csv"
        result.table.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
        files.append(path)
        manifest["convergence_order"] = result.order
        manifest["fine_n"] = result.fine_n
        return RunReport(s, run_dir, manifest, table=result.table)

    def _sampling(self, s: Scenario) -> tuple[float, int]:
        stride = int(round(s.snapshot_every / s.diagnostics_every)) if s.snapshot_every > 0 else 0
        if s.snapshot_every > 0:
            stride = max(stride, 1)
        return s.diagnostics_every, stride

    def _run_pde2d(self, s: Scenario, run_dir: Path, manifest: dict[str, Any], files: list[Path]) -> RunReport:
        p = s.effective_params
        regime = validate_entropy_regime(p)
        manifest["entropy_regime_warnings"] = list(regime.warnings)
        initial = _initial_2d(s.grid, s)
        observers: list[BaseObserver] = [
            MassObserver(),
            AnisotropyObserver(),
            DiagonalPhaseObserver(),
            PerturbationObserver(s.initial.r_inf, s.initial.b_inf),
        ]
        periodic = s.grid.is_periodic
        if periodic and p.epsilon > 0:
            observers.append(Entropy2DObserver(EntropyConfig(p.epsilon)))
        if isinstance(s.grid.bc, MixedBoundary):
            observers.append(ExitFluxObserver(s.grid.bc.outflux))
        every, stride = self._sampling(s)
        snap_dir = self._snapshot_dir(run_dir) if stride else run_dir

        def _snapshot(state: DensityField2D) -> None:
            files.extend(write_field_snapshot(state, snap_dir, f"field_t{state.t:010.4f}", images=self.images))

        result = run_2d(
            initial, p, s.mode, s.t_end, observers, sample_every=every, snapshot_stride=stride, on_snapshot=_snapshot
        )
        self._write_series(result.series, run_dir, files)
        files.extend(write_field_snapshot(result.final, run_dir, "final", images=self.images))

        manifest["steps"] = result.steps
        manifest["t_final"] = result.final.t
        manifest["clamp_count"] = result.final.clamp_count
        manifest["exploratory"] = result.exploratory
        manifest["max_mass_drift"] = result.max_mass_drift
        if periodic:
            manifest["conservation_ok"] = result.max_mass_drift <= CONSERVATION_TOL
        else:
            max_density = float((result.final.r + result.final.b).max())
            manifest["max_density"] = max_density
            manifest["exit_flux_peak"] = float(np.nanmax(result.series.column("exit_flux")))
            manifest["deadlock"] = _deadlock(result.series, max_density)
            manifest["final_exit_flux"] = result.series.last("exit_flux")
        if periodic and p.epsilon > 0:
            self._record_entropy_growth(result.series, manifest)
        return RunReport(s, run_dir, manifest, series=result.series, final=result.final)

    def _record_entropy_growth(self, series: DiagnosticsSeries, manifest: dict[str, Any]) -> None:
        try:
            report = monitor_entropy_growth(series)
        except ValueError as exc:
            logger.debug("Entropy growth not assessed: %s", exc)
            return
        manifest["entropy_slope"] = report.slope
        manifest["entropy_at_most_linear"] = report.is_at_most_linear()

    def _run_pde1d(self, s: Scenario, run_dir: Path, manifest: dict[str, Any], files: list[Path]) -> RunReport:
        p = s.effective_params
        ic = s.initial
        initial = _initial_1d(s)
        cfg = EntropyConfig(p.epsilon)
        observers: list[BaseObserver] = [
            MassObserver(),
            PerturbationObserver(ic.r_inf, ic.b_inf),
            ModeAmplitudeObserver(PERTURBATION_K // 2),
            Entropy1DObserver(cfg),
        ]
        if p.epsilon > 0 and ic.r_inf + ic.b_inf < 1.0:
            observers.append(LyapunovObserver(ic.r_inf, ic.b_inf, s.grid, cfg))
        every, stride = self._sampling(s)
        snap_dir = self._snapshot_dir(run_dir) if stride else run_dir

        def _snapshot(state: DensityField1D) -> None:
            files.extend(write_field_snapshot(state, snap_dir, f"field_t{state.t:010.4f}", images=False))

        result = run_1d(
            initial, p, s.mode, s.t_end, observers, sample_every=every, snapshot_stride=stride, on_snapshot=_snapshot
        )
        self._write_series(result.series, run_dir, files)
        files.extend(write_field_snapshot(result.final, run_dir, "final", images=False))

        manifest["steps"] = result.steps
        manifest["t_final"] = result.final.t
        manifest["clamp_count"] = result.final.clamp_count
        manifest["exploratory"] = result.exploratory
        manifest["max_mass_drift"] = result.max_mass_drift
        manifest["conservation_ok"] = result.max_mass_drift <= CONSERVATION_TOL

        norms = result.series.column("pert_l2")
        if ic.amplitude > 0 and norms.size > 1:
            grows = norms[-1] > norms[0]
            lo, hi = GROWTH_WINDOW if grows else DECAY_WINDOW
            manifest["growth_rate"] = windowed_growth_rate(result.series.column("t"), norms, lo, hi)
            if p.epsilon > 0:
                manifest["growth_rate_predicted"] = float(
                    max_growth_parabolic(ic.r_inf, ic.b_inf, PERTURBATION_K, p.epsilon)
                )
            manifest["pert_l2_ratio"] = float(norms[-1] / norms[0])
        return RunReport(s, run_dir, manifest, series=result.series, final=result.final)

    def _run_map(self, s: Scenario, run_dir: Path, manifest: dict[str, Any], files: list[Path]) -> RunReport:
        table = raster_region_map(s.resolution, s.effective_params.epsilon, s.method)
        path = run_dir / "region_map.csv"
        table.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
        files.append(path)
        manifest["samples"] = len(table)
        manifest["in_region_D"] = int(table["in_D"].sum())
        manifest["elliptic_regions"] = count_connected_regions(elliptic_mask(s.resolution))
        return RunReport(s, run_dir, manifest, table=table)


def run(
    scenario: Scenario,
    out_dir: Union[str, Path],
    *,
    seed: Optional[int] = None,
    snapshot_every: Optional[float] = None,
) -> RunReport:
    """Run ``scenario`` with a default :class:`ScenarioRunner`."""
    return ScenarioRunner(out_dir, seed=seed, snapshot_every=snapshot_every).run(scenario)


def _run_model(preset: Union[str, Scenario], model: ModelKind, out_dir: Union[str, Path]) -> RunReport:
    scenario = get_preset(preset) if isinstance(preset, str) else preset
    if scenario.model is not model:
        raise ParameterError(f"Scenario '{scenario.name}' is a {scenario.model.value} run, expected {model.value}.")
    return ScenarioRunner(out_dir).run(scenario)


def run_scenario_2d(preset: Union[str, Scenario], out_dir: Union[str, Path]) -> RunReport:
    """Run a 2D continuum preset (by name or as a scenario) and write its snapshots and diagnostics."""
    return _run_model(preset, ModelKind.PDE2D, out_dir)


def run_scenario_1d(preset: Union[str, Scenario], out_dir: Union[str, Path]) -> RunReport:
    """Run a 1D counterflow preset (by name or as a scenario) and write its snapshots and diagnostics."""
    return _run_model(preset, ModelKind.PDE1D, out_dir)
