from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from crossflow.core.exceptions import ParameterError
from crossflow.core.grid import Grid
from crossflow.core.params import ModelParams
from crossflow.lattice.state import Scheduler
from crossflow.pde.boundary import Mode
from crossflow.stability.region import RegionMethod


class ModelKind(str, Enum):
    LATTICE = "lattice"
    COMPARTMENT = "compartment"
    PDE2D = "pde2d"
    PDE1D = "pde1d"
    STABILITY_MAP = "stability_map"


class InitialKind(str, Enum):
    UNIFORM = "uniform"
    PERTURBED = "perturbed"
    RANDOM = "random"


class Profile(str, Enum):
    SIN = "sin"
    COS = "cos"
    COS_SIN = "cos_sin"
    COS_SIN_PERIODIC = "cos_sin_periodic"


@dataclass(frozen=True)
class InitialCondition:
    """How the first state of a run is built.

    ``PERTURBED`` adds ``amplitude`` times the chosen profile to the uniform
    state ``(r_inf, b_inf)``: ``sin``/``cos`` are the 1D profiles (``b``
    gets the opposite sign), ``cos_sin`` the 2D pair
    ``cos(pi x) sin(pi y)`` / ``sin(pi x) cos(pi y)``, and ``cos_sin_periodic``
    the same pair at twice the frequency (periodic on the unit square).
    ``RANDOM`` places ``round(density * n^2)`` lattice walkers,
    ``red_fraction`` of them red.
    """

    kind: InitialKind = InitialKind.UNIFORM
    r_inf: float = 0.0
    b_inf: float = 0.0
    amplitude: float = 0.0
    profile: Profile = Profile.SIN
    density: float = 0.0
    red_fraction: float = 0.5

    def __post_init__(self) -> None:
        for name in ("r_inf", "b_inf", "density", "red_fraction"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ParameterError(f"'{name}' = {value} must lie in [0, 1].")
        if self.r_inf + self.b_inf > 1.0:
            raise ParameterError(f"r_inf + b_inf = {self.r_inf + self.b_inf} exceeds 1.")
        if self.amplitude < 0:
            raise ParameterError(f"'amplitude' = {self.amplitude} violates nonnegativity.")

    @property
    def is_2d_profile(self) -> bool:
        return self.profile in (Profile.COS_SIN, Profile.COS_SIN_PERIODIC)


@dataclass(frozen=True)
class Scenario:
    """A single run: model, parameters, grid, initial data, duration and outputs.

    Durations and cadences are counted in steps for ``lattice`` and
    ``compartment`` runs and in model time for ``pde2d`` / ``pde1d``.
    """

    name: str
    model: ModelKind
    params: ModelParams
    grid: Grid
    initial: InitialCondition = field(default_factory=InitialCondition)
    mode: Mode = Mode.PARABOLIC
    scheduler: Scheduler = Scheduler.RANDOM_SEQUENTIAL
    seed: int = 0
    steps: int = 0
    t_end: float = 0.0
    diagnostics_every: float = 1.0
    snapshot_every: float = 0.0
    out_dir: Optional[str] = None
    resolution: int = 128
    method: RegionMethod = RegionMethod.SCAN
    refinements: tuple[int, ...] = ()
    fine_n: int = 0
    swap_gammas: bool = False
    description: str = ""

    def __post_init__(self) -> None:
        if self.steps < 0:
            raise ParameterError(f"'steps' = {self.steps} violates nonnegativity.")
        if self.t_end < 0:
            raise ParameterError(f"'t_end' = {self.t_end} violates nonnegativity.")
        if not self.diagnostics_every > 0:
            raise ParameterError("'diagnostics_every' must be > 0.")
        if self.snapshot_every < 0:
            raise ParameterError(f"'snapshot_every' = {self.snapshot_every} violates nonnegativity.")
        if self.model is ModelKind.PDE1D and self.grid.dims != 1:
            raise ParameterError("pde1d scenarios need a 1D grid.")
        if self.model in (ModelKind.PDE2D, ModelKind.LATTICE, ModelKind.COMPARTMENT) and self.grid.dims != 2:
            raise ParameterError(f"{self.model.value} scenarios need a 2D grid.")
        if self.model is ModelKind.LATTICE and self.initial.kind is not InitialKind.RANDOM:
            raise ParameterError("Lattice scenarios need 'initial = random'.")
        if any(n < 2 for n in self.refinements):
            raise ParameterError("Every refinement needs at least 2 cells per axis.")
        if self.initial.kind is InitialKind.PERTURBED and self.model is not ModelKind.STABILITY_MAP:
            if (self.model is ModelKind.PDE1D) == self.initial.is_2d_profile:
                raise ParameterError(
                    f"Profile '{self.initial.profile.value}' does not fit a {self.grid.dims}D {self.model.value} scenario."
                )
        if self.model is ModelKind.STABILITY_MAP and not self.params.epsilon > 0:
            raise ParameterError("Stability maps need 'epsilon' > 0.")

    @property
    def effective_params(self) -> ModelParams:
        """Parameters with ``gamma1`` and ``gamma2`` exchanged when ``swap_gammas`` is set."""
        return self.params.with_gammas_swapped() if self.swap_gammas else self.params
