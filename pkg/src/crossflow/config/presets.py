"""Built-in scenarios for the standard crossing-flow experiments.

Every preset is an ordinary :class:`Scenario`; ``docs/04_PRESETS.md`` lists
the parameter values and the outcome each one is expected to show.
"""

from __future__ import annotations

from crossflow.config.scenario import InitialCondition, InitialKind, ModelKind, Profile, Scenario
from crossflow.core.grid import Grid, MixedBoundary, PeriodicBoundary
from crossflow.core.params import ModelParams
from crossflow.lattice.state import Scheduler
from crossflow.stability.region import RegionMethod

_N_2D = 64
_N_1D = 100
_N_LATTICE = 100
# at entrance density 0.1 the side-step drift is about 1% of the walking flux
# and neither mixed-boundary preset jams; at 0.2 the crossing gridlocks when
# walkers step towards the other group's exit
_MIXED_INFLOW = 0.2
_MIXED_OUTFLUX = 0.8


def _grid(dims: int, n: int, mixed: bool = False) -> Grid:
    bc = MixedBoundary(inflow=_MIXED_INFLOW, outflux=_MIXED_OUTFLUX) if mixed else PeriodicBoundary()
    return Grid(dims=dims, n=n, bc=bc)


def _params(
    grid: Grid, *, alpha: float = 1.0, gamma0: float, gamma1: float, gamma2: float, epsilon: float = 0.0
) -> ModelParams:
    return ModelParams(alpha=alpha, gamma0=gamma0, gamma1=gamma1, gamma2=gamma2, epsilon=epsilon, h=grid.h)


def _ex2d_periodic() -> Scenario:
    grid = _grid(2, _N_2D)
    return Scenario(
        name="ex2d_periodic",
        description="2D parabolic system, periodic box, diagonal lanes from a small perturbation of (0.4, 0.4).",
        model=ModelKind.PDE2D,
        params=_params(grid, gamma0=0.2, gamma1=0.15, gamma2=0.1, epsilon=0.05),
        grid=grid,
        initial=InitialCondition(InitialKind.PERTURBED, r_inf=0.4, b_inf=0.4, amplitude=0.02, profile=Profile.COS_SIN),
        t_end=20.0,
        diagnostics_every=0.25,
        snapshot_every=5.0,
    )


def _ex2d_mixed(name: str, gamma1: float, gamma2: float, description: str) -> Scenario:
    grid = _grid(2, _N_2D, mixed=True)
    return Scenario(
        name=name,
        description=description,
        model=ModelKind.PDE2D,
        params=_params(grid, gamma0=0.15, gamma1=gamma1, gamma2=gamma2, epsilon=0.0025),
        grid=grid,
        initial=InitialCondition(InitialKind.PERTURBED, r_inf=0.1, b_inf=0.1, amplitude=0.02, profile=Profile.COS_SIN),
        t_end=100.0,
        diagnostics_every=1.0,
        snapshot_every=25.0,
    )


def _particles(name: str, density: float, alpha: float, gamma0: float, description: str) -> Scenario:
    grid = _grid(2, _N_LATTICE)
    return Scenario(
        name=name,
        description=description,
        model=ModelKind.LATTICE,
        params=_params(grid, alpha=alpha, gamma0=gamma0, gamma1=0.2, gamma2=0.1),
        grid=grid,
        initial=InitialCondition(InitialKind.RANDOM, density=density),
        scheduler=Scheduler.RANDOM_SEQUENTIAL,
        steps=500,
        diagnostics_every=10.0,
        snapshot_every=10.0,
    )


def _ex1d(
    name: str,
    r_inf: float,
    b_inf: float,
    amplitude: float,
    profile: Profile,
    t_end: float,
    every: float,
    description: str,
) -> Scenario:
    grid = _grid(1, _N_1D)
    return Scenario(
        name=name,
        description=description,
        model=ModelKind.PDE1D,
        params=_params(grid, gamma0=0.0, gamma1=0.0, gamma2=0.0, epsilon=0.005),
        grid=grid,
        initial=InitialCondition(InitialKind.PERTURBED, r_inf=r_inf, b_inf=b_inf, amplitude=amplitude, profile=profile),
        t_end=t_end,
        diagnostics_every=every,
        snapshot_every=t_end / 10.0,
    )


def _stability_map() -> Scenario:
    grid = _grid(2, _N_2D)
    return Scenario(
        name="stability_map",
        description="Raster of the density simplex: hyperbolic set, region D, largest growth rate.",
        model=ModelKind.STABILITY_MAP,
        params=_params(grid, gamma0=0.0, gamma1=0.0, gamma2=0.0, epsilon=0.005),
        grid=grid,
        resolution=128,
        method=RegionMethod.SCAN,
    )


def _compartment_convergence() -> Scenario:
    grid = _grid(2, 32)
    return Scenario(
        name="compartment_convergence",
        description="Compartment model against a fine-grid parabolic solution over three refinements.",
        model=ModelKind.COMPARTMENT,
        params=_params(grid, alpha=0.5, gamma0=0.2, gamma1=0.15, gamma2=0.1),
        grid=grid,
        initial=InitialCondition(
            InitialKind.PERTURBED, r_inf=0.2, b_inf=0.2, amplitude=0.1, profile=Profile.COS_SIN_PERIODIC
        ),
        t_end=0.5,
        refinements=(16, 32, 64),
        fine_n=128,
    )


PRESETS: dict[str, Scenario] = {
    s.name: s
    for s in (
        _ex2d_periodic(),
        _ex2d_mixed(
            "ex2d_mixed_a",
            gamma1=0.2,
            gamma2=0.1,
            description="Mixed boundaries; side-steps against the other group keep the crossing moving.",
        ),
        _ex2d_mixed(
            "ex2d_mixed_b",
            gamma1=0.1,
            gamma2=0.2,
            description="Same as ex2d_mixed_a with gamma1 and gamma2 swapped; the crossing jams.",
        ),
        _particles(
            "particle_mixed",
            0.2,
            alpha=0.6,
            gamma0=0.15,
            description="Lattice walkers at total density 0.2; stays mixed.",
        ),
        _particles(
            "particle_segregate",
            0.5,
            alpha=0.6,
            gamma0=0.15,
            description="Lattice walkers at total density 0.5; segregates.",
        ),
        _particles(
            "particle_waves",
            0.2,
            alpha=1.0,
            gamma0=0.0,
            description="Lattice walkers without base side-steps; travelling diagonal waves.",
        ),
        _ex1d(
            "ex1d_unstable_sin", 0.3, 0.3, 0.02, Profile.SIN, 100.0, 0.25,
            "1D counterflow at (0.3, 0.3) inside region D; sine perturbation grows.",
        ),
        _ex1d(
            "ex1d_unstable_cos", 0.3, 0.3, 0.01, Profile.COS, 100.0, 0.25,
            "1D counterflow at (0.3, 0.3) inside region D; cosine perturbation grows.",
        ),
        _ex1d(
            "ex1d_stable", 0.85, 0.1, 0.01, Profile.SIN, 1000.0, 2.0,
            "1D counterflow at (0.85, 0.1) outside region D; perturbation decays.",
        ),
        _ex1d(
            "lyapunov_decay", 0.15, 0.15, 0.01, Profile.SIN, 50.0, 0.25,
            "1D run at vacancy 0.7 tracking the relative Lyapunov functional.",
        ),
        _stability_map(),
        _compartment_convergence(),
    )
}


def get_preset(name: str) -> Scenario:
    """Return the preset called ``name``; raises ``KeyError`` for unknown names."""
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"Unknown preset '{name}'. Available: {', '.join(PRESETS)}.") from None


def list_presets() -> list[tuple[str, str]]:
    """Names and one-line descriptions of every preset, in definition order."""
    return [(name, s.description) for name, s in PRESETS.items()]
