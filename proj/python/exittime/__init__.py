"""Expected exit times of time-periodic SDEs."""

from ._core import (
    ExitDomain,
    ExitStatistics,
    ExitTimeError,
    McConfig,
    PeriodicSde1D,
    SolverOptions,
    SpaceTimeGrid,
    SweepResult,
    __version__,
    brownian_periodic_drift,
    duffing,
    estimate_expected_exit_curve,
    make_grid,
    make_sde,
    moment_bounds,
    periodic_ou,
    run,
    solve_expected_duration,
    survival_duration,
    sweep_sigma,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
