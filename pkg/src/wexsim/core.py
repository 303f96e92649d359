"""Shared state, configuration, and randomness contract for wealth-exchange runs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .acceptance import AcceptanceCriterion
    from .rules import ExchangeRule

__all__ = [
    "ConfigError",
    "Population",
    "SimConfig",
    "make_rng",
    "draw_eps",
    "draw_pair",
    "init_population",
]


class ConfigError(ValueError):
    """A configuration value is outside its admissible range."""


def make_rng(seed: int) -> np.random.Generator:
    """Deterministic PCG64 stream: same seed and call sequence, same draws."""
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ConfigError(f"seed must fit in an unsigned 64-bit integer, got {seed}")
    return np.random.default_rng(seed)


def draw_eps(rng: np.random.Generator) -> float:
    # Uniform on (0, 1]: a fraction of exactly zero would allow a null flow,
    # which the immediate-exchange dynamics must exclude.
    return 1.0 - rng.random()


def draw_pair(rng: np.random.Generator, n: int) -> tuple[int, int]:
    """Draw an ordered pair of distinct unit indices, uniform over ordered pairs."""
    if n < 2:
        raise ConfigError(f"need at least 2 units to draw a trading pair, got {n}")
    j = int(rng.integers(0, n))
    k = int(rng.integers(0, n - 1))
    if k >= j:
        k += 1
    return j, k


@dataclass
class Population:
    """Per-unit wealths, plus per-unit acceptance scales for heterogeneous runs.

    ``total_wealth_initial`` is the conserved quantity every exchange rule must
    preserve; the mean wealth derived from it is a constant of motion and is
    what the absolute acceptance criteria use as their reference scale.
    """

    wealth: np.ndarray
    scales: np.ndarray | None = None
    total_wealth_initial: float = 0.0

    def __post_init__(self) -> None:
        self.wealth = np.asarray(self.wealth, dtype=np.float64)
        if self.wealth.ndim != 1 or self.wealth.size < 2:
            raise ConfigError("population needs a 1-d wealth vector of length >= 2")
        if np.any(self.wealth < 0) or not np.all(np.isfinite(self.wealth)):
            raise ConfigError("wealth entries must be finite and non-negative")
        if self.scales is not None:
            self.scales = np.asarray(self.scales, dtype=np.float64)
            if self.scales.shape != self.wealth.shape:
                raise ConfigError("per-unit scales must match the wealth vector in length")
            if np.any(self.scales <= 0):
                raise ConfigError("per-unit acceptance scales must be positive")
        if not self.total_wealth_initial:
            self.total_wealth_initial = float(self.wealth.sum())

    @property
    def size(self) -> int:
        return int(self.wealth.size)

    @property
    def mean_wealth(self) -> float:
        return self.total_wealth_initial / self.wealth.size

    def conservation_drift(self) -> float:
        """Relative drift of the current total wealth from the initial total."""
        total = float(self.wealth.sum())
        return abs(total - self.total_wealth_initial) / self.total_wealth_initial


@dataclass
class SimConfig:
    """Everything needed to reproduce one run.

    One sweep is ``n_units`` attempted trades, whether accepted or not, so the
    time unit is homogeneous across acceptance criteria. Snapshots of the
    wealth vector are recorded every ``snapshot_interval`` sweeps once the
    equilibration stretch has been discarded.
    """

    n_units: int
    n_sweeps: int
    rule: "ExchangeRule"
    criterion: "AcceptanceCriterion"
    seed: int = 0
    equilibration_sweeps: int = 0
    mean_wealth: float = 1.0
    snapshot_interval: int = 10

    def __post_init__(self) -> None:
        if self.n_units < 2:
            raise ConfigError(f"n_units must be at least 2, got {self.n_units}")
        if self.equilibration_sweeps < 0:
            raise ConfigError("equilibration_sweeps must be non-negative")
        if self.n_sweeps <= self.equilibration_sweeps:
            raise ConfigError(
                f"n_sweeps ({self.n_sweeps}) must exceed equilibration_sweeps "
                f"({self.equilibration_sweeps})"
            )
        if not self.mean_wealth > 0:
            raise ConfigError(f"mean_wealth must be positive, got {self.mean_wealth}")
        if self.snapshot_interval < 1:
            raise ConfigError("snapshot_interval must be a positive integer")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError(f"seed must fit in an unsigned 64-bit integer, got {self.seed}")


def init_population(config: SimConfig, rng: np.random.Generator | None = None) -> Population:
    """Uniform initial condition: every unit starts at the mean wealth.

    Per-unit acceptance scales are drawn only when the criterion carries a
    heterogeneity spec; the draws consume the run's random stream so a full
    run replays deterministically from the seed alone.
    """
    if rng is None:
        rng = make_rng(config.seed)
    wealth = np.full(config.n_units, float(config.mean_wealth), dtype=np.float64)
    spec = getattr(config.criterion, "scale_spec", None)
    scales = spec.draw(config.n_units, rng) if spec is not None else None
    return Population(
        wealth=wealth,
        scales=scales,
        total_wealth_initial=config.n_units * float(config.mean_wealth),
    )
