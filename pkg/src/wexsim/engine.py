"""Run the Monte Carlo dynamics to equilibrium and record wealth snapshots.

A run is a strictly sequential chain of attempted trades: draw a pair, build
a proposal with the configured rule, let both units decide, commit on
acceptance. Replaying a config (same seed) reproduces the wealth vector bit
for bit. Post-equilibration snapshots of the whole wealth vector are the raw
material for every fit; ``RunResult.samples`` pools them.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from . import _kernel
from .acceptance import AcceptanceCriterion, CriterionKind
from .core import ConfigError, Population, SimConfig, init_population, make_rng
from .rules import ExchangeRule, RuleKind
from .stats import FitReport, Histogram, fit_gamma, linear_histogram

__all__ = [
    "RunResult",
    "GrowthRunResult",
    "EnsembleResult",
    "EquilibrationReport",
    "run",
    "run_ensemble",
    "run_production_consumption",
    "detect_equilibration",
]

#: Relative conservation tolerance enforced on every conservative run.
CONSERVATION_TOL = 1e-9

_RULE_CODES = {
    RuleKind.IMMEDIATE: _kernel.RULE_IMMEDIATE,
    RuleKind.RESHUFFLE: _kernel.RULE_RESHUFFLE,
    RuleKind.SAVING: _kernel.RULE_SAVING,
    RuleKind.UNIDIRECTIONAL: _kernel.RULE_UNIDIRECTIONAL,
    RuleKind.UNIDIRECTIONAL_SAVING: _kernel.RULE_UNIDIRECTIONAL,
    RuleKind.MIXED: _kernel.RULE_MIXED,
}

_CRIT_CODES = {
    CriterionKind.ALWAYS: _kernel.CRIT_ALWAYS,
    CriterionKind.LINEAR: _kernel.CRIT_LINEAR,
    CriterionKind.EXPONENTIAL: _kernel.CRIT_EXPONENTIAL,
    CriterionKind.RELATIVE: _kernel.CRIT_RELATIVE,
    CriterionKind.ASYMMETRIC: _kernel.CRIT_ASYMMETRIC,
    CriterionKind.HETERO_LINEAR: _kernel.CRIT_HETERO_LINEAR,
}


@dataclass
class RunResult:
    """Final state plus the recorded snapshot trail of one run."""

    config: SimConfig
    final_wealth: np.ndarray
    snapshot_sweeps: np.ndarray
    snapshot_wealth: np.ndarray
    trades_attempted: int
    trades_accepted: int
    conservation_drift: float

    @property
    def n_snapshots(self) -> int:
        return int(self.snapshot_wealth.shape[0])

    @property
    def samples(self) -> np.ndarray:
        """All post-equilibration snapshot wealths pooled into one vector."""
        return self.snapshot_wealth.reshape(-1)

    @property
    def acceptance_rate(self) -> float:
        if self.trades_attempted == 0:
            return math.nan
        return self.trades_accepted / self.trades_attempted

    @property
    def snapshots(self) -> list[tuple[int, Histogram]]:
        """(sweep index, histogram) pairs with a default linear binning."""
        mean = self.config.mean_wealth
        return [
            (int(s), linear_histogram(w, lo=0.0, hi=10.0 * mean, n_bins=200))
            for s, w in zip(self.snapshot_sweeps, self.snapshot_wealth)
        ]


@dataclass
class GrowthRunResult:
    """Paired outcome of a run with production and consumption.

    ``rescaled`` is the run expressed in the growth-discounted variables
    ``X = x * exp(-(p - c) * t)``, which evolve like the conserved model;
    ``raw_final_wealth`` keeps the undiscounted wealths.
    """

    rescaled: RunResult
    raw_final_wealth: np.ndarray
    net_rate: float
    total_growth: float


@dataclass
class EnsembleResult:
    """Independent replicas of one config, pooled for variance reduction."""

    results: list[RunResult]
    fits: list[FitReport]
    pooled_fit: FitReport
    histogram: Histogram

    @property
    def pooled_samples(self) -> np.ndarray:
        return np.concatenate([r.samples for r in self.results])

    @property
    def alpha_values(self) -> np.ndarray:
        return np.array([f.alpha_hat for f in self.fits])


@dataclass
class EquilibrationReport:
    """Outcome of the snapshot-stability scan."""

    sweep_index: int
    snapshot_index: int | None
    converged: bool


def _encode_rule(rule: ExchangeRule) -> tuple[int, float, float, float]:
    code = _RULE_CODES[rule.kind]
    if rule.kind is RuleKind.MIXED:
        # The one-way branch of a mixed trade is the plain symmetric one.
        return code, 0.0, rule.uni_prob, 0.5
    return code, rule.saving, rule.uni_prob, rule.direction_prob


def _encode_criterion(criterion: AcceptanceCriterion) -> tuple[int, float, float, float]:
    return _CRIT_CODES[criterion.kind], criterion.scale, criterion.shift, criterion.block_frac


def _snapshot_sweeps(config: SimConfig) -> np.ndarray:
    first = config.equilibration_sweeps + config.snapshot_interval
    return np.arange(first, config.n_sweeps + 1, config.snapshot_interval, dtype=np.int64)


def _execute(
    config: SimConfig,
    population: Population,
    rng: np.random.Generator,
    growth: float,
) -> tuple[np.ndarray, np.ndarray, int, int]:
    snap_sweeps = _snapshot_sweeps(config)
    snap_out = np.empty((snap_sweeps.size, population.size), dtype=np.float64)
    scales = population.scales if population.scales is not None else np.empty(0, dtype=np.float64)
    rule_code, saving, uni_prob, dir_prob = _encode_rule(config.rule)
    crit_code, crit_scale, crit_shift, crit_block = _encode_criterion(config.criterion)

    attempted, accepted, sweeps_done, n_snaps, status = _kernel.simulate(
        population.wealth,
        scales,
        population.mean_wealth,
        rule_code,
        saving,
        uni_prob,
        dir_prob,
        crit_code,
        crit_scale,
        crit_shift,
        crit_block,
        config.n_sweeps,
        snap_sweeps,
        snap_out,
        growth,
        rng,
    )
    if status == _kernel.STATUS_NONFINITE:
        raise RuntimeError(
            f"non-finite wealth encountered during sweep {sweeps_done} "
            f"(rule={config.rule.kind.value}, criterion={config.criterion.kind.value}, "
            f"seed={config.seed})"
        )
    return snap_sweeps[:n_snaps], snap_out[:n_snaps], attempted, accepted


def run(config: SimConfig, initial_wealth: np.ndarray | None = None) -> RunResult:
    """Execute one conservative run.

    ``initial_wealth`` overrides the uniform initial condition (useful to
    start from a pre-equilibrated state); conservation is then checked
    against the supplied vector's total.
    """
    rng = make_rng(config.seed)
    population = init_population(config, rng)
    if initial_wealth is not None:
        wealth = np.array(initial_wealth, dtype=np.float64)
        if wealth.shape != (config.n_units,):
            raise ConfigError(
                f"initial wealth must have shape ({config.n_units},), got {wealth.shape}"
            )
        population = Population(wealth=wealth, scales=population.scales)

    snap_sweeps, snap_wealth, attempted, accepted = _execute(config, population, rng, growth=1.0)
    drift = population.conservation_drift()
    if drift > CONSERVATION_TOL:
        raise RuntimeError(f"conservation drift {drift:.3e} exceeds {CONSERVATION_TOL:.0e}")
    return RunResult(
        config=config,
        final_wealth=population.wealth,
        snapshot_sweeps=snap_sweeps,
        snapshot_wealth=snap_wealth,
        trades_attempted=attempted,
        trades_accepted=accepted,
        conservation_drift=drift,
    )


def run_ensemble(
    config: SimConfig,
    n_replicas: int,
    fit_range: tuple[float, float] | None = None,
) -> EnsembleResult:
    """Run replicas at seeds seed+0 .. seed+n_replicas-1 and pool their samples."""
    if n_replicas < 1:
        raise ConfigError(f"need at least one replica, got {n_replicas}")
    results = []
    for i in range(n_replicas):
        seed = (config.seed + i) % 2**64
        results.append(run(dataclasses.replace(config, seed=seed)))
    pooled = np.concatenate([r.samples for r in results])
    fits = [fit_gamma(r.samples, fit_range) for r in results]
    pooled_fit = fit_gamma(pooled, fit_range)
    histogram = linear_histogram(pooled, lo=0.0, hi=10.0 * config.mean_wealth, n_bins=200)
    return EnsembleResult(results=results, fits=fits, pooled_fit=pooled_fit, histogram=histogram)


def run_production_consumption(
    config: SimConfig,
    production_rate: float,
    consumption_rate: float,
) -> GrowthRunResult:
    """Run with homogeneous production and consumption compounded once per sweep.

    Every wealth is multiplied by ``exp(p - c)`` after each sweep, and the
    reference scale of the absolute acceptance criteria compounds along, so
    the growth-discounted variables follow exactly the conserved model driven
    by the same random stream. With ``p == c`` the output is bit-identical to
    the plain run.
    """
    if production_rate < 0 or consumption_rate < 0:
        raise ConfigError("production and consumption rates must be non-negative")
    net = production_rate - consumption_rate
    if abs(net) * config.n_sweeps > 600.0:
        raise ConfigError(
            f"|p - c| * n_sweeps = {abs(net) * config.n_sweeps:.1f} would overflow "
            "the floating range"
        )
    growth = math.exp(net)

    rng = make_rng(config.seed)
    population = init_population(config, rng)
    total_initial = population.total_wealth_initial
    snap_sweeps, snap_wealth, attempted, accepted = _execute(config, population, rng, growth)

    raw_final = population.wealth.copy()
    discount = np.exp(-net * snap_sweeps.astype(np.float64))
    rescaled_snapshots = snap_wealth * discount[:, None]
    rescaled_final = raw_final * math.exp(-net * config.n_sweeps)

    drift = abs(float(rescaled_final.sum()) - total_initial) / total_initial
    if drift > CONSERVATION_TOL:
        raise RuntimeError(
            f"rescaled conservation drift {drift:.3e} exceeds {CONSERVATION_TOL:.0e}"
        )
    rescaled = RunResult(
        config=config,
        final_wealth=rescaled_final,
        snapshot_sweeps=snap_sweeps,
        snapshot_wealth=rescaled_snapshots,
        trades_attempted=attempted,
        trades_accepted=accepted,
        conservation_drift=drift,
    )
    return GrowthRunResult(
        rescaled=rescaled,
        raw_final_wealth=raw_final,
        net_rate=net,
        total_growth=math.exp(net * config.n_sweeps),
    )


def _suffix_moment_alpha(snapshot_wealth: np.ndarray) -> np.ndarray:
    """Moment shape estimate over the snapshot suffix starting at each index."""
    sums = snapshot_wealth.sum(axis=1)
    sqs = (snapshot_wealth * snapshot_wealth).sum(axis=1)
    n_per = snapshot_wealth.shape[1]
    suffix_sum = np.cumsum(sums[::-1])[::-1]
    suffix_sq = np.cumsum(sqs[::-1])[::-1]
    counts = n_per * np.arange(snapshot_wealth.shape[0], 0, -1)
    mean = suffix_sum / counts
    var = suffix_sq / counts - mean * mean
    out = np.full(mean.shape, math.inf)
    ok = var > 0
    out[ok] = mean[ok] * mean[ok] / var[ok]
    return out


def detect_equilibration(
    result: RunResult, window: int = 10, rel_tol: float = 0.01
) -> EquilibrationReport:
    """Scan snapshots for the point where the running shape estimate settles.

    The running estimate at index i pools every snapshot from i onward; the
    first index whose estimate moves by less than ``rel_tol`` relative when
    the start advances by ``window`` snapshots is reported. When no index
    qualifies the configured equilibration budget is returned and the report
    is flagged as not converged. Thresholds are heuristics, exposed as
    parameters.
    """
    n_snap = result.snapshot_wealth.shape[0]
    if n_snap < 2:
        raise ConfigError(f"need at least two snapshots, got {n_snap}")
    window = min(window, n_snap - 1)
    running = _suffix_moment_alpha(result.snapshot_wealth)
    for i in range(n_snap - window):
        a, b = running[i], running[i + window]
        if a == b:
            change = 0.0
        elif not (math.isfinite(a) and math.isfinite(b)) or a == 0:
            change = math.inf
        else:
            change = abs(b - a) / abs(a)
        if change < rel_tol:
            return EquilibrationReport(
                sweep_index=int(result.snapshot_sweeps[i]), snapshot_index=i, converged=True
            )
    return EquilibrationReport(
        sweep_index=result.config.equilibration_sweeps, snapshot_index=None, converged=False
    )
