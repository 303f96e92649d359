"""Monte Carlo simulation of conservative kinetic wealth-exchange models.

Randomly paired units exchange wealth under a configurable transfer rule
(immediate two-way exchange, random re-split of the pair total, saving
variants, one-way flows, or a probabilistic mix) and a configurable
acceptance criterion through which each unit decides, from its own
prospective gain or loss, whether the trade happens at all. The statistics
layer fits the equilibrium distributions with the one-parameter gamma
family, estimates Pareto tail indices, and carries the closed-form shape
predictions the simulations are checked against.
"""

from .acceptance import (
    AcceptanceCriterion,
    CriterionKind,
    TwoClassScales,
    UniformScales,
    accept_asymmetric,
    accept_prob_exponential,
    accept_prob_linear,
    accept_prob_relative,
    decide_trade,
    draw_unit_scales,
)
from .core import (
    ConfigError,
    Population,
    SimConfig,
    draw_eps,
    draw_pair,
    init_population,
    make_rng,
)
from .engine import (
    EnsembleResult,
    EquilibrationReport,
    GrowthRunResult,
    RunResult,
    detect_equilibration,
    run,
    run_ensemble,
    run_production_consumption,
)
from .rules import (
    ExchangeRule,
    RuleKind,
    TradeProposal,
    propose,
    propose_immediate,
    propose_mixed,
    propose_reshuffle,
    propose_saving,
    propose_unidirectional,
)
from .stats import (
    FitError,
    FitReport,
    Histogram,
    TailFit,
    density_mode,
    fit_gamma,
    fit_pareto_tail,
    gamma_cdf,
    gamma_pdf,
    ks_gamma,
    ks_two_sample,
    linear_histogram,
    log_histogram,
    moment_alpha,
    theory_alpha_mixed,
    theory_alpha_saving,
    theory_alpha_unidirectional,
    theory_saving_eff,
    theory_saving_from_alpha,
)

__version__ = "0.1.0"

__all__ = [
    "AcceptanceCriterion",
    "ConfigError",
    "CriterionKind",
    "EnsembleResult",
    "EquilibrationReport",
    "ExchangeRule",
    "FitError",
    "FitReport",
    "GrowthRunResult",
    "Histogram",
    "Population",
    "RuleKind",
    "RunResult",
    "SimConfig",
    "TailFit",
    "TradeProposal",
    "TwoClassScales",
    "UniformScales",
    "accept_asymmetric",
    "accept_prob_exponential",
    "accept_prob_linear",
    "accept_prob_relative",
    "decide_trade",
    "density_mode",
    "detect_equilibration",
    "draw_eps",
    "draw_pair",
    "draw_unit_scales",
    "fit_gamma",
    "fit_pareto_tail",
    "gamma_cdf",
    "gamma_pdf",
    "init_population",
    "ks_gamma",
    "ks_two_sample",
    "linear_histogram",
    "log_histogram",
    "make_rng",
    "moment_alpha",
    "propose",
    "propose_immediate",
    "propose_mixed",
    "propose_reshuffle",
    "propose_saving",
    "propose_unidirectional",
    "run",
    "run_ensemble",
    "run_production_consumption",
    "theory_alpha_mixed",
    "theory_alpha_saving",
    "theory_alpha_unidirectional",
    "theory_saving_eff",
    "theory_saving_from_alpha",
]
