"""Per-unit probabilistic decision whether a proposed trade is carried out.

A trade executes only if both units accept. Symmetric criteria evaluate the
same probability function on the unit's own prospective gain or loss, so the
partner's view is the mirrored one: ``q_k`` is ``q_j`` evaluated at the
negated transfer. Each unit then compares an independent uniform draw against
its probability; the joint acceptance probability is the product.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Union

import numpy as np

from .core import ConfigError

if TYPE_CHECKING:
    from .core import Population
    from .rules import TradeProposal

__all__ = [
    "CriterionKind",
    "AcceptanceCriterion",
    "UniformScales",
    "TwoClassScales",
    "accept_prob_linear",
    "accept_prob_exponential",
    "accept_prob_relative",
    "decide_trade",
    "accept_asymmetric",
    "draw_unit_scales",
]


class CriterionKind(str, enum.Enum):
    """Which acceptance probability function each unit applies.

    ALWAYS
        Every proposal is carried out (probability identically 1).
    LINEAR
        Piecewise-linear in the absolute gain, zero below one scale unit of
        loss measured against the population mean wealth.
    EXPONENTIAL
        Exponential ramp below a shift threshold, certain acceptance above.
    RELATIVE
        Piecewise-linear in the gain relative to the unit's own wealth.
    ASYMMETRIC
        Gains of the richer unit always pass; gains of the poorer unit are
        blocked a fixed fraction of the time.
    HETERO_LINEAR
        The linear criterion with a different scale parameter per unit.
    """

    ALWAYS = "always"
    LINEAR = "linear"
    EXPONENTIAL = "exp"
    RELATIVE = "relative"
    ASYMMETRIC = "asymmetric"
    HETERO_LINEAR = "hetero-linear"


@dataclass(frozen=True)
class UniformScales:
    """Per-unit scales drawn i.i.d. uniform on (low, high); low == high is constant."""

    low: float
    high: float

    def __post_init__(self) -> None:
        if not 0.0 < self.low <= self.high:
            raise ConfigError(
                f"uniform scale interval needs 0 < low <= high, got ({self.low}, {self.high})"
            )

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if n < 1:
            raise ConfigError("need at least one unit to assign scales")
        return rng.uniform(self.low, self.high, size=n)


@dataclass(frozen=True)
class TwoClassScales:
    """A majority class at one fixed scale, the rest i.i.d. uniform.

    ``floor(majority_frac * n)`` units get ``majority_scale``; the remaining
    units draw uniformly from (minority_low, minority_high).
    """

    majority_frac: float
    majority_scale: float
    minority_low: float
    minority_high: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.majority_frac <= 1.0:
            raise ConfigError(f"majority fraction must lie in [0, 1], got {self.majority_frac}")
        if not self.majority_scale > 0:
            raise ConfigError(f"majority scale must be positive, got {self.majority_scale}")
        if not 0.0 < self.minority_low <= self.minority_high:
            raise ConfigError(
                "minority scale interval needs 0 < low <= high, "
                f"got ({self.minority_low}, {self.minority_high})"
            )

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if n < 1:
            raise ConfigError("need at least one unit to assign scales")
        n_major = int(math.floor(self.majority_frac * n))
        out = np.empty(n, dtype=np.float64)
        out[:n_major] = self.majority_scale
        out[n_major:] = rng.uniform(self.minority_low, self.minority_high, size=n - n_major)
        return out


ScaleSpec = Union[UniformScales, TwoClassScales]


def draw_unit_scales(spec: ScaleSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw the per-unit acceptance scale vector for a heterogeneous population."""
    return spec.draw(n, rng)


@dataclass(frozen=True)
class AcceptanceCriterion:
    """Tagged criterion family.

    ``scale`` is the acceptance scale (in units of the mean wealth for the
    absolute criteria, of the unit's own wealth for the relative one),
    ``shift`` the threshold offset of the exponential criterion, and
    ``block_frac`` the fraction of poorer-unit gains vetoed by the
    asymmetric criterion. ``scale_spec`` is set only for the heterogeneous
    kind and is what makes the population carry per-unit scales.
    """

    kind: CriterionKind
    scale: float = 1.0
    shift: float = 0.0
    block_frac: float = 0.0
    scale_spec: ScaleSpec | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.kind, CriterionKind):
            object.__setattr__(self, "kind", CriterionKind(self.kind))
        if self.kind in (CriterionKind.LINEAR, CriterionKind.EXPONENTIAL, CriterionKind.RELATIVE):
            if not self.scale > 0:
                raise ConfigError(f"acceptance scale must be positive, got {self.scale}")
        if not 0.0 <= self.block_frac <= 1.0:
            raise ConfigError(f"blocking fraction must lie in [0, 1], got {self.block_frac}")
        if self.kind is CriterionKind.HETERO_LINEAR:
            if self.scale_spec is None:
                raise ConfigError("the heterogeneous criterion needs a scale spec")
        elif self.scale_spec is not None:
            raise ConfigError("only the heterogeneous criterion takes a scale spec")

    @classmethod
    def always(cls) -> "AcceptanceCriterion":
        return cls(CriterionKind.ALWAYS)

    @classmethod
    def linear(cls, scale: float) -> "AcceptanceCriterion":
        return cls(CriterionKind.LINEAR, scale=scale)

    @classmethod
    def exponential(cls, scale: float, shift: float = 0.0) -> "AcceptanceCriterion":
        return cls(CriterionKind.EXPONENTIAL, scale=scale, shift=shift)

    @classmethod
    def relative(cls, scale: float) -> "AcceptanceCriterion":
        return cls(CriterionKind.RELATIVE, scale=scale)

    @classmethod
    def asymmetric(cls, block_frac: float) -> "AcceptanceCriterion":
        return cls(CriterionKind.ASYMMETRIC, block_frac=block_frac)

    @classmethod
    def heterogeneous(cls, scale_spec: ScaleSpec) -> "AcceptanceCriterion":
        return cls(CriterionKind.HETERO_LINEAR, scale_spec=scale_spec)


# Raw probability formulas, shared verbatim with the jitted engine loop.
# Validation lives in the public wrappers; these assume sane parameters.

def _linear_q(delta: float, span: float) -> float:
    if delta >= 0.0:
        return 1.0
    if delta <= -span:
        return 0.0
    return 1.0 + delta / span


def _exponential_q(delta: float, span: float, shift: float) -> float:
    if delta >= shift:
        return 1.0
    return math.exp((delta - shift) / span)


def _relative_q(delta: float, own_wealth: float, scale: float) -> float:
    # A destitute unit rejects any loss with certainty and accepts any gain.
    if own_wealth == 0.0:
        return 1.0 if delta >= 0.0 else 0.0
    if delta >= 0.0:
        return 1.0
    ratio = delta / own_wealth
    if ratio <= -scale:
        return 0.0
    return 1.0 + ratio / scale


def accept_prob_linear(delta: float, scale: float, mean_wealth: float) -> float:
    """Piecewise-linear acceptance probability in the absolute gain ``delta``.

    Certain above zero, zero below ``-scale * mean_wealth``, linear between.
    """
    if not scale > 0:
        raise ConfigError(f"acceptance scale must be positive, got {scale}")
    if not mean_wealth > 0:
        raise ConfigError(f"mean wealth must be positive, got {mean_wealth}")
    return _linear_q(delta, scale * mean_wealth)


def accept_prob_exponential(delta: float, scale: float, shift: float, mean_wealth: float) -> float:
    """Exponential acceptance probability below ``shift``, certain at or above it."""
    if not scale > 0:
        raise ConfigError(f"acceptance scale must be positive, got {scale}")
    if not mean_wealth > 0:
        raise ConfigError(f"mean wealth must be positive, got {mean_wealth}")
    return _exponential_q(delta, scale * mean_wealth, shift)


def accept_prob_relative(delta: float, own_wealth: float, scale: float) -> float:
    """Linear acceptance probability in the gain relative to the unit's own wealth."""
    if not scale > 0:
        raise ConfigError(f"acceptance scale must be positive, got {scale}")
    if own_wealth < 0:
        raise ConfigError(f"own wealth must be non-negative, got {own_wealth}")
    return _relative_q(delta, own_wealth, scale)


def accept_asymmetric(
    proposal: "TradeProposal",
    population: "Population",
    block_frac: float,
    rng: np.random.Generator,
) -> bool:
    """Richer-unit gains always pass; poorer-unit gains are vetoed a fraction of times.

    A zero transfer is always accepted, and wealth ties count as richer-gains,
    so the veto draw happens only when the strictly poorer unit would profit.
    """
    if not 0.0 <= block_frac <= 1.0:
        raise ConfigError(f"blocking fraction must lie in [0, 1], got {block_frac}")
    delta = proposal.delta
    if delta == 0.0:
        return True
    if delta > 0.0:
        gainer, loser = proposal.j, proposal.k
    else:
        gainer, loser = proposal.k, proposal.j
    wealth = population.wealth
    if wealth[gainer] >= wealth[loser]:
        return True
    return bool(rng.random() >= block_frac)


def decide_trade(
    proposal: "TradeProposal",
    population: "Population",
    criterion: AcceptanceCriterion,
    rng: np.random.Generator,
) -> bool:
    """Joint decision of both units on one proposal.

    Symmetric criteria always consume exactly two uniforms (one per unit,
    drawn j first), so the random stream advances identically whatever the
    probabilities are. The mean-wealth reference is the conserved initial
    mean cached on the population.
    """
    kind = criterion.kind
    if kind is CriterionKind.ALWAYS:
        return True
    if kind is CriterionKind.ASYMMETRIC:
        return accept_asymmetric(proposal, population, criterion.block_frac, rng)

    delta = proposal.delta
    mean = population.mean_wealth
    if kind is CriterionKind.LINEAR:
        span = criterion.scale * mean
        q_j = _linear_q(delta, span)
        q_k = _linear_q(-delta, span)
    elif kind is CriterionKind.EXPONENTIAL:
        span = criterion.scale * mean
        q_j = _exponential_q(delta, span, criterion.shift)
        q_k = _exponential_q(-delta, span, criterion.shift)
    elif kind is CriterionKind.RELATIVE:
        q_j = _relative_q(delta, float(population.wealth[proposal.j]), criterion.scale)
        q_k = _relative_q(-delta, float(population.wealth[proposal.k]), criterion.scale)
    elif kind is CriterionKind.HETERO_LINEAR:
        if population.scales is None:
            raise ConfigError("heterogeneous criterion needs per-unit scales on the population")
        q_j = _linear_q(delta, float(population.scales[proposal.j]) * mean)
        q_k = _linear_q(-delta, float(population.scales[proposal.k]) * mean)
    else:
        raise ConfigError(f"unknown acceptance criterion kind: {criterion.kind!r}")

    u_j = rng.random()
    u_k = rng.random()
    return bool(u_j < q_j and u_k < q_k)
