"""Proposed wealth transfers for every exchange model.

Each ``propose_*`` function draws its own random fractions from the caller's
stream and returns the signed transfer ``delta`` seen from unit j: the trade,
if accepted, commits ``wealth[j] += delta`` and ``wealth[k] -= delta``, so the
pair total is conserved by construction.

Draw order is part of the reproducibility contract: the one-way rules draw
the direction before the fraction, and the mixed rule draws its branch
selector before delegating (skipping the selector entirely at the exact
endpoints, so a mixed run at probability 0 or 1 replays the pure rule
bit for bit under a shared seed).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import ConfigError, draw_eps

__all__ = [
    "RuleKind",
    "ExchangeRule",
    "TradeProposal",
    "propose",
    "propose_immediate",
    "propose_reshuffle",
    "propose_saving",
    "propose_unidirectional",
    "propose_mixed",
]


class RuleKind(str, enum.Enum):
    """Which transfer formula generates trade proposals.

    IMMEDIATE
        Both units simultaneously give away an independent random fraction of
        their own wealth.
    RESHUFFLE
        The pair's combined wealth is randomly re-split in one step.
    SAVING
        Reshuffle of the combined wealth after each unit puts a fixed
        fraction aside.
    UNIDIRECTIONAL
        A random fraction of one unit's wealth flows to the other; the donor
        is chosen probabilistically.
    UNIDIRECTIONAL_SAVING
        One-way flow capped so the donor keeps at least its saved fraction.
    MIXED
        Each trade is one-way with a given probability, immediate otherwise.
    """

    IMMEDIATE = "immediate"
    RESHUFFLE = "dy"
    SAVING = "cc"
    UNIDIRECTIONAL = "angle"
    UNIDIRECTIONAL_SAVING = "angle-saving"
    MIXED = "mixed"


@dataclass(frozen=True)
class ExchangeRule:
    """Tagged rule family; parameters not used by ``kind`` never affect output.

    ``saving`` is the wealth fraction withheld from every trade, ``uni_prob``
    the probability that a mixed trade is one-way, and ``direction_prob`` the
    probability that unit j is the donor in a one-way trade.
    """

    kind: RuleKind
    saving: float = 0.0
    uni_prob: float = 0.0
    direction_prob: float = 0.5

    def __post_init__(self) -> None:
        if not isinstance(self.kind, RuleKind):
            object.__setattr__(self, "kind", RuleKind(self.kind))
        if not 0.0 <= self.saving < 1.0:
            raise ConfigError(f"saving propensity must lie in [0, 1), got {self.saving}")
        if not 0.0 <= self.uni_prob <= 1.0:
            raise ConfigError(f"one-way trade probability must lie in [0, 1], got {self.uni_prob}")
        if not 0.0 <= self.direction_prob <= 1.0:
            raise ConfigError(f"direction probability must lie in [0, 1], got {self.direction_prob}")
        if self.kind is RuleKind.UNIDIRECTIONAL and self.saving != 0.0:
            raise ConfigError("the plain one-way rule has no saving; use the saving variant")

    @classmethod
    def immediate(cls) -> "ExchangeRule":
        return cls(RuleKind.IMMEDIATE)

    @classmethod
    def reshuffle(cls) -> "ExchangeRule":
        return cls(RuleKind.RESHUFFLE)

    @classmethod
    def saving_model(cls, saving: float) -> "ExchangeRule":
        return cls(RuleKind.SAVING, saving=saving)

    @classmethod
    def unidirectional(cls, direction_prob: float = 0.5) -> "ExchangeRule":
        return cls(RuleKind.UNIDIRECTIONAL, direction_prob=direction_prob)

    @classmethod
    def unidirectional_saving(cls, saving: float, direction_prob: float = 0.5) -> "ExchangeRule":
        return cls(RuleKind.UNIDIRECTIONAL_SAVING, saving=saving, direction_prob=direction_prob)

    @classmethod
    def mixed(cls, uni_prob: float) -> "ExchangeRule":
        return cls(RuleKind.MIXED, uni_prob=uni_prob)


@dataclass(frozen=True)
class TradeProposal:
    """One proposed trade before the acceptance decision.

    ``delta`` is the wealth change of unit j (unit k gets ``-delta``).
    ``direction`` is set only by the one-way rules: 1 means unit j is the
    donor, 0 means unit k is.
    """

    j: int
    k: int
    delta: float
    eps_j: float
    eps_k: float
    direction: int | None = None


def propose_immediate(
    x_j: float, x_k: float, rng: np.random.Generator, j: int = 0, k: int = 1
) -> TradeProposal:
    """Both units give a random fraction of their own wealth at once.

    With both pre-trade wealths positive, both post-trade wealths stay
    strictly positive: whoever gives everything still receives a non-zero
    fraction from the partner.
    """
    eps_j = draw_eps(rng)
    eps_k = draw_eps(rng)
    delta = eps_k * x_k - eps_j * x_j
    return TradeProposal(j=j, k=k, delta=delta, eps_j=eps_j, eps_k=eps_k)


def propose_reshuffle(
    x_j: float, x_k: float, rng: np.random.Generator, j: int = 0, k: int = 1
) -> TradeProposal:
    """Randomly re-split the pair total: unit j ends up with a random share."""
    eps = draw_eps(rng)
    delta = eps * x_k - (1.0 - eps) * x_j
    return TradeProposal(j=j, k=k, delta=delta, eps_j=eps, eps_k=eps)


def propose_saving(
    x_j: float,
    x_k: float,
    saving: float,
    rng: np.random.Generator,
    j: int = 0,
    k: int = 1,
) -> TradeProposal:
    """Re-split only the non-saved part; each unit keeps at least its saved share.

    Unit j ends at ``saving*x_j + eps*(1-saving)*(x_j+x_k)``, so the transfer
    is the reshuffle delta scaled by ``(1-saving)``. At saving=0 this is the
    plain reshuffle, draw for draw.
    """
    if not 0.0 <= saving < 1.0:
        raise ConfigError(f"saving propensity must lie in [0, 1), got {saving}")
    eps = draw_eps(rng)
    delta = (1.0 - saving) * (eps * x_k - (1.0 - eps) * x_j)
    return TradeProposal(j=j, k=k, delta=delta, eps_j=eps, eps_k=eps)


def propose_unidirectional(
    x_j: float,
    x_k: float,
    saving: float,
    direction_prob: float,
    rng: np.random.Generator,
    j: int = 0,
    k: int = 1,
) -> TradeProposal:
    """One-way flow: the donor loses a random fraction of its own wealth.

    The transferred amount is a fraction of the donor's stock, never more
    than ``(1-saving)`` of it, so no wealth can go negative. The direction
    draw happens before the fraction draw.
    """
    if not 0.0 <= saving < 1.0:
        raise ConfigError(f"saving propensity must lie in [0, 1), got {saving}")
    if not 0.0 <= direction_prob <= 1.0:
        raise ConfigError(f"direction probability must lie in [0, 1], got {direction_prob}")
    direction = 1 if rng.random() < direction_prob else 0
    eps = draw_eps(rng)
    if direction == 1:
        delta = -eps * (1.0 - saving) * x_j
    else:
        delta = eps * (1.0 - saving) * x_k
    return TradeProposal(j=j, k=k, delta=delta, eps_j=eps, eps_k=eps, direction=direction)


def propose_mixed(
    x_j: float,
    x_k: float,
    uni_prob: float,
    rng: np.random.Generator,
    j: int = 0,
    k: int = 1,
) -> TradeProposal:
    """One-way trade with probability ``uni_prob``, immediate exchange otherwise."""
    if not 0.0 <= uni_prob <= 1.0:
        raise ConfigError(f"one-way trade probability must lie in [0, 1], got {uni_prob}")
    if uni_prob <= 0.0:
        one_way = False
    elif uni_prob >= 1.0:
        one_way = True
    else:
        one_way = rng.random() < uni_prob
    if one_way:
        return propose_unidirectional(x_j, x_k, 0.0, 0.5, rng, j=j, k=k)
    return propose_immediate(x_j, x_k, rng, j=j, k=k)


def propose(
    rule: ExchangeRule,
    x_j: float,
    x_k: float,
    rng: np.random.Generator,
    j: int = 0,
    k: int = 1,
) -> TradeProposal:
    """Dispatch to the proposal function selected by ``rule.kind``."""
    kind = rule.kind
    if kind is RuleKind.IMMEDIATE:
        return propose_immediate(x_j, x_k, rng, j=j, k=k)
    if kind is RuleKind.RESHUFFLE:
        return propose_reshuffle(x_j, x_k, rng, j=j, k=k)
    if kind is RuleKind.SAVING:
        return propose_saving(x_j, x_k, rule.saving, rng, j=j, k=k)
    if kind is RuleKind.UNIDIRECTIONAL or kind is RuleKind.UNIDIRECTIONAL_SAVING:
        return propose_unidirectional(x_j, x_k, rule.saving, rule.direction_prob, rng, j=j, k=k)
    if kind is RuleKind.MIXED:
        return propose_mixed(x_j, x_k, rule.uni_prob, rng, j=j, k=k)
    raise ConfigError(f"unknown exchange rule kind: {rule.kind!r}")
