"""Transfer formulas, conservation, positivity, and reduction identities."""

import numpy as np
import pytest

from wexsim import (
    ConfigError,
    ExchangeRule,
    RuleKind,
    make_rng,
    propose,
    propose_immediate,
    propose_mixed,
    propose_reshuffle,
    propose_saving,
    propose_unidirectional,
)


class ScriptedRng:
    """Feeds a fixed sequence of uniforms; remember eps = 1 - u."""

    def __init__(self, uniforms):
        self.values = list(uniforms)

    def random(self):
        return self.values.pop(0)


class TestImmediate:
    def test_direct_formula(self):
        # eps_j = 0.3, eps_k = 0.7 -> delta = 0.7*1 - 0.3*1 = 0.4
        rng = ScriptedRng([0.7, 0.3])
        p = propose_immediate(1.0, 1.0, rng)
        assert p.eps_j == pytest.approx(0.3)
        assert p.eps_k == pytest.approx(0.7)
        assert p.delta == pytest.approx(0.4)

    def test_zero_wealth_unit_only_gains(self):
        rng = make_rng(5)
        for _ in range(1000):
            p = propose_immediate(0.0, 1.0, rng)
            assert p.delta > 0.0

    def test_positivity_of_both_posts(self):
        # Both pre-trade wealths positive implies both post-trade wealths
        # strictly positive, across 10^6 random trades.
        rng = make_rng(11)
        x = 10.0 ** rng.uniform(-6, 2, size=(1_000_000, 2))
        eps = 1.0 - rng.random(size=(1_000_000, 2))
        delta = eps[:, 1] * x[:, 1] - eps[:, 0] * x[:, 0]
        post_j = x[:, 0] + delta
        post_k = x[:, 1] - delta
        assert np.all(post_j > 0)
        assert np.all(post_k > 0)
        rng2 = make_rng(12)
        for _ in range(10_000):
            xj, xk = 10.0 ** rng2.uniform(-4, 2, size=2)
            p = propose_immediate(xj, xk, rng2)
            assert xj + p.delta > 0
            assert xk - p.delta > 0


class TestReshuffle:
    def test_direct_formula(self):
        # eps = 0.25: unit j ends at eps*(x_j + x_k) = 0.5
        rng = ScriptedRng([0.75])
        p = propose_reshuffle(1.0, 1.0, rng)
        assert p.eps_j == pytest.approx(0.25)
        assert p.delta == pytest.approx(-0.5)
        assert 1.0 + p.delta == pytest.approx(0.5)
        assert 1.0 - p.delta == pytest.approx(1.5)

    def test_small_eps_strips_unit_j(self):
        rng = ScriptedRng([1.0 - 1e-12])
        p = propose_reshuffle(1.0, 1.0, rng)
        assert 1.0 + p.delta == pytest.approx(0.0, abs=1e-9)


class TestSaving:
    def test_zero_saving_equals_reshuffle_draw_for_draw(self):
        a = propose_saving(0.7, 1.3, 0.0, make_rng(3))
        b = propose_reshuffle(0.7, 1.3, make_rng(3))
        assert a.delta == b.delta

    def test_each_unit_keeps_saved_fraction(self):
        rng = make_rng(4)
        for _ in range(100_000):
            xj, xk = rng.uniform(0.0, 3.0, size=2)
            saving = rng.uniform(0.0, 0.99)
            p = propose_saving(xj, xk, saving, rng)
            assert xj + p.delta >= saving * xj * (1.0 - 1e-12)
            assert xk - p.delta >= saving * xk * (1.0 - 1e-12)

    def test_rejects_bad_saving(self):
        with pytest.raises(ConfigError):
            propose_saving(1.0, 1.0, 1.0, make_rng(0))
        with pytest.raises(ConfigError):
            propose_saving(1.0, 1.0, -0.1, make_rng(0))


class TestUnidirectional:
    def test_exactly_one_unit_loses(self):
        rng = make_rng(6)
        for _ in range(10_000):
            xj, xk = rng.uniform(0.01, 3.0, size=2)
            p = propose_unidirectional(xj, xk, 0.0, 0.5, rng)
            if p.direction == 1:
                assert p.delta <= 0.0
                assert abs(p.delta) <= xj
            else:
                assert p.delta >= 0.0
                assert abs(p.delta) <= xk

    def test_direction_probability(self):
        rng = make_rng(7)
        donors_j = sum(
            propose_unidirectional(1.0, 1.0, 0.0, 0.8, rng).direction for _ in range(100_000)
        )
        assert donors_j / 100_000 == pytest.approx(0.8, abs=0.005)

    def test_transfer_capped_by_unsaved_fraction(self):
        rng = make_rng(8)
        for _ in range(100_000):
            xj, xk = rng.uniform(0.0, 2.0, size=2)
            saving = rng.uniform(0.0, 0.99)
            p = propose_unidirectional(xj, xk, saving, 0.5, rng)
            donor_wealth = xj if p.direction == 1 else xk
            assert abs(p.delta) <= (1.0 - saving) * donor_wealth * (1.0 + 1e-12)
            assert xj + p.delta >= 0.0
            assert xk - p.delta >= 0.0


class TestMixed:
    def test_endpoints_replay_pure_rules(self):
        seed = 99
        a = propose_mixed(0.8, 1.2, 0.0, make_rng(seed))
        b = propose_immediate(0.8, 1.2, make_rng(seed))
        assert (a.delta, a.eps_j, a.eps_k) == (b.delta, b.eps_j, b.eps_k)
        c = propose_mixed(0.8, 1.2, 1.0, make_rng(seed))
        d = propose_unidirectional(0.8, 1.2, 0.0, 0.5, make_rng(seed))
        assert (c.delta, c.direction) == (d.delta, d.direction)

    def test_branch_fraction(self):
        rng = make_rng(10)
        one_way = sum(
            propose_mixed(1.0, 1.0, 0.25, rng).direction is not None for _ in range(100_000)
        )
        assert one_way / 100_000 == pytest.approx(0.25, abs=0.005)

    def test_rejects_bad_probability(self):
        with pytest.raises(ConfigError):
            propose_mixed(1.0, 1.0, 1.5, make_rng(0))


class TestInvariants:
    @pytest.mark.parametrize(
        "rule",
        [
            ExchangeRule.immediate(),
            ExchangeRule.reshuffle(),
            ExchangeRule.saving_model(0.25),
            ExchangeRule.unidirectional(),
            ExchangeRule.unidirectional_saving(0.4),
            ExchangeRule.mixed(0.3),
        ],
        ids=lambda r: r.kind.value,
    )
    def test_pair_total_conserved_to_one_ulp(self, rule):
        rng = make_rng(20)
        for _ in range(100_000):
            xj, xk = 10.0 ** rng.uniform(-3, 2, size=2)
            p = propose(rule, xj, xk, rng)
            total_before = xj + xk
            total_after = (xj + p.delta) + (xk - p.delta)
            assert abs(total_after - total_before) <= np.spacing(total_before)

    @pytest.mark.parametrize(
        "rule",
        [
            ExchangeRule.immediate(),
            ExchangeRule.reshuffle(),
            ExchangeRule.saving_model(0.5),
            ExchangeRule.unidirectional(),
            ExchangeRule.mixed(0.5),
        ],
        ids=lambda r: r.kind.value,
    )
    def test_delta_bounded_by_larger_wealth(self, rule):
        rng = make_rng(21)
        for _ in range(100_000):
            xj, xk = rng.uniform(0.0, 5.0, size=2)
            p = propose(rule, xj, xk, rng)
            assert abs(p.delta) <= max(xj, xk) * (1.0 + 1e-12)

    def test_irrelevant_parameters_do_not_affect_output(self):
        a = ExchangeRule(RuleKind.IMMEDIATE)
        b = ExchangeRule(RuleKind.IMMEDIATE, saving=0.9, uni_prob=0.7, direction_prob=0.1)
        pa = propose(a, 1.0, 2.0, make_rng(33))
        pb = propose(b, 1.0, 2.0, make_rng(33))
        assert pa == pb

    def test_unidirectional_rule_rejects_saving(self):
        with pytest.raises(ConfigError):
            ExchangeRule(RuleKind.UNIDIRECTIONAL, saving=0.2)
