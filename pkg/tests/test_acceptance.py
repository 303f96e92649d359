"""Acceptance gate: one test per criterion, each at its stated tolerance.

Every test prints one PASS/FAIL line (run with ``pytest -v -s`` to see them
live). Desk scale is 10^3 units, 10^4 sweeps with the first 10^3 discarded,
4 replicas; runs under strict (slowly relaxing) criteria and the two-class
heterogeneous preset use longer documented budgets, since only relaxation
time, not the equilibrium shape, depends on the acceptance-rate slowdown.

Statistical checks that must PASS use modest, effectively independent sample
sets (final states, one per unit); checks that must REJECT use the pooled
snapshot trail for power.
"""

import math

import numpy as np
import pytest
from scipy import integrate

from wexsim import (
    AcceptanceCriterion,
    ExchangeRule,
    SimConfig,
    accept_prob_exponential,
    accept_prob_linear,
    accept_prob_relative,
    fit_gamma,
    gamma_cdf,
    gamma_pdf,
    ks_gamma,
    ks_two_sample,
    linear_histogram,
    log_histogram,
    make_rng,
    run,
    run_ensemble,
    run_production_consumption,
    theory_alpha_mixed,
    theory_alpha_saving,
    theory_alpha_unidirectional,
    theory_saving_eff,
    theory_saving_from_alpha,
)
from wexsim.presets import (
    PresetOptions,
    run_fig3,
    run_fig4,
    run_fig5,
    run_fig6,
    run_hetero_uniform,
)

DESK_N = 1000
DESK_SWEEPS = 10_000
DESK_EQUIL = 1000
DESK_REPLICAS = 4


def _report(criterion: str, passed: bool, detail: str) -> None:
    print(f"{'PASS' if passed else 'FAIL'}  {criterion}: {detail}")
    assert passed, f"{criterion}: {detail}"


def _config(rule, criterion=None, seed=0, n=DESK_N, sweeps=DESK_SWEEPS, equil=DESK_EQUIL):
    return SimConfig(
        n_units=n,
        n_sweeps=sweeps,
        rule=rule,
        criterion=criterion or AcceptanceCriterion.always(),
        seed=seed,
        equilibration_sweeps=equil,
    )


def test_criterion_01_immediate_exchange_equilibrium():
    ens = run_ensemble(_config(ExchangeRule.immediate(), seed=1010), DESK_REPLICAS)
    pooled = ens.pooled_samples
    fit = ens.pooled_fit
    hist = linear_histogram(pooled, lo=0.0, hi=10.0, n_bins=1000)
    first_bin = hist.density[0]
    peak = hist.density.max()
    from wexsim import density_mode

    mode = density_mode(pooled, bin_width=0.02, hi=3.0)
    ok = (
        abs(fit.alpha_hat - 2.0) <= 0.1
        and first_bin < 0.05 * peak
        and abs(mode - 0.5) <= 0.05
    )
    _report(
        "criterion 1 (immediate-exchange equilibrium)",
        ok,
        f"alpha={fit.alpha_hat:.4f} (target 2.0+/-0.1), first-bin density "
        f"{first_bin:.4f} < 5% of peak {peak:.4f}, mode={mode:.4f} (target 0.5+/-0.05)",
    )


def test_criterion_02_reshuffle_equilibrium():
    ens = run_ensemble(_config(ExchangeRule.reshuffle(), seed=2020), DESK_REPLICAS)
    fit = ens.pooled_fit
    finals = np.concatenate([r.final_wealth for r in ens.results])
    _, pvalue = ks_gamma(finals, 1.0)
    ok = abs(fit.alpha_hat - 1.0) <= 0.05 and pvalue > 0.01
    _report(
        "criterion 2 (reshuffle equilibrium is exponential)",
        ok,
        f"alpha={fit.alpha_hat:.4f} (target 1.0+/-0.05), KS vs exp(-x) p={pvalue:.4f}",
    )


def test_criterion_03_saving_model_sweep():
    details, ok = [], True
    for i, saving in enumerate((0.0, 0.1, 0.25, 0.5, 0.7)):
        result = run(_config(ExchangeRule.saving_model(saving), seed=3030 + 7 * i))
        fit = fit_gamma(result.samples)
        target = theory_alpha_saving(saving)
        tol = max(0.1, 0.05 * target)
        ok &= abs(fit.alpha_hat - target) <= tol
        details.append(f"lam={saving:g}: {fit.alpha_hat:.3f} vs {target:.3f} (+/-{tol:.2f})")
    _report("criterion 3 (saving-model sweep)", ok, "; ".join(details))


def test_criterion_04_unidirectional_sweep():
    details, ok = [], True
    divergent_samples = None
    for i, saving in enumerate((0.0, 0.25, 0.5)):
        rule = (
            ExchangeRule.unidirectional()
            if saving == 0.0
            else ExchangeRule.unidirectional_saving(saving)
        )
        result = run(_config(rule, seed=4040 + 7 * i))
        fit = fit_gamma(result.samples)
        target = theory_alpha_unidirectional(saving)
        tol = max(0.05, 0.10 * target)
        ok &= abs(fit.alpha_hat - target) <= tol
        details.append(f"lam={saving:g}: {fit.alpha_hat:.3f} vs {target:.3f} (+/-{tol:.2f})")
        if saving == 0.0:
            divergent_samples = result.samples
    hist = log_histogram(divergent_samples, lo=1e-3, hi=1.0, bins_per_decade=4)
    d = hist.density
    rises = bool(d[0] > d[1] > d[2])
    ok &= rises
    details.append(f"lam=0 density rises toward origin: {d[0]:.2f} > {d[1]:.2f} > {d[2]:.2f}")
    _report("criterion 4 (one-way sweep incl. divergent origin)", ok, "; ".join(details))


def test_criterion_05_mixed_sweep():
    # The small-wealth excess is ~20% of the prediction at mu=0.5 but only a
    # few tenths of a percent for the pure one-way endpoint, so this runs on
    # pooled replicas.
    details, ok = [], True
    for i, uni_prob in enumerate((0.0, 0.25, 0.5, 0.75, 1.0)):
        config = _config(ExchangeRule.mixed(uni_prob), seed=5050 + 1100 * i)
        ens = run_ensemble(config, DESK_REPLICAS, fit_range=(0.05, math.inf))
        samples = ens.pooled_samples
        fit = ens.pooled_fit
        target = theory_alpha_mixed(uni_prob)
        ok &= abs(fit.alpha_hat - target) <= 0.1
        details.append(f"mu={uni_prob:g}: {fit.alpha_hat:.3f} vs {target:.3f}")
        if uni_prob >= 0.5:
            # below the fit range the data must exceed the fitted prediction
            n_below = int((samples < 0.05).sum())
            mass_below = gamma_cdf(0.05, fit.alpha_hat)
            predicted = fit.n_fit * mass_below / (1.0 - mass_below)
            ok &= n_below > predicted
            details.append(f"mu={uni_prob:g} small-x excess {n_below} > {predicted:.0f}")
    _report("criterion 5 (mixed sweep, fit above 0.05)", ok, "; ".join(details))


def test_criterion_06_symmetric_criterion_invariance():
    result = run_fig3(PresetOptions())
    for check in result.checks:
        print(("PASS" if check.passed else "FAIL") + f"  criterion 6 / {check.label}: {check.detail}")
    assert result.passed, "; ".join(
        f"{c.label}: {c.detail}" for c in result.checks if not c.passed
    )


def test_criterion_07_relative_criterion_on_saving_model():
    result = run_fig4(PresetOptions())
    for check in result.checks:
        print(("PASS" if check.passed else "FAIL") + f"  criterion 7 / {check.label}: {check.detail}")
    assert result.passed, "; ".join(
        f"{c.label}: {c.detail}" for c in result.checks if not c.passed
    )


def test_criterion_08_asymmetric_criterion():
    result = run_fig5(PresetOptions())
    for check in result.checks:
        print(("PASS" if check.passed else "FAIL") + f"  criterion 8 / {check.label}: {check.detail}")
    assert result.passed, "; ".join(
        f"{c.label}: {c.detail}" for c in result.checks if not c.passed
    )


def test_criterion_09_heterogeneous_populations():
    result = run_fig6(PresetOptions())
    uniform = run_hetero_uniform(PresetOptions())
    for check in result.checks + uniform.checks:
        print(("PASS" if check.passed else "FAIL") + f"  criterion 9 / {check.label}: {check.detail}")
    failed = [c for c in result.checks + uniform.checks if not c.passed]
    assert not failed, "; ".join(f"{c.label}: {c.detail}" for c in failed)


def test_criterion_10_production_consumption_mapping():
    config = _config(ExchangeRule.immediate(), seed=9090, sweeps=1000, equil=500)
    plain = run(config)
    paired = run_production_consumption(config, 0.01, 0.0)
    _, pvalue = ks_two_sample(paired.rescaled.samples, plain.samples)
    growth = float(paired.raw_final_wealth.sum()) / config.n_units
    growth_ok = abs(growth - math.exp(10.0)) <= 0.01 * math.exp(10.0)

    bit = run_production_consumption(config, 0.03, 0.03)
    identical = np.array_equal(bit.rescaled.final_wealth, plain.final_wealth) and np.array_equal(
        bit.raw_final_wealth, plain.final_wealth
    )
    ok = pvalue > 0.01 and growth_ok and identical
    _report(
        "criterion 10 (production-consumption mapping)",
        ok,
        f"rescaled-vs-conserved KS p={pvalue:.4f}, raw growth {growth:.1f} vs exp(10)="
        f"{math.exp(10.0):.1f}, p=c bit-identical={identical}",
    )


def test_criterion_11_property_suite_without_simulation():
    rng = make_rng(111)
    ok = True
    details = []

    # probability range over random parameters
    for _ in range(20_000):
        delta = rng.normal(0.0, 2.0)
        scale = 10.0 ** rng.uniform(-2, 2)
        shift = rng.normal(0.0, 0.5)
        own = rng.uniform(0.0, 5.0)
        for q in (
            accept_prob_linear(delta, scale, 1.0),
            accept_prob_exponential(delta, scale, shift, 1.0),
            accept_prob_relative(delta, own, scale),
        ):
            ok &= 0.0 <= q <= 1.0
    details.append("probability range")

    # mirror symmetry: q_k on the mirrored proposal equals q_j at -delta
    for _ in range(5000):
        delta = rng.normal(0.0, 1.0)
        scale = 10.0 ** rng.uniform(-1, 1)
        ok &= accept_prob_linear(-delta, scale, 1.0) == accept_prob_linear(-delta, scale, 1.0)
    details.append("symmetry")

    # monotonicity in the gain
    grid = np.linspace(-3.0, 3.0, 601)
    for fn in (
        lambda d: accept_prob_linear(d, 0.7, 1.0),
        lambda d: accept_prob_exponential(d, 0.7, 0.1, 1.0),
        lambda d: accept_prob_relative(d, 1.3, 0.7),
    ):
        vals = np.array([fn(d) for d in grid])
        ok &= bool(np.all(np.diff(vals) >= -1e-12))
    details.append("monotonicity")

    # closed-form round trips to 1e-12
    for saving in np.linspace(0.0, 0.99, 200):
        ok &= abs(theory_saving_from_alpha(theory_alpha_saving(saving)) - saving) < 1e-12
    for uni_prob in np.linspace(0.0, 1.0, 201):
        ok &= (
            abs(theory_alpha_unidirectional(theory_saving_eff(uni_prob))
                - theory_alpha_mixed(uni_prob)) < 1e-12
        )
    details.append("round trips 1e-12")

    # gamma density normalization to 1e-8
    for alpha in (0.5, 1.0, 2.0, 4.0, 10.0):
        head, _ = integrate.quad(lambda t: gamma_pdf(t, alpha), 0.0, 1.0)
        tail, _ = integrate.quad(lambda t: gamma_pdf(t, alpha), 1.0, np.inf)
        ok &= abs(head + tail - 1.0) <= 1e-8
    details.append("pdf normalization 1e-8")

    # estimator consistency on oracle samples
    stderrs = []
    for i, size in enumerate((1000, 10_000, 100_000)):
        fit = fit_gamma(make_rng(500 + i).gamma(2.0, 0.5, size))
        stderrs.append(fit.alpha_stderr)
        ok &= abs(fit.alpha_hat - 2.0) < 5.0 * fit.alpha_stderr
    ok &= stderrs[0] > stderrs[1] > stderrs[2]
    details.append("oracle consistency")

    _report("criterion 11 (simulation-free property suite)", ok, ", ".join(details))
