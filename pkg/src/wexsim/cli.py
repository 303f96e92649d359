"""Command line interface: single runs, experiment presets, CSV export.

Configuration can come from a ``key = value`` file (``#`` starts a comment),
from flags, or both; flags override file values and unknown keys are errors.
Preset runs print one PASS/FAIL line per expected target and exit non-zero
when any target fails, so presets double as regression checks.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from .acceptance import AcceptanceCriterion, TwoClassScales, UniformScales
from .core import ConfigError, SimConfig
from .engine import run, run_ensemble
from .presets import PRESETS, PresetOptions, get_preset
from .reporting import append_fit_record, export_histogram, write_fit_report
from .rules import ExchangeRule, RuleKind
from .stats import FitError, fit_gamma, linear_histogram, log_histogram

__all__ = ["main", "build_parser", "parse_config", "load_config_file"]

OUT_DIR_ENV = "WEXSIM_OUT"

_RULES = tuple(k.value for k in RuleKind)
_CRITERIA = ("always", "linear", "exp", "relative", "asymmetric", "hetero-linear")

_INT_KEYS = {"n", "sweeps", "equilibration", "replicas", "seed", "snapshot_interval"}
_FLOAT_KEYS = {"lambda", "mu", "theta", "eta", "dx0", "eta_min", "eta_max", "p0",
               "fit_min", "fit_max"}
_STR_KEYS = {"rule", "criterion", "out", "name", "two_class"}
_ALL_KEYS = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wexsim",
        description="Monte Carlo simulation of kinetic wealth-exchange models",
    )
    parser.add_argument("--config", metavar="FILE", help="key = value configuration file")
    parser.add_argument("--preset", metavar="NAME", help="run a named experiment preset")
    parser.add_argument("--list-presets", action="store_true", help="list presets and exit")

    sim = parser.add_argument_group("simulation")
    sim.add_argument("--rule", choices=_RULES, help="exchange rule")
    sim.add_argument("--criterion", choices=_CRITERIA, help="acceptance criterion (default: always)")
    sim.add_argument("--lambda", dest="lambda_", type=float, metavar="X",
                     help="saving propensity for the cc / angle-saving rules")
    sim.add_argument("--mu", type=float, help="one-way trade probability for the mixed rule")
    sim.add_argument("--p0", type=float, help="donor-direction probability for one-way rules")
    sim.add_argument("--theta", type=float, help="blocking fraction of the asymmetric criterion")
    sim.add_argument("--eta", type=float, help="acceptance scale of the linear/exp/relative criteria")
    sim.add_argument("--dx0", type=float, help="shift of the exponential criterion")
    sim.add_argument("--eta-min", dest="eta_min", type=float, help="uniform heterogeneity: lower scale")
    sim.add_argument("--eta-max", dest="eta_max", type=float, help="uniform heterogeneity: upper scale")
    sim.add_argument("--two-class", dest="two_class", metavar="FRAC,ETA_MAJOR,MIN,MAX",
                     help="two-class heterogeneity spec")
    sim.add_argument("--n", type=int, help="number of units (default 1000)")
    sim.add_argument("--sweeps", type=int, help="total sweeps (default 10000)")
    sim.add_argument("--equilibration", type=int, help="discarded sweeps (default 1000)")
    sim.add_argument("--snapshot-interval", dest="snapshot_interval", type=int,
                     help="sweeps between snapshots (default 10)")
    sim.add_argument("--replicas", type=int, help="independent replicas (default 1)")
    sim.add_argument("--seed", type=int, help="random seed (default 1)")

    out = parser.add_argument_group("output")
    out.add_argument("--out", metavar="DIR", help=f"output directory (default ${OUT_DIR_ENV} or .)")
    out.add_argument("--name", help="basename for output files")
    out.add_argument("--fit-min", dest="fit_min", type=float, help="lower edge of the fit range")
    out.add_argument("--fit-max", dest="fit_max", type=float, help="upper edge of the fit range")
    return parser


def load_config_file(path: str | Path) -> dict:
    """Parse a ``key = value`` file; unknown keys and bad values are errors."""
    values: dict = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip()
        if key not in _ALL_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown configuration key: {key!r}")
        if key in _INT_KEYS:
            try:
                values[key] = int(value)
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: key {key!r} needs an integer, got {value!r}")
        elif key in _FLOAT_KEYS:
            try:
                values[key] = float(value)
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: key {key!r} needs a number, got {value!r}")
        else:
            values[key] = value
    return values


def _parse_two_class(text: str) -> TwoClassScales:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise ConfigError(
            f"two_class needs four comma-separated values FRAC,ETA_MAJOR,MIN,MAX, got {text!r}"
        )
    try:
        frac, major, lo, hi = (float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"two_class values must be numbers, got {text!r}")
    return TwoClassScales(frac, major, lo, hi)


def _require(values: dict, key: str, context: str):
    if values.get(key) is None:
        raise ConfigError(f"{context} requires the parameter {key!r} (--{key.replace('_', '-')})")
    return values[key]


def _build_rule(values: dict) -> ExchangeRule:
    rule = values.get("rule")
    if rule is None:
        raise ConfigError("a rule is required (--rule) unless a preset is selected")
    if rule not in _RULES:
        raise ConfigError(f"unknown rule {rule!r}; choose from {', '.join(_RULES)}")
    p0 = values.get("p0")
    if rule == "immediate":
        return ExchangeRule.immediate()
    if rule == "dy":
        return ExchangeRule.reshuffle()
    if rule == "cc":
        return ExchangeRule.saving_model(_require(values, "lambda", "rule 'cc'"))
    if rule == "angle":
        return ExchangeRule.unidirectional(0.5 if p0 is None else p0)
    if rule == "angle-saving":
        return ExchangeRule.unidirectional_saving(
            _require(values, "lambda", "rule 'angle-saving'"), 0.5 if p0 is None else p0
        )
    return ExchangeRule.mixed(_require(values, "mu", "rule 'mixed'"))


def _build_criterion(values: dict) -> AcceptanceCriterion:
    criterion = values.get("criterion") or "always"
    if criterion not in _CRITERIA:
        raise ConfigError(
            f"unknown criterion {criterion!r}; choose from {', '.join(_CRITERIA)}"
        )
    if criterion == "always":
        return AcceptanceCriterion.always()
    if criterion == "linear":
        return AcceptanceCriterion.linear(_require(values, "eta", "criterion 'linear'"))
    if criterion == "exp":
        return AcceptanceCriterion.exponential(
            _require(values, "eta", "criterion 'exp'"), values.get("dx0") or 0.0
        )
    if criterion == "relative":
        return AcceptanceCriterion.relative(_require(values, "eta", "criterion 'relative'"))
    if criterion == "asymmetric":
        return AcceptanceCriterion.asymmetric(_require(values, "theta", "criterion 'asymmetric'"))
    two_class = values.get("two_class")
    eta_min, eta_max = values.get("eta_min"), values.get("eta_max")
    if two_class is not None and (eta_min is not None or eta_max is not None):
        raise ConfigError("give either two_class or eta_min/eta_max, not both")
    if two_class is not None:
        return AcceptanceCriterion.heterogeneous(_parse_two_class(two_class))
    if eta_min is None or eta_max is None:
        raise ConfigError(
            "criterion 'hetero-linear' requires either --two-class or both --eta-min and --eta-max"
        )
    return AcceptanceCriterion.heterogeneous(UniformScales(eta_min, eta_max))


def parse_config(values: dict) -> SimConfig:
    """Build a validated simulation config from merged file/flag values."""
    rule = _build_rule(values)
    criterion = _build_criterion(values)
    return SimConfig(
        n_units=values.get("n") if values.get("n") is not None else 1000,
        n_sweeps=values.get("sweeps") if values.get("sweeps") is not None else 10_000,
        rule=rule,
        criterion=criterion,
        seed=values.get("seed") if values.get("seed") is not None else 1,
        equilibration_sweeps=(
            values.get("equilibration") if values.get("equilibration") is not None else 1000
        ),
        snapshot_interval=(
            values.get("snapshot_interval") if values.get("snapshot_interval") is not None else 10
        ),
    )


def _merge_values(args: argparse.Namespace) -> dict:
    values: dict = {}
    if args.config:
        values.update(load_config_file(args.config))
    flag_map = {
        "rule": args.rule, "criterion": args.criterion, "lambda": args.lambda_,
        "mu": args.mu, "p0": args.p0, "theta": args.theta, "eta": args.eta,
        "dx0": args.dx0, "eta_min": args.eta_min, "eta_max": args.eta_max,
        "two_class": args.two_class, "n": args.n, "sweeps": args.sweeps,
        "equilibration": args.equilibration, "snapshot_interval": args.snapshot_interval,
        "replicas": args.replicas, "seed": args.seed, "out": args.out,
        "name": args.name, "fit_min": args.fit_min, "fit_max": args.fit_max,
    }
    for key, value in flag_map.items():
        if value is not None:
            values[key] = value
    return values


def _out_dir(values: dict) -> Path:
    out = values.get("out") or os.environ.get(OUT_DIR_ENV) or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _run_single(values: dict) -> int:
    config = parse_config(values)
    replicas = values.get("replicas") or 1
    fit_min, fit_max = values.get("fit_min"), values.get("fit_max")
    fit_range = None
    if fit_min is not None or fit_max is not None:
        fit_range = (fit_min or 0.0, fit_max if fit_max is not None else math.inf)

    out_dir = _out_dir(values)
    name = values.get("name") or (
        f"{config.rule.kind.value}_{config.criterion.kind.value}_seed{config.seed}"
    )

    print(f"running {name}: n={config.n_units} sweeps={config.n_sweeps} replicas={replicas}")
    if replicas > 1:
        ensemble = run_ensemble(config, replicas, fit_range=fit_range)
        samples = ensemble.pooled_samples
        fit = ensemble.pooled_fit
        accept = float(np.mean([r.acceptance_rate for r in ensemble.results])) \
            if ensemble.results else math.nan
    else:
        result = run(config)
        samples = result.samples
        accept = result.acceptance_rate
        try:
            fit = fit_gamma(samples, fit_range)
        except FitError as exc:
            print(f"fit failed: {exc}", file=sys.stderr)
            fit = None

    files = [export_histogram(linear_histogram(samples, lo=0.0, n_bins=200),
                              out_dir / f"{name}_hist_linear.csv")]
    try:
        files.append(export_histogram(log_histogram(samples, bins_per_decade=16),
                                      out_dir / f"{name}_hist_log.csv"))
    except ValueError:
        pass
    if fit is not None:
        files.append(write_fit_report(fit, out_dir / f"{name}_fit.txt", label=name))
        files.append(append_fit_record(fit, out_dir / f"{name}_fit.jsonl", label=name))
        print(f"alpha_hat = {fit.alpha_hat:.4f} +/- {fit.alpha_stderr:.4f} "
              f"(KS p = {fit.ks_pvalue:.4g}, n = {fit.n_fit})")
    print(f"acceptance rate = {accept:.4f}")
    for path in files:
        print(f"wrote {path}")
    return 0


def _run_preset(args: argparse.Namespace, values: dict) -> int:
    preset = get_preset(args.preset)
    if preset is None:
        print(f"unknown preset: {args.preset!r}", file=sys.stderr)
        print("available presets:", file=sys.stderr)
        for name, entry in PRESETS.items():
            print(f"  {name:16s} {entry.description}", file=sys.stderr)
        return 2
    options = PresetOptions(
        n_units=values.get("n"),
        n_sweeps=values.get("sweeps"),
        equilibration=values.get("equilibration"),
        replicas=values.get("replicas"),
        seed=values.get("seed"),
        out_dir=_out_dir(values),
    )
    result = preset.func(options)
    for check in result.checks:
        status = "PASS" if check.passed else "FAIL"
        detail = f"  [{check.detail}]" if check.detail else ""
        print(f"{status}  {check.label}{detail}")
    for path in result.files:
        print(f"wrote {path}")
    n_failed = sum(1 for c in result.checks if not c.passed)
    print(f"{result.name}: {len(result.checks) - n_failed}/{len(result.checks)} targets passed")
    return 0 if result.passed else 1


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.list_presets:
        for name, entry in PRESETS.items():
            print(f"{name:16s} {entry.description}")
        return 0
    try:
        values = _merge_values(args)
        if args.preset:
            return _run_preset(args, values)
        return _run_single(values)
    except (ConfigError, FitError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
