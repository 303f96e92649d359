"""Histogramming, distribution fitting, and closed-form theory curves.

The equilibrium wealth distributions live in the one-parameter gamma family
with the mean pinned to 1 (shape and rate coincide), so fits expose a single
shape parameter. Binning is display-only: every estimator works on raw
samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special
from scipy import stats as sp_stats

__all__ = [
    "FitError",
    "Histogram",
    "FitReport",
    "TailFit",
    "linear_histogram",
    "log_histogram",
    "read_histogram_csv",
    "gamma_pdf",
    "gamma_cdf",
    "fit_gamma",
    "fit_pareto_tail",
    "ks_two_sample",
    "ks_gamma",
    "moment_alpha",
    "density_mode",
    "theory_alpha_saving",
    "theory_alpha_unidirectional",
    "theory_alpha_mixed",
    "theory_saving_eff",
    "theory_saving_from_alpha",
]

# Bisection bracket and tolerance for the one-parameter gamma MLE.
_ALPHA_LO = 1e-3
_ALPHA_HI = 1e3
_ALPHA_TOL = 1e-10


class FitError(ValueError):
    """A fit cannot be produced from the given samples."""


@dataclass
class Histogram:
    """Binned view of a sample set.

    ``n_samples`` counts everything that was binned, including the
    ``n_out_of_range`` samples that fell outside the edges, so the density
    column integrates to the in-range fraction.
    """

    kind: str
    edges: np.ndarray
    counts: np.ndarray
    n_samples: int
    n_out_of_range: int = 0

    def __post_init__(self) -> None:
        self.edges = np.asarray(self.edges, dtype=np.float64)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.edges.size == 0:
            if self.counts.size != 0:
                raise ValueError("histogram without edges cannot carry counts")
            return
        if self.edges.size < 2 or np.any(np.diff(self.edges) <= 0):
            raise ValueError("histogram edges must be strictly increasing")
        if self.counts.size != self.edges.size - 1:
            raise ValueError("need exactly one count per bin")
        if np.any(self.counts < 0):
            raise ValueError("bin counts must be non-negative")

    @classmethod
    def empty(cls, kind: str = "linear") -> "Histogram":
        return cls(kind=kind, edges=np.array([]), counts=np.array([], dtype=np.int64), n_samples=0)

    @property
    def n_bins(self) -> int:
        return int(self.counts.size)

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def centers(self) -> np.ndarray:
        if self.kind == "log":
            return np.sqrt(self.edges[:-1] * self.edges[1:])
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def density(self) -> np.ndarray:
        """counts / (n_samples * bin_width); zero when there are no samples."""
        if self.n_samples == 0:
            return np.zeros_like(self.widths)
        return self.counts / (self.n_samples * self.widths)


def linear_histogram(
    samples: np.ndarray, lo: float = 0.0, hi: float | None = None, n_bins: int = 200
) -> Histogram:
    """Equal-width bins on [lo, hi]; samples outside only raise the out-of-range count."""
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size == 0:
        return Histogram.empty("linear")
    if hi is None:
        hi = float(x.max())
        if hi <= lo:
            hi = lo + 1.0
    edges = np.linspace(lo, hi, n_bins + 1)
    counts, _ = np.histogram(x, bins=edges)
    in_range = int(counts.sum())
    return Histogram(
        kind="linear",
        edges=edges,
        counts=counts,
        n_samples=int(x.size),
        n_out_of_range=int(x.size) - in_range,
    )


def log_histogram(
    samples: np.ndarray,
    lo: float | None = None,
    hi: float | None = None,
    bins_per_decade: int = 64,
) -> Histogram:
    """Geometrically spaced bins; non-positive samples count as out-of-range."""
    x = np.asarray(samples, dtype=np.float64).ravel()
    pos = x[x > 0]
    if pos.size == 0:
        raise ValueError("logarithmic binning needs at least one positive sample")
    if lo is None:
        lo = float(pos.min())
    if hi is None:
        hi = float(pos.max()) * (1.0 + 1e-9)
    if not 0 < lo < hi:
        raise ValueError(f"log bin range needs 0 < lo < hi, got ({lo}, {hi})")
    n_decades = math.log10(hi / lo)
    n_bins = max(1, int(math.ceil(n_decades * bins_per_decade)))
    edges = np.logspace(math.log10(lo), math.log10(hi), n_bins + 1)
    counts, _ = np.histogram(x, bins=edges)
    in_range = int(counts.sum())
    return Histogram(
        kind="log",
        edges=edges,
        counts=counts,
        n_samples=int(x.size),
        n_out_of_range=int(x.size) - in_range,
    )


def read_histogram_csv(path) -> Histogram:
    """Rebuild a histogram from the CSV layout written by the exporter.

    The total sample count is recovered from any bin with a non-zero count
    (density encodes it); an all-empty histogram comes back with the bare
    bin counts only.
    """
    rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if rows.size == 0:
        return Histogram.empty()
    left, right, counts, density = rows[:, 0], rows[:, 1], rows[:, 2], rows[:, 3]
    if np.any(left[1:] != right[:-1]):
        raise ValueError("histogram bins must be contiguous")
    edges = np.append(left, right[-1])
    n_samples = 0
    nz = np.nonzero((counts > 0) & (density > 0))[0]
    if nz.size:
        i = nz[0]
        n_samples = int(round(counts[i] / (density[i] * (right[i] - left[i]))))
    else:
        n_samples = int(counts.sum())
    ratios = np.diff(np.log(edges)) if np.all(edges > 0) else None
    is_log = ratios is not None and edges.size > 2 and np.allclose(ratios, ratios[0], rtol=1e-6)
    diffs = np.diff(edges)
    is_linear = np.allclose(diffs, diffs[0], rtol=1e-9)
    kind = "linear" if is_linear or not is_log else "log"
    return Histogram(
        kind=kind,
        edges=edges,
        counts=counts.astype(np.int64),
        n_samples=n_samples,
        n_out_of_range=n_samples - int(counts.sum()),
    )


def gamma_pdf(x, alpha: float):
    """Gamma density with mean 1 and shape ``alpha`` (rate equals shape).

    ``alpha=1`` is the unit exponential; for ``alpha>1`` the density vanishes
    at the origin, for ``alpha<1`` it diverges there.
    """
    if not alpha > 0:
        raise ValueError(f"shape parameter must be positive, got {alpha}")
    arr = np.asarray(x, dtype=np.float64)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    out = np.zeros_like(arr)
    positive = arr > 0
    xv = arr[positive]
    log_norm = alpha * math.log(alpha) - special.gammaln(alpha)
    out[positive] = np.exp(log_norm + (alpha - 1.0) * np.log(xv) - alpha * xv)
    at_zero = arr == 0
    if np.any(at_zero):
        if alpha > 1:
            out[at_zero] = 0.0
        elif alpha == 1:
            out[at_zero] = 1.0
        else:
            out[at_zero] = np.inf
    return float(out[0]) if scalar else out


def gamma_cdf(x, alpha: float):
    """CDF of the mean-1 gamma family."""
    if not alpha > 0:
        raise ValueError(f"shape parameter must be positive, got {alpha}")
    arr = np.asarray(x, dtype=np.float64)
    scalar = arr.ndim == 0
    out = special.gammainc(alpha, alpha * np.clip(np.atleast_1d(arr), 0.0, None))
    return float(out[0]) if scalar else out


@dataclass
class FitReport:
    """Result of fitting the one-parameter gamma family to a sample set."""

    alpha_hat: float
    alpha_stderr: float
    ks_statistic: float
    ks_pvalue: float
    fit_range: tuple[float, float]
    n_fit: int
    tail_pareto_index: float | None = None

    def as_dict(self) -> dict:
        return {
            "alpha_hat": self.alpha_hat,
            "alpha_stderr": self.alpha_stderr,
            "ks_statistic": self.ks_statistic,
            "ks_pvalue": self.ks_pvalue,
            "fit_lo": self.fit_range[0],
            "fit_hi": self.fit_range[1],
            "n_fit": self.n_fit,
            "tail_pareto_index": self.tail_pareto_index,
        }


def _digamma_gap(alpha: float) -> float:
    return math.log(alpha) - special.digamma(alpha)


def _solve_shape(target: float) -> float:
    # log(a) - digamma(a) decreases monotonically from +inf to 0; bisect it.
    lo, hi = _ALPHA_LO, _ALPHA_HI
    if target >= _digamma_gap(lo):
        raise FitError(f"shape estimate below {lo}; samples are too dispersed for this family")
    if target <= _digamma_gap(hi):
        raise FitError(f"shape estimate above {hi}; samples are nearly degenerate")
    while hi - lo > _ALPHA_TOL:
        mid = 0.5 * (lo + hi)
        if _digamma_gap(mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def fit_gamma(
    samples: np.ndarray,
    fit_range: tuple[float, float] | None = None,
    min_samples: int = 1000,
) -> FitReport:
    """Maximum-likelihood shape of the mean-1 gamma family.

    Without a range the estimate solves the digamma equation
    ``log(a) - psi(a) = mean(x) - mean(log x) - 1`` by bisection. With an
    explicit ``fit_range`` the likelihood is normalized by the gamma mass
    inside the range (the sample is treated as range-truncated), which keeps
    the estimate consistent when the model only holds above a cutoff.

    The KS line compares the fitted (possibly truncated) CDF against the
    in-range samples; its p-value is the usual asymptotic one and ignores
    that the shape was estimated from the same data.
    """
    x = np.asarray(samples, dtype=np.float64).ravel()
    if fit_range is None:
        lo, hi = 0.0, math.inf
    else:
        lo, hi = float(fit_range[0]), float(fit_range[1])
        if not 0 <= lo < hi:
            raise ValueError(f"fit range must satisfy 0 <= lo < hi, got ({lo}, {hi})")
    sel = x[(x > 0) & (x >= lo) & (x < hi)]
    if sel.size < min_samples:
        raise FitError(f"need at least {min_samples} samples in the fit range, got {sel.size}")

    n = sel.size
    sum_x = float(sel.sum())
    sum_log = float(np.log(sel).sum())

    if lo <= 0 and math.isinf(hi):
        gap = sum_x / n - sum_log / n - 1.0
        if gap <= 0:
            raise FitError("degenerate sample: all values equal")
        alpha = _solve_shape(gap)
        info = n * (special.polygamma(1, alpha) - 1.0 / alpha)
        stderr = 1.0 / math.sqrt(info) if info > 0 else math.nan
    else:
        def nll(a: float) -> float:
            mass = gamma_cdf(hi, a) - gamma_cdf(lo, a) if not math.isinf(hi) else 1.0 - gamma_cdf(lo, a)
            if mass <= 0:
                return math.inf
            ll = (
                n * (a * math.log(a) - special.gammaln(a))
                + (a - 1.0) * sum_log
                - a * sum_x
                - n * math.log(mass)
            )
            return -ll

        res = optimize.minimize_scalar(
            nll, bounds=(_ALPHA_LO, _ALPHA_HI), method="bounded", options={"xatol": _ALPHA_TOL}
        )
        if not res.success or not np.isfinite(res.fun):
            raise FitError("truncated shape fit did not converge")
        alpha = float(res.x)
        if alpha <= _ALPHA_LO * 1.01 or alpha >= _ALPHA_HI * 0.99:
            raise FitError(f"shape estimate {alpha:.3g} pinned at the search bracket")
        h = max(1e-6, 1e-5 * alpha)
        curvature = (nll(alpha + h) - 2.0 * nll(alpha) + nll(alpha - h)) / (h * h)
        stderr = 1.0 / math.sqrt(curvature) if curvature > 0 else math.nan

    def fitted_cdf(t):
        g = gamma_cdf(t, alpha)
        if lo <= 0 and math.isinf(hi):
            return g
        g_lo = gamma_cdf(lo, alpha)
        g_hi = 1.0 if math.isinf(hi) else gamma_cdf(hi, alpha)
        return np.clip((g - g_lo) / (g_hi - g_lo), 0.0, 1.0)

    ks = sp_stats.kstest(sel, fitted_cdf)
    return FitReport(
        alpha_hat=float(alpha),
        alpha_stderr=float(stderr),
        ks_statistic=float(ks.statistic),
        ks_pvalue=float(ks.pvalue),
        fit_range=(lo, hi),
        n_fit=int(n),
    )


@dataclass
class TailFit:
    """Hill estimate of the power-law exponent of the upper tail.

    ``index`` is the survival-function (CCDF) exponent: samples whose CCDF
    falls as ``x**-p`` estimate ``index = p``, and the density then falls as
    ``x**-(1+p)``; ``density_exponent`` carries that converted value.
    ``plateau`` is False when shrinking the tail fraction keeps drifting the
    estimate, the signature of a tail that is not a power law.
    """

    index: float
    stderr: float
    n_tail: int
    threshold: float
    plateau: bool
    indices_at_fractions: tuple[float, ...] = field(default_factory=tuple)

    @property
    def density_exponent(self) -> float:
        return 1.0 + self.index


def fit_pareto_tail(
    samples: np.ndarray,
    tail_fraction: float,
    n_bootstrap: int = 200,
    seed: int = 0,
    plateau_rtol: float = 0.15,
) -> TailFit:
    """Hill estimator over the top ``tail_fraction`` of the samples.

    The standard error comes from bootstrapping the tail log-spacings. The
    plateau check re-estimates at half and quarter of the requested fraction
    and flags the fit when the spread exceeds ``plateau_rtol`` of the median.
    """
    if not 0.0 < tail_fraction <= 0.2:
        raise ValueError(f"tail fraction must lie in (0, 0.2], got {tail_fraction}")
    x = np.asarray(samples, dtype=np.float64).ravel()
    x = np.sort(x[x > 0])[::-1]
    k = int(math.floor(x.size * tail_fraction))
    if k < 100:
        raise FitError(f"need at least 100 tail samples, got {k}")
    if k >= x.size:
        raise FitError("tail fraction leaves no bulk below the threshold")

    def hill_index(top: int) -> float:
        threshold = x[top]
        spacings = np.log(x[:top]) - math.log(threshold)
        return 1.0 / float(spacings.mean())

    threshold = float(x[k])
    spacings = np.log(x[:k]) - math.log(threshold)
    index = 1.0 / float(spacings.mean())

    rng = np.random.default_rng(seed)
    boot = np.empty(n_bootstrap)
    for b in range(n_bootstrap):
        resampled = rng.choice(spacings, size=k, replace=True)
        boot[b] = 1.0 / float(resampled.mean())
    stderr = float(boot.std(ddof=1))

    indices = [index]
    for divisor in (2, 4):
        k_sub = k // divisor
        if k_sub >= 50:
            indices.append(hill_index(k_sub))
    spread = max(indices) - min(indices)
    plateau = len(indices) >= 2 and spread <= plateau_rtol * float(np.median(indices))

    return TailFit(
        index=float(index),
        stderr=stderr,
        n_tail=k,
        threshold=threshold,
        plateau=plateau,
        indices_at_fractions=tuple(indices),
    )


def ks_two_sample(a: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    """Two-sample Kolmogorov-Smirnov statistic with the asymptotic p-value."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.size == 0 or b.size == 0:
        raise ValueError("both sample sets must be non-empty")
    res = sp_stats.ks_2samp(a, b, method="asymp")
    return float(res.statistic), float(res.pvalue)


def ks_gamma(samples: np.ndarray, alpha: float) -> tuple[float, float]:
    """One-sample KS of the samples against the mean-1 gamma CDF with shape ``alpha``."""
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size == 0:
        raise ValueError("sample set must be non-empty")
    res = sp_stats.kstest(x, lambda t: gamma_cdf(t, alpha))
    return float(res.statistic), float(res.pvalue)


def moment_alpha(samples: np.ndarray) -> float:
    """Method-of-moments shape estimate mean^2/var; infinite for constant samples."""
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size < 2:
        raise ValueError("need at least two samples")
    mean = float(x.mean())
    var = float(x.var())
    if var <= 0:
        return math.inf
    return mean * mean / var


def density_mode(
    samples: np.ndarray, bin_width: float = 0.05, lo: float = 0.0, hi: float | None = None
) -> float:
    """Location of the density maximum, from a histogram argmax refined by a parabola."""
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size == 0:
        raise ValueError("sample set must be non-empty")
    if hi is None:
        hi = float(x.max())
    n_bins = max(3, int(math.ceil((hi - lo) / bin_width)))
    counts, edges = np.histogram(x, bins=n_bins, range=(lo, hi))
    centers = 0.5 * (edges[:-1] + edges[1:])
    i = int(np.argmax(counts))
    if i == 0 or i == counts.size - 1:
        return float(centers[i])
    c_prev, c_mid, c_next = float(counts[i - 1]), float(counts[i]), float(counts[i + 1])
    denom = c_prev - 2.0 * c_mid + c_next
    if denom >= 0:
        return float(centers[i])
    offset = 0.5 * (c_prev - c_next) / denom
    return float(centers[i] + offset * (edges[1] - edges[0]))


def theory_alpha_saving(saving: float) -> float:
    """Equilibrium shape of the saving (re-split) model: (1 + 2s) / (1 - s)."""
    if not 0.0 <= saving < 1.0:
        raise ValueError(f"saving propensity must lie in [0, 1), got {saving}")
    return (1.0 + 2.0 * saving) / (1.0 - saving)


def theory_alpha_unidirectional(saving: float) -> float:
    """Equilibrium shape of the one-way model, half the saving-model value."""
    if not 0.0 <= saving < 1.0:
        raise ValueError(f"saving propensity must lie in [0, 1), got {saving}")
    return (1.0 + 2.0 * saving) / (2.0 * (1.0 - saving))


def theory_alpha_mixed(uni_prob: float) -> float:
    """Equilibrium shape of the mixed dynamics: 2**(1 - 2*uni_prob)."""
    if not 0.0 <= uni_prob <= 1.0:
        raise ValueError(f"one-way trade probability must lie in [0, 1], got {uni_prob}")
    return 2.0 ** (1.0 - 2.0 * uni_prob)


def theory_saving_eff(uni_prob: float) -> float:
    """Saving propensity whose one-way model matches the mixed dynamics."""
    if not 0.0 <= uni_prob <= 1.0:
        raise ValueError(f"one-way trade probability must lie in [0, 1], got {uni_prob}")
    a = 2.0 ** (2.0 * (1.0 - uni_prob))
    return (a - 1.0) / (a + 2.0)


def theory_saving_from_alpha(alpha_q: float) -> float:
    """Effective saving propensity for an observed shape; inverts the saving-model curve."""
    if not alpha_q > 0:
        raise ValueError(f"shape parameter must be positive, got {alpha_q}")
    return (alpha_q - 1.0) / (alpha_q + 2.0)
