"""Self-contained statistics for comparing authentication methods.

Welch's unequal-variance t-test with a two-tailed p-value from the
regularized incomplete beta function (continued fraction, no external math
libraries), pooled-SD effect size, t-based confidence intervals, and the
standard two-group sample-size formula.

Sign convention throughout: differences are (second sample minus first), so
``compare_samples(before, after)`` reports a positive shift when the second
group is larger.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError

_BETACF_MAX_ITER = 300
_BETACF_EPS = 1e-15
_FPMIN = 1e-300


def mean(xs: list[float]) -> float:
    if not xs:
        raise ConfigError("mean of an empty sample")
    return sum(xs) / len(xs)


def sample_var(xs: list[float]) -> float:
    """Unbiased (n-1) variance."""
    n = len(xs)
    if n < 2:
        raise ConfigError("variance needs at least two points")
    m = mean(xs)
    return sum((x - m) ** 2 for x in xs) / (n - 1)


def sample_sd(xs: list[float]) -> float:
    return math.sqrt(sample_var(xs))


def _check_sample(xs: list[float], label: str) -> None:
    if len(xs) < 2:
        raise ConfigError(f"sample {label} needs at least two points")
    if not all(math.isfinite(x) for x in xs):
        raise ConfigError(f"sample {label} contains non-finite values")


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta, by the modified Lentz method."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _BETACF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETACF_EPS:
            return h
    return h  # converged enough for every dof/x this package produces


def betainc_regularized(a: float, b: float, x: float) -> float:
    """I_x(a, b), the regularized incomplete beta function."""
    if a <= 0 or b <= 0:
        raise ConfigError("beta parameters must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    # The continued fraction converges fast only on one side of the mean;
    # use the symmetry I_x(a,b) = 1 - I_{1-x}(b,a) for the other.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_two_tailed_p(t: float, dof: float) -> float:
    if dof <= 0:
        raise ConfigError("degrees of freedom must be positive")
    if math.isinf(t):
        return 0.0
    return betainc_regularized(dof / 2.0, 0.5, dof / (dof + t * t))


def t_cdf(t: float, dof: float) -> float:
    p = t_two_tailed_p(t, dof)
    return 1.0 - p / 2.0 if t >= 0 else p / 2.0


def t_ppf(q: float, dof: float) -> float:
    """Quantile of Student's t by bisection on the CDF."""
    if not 0.0 < q < 1.0:
        raise ConfigError("quantile must be strictly inside (0, 1)")
    lo, hi = -1.0, 1.0
    while t_cdf(lo, dof) > q:
        lo *= 2.0
        if lo < -1e12:
            break
    while t_cdf(hi, dof) < q:
        hi *= 2.0
        if hi > 1e12:
            break
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if t_cdf(mid, dof) < q:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def norm_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def norm_ppf(q: float) -> float:
    """Standard normal quantile by bisection on erf."""
    if not 0.0 < q < 1.0:
        raise ConfigError("quantile must be strictly inside (0, 1)")
    lo, hi = -1.0, 1.0
    while norm_cdf(lo) > q:
        lo *= 2.0
    while norm_cdf(hi) < q:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if norm_cdf(mid) < q:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class GroupStats:
    n: int
    mean: float
    sd: float
    ci95_low: float
    ci95_high: float

    def to_json_dict(self) -> dict:
        return {"n": self.n, "mean": round(self.mean, 6), "sd": round(self.sd, 6),
                "ci95_low": round(self.ci95_low, 6), "ci95_high": round(self.ci95_high, 6)}


@dataclass(frozen=True)
class StatsSummary:
    a: GroupStats
    b: GroupStats
    mean_diff: float
    t_stat: float
    dof: float
    p_value: float
    cohens_d: float
    degenerate: bool = False

    def to_json_dict(self) -> dict:
        return {
            "a": self.a.to_json_dict(),
            "b": self.b.to_json_dict(),
            "mean_diff": round(self.mean_diff, 6),
            "t_stat": round(self.t_stat, 6) if math.isfinite(self.t_stat) else str(self.t_stat),
            "dof": round(self.dof, 6),
            "p_value": round(self.p_value, 9),
            "cohens_d": (round(self.cohens_d, 6)
                         if math.isfinite(self.cohens_d) else str(self.cohens_d)),
            "degenerate": self.degenerate,
        }


def group_stats(xs: list[float]) -> GroupStats:
    _check_sample(xs, "group")
    n = len(xs)
    m = mean(xs)
    sd = sample_sd(xs)
    if sd == 0.0:
        return GroupStats(n=n, mean=m, sd=0.0, ci95_low=m, ci95_high=m)
    half = t_ppf(0.975, n - 1) * sd / math.sqrt(n)
    return GroupStats(n=n, mean=m, sd=sd, ci95_low=m - half, ci95_high=m + half)


def welch_t(a: list[float], b: list[float]) -> tuple[float, float]:
    """Welch's t statistic (second minus first) and its Satterthwaite dof."""
    _check_sample(a, "a")
    _check_sample(b, "b")
    na, nb = len(a), len(b)
    va, vb = sample_var(a), sample_var(b)
    se2 = va / na + vb / nb
    if se2 == 0.0:
        diff = mean(b) - mean(a)
        t = 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
        return t, float(na + nb - 2)
    t = (mean(b) - mean(a)) / math.sqrt(se2)
    dof = se2 ** 2 / ((va / na) ** 2 / (na - 1) + (vb / nb) ** 2 / (nb - 1))
    return t, dof


def cohens_d_pooled(a: list[float], b: list[float]) -> float:
    """Effect size (second minus first) over the pooled standard deviation."""
    _check_sample(a, "a")
    _check_sample(b, "b")
    na, nb = len(a), len(b)
    sp2 = ((na - 1) * sample_var(a) + (nb - 1) * sample_var(b)) / (na + nb - 2)
    diff = mean(b) - mean(a)
    if sp2 == 0.0:
        return 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
    return diff / math.sqrt(sp2)


def compare_samples(a: list[float], b: list[float]) -> StatsSummary:
    """Full two-group comparison; degenerate flags zero-variance inputs."""
    t, dof = welch_t(a, b)
    degenerate = (sample_var(a) == 0.0 and sample_var(b) == 0.0)
    p = 1.0 if (degenerate and t == 0.0) else t_two_tailed_p(t, dof)
    return StatsSummary(
        a=group_stats(a),
        b=group_stats(b),
        mean_diff=mean(b) - mean(a),
        t_stat=t,
        dof=dof,
        p_value=p,
        cohens_d=cohens_d_pooled(a, b),
        degenerate=degenerate,
    )


def required_sample_size(effect_d: float, alpha: float, power: float) -> int:
    """Per-group n for a two-sided two-sample test at the given effect size."""
    if effect_d == 0.0:
        raise ConfigError("effect size must be non-zero")
    if not 0.0 < alpha < 1.0 or not 0.0 < power < 1.0:
        raise ConfigError("alpha and power must be inside (0, 1)")
    z_alpha = norm_ppf(1.0 - alpha / 2.0)
    z_power = norm_ppf(power)
    return math.ceil(2.0 * (z_alpha + z_power) ** 2 / (effect_d * effect_d))


def percentile(xs: list[float], q: float) -> float:
    """Linear-interpolation percentile, q in [0, 100]."""
    if not xs:
        raise ConfigError("percentile of an empty sample")
    if not 0.0 <= q <= 100.0:
        raise ConfigError("percentile rank must be in [0, 100]")
    ordered = sorted(xs)
    if len(ordered) == 1:
        return ordered[0]
    pos = (len(ordered) - 1) * q / 100.0
    lo = math.floor(pos)
    hi = math.ceil(pos)
    if lo == hi:
        return ordered[lo]
    return ordered[lo] + (ordered[hi] - ordered[lo]) * (pos - lo)
