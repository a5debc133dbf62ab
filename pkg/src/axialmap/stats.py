"""Statistical apparatus: mean-based head/tail division, lognormal fitting
with a Kolmogorov-Smirnov goodness figure, correlation and significance
testing, and gate-to-unit assignment.

Only the lognormal family is fitted here.  Other heavy-tailed families
(power law, exponential, stretched exponential, power law with cutoff)
are deliberately out of scope; the fit reports a KS distance instead of
enforcing a pass/fail cutoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

from .geometry import Point, Polyline, point_segment_distance


class StatsError(ValueError):
    """Invalid input to a statistical routine."""


@dataclass(frozen=True)
class HeadTailSplit:
    mean: float
    head: Tuple[int, ...]
    tail: Tuple[int, ...]

    @property
    def head_fraction(self) -> float:
        n = len(self.head) + len(self.tail)
        return len(self.head) / n if n else 0.0


def head_tail_split(values: Sequence[float]) -> HeadTailSplit:
    """Split indices at the arithmetic mean: head strictly above, tail at
    or below."""
    if not values:
        raise StatsError("head/tail split of empty list")
    mean = sum(values) / len(values)
    head = tuple(i for i, v in enumerate(values) if v > mean)
    tail = tuple(i for i, v in enumerate(values) if v <= mean)
    return HeadTailSplit(mean=mean, head=head, tail=tail)


@dataclass(frozen=True)
class LognormalFit:
    mu: float
    sigma: float
    sample_size: int
    gof_statistic: float


def normal_cdf(z: float) -> float:
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


def lognormal_cdf(x: float, mu: float, sigma: float) -> float:
    if x <= 0.0:
        return 0.0
    if sigma == 0.0:
        return 1.0 if math.log(x) >= mu else 0.0
    return normal_cdf((math.log(x) - mu) / sigma)


def _lognormal_cdf_left(x: float, mu: float, sigma: float) -> float:
    # left limit of the CDF; differs from the CDF only at the atom of a
    # degenerate (sigma = 0) distribution
    if sigma == 0.0:
        return 1.0 if x > 0.0 and math.log(x) > mu else 0.0
    return lognormal_cdf(x, mu, sigma)


def fit_lognormal(values: Sequence[float]) -> LognormalFit:
    """Maximum-likelihood lognormal fit with a KS goodness statistic.

    mu and sigma are the mean and population standard deviation of the
    log-values.  All inputs must be strictly positive.
    """
    n = len(values)
    if n < 2:
        raise StatsError("lognormal fit needs at least 2 values, got %d" % n)
    logs = []
    for v in values:
        if not (v > 0.0) or not math.isfinite(v):
            raise StatsError("lognormal fit requires positive values, got %r" % (v,))
        logs.append(math.log(v))
    mu = sum(logs) / n
    var = sum((w - mu) ** 2 for w in logs) / n
    sigma = math.sqrt(var)
    ordered = sorted(values)
    # tie-aware KS: compare the empirical step against the fitted CDF just
    # before and right at each distinct value
    ks = 0.0
    i = 0
    while i < n:
        j = i
        while j < n and ordered[j] == ordered[i]:
            j += 1
        x = ordered[i]
        ks = max(ks,
                 abs(j / n - lognormal_cdf(x, mu, sigma)),
                 abs(i / n - _lognormal_cdf_left(x, mu, sigma)))
        i = j
    return LognormalFit(mu=mu, sigma=sigma, sample_size=n, gof_statistic=ks)


def r_squared(flows: Sequence[float], metric_values: Sequence[float]) -> float:
    """Square of the Pearson correlation coefficient."""
    n = len(flows)
    if n != len(metric_values):
        raise StatsError("length mismatch: %d vs %d" % (n, len(metric_values)))
    if n < 3:
        raise StatsError("correlation needs at least 3 samples, got %d" % n)
    mean_f = sum(flows) / n
    mean_m = sum(metric_values) / n
    cov = var_f = var_m = 0.0
    for f, m in zip(flows, metric_values):
        df = f - mean_f
        dm = m - mean_m
        cov += df * dm
        var_f += df * df
        var_m += dm * dm
    if var_f <= 0.0 or var_m <= 0.0:
        raise StatsError("correlation undefined for constant input")
    r2 = (cov * cov) / (var_f * var_m)
    return min(r2, 1.0)


def _log_beta(a: float, b: float) -> float:
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _betacf(a: float, b: float, x: float) -> float:
    # continued fraction for the regularized incomplete beta (Lentz)
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-14:
            break
    return h


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    front = math.exp(a * math.log(x) + b * math.log(1.0 - x) - _log_beta(a, b))
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_two_tailed_p(t: float, df: int) -> float:
    """Two-tailed p-value of a Student-t statistic."""
    if df < 1:
        raise StatsError("degrees of freedom must be >= 1")
    x = df / (df + t * t)
    return regularized_incomplete_beta(df / 2.0, 0.5, x)


_NORMAL_CRITICAL_5PCT = 1.959963984540054


@lru_cache(maxsize=None)
def t_critical_5pct(df: int) -> float:
    """Two-tailed 5% critical value of the t distribution.

    Values for df <= 200 come from the internal table (inverted from the
    incomplete-beta CDF); beyond that the normal approximation applies.
    """
    if df < 1:
        raise StatsError("degrees of freedom must be >= 1")
    if df > 200:
        return _NORMAL_CRITICAL_5PCT
    lo, hi = 0.0, 1000.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if student_t_two_tailed_p(mid, df) > 0.05:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12:
            break
    return 0.5 * (lo + hi)


def correlation_t_test(r: float, n: int) -> Tuple[float, bool]:
    """t statistic for a Pearson coefficient and its 5% significance.

    A perfect correlation reports an infinite t and is significant.
    """
    if n < 3:
        raise StatsError("t test needs n >= 3, got %d" % n)
    if not (-1.0 <= r <= 1.0):
        raise StatsError("correlation coefficient out of range: %r" % (r,))
    if abs(r) == 1.0:
        return math.inf, True
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return t, abs(t) > t_critical_5pct(n - 2)


@dataclass(frozen=True)
class GateObservation:
    location: Point
    flow: float
    assigned_unit: Optional[int] = None
    distance: Optional[float] = None

    def __post_init__(self):
        if not (self.flow >= 0.0):
            raise StatsError("gate flow must be >= 0, got %r" % (self.flow,))


def _unit_distance(p: Point, unit) -> float:
    geom = getattr(unit, "geometry", None)
    if isinstance(geom, Polyline):
        pts = geom.points
        return min(point_segment_distance(p, pts[i], pts[i + 1])
                   for i in range(len(pts) - 1))
    return point_segment_distance(p, unit.start, unit.end)


def assign_gates(gates: Sequence[GateObservation], units,
                 max_distance: float) -> List[GateObservation]:
    """Attach each gate to its nearest unit within ``max_distance``.

    Ties go to the smaller unit id; gates too far from everything stay
    unassigned.
    """
    units = list(units)
    out: List[GateObservation] = []
    for gate in gates:
        best_id: Optional[int] = None
        best_d = math.inf
        for unit in units:
            d = _unit_distance(gate.location, unit)
            if d < best_d or (d == best_d and best_id is not None and unit.id < best_id):
                best_d = d
                best_id = unit.id
        if best_id is not None and best_d <= max_distance:
            out.append(replace(gate, assigned_unit=best_id, distance=best_d))
        else:
            out.append(replace(gate, assigned_unit=None, distance=None))
    return out
