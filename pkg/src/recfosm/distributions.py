"""Parametric scalar distributions.

A ``Distribution`` is an immutable value: a family, its parameters, and an
affine map ``X = scale * Y + shift`` applied to the standard variate ``Y``
of the family. Densities, CDFs, quantiles, samplers and analytic central
moments up to order four are provided for every family.

Weibull uses the rate/shape form ``f(y) = a*b*y**(b-1)*exp(-a*y**b)``
rather than the scale/shape form found in most libraries.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy import special

from .errors import NonexistentMomentError, NumericError, ParameterDomainError
from .numerics import find_root_bracketed

QUANTILE_TOL = 1e-10


class Family(str, enum.Enum):
    WEIBULL = "Weibull"
    FISHER_F = "FisherF"
    NORMAL = "Normal"
    LOGNORMAL = "LogNormal"
    GAMMA = "Gamma"
    UNIFORM = "Uniform"

    @classmethod
    def parse(cls, name: str) -> "Family":
        key = str(name).replace("_", "").replace("-", "").replace(" ", "").lower()
        aliases = {"f": cls.FISHER_F, "fdist": cls.FISHER_F, "fisherf": cls.FISHER_F,
                   "gauss": cls.NORMAL, "gaussian": cls.NORMAL}
        if key in aliases:
            return aliases[key]
        for fam in cls:
            if fam.value.lower() == key:
                return fam
        raise ParameterDomainError(f"unknown distribution family {name!r}")


PARAM_NAMES: dict[Family, tuple[str, str]] = {
    Family.WEIBULL: ("a", "b"),
    Family.FISHER_F: ("m", "n"),
    Family.NORMAL: ("mean", "sd"),
    Family.LOGNORMAL: ("mu", "sigma"),
    Family.GAMMA: ("shape", "rate"),
    Family.UNIFORM: ("lower", "upper"),
}


class Exactness(str, enum.Enum):
    ANALYTIC = "Analytic"
    QUADRATURE = "Quadrature"
    SAMPLED = "Sampled"


@dataclass(frozen=True)
class MomentSet:
    """Mean and central moments; ``mu3``/``mu4`` are None when not requested."""

    mean: float
    variance: float
    mu3: float | None = None
    mu4: float | None = None
    exactness: Exactness = Exactness.ANALYTIC
    sample_count: int | None = None

    @property
    def sd(self) -> float:
        return math.sqrt(self.variance)

    @property
    def cov(self) -> float:
        return self.sd / abs(self.mean)


@dataclass(frozen=True)
class Distribution:
    family: Family
    params: tuple[float, float]
    scale: float = 1.0
    shift: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family)
                           if not isinstance(self.family, Family) else self.family)
        p = tuple(float(v) for v in self.params)
        object.__setattr__(self, "params", p)
        object.__setattr__(self, "scale", float(self.scale))
        object.__setattr__(self, "shift", float(self.shift))
        _validate(self)

    # constructors ---------------------------------------------------------

    @classmethod
    def weibull(cls, a, b, scale=1.0, shift=0.0):
        return cls(Family.WEIBULL, (a, b), scale, shift)

    @classmethod
    def fisher_f(cls, m, n, scale=1.0, shift=0.0):
        return cls(Family.FISHER_F, (m, n), scale, shift)

    @classmethod
    def normal(cls, mean, sd, scale=1.0, shift=0.0):
        return cls(Family.NORMAL, (mean, sd), scale, shift)

    @classmethod
    def lognormal(cls, mu, sigma, scale=1.0, shift=0.0):
        return cls(Family.LOGNORMAL, (mu, sigma), scale, shift)

    @classmethod
    def gamma(cls, shape, rate, scale=1.0, shift=0.0):
        return cls(Family.GAMMA, (shape, rate), scale, shift)

    @classmethod
    def uniform(cls, lower, upper, scale=1.0, shift=0.0):
        return cls(Family.UNIFORM, (lower, upper), scale, shift)

    @classmethod
    def from_record(cls, record: Mapping) -> "Distribution":
        """Build from ``{"family", "params": {name: value}, "scale", "shift"}``."""
        try:
            family = Family.parse(record["family"])
            given = dict(record["params"])
        except (KeyError, TypeError) as exc:
            raise ParameterDomainError(f"distribution record needs 'family' and 'params': {exc}") from None
        names = PARAM_NAMES[family]
        missing = [k for k in names if k not in given]
        extra = [k for k in given if k not in names]
        if missing or extra:
            raise ParameterDomainError(
                f"{family.value} takes params {list(names)}; missing {missing}, unexpected {extra}")
        try:
            values = tuple(float(given[k]) for k in names)
            scale = float(record.get("scale", 1.0))
            shift = float(record.get("shift", 0.0))
        except (TypeError, ValueError) as exc:
            raise ParameterDomainError(f"non-numeric distribution field: {exc}") from None
        return cls(family, values, scale, shift)

    def to_record(self) -> dict:
        names = PARAM_NAMES[self.family]
        return {"family": self.family.value,
                "params": dict(zip(names, self.params)),
                "scale": self.scale, "shift": self.shift}

    def param(self, name: str) -> float:
        return self.params[PARAM_NAMES[self.family].index(name)]

    # convenience methods ----------------------------------------------------

    def pdf(self, x):
        return pdf(self, x)

    def cdf(self, x):
        return cdf(self, x)

    def inverse_cdf(self, u):
        return inverse_cdf(self, u)

    def moments(self, max_order: int = 4) -> MomentSet:
        return moments(self, max_order)

    def sample(self, count: int, seed) -> np.ndarray:
        return sample(self, count, seed)

    def support(self) -> tuple[float, float]:
        lo, hi = _std_support(self)
        return self.scale * lo + self.shift, self.scale * hi + self.shift

    def mode(self) -> float:
        return self.scale * _std_mode(self) + self.shift


def _validate(d: Distribution) -> None:
    if len(d.params) != 2:
        raise ParameterDomainError(f"{d.family.value} takes exactly two parameters")
    p1, p2 = d.params
    if not all(math.isfinite(v) for v in (p1, p2, d.scale, d.shift)):
        raise ParameterDomainError(f"non-finite parameter in {d}")
    if not d.scale > 0:
        raise ParameterDomainError(f"scale must be > 0, got {d.scale}")
    fam = d.family
    if fam is Family.UNIFORM:
        if not p1 < p2:
            raise ParameterDomainError(f"Uniform needs lower < upper, got ({p1}, {p2})")
    elif fam in (Family.NORMAL, Family.LOGNORMAL):
        # location parameter may be any real; spread must be positive
        if not p2 > 0:
            raise ParameterDomainError(f"{fam.value} spread parameter must be > 0, got {p2}")
    elif not (p1 > 0 and p2 > 0):
        raise ParameterDomainError(f"{fam.value} parameters must be > 0, got ({p1}, {p2})")


# standard-variate pieces ----------------------------------------------------

def _std_support(d: Distribution) -> tuple[float, float]:
    if d.family is Family.UNIFORM:
        return d.params
    if d.family is Family.NORMAL:
        return -math.inf, math.inf
    return 0.0, math.inf


def _std_mode(d: Distribution) -> float:
    p1, p2 = d.params
    fam = d.family
    if fam is Family.WEIBULL:
        return ((p2 - 1.0) / (p1 * p2)) ** (1.0 / p2) if p2 > 1 else 0.0
    if fam is Family.FISHER_F:
        return (p1 - 2.0) / p1 * p2 / (p2 + 2.0) if p1 > 2 else 0.0
    if fam is Family.NORMAL:
        return p1
    if fam is Family.LOGNORMAL:
        return math.exp(p1 - p2 * p2)
    if fam is Family.GAMMA:
        return (p1 - 1.0) / p2 if p1 > 1 else 0.0
    return 0.5 * (p1 + p2)


def _std_pdf(d: Distribution, y: np.ndarray) -> np.ndarray:
    p1, p2 = d.params
    fam = d.family
    out = np.zeros_like(y)
    if fam is Family.NORMAL:
        return np.exp(-0.5 * ((y - p1) / p2) ** 2) / (p2 * math.sqrt(2 * math.pi))
    if fam is Family.UNIFORM:
        out[(y >= p1) & (y <= p2)] = 1.0 / (p2 - p1)
        return out
    pos = y > 0
    yp = y[pos]
    with np.errstate(over="ignore", under="ignore", divide="ignore"):
        if fam is Family.WEIBULL:
            a, b = p1, p2
            out[pos] = np.exp(math.log(a * b) + (b - 1.0) * np.log(yp) - a * yp ** b)
        elif fam is Family.FISHER_F:
            m, n = p1, p2
            logf = (0.5 * m * math.log(m / n) + (0.5 * m - 1.0) * np.log(yp)
                    - 0.5 * (m + n) * np.log1p(m * yp / n) - special.betaln(0.5 * m, 0.5 * n))
            out[pos] = np.exp(logf)
        elif fam is Family.LOGNORMAL:
            mu, s = p1, p2
            out[pos] = np.exp(-0.5 * ((np.log(yp) - mu) / s) ** 2) / (yp * s * math.sqrt(2 * math.pi))
        elif fam is Family.GAMMA:
            k, r = p1, p2
            out[pos] = np.exp(k * math.log(r) + (k - 1.0) * np.log(yp) - r * yp - special.gammaln(k))
    return out


def _std_cdf(d: Distribution, y: np.ndarray) -> np.ndarray:
    p1, p2 = d.params
    fam = d.family
    if fam is Family.NORMAL:
        return special.ndtr((y - p1) / p2)
    if fam is Family.UNIFORM:
        return np.clip((y - p1) / (p2 - p1), 0.0, 1.0)
    yp = np.maximum(y, 0.0)
    with np.errstate(divide="ignore"):
        if fam is Family.WEIBULL:
            return -np.expm1(-p1 * yp ** p2)
        if fam is Family.FISHER_F:
            return special.betainc(0.5 * p1, 0.5 * p2, p1 * yp / (p1 * yp + p2))
        if fam is Family.LOGNORMAL:
            return np.where(y > 0, special.ndtr((np.log(yp) - p1) / p2), 0.0)
        return special.gammainc(p1, p2 * yp)


def _std_quantile(d: Distribution, u: np.ndarray) -> np.ndarray:
    p1, p2 = d.params
    fam = d.family
    if fam is Family.WEIBULL:
        return (-np.log1p(-u) / p1) ** (1.0 / p2)
    if fam is Family.UNIFORM:
        return p1 + u * (p2 - p1)
    if fam is Family.NORMAL:
        return p1 + p2 * special.ndtri(u)
    if fam is Family.LOGNORMAL:
        return np.exp(p1 + p2 * special.ndtri(u))
    if fam is Family.FISHER_F:
        t = special.betaincinv(0.5 * p1, 0.5 * p2, u)
        with np.errstate(divide="ignore"):
            return p2 * t / (p1 * (1.0 - t))
    return special.gammaincinv(p1, u) / p2


def _raw_moment(d: Distribution, r: int) -> float:
    """E[Y**r] of the standard variate, for the families using raw moments."""
    p1, p2 = d.params
    if d.family is Family.WEIBULL:
        return math.exp(-r / p2 * math.log(p1) + special.gammaln(1.0 + r / p2))
    raise AssertionError(d.family)


def _std_central_moments(d: Distribution, max_order: int) -> tuple[float, ...]:
    """(mean, var, mu3, mu4) of the standard variate, truncated at max_order."""
    p1, p2 = d.params
    fam = d.family
    if fam is Family.NORMAL:
        out = (p1, p2 ** 2, 0.0, 3.0 * p2 ** 4)
    elif fam is Family.UNIFORM:
        w = p2 - p1
        out = (0.5 * (p1 + p2), w * w / 12.0, 0.0, w ** 4 / 80.0)
    elif fam is Family.GAMMA:
        k, r = p1, p2
        out = (k / r, k / r ** 2, 2.0 * k / r ** 3, (3.0 * k * k + 6.0 * k) / r ** 4)
    elif fam is Family.LOGNORMAL:
        mu, s = p1, p2
        s2 = s * s
        var = math.expm1(s2) * math.exp(2 * mu + s2)
        sd = math.sqrt(var)
        skew = (math.exp(s2) + 2.0) * math.sqrt(math.expm1(s2))
        exkurt = math.exp(4 * s2) + 2 * math.exp(3 * s2) + 3 * math.exp(2 * s2) - 6.0
        out = (math.exp(mu + 0.5 * s2), var, skew * sd ** 3, (exkurt + 3.0) * var * var)
    elif fam is Family.FISHER_F:
        m, n = p1, p2
        needs = {1: 2, 2: 4, 3: 6, 4: 8}
        for order in range(1, max_order + 1):
            if not n > needs[order]:
                raise NonexistentMomentError(
                    order, f"FisherF(m={m:g}, n={n:g}) needs n > {needs[order]}")
        mean = n / (n - 2.0)
        var = 2.0 * n * n * (m + n - 2.0) / (m * (n - 2.0) ** 2 * (n - 4.0)) if max_order >= 2 else math.nan
        mu3 = mu4 = math.nan
        if max_order >= 3:
            skew = (2.0 * m + n - 2.0) * math.sqrt(8.0 * (n - 4.0)) / ((n - 6.0) * math.sqrt(m * (m + n - 2.0)))
            mu3 = skew * var ** 1.5
        if max_order >= 4:
            exkurt = 12.0 * (m * (5.0 * n - 22.0) * (m + n - 2.0) + (n - 4.0) * (n - 2.0) ** 2) / (
                m * (n - 6.0) * (n - 8.0) * (m + n - 2.0))
            mu4 = (exkurt + 3.0) * var * var
        out = (mean, var, mu3, mu4)
    else:  # Weibull, via raw moments
        m1, m2, m3, m4 = (_raw_moment(d, r) for r in (1, 2, 3, 4))
        # var via gammaln differences to keep precision at large shape
        var = m1 * m1 * math.expm1(_log_gamma_ratio(p2))
        mu3 = m3 - 3 * m1 * m2 + 2 * m1 ** 3
        mu4 = m4 - 4 * m1 * m3 + 6 * m1 * m1 * m2 - 3 * m1 ** 4
        out = (m1, var, mu3, mu4)
    return out[:max_order]


# public operations -------------------------------------------------------------

def pdf(dist: Distribution, x):
    """Density at ``x`` (scalar or array); zero outside the support."""
    xa = np.asarray(x, dtype=float)
    y = (np.atleast_1d(xa) - dist.shift) / dist.scale
    out = _std_pdf(dist, y) / dist.scale
    return float(out[0]) if xa.ndim == 0 else out.reshape(xa.shape)


def cdf(dist: Distribution, x):
    xa = np.asarray(x, dtype=float)
    y = (np.atleast_1d(xa) - dist.shift) / dist.scale
    out = _std_cdf(dist, y)
    return float(out[0]) if xa.ndim == 0 else out.reshape(xa.shape)


def inverse_cdf(dist: Distribution, u):
    """Quantile function for ``u`` in [0, 1).

    Weibull and Uniform use closed forms; Normal and LogNormal use the
    inverse of the standard normal CDF; FisherF and Gamma use the inverse
    regularized incomplete beta/gamma functions. Anything that comes back
    non-finite is refined by root finding on the CDF to ``QUANTILE_TOL``.
    """
    ua = np.asarray(u, dtype=float)
    flat = np.atleast_1d(ua)
    if np.any(~np.isfinite(flat)) or np.any(flat < 0.0) or np.any(flat >= 1.0):
        raise ParameterDomainError("inverse_cdf needs 0 <= u < 1")
    y = _std_quantile(dist, flat)
    bad = ~np.isfinite(y) & (flat > 0)
    for i in np.flatnonzero(bad):
        y[i] = _quantile_by_root(dist, flat[i])
    x = dist.scale * y + dist.shift
    return float(x[0]) if ua.ndim == 0 else x.reshape(ua.shape)


def _quantile_by_root(dist: Distribution, u: float) -> float:
    lo, hi = _std_support(dist)
    lo = -1.0 if not math.isfinite(lo) else lo
    hi = 1.0 if not math.isfinite(hi) else hi
    while _std_cdf(dist, np.array([hi]))[0] < u:
        hi *= 2.0
        if hi > 1e300:
            raise NumericError(f"quantile {u} beyond representable range")
    while _std_cdf(dist, np.array([lo]))[0] > u:
        lo = 2.0 * lo if lo < 0 else -1.0
    return find_root_bracketed(lambda y: _std_cdf(dist, np.array([y]))[0] - u, lo, hi, QUANTILE_TOL)


def moments(dist: Distribution, max_order: int = 4) -> MomentSet:
    """Analytic central moments up to ``max_order`` (2..4), after scale/shift.

    Raises:
        NonexistentMomentError: if a requested moment is infinite (FisherF
            with too few denominator degrees of freedom).
    """
    if max_order not in (2, 3, 4):
        raise ValueError("max_order must be 2, 3 or 4")
    c = _std_central_moments(dist, max_order)
    s = dist.scale
    mean = s * c[0] + dist.shift
    var = s * s * c[1]
    mu3 = s ** 3 * c[2] if max_order >= 3 else None
    mu4 = s ** 4 * c[3] if max_order >= 4 else None
    return MomentSet(mean, var, mu3, mu4, Exactness.ANALYTIC)


def sample(dist: Distribution, count: int, seed) -> np.ndarray:
    """``count`` independent draws; ``seed`` is an int or a numpy Generator.

    Weibull is drawn by inverting its CDF at uniform variates, FisherF as a
    ratio of two scaled chi-square (gamma) variates.
    """
    if int(count) != count or count < 1:
        raise ParameterDomainError(f"count must be a positive integer, got {count}")
    rng = np.random.default_rng(seed)
    p1, p2 = dist.params
    fam = dist.family
    if fam is Family.WEIBULL:
        y = _std_quantile(dist, rng.random(count))
    elif fam is Family.FISHER_F:
        num = 2.0 * rng.standard_gamma(0.5 * p1, count) / p1
        den = 2.0 * rng.standard_gamma(0.5 * p2, count) / p2
        y = num / den
    elif fam is Family.NORMAL:
        y = rng.normal(p1, p2, count)
    elif fam is Family.LOGNORMAL:
        y = np.exp(rng.normal(p1, p2, count))
    elif fam is Family.GAMMA:
        y = rng.standard_gamma(p1, count) / p2
    else:
        y = rng.uniform(p1, p2, count)
    return dist.scale * y + dist.shift


def _log_gamma_ratio(shape: float) -> float:
    """log(Gamma(1 + 2/shape) / Gamma(1 + 1/shape)**2).

    For large shapes the linear terms of the two log-gammas cancel; the
    Taylor series log Gamma(1+x) = -euler*x + sum_k (-1)^k zeta(k) x^k / k
    lets that cancellation happen analytically.
    """
    x = 1.0 / shape
    if x > 0.1:
        return special.gammaln(1 + 2 * x) - 2 * special.gammaln(1 + x)
    total = 0.0
    for k in range(2, 40):
        term = (-1) ** k * special.zeta(k) / k * (2.0 ** k - 2.0) * x ** k
        total += term
        if abs(term) < 1e-18 * abs(total):
            break
    return total


def weibull_cov(shape: float) -> float:
    """Coefficient of variation of a Weibull variate with shape ``shape``."""
    return math.sqrt(math.expm1(_log_gamma_ratio(shape)))


def weibull_from_mean_cov(mean: float, cov: float) -> Distribution:
    """Weibull with the given mean and coefficient of variation.

    The shape is found by root finding on log(shape); the result is a
    rate-1 Weibull carried by ``scale``, which avoids the under/overflow of
    the rate parameter ``a = scale**(-b)`` at large shapes.
    """
    if not mean > 0:
        raise ParameterDomainError(f"mean must be > 0, got {mean}")
    if not 0 < cov < 1:
        raise ParameterDomainError(f"cov must lie in (0, 1), got {cov}")
    target = math.log(cov)
    f = lambda t: math.log(weibull_cov(math.exp(t))) - target  # noqa: E731
    # cov(shape=1) = 1 and cov decreases monotonically with shape.
    t = find_root_bracketed(f, 0.0, math.log(1e9), tol=1e-14)
    shape = math.exp(t)
    residual = weibull_cov(shape) / cov - 1.0
    if abs(residual) > 1e-10:
        raise NumericError(f"Weibull shape solve did not converge, relative residual {residual:.3e}")
    lam = mean / math.exp(special.gammaln(1.0 + 1.0 / shape))
    return Distribution.weibull(1.0, shape, scale=lam)


def from_mean_cov(family, mean: float, cov: float) -> Distribution:
    """Distribution of ``family`` with the given mean and coefficient of variation."""
    fam = family if isinstance(family, Family) else Family.parse(family)
    if not cov > 0:
        raise ParameterDomainError(f"cov must be > 0, got {cov}")
    if fam is Family.WEIBULL:
        return weibull_from_mean_cov(mean, cov)
    if fam is Family.NORMAL:
        return Distribution.normal(mean, cov * abs(mean))
    if not mean > 0:
        raise ParameterDomainError(f"{fam.value} needs mean > 0, got {mean}")
    if fam is Family.LOGNORMAL:
        s2 = math.log1p(cov * cov)
        return Distribution.lognormal(math.log(mean) - 0.5 * s2, math.sqrt(s2))
    if fam is Family.GAMMA:
        shape = 1.0 / (cov * cov)
        return Distribution.gamma(shape, shape / mean)
    if fam is Family.UNIFORM:
        half = math.sqrt(3.0) * cov * mean
        return Distribution.uniform(mean - half, mean + half)
    raise ParameterDomainError(f"{fam.value} cannot be built from mean and cov alone")
