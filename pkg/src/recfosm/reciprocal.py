"""Moments of the reciprocal variable Z = 1/X.

Four routes lead to the mean vector and covariance matrix of Z:

* ``reciprocal_analytic``: an exact reciprocal law (X ~ F(m, n) gives
  Z ~ F(n, m));
* ``reciprocal_moments_quadrature``: one-dimensional integrals of the
  transformed density f_Z(z) = f_X(1/z) / z**2;
* ``empirical_reciprocal_moments``: sample mean and unbiased covariance of
  componentwise reciprocals of realizations;
* ``sampled_reciprocal_moments``: draw realizations of a (possibly
  correlated) input and fall back to the empirical route.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .distributions import Distribution, Family
from .errors import (
    DivisionDomainError,
    EstimatorUndefinedError,
    ParameterDomainError,
    QuadratureError,
    UnsupportedConfigurationError,
    UnsupportedSupportError,
)
from .inputs import RandomInput, check_psd
from .numerics import integrate_semi_infinite

QUADRATURE_TOL = 1e-9

# probabilities whose quantiles, mapped through 1/x, split the integration
# range so that narrow peaks (low-CoV inputs) are never stepped over
_SPLIT_PROBS = (1e-12, 1e-6, 1e-3, 0.02, 0.16, 0.5, 0.84, 0.98, 0.999, 1 - 1e-6, 1 - 1e-12)


class Source(str, enum.Enum):
    ANALYTIC_PAIR = "AnalyticPair"
    QUADRATURE = "Quadrature"
    EMPIRICAL = "Empirical"
    SAMPLED = "Sampled"


@dataclass(frozen=True, eq=False)
class ReciprocalMoments:
    """Mean vector and covariance of the substituted variable.

    ``reciprocal[i]`` tells whether coordinate i holds Z_i = 1/X_i or the
    untouched X_i (mixed substitution); it defaults to all True.
    """

    mean_z: np.ndarray
    cov_z: np.ndarray
    source: Source
    diagnostics: dict = field(default_factory=dict)
    reciprocal: tuple[bool, ...] | None = None

    def __post_init__(self):
        m = np.atleast_1d(np.asarray(self.mean_z, dtype=float))
        c = np.atleast_2d(np.asarray(self.cov_z, dtype=float))
        if c.shape != (m.size, m.size):
            raise ParameterDomainError(f"cov_z shape {c.shape} does not match mean_z length {m.size}")
        check_psd(c, "cov_z")
        m.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "mean_z", m)
        object.__setattr__(self, "cov_z", c)
        mask = (True,) * m.size if self.reciprocal is None else tuple(bool(r) for r in self.reciprocal)
        if len(mask) != m.size:
            raise ParameterDomainError("reciprocal mask length does not match mean_z")
        object.__setattr__(self, "reciprocal", mask)
        object.__setattr__(self, "source", Source(self.source))

    @property
    def dimension(self) -> int:
        return self.mean_z.size

    @property
    def var_z(self) -> np.ndarray:
        return np.diag(self.cov_z).copy()

    def to_dict(self) -> dict:
        out = {"mean_z": self.mean_z.tolist(), "cov_z": self.cov_z.tolist(),
               "source": self.source.value, "diagnostics": self.diagnostics}
        if not all(self.reciprocal):
            out["reciprocal"] = list(self.reciprocal)
        return out


def _require_positive_support(dist: Distribution) -> None:
    lo, _ = dist.support()
    if lo < 0:
        raise UnsupportedSupportError(
            f"{dist.family.value} support starts at {lo}: reciprocal moments need support in (0, inf)")


def reciprocal_pdf(dist: Distribution) -> Callable:
    """Density of Z = 1/X: z -> f_X(1/z) / z**2 for z > 0, zero elsewhere."""
    _require_positive_support(dist)

    def f_z(z):
        za = np.asarray(z, dtype=float)
        flat = np.atleast_1d(za)
        out = np.zeros_like(flat)
        pos = flat > 0
        zp = flat[pos]
        with np.errstate(over="ignore"):
            out[pos] = dist.pdf(1.0 / zp) / (zp * zp)
        out[~np.isfinite(out)] = 0.0
        return float(out[0]) if za.ndim == 0 else out.reshape(za.shape)

    return f_z


def _z_breakpoints(dist: Distribution) -> list[float]:
    xs = list(np.atleast_1d(dist.inverse_cdf(np.array(_SPLIT_PROBS))))
    xs.append(dist.mode())
    xs.extend(dist.support())
    return sorted({1.0 / x for x in xs if x > 0 and math.isfinite(x)})


def reciprocal_moments_quadrature(dist: Distribution, tol_rel: float = QUADRATURE_TOL) -> ReciprocalMoments:
    """Mean and variance of 1/X by adaptive quadrature over z in (0, inf).

    mean_z = int (1/z) f_X(1/z) dz. The variance integrates the centred
    integrand (z - mean_z)**2 f_Z(z); it equals int f_X(1/z) dz - mean_z**2
    but does not lose digits to cancellation for low-CoV inputs.

    Raises:
        UnsupportedSupportError: support reaching below zero.
        QuadratureError: divergent integral (e.g. density positive at x=0).
    """
    _require_positive_support(dist)
    pts = _z_breakpoints(dist)
    f_x = dist.pdf

    def mean_integrand(z):
        return f_x(1.0 / z) / z if z > 0 else 0.0

    norm = integrate_semi_infinite(lambda z: f_x(1.0 / z) / (z * z) if z > 0 else 0.0,
                                   tol_rel, pts)
    try:
        mean = integrate_semi_infinite(mean_integrand, tol_rel, pts)
    except QuadratureError as exc:
        raise QuadratureError(f"mean of 1/X does not converge for {dist}",
                              exc.partial_value, exc.residual) from None
    mu = mean.value

    def var_integrand(z):
        return (z - mu) ** 2 * f_x(1.0 / z) / (z * z) if z > 0 else 0.0

    try:
        var = integrate_semi_infinite(var_integrand, tol_rel, pts)
    except QuadratureError as exc:
        raise QuadratureError(f"variance of 1/X does not converge for {dist}",
                              exc.partial_value, exc.residual) from None
    diagnostics = {
        "quadrature_residual": mean.abs_residual + var.abs_residual,
        "normalization_error": abs(norm.value - 1.0),
        "evaluations": norm.evaluations + mean.evaluations + var.evaluations,
    }
    return ReciprocalMoments([mu], [[var.value]], Source.QUADRATURE, diagnostics)


def reciprocal_analytic(dist: Distribution) -> Distribution | None:
    """Exact law of 1/X when a known pair applies, else None.

    Only X ~ c * F(m, n) is implemented: 1/X ~ (1/c) * F(n, m).
    """
    if dist.family is Family.FISHER_F and dist.shift == 0.0:
        m, n = dist.params
        return Distribution.fisher_f(n, m, scale=1.0 / dist.scale)
    return None


def reciprocal_moments(dist: Distribution, tol_rel: float = QUADRATURE_TOL) -> ReciprocalMoments:
    """Analytic pair when available, quadrature otherwise."""
    pair = reciprocal_analytic(dist)
    if pair is not None:
        ms = pair.moments(2)
        return ReciprocalMoments([ms.mean], [[ms.variance]], Source.ANALYTIC_PAIR,
                                 {"distribution": pair.to_record()})
    return reciprocal_moments_quadrature(dist, tol_rel)


def _as_mask(reciprocal, dim):
    if reciprocal is None:
        return (True,) * dim
    mask = tuple(bool(r) for r in reciprocal)
    if len(mask) != dim:
        raise ParameterDomainError(f"reciprocal mask has {len(mask)} entries for dimension {dim}")
    return mask


def empirical_reciprocal_moments(samples, reciprocal: Sequence[bool] | None = None) -> ReciprocalMoments:
    """Sample mean and unbiased covariance of z_i^(k) = 1/x_i^(k).

    Rows are realizations. Columns with ``reciprocal[i]`` False are used
    as they are (mixed substitution).
    """
    x = np.array(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n, dim = x.shape
    if n < 2:
        raise EstimatorUndefinedError(f"{n} realization(s): the 1/(n-1) covariance needs at least 2")
    mask = np.array(_as_mask(reciprocal, dim))
    sub = x[:, mask]
    zeros = np.argwhere(sub == 0.0)
    if zeros.size:
        row, col = zeros[0]
        col = int(np.flatnonzero(mask)[col])
        raise DivisionDomainError(f"zero entry at row {row}, column {col}: 1/x undefined",
                                  row=int(row), column=col)
    for j in np.flatnonzero(mask):
        col = x[:, j]
        if col.min() < 0 < col.max():
            raise UnsupportedSupportError(f"column {j} mixes signs: reciprocal moments diverge")
    z = x.copy()
    z[:, mask] = 1.0 / x[:, mask]
    mean_z = z.mean(axis=0)
    cov_z = np.atleast_2d(np.cov(z, rowvar=False, ddof=1))
    return ReciprocalMoments(mean_z, cov_z, Source.EMPIRICAL, {"sample_count": n},
                             tuple(bool(m) for m in mask))


def sampled_reciprocal_moments(inp: RandomInput, count: int, seed: int,
                               reciprocal: Sequence[bool] | None = None) -> ReciprocalMoments:
    """Draw ``count`` realizations of ``inp`` and estimate empirically."""
    if count < 2:
        raise EstimatorUndefinedError(f"count={count}: the 1/(n-1) covariance needs at least 2")
    draws = inp.draw(count, seed)
    est = empirical_reciprocal_moments(draws, reciprocal)
    return ReciprocalMoments(est.mean_z, est.cov_z, Source.SAMPLED,
                             {"sample_count": int(count), "seed": seed}, est.reciprocal)


def reciprocal_moments_for(inp: RandomInput, reciprocal: Sequence[bool] | None = None,
                           count: int = 10**6, seed: int = 0,
                           tol_rel: float = QUADRATURE_TOL) -> ReciprocalMoments:
    """Moments of the substituted vector for any kind of ``RandomInput``.

    Data-backed inputs go through the empirical estimators. Independent
    marginals are handled coordinate by coordinate (analytic pair, then
    quadrature; unsubstituted coordinates keep their own moments).
    Correlated marginals need the joint law and take the sampled route
    with ``count`` draws.
    """
    mask = _as_mask(reciprocal, inp.dimension)
    if inp.is_data_backed:
        return empirical_reciprocal_moments(inp.samples, mask)
    if not inp.is_independent:
        return sampled_reciprocal_moments(inp, count, seed, mask)
    means, variances, sources, diags = [], [], [], []
    for dist, sub in zip(inp.marginals, mask):
        if sub:
            rm = reciprocal_moments(dist, tol_rel)
            means.append(rm.mean_z[0])
            variances.append(rm.cov_z[0, 0])
            sources.append(rm.source)
            diags.append(rm.diagnostics)
        else:
            ms = dist.moments(2)
            means.append(ms.mean)
            variances.append(ms.variance)
            diags.append({"moments": "analytic"})
    if not sources:
        raise UnsupportedConfigurationError("no coordinate selected for reciprocal substitution")
    source = sources[0] if len(set(sources)) == 1 else Source.QUADRATURE
    return ReciprocalMoments(means, np.diag(variances), source,
                             {"per_coordinate": dict(zip(inp.names, diags))}, mask)
