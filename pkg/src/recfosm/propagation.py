"""Estimators of the mean and standard deviation of g(X).

``fosm``      first-order expansion at the input mean.
``sofm``      second-order mean, second-order fourth-moment variance.
``rec_fosm``  first-order expansion in z = 1/x at the mean of Z.
``monte_carlo`` sampling reference with standard errors.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    ConfigurationError,
    DivisionDomainError,
    ModelError,
    UnsupportedConfigurationError,
)
from .inputs import RandomInput
from .numerics import finite_diff
from .reciprocal import ReciprocalMoments, reciprocal_moments_for


class Method(str, enum.Enum):
    FOSM = "FOSM"
    SOFM = "SOFM"
    REC_FOSM = "RecFOSM"
    MONTE_CARLO = "MonteCarlo"


METHOD_KEYS = {"fosm": Method.FOSM, "sofm": Method.SOFM,
               "recfosm": Method.REC_FOSM, "mc": Method.MONTE_CARLO}


class ObjectiveModel:
    """Scalar objective g(x) with gradient and optional Hessian.

    Missing derivatives fall back to central finite differences. ``values``
    evaluates a batch of points (rows); pass a vectorized ``batch`` callable
    to avoid the per-row Python loop in Monte Carlo runs.
    """

    def __init__(self, value: Callable, dimension: int, gradient: Callable | None = None,
                 hessian: Callable | None = None, batch: Callable | None = None,
                 names=None):
        if dimension < 1:
            raise ConfigurationError(f"dimension must be >= 1, got {dimension}")
        self.dimension = int(dimension)
        self._value = value
        self._gradient = gradient
        self._hessian = hessian
        self._batch = batch
        self.names = tuple(names) if names is not None else tuple(f"x{i}" for i in range(dimension))

    @property
    def has_analytic_gradient(self) -> bool:
        return self._gradient is not None

    def _point(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise ModelError(f"expected a point of dimension {self.dimension}, got shape {x.shape}", point=x)
        return x

    def value(self, x) -> float:
        x = self._point(x)
        y = float(self._value(x))
        if not math.isfinite(y):
            raise ModelError(f"non-finite model value {y} at {x.tolist()}", point=x)
        return y

    def gradient(self, x) -> np.ndarray:
        x = self._point(x)
        if self._gradient is None:
            return finite_diff(self._value, x, "gradient")
        g = np.asarray(self._gradient(x), dtype=float).reshape(self.dimension)
        if not np.all(np.isfinite(g)):
            raise ModelError(f"non-finite gradient at {x.tolist()}", point=x)
        return g

    def hessian_diag(self, x) -> np.ndarray:
        x = self._point(x)
        if self._hessian is None:
            return finite_diff(self._value, x, "hessian_diag")
        h = np.asarray(self._hessian(x), dtype=float).reshape(self.dimension, self.dimension)
        return np.diag(h).copy()

    def values(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if self._batch is not None:
            out = np.asarray(self._batch(pts), dtype=float)
        else:
            out = np.array([self._value(p) for p in pts], dtype=float)
        bad = np.flatnonzero(~np.isfinite(out))
        if bad.size:
            i = int(bad[0])
            raise ModelError(f"non-finite model value on draw {i} at {pts[i].tolist()}",
                             point=pts[i], index=i)
        return out


@dataclass(frozen=True)
class MomentEstimate:
    mean: float
    sd: float
    method: Method
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.sd >= 0:
            raise ValueError(f"sd must be >= 0, got {self.sd}")
        object.__setattr__(self, "method", Method(self.method))

    def to_dict(self) -> dict:
        return {"method": self.method.value, "mean": self.mean, "sd": self.sd, "meta": self.meta}


def _quadratic_form(grad: np.ndarray, cov: np.ndarray) -> float:
    return float(grad @ cov @ grad)


def _sd_from_var(var: float) -> float:
    # round-off can push an exactly-zero quadratic form slightly negative
    return math.sqrt(max(var, 0.0))


def _check_dims(model: ObjectiveModel, dim: int) -> None:
    if model.dimension != dim:
        raise ConfigurationError(f"model has dimension {model.dimension}, input has {dim}")


def fosm(model: ObjectiveModel, inp: RandomInput) -> MomentEstimate:
    """mean = g(mu_X), var = grad^T cov(X) grad, both at mu_X."""
    _check_dims(model, inp.dimension)
    mu = inp.mean
    g0 = model.value(mu)
    grad = model.gradient(mu)
    var = _quadratic_form(grad, inp.covariance)
    return MomentEstimate(g0, _sd_from_var(var), Method.FOSM,
                          {"evaluation_point": mu.tolist()})


def rec_fosm(model: ObjectiveModel, recip: ReciprocalMoments) -> MomentEstimate:
    """First-order estimate after substituting z_i = 1/x_i.

    g and its gradient are evaluated once, at x*_i = 1/mu_{Z_i} (or mu_{X_i}
    for coordinates left unsubstituted). The chain rule with
    dx_i/dz_i = -1/z_i**2 gives the z-gradient used in the quadratic form
    with cov(Z).
    """
    _check_dims(model, recip.dimension)
    mask = np.array(recip.reciprocal)
    mz = recip.mean_z
    zero = np.flatnonzero(mask & (mz == 0.0))
    if zero.size:
        raise DivisionDomainError(f"mean of Z is zero at coordinate {int(zero[0])}",
                                  column=int(zero[0]))
    x_star = np.where(mask, 1.0 / np.where(mask, mz, 1.0), mz)
    g0 = model.value(x_star)
    grad_x = model.gradient(x_star)
    dxdz = np.where(mask, -1.0 / np.where(mask, mz, 1.0) ** 2, 1.0)
    grad_z = grad_x * dxdz
    var = _quadratic_form(grad_z, recip.cov_z)
    return MomentEstimate(g0, _sd_from_var(var), Method.REC_FOSM,
                          {"evaluation_point": x_star.tolist(),
                           "reciprocal_source": recip.source.value})


def sofm(model: ObjectiveModel, inp: RandomInput) -> MomentEstimate:
    """Second-order estimate for independent inputs.

    mean = g + 1/2 sum H_ii var_i
    var  = sum g_i^2 var_i + sum g_i H_ii mu3_i + 1/4 sum H_ii^2 (mu4_i - var_i^2)

    Only the Hessian diagonal enters, so mixed second derivatives are
    neglected; with independent inputs their contribution to the mean is
    zero anyway.
    """
    _check_dims(model, inp.dimension)
    if not inp.is_independent:
        raise UnsupportedConfigurationError("sofm supports independent inputs only")
    ms = inp.marginal_moments(4)
    mu = inp.mean
    var = np.array([m.variance for m in ms])
    mu3 = np.array([m.mu3 for m in ms])
    mu4 = np.array([m.mu4 for m in ms])
    g0 = model.value(mu)
    grad = model.gradient(mu)
    hd = model.hessian_diag(mu)
    mean = g0 + 0.5 * float(np.sum(hd * var))
    first = _quadratic_form(grad, np.diag(var))
    second = float(np.sum(grad * hd * mu3)) + 0.25 * float(np.sum(hd * hd * (mu4 - var * var)))
    return MomentEstimate(mean, _sd_from_var(first + second), Method.SOFM,
                          {"evaluation_point": mu.tolist(),
                           "second_order_variance": second})


def sample_standard_errors(values: np.ndarray) -> tuple[float, float, float, float]:
    """(mean, sd, se of mean, se of sd) of a sample.

    The sd error uses the delta method, se(s) = sqrt((m4 - m2**2)/N) / (2 s),
    with m2, m4 the central sample moments.
    """
    n = values.size
    mean = float(np.mean(values))
    dev = values - mean
    sd = float(np.std(values, ddof=1))
    m2 = float(np.mean(dev ** 2))
    m4 = float(np.mean(dev ** 4))
    se_mean = sd / math.sqrt(n)
    se_sd = math.sqrt(max(m4 - m2 * m2, 0.0) / n) / (2.0 * sd) if sd > 0 else 0.0
    return mean, sd, se_mean, se_sd


def monte_carlo(model: ObjectiveModel, inp: RandomInput, count: int, seed: int) -> MomentEstimate:
    """Empirical mean and sd of g over ``count`` draws.

    Data-backed inputs use their first ``count`` realizations directly.
    """
    _check_dims(model, inp.dimension)
    if count < 2:
        raise ConfigurationError(f"count must be >= 2, got {count}")
    draws = inp.draw(count, seed)
    values = model.values(draws)
    mean, sd, se_mean, se_sd = sample_standard_errors(values)
    meta = {"count": int(count), "se_mean": se_mean, "se_sd": se_sd,
            "draws": "data" if inp.is_data_backed else "sampled"}
    if not inp.is_data_backed:
        meta["seed"] = seed
    return MomentEstimate(mean, sd, Method.MONTE_CARLO, meta)


def estimate(key: str, model: ObjectiveModel, inp: RandomInput, *, mc_count: int = 10**5,
             seed: int = 0, substitute=None) -> MomentEstimate:
    """Run the estimator named by ``key`` ("fosm", "sofm", "recfosm", "mc").

    ``substitute`` is a boolean mask or list of names selecting which
    coordinates recfosm replaces by their reciprocals (default: all).
    """
    try:
        method = METHOD_KEYS[key.lower()]
    except KeyError:
        raise ConfigurationError(f"unknown method {key!r}; choose from {sorted(METHOD_KEYS)}") from None
    if method is Method.FOSM:
        return fosm(model, inp)
    if method is Method.SOFM:
        return sofm(model, inp)
    if method is Method.MONTE_CARLO:
        return monte_carlo(model, inp, mc_count, seed)
    mask = substitution_mask(inp, substitute)
    return rec_fosm(model, reciprocal_moments_for(inp, mask, count=mc_count, seed=seed))


def substitution_mask(inp: RandomInput, substitute) -> tuple[bool, ...]:
    if substitute is None:
        return (True,) * inp.dimension
    items = list(substitute)
    if all(isinstance(s, (bool, np.bool_)) for s in items):
        if len(items) != inp.dimension:
            raise ConfigurationError("substitution mask length does not match input dimension")
        return tuple(bool(s) for s in items)
    unknown = [s for s in items if s not in inp.names]
    if unknown:
        raise ConfigurationError(f"cannot substitute unknown parameters {unknown}")
    return tuple(name in items for name in inp.names)
