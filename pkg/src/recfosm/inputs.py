"""Random input vectors: independent or correlated marginals, or raw data."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import special

from .distributions import Distribution, Exactness, MomentSet
from .errors import ConfigurationError, EstimatorUndefinedError, ParameterDomainError

PSD_TOL = 1e-10


def check_psd(matrix: np.ndarray, what: str = "matrix") -> None:
    """Raise unless ``matrix`` is symmetric positive semidefinite within PSD_TOL."""
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ParameterDomainError(f"{what} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ParameterDomainError(f"{what} has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if not np.allclose(m, m.T, rtol=0.0, atol=PSD_TOL * scale):
        raise ParameterDomainError(f"{what} is not symmetric")
    if m.size and np.linalg.eigvalsh(0.5 * (m + m.T)).min() < -PSD_TOL * scale:
        raise ParameterDomainError(f"{what} is not positive semidefinite")


def _default_names(n):
    return tuple(f"x{i}" for i in range(n))


@dataclass(frozen=True, eq=False)
class RandomInput:
    """A random vector X backed either by distributions or by realizations.

    Distribution-backed inputs hold one marginal per coordinate and an
    optional correlation matrix. The correlation is used as given for the
    covariance seen by the Taylor estimators, and as the correlation of the
    Gaussian copula that couples the marginals when sampling.

    Data-backed inputs hold a (rows x dimension) matrix of realizations; all
    statistics are empirical, with the 1/(n-1) covariance normalization.
    """

    names: tuple[str, ...]
    marginals: tuple[Distribution, ...] | None = None
    correlation: np.ndarray | None = None
    samples: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if (self.marginals is None) == (self.samples is None):
            raise ConfigurationError("RandomInput needs exactly one of marginals or samples")
        dim = len(self.marginals) if self.marginals is not None else np.shape(self.samples)[1]
        if len(self.names) != dim:
            raise ConfigurationError(f"{len(self.names)} names for dimension {dim}")
        if len(set(self.names)) != dim:
            raise ConfigurationError(f"duplicate parameter names {self.names}")
        if self.correlation is not None:
            if self.samples is not None:
                raise ConfigurationError("correlation only applies to distribution-backed inputs")
            r = np.array(self.correlation, dtype=float)
            if r.shape != (dim, dim):
                raise ParameterDomainError(f"correlation must be {dim}x{dim}, got {r.shape}")
            check_psd(r, "correlation")
            if not np.allclose(np.diag(r), 1.0):
                raise ParameterDomainError("correlation diagonal must be 1")
            r.setflags(write=False)
            object.__setattr__(self, "correlation", r)

    @classmethod
    def independent(cls, marginals: Sequence[Distribution], names: Sequence[str] | None = None):
        marginals = tuple(marginals)
        return cls(tuple(names) if names else _default_names(len(marginals)), marginals)

    @classmethod
    def correlated(cls, marginals, correlation, names=None):
        marginals = tuple(marginals)
        return cls(tuple(names) if names else _default_names(len(marginals)), marginals,
                   correlation=np.asarray(correlation, dtype=float))

    @classmethod
    def from_samples(cls, samples, names=None):
        data = np.array(samples, dtype=float)
        if data.ndim == 1:
            data = data[:, None]
        if data.ndim != 2:
            raise ParameterDomainError("samples must be a 2-D array, rows = realizations")
        if data.shape[0] < 2:
            raise EstimatorUndefinedError(
                f"{data.shape[0]} realization(s): the 1/(n-1) covariance needs at least 2")
        if not np.all(np.isfinite(data)):
            raise ParameterDomainError("samples contain non-finite values")
        data.setflags(write=False)
        return cls(tuple(names) if names else _default_names(data.shape[1]), samples=data)

    # -------------------------------------------------------------------

    @property
    def dimension(self) -> int:
        return len(self.names)

    @property
    def is_data_backed(self) -> bool:
        return self.samples is not None

    @property
    def is_independent(self) -> bool:
        if self.is_data_backed:
            return self.dimension == 1
        return self.correlation is None or np.array_equal(self.correlation, np.eye(self.dimension))

    @property
    def sample_count(self) -> int | None:
        return None if self.samples is None else self.samples.shape[0]

    def marginal_moments(self, max_order: int = 2) -> list[MomentSet]:
        if not self.is_data_backed:
            return [d.moments(max_order) for d in self.marginals]
        out = []
        n = self.samples.shape[0]
        for col in self.samples.T:
            mean = col.mean()
            dev = col - mean
            var = dev.var(ddof=1)
            mu3 = np.mean(dev ** 3) if max_order >= 3 else None
            mu4 = np.mean(dev ** 4) if max_order >= 4 else None
            out.append(MomentSet(float(mean), float(var), mu3, mu4, Exactness.SAMPLED, n))
        return out

    @property
    def mean(self) -> np.ndarray:
        if self.is_data_backed:
            return self.samples.mean(axis=0)
        return np.array([m.mean for m in self.marginal_moments()])

    @property
    def covariance(self) -> np.ndarray:
        if self.is_data_backed:
            return np.atleast_2d(np.cov(self.samples, rowvar=False, ddof=1))
        var = np.array([m.variance for m in self.marginal_moments()])
        if self.correlation is None:
            return np.diag(var)
        sd = np.sqrt(var)
        cov = self.correlation * np.outer(sd, sd)
        np.fill_diagonal(cov, var)
        return cov

    def draw(self, count: int, seed) -> np.ndarray:
        """(count x dimension) realizations.

        Data-backed inputs return their first ``count`` rows unchanged.
        Independent marginals are drawn from per-coordinate streams spawned
        from ``seed``; correlated ones through a Gaussian copula.
        """
        count = int(count)
        if count < 1:
            raise ParameterDomainError(f"count must be >= 1, got {count}")
        if self.is_data_backed:
            if count > self.samples.shape[0]:
                raise ConfigurationError(
                    f"requested {count} draws but only {self.samples.shape[0]} realizations are available")
            return self.samples[:count]
        if self.correlation is None:
            children = np.random.SeedSequence(seed).spawn(self.dimension)
            return np.column_stack([d.sample(count, np.random.default_rng(s))
                                    for d, s in zip(self.marginals, children)])
        rng = np.random.default_rng(seed)
        chol = np.linalg.cholesky(self.correlation + 1e-14 * np.eye(self.dimension))
        z = rng.standard_normal((count, self.dimension)) @ chol.T
        u = special.ndtr(z)
        u = np.minimum(u, np.nextafter(1.0, 0.0))
        return np.column_stack([d.inverse_cdf(u[:, i]) for i, d in enumerate(self.marginals)])
