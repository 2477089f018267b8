"""Cantilever beam tip deflection w = 4 F L^3 / (E h^3 b).

Units are kN and mm throughout. The deflection is a monomial in the
parameters, so gradient and Hessian follow from the exponents:
dw/dx_k = w e_k / x_k and d2w/dx_k dx_l = w (e_k e_l - delta_kl e_k) / (x_k x_l).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace

import numpy as np

from .errors import ConfigurationError, ParameterDomainError
from .propagation import ObjectiveModel

PARAMETERS = ("F", "L", "E", "h", "b")
EXPONENTS = {"F": 1.0, "L": 3.0, "E": -1.0, "h": -3.0, "b": -1.0}


@dataclass(frozen=True)
class BeamParams:
    F: float = 0.1
    L: float = 1000.0
    E: float = 70.0
    h: float = 30.0
    b: float = 30.0

    def __post_init__(self):
        for name in PARAMETERS:
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and v > 0 and np.isfinite(v)):
                raise ParameterDomainError(f"beam parameter {name} must be a positive number, got {v!r}")

    @classmethod
    def from_mapping(cls, values) -> "BeamParams":
        unknown = set(values) - set(PARAMETERS)
        if unknown:
            raise ConfigurationError(f"unknown beam parameters {sorted(unknown)}")
        try:
            return cls(**{k: float(v) for k, v in values.items()})
        except (TypeError, ValueError) as exc:
            raise ParameterDomainError(f"non-numeric beam parameter: {exc}") from None

    def as_dict(self) -> dict:
        return asdict(self)

    def with_values(self, **kw) -> "BeamParams":
        return replace(self, **kw)


def tip_deflection(p: BeamParams) -> float:
    return 4.0 * p.F * p.L ** 3 / (p.E * p.h ** 3 * p.b)


def tip_deflection_model(nominal: BeamParams, random_names) -> ObjectiveModel:
    """Deflection as a function of the parameters in ``random_names``.

    The remaining parameters stay at their nominal values. Gradient and
    Hessian are analytic; ``values`` is vectorized over rows.
    """
    names = tuple(random_names)
    if not names:
        raise ConfigurationError("at least one random parameter is required")
    unknown = [n for n in names if n not in PARAMETERS]
    if unknown:
        raise ConfigurationError(f"unknown beam parameters {unknown}; choose from {list(PARAMETERS)}")
    if len(set(names)) != len(names):
        raise ConfigurationError(f"duplicate random parameters {list(names)}")
    fixed = nominal.as_dict()
    e = np.array([EXPONENTS[n] for n in names])

    def full(x):
        vals = dict(fixed)
        vals.update(zip(names, x))
        return vals

    def value(x):
        v = full(x)
        return 4.0 * v["F"] * v["L"] ** 3 / (v["E"] * v["h"] ** 3 * v["b"])

    def gradient(x):
        return value(x) * e / np.asarray(x, dtype=float)

    def hessian(x):
        x = np.asarray(x, dtype=float)
        return value(x) * (np.outer(e, e) - np.diag(e)) / np.outer(x, x)

    def batch(points):
        cols = {k: np.full(points.shape[0], v) for k, v in fixed.items()}
        for i, n in enumerate(names):
            cols[n] = points[:, i]
        return 4.0 * cols["F"] * cols["L"] ** 3 / (cols["E"] * cols["h"] ** 3 * cols["b"])

    return ObjectiveModel(value, len(names), gradient, hessian, batch, names)
