"""Numerical kernels: semi-infinite quadrature, bracketed root finding and
finite differences.

The quadrature and root finding wrap QUADPACK (``scipy.integrate.quad``)
and Brent's method (``scipy.optimize.brentq``) behind the error types of
this package; the finite differences use the relative steps the moment
estimators rely on.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, optimize

from .errors import BracketError, ModelError, QuadratureError

DEFAULT_EVALUATION_BUDGET = 10**6

# QUADPACK's 21-point Gauss-Kronrod rule: evaluations per subinterval.
_POINTS_PER_INTERVAL = 21
_TAIL_DECADES = 8
_MIN_DECAY = 0.05

GRADIENT_REL_STEP = 1e-6
GRADIENT_MIN_STEP = 1e-6
HESSIAN_REL_STEP = 1e-4
HESSIAN_MIN_STEP = 1e-4


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_residual: float
    evaluations: int


def _quad_piece(f, lo, hi, tol_rel, limit, tol_abs=0.0):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        out = integrate.quad(f, lo, hi, epsabs=tol_abs, epsrel=tol_rel,
                             limit=limit, full_output=1)
    value, err, info = out[0], out[1], out[2]
    if not (math.isfinite(value) and math.isfinite(err)):
        raise QuadratureError(f"non-finite integral over [{lo}, {hi}]",
                              partial_value=value, residual=err)
    message = str(caught[0].message).strip().splitlines()[0] if caught else None
    return value, err, int(info["neval"]), message


def _local_decay(f, z1, z2):
    """r = z*|f(z)| at z1, z2 and the exponent p of r ~ z**-p between them."""
    r1, r2 = abs(z1 * f(z1)), abs(z2 * f(z2))
    if r2 == 0.0:
        return r2, math.inf
    if r1 == 0.0 or not (math.isfinite(r1) and math.isfinite(r2)):
        return r2, -math.inf
    return r2, math.log(r1 / r2) / math.log(z2 / z1)


def _check_end_decay(f, c, z_low, tol_rel, total, residual):
    # Convergence at infinity needs z*f(z) -> 0, at the origin likewise as
    # z -> 0; a decay exponent near zero with non-negligible mass means the
    # integral diverges (or is too heavy-tailed to resolve).
    far = [c * 1e6, c * 1e12]
    near = [z_low * 1e-6, z_low * 1e-12]
    for (z1, z2), where in ((far, "infinity"), (near, "zero")):
        r, p = _local_decay(f, z1, z2)
        if r > 0.0 and p < _MIN_DECAY and r / _MIN_DECAY > tol_rel * abs(total):
            raise QuadratureError(
                f"integrand does not decay at {where} (z*f(z) ~ {r:.3g}, exponent {p:.3g}): divergent integral",
                partial_value=total, residual=residual)


def integrate_semi_infinite(
    f: Callable[[float], float],
    tol_rel: float = 1e-9,
    breakpoints: Sequence[float] | None = None,
    max_evaluations: int = DEFAULT_EVALUATION_BUDGET,
    check_divergence: bool = True,
) -> QuadratureResult:
    """Integrate ``f`` over (0, inf) adaptively.

    The finite part [0, c] is split at ``breakpoints`` (c being the largest
    one, or 1 when none are given). The tail [c, inf) is mapped onto [0, 1)
    with z = c + t/(1 - t), so no integrand evaluation ever happens at
    infinity.

    Args:
        f: Integrand, finite on (0, inf).
        tol_rel: Relative tolerance on the total, in [1e-12, 1e-3].
        breakpoints: Positive points where the integrand changes character
            (peaks, kinks, support ends).
        max_evaluations: Hard cap on integrand evaluations.
        check_divergence: Probe z*f(z) far out at both ends; QUADPACK's
            extrapolation can return finite values for log-divergent tails.

    Raises:
        QuadratureError: if a piece fails to converge, the combined residual
            exceeds ``tol_rel * |value|``, or the budget is exhausted.
    """
    if not 1e-12 <= tol_rel <= 1e-3:
        raise ValueError(f"tol_rel must lie in [1e-12, 1e-3], got {tol_rel}")
    pts = sorted({float(p) for p in (breakpoints or ()) if p > 0 and math.isfinite(p)})
    if not pts:
        pts = [1.0]
    c = pts[-1]
    edges = [0.0] + pts

    def tail(t):
        if t >= 1.0:
            return 0.0
        s = 1.0 - t
        return f(c + t / s) / (s * s)

    pieces = [(f, lo, hi) for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo]
    # Geometric split of the mapped tail towards t = 1 keeps algebraic
    # endpoint behaviour (slowly decaying f) confined to negligible pieces.
    t_edges = [0.0] + [1.0 - 10.0 ** -k for k in range(1, _TAIL_DECADES + 1)] + [1.0]
    pieces.extend((tail, lo, hi) for lo, hi in zip(t_edges[:-1], t_edges[1:]))
    limit = max(50, max_evaluations // (_POINTS_PER_INTERVAL * len(pieces)))

    total = 0.0
    residual = 0.0
    evaluations = 0
    troubled = []
    for g, lo, hi in pieces:
        # Once the bulk is known, pieces far out in the tail only need to be
        # resolved relative to it, not to their own (possibly subnormal) size.
        value, err, neval, message = _quad_piece(g, lo, hi, tol_rel * 0.1, limit,
                                                 tol_abs=0.01 * tol_rel * abs(total))
        total += value
        residual += err
        evaluations += neval
        if message is not None:
            troubled.append((lo, hi, err, message))
        if evaluations > max_evaluations:
            raise QuadratureError("evaluation budget exhausted",
                                  partial_value=total, residual=residual)
    # A QUADPACK warning on a piece that contributes negligibly (e.g. a
    # near-zero density region hitting roundoff) does not invalidate the total.
    for lo, hi, err, message in troubled:
        if err > 0.1 * tol_rel * abs(total):
            raise QuadratureError(f"integral over [{lo}, {hi}] did not converge: {message}",
                                  partial_value=total, residual=residual)
    if residual > tol_rel * abs(total) and residual > 0.0:
        raise QuadratureError("residual above requested tolerance",
                              partial_value=total, residual=residual)
    if check_divergence:
        _check_end_decay(f, c, edges[1], tol_rel, total, residual)
    return QuadratureResult(total, residual, evaluations)


def find_root_bracketed(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-12,
) -> float:
    """Root of ``f`` inside [lo, hi] by Brent's bisection/secant hybrid."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return float(lo)
    if fhi == 0.0:
        return float(hi)
    if not (math.isfinite(flo) and math.isfinite(fhi)) or flo * fhi > 0:
        raise BracketError(f"no sign change on [{lo}, {hi}]: f(lo)={flo}, f(hi)={fhi}")
    rtol = max(tol, 4 * np.finfo(float).eps)
    root = optimize.brentq(f, lo, hi, xtol=tol * 1e-3, rtol=rtol, maxiter=500)
    return float(root)


def _evaluate(f, x):
    y = f(x)
    if not np.isfinite(y):
        raise ModelError(f"non-finite function value {y!r} at {list(x)}", point=np.array(x))
    return float(y)


def gradient_steps(x: np.ndarray) -> np.ndarray:
    return np.maximum(GRADIENT_MIN_STEP, GRADIENT_REL_STEP * np.abs(x))


def hessian_steps(x: np.ndarray) -> np.ndarray:
    return np.maximum(HESSIAN_MIN_STEP, HESSIAN_REL_STEP * np.abs(x))


def finite_diff(f: Callable[[np.ndarray], float], x, order: str = "gradient") -> np.ndarray:
    """Central finite differences of a scalar function.

    ``order`` is ``"gradient"`` (first derivatives) or ``"hessian_diag"``
    (pure second derivatives). Steps are relative to |x_i| with an absolute
    floor, see ``gradient_steps`` and ``hessian_steps``.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    if order == "gradient":
        steps = gradient_steps(x)
        for i, h in enumerate(steps):
            xp, xm = x.copy(), x.copy()
            xp[i] += h
            xm[i] -= h
            out[i] = (_evaluate(f, xp) - _evaluate(f, xm)) / (2.0 * h)
    elif order == "hessian_diag":
        steps = hessian_steps(x)
        f0 = _evaluate(f, x)
        for i, h in enumerate(steps):
            xp, xm = x.copy(), x.copy()
            xp[i] += h
            xm[i] -= h
            out[i] = (_evaluate(f, xp) - 2.0 * f0 + _evaluate(f, xm)) / (h * h)
    else:
        raise ValueError(f"unknown finite-difference order {order!r}")
    return out
