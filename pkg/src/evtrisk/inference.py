"""Return levels and profile-likelihood confidence intervals.

A ``k``-block return level is the quantile at ``1 - 1/k``: the level the
block maximum exceeds in one block out of ``k`` on average.  ``k`` counts
blocks of whatever scheme produced the maxima (20 months, 20 quarters, ...).

Intervals are the set of values whose profile deviance
``2 * (max_log_lik - profile_log_lik)`` stays below the chi-square(1)
quantile.  Each endpoint is bracketed by stepping away from the MLE with
offsets growing by a factor 1.5, then bisected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .exceptions import ConvergenceError
from .validation import check_k, check_level
from .gev import (
    GUMBEL_THRESHOLD,
    MIN_SCALE,
    SHAPE_BOUNDS,
    GevParams,
    _gradient,
    _loglik_values,
    _maxima_values,
    gev_quantile,
    nelder_mead,
)

__all__ = [
    "PARAMETERS",
    "ProfileCurve",
    "ProfileInterval",
    "RiskLevel",
    "attach_param_cis",
    "profile_ci_level",
    "profile_ci_param",
    "profile_loglik",
    "reparam_loglik",
    "return_level",
]

PARAMETERS = ("shape", "scale", "location")
_INDEX = {"shape": 0, "scale": 1, "location": 2}

BRACKET_GROWTH = 1.5
MAX_EXPANSIONS = 60
ENDPOINT_TOL = 1e-4


def return_level(params, k):
    """Level exceeded by the block maximum with probability ``1/k``."""
    k = check_k(k)
    # -log1p(-1/k) is -log(1 - 1/k) without cancellation for large k
    return float(gev_quantile(params, math.exp(math.log1p(-1.0 / k))))


def _level_offset(shape, k):
    """``(1 - y**-shape) / shape`` with ``y = -log(1 - 1/k)``; its limit is ``log y``."""
    log_y = math.log(-math.log1p(-1.0 / k))
    if abs(shape) < GUMBEL_THRESHOLD:
        return log_y
    return -math.expm1(-shape * log_y) / shape


def _location_from_level(level, shape, scale, k):
    return level + scale * _level_offset(shape, k)


def reparam_loglik(maxima, shape, scale, level, k):
    """Log-likelihood with the location replaced by the ``k``-block return level."""
    x = _maxima_values(maxima)
    k = check_k(k)
    return _loglik_values(x, shape, scale, _location_from_level(level, shape, scale, k))


@dataclass(frozen=True)
class ProfileCurve:
    """Profile log-likelihood evaluated at a set of values (sorted ascending)."""

    grid: tuple
    max_log_lik: float

    def values(self):
        return np.array([g[0] for g in self.grid])

    def log_liks(self):
        return np.array([g[1] for g in self.grid])

    def deviance(self):
        return 2.0 * (self.max_log_lik - self.log_liks())

    def to_rows(self):
        return [{"value": v, "profile_loglik": ll} for v, ll in self.grid]


@dataclass(frozen=True)
class ProfileInterval:
    """Confidence interval; an open endpoint is reported as +/-inf."""

    low: float
    high: float
    low_open: bool = False
    high_open: bool = False
    n_profile_fits: int = 0

    def __iter__(self):
        yield self.low
        yield self.high

    def __contains__(self, value):
        return self.low <= value <= self.high


@dataclass(frozen=True)
class RiskLevel:
    """``k``-block return level with its profile-likelihood interval."""

    k: float
    estimate: float
    ci_low: float
    ci_high: float
    tail: str = "upper"
    scheme: object = None
    level: float = 0.95
    low_open: bool = False
    high_open: bool = False
    notes: tuple = field(default=())

    def __post_init__(self):
        if not self.k > 1:
            raise ValueError("k must be > 1")
        if not self.ci_low <= self.estimate <= self.ci_high:
            raise ValueError("interval must contain the estimate")

    def to_dict(self):
        fin = lambda v: float(v) if math.isfinite(v) else None  # noqa: E731
        return {
            "k": self.k,
            "estimate": self.estimate,
            "ci_low": fin(self.ci_low),
            "ci_high": fin(self.ci_high),
            "level": self.level,
            "tail": self.tail,
            "scheme": None if self.scheme is None else str(self.scheme),
            "low_open": self.low_open,
            "high_open": self.high_open,
        }


class _Profiler:
    """Maximises the log-likelihood over the two nuisance parameters.

    Nuisance vectors are kept in the optimiser's coordinates: scale enters
    as its logarithm.  ``target`` is a parameter name or ``"level"``.
    """

    def __init__(self, x, fit, target, k=None):
        self.x = x
        self.target = target
        self.k = k
        self.n_fits = 0
        shape, scale, location = fit.params.as_tuple()
        self.nuisance_hat = {
            "shape": np.array([math.log(scale), location]),
            "scale": np.array([shape, location]),
            "location": np.array([shape, math.log(scale)]),
            "level": np.array([shape, math.log(scale)]),
        }[target]

    def params(self, value, nuis):
        """Raw ``(shape, scale, location)`` for a target value and nuisance vector."""
        a, b = nuis
        if self.target == "shape":
            return value, math.exp(a), b
        if self.target == "scale":
            return a, value, b
        if self.target == "location":
            return a, math.exp(b), value
        return a, math.exp(b), _location_from_level(value, a, math.exp(b), self.k)

    def nll(self, value):
        lo, hi = SHAPE_BOUNDS

        def f(nuis):
            try:
                shape, scale, location = self.params(value, nuis)
            except OverflowError:
                return math.inf
            if not lo <= shape <= hi or not scale > MIN_SCALE:
                return math.inf
            return -_loglik_values(self.x, shape, scale, location)

        return f

    def _repair(self, f, nuis):
        """Move an infeasible start inside the support."""
        nuis = np.array(nuis, dtype=float)
        for _ in range(80):
            if math.isfinite(f(nuis)):
                return nuis
            if self.target in ("shape", "location", "level"):
                # widen the scale (log-coordinate) to cover the data
                idx = 0 if self.target == "shape" else 1
                nuis[idx] += math.log(1.5)
            else:
                nuis[0] *= 0.5
        return None

    def __call__(self, value, warm):
        f = self.nll(value)
        start = self._repair(f, warm)
        self.n_fits += 1
        if start is None:
            return -math.inf, warm
        nuis, fval, _, _ = nelder_mead(f, start, xatol=1e-6, fatol=1e-8, maxiter=2000, max_polish=1)
        return -fval, nuis


def _standard_errors(x, params, k=None):
    """Approximate standard errors from the observed information.

    Only used to size the first bracketing step; falls back to ``None``.
    """
    theta = np.array(params.as_tuple())
    f = lambda t: _loglik_values(x, t[0], t[1], t[2])  # noqa: E731
    hess = np.empty((3, 3))
    try:
        for i in range(3):
            h = 1e-4 * max(1.0, abs(theta[i]))
            up, down = theta.copy(), theta.copy()
            up[i] += h
            down[i] -= h
            hess[i] = (_gradient(f, up) - _gradient(f, down)) / (2 * h)
        hess = 0.5 * (hess + hess.T)
        cov = np.linalg.inv(-hess)
    except (np.linalg.LinAlgError, FloatingPointError, ValueError):
        return None
    if not np.all(np.isfinite(cov)) or np.any(np.diag(cov) <= 0):
        return None
    se = {name: math.sqrt(cov[i, i]) for name, i in _INDEX.items()}
    if k is not None:
        g = _gradient(lambda t: return_level(GevParams(*t), k), theta)
        var = float(g @ cov @ g)
        se["level"] = math.sqrt(var) if var > 0 else None
    return se


def _default_step(target, params):
    return {"shape": 0.05}.get(target, 0.05 * params.scale)


def _bounds(target):
    if target == "shape":
        return SHAPE_BOUNDS
    if target == "scale":
        return (MIN_SCALE, math.inf)
    return (-math.inf, math.inf)


def _profile_interval(x, fit, target, level, k=None):
    if not fit.converged:
        raise ConvergenceError("profile intervals require a converged fit")
    cutoff = float(stats.chi2.ppf(level, 1))
    prof = _Profiler(x, fit, target, k)
    ll_max = fit.log_lik
    theta_hat = return_level(fit.params, k) if target == "level" else fit.params.as_tuple()[_INDEX[target]]
    se = _standard_errors(x, fit.params, k)
    step0 = se.get(target) if se else None
    if not step0 or not math.isfinite(step0):
        step0 = _default_step(target, fit.params)
    else:
        step0 = 0.5 * step0
    lo_bound, hi_bound = _bounds(target)

    curve = {theta_hat: ll_max}
    ll_best = [ll_max]

    def deviance(value, warm):
        ll, nuis = prof(value, warm)
        curve[value] = ll
        ll_best[0] = max(ll_best[0], ll)
        return max(0.0, 2.0 * (ll_max - ll)), nuis

    def endpoint(direction):
        inside, warm = theta_hat, prof.nuisance_hat
        outside = None
        offset = step0
        for _ in range(MAX_EXPANSIONS):
            cand = theta_hat + direction * offset
            at_bound = False
            if cand <= lo_bound or cand >= hi_bound:
                bound = lo_bound if direction < 0 else hi_bound
                cand = bound - direction * 1e-9 * max(1.0, abs(bound))
                at_bound = True
            dev, nuis = deviance(cand, warm)
            if dev > cutoff:
                outside = cand
                break
            inside, warm = cand, nuis
            if at_bound:
                break
            offset *= BRACKET_GROWTH
        if outside is None:
            return direction * math.inf, True
        while abs(outside - inside) > ENDPOINT_TOL:
            mid = 0.5 * (inside + outside)
            dev, nuis = deviance(mid, warm)
            if dev > cutoff:
                outside = mid
            else:
                inside, warm = mid, nuis
        return 0.5 * (inside + outside), False

    low, low_open = endpoint(-1.0)
    high, high_open = endpoint(+1.0)
    interval = ProfileInterval(
        low=min(low, theta_hat), high=max(high, theta_hat),
        low_open=low_open, high_open=high_open, n_profile_fits=prof.n_fits,
    )
    grid = tuple(sorted(curve.items()))
    return interval, ProfileCurve(grid=grid, max_log_lik=ll_max), theta_hat


def profile_ci_param(maxima, fit, which, level=0.95):
    """Profile-likelihood interval for one GEV parameter.

    Parameters
    ----------
    maxima : BlockMaxima or array-like
        The maxima ``fit`` was estimated on.
    fit : GevFit
        A converged fit.
    which : {"shape", "scale", "location"}
    level : float
        Coverage probability.

    Returns
    -------
    interval : ProfileInterval
    curve : ProfileCurve
        Every profile evaluation made while locating the endpoints.
    """
    if which not in _INDEX:
        raise ValueError(f"which must be one of {PARAMETERS}")
    check_level(level)
    interval, curve, _ = _profile_interval(_maxima_values(maxima), fit, which, level)
    return interval, curve


def profile_ci_level(maxima, fit, k, level=0.95, *, return_curve=False):
    """``k``-block return level with a profile-likelihood interval.

    The location is eliminated in favour of the return level, and the
    likelihood is profiled over shape and scale.  The interval is usually
    asymmetric, with the longer arm on the heavy-tail side.
    """
    k = check_k(k)
    check_level(level)
    interval, curve, estimate = _profile_interval(_maxima_values(maxima), fit, "level", level, k=k)
    risk = RiskLevel(
        k=k, estimate=estimate, ci_low=interval.low, ci_high=interval.high,
        tail=fit.tail, scheme=fit.scheme, level=level,
        low_open=interval.low_open, high_open=interval.high_open,
    )
    return (risk, curve) if return_curve else risk


def profile_loglik(maxima, fit, which, values):
    """Profile log-likelihood of ``which`` on a user-supplied grid.

    ``which`` is a parameter name, or ``("level", k)`` for a return level.
    Grid points are visited outward from the MLE so that each nuisance
    optimisation is warm-started from its neighbour.
    """
    x = _maxima_values(maxima)
    k = None
    if isinstance(which, tuple):
        which, k = which
        k = check_k(k)
    if which not in ("level",) + PARAMETERS:
        raise ValueError(f"unknown profile target {which!r}")
    prof = _Profiler(x, fit, which, k)
    centre = return_level(fit.params, k) if which == "level" else fit.params.as_tuple()[_INDEX[which]]
    values = np.sort(np.asarray(values, dtype=float))
    out = {}
    for side in (values[values >= centre], values[values < centre][::-1]):
        warm = prof.nuisance_hat
        for v in side:
            ll, nuis = prof(float(v), warm)
            out[float(v)] = ll
            if math.isfinite(ll):
                warm = nuis
    return ProfileCurve(grid=tuple(sorted(out.items())), max_log_lik=fit.log_lik)


def attach_param_cis(maxima, fit, level=0.95):
    """Return ``fit`` with profile intervals for all three parameters."""
    cis = {}
    for name in PARAMETERS:
        interval, _ = profile_ci_param(maxima, fit, name, level)
        cis[name] = (interval.low, interval.high)
    return fit.with_cis(cis)
