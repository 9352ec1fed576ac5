"""Generalised extreme value distribution and its maximum-likelihood fit.

Parameterisation follows ``H((x - location) / scale)`` with shape ``xi``:
``xi > 0`` is the Frechet (fat-tailed) type, ``xi < 0`` Weibull and
``xi == 0`` Gumbel.  All functions accept scalars or arrays for ``x``.

Random variates come from :func:`numpy.random.default_rng`, i.e. the PCG64
bit generator, fed through the quantile function (inverse transform).
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .blocks import BlockScheme
from .exceptions import ConvergenceError, DegenerateDataError, TooFewMaximaError

__all__ = [
    "GUMBEL_THRESHOLD",
    "FitConfig",
    "GevFit",
    "GevParams",
    "fit_gev",
    "gev_cdf",
    "gev_loglik",
    "gev_pdf",
    "gev_quantile",
    "gev_sample",
    "gumbel_moment_init",
]

# |xi| below this routes every formula through the Gumbel limit.
GUMBEL_THRESHOLD = 1e-6
EULER_GAMMA = 0.5772156649
SHAPE_BOUNDS = (-5.0, 5.0)
MIN_SCALE = 1e-8


@dataclass(frozen=True)
class GevParams:
    """GEV parameter triple; ``scale`` and ``location`` are in percent."""

    shape: float
    scale: float
    location: float

    def __post_init__(self):
        for name in ("shape", "scale", "location"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not math.isfinite(self.shape) or not math.isfinite(self.location):
            raise ValueError("shape and location must be finite")
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ValueError(f"scale must be positive and finite, got {self.scale}")

    @property
    def support(self):
        """Open interval ``(low, high)`` on which the density is positive."""
        if abs(self.shape) < GUMBEL_THRESHOLD:
            return (-math.inf, math.inf)
        edge = self.location - self.scale / self.shape
        return (edge, math.inf) if self.shape > 0 else (-math.inf, edge)

    def as_tuple(self):
        return (self.shape, self.scale, self.location)

    def to_dict(self):
        return {"shape": self.shape, "scale": self.scale, "location": self.location}


def _maxima_values(maxima):
    values = getattr(maxima, "values", maxima)
    return np.asarray(values, dtype=float).ravel()


def _log_t(shape, z):
    """``log(1 + shape * z)`` with NaN where the support condition fails."""
    arg = shape * z
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.log1p(arg)
    return np.where(arg > -1.0, out, np.nan)


def _logpdf(x, shape, scale, location):
    z = (np.asarray(x, dtype=float) - location) / scale
    if abs(shape) < GUMBEL_THRESHOLD:
        return -math.log(scale) - z - np.exp(-z)
    log_t = _log_t(shape, z)
    with np.errstate(over="ignore", invalid="ignore"):
        out = -math.log(scale) - (1.0 / shape + 1.0) * log_t - np.exp(-log_t / shape)
    return np.where(np.isnan(log_t), -np.inf, out)


def _scalar_or_array(values, x):
    return float(values) if np.ndim(x) == 0 else values


def gev_pdf(params, x):
    """Density at ``x``; zero outside the support."""
    with np.errstate(over="ignore"):
        dens = np.exp(_logpdf(x, *params.as_tuple()))
    return _scalar_or_array(dens, x)


def gev_cdf(params, x):
    """Distribution function at ``x``, clamped to 0 or 1 off the support."""
    shape, scale, location = params.as_tuple()
    z = (np.asarray(x, dtype=float) - location) / scale
    if abs(shape) < GUMBEL_THRESHOLD:
        with np.errstate(over="ignore"):
            prob = np.exp(-np.exp(-z))
    else:
        log_t = _log_t(shape, z)
        with np.errstate(over="ignore", invalid="ignore"):
            prob = np.exp(-np.exp(-log_t / shape))
        off = 0.0 if shape > 0 else 1.0
        prob = np.where(np.isnan(log_t), off, prob)
    return _scalar_or_array(prob, x)


def gev_quantile(params, p):
    """Inverse distribution function for ``0 < p < 1``."""
    p_arr = np.asarray(p, dtype=float)
    if np.any(~((p_arr > 0) & (p_arr < 1))):
        raise ValueError("probabilities must lie strictly inside (0, 1)")
    shape, scale, location = params.as_tuple()
    log_y = np.log(-np.log(p_arr))
    if abs(shape) < GUMBEL_THRESHOLD:
        q = location - scale * log_y
    else:
        # (y**-xi - 1) / xi written with expm1 to stay accurate for small xi
        q = location + scale * np.expm1(-shape * log_y) / shape
    return _scalar_or_array(q, p)


def gev_sample(params, n, seed):
    """Draw ``n`` variates by inverse transform from a seeded PCG64 stream."""
    n = int(n)
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    u = rng.random(n)
    # random() is on [0, 1); reject an exact zero draw.
    while np.any(u == 0.0):
        u[u == 0.0] = rng.random(int(np.sum(u == 0.0)))
    return gev_quantile(params, u)


def _loglik_values(x, shape, scale, location):
    """Log-likelihood of raw parameters; ``-inf`` when infeasible."""
    if not scale > 0 or not math.isfinite(scale):
        return -math.inf
    n = x.size
    z = (x - location) / scale
    if abs(shape) < GUMBEL_THRESHOLD:
        with np.errstate(over="ignore"):
            val = -n * math.log(scale) - z.sum() - np.exp(-z).sum()
    else:
        arg = shape * z
        if arg.min() <= -1.0:
            return -math.inf
        log_t = np.log1p(arg)
        with np.errstate(over="ignore"):
            val = (
                -n * math.log(scale)
                - (1.0 / shape + 1.0) * log_t.sum()
                - np.exp(-log_t / shape).sum()
            )
    val = float(val)
    return val if math.isfinite(val) else -math.inf


def gev_loglik(params, maxima):
    """Sum of log densities over the maxima; ``-inf`` off the support."""
    x = _maxima_values(maxima)
    if x.size == 0:
        raise ValueError("maxima must be non-empty")
    return _loglik_values(x, *params.as_tuple())


@dataclass(frozen=True)
class FitConfig:
    """Optimiser settings for :func:`fit_gev`.

    ``n_restarts`` jittered starts are run in addition to the moment start.
    ``gradient_tol`` bounds the finite-difference gradient norm of the
    log-likelihood at the reported optimum.
    """

    n_restarts: int = 5
    min_maxima: int = 10
    xatol: float = 1e-9
    fatol: float = 1e-11
    maxiter: int = 4000
    max_polish: int = 6
    gradient_tol: float = 1e-4
    jitter_seed: int = 0
    shape_init: float = 0.1

    @classmethod
    def from_mapping(cls, mapping):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(mapping) - names
        if unknown:
            raise ValueError(f"unknown optimizer settings: {sorted(unknown)}")
        return cls(**mapping)


@dataclass(frozen=True)
class GevFit:
    """Result of a maximum-likelihood fit.

    ``param_cis`` maps ``shape``/``scale``/``location`` to ``(low, high)``
    and is filled by :mod:`evtrisk.inference`; it is empty straight out of
    :func:`fit_gev`.
    """

    params: GevParams
    log_lik: float
    n_maxima: int
    converged: bool
    n_evaluations: int
    gradient_norm: float
    tail: str = "upper"
    scheme: object = None
    param_cis: dict = field(default_factory=dict)
    init_params: GevParams | None = None
    init_log_lik: float = -math.inf
    warnings: tuple = ()

    @property
    def regular(self):
        """Whether the usual MLE asymptotics apply (shape > -0.5)."""
        return self.params.shape > -0.5

    def with_cis(self, param_cis):
        return dataclasses.replace(self, param_cis=dict(param_cis))

    def to_dict(self):
        out = {
            **self.params.to_dict(),
            "log_lik": self.log_lik,
            "converged": self.converged,
            "n_maxima": self.n_maxima,
            "n_evaluations": self.n_evaluations,
            "gradient_norm": self.gradient_norm,
            "regular": self.regular,
            "tail": self.tail,
            "scheme": None if self.scheme is None else str(self.scheme),
            "warnings": list(self.warnings),
        }
        out["param_cis"] = {
            name: [_json_float(lo), _json_float(hi)] for name, (lo, hi) in self.param_cis.items()
        }
        return out

    @classmethod
    def from_dict(cls, data):
        """Rebuild a fit from :meth:`to_dict` output (only the parameters are required)."""
        cis = {}
        for name, (lo, hi) in (data.get("param_cis") or {}).items():
            cis[name] = (-math.inf if lo is None else lo, math.inf if hi is None else hi)
        scheme = data.get("scheme")
        return cls(
            params=GevParams(data["shape"], data["scale"], data["location"]),
            log_lik=float(data.get("log_lik", math.nan)),
            n_maxima=int(data.get("n_maxima", 0)),
            converged=bool(data.get("converged", True)),
            n_evaluations=int(data.get("n_evaluations", 0)),
            gradient_norm=float(data.get("gradient_norm", math.nan)),
            tail=data.get("tail", "upper"),
            scheme=None if scheme is None else BlockScheme.parse(scheme),
            param_cis=cis,
            warnings=tuple(data.get("warnings", ())),
        )


def _json_float(v):
    return None if v is None or not math.isfinite(v) else float(v)


def gumbel_moment_init(x, shape_init=0.1):
    """Gumbel method-of-moments start, nudged to the supplied shape."""
    s = float(np.std(x, ddof=1))
    scale = s * math.sqrt(6.0) / math.pi
    location = float(np.mean(x)) - EULER_GAMMA * scale
    return GevParams(shape_init, scale, location)


def _objective(x):
    lo, hi = SHAPE_BOUNDS

    def nll(theta):
        shape, log_scale, location = theta
        if not lo <= shape <= hi:
            return math.inf
        scale = math.exp(log_scale)
        if scale <= MIN_SCALE:
            return math.inf
        return -_loglik_values(x, shape, scale, location)

    return nll


def _feasible_start(x, params):
    """Widen the scale until every observation sits inside the support."""
    shape, scale, location = params.as_tuple()
    for _ in range(60):
        if math.isfinite(_loglik_values(x, shape, scale, location)):
            return GevParams(shape, scale, location)
        scale *= 1.5
    return GevParams(0.0, params.scale, params.location)


def _gradient(fun, theta, rel_step=1e-6):
    theta = np.asarray(theta, dtype=float)
    grad = np.empty_like(theta)
    for i in range(theta.size):
        h = rel_step * max(1.0, abs(theta[i]))
        up, down = theta.copy(), theta.copy()
        up[i] += h
        down[i] -= h
        grad[i] = (fun(up) - fun(down)) / (2 * h)
    return grad


def nelder_mead(fun, start, *, xatol, fatol, maxiter, max_polish=0):
    """Minimise ``fun`` by Nelder-Mead, restarting the simplex at the optimum.

    Restarting rebuilds a fresh simplex around the incumbent, which guards
    against the premature collapse plain Nelder-Mead suffers on curved
    ridges.  Returns ``(x, fun_value, n_evaluations, success)``.
    """
    opts = {"xatol": xatol, "fatol": fatol, "maxiter": maxiter, "maxfev": maxiter * 2}
    res = optimize.minimize(fun, np.asarray(start, dtype=float), method="Nelder-Mead", options=opts)
    nfev = res.nfev
    best_x, best_f, success = res.x, res.fun, bool(res.success)
    for _ in range(max_polish):
        res = optimize.minimize(fun, best_x, method="Nelder-Mead", options=opts)
        nfev += res.nfev
        improved = best_f - res.fun
        if res.fun <= best_f:
            best_x, best_f = res.x, res.fun
            success = bool(res.success)
        if improved <= fatol:
            break
    return best_x, float(best_f), nfev, success


def fit_gev(maxima, config=None, *, tail=None, scheme=None):
    """Fit a GEV to block maxima by maximum likelihood.

    A derivative-free simplex search maximises the log-likelihood over
    ``(shape, log scale, location)``; infeasible points score ``-inf`` and
    are simply rejected.  The search starts from Gumbel moment estimates
    and from ``config.n_restarts`` jittered copies of them; the best optimum
    is refined and its finite-difference gradient checked.

    Parameters
    ----------
    maxima : BlockMaxima or array-like
        Block maxima (use negated minima for the lower tail).
    config : FitConfig, optional
        Optimiser settings.

    Returns
    -------
    GevFit
        ``converged`` is False when the gradient check fails; the estimate
        is still returned so callers can flag it.

    Raises
    ------
    TooFewMaximaError
        Fewer than ``config.min_maxima`` values.
    DegenerateDataError
        All maxima identical.
    ConvergenceError
        No start produced a finite likelihood.
    """
    config = config or FitConfig()
    x = _maxima_values(maxima)
    if tail is None:
        tail = getattr(maxima, "tail", "upper")
    if scheme is None:
        scheme = getattr(maxima, "scheme", None)
    if x.size < config.min_maxima:
        raise TooFewMaximaError(f"need at least {config.min_maxima} maxima, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError("maxima must be finite")
    if np.ptp(x) == 0:
        raise DegenerateDataError("all block maxima are identical")

    init = _feasible_start(x, gumbel_moment_init(x, config.shape_init))
    init_ll = _loglik_values(x, *init.as_tuple())
    nll = _objective(x)

    rng = np.random.default_rng(config.jitter_seed)
    base = np.array([init.shape, math.log(init.scale), init.location])
    starts = [base]
    for _ in range(config.n_restarts):
        jitter = rng.normal(size=3) * np.array([0.1, 0.2, 0.2 * init.scale])
        cand = base + jitter
        cand_params = GevParams(cand[0], math.exp(cand[1]), cand[2])
        cand_params = _feasible_start(x, cand_params)
        starts.append(np.array([cand_params.shape, math.log(cand_params.scale), cand_params.location]))

    best = None
    total_evals = 0
    for start in starts:
        theta, f, nfev, _ = nelder_mead(nll, start, xatol=config.xatol, fatol=config.fatol, maxiter=config.maxiter)
        total_evals += nfev
        if math.isfinite(f) and (best is None or f < best[1]):
            best = (theta, f)
    if best is None:
        raise ConvergenceError("no starting point reached a finite log-likelihood")

    theta, f, nfev, success = nelder_mead(
        nll, best[0], xatol=config.xatol, fatol=config.fatol, maxiter=config.maxiter, max_polish=config.max_polish
    )
    total_evals += nfev
    params = GevParams(theta[0], math.exp(theta[1]), theta[2])
    log_lik = -f

    raw_ll = lambda t: _loglik_values(x, t[0], t[1], t[2])  # noqa: E731
    grad_norm = float(np.linalg.norm(_gradient(raw_ll, params.as_tuple())))
    notes = []
    if params.shape <= -0.5:
        notes.append("shape <= -0.5: likelihood regularity conditions fail")
    if not grad_norm < config.gradient_tol:
        notes.append(f"gradient norm {grad_norm:.3g} above tolerance {config.gradient_tol:g}")
    converged = bool(math.isfinite(log_lik) and grad_norm < config.gradient_tol)
    return GevFit(
        params=params,
        log_lik=log_lik,
        n_maxima=int(x.size),
        converged=converged,
        n_evaluations=int(total_evals),
        gradient_norm=grad_norm,
        tail=tail,
        scheme=scheme,
        init_params=init,
        init_log_lik=init_ll,
        warnings=tuple(notes),
    )
