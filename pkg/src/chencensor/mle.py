"""Maximum likelihood for the Chen parameters under IAT-II censored data.

The profile structure is exploited: for fixed beta the alpha score is
linear in 1/alpha, giving alpha_hat(beta) = d2 / nu(beta) in closed form.
beta_hat is found by the fixed-point iteration beta <- g(beta), with a
bracketed root-finder on the profile score as fallback.  Asymptotic
confidence intervals come from the inverse observed information.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.stats import norm

from .censoring import CensoredSample
from .chen import ChenParams

__all__ = [
    "MleOptions",
    "MleFit",
    "ConfidenceIntervals",
    "DegenerateSampleError",
    "NoRootError",
    "SolveMethod",
    "log_likelihood",
    "score",
    "nu",
    "alpha_profile",
    "profile_score",
    "solve_beta",
    "fit",
    "observed_information",
    "confidence_intervals",
]


class DegenerateSampleError(ValueError):
    """Sample carries too little information to identify (alpha, beta)."""


class NoRootError(RuntimeError):
    """Profile score has no sign change on the search bracket."""


class SolveMethod(enum.Enum):
    FIXED_POINT = "fixed_point"
    BRACKETED = "bracketed"


@dataclass(frozen=True)
class MleOptions:
    beta_init: float = 1.0
    tol: float = 1e-10
    max_iter: int = 500
    bracket: tuple[float, float] = (1e-4, 50.0)

    def __post_init__(self) -> None:
        if self.tol <= 0 or self.max_iter < 1:
            raise ValueError("tol must be > 0 and max_iter >= 1")
        lo, hi = self.bracket
        if not (0 < lo < hi):
            raise ValueError("bracket must satisfy 0 < low < high")
        if self.beta_init <= 0:
            raise ValueError("beta_init must be > 0")


@dataclass(frozen=True)
class ConfidenceIntervals:
    level: float
    alpha_interval: tuple[float, float]
    beta_interval: tuple[float, float]


@dataclass(frozen=True)
class MleFit:
    params_hat: ChenParams
    loglik: float
    info: np.ndarray
    varcov: np.ndarray
    iterations: int
    converged_by: SolveMethod
    sample: CensoredSample


def _check_params(p: ChenParams) -> None:
    if p.alpha <= 0 or p.beta <= 0:
        raise ValueError("parameters must be positive")


def _weights(s: CensoredSample):
    """Per-time multiplier 1 + R_i for the survival terms, plus (B, x_B).

    x_B is returned as a numpy scalar so that powers overflow to inf
    instead of raising, matching the array code paths.
    """
    coef = 1.0 + s.effective_removals.astype(float)
    return coef, float(s.b), np.float64(s.x_b)


def nu(s: CensoredSample, beta: float) -> float:
    """Total cumulative-hazard-like sum sum (1+R_i)(e^(x_i^beta)-1) + B(e^(x_B^beta)-1)."""
    if beta <= 0:
        raise ValueError("beta must be > 0")
    if s.d2 < 1:
        raise DegenerateSampleError("need at least one observed failure")
    coef, b, x_b = _weights(s)
    with np.errstate(over="ignore"):
        total = float(coef @ np.expm1(s.times**beta))
        if b > 0:
            total += b * float(np.expm1(x_b**beta))
    return total


def log_likelihood(p: ChenParams, s: CensoredSample) -> float:
    """Log-likelihood up to the parameter-free combinatorial constant."""
    _check_params(p)
    x = s.times
    t = x**p.beta
    value = s.d2 * (np.log(p.alpha) + np.log(p.beta))
    value += (p.beta - 1.0) * float(np.sum(np.log(x))) + float(np.sum(t))
    value -= p.alpha * nu(s, p.beta)
    return float(value)


def score(p: ChenParams, s: CensoredSample) -> tuple[float, float]:
    """Gradient of the log-likelihood in (alpha, beta)."""
    _check_params(p)
    x = s.times
    lnx = np.log(x)
    t = x**p.beta
    coef, b, x_b = _weights(s)
    s_alpha = s.d2 / p.alpha - nu(s, p.beta)
    phi = np.exp(t) * t * lnx
    phi_sum = float(coef @ phi)
    if b > 0:
        t_b = x_b**p.beta
        phi_sum += b * float(np.exp(t_b) * t_b * np.log(x_b))
    s_beta = s.d2 / p.beta + float(np.sum(lnx * (1.0 + t))) - p.alpha * phi_sum
    return float(s_alpha), float(s_beta)


def alpha_profile(s: CensoredSample, beta: float) -> float:
    """Closed-form alpha maximizer at fixed beta: d2 / nu."""
    v = nu(s, beta)
    if v <= 0 or not np.isfinite(v):
        if np.isinf(v):
            return 0.0
        raise DegenerateSampleError("nu(beta) is not positive; all times at zero?")
    return s.d2 / v


def _phi_nu_ratio(s: CensoredSample, beta: float) -> float:
    """(sum of weighted phi) / nu, computed with rescaling so that very
    large x^beta (where e^(x^beta) overflows) still yields a finite ratio."""
    coef, b, x_b = _weights(s)
    x = s.times
    lnx = np.log(x)
    with np.errstate(over="ignore", invalid="ignore"):
        t = x**beta
        if b > 0:
            lnx_all = np.append(lnx, np.log(x_b))
            t_all = np.append(t, x_b**beta)
            coef_all = np.append(coef, b)
        else:
            lnx_all, t_all, coef_all = lnx, t, coef
        tmax = float(np.max(t_all))
        if tmax < 600.0:
            num = float(coef_all @ (np.exp(t_all) * t_all * lnx_all))
            den = float(coef_all @ np.expm1(t_all))
            return num / den
        # rescale by e^(-tmax); expm1 ~ exp well before any representable overflow
        scale = np.exp(t_all - tmax)
        num = float(coef_all @ (scale * t_all * lnx_all))
        small = t_all <= 50.0
        den_terms = scale.copy()
        den_terms[small] = np.expm1(t_all[small]) * np.exp(-tmax)
        den = float(coef_all @ den_terms)
        return num / den


def profile_score(s: CensoredSample, beta: float) -> float:
    """d/d beta of the log-likelihood with alpha profiled out."""
    if beta <= 0:
        raise ValueError("beta must be > 0")
    x = s.times
    lnx = np.log(x)
    with np.errstate(over="ignore"):
        t = x**beta
        head = float(s.d2 / beta + np.sum(lnx * (1.0 + t)))
    return head - s.d2 * _phi_nu_ratio(s, beta)


def _g(s: CensoredSample, beta: float) -> float:
    """Fixed-point map whose fixed point is the profile-score root."""
    x = s.times
    lnx = np.log(x)
    with np.errstate(over="ignore"):
        t = x**beta
        denom = -float(np.sum(lnx * (1.0 + t))) / s.d2 + _phi_nu_ratio(s, beta)
    if not np.isfinite(denom) or denom <= 0:
        return np.nan
    return 1.0 / denom


def solve_beta(s: CensoredSample, opts: MleOptions | None = None) -> tuple[float, int, SolveMethod]:
    """Profile MLE of beta: fixed-point iteration with a bracketed fallback."""
    opts = opts or MleOptions()
    if s.d2 < 2 or np.unique(s.times).size < 2:
        raise DegenerateSampleError("need at least two distinct failure times")
    beta = opts.beta_init
    iterations = 0
    converged = False
    best_step = np.inf
    stalled = 0
    for iterations in range(1, opts.max_iter + 1):
        new = _g(s, beta)
        if not np.isfinite(new) or new <= 0 or new > 1e6:
            break
        step = abs(new - beta)
        if step < opts.tol:
            beta = new
            converged = True
            break
        # non-contractive maps cycle without shrinking; bail out to the
        # bracketed solver once no progress is seen for a while
        if step < best_step:
            best_step = step
            stalled = 0
        else:
            stalled += 1
            if stalled >= 25:
                beta = new
                break
        beta = new
    if converged and np.isfinite(beta):
        h = profile_score(s, beta)
        if abs(h) < 1e-8 * (1.0 + abs(s.d2 / beta)):
            return float(beta), iterations, SolveMethod.FIXED_POINT

    lo, hi = opts.bracket
    grid = np.geomspace(lo, hi, 80)
    vals = np.array([profile_score(s, float(g)) for g in grid])
    finite = np.isfinite(vals)
    signs = np.sign(vals)
    idx = None
    for j in range(len(grid) - 1):
        if finite[j] and finite[j + 1] and signs[j] != 0 and signs[j] * signs[j + 1] < 0:
            idx = j
            break
    if idx is None:
        raise NoRootError(
            "profile score has no sign change on "
            f"({lo:g}, {hi:g}); endpoint values h(lo)={vals[finite][0] if finite.any() else np.nan:.4g}, "
            f"h(hi)={vals[finite][-1] if finite.any() else np.nan:.4g}"
        )
    root = brentq(lambda bb: profile_score(s, bb), grid[idx], grid[idx + 1],
                  xtol=1e-13, rtol=1e-14)
    return float(root), iterations, SolveMethod.BRACKETED


def observed_information(p: ChenParams, s: CensoredSample) -> np.ndarray:
    """Negative Hessian of the log-likelihood, evaluated at p."""
    _check_params(p)
    x = s.times
    lnx = np.log(x)
    t = x**p.beta
    coef, b, x_b = _weights(s)
    phi = np.exp(t) * t * lnx
    xi = lnx * (1.0 + t)
    phi_sum = float(coef @ phi)
    phixi_sum = float(coef @ (phi * xi))
    if b > 0:
        ln_b = np.log(x_b)
        t_b = x_b**p.beta
        phi_b = np.exp(t_b) * t_b * ln_b
        xi_b = ln_b * (1.0 + t_b)
        phi_sum += b * phi_b
        phixi_sum += b * phi_b * xi_b
    i_aa = s.d2 / p.alpha**2
    i_ab = phi_sum
    i_bb = s.d2 / p.beta**2 - float(np.sum(lnx**2 * t)) + p.alpha * phixi_sum
    return np.array([[i_aa, i_ab], [i_ab, i_bb]])


def fit(s: CensoredSample, opts: MleOptions | None = None) -> MleFit:
    """Joint MLE with observed information and its inverse."""
    beta_hat, iterations, method = solve_beta(s, opts)
    alpha_hat = alpha_profile(s, beta_hat)
    params = ChenParams(alpha_hat, beta_hat)
    info = observed_information(params, s)
    det = info[0, 0] * info[1, 1] - info[0, 1] * info[1, 0]
    norm_sq = float(np.sum(info**2))
    if not np.isfinite(det) or abs(det) < 1e-12 * norm_sq:
        raise NoRootError("observed information is numerically singular")
    varcov = np.array([[info[1, 1], -info[0, 1]], [-info[1, 0], info[0, 0]]]) / det
    return MleFit(
        params_hat=params,
        loglik=log_likelihood(params, s),
        info=info,
        varcov=varcov,
        iterations=iterations,
        converged_by=method,
        sample=s,
    )


def confidence_intervals(mle_fit: MleFit, level: float = 0.95) -> ConfidenceIntervals:
    """Wald intervals theta_hat -/+ z * se at the given coverage level."""
    if not (0 < level < 1):
        raise ValueError("level must lie in (0, 1)")
    var_a, var_b = mle_fit.varcov[0, 0], mle_fit.varcov[1, 1]
    if var_a <= 0 or var_b <= 0:
        raise ValueError("variance-covariance matrix has non-positive diagonal")
    z = norm.ppf(0.5 + level / 2.0)
    a_hat = mle_fit.params_hat.alpha
    b_hat = mle_fit.params_hat.beta
    return ConfidenceIntervals(
        level=level,
        alpha_interval=(a_hat - z * np.sqrt(var_a), a_hat + z * np.sqrt(var_a)),
        beta_interval=(b_hat - z * np.sqrt(var_b), b_hat + z * np.sqrt(var_b)),
    )
