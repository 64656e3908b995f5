"""OLS with inference, distribution tails, differencing and the ADF test."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np
from scipy.special import betainc


@dataclass(frozen=True)
class OlsFit:
    slope: float
    intercept: float
    slope_se: float
    t_stat: float
    p_value: float
    r_squared: float
    n: int


@dataclass(frozen=True)
class AdfResult:
    statistic: float
    p_value: float
    used_lag: int
    is_stationary: bool
    nobs: int
    critical_values: dict
    degenerate: bool = False


# --------------------------------------------------------------------------
# distribution tails
# --------------------------------------------------------------------------


def t_sf(t: float, dof: float) -> float:
    """P(T > t) for Student's t with ``dof`` degrees of freedom."""
    if dof < 1:
        raise ValueError("dof must be >= 1")
    if math.isnan(t):
        raise ValueError("t is nan")
    if math.isinf(t):
        return 0.0 if t > 0 else 1.0
    half = 0.5 * float(betainc(0.5 * dof, 0.5, dof / (dof + t * t)))
    return half if t >= 0 else 1.0 - half


def f_sf(f: float, d1: float, d2: float) -> float:
    """P(F > f) for the F distribution with (d1, d2) degrees of freedom."""
    if d1 < 1 or d2 < 1:
        raise ValueError("degrees of freedom must be >= 1")
    if not f >= 0:
        raise ValueError(f"f must be non-negative, got {f!r}")
    if math.isinf(f):
        return 0.0
    return float(betainc(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * f)))


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


# Acklam's rational approximation
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)


def normal_quantile(p: float) -> float:
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p!r}")
    lo = 0.02425
    if p < lo:
        q = math.sqrt(-2 * math.log(p))
        x = (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / (
            (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1)
    elif p > 1 - lo:
        q = math.sqrt(-2 * math.log1p(-p))
        x = -(((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / (
            (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1)
    else:
        q = p - 0.5
        r = q * q
        x = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / (
            ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1)
    # one Halley step takes the 1e-9 approximation to full double precision
    e = normal_cdf(x) - p
    u = e * math.sqrt(2 * math.pi) * math.exp(0.5 * x * x)
    return x - u / (1 + 0.5 * x * u)


# --------------------------------------------------------------------------
# regression
# --------------------------------------------------------------------------


def lstsq(X, y):
    """Least squares returning (beta, ssr, rank)."""
    beta, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    return beta, float(resid @ resid), int(rank)


def ols_line(x, y) -> OlsFit:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    if n != len(y):
        raise ValueError("x and y differ in length")
    if n < 3:
        raise ValueError("need at least 3 points")
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx == 0.0:
        raise ValueError("x is constant; slope variance undefined")
    yc = y - y.mean()
    slope = float(xc @ yc) / sxx
    intercept = float(y.mean() - slope * x.mean())
    resid = yc - slope * xc
    ssr = float(resid @ resid)
    sst = float(yc @ yc)
    dof = n - 2
    se = math.sqrt(ssr / dof / sxx)
    if se == 0.0:
        t = 0.0 if slope == 0.0 else math.copysign(math.inf, slope)
        p = 1.0 if slope == 0.0 else 0.0
    else:
        t = slope / se
        p = min(1.0, 2.0 * t_sf(abs(t), dof))
    r2 = 0.0 if sst == 0.0 else min(1.0, max(0.0, 1.0 - ssr / sst))
    return OlsFit(slope, intercept, se, t, p, r2, n)


def difference(series, d: int = 1) -> np.ndarray:
    y = np.asarray(series, dtype=float)
    if d < 0:
        raise ValueError("d must be >= 0")
    if len(y) <= d:
        raise ValueError(f"series of length {len(y)} too short for d={d}")
    return np.diff(y, n=d) if d else y.copy()


def seasonal_difference(series, period: int, D: int = 1) -> np.ndarray:
    y = np.asarray(series, dtype=float)
    for _ in range(D):
        if len(y) <= period:
            raise ValueError("series too short for seasonal differencing")
        y = y[period:] - y[:-period]
    return y


# --------------------------------------------------------------------------
# augmented Dickey-Fuller
# --------------------------------------------------------------------------


@lru_cache(maxsize=1)
def _mackinnon():
    return json.loads(resources.files("fashion_trends").joinpath("data/mackinnon.json").read_text("utf-8"))


def mackinnon_p(stat: float) -> float:
    tab = _mackinnon()
    if stat > tab["tau_max"]:
        return 1.0
    if stat < tab["tau_min"]:
        return 0.0
    coef = tab["small_p"] if stat <= tab["tau_star"] else tab["large_p"]
    return normal_cdf(sum(c * stat**i for i, c in enumerate(coef)))


def mackinnon_crit(nobs: int) -> dict:
    out = {}
    for level, b in _mackinnon()["critical_values"].items():
        out[level] = b[0] + b[1] / nobs + b[2] / nobs**2 + b[3] / nobs**3
    return out


def _adf_design(y, dy, lag, start):
    rows = np.arange(start, len(dy))
    cols = [np.ones(len(rows)), y[rows]]
    cols += [dy[rows - i] for i in range(1, lag + 1)]
    return np.column_stack(cols), dy[rows]


def adf_test(series, max_lag: int = 4, alpha: float = 0.05) -> AdfResult:
    """ADF with a constant, lag order picked by AIC on a common sample."""
    y = np.asarray(series, dtype=float)
    if max_lag < 0:
        raise ValueError("max_lag must be >= 0")
    if len(y) < max_lag + 10:
        raise ValueError(f"series of length {len(y)} too short for max_lag={max_lag}")
    if np.ptp(y) == 0.0:
        return AdfResult(-math.inf, 0.0, 0, True, len(y) - 1, mackinnon_crit(len(y) - 1), degenerate=True)
    dy = np.diff(y)

    best_lag, best_aic = 0, math.inf
    for lag in range(max_lag + 1):
        X, target = _adf_design(y, dy, lag, max_lag)
        _, ssr, _ = lstsq(X, target)
        nobs = len(target)
        if ssr <= 0.0:
            continue
        aic = nobs * (math.log(2 * math.pi * ssr / nobs) + 1) + 2 * X.shape[1]
        if aic < best_aic - 1e-12:
            best_lag, best_aic = lag, aic

    X, target = _adf_design(y, dy, best_lag, best_lag)
    beta, ssr, rank = lstsq(X, target)
    nobs = len(target)
    dof = nobs - X.shape[1]
    if rank < X.shape[1] or ssr <= 0.0 or dof <= 0:
        return AdfResult(-math.inf, 0.0, best_lag, True, nobs, mackinnon_crit(nobs), degenerate=True)
    cov = np.linalg.inv(X.T @ X) * (ssr / dof)
    stat = float(beta[1] / math.sqrt(cov[1, 1]))
    p = mackinnon_p(stat)
    return AdfResult(stat, p, best_lag, p < alpha, nobs, mackinnon_crit(nobs))
