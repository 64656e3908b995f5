"""(S)ARIMA fitting by conditional sum of squares, grid search and forecasting."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy.optimize import minimize

from ._kernels import css_objective, css_residuals, is_stable
from .statcore import adf_test, difference, normal_quantile, seasonal_difference

HORIZON = 12
SEASON = 13
SEASONAL_THEMES = frozenset({"seasonal", "accessories"})
MAX_ITER = 2000
F_TOL = 1e-8
X_TOL = 1e-6
SIGMA2_FLOOR = 1e-12
_PENALTY = 1e12


@dataclass(frozen=True, order=True)
class ArimaSpec:
    p: int
    d: int
    q: int
    P: int = 0
    D: int = 0
    Q: int = 0
    s: int = 0

    def __post_init__(self):
        if min(self.p, self.d, self.q, self.P, self.D, self.Q, self.s) < 0:
            raise ValueError("orders must be non-negative")
        if self.p > 3 or self.q > 3 or self.d > 2:
            raise ValueError(f"{self}: p, q <= 3 and d <= 2 required")
        if max(self.P, self.D, self.Q) > 1:
            raise ValueError(f"{self}: seasonal orders must be 0 or 1")
        if self.seasonal and self.s < 2:
            raise ValueError(f"{self}: seasonal terms need a period")

    @property
    def seasonal(self) -> bool:
        return bool(self.P or self.D or self.Q)

    @property
    def n_params(self) -> int:
        """Estimated mean-equation parameters, intercept included."""
        return self.p + self.q + self.P + self.Q + 1

    @property
    def offset(self) -> int:
        return self.d + self.s * self.D

    def __str__(self):
        base = f"ARIMA({self.p},{self.d},{self.q})"
        if self.seasonal:
            base = "S" + base + f"({self.P},{self.D},{self.Q},{self.s})"
        return base

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("p", "d", "q", "P", "D", "Q", "s")}


@dataclass
class ArimaFit:
    spec: ArimaSpec
    intercept: float
    ar: np.ndarray
    ma: np.ndarray
    sar: np.ndarray
    sma: np.ndarray
    sigma2: float
    log_likelihood: float
    aic: float
    bic: float
    converged: bool
    stationary: bool
    invertible: bool
    nobs: int
    residuals: np.ndarray = field(repr=False)

    @property
    def k(self) -> int:
        return self.spec.n_params + 1

    def lag_polynomials(self):
        return _lag_polynomials(self.spec, self.ar, self.ma, self.sar, self.sma)

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "label": str(self.spec),
            "intercept": self.intercept,
            "ar": self.ar.tolist(),
            "ma": self.ma.tolist(),
            "seasonal_ar": self.sar.tolist(),
            "seasonal_ma": self.sma.tolist(),
            "sigma2": self.sigma2,
            "log_likelihood": self.log_likelihood,
            "aic": self.aic,
            "bic": self.bic,
            "converged": self.converged,
            "nobs": self.nobs,
        }


@dataclass
class Forecast:
    mean: np.ndarray
    lower95: np.ndarray
    upper95: np.ndarray

    @property
    def horizon(self) -> int:
        return len(self.mean)


def _lag_polynomials(spec, ar, ma, sar, sma):
    """Full AR coefficients a_k and MA coefficients m_j of the expanded model

    x_t = sum_k a_k x_{t-k} + e_t + sum_j m_j e_{t-j}.
    """
    ar_poly = np.r_[1.0, -np.asarray(ar, dtype=float)]
    ma_poly = np.r_[1.0, np.asarray(ma, dtype=float)]
    if spec.P:
        sp = np.zeros(spec.s * spec.P + 1)
        sp[0] = 1.0
        sp[spec.s :: spec.s] = -np.asarray(sar, dtype=float)
        ar_poly = np.convolve(ar_poly, sp)
    if spec.Q:
        sq = np.zeros(spec.s * spec.Q + 1)
        sq[0] = 1.0
        sq[spec.s :: spec.s] = np.asarray(sma, dtype=float)
        ma_poly = np.convolve(ma_poly, sq)
    return -ar_poly[1:], ma_poly[1:]


def _split(spec, theta):
    mu = theta[0]
    i = 1
    ar = theta[i : i + spec.p]; i += spec.p
    ma = theta[i : i + spec.q]; i += spec.q
    sar = theta[i : i + spec.P]; i += spec.P
    sma = theta[i : i + spec.Q]
    return mu, ar, ma, sar, sma


def differenced(series, spec: ArimaSpec) -> np.ndarray:
    w = difference(series, spec.d)
    if spec.D:
        w = seasonal_difference(w, spec.s, spec.D)
    return w


def _objective_factory(spec, w, scale):
    args = (w, spec.p, spec.q, spec.P, spec.Q, max(spec.s, 1), scale, _PENALTY)

    def objective(theta):
        return css_objective(theta, *args)

    return objective


def _initial_simplex(x0, sd):
    k = len(x0)
    simplex = np.tile(x0, (k + 1, 1))
    simplex[1, 0] += 0.5 * sd
    for i in range(1, k):
        simplex[i + 1, i] += 0.1
    return simplex


def fit_arima(series, spec: ArimaSpec) -> ArimaFit:
    """Minimise the conditional sum of squares with Nelder-Mead."""
    w = differenced(series, spec)
    if len(w) < 5 * spec.n_params:
        raise ValueError(f"{spec}: {len(w)} differenced points, need {5 * spec.n_params}")
    var = float(np.var(w))
    scale = var if var > 0 else 1.0
    sd = math.sqrt(scale)
    x0 = np.zeros(spec.n_params)
    x0[0] = float(np.mean(w))
    objective = _objective_factory(spec, w, scale)
    options = {"xatol": X_TOL, "fatol": F_TOL, "maxiter": MAX_ITER}

    res = minimize(objective, x0, method="Nelder-Mead",
                   options={**options, "initial_simplex": _initial_simplex(x0, sd)})
    if not res.success:
        restart = res.x + np.r_[0.1 * sd, np.full(len(x0) - 1, 0.05)]
        res = minimize(objective, restart, method="Nelder-Mead",
                       options={**options, "initial_simplex": _initial_simplex(restart, sd)})
    theta = res.x
    mu, *coeffs = _split(spec, theta)
    mu = float(mu)
    ar, ma, sar, sma = (np.ascontiguousarray(v) for v in coeffs)
    a, m = _lag_polynomials(spec, ar, ma, sar, sma)
    e = css_residuals(w - mu, a, m)
    tail = e[len(a) :]
    nobs = len(tail)
    sigma2 = max(float(tail @ tail) / nobs, SIGMA2_FLOOR)
    loglik = -0.5 * nobs * (math.log(2 * math.pi * sigma2) + 1.0)
    k = spec.n_params + 1
    return ArimaFit(
        spec=spec,
        intercept=mu,
        ar=np.array(ar, dtype=float),
        ma=np.array(ma, dtype=float),
        sar=np.array(sar, dtype=float),
        sma=np.array(sma, dtype=float),
        sigma2=sigma2,
        log_likelihood=loglik,
        aic=2 * k - 2 * loglik,
        bic=k * math.log(nobs) - 2 * loglik,
        converged=bool(res.success) and res.fun < _PENALTY,
        stationary=bool(is_stable(ar) and is_stable(sar)),
        invertible=bool(is_stable(-ma) and is_stable(-sma)),
        nobs=nobs,
        residuals=e,
    )


def choose_d(series, max_d: int = 2, max_lag: int = 4) -> int:
    """Smallest d whose differenced series rejects a unit root."""
    y = np.asarray(series, dtype=float)
    for d in range(max_d + 1):
        w = difference(y, d)
        if len(w) < max_lag + 10:
            return d
        if adf_test(w, max_lag).is_stationary:
            return d
    return max_d


def candidate_specs(d: int, seasonal: bool, n: int):
    seasonal_orders = product((0, 1), repeat=3) if seasonal else [(0, 0, 0)]
    out = []
    for (P, D, Q), p, q in product(seasonal_orders, range(4), range(4)):
        spec = ArimaSpec(p, d, q, P, D, Q, SEASON if (P or D or Q) else 0)
        if spec.n_params >= n / 4:
            continue
        if n - spec.offset < 5 * spec.n_params:
            continue
        out.append(spec)
    return sorted(out)


def _selection_key(fit):
    return (fit.aic, fit.bic, fit.spec.n_params, fit.spec)


def grid_search(series, theme: str = "", seasonal_themes=SEASONAL_THEMES, max_lag: int = 4) -> ArimaFit:
    y = np.asarray(series, dtype=float)
    d = choose_d(y, max_lag=max_lag)
    fallback = ArimaSpec(0, d, 0)
    if np.ptp(difference(y, d)) == 0.0:
        return fit_arima(y, fallback)
    best = None
    for spec in candidate_specs(d, theme in seasonal_themes, len(y)):
        fit = fit_arima(y, spec)
        if not (fit.converged and fit.stationary and math.isfinite(fit.aic)):
            continue
        if best is None or _selection_key(fit) < _selection_key(best):
            best = fit
    return best if best is not None else fit_arima(y, fallback)


def psi_weights(ar_full, ma_full, h: int) -> np.ndarray:
    psi = np.zeros(h)
    psi[0] = 1.0
    for j in range(1, h):
        acc = ma_full[j - 1] if j - 1 < len(ma_full) else 0.0
        for k in range(1, min(j, len(ar_full)) + 1):
            acc += ar_full[k - 1] * psi[j - k]
        psi[j] = acc
    return psi


def integrated_polynomials(fit: ArimaFit):
    """AR coefficients on the level scale (differencing folded in), MA and constant."""
    spec = fit.spec
    a, m = fit.lag_polynomials()
    ar_poly = np.r_[1.0, -a]
    constant = float(ar_poly.sum()) * fit.intercept
    for _ in range(spec.d):
        ar_poly = np.convolve(ar_poly, [1.0, -1.0])
    if spec.D:
        sd = np.zeros(spec.s + 1)
        sd[0], sd[-1] = 1.0, -1.0
        for _ in range(spec.D):
            ar_poly = np.convolve(ar_poly, sd)
    return -ar_poly[1:], m, constant


def forecast(fit: ArimaFit, history, horizon: int = HORIZON, level: float = 0.95) -> Forecast:
    y = np.asarray(history, dtype=float)
    A, m, c = integrated_polynomials(fit)
    off = fit.spec.offset
    e = np.zeros(len(y) + horizon)
    e[off : off + len(fit.residuals)] = fit.residuals
    path = np.r_[y, np.zeros(horizon)]
    n = len(y)
    for h in range(horizon):
        t = n + h
        acc = c
        for k in range(1, len(A) + 1):
            acc += A[k - 1] * path[t - k]
        for j in range(1, len(m) + 1):
            if t - j < n:
                acc += m[j - 1] * e[t - j]
        path[t] = acc
    mean = path[n:]
    psi = psi_weights(A, m, horizon)
    sd = np.sqrt(fit.sigma2 * np.cumsum(psi**2))
    z = normal_quantile(0.5 + level / 2)
    return Forecast(mean, mean - z * sd, mean + z * sd)


def normalize_to_peak(history, values) -> np.ndarray:
    peak = float(np.max(history))
    if not peak > 0:
        raise ValueError("history has no positive values to normalise against")
    return np.asarray(values, dtype=float) / peak * 100.0
