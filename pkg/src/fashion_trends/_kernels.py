"""Inner loops that dominate runtime.

Each kernel exists twice: a numba-compiled loop and a vectorised numpy/scipy
equivalent. The public names at the bottom of the module resolve to one or
the other depending on :data:`fashion_trends._accel.HAVE_NUMBA`. Both
variants are importable directly so tests and the benchmark can compare them.
"""

import numpy as np
from scipy.signal import lfilter

from ._accel import HAVE_NUMBA, njit

# --------------------------------------------------------------------------
# ARMA conditional-sum-of-squares residuals
# --------------------------------------------------------------------------


def css_residuals_numpy(x, ar, ma):
    """Residuals of x_t = sum a_i x_{t-i} + e_t + sum m_j e_{t-j}.

    Recursion starts at t = len(ar); earlier residuals are zero.
    """
    n = x.shape[0]
    p = ar.shape[0]
    e = np.zeros(n)
    if n <= p:
        return e
    u = x[p:].copy()
    for i in range(p):
        u -= ar[i] * x[p - 1 - i : n - 1 - i]
    if ma.shape[0]:
        e[p:] = lfilter([1.0], np.concatenate(([1.0], ma)), u)
    else:
        e[p:] = u
    return e


@njit(cache=True)
def _css_residuals_loop(x, ar, ma):
    n = x.shape[0]
    p = ar.shape[0]
    q = ma.shape[0]
    e = np.zeros(n)
    for t in range(p, n):
        acc = x[t]
        for i in range(p):
            acc -= ar[i] * x[t - 1 - i]
        for j in range(q):
            k = t - 1 - j
            if k < p:
                break
            acc -= ma[j] * e[k]
        e[t] = acc
    return e


def _is_stable_py(phi):
    """Step-down test: 1 - sum phi_k z^k has all roots outside the unit circle."""
    c = [float(v) for v in phi]
    while c and c[-1] == 0.0:
        c.pop()
    for k in range(len(c), 0, -1):
        kappa = c[k - 1]
        if not abs(kappa) < 1.0 - 1e-9:
            return False
        denom = 1.0 - kappa * kappa
        c = [(c[j] + kappa * c[k - 2 - j]) / denom for j in range(k - 1)]
    return True


@njit(cache=True)
def _is_stable_loop(phi):
    k = phi.shape[0]
    while k > 0 and phi[k - 1] == 0.0:
        k -= 1
    c = phi[:k].copy()
    nxt = np.empty(k)
    while k > 0:
        kappa = c[k - 1]
        if not abs(kappa) < 1.0 - 1e-9:
            return False
        denom = 1.0 - kappa * kappa
        for j in range(k - 1):
            nxt[j] = (c[j] + kappa * c[k - 2 - j]) / denom
        k -= 1
        for j in range(k):
            c[j] = nxt[j]
    return True


def _expand_numpy(short, seasonal, s, sign):
    """Coefficients of (1 + sign*short(B)) (1 + sign*seasonal(B^s)), as tails."""
    base = np.r_[1.0, sign * short]
    if seasonal.shape[0]:
        sp = np.zeros(s * seasonal.shape[0] + 1)
        sp[0] = 1.0
        sp[s::s] = sign * seasonal
        base = np.convolve(base, sp)
    return sign * base[1:]


def css_objective_numpy(theta, w, p, q, P, Q, s, scale, penalty):
    mu = theta[0]
    ar = theta[1 : 1 + p]
    ma = theta[1 + p : 1 + p + q]
    sar = theta[1 + p + q : 1 + p + q + P]
    sma = theta[1 + p + q + P : 1 + p + q + P + Q]
    if not (_is_stable_py(ar) and _is_stable_py(sar) and _is_stable_py(-ma) and _is_stable_py(-sma)):
        return penalty
    a = _expand_numpy(ar, sar, s, -1.0)
    m = _expand_numpy(ma, sma, s, 1.0)
    e = css_residuals_numpy(w - mu, a, m)[a.shape[0]:]
    return float(e @ e) / (e.shape[0] * scale)


@njit(cache=True)
def _expand_loop(short, seasonal, s, sign):
    n_short = short.shape[0]
    n_seas = seasonal.shape[0]
    order = n_short + s * n_seas
    base = np.zeros(n_short + 1)
    base[0] = 1.0
    for i in range(n_short):
        base[i + 1] = sign * short[i]
    if n_seas == 0:
        return sign * base[1:]
    out = np.zeros(order + 1)
    for i in range(n_short + 1):
        out[i] += base[i]
        for j in range(n_seas):
            out[i + s * (j + 1)] += base[i] * sign * seasonal[j]
    return sign * out[1:]


@njit(cache=True)
def _css_objective_loop(theta, w, p, q, P, Q, s, scale, penalty):
    mu = theta[0]
    ar = theta[1 : 1 + p]
    ma = theta[1 + p : 1 + p + q]
    sar = theta[1 + p + q : 1 + p + q + P]
    sma = theta[1 + p + q + P : 1 + p + q + P + Q]
    if not (_is_stable_loop(ar) and _is_stable_loop(sar) and _is_stable_loop(-ma) and _is_stable_loop(-sma)):
        return penalty
    a = _expand_loop(ar, sar, s, -1.0)
    m = _expand_loop(ma, sma, s, 1.0)
    e = _css_residuals_loop(w - mu, a, m)
    start = a.shape[0]
    acc = 0.0
    for t in range(start, e.shape[0]):
        acc += e[t] * e[t]
    return acc / ((e.shape[0] - start) * scale)


# --------------------------------------------------------------------------
# Weighted Gini split search
# --------------------------------------------------------------------------


def best_split_numpy(X, rows, feats, y, w, n_classes):
    """Best (feature, threshold) over ``feats`` for the samples ``rows``.

    Minimises W_L*gini_L + W_R*gini_R. Returns (-1, 0.0, inf) if no
    feature has two distinct values among the rows.
    """
    best_f = -1
    best_thr = 0.0
    best_score = np.inf
    yr = y[rows]
    wr = w[rows]
    onehot = np.zeros((rows.shape[0], n_classes))
    onehot[np.arange(rows.shape[0]), yr] = wr
    total = onehot.sum(axis=0)
    for f in feats:
        col = X[rows, f]
        order = np.argsort(col, kind="mergesort")
        v = col[order]
        valid = v[:-1] < v[1:]
        if not valid.any():
            continue
        left = np.cumsum(onehot[order], axis=0)[:-1]
        right = total - left
        wl = left.sum(axis=1)
        wr_ = right.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            score = (wl - (left * left).sum(axis=1) / wl) + (
                wr_ - (right * right).sum(axis=1) / wr_
            )
        score = np.where(valid & (wl > 0) & (wr_ > 0), score, np.inf)
        i = int(np.argmin(score))
        if score[i] < best_score:
            best_score = float(score[i])
            best_f = int(f)
            best_thr = _midpoint(v[i], v[i + 1])
    return best_f, best_thr, best_score


def _midpoint(a, b):
    m = 0.5 * (a + b)
    return float(a) if m >= b else float(m)


@njit(cache=True)
def _best_split_loop(X, rows, feats, y, w, n_classes):
    n = rows.shape[0]
    best_f = -1
    best_thr = 0.0
    best_score = np.inf
    total = np.zeros(n_classes)
    for r in range(n):
        total[y[rows[r]]] += w[rows[r]]
    col = np.empty(n)
    left = np.zeros(n_classes)
    for f in feats:
        for r in range(n):
            col[r] = X[rows[r], f]
        order = np.argsort(col, kind="mergesort")
        left[:] = 0.0
        for i in range(n - 1):
            r = rows[order[i]]
            left[y[r]] += w[r]
            a = col[order[i]]
            b = col[order[i + 1]]
            if not a < b:
                continue
            wl = 0.0
            sl = 0.0
            wr = 0.0
            sr = 0.0
            for k in range(n_classes):
                lk = left[k]
                rk = total[k] - lk
                wl += lk
                sl += lk * lk
                wr += rk
                sr += rk * rk
            if wl <= 0.0 or wr <= 0.0:
                continue
            score = (wl - sl / wl) + (wr - sr / wr)
            if score < best_score:
                best_score = score
                best_f = f
                m = 0.5 * (a + b)
                best_thr = a if m >= b else m
    return best_f, best_thr, best_score


# --------------------------------------------------------------------------
# Tree traversal
# --------------------------------------------------------------------------


def apply_tree_numpy(X, feature, threshold, left, right):
    node = np.zeros(X.shape[0], dtype=np.int64)
    active = feature[node] >= 0
    while active.any():
        idx = np.nonzero(active)[0]
        nd = node[idx]
        go_left = X[idx, feature[nd]] <= threshold[nd]
        node[idx] = np.where(go_left, left[nd], right[nd])
        active = feature[node] >= 0
    return node


@njit(cache=True)
def _apply_tree_loop(X, feature, threshold, left, right):
    out = np.empty(X.shape[0], dtype=np.int64)
    for i in range(X.shape[0]):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = node
    return out


if HAVE_NUMBA:
    css_residuals = _css_residuals_loop
    css_objective = _css_objective_loop
    is_stable = _is_stable_loop
    best_split = _best_split_loop
    apply_tree = _apply_tree_loop
else:
    css_residuals = css_residuals_numpy
    css_objective = css_objective_numpy
    is_stable = _is_stable_py
    best_split = best_split_numpy
    apply_tree = apply_tree_numpy

css_residuals_loop = _css_residuals_loop
css_objective_loop = _css_objective_loop
is_stable_loop = _is_stable_loop
is_stable_py = _is_stable_py
best_split_loop = _best_split_loop
apply_tree_loop = _apply_tree_loop
