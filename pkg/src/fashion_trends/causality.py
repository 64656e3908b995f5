"""Pairwise multi-lag Granger tests, edge strength and network export."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from itertools import permutations

import numpy as np

from .statcore import difference, f_sf, lstsq

LAGS = (1, 2, 3, 4)
ALPHA = 0.05
VERY_STRONG_P = 0.001
MIN_DOF = 10
PENWIDTH_CAP = 8.0


@dataclass(frozen=True)
class GrangerResult:
    p_value: float
    f_stat: float
    ssr_restricted: float
    ssr_unrestricted: float
    df_num: int
    df_den: int
    collinear: bool = False


def _lagged(v, lag, n_eff):
    return np.column_stack([v[lag - i : lag - i + n_eff] for i in range(1, lag + 1)])


def granger_test(x, y, lag: int) -> GrangerResult:
    """Does x help predict y beyond y's own lags? F-test on ``lag`` lags."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) != len(y):
        raise ValueError("series differ in length")
    if lag < 1:
        raise ValueError("lag must be >= 1")
    n_eff = len(y) - lag
    df_den = n_eff - 2 * lag - 1
    if df_den < MIN_DOF:
        raise ValueError(f"series of length {len(y)} too short for lag {lag}")
    target = y[lag:]
    ones = np.ones((n_eff, 1))
    Xr = np.hstack([ones, _lagged(y, lag, n_eff)])
    Xu = np.hstack([Xr, _lagged(x, lag, n_eff)])
    _, ssr_r, rank_r = lstsq(Xr, target)
    _, ssr_u, rank_u = lstsq(Xu, target)
    if rank_u < Xu.shape[1] or rank_r < Xr.shape[1] or ssr_u <= 1e-12 * max(ssr_r, 1e-300):
        return GrangerResult(1.0, 0.0, ssr_r, ssr_u, lag, df_den, collinear=True)
    ssr_r = max(ssr_r, ssr_u)
    f = ((ssr_r - ssr_u) / lag) / (ssr_u / df_den)
    return GrangerResult(f_sf(f, lag, df_den), f, ssr_r, ssr_u, lag, df_den)


def granger_p(x, y, lag: int) -> float:
    return granger_test(x, y, lag).p_value


def strength_of(min_p: float, significant_lags) -> str:
    n_sig = len(significant_lags)
    if n_sig == 0:
        return "none"
    if n_sig == 1:
        return "weak"
    if min_p < VERY_STRONG_P:
        return "very_strong"
    return "strong"


@dataclass
class CausalEdge:
    source: str
    target: str
    p_by_lag: dict
    significant_lags: list
    min_p: float
    strength: str
    bidirectional: bool = False

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "target": self.target,
            "p_by_lag": {str(k): v for k, v in self.p_by_lag.items()},
            "significant_lags": list(self.significant_lags),
            "min_p": self.min_p,
            "strength": self.strength,
            "bidirectional": self.bidirectional,
        }


def align(a, b):
    """Trim the longer of two differenced series at the front."""
    n = min(len(a), len(b))
    return np.asarray(a, dtype=float)[len(a) - n :], np.asarray(b, dtype=float)[len(b) - n :]


def classify_edge(source: str, target: str, series: dict, lags=LAGS) -> CausalEdge:
    """Edge ``source -> target`` from already-stationarised series."""
    x, y = align(series[source], series[target])
    p_by_lag = {lag: granger_p(x, y, lag) for lag in lags}
    sig = [lag for lag in lags if p_by_lag[lag] < ALPHA]
    min_p = min(p_by_lag.values())
    return CausalEdge(source, target, p_by_lag, sig, min_p, strength_of(min_p, sig))


def stationarize(series: dict, orders: dict) -> dict:
    return {k: difference(v, orders.get(k, 0)) for k, v in series.items()}


@dataclass
class CausalNetwork:
    nodes: list
    edges: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"nodes": list(self.nodes), "edges": [e.to_dict() for e in self.edges]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def build_network(themes, series: dict, lags=LAGS, executor=None) -> CausalNetwork:
    themes = list(themes)
    if len(themes) < 2:
        raise ValueError("need at least two themes")
    pairs = list(permutations(themes, 2))
    if executor is None:
        edges = [classify_edge(a, b, series, lags) for a, b in pairs]
    else:
        edges = list(executor.map(classify_edge, *zip(*pairs), [series] * len(pairs), [lags] * len(pairs)))
    return network_from_edges(themes, edges)


def network_from_edges(themes, edges) -> CausalNetwork:
    """Keep edges with at least one significant lag and mark reciprocal pairs."""
    kept = [replace(e) for e in edges if e.strength != "none"]
    present = {(e.source, e.target) for e in kept}
    for e in kept:
        e.bidirectional = (e.target, e.source) in present
    return CausalNetwork(list(themes), kept)


def all_edges(themes, series: dict, lags=LAGS) -> list:
    """Every ordered pair, including those with no significant lag."""
    return [classify_edge(a, b, series, lags) for a, b in permutations(list(themes), 2)]


def export_dot(network: CausalNetwork) -> str:
    lines = ["digraph causality {", "  rankdir=LR;"]
    for node in network.nodes:
        lines.append(f'  "{node}";')
    for e in sorted(network.edges, key=lambda e: (e.source, e.target)):
        width = min(PENWIDTH_CAP, -math.log10(max(e.min_p, 1e-300)))
        lines.append(f'  "{e.source}" -> "{e.target}" [penwidth={width:.3f}, label="{e.strength}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
