"""Compare the numba and pure-numpy code paths on the hot workloads.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--json results.json]

Each backend runs in its own subprocess (the backend is chosen at import
time from FASHION_TRENDS_DISABLE_NUMBA). Numba compilation is excluded by a
warm-up call before timing; reported numbers are the best of --repeat runs.
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]

WORKER = r"""
import json, sys, time
import numpy as np
from fashion_trends import backend
from fashion_trends import _kernels as K
from fashion_trends.classify import fit_tfidf, train_forest, transform_matrix
from fashion_trends.forecast import ArimaSpec, fit_arima, grid_search

repeat = int(sys.argv[1])
rng = np.random.default_rng(0)
e = rng.normal(size=400)
y = np.empty(400)
y[0] = e[0]
for t in range(1, 400):
    y[t] = 0.6 * y[t - 1] + e[t] + 0.3 * e[t - 1]
series = 20 + y[-104:].cumsum() * 0.2

words = [f"w{i}" for i in range(300)]
docs = [" ".join(rng.choice(words, size=12)) for _ in range(600)]
labels = [("negative", "neutral", "positive")[i % 3] for i in range(600)]
vocab = fit_tfidf(docs, max_features=2000)
X = transform_matrix(vocab, docs)
theta = np.array([0.0, 0.5, -0.2, 0.1, 0.3])
w = y - y.mean()

def css_calls():
    for _ in range(2000):
        K.css_objective(theta, w, 2, 2, 0, 0, 13, 1.0, 1e6)

def arma_fit():
    fit_arima(y[:300], ArimaSpec(1, 0, 1))

def grid():
    grid_search(series, "vintage")

def split_calls():
    rows = np.arange(X.shape[0])
    feats = np.arange(min(40, X.shape[1]))
    yy = np.array([i % 3 for i in range(X.shape[0])])
    ww = np.ones(X.shape[0])
    for _ in range(50):
        K.best_split(X, rows, feats, yy, ww, 3)

def forest():
    train_forest(X, labels, seed=0, n_estimators=20)

out = {"backend": backend(), "timings": {}}
for name, fn in [("css_objective x2000", css_calls), ("fit_arima (1,0,1) n=300", arma_fit),
                 ("grid_search n=104", grid), ("best_split x50", split_calls),
                 ("train_forest 20 trees", forest)]:
    fn()  # warm-up (JIT compilation / caches)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    out["timings"][name] = best
print(json.dumps(out))
"""


def run_backend(disable_numba: bool, repeat: int) -> dict:
    env = dict(os.environ)
    if disable_numba:
        env["FASHION_TRENDS_DISABLE_NUMBA"] = "1"
    else:
        env.pop("FASHION_TRENDS_DISABLE_NUMBA", None)
    proc = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env, cwd=ROOT,
                          capture_output=True, text=True, check=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", help="also write results to this file")
    args = ap.parse_args(argv)

    started = time.perf_counter()
    fast = run_backend(False, args.repeat)
    slow = run_backend(True, args.repeat)
    print(f"{'workload':28s} {fast['backend']:>10s} {slow['backend']:>10s} {'speed-up':>9s}")
    for name, t_fast in fast["timings"].items():
        t_slow = slow["timings"][name]
        print(f"{name:28s} {t_fast:9.4f}s {t_slow:9.4f}s {t_slow / t_fast:8.1f}x")
    print(f"(total wall time {time.perf_counter() - started:.1f}s)")
    if args.json:
        Path(args.json).write_text(json.dumps({"fast": fast, "fallback": slow}, indent=1) + "\n")


if __name__ == "__main__":
    main()
