"""Independent reference solvers used only by the tests."""

from __future__ import annotations

import itertools
import math

import numpy as np


def alpha_obj(a, g, alpha, g_max=None):
    g_max = g.max() if g_max is None else g_max
    u = ((g_max - g) * a).sum(axis=1)
    return float(sum(x ** alpha for x in u if x > 0))


def brute_alpha_fair(g, budget, alpha):
    """Best matrix by enumeration; ties prefer a 1 at the first differing flattened position."""
    K, H = g.shape
    n = K * H
    best, best_x = -math.inf, None
    # iterate vectors in descending binary order so the first optimum found wins ties
    for bits in range(2 ** n - 1, -1, -1):
        x = np.array([(bits >> (n - 1 - i)) & 1 for i in range(n)], dtype=np.int8).reshape(K, H)
        if (g * x).sum() > budget + 1e-12:
            continue
        obj = alpha_obj(x, g, alpha)
        if best_x is None or obj > best + 1e-10 * max(1.0, abs(best)):
            best, best_x = obj, x
    return best, best_x


def knapsack_dp(values, grams, capacity):
    """0/1 knapsack over integer weights; returns the best total value."""
    capacity = int(capacity)
    if capacity < 0:
        return -math.inf
    best = np.zeros(capacity + 1)
    for v, w in zip(values, grams):
        w = int(w)
        if w > capacity:
            continue
        if w == 0:
            best += max(v, 0.0)
            continue
        best[w:] = np.maximum(best[w:], best[:-w] + v)
    return float(best[capacity])


def gram_dp_bounds(g, budget):
    """(low, nominal, high) alpha=1 optima from costs rounded to whole grams.

    Rounding moves each item by at most half a gram, so the real optimum lies
    between the DP optima at capacities shrunk and grown by n/2 grams.
    """
    w = (g.max() - g).ravel()
    grams = np.round(g.ravel() * 1000.0).astype(np.int64)  # numpy rounds half to even
    n = grams.size
    cap = budget * 1000.0
    low = knapsack_dp(w, grams, math.floor(cap - n / 2))
    nominal = knapsack_dp(w, grams, math.floor(cap + 1e-9))
    high = knapsack_dp(w, grams, math.floor(cap + n / 2))
    return max(low, 0.0), nominal, high


def _client_subsets(wrow, grow):
    """Per-client (utility, cost) for every subset of the given columns."""
    m = wrow.size
    masks = np.arange(2 ** m)
    bits = (masks[:, None] >> np.arange(m)) & 1
    return bits @ wrow, bits @ grow


def brute_finetune(g, T, t_sl, t_ft, budget, alpha):
    """Best (objective, s) over every placement and every residual subset (ties: smallest s)."""
    K, _ = g.shape
    g = g[:, :T + t_sl]
    g_max = g.max()
    W = g_max - g
    best_obj, best_s = -math.inf, None
    for s in range(1, t_sl + 1):
        start, end = T + s - t_ft, T + s
        wcost = g[:, start:end].sum()
        if wcost > budget + 1e-12:
            continue
        base = W[:, start:end].sum(axis=1)
        subs = [_client_subsets(W[c, :start], g[c, :start]) for c in range(K)]
        # accumulate over clients with a running table of (cost, partial objective) pairs
        cost = np.zeros(1)
        obj = np.zeros(1)
        for c in range(K):
            u, cc = subs[c]
            util = np.where(base[c] + u > 0, np.power(np.maximum(base[c] + u, 0), alpha), 0.0)
            cost = (cost[:, None] + cc[None, :]).ravel()
            obj = (obj[:, None] + util[None, :]).ravel()
            keep = cost <= budget - wcost + 1e-12
            cost, obj = cost[keep], obj[keep]
        cand = float(obj.max())
        if best_s is None or cand > best_obj + 1e-10 * max(1.0, abs(best_obj)):
            best_obj, best_s = cand, s
    return best_obj, best_s
