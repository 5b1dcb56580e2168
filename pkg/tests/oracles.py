"""Independent reference implementations used to cross-check the package.

Everything here is deliberately written from first principles (plain loops,
direct enumeration, textbook formulas) and must stay independent of the
code paths it is used to verify.
"""

import itertools

import numpy as np


def map_marginals(y, gains, powers, cbs, n0):
    """Exact per-user posterior marginals by enumerating all M^J combinations.

    ``gains`` is a (K, J) effective gain matrix.  Returns a (J, M) array of
    normalized marginals, from P(symbols) proportional to
    exp(-||y - sum_j sqrt(P_j) g_j x_j||^2 / n0) under uniform priors.
    """
    y = np.asarray(y, dtype=complex)
    gains = np.asarray(gains, dtype=complex)
    j_total = cbs.user_count
    m_total = cbs.modulation_order
    weights = np.zeros((j_total, m_total))
    for combo in itertools.product(range(1, m_total + 1), repeat=j_total):
        r = np.zeros_like(y)
        for j, sym in enumerate(combo):
            r += np.sqrt(powers[j]) * gains[:, j] * cbs.codebook(j + 1).codeword(sym)
        w = np.exp(-np.sum(np.abs(y - r) ** 2) / n0)
        for j, sym in enumerate(combo):
            weights[j, sym - 1] += w
    return weights / weights.sum(axis=1, keepdims=True)


def joint_map(y, gains, powers, cbs, n0):
    """Most likely joint symbol tuple by exhaustive search (1-based)."""
    y = np.asarray(y, dtype=complex)
    gains = np.asarray(gains, dtype=complex)
    best = None
    best_metric = -np.inf
    m_total = cbs.modulation_order
    for combo in itertools.product(range(1, m_total + 1), repeat=cbs.user_count):
        r = np.zeros_like(y)
        for j, sym in enumerate(combo):
            r += np.sqrt(powers[j]) * gains[:, j] * cbs.codebook(j + 1).codeword(sym)
        metric = -np.sum(np.abs(y - r) ** 2)
        if metric > best_metric:
            best_metric = metric
            best = combo
    return np.array(best)


def convex_hull_area(points):
    """Area of the convex hull of complex points: monotone chain + shoelace."""
    pts = sorted(set((float(p.real), float(p.imag)) for p in np.asarray(points).ravel()))
    if len(pts) < 3:
        raise ValueError("need at least 3 distinct points")

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        raise ValueError("points are collinear")
    area = 0.0
    for (x1, y1), (x2, y2) in zip(hull, hull[1:] + hull[:1]):
        area += x1 * y2 - x2 * y1
    return abs(area) / 2.0
