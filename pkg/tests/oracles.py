"""Independent reference computations used as test oracles.

Deliberately naive: loops, brute force and textbook formulas, sharing no
code with the package.
"""

import math


def haversine_m(lat1, lon1, lat2, lon2, radius=6_371_000.0):
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dphi = p2 - p1
    dlmb = math.radians(lon2 - lon1)
    h = math.sin(dphi / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dlmb / 2) ** 2
    return 2 * radius * math.asin(math.sqrt(h))


def pearson(xs, ys):
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    return sxy / math.sqrt(sxx * syy)


def ks_brute(a, b):
    """sup |F_a - F_b| evaluated at every pooled sample value by counting."""
    best = 0.0
    for x in list(a) + list(b):
        fa = sum(1 for v in a if v <= x) / len(a)
        fb = sum(1 for v in b if v <= x) / len(b)
        best = max(best, abs(fa - fb))
    return best


def w1_sorted_pairing(a, b):
    assert len(a) == len(b)
    return sum(abs(x - y) for x, y in zip(sorted(a), sorted(b))) / len(a)


def nearest_linear_scan(points, q):
    return min(math.sqrt((px - q[0]) * (px - q[0]) + (py - q[1]) * (py - q[1])) for px, py in points)


def dense_min_distance(pos_a, pos_b, t0, t1, step=1e-3):
    """Minimum distance over a dense grid; ``pos_*`` map a time to (x, y)."""
    n = int(round((t1 - t0) / step))
    best = math.inf
    for i in range(n + 1):
        t = t0 + i * step
        ax, ay = pos_a(t)
        bx, by = pos_b(t)
        best = min(best, math.hypot(ax - bx, ay - by))
    return best
