"""Pure-numpy ray/distance kernels (fallback backend).

Same contract as the compiled backend; traversal loops run in Python
with leaf-level tests vectorized. Formula order matches the compiled
kernels so both backends agree bit-for-bit on triangle-level math.
"""

import numpy as np

BACKEND_NAME = "python"


def _dot(a, b):
    return (a * b).sum(-1)


def mt_pairs(orig, dirs, v0, v1, v2, t_eps, b_eps, d_eps):
    """Möller–Trumbore over N independent ray/triangle pairs.

    Returns (t, u, v) float64 arrays; misses carry t = +inf.
    """
    orig = np.asarray(orig, dtype=np.float64)
    dirs = np.asarray(dirs, dtype=np.float64)
    v0 = np.asarray(v0, dtype=np.float64)
    v1 = np.asarray(v1, dtype=np.float64)
    v2 = np.asarray(v2, dtype=np.float64)

    e1 = v1 - v0
    e2 = v2 - v0
    p = np.cross(dirs, e2)
    det = _dot(e1, p)
    ok = np.abs(det) >= d_eps
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(ok, 1.0 / det, 0.0)
    s = orig - v0
    u = _dot(s, p) * inv
    q = np.cross(s, e1)
    v = _dot(dirs, q) * inv
    t = _dot(e2, q) * inv
    ok &= (u >= -b_eps) & (u <= 1.0 + b_eps)
    ok &= (v >= -b_eps) & (u + v <= 1.0 + b_eps)
    ok &= t > t_eps
    t = np.where(ok, t, np.inf)
    u = np.where(ok, u, 0.0)
    v = np.where(ok, v, 0.0)
    return t, u, v


def _ray_box_enter(o, inv_d, d, bmin, bmax):
    """Entry parameter of a ray into an AABB, or +inf on a miss."""
    tlo = 0.0
    thi = np.inf
    for k in range(3):
        if d[k] == 0.0:
            if o[k] < bmin[k] or o[k] > bmax[k]:
                return np.inf
            continue
        t1 = (bmin[k] - o[k]) * inv_d[k]
        t2 = (bmax[k] - o[k]) * inv_d[k]
        if t1 > t2:
            t1, t2 = t2, t1
        if t1 > tlo:
            tlo = t1
        if t2 < thi:
            thi = t2
        if tlo > thi:
            return np.inf
    return tlo


def bvh_first_hit(
    bmin, bmax, left, right, start, count, tv0, tv1, tv2, fids,
    origins, dirs, t_eps, b_eps, d_eps, tie_eps,
):
    """Closest hit per ray; t-ties within tie_eps resolve to the lowest face id.

    Returns (face, t, u, v); face = -1 encodes a miss.
    """
    origins = np.asarray(origins, dtype=np.float64).reshape(-1, 3)
    dirs = np.asarray(dirs, dtype=np.float64).reshape(-1, 3)
    n = len(origins)
    out_f = np.full(n, -1, dtype=np.int64)
    out_t = np.full(n, np.inf)
    out_u = np.zeros(n)
    out_v = np.zeros(n)

    with np.errstate(divide="ignore"):
        inv_dirs = 1.0 / dirs

    for i in range(n):
        o = origins[i]
        d = dirs[i]
        inv_d = inv_dirs[i]
        best_t = np.inf
        cand = []
        stack = [0]
        while stack:
            node = stack.pop()
            enter = _ray_box_enter(o, inv_d, d, bmin[node], bmax[node])
            if np.isinf(enter) or enter > best_t + tie_eps:
                continue
            if left[node] < 0:
                lo = start[node]
                hi = lo + count[node]
                t, u, v = mt_pairs(
                    o, d, tv0[lo:hi], tv1[lo:hi], tv2[lo:hi], t_eps, b_eps, d_eps
                )
                for j in np.nonzero(np.isfinite(t))[0]:
                    tj = t[j]
                    if tj <= best_t + tie_eps:
                        cand.append((tj, int(fids[lo + j]), u[j], v[j]))
                        if tj < best_t:
                            best_t = tj
            else:
                # nearer child first so best_t tightens early
                cl = int(left[node])
                cr = int(right[node])
                e_l = _ray_box_enter(o, inv_d, d, bmin[cl], bmax[cl])
                e_r = _ray_box_enter(o, inv_d, d, bmin[cr], bmax[cr])
                bound = best_t + tie_eps
                if e_l <= e_r:
                    if np.isfinite(e_r) and e_r <= bound:
                        stack.append(cr)
                    if np.isfinite(e_l) and e_l <= bound:
                        stack.append(cl)
                else:
                    if np.isfinite(e_l) and e_l <= bound:
                        stack.append(cl)
                    if np.isfinite(e_r) and e_r <= bound:
                        stack.append(cr)
        if cand:
            t_min = min(c[0] for c in cand)
            winner = min(
                (c for c in cand if c[0] <= t_min + tie_eps), key=lambda c: c[1]
            )
            out_t[i], out_f[i], out_u[i], out_v[i] = winner
    return out_f, out_t, out_u, out_v


def bvh_count_hits(
    bmin, bmax, left, right, start, count, tv0, tv1, tv2, fids,
    origins, dirs, t_eps, b_eps, d_eps,
):
    """Number of triangles each ray intersects at t > t_eps."""
    origins = np.asarray(origins, dtype=np.float64).reshape(-1, 3)
    dirs = np.asarray(dirs, dtype=np.float64).reshape(-1, 3)
    n = len(origins)
    out = np.zeros(n, dtype=np.int64)
    with np.errstate(divide="ignore"):
        inv_dirs = 1.0 / dirs
    for i in range(n):
        o = origins[i]
        d = dirs[i]
        inv_d = inv_dirs[i]
        total = 0
        stack = [0]
        while stack:
            node = stack.pop()
            if not np.isfinite(_ray_box_enter(o, inv_d, d, bmin[node], bmax[node])):
                continue
            if left[node] < 0:
                lo = start[node]
                hi = lo + count[node]
                t, _, _ = mt_pairs(
                    o, d, tv0[lo:hi], tv1[lo:hi], tv2[lo:hi], t_eps, b_eps, d_eps
                )
                total += int(np.isfinite(t).sum())
            else:
                stack.append(int(left[node]))
                stack.append(int(right[node]))
        out[i] = total
    return out


def closest_point_on_triangles(p, a, b, c):
    """Closest points on triangles (a, b, c) to p; returns (points, dist²).

    Branch ladder follows the classic barycentric region walk; np.select
    keeps the first matching region, mirroring the scalar kernel exactly.
    """
    p = np.asarray(p, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)

    ab = b - a
    ac = c - a
    ap = p - a
    d1 = _dot(ab, ap)
    d2 = _dot(ac, ap)
    bp = p - b
    d3 = _dot(ab, bp)
    d4 = _dot(ac, bp)
    cp = p - c
    d5 = _dot(ab, cp)
    d6 = _dot(ac, cp)
    vc = d1 * d4 - d3 * d2
    vb = d5 * d2 - d1 * d6
    va = d3 * d6 - d5 * d4

    with np.errstate(divide="ignore", invalid="ignore"):
        r_ab = (d1 / (d1 - d3))[..., None]
        r_ac = (d2 / (d2 - d6))[..., None]
        r_bc = ((d4 - d3) / ((d4 - d3) + (d5 - d6)))[..., None]
        denom = 1.0 / (va + vb + vc)
        interior = a + ab * (vb * denom)[..., None] + ac * (vc * denom)[..., None]

    conds = [
        (d1 <= 0.0) & (d2 <= 0.0),
        (d3 >= 0.0) & (d4 <= d3),
        (vc <= 0.0) & (d1 >= 0.0) & (d3 <= 0.0),
        (d6 >= 0.0) & (d5 <= d6),
        (vb <= 0.0) & (d2 >= 0.0) & (d6 <= 0.0),
        (va <= 0.0) & (d4 - d3 >= 0.0) & (d5 - d6 >= 0.0),
    ]
    choices = [a, b, a + ab * r_ab, c, a + ac * r_ac, b + (c - b) * r_bc]
    point = interior.copy()
    chosen = np.zeros(conds[0].shape, dtype=bool)
    for cond, choice in zip(conds, choices):
        pick = cond & ~chosen
        point[pick] = np.broadcast_to(choice, point.shape)[pick]
        chosen |= cond
    diff = p - point
    return point, _dot(diff, diff)


def _aabb_dist2(p, lo, hi):
    d = 0.0
    for k in range(3):
        if p[k] < lo[k]:
            e = lo[k] - p[k]
            d += e * e
        elif p[k] > hi[k]:
            e = p[k] - hi[k]
            d += e * e
    return d


def bvh_nearest(
    bmin, bmax, left, right, start, count, tv0, tv1, tv2, fids, points, tie_eps
):
    """Globally nearest triangle per point.

    Distance ties within tie_eps resolve to the lowest face id (shared
    edges and vertices produce exact geometric ties routinely, so the
    comparison needs a window, not exact equality).
    Returns (face, closest_point, distance)."""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    n = len(points)
    out_f = np.full(n, -1, dtype=np.int64)
    out_cp = np.zeros((n, 3))
    out_d = np.full(n, np.inf)

    for i in range(n):
        p = points[i]
        best_d = np.inf
        cand = []
        stack = [0]
        while stack:
            node = stack.pop()
            bound = best_d + tie_eps
            if _aabb_dist2(p, bmin[node], bmax[node]) > bound * bound:
                continue
            if left[node] < 0:
                lo = start[node]
                hi = lo + count[node]
                cp, d2 = closest_point_on_triangles(p, tv0[lo:hi], tv1[lo:hi], tv2[lo:hi])
                d = np.sqrt(d2)
                for j in np.nonzero(d <= best_d + tie_eps)[0]:
                    cand.append((d[j], int(fids[lo + j]), cp[j]))
                    if d[j] < best_d:
                        best_d = d[j]
            else:
                cl = int(left[node])
                cr = int(right[node])
                d_l = _aabb_dist2(p, bmin[cl], bmax[cl])
                d_r = _aabb_dist2(p, bmin[cr], bmax[cr])
                bound = best_d + tie_eps
                bound2 = bound * bound
                if d_l <= d_r:
                    if d_r <= bound2:
                        stack.append(cr)
                    if d_l <= bound2:
                        stack.append(cl)
                else:
                    if d_l <= bound2:
                        stack.append(cl)
                    if d_r <= bound2:
                        stack.append(cr)
        if cand:
            d_min = min(c[0] for c in cand)
            winner = min(
                (c for c in cand if c[0] <= d_min + tie_eps), key=lambda c: c[1]
            )
            out_d[i], out_f[i], out_cp[i] = winner
    return out_f, out_cp, out_d
