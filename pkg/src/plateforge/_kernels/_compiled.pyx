# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled ray/distance kernels.

Scalar mirror of the pure-numpy backend: same formula order, same
tie rules, so both backends return identical results.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, fabs, sqrt

cnp.import_array()

BACKEND_NAME = "compiled"

cdef int STACK_CAP = 128
cdef int CAND_CAP = 256


cdef inline double _d3(const double* a, const double* b) noexcept nogil:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


cdef inline void _cross3(const double* a, const double* b, double* out) noexcept nogil:
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]


cdef inline bint _mt_one(
    const double* o, const double* d,
    const double* a, const double* b, const double* c,
    double t_eps, double b_eps, double d_eps,
    double* t, double* u, double* v,
) noexcept nogil:
    cdef double e1[3]
    cdef double e2[3]
    cdef double p[3]
    cdef double s[3]
    cdef double q[3]
    cdef double det, inv, uu, vv, tt
    cdef int k
    for k in range(3):
        e1[k] = b[k] - a[k]
        e2[k] = c[k] - a[k]
    _cross3(d, e2, p)
    det = _d3(e1, p)
    if fabs(det) < d_eps:
        return 0
    inv = 1.0 / det
    for k in range(3):
        s[k] = o[k] - a[k]
    uu = _d3(s, p) * inv
    if uu < -b_eps or uu > 1.0 + b_eps:
        return 0
    _cross3(s, e1, q)
    vv = _d3(d, q) * inv
    if vv < -b_eps or uu + vv > 1.0 + b_eps:
        return 0
    tt = _d3(e2, q) * inv
    if tt <= t_eps:
        return 0
    t[0] = tt
    u[0] = uu
    v[0] = vv
    return 1


def mt_pairs(orig, dirs, v0, v1, v2, double t_eps, double b_eps, double d_eps):
    """Möller–Trumbore over N ray/triangle pairs; misses carry t = +inf."""
    cdef double[:, ::1] o = np.ascontiguousarray(orig, dtype=np.float64).reshape(-1, 3)
    cdef double[:, ::1] d = np.ascontiguousarray(dirs, dtype=np.float64).reshape(-1, 3)
    cdef double[:, ::1] a = np.ascontiguousarray(v0, dtype=np.float64).reshape(-1, 3)
    cdef double[:, ::1] b = np.ascontiguousarray(v1, dtype=np.float64).reshape(-1, 3)
    cdef double[:, ::1] c = np.ascontiguousarray(v2, dtype=np.float64).reshape(-1, 3)
    cdef Py_ssize_t n = o.shape[0]
    t_out = np.full(n, np.inf)
    u_out = np.zeros(n)
    v_out = np.zeros(n)
    cdef double[::1] t_v = t_out
    cdef double[::1] u_v = u_out
    cdef double[::1] v_v = v_out
    cdef Py_ssize_t i
    cdef double t, u, v
    with nogil:
        for i in range(n):
            if _mt_one(&o[i, 0], &d[i, 0], &a[i, 0], &b[i, 0], &c[i, 0],
                       t_eps, b_eps, d_eps, &t, &u, &v):
                t_v[i] = t
                u_v[i] = u
                v_v[i] = v
    return t_out, u_out, v_out


cdef inline double _ray_box_enter(
    const double* o, const double* inv_d, const double* d,
    const double* lo, const double* hi,
) noexcept nogil:
    cdef double tlo = 0.0
    cdef double thi = INFINITY
    cdef double t1, t2, tmp
    cdef int k
    for k in range(3):
        if d[k] == 0.0:
            if o[k] < lo[k] or o[k] > hi[k]:
                return INFINITY
            continue
        t1 = (lo[k] - o[k]) * inv_d[k]
        t2 = (hi[k] - o[k]) * inv_d[k]
        if t1 > t2:
            tmp = t1
            t1 = t2
            t2 = tmp
        if t1 > tlo:
            tlo = t1
        if t2 < thi:
            thi = t2
        if tlo > thi:
            return INFINITY
    return tlo


def bvh_first_hit(
    bmin, bmax, left, right, start, count, tv0, tv1, tv2, fids,
    origins, dirs, double t_eps, double b_eps, double d_eps, double tie_eps,
):
    """Closest hit per ray; t-ties within tie_eps resolve to lowest face id."""
    cdef double[:, ::1] nlo = np.ascontiguousarray(bmin, dtype=np.float64)
    cdef double[:, ::1] nhi = np.ascontiguousarray(bmax, dtype=np.float64)
    cdef cnp.int64_t[::1] nl = np.ascontiguousarray(left, dtype=np.int64)
    cdef cnp.int64_t[::1] nr = np.ascontiguousarray(right, dtype=np.int64)
    cdef cnp.int64_t[::1] ns = np.ascontiguousarray(start, dtype=np.int64)
    cdef cnp.int64_t[::1] nc = np.ascontiguousarray(count, dtype=np.int64)
    cdef double[:, ::1] a = np.ascontiguousarray(tv0, dtype=np.float64)
    cdef double[:, ::1] b = np.ascontiguousarray(tv1, dtype=np.float64)
    cdef double[:, ::1] c = np.ascontiguousarray(tv2, dtype=np.float64)
    cdef cnp.int64_t[::1] tf = np.ascontiguousarray(fids, dtype=np.int64)
    cdef double[:, ::1] o = np.ascontiguousarray(origins, dtype=np.float64).reshape(-1, 3)
    cdef double[:, ::1] d = np.ascontiguousarray(dirs, dtype=np.float64).reshape(-1, 3)

    cdef Py_ssize_t n = o.shape[0]
    f_out = np.full(n, -1, dtype=np.int64)
    t_out = np.full(n, np.inf)
    u_out = np.zeros(n)
    v_out = np.zeros(n)
    cdef cnp.int64_t[::1] f_v = f_out
    cdef double[::1] t_v = t_out
    cdef double[::1] u_v = u_out
    cdef double[::1] v_v = v_out

    cdef cnp.int64_t stack[128]
    cdef double cand_t[256]
    cdef double cand_u[256]
    cdef double cand_v[256]
    cdef cnp.int64_t cand_f[256]
    cdef int top, n_cand, m, j2
    cdef Py_ssize_t i
    cdef cnp.int64_t node, lo_i, hi_i, j, fid, best_f, child_l, child_r
    cdef double inv_d[3]
    cdef double best_t, t, u, v, t_min, enter, e_l, e_r, bound
    cdef int k

    with nogil:
        for i in range(n):
            for k in range(3):
                if d[i, k] != 0.0:
                    inv_d[k] = 1.0 / d[i, k]
                else:
                    inv_d[k] = INFINITY
            best_t = INFINITY
            n_cand = 0
            top = 0
            stack[top] = 0
            top += 1
            while top > 0:
                top -= 1
                node = stack[top]
                enter = _ray_box_enter(&o[i, 0], inv_d, &d[i, 0], &nlo[node, 0], &nhi[node, 0])
                if enter == INFINITY or enter > best_t + tie_eps:
                    continue
                if nl[node] < 0:
                    lo_i = ns[node]
                    hi_i = lo_i + nc[node]
                    for j in range(lo_i, hi_i):
                        if _mt_one(&o[i, 0], &d[i, 0], &a[j, 0], &b[j, 0], &c[j, 0],
                                   t_eps, b_eps, d_eps, &t, &u, &v):
                            if t <= best_t + tie_eps:
                                if n_cand == CAND_CAP:
                                    # compact: discard entries that can no longer win
                                    m = 0
                                    for j2 in range(n_cand):
                                        if cand_t[j2] <= best_t + tie_eps:
                                            cand_t[m] = cand_t[j2]
                                            cand_u[m] = cand_u[j2]
                                            cand_v[m] = cand_v[j2]
                                            cand_f[m] = cand_f[j2]
                                            m += 1
                                    n_cand = m
                                if n_cand < CAND_CAP:
                                    cand_t[n_cand] = t
                                    cand_u[n_cand] = u
                                    cand_v[n_cand] = v
                                    cand_f[n_cand] = tf[j]
                                    n_cand += 1
                                if t < best_t:
                                    best_t = t
                else:
                    # nearer child first so best_t tightens early
                    child_l = nl[node]
                    child_r = nr[node]
                    e_l = _ray_box_enter(&o[i, 0], inv_d, &d[i, 0], &nlo[child_l, 0], &nhi[child_l, 0])
                    e_r = _ray_box_enter(&o[i, 0], inv_d, &d[i, 0], &nlo[child_r, 0], &nhi[child_r, 0])
                    bound = best_t + tie_eps
                    if top + 2 <= STACK_CAP:
                        if e_l <= e_r:
                            if e_r != INFINITY and e_r <= bound:
                                stack[top] = child_r
                                top += 1
                            if e_l != INFINITY and e_l <= bound:
                                stack[top] = child_l
                                top += 1
                        else:
                            if e_l != INFINITY and e_l <= bound:
                                stack[top] = child_l
                                top += 1
                            if e_r != INFINITY and e_r <= bound:
                                stack[top] = child_r
                                top += 1
            if n_cand > 0:
                t_min = INFINITY
                for j2 in range(n_cand):
                    if cand_t[j2] < t_min:
                        t_min = cand_t[j2]
                best_f = -1
                for j2 in range(n_cand):
                    if cand_t[j2] <= t_min + tie_eps and (best_f < 0 or cand_f[j2] < best_f):
                        best_f = cand_f[j2]
                        f_v[i] = cand_f[j2]
                        t_v[i] = cand_t[j2]
                        u_v[i] = cand_u[j2]
                        v_v[i] = cand_v[j2]
    return f_out, t_out, u_out, v_out


def bvh_count_hits(
    bmin, bmax, left, right, start, count, tv0, tv1, tv2, fids,
    origins, dirs, double t_eps, double b_eps, double d_eps,
):
    """Number of triangles each ray intersects at t > t_eps."""
    cdef double[:, ::1] nlo = np.ascontiguousarray(bmin, dtype=np.float64)
    cdef double[:, ::1] nhi = np.ascontiguousarray(bmax, dtype=np.float64)
    cdef cnp.int64_t[::1] nl = np.ascontiguousarray(left, dtype=np.int64)
    cdef cnp.int64_t[::1] nr = np.ascontiguousarray(right, dtype=np.int64)
    cdef cnp.int64_t[::1] ns = np.ascontiguousarray(start, dtype=np.int64)
    cdef cnp.int64_t[::1] nc = np.ascontiguousarray(count, dtype=np.int64)
    cdef double[:, ::1] a = np.ascontiguousarray(tv0, dtype=np.float64)
    cdef double[:, ::1] b = np.ascontiguousarray(tv1, dtype=np.float64)
    cdef double[:, ::1] c = np.ascontiguousarray(tv2, dtype=np.float64)
    cdef double[:, ::1] o = np.ascontiguousarray(origins, dtype=np.float64).reshape(-1, 3)
    cdef double[:, ::1] d = np.ascontiguousarray(dirs, dtype=np.float64).reshape(-1, 3)

    cdef Py_ssize_t n = o.shape[0]
    out = np.zeros(n, dtype=np.int64)
    cdef cnp.int64_t[::1] out_v = out

    cdef cnp.int64_t stack[128]
    cdef int top
    cdef Py_ssize_t i
    cdef cnp.int64_t node, lo_i, hi_i, j, total
    cdef double inv_d[3]
    cdef double t, u, v
    cdef int k

    with nogil:
        for i in range(n):
            for k in range(3):
                if d[i, k] != 0.0:
                    inv_d[k] = 1.0 / d[i, k]
                else:
                    inv_d[k] = INFINITY
            total = 0
            top = 0
            stack[top] = 0
            top += 1
            while top > 0:
                top -= 1
                node = stack[top]
                if _ray_box_enter(&o[i, 0], inv_d, &d[i, 0], &nlo[node, 0], &nhi[node, 0]) == INFINITY:
                    continue
                if nl[node] < 0:
                    lo_i = ns[node]
                    hi_i = lo_i + nc[node]
                    for j in range(lo_i, hi_i):
                        if _mt_one(&o[i, 0], &d[i, 0], &a[j, 0], &b[j, 0], &c[j, 0],
                                   t_eps, b_eps, d_eps, &t, &u, &v):
                            total += 1
                else:
                    if top + 2 <= STACK_CAP:
                        stack[top] = nl[node]
                        top += 1
                        stack[top] = nr[node]
                        top += 1
            out_v[i] = total
    return out


cdef inline double _closest_one(
    const double* p, const double* a, const double* b, const double* c,
    double* out,
) noexcept nogil:
    """Closest point on one triangle; returns squared distance."""
    cdef double ab[3]
    cdef double ac[3]
    cdef double ap[3]
    cdef double bp[3]
    cdef double cp[3]
    cdef double d1, d2, d3, d4, d5, d6, va, vb, vc, w, denom, dist2, e
    cdef int k
    for k in range(3):
        ab[k] = b[k] - a[k]
        ac[k] = c[k] - a[k]
        ap[k] = p[k] - a[k]
    d1 = _d3(ab, ap)
    d2 = _d3(ac, ap)
    for k in range(3):
        bp[k] = p[k] - b[k]
    d3 = _d3(ab, bp)
    d4 = _d3(ac, bp)
    for k in range(3):
        cp[k] = p[k] - c[k]
    d5 = _d3(ab, cp)
    d6 = _d3(ac, cp)
    vc = d1 * d4 - d3 * d2
    vb = d5 * d2 - d1 * d6
    va = d3 * d6 - d5 * d4

    if d1 <= 0.0 and d2 <= 0.0:
        for k in range(3):
            out[k] = a[k]
    elif d3 >= 0.0 and d4 <= d3:
        for k in range(3):
            out[k] = b[k]
    elif vc <= 0.0 and d1 >= 0.0 and d3 <= 0.0:
        w = d1 / (d1 - d3)
        for k in range(3):
            out[k] = a[k] + ab[k] * w
    elif d6 >= 0.0 and d5 <= d6:
        for k in range(3):
            out[k] = c[k]
    elif vb <= 0.0 and d2 >= 0.0 and d6 <= 0.0:
        w = d2 / (d2 - d6)
        for k in range(3):
            out[k] = a[k] + ac[k] * w
    elif va <= 0.0 and d4 - d3 >= 0.0 and d5 - d6 >= 0.0:
        w = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        for k in range(3):
            out[k] = b[k] + (c[k] - b[k]) * w
    else:
        denom = 1.0 / (va + vb + vc)
        for k in range(3):
            out[k] = a[k] + ab[k] * (vb * denom) + ac[k] * (vc * denom)
    dist2 = 0.0
    for k in range(3):
        e = p[k] - out[k]
        dist2 += e * e
    return dist2


cdef inline double _aabb_dist2(const double* p, const double* lo, const double* hi) noexcept nogil:
    cdef double d = 0.0
    cdef double e
    cdef int k
    for k in range(3):
        if p[k] < lo[k]:
            e = lo[k] - p[k]
            d += e * e
        elif p[k] > hi[k]:
            e = p[k] - hi[k]
            d += e * e
    return d


def closest_point_on_triangles(p, a, b, c):
    """Closest points on a batch of triangles to one point or a batch."""
    a_arr = np.ascontiguousarray(a, dtype=np.float64).reshape(-1, 3)
    b_arr = np.ascontiguousarray(b, dtype=np.float64).reshape(-1, 3)
    c_arr = np.ascontiguousarray(c, dtype=np.float64).reshape(-1, 3)
    p_arr = np.ascontiguousarray(
        np.broadcast_to(np.asarray(p, dtype=np.float64), a_arr.shape)
    )
    cdef double[:, ::1] pv = p_arr
    cdef double[:, ::1] av = a_arr
    cdef double[:, ::1] bv = b_arr
    cdef double[:, ::1] cv = c_arr
    cdef Py_ssize_t n = a_arr.shape[0]
    cp_out = np.zeros((n, 3))
    d2_out = np.zeros(n)
    cdef double[:, ::1] cp_v = cp_out
    cdef double[::1] d2_v = d2_out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            d2_v[i] = _closest_one(&pv[i, 0], &av[i, 0], &bv[i, 0], &cv[i, 0], &cp_v[i, 0])
    return cp_out, d2_out


def bvh_nearest(
    bmin, bmax, left, right, start, count, tv0, tv1, tv2, fids, points,
    double tie_eps,
):
    """Globally nearest triangle per point; distance ties within tie_eps
    resolve to the lowest face id."""
    cdef double[:, ::1] nlo = np.ascontiguousarray(bmin, dtype=np.float64)
    cdef double[:, ::1] nhi = np.ascontiguousarray(bmax, dtype=np.float64)
    cdef cnp.int64_t[::1] nl = np.ascontiguousarray(left, dtype=np.int64)
    cdef cnp.int64_t[::1] nr = np.ascontiguousarray(right, dtype=np.int64)
    cdef cnp.int64_t[::1] ns = np.ascontiguousarray(start, dtype=np.int64)
    cdef cnp.int64_t[::1] nc = np.ascontiguousarray(count, dtype=np.int64)
    cdef double[:, ::1] a = np.ascontiguousarray(tv0, dtype=np.float64)
    cdef double[:, ::1] b = np.ascontiguousarray(tv1, dtype=np.float64)
    cdef double[:, ::1] c = np.ascontiguousarray(tv2, dtype=np.float64)
    cdef cnp.int64_t[::1] tf = np.ascontiguousarray(fids, dtype=np.int64)
    cdef double[:, ::1] pts = np.ascontiguousarray(points, dtype=np.float64).reshape(-1, 3)

    cdef Py_ssize_t n = pts.shape[0]
    f_out = np.full(n, -1, dtype=np.int64)
    cp_out = np.zeros((n, 3))
    d_out = np.full(n, np.inf)
    cdef cnp.int64_t[::1] f_v = f_out
    cdef double[:, ::1] cp_v = cp_out
    cdef double[::1] d_v = d_out

    cdef cnp.int64_t stack[128]
    cdef double cand_d[256]
    cdef double cand_cp[256][3]
    cdef cnp.int64_t cand_f[256]
    cdef int top, n_cand, m, j2
    cdef Py_ssize_t i
    cdef cnp.int64_t node, lo_i, hi_i, j, best_f, child_l, child_r
    cdef double best_d, d, bound, bound2, d_min, d_l, d_r
    cdef double cp[3]
    cdef int k

    with nogil:
        for i in range(n):
            best_d = INFINITY
            n_cand = 0
            top = 0
            stack[top] = 0
            top += 1
            while top > 0:
                top -= 1
                node = stack[top]
                bound = best_d + tie_eps
                if bound < INFINITY and _aabb_dist2(&pts[i, 0], &nlo[node, 0], &nhi[node, 0]) > bound * bound:
                    continue
                if nl[node] < 0:
                    lo_i = ns[node]
                    hi_i = lo_i + nc[node]
                    for j in range(lo_i, hi_i):
                        d = sqrt(_closest_one(&pts[i, 0], &a[j, 0], &b[j, 0], &c[j, 0], cp))
                        if d <= best_d + tie_eps:
                            if n_cand == CAND_CAP:
                                m = 0
                                for j2 in range(n_cand):
                                    if cand_d[j2] <= best_d + tie_eps:
                                        cand_d[m] = cand_d[j2]
                                        cand_f[m] = cand_f[j2]
                                        for k in range(3):
                                            cand_cp[m][k] = cand_cp[j2][k]
                                        m += 1
                                n_cand = m
                            if n_cand < CAND_CAP:
                                cand_d[n_cand] = d
                                cand_f[n_cand] = tf[j]
                                for k in range(3):
                                    cand_cp[n_cand][k] = cp[k]
                                n_cand += 1
                            if d < best_d:
                                best_d = d
                else:
                    child_l = nl[node]
                    child_r = nr[node]
                    d_l = _aabb_dist2(&pts[i, 0], &nlo[child_l, 0], &nhi[child_l, 0])
                    d_r = _aabb_dist2(&pts[i, 0], &nlo[child_r, 0], &nhi[child_r, 0])
                    bound = best_d + tie_eps
                    bound2 = bound * bound
                    if top + 2 <= STACK_CAP:
                        if d_l <= d_r:
                            if d_r <= bound2:
                                stack[top] = child_r
                                top += 1
                            if d_l <= bound2:
                                stack[top] = child_l
                                top += 1
                        else:
                            if d_l <= bound2:
                                stack[top] = child_l
                                top += 1
                            if d_r <= bound2:
                                stack[top] = child_r
                                top += 1
            if n_cand > 0:
                d_min = INFINITY
                for j2 in range(n_cand):
                    if cand_d[j2] < d_min:
                        d_min = cand_d[j2]
                best_f = -1
                for j2 in range(n_cand):
                    if cand_d[j2] <= d_min + tie_eps and (best_f < 0 or cand_f[j2] < best_f):
                        best_f = cand_f[j2]
                        f_v[i] = cand_f[j2]
                        d_v[i] = cand_d[j2]
                        for k in range(3):
                            cp_v[i, k] = cand_cp[j2][k]
    return f_out, cp_out, d_out
