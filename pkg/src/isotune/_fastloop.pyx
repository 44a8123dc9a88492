# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled batch loops for the learners.

Each kernel replays the exact per-round recurrence of the matching Python
class in learners.py (same branches, same formulas) over a whole loss
matrix, filling the RunTrace arrays.  The heavy loops run without the GIL.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, exp, fabs, log, log1p, sqrt

cnp.import_array()

cdef int DOM_ALL = 0
cdef int DOM_BALL = 1
cdef int DOM_BOX = 2


cdef inline void _project(double* y, Py_ssize_t n, int dom_kind,
                          const double* cen, double radius,
                          const double* lo, const double* hi) noexcept nogil:
    cdef Py_ssize_t i
    cdef double dist = 0.0, d, scale
    if dom_kind == DOM_BALL:
        for i in range(n):
            d = y[i] - cen[i]
            dist += d * d
        dist = sqrt(dist)
        if dist > radius:
            scale = radius / dist
            for i in range(n):
                y[i] = cen[i] + (y[i] - cen[i]) * scale
    elif dom_kind == DOM_BOX:
        for i in range(n):
            if y[i] < lo[i]:
                y[i] = lo[i]
            elif y[i] > hi[i]:
                y[i] = hi[i]


def run_md_quadratic(double[:, ::1] losses, double q, double c, double[::1] x1,
                     int dom_kind, double[::1] dom_center, double dom_radius,
                     double[::1] dom_lo, double[::1] dom_hi):
    cdef Py_ssize_t T = losses.shape[0], N = losses.shape[1], t, i
    preds_a = np.empty((T, N)); rl_a = np.empty(T); de_a = np.empty(T)
    to_a = np.empty(T); et_a = np.empty(T)
    nu_a = np.zeros(T, dtype=np.uint8)
    xp_a = np.empty(N); x_a = np.asarray(x1).copy()
    cdef double[:, ::1] preds = preds_a
    cdef double[::1] rl = rl_a, de = de_a, to = to_a, et = et_a, xp = xp_a, x = x_a
    cdef unsigned char[::1] nu = nu_a
    cdef double d_prev = 0.0, bar, dual, delta, d_new, w
    cdef bint null
    with nogil:
        for t in range(T):
            et[t] = q / d_prev if d_prev > 0.0 else INFINITY
            bar = 0.0
            dual = 0.0
            for i in range(N):
                preds[t, i] = x[i]
                bar += x[i] * losses[t, i]
                dual += losses[t, i] * losses[t, i]
            dual = sqrt(dual)
            rl[t] = bar
            if dual == 0.0:
                de[t] = 0.0
                to[t] = d_prev
                continue
            null = sqrt(q / 2.0) * dual > d_prev
            if null:
                nu[t] = 1
                delta = sqrt(q / 2.0) * dual
                for i in range(N):
                    xp[i] = x[i]
            else:
                delta = q * dual * dual / (2.0 * d_prev)
                for i in range(N):
                    xp[i] = x[i] - losses[t, i] * (q / d_prev)
                _project(&xp[0], N, dom_kind, &dom_center[0], dom_radius,
                         &dom_lo[0], &dom_hi[0])
            d_new = d_prev + delta
            w = d_prev / d_new
            for i in range(N):
                x[i] = xp[i] * w + (delta / d_new) * x1[i]
            de[t] = delta
            to[t] = d_new
            d_prev = d_new
    return preds_a, rl_a, de_a, to_a, et_a, nu_a


def run_md_entropic(double[:, ::1] losses, double q, double c):
    cdef Py_ssize_t T = losses.shape[0], N = losses.shape[1], t, i
    preds_a = np.empty((T, N)); rl_a = np.empty(T); de_a = np.empty(T)
    to_a = np.empty(T); et_a = np.empty(T)
    nu_a = np.zeros(T, dtype=np.uint8)
    xp_a = np.empty(N); x_a = np.full(N, 1.0 / N)
    cdef double[:, ::1] preds = preds_a
    cdef double[::1] rl = rl_a, de = de_a, to = to_a, et = et_a, xp = xp_a, x = x_a
    cdef unsigned char[::1] nu = nu_a
    cdef double d_prev = 0.0, bar, dual, delta, d_new, w, shift, z, uni = 1.0 / N
    cdef bint null
    with nogil:
        for t in range(T):
            et[t] = q / d_prev if d_prev > 0.0 else INFINITY
            bar = 0.0
            dual = 0.0
            for i in range(N):
                preds[t, i] = x[i]
                bar += x[i] * losses[t, i]
                if fabs(losses[t, i]) > dual:
                    dual = fabs(losses[t, i])
            rl[t] = bar
            if dual == 0.0:
                de[t] = 0.0
                to[t] = d_prev
                continue
            null = sqrt(q / 2.0) * dual > d_prev
            if null:
                nu[t] = 1
                delta = sqrt(q / 2.0) * dual
                for i in range(N):
                    xp[i] = x[i]
            else:
                delta = q * dual * dual / (2.0 * d_prev)
                shift = -INFINITY
                for i in range(N):
                    xp[i] = log(x[i]) - losses[t, i] * (q / d_prev)
                    if xp[i] > shift:
                        shift = xp[i]
                z = 0.0
                for i in range(N):
                    xp[i] = exp(xp[i] - shift)
                    z += xp[i]
                for i in range(N):
                    xp[i] /= z
            d_new = d_prev + delta
            w = d_prev / d_new
            for i in range(N):
                x[i] = xp[i] * w + (delta / d_new) * uni
            de[t] = delta
            to[t] = d_new
            d_prev = d_new
    return preds_a, rl_a, de_a, to_a, et_a, nu_a


def run_ftrl_entropic(double[:, ::1] losses, double q, double c):
    cdef Py_ssize_t T = losses.shape[0], N = losses.shape[1], t, i
    preds_a = np.empty((T, N)); rl_a = np.empty(T); de_a = np.empty(T)
    to_a = np.empty(T); et_a = np.empty(T)
    nu_a = np.zeros(T, dtype=np.uint8)
    cum_a = np.zeros(N); w_a = np.empty(N)
    cdef double[:, ::1] preds = preds_a
    cdef double[::1] rl = rl_a, de = de_a, to = to_a, et = et_a, cum = cum_a, w = w_a
    cdef unsigned char[::1] nu = nu_a
    cdef double d_prev = 0.0, bar, dual, delta, shift, z, uni = 1.0 / N
    cdef bint null
    with nogil:
        for t in range(T):
            et[t] = q / d_prev if d_prev > 0.0 else INFINITY
            if d_prev == 0.0:
                for i in range(N):
                    preds[t, i] = uni
            else:
                shift = -INFINITY
                for i in range(N):
                    w[i] = -cum[i] * (q / d_prev)
                    if w[i] > shift:
                        shift = w[i]
                z = 0.0
                for i in range(N):
                    w[i] = exp(w[i] - shift)
                    z += w[i]
                for i in range(N):
                    preds[t, i] = w[i] / z
            bar = 0.0
            dual = 0.0
            for i in range(N):
                bar += preds[t, i] * losses[t, i]
                if fabs(losses[t, i]) > dual:
                    dual = fabs(losses[t, i])
            rl[t] = bar
            if dual == 0.0:
                de[t] = 0.0
                to[t] = d_prev
                continue
            null = sqrt(q / 2.0) * dual > d_prev
            if null:
                nu[t] = 1
                delta = sqrt(q / 2.0) * dual
            else:
                delta = q * dual * dual / (2.0 * d_prev)
                for i in range(N):
                    cum[i] += losses[t, i]
            d_prev += delta
            de[t] = delta
            to[t] = d_prev
    return preds_a, rl_a, de_a, to_a, et_a, nu_a


def run_aogd(double[:, ::1] losses, double q, double[::1] x1, double[::1] alphas,
             int dom_kind, double[::1] dom_center, double dom_radius,
             double[::1] dom_lo, double[::1] dom_hi):
    cdef Py_ssize_t T = losses.shape[0], N = losses.shape[1], t, i
    preds_a = np.empty((T, N)); rl_a = np.empty(T); de_a = np.empty(T)
    to_a = np.empty(T); et_a = np.empty(T)
    nu_a = np.zeros(T, dtype=np.uint8)
    x_a = np.asarray(x1).copy()
    cdef double[:, ::1] preds = preds_a
    cdef double[::1] rl = rl_a, de = de_a, to = to_a, et = et_a, x = x_a
    cdef double inv = 0.0, total = 0.0, bar, gsq, a, delta
    with nogil:
        for t in range(T):
            bar = 0.0
            gsq = 0.0
            for i in range(N):
                preds[t, i] = x[i]
                bar += x[i] * losses[t, i]
                gsq += losses[t, i] * losses[t, i]
            rl[t] = bar
            a = inv + alphas[t]
            inv = 0.5 * (a + sqrt(a * a + 4.0 * gsq / q))
            if inv > 0.0:
                for i in range(N):
                    x[i] -= losses[t, i] / inv
                _project(&x[0], N, dom_kind, &dom_center[0], dom_radius,
                         &dom_lo[0], &dom_hi[0])
                delta = gsq / inv
                et[t] = 1.0 / inv
            else:
                delta = 0.0
                et[t] = INFINITY
            total += delta
            de[t] = delta
            to[t] = total
    return preds_a, rl_a, de_a, to_a, et_a, nu_a


def run_seqopt(double[:, ::1] losses, double eps, double[::1] x1,
               int dom_kind, double[::1] dom_center, double dom_radius,
               double[::1] dom_lo, double[::1] dom_hi):
    cdef Py_ssize_t T = losses.shape[0], N = losses.shape[1], t, i
    preds_a = np.empty((T, N)); rl_a = np.empty(T); de_a = np.empty(T)
    to_a = np.empty(T); et_a = np.empty(T)
    nu_a = np.zeros(T, dtype=np.uint8)
    x_a = np.asarray(x1).copy()
    cdef double[:, ::1] preds = preds_a
    cdef double[::1] rl = rl_a, de = de_a, to = to_a, et = et_a, x = x_a
    cdef double sum_sq = 0.0, total = 0.0, bar, gsq, inv, delta
    with nogil:
        for t in range(T):
            bar = 0.0
            gsq = 0.0
            for i in range(N):
                preds[t, i] = x[i]
                bar += x[i] * losses[t, i]
                gsq += losses[t, i] * losses[t, i]
            rl[t] = bar
            sum_sq += gsq
            inv = eps + sqrt(sum_sq)
            for i in range(N):
                x[i] -= losses[t, i] / inv
            _project(&x[0], N, dom_kind, &dom_center[0], dom_radius,
                     &dom_lo[0], &dom_hi[0])
            delta = gsq / inv
            total += delta
            de[t] = delta
            to[t] = total
            et[t] = 1.0 / inv
    return preds_a, rl_a, de_a, to_a, et_a, nu_a


def run_prod(double[:, ::1] losses, double q, double c):
    cdef Py_ssize_t T = losses.shape[0], N = losses.shape[1], t, i
    preds_a = np.empty((T, N)); rl_a = np.empty(T); de_a = np.empty(T)
    to_a = np.empty(T); et_a = np.empty(T)
    nu_a = np.zeros(T, dtype=np.uint8)
    xp_a = np.empty(N); x_a = np.full(N, 1.0 / N)
    cdef double[:, ::1] preds = preds_a
    cdef double[::1] rl = rl_a, de = de_a, to = to_a, et = et_a, xp = xp_a, x = x_a
    cdef unsigned char[::1] nu = nu_a
    cdef double d_prev = 0.0, bar, s, r, delta, eta, cand, d_new, w, uni = 1.0 / N
    cdef bint null
    with nogil:
        for t in range(T):
            et[t] = q / d_prev if d_prev > 0.0 else INFINITY
            bar = 0.0
            for i in range(N):
                preds[t, i] = x[i]
                bar += x[i] * losses[t, i]
            rl[t] = bar
            s = 0.0
            for i in range(N):
                if fabs(bar - losses[t, i]) > s:
                    s = fabs(bar - losses[t, i])
            if s == 0.0:
                de[t] = 0.0
                to[t] = d_prev
                continue
            null = sqrt(q / 2.0) * s > d_prev - q * s
            if null:
                nu[t] = 1
                delta = sqrt(q / 2.0) * s
                for i in range(N):
                    xp[i] = x[i]
            else:
                eta = q / d_prev
                delta = 0.0
                for i in range(N):
                    r = bar - losses[t, i]
                    xp[i] = x[i] * (1.0 + eta * r)
                    cand = r - log1p(eta * r) / eta
                    if cand > delta:
                        delta = cand
            d_new = d_prev + delta
            w = d_prev / d_new
            # Renormalize: the update conserves sum(x) only in exact
            # arithmetic and rounding drift compounds multiplicatively.
            cand = 0.0
            for i in range(N):
                x[i] = xp[i] * w + (delta / d_new) * uni
                cand += x[i]
            for i in range(N):
                x[i] /= cand
            de[t] = delta
            to[t] = d_new
            d_prev = d_new
    return preds_a, rl_a, de_a, to_a, et_a, nu_a


def run_mlprod(double[:, ::1] losses, double q):
    cdef Py_ssize_t T = losses.shape[0], N = losses.shape[1], t, i, nzero
    preds_a = np.empty((T, N)); rl_a = np.empty(T); de_a = np.empty(T)
    to_a = np.empty(T); et_a = np.empty(T)
    nu_a = np.zeros(T, dtype=np.uint8)
    dv_a = np.empty((T, N)); tv_a = np.empty((T, N))
    x_a = np.ones(N); dvec_a = np.empty(N); totv_a = np.zeros(N); xp_a = np.empty(N)
    cdef double[:, ::1] preds = preds_a, dv = dv_a, tv = tv_a
    cdef double[::1] rl = rl_a, de = de_a, to = to_a, et = et_a
    cdef double[::1] x = x_a, dvec = dvec_a, totv = totv_a, xp = xp_a
    cdef unsigned char[::1] nu = nu_a
    cdef double bar, s, r, u, top, z, dmax, d_new
    cdef bint null
    with nogil:
        for t in range(T):
            top = 0.0
            for i in range(N):
                if totv[i] > top:
                    top = totv[i]
            et[t] = q / top if top > 0.0 else INFINITY
            nzero = 0
            for i in range(N):
                if totv[i] == 0.0:
                    nzero += 1
            z = 0.0
            if nzero > 0:
                for i in range(N):
                    preds[t, i] = 1.0 if totv[i] == 0.0 else 0.0
                    z += preds[t, i]
            else:
                for i in range(N):
                    preds[t, i] = x[i] / totv[i]
                    z += preds[t, i]
            bar = 0.0
            for i in range(N):
                preds[t, i] /= z
                bar += preds[t, i] * losses[t, i]
            rl[t] = bar
            s = 0.0
            for i in range(N):
                if fabs(bar - losses[t, i]) > s:
                    s = fabs(bar - losses[t, i])
            if s == 0.0:
                for i in range(N):
                    dv[t, i] = 0.0
                    tv[t, i] = totv[i]
                de[t] = 0.0
                to[t] = top
                continue
            null = False
            for i in range(N):
                if q * fabs(bar - losses[t, i]) >= 0.5 * totv[i]:
                    null = True
                    break
            dmax = 0.0
            if null:
                nu[t] = 1
                for i in range(N):
                    dvec[i] = s
                    xp[i] = x[i]
                dmax = s
            else:
                for i in range(N):
                    r = bar - losses[t, i]
                    if r == 0.0:
                        dvec[i] = 0.0
                        xp[i] = x[i]
                    else:
                        u = q * r / totv[i]
                        xp[i] = x[i] * (1.0 + u)
                        dvec[i] = r - log1p(u) * totv[i] / q
                        if dvec[i] < 0.0:
                            dvec[i] = 0.0
                    if dvec[i] > dmax:
                        dmax = dvec[i]
            top = 0.0
            for i in range(N):
                d_new = totv[i] + dvec[i]
                if d_new > 0.0:
                    x[i] = xp[i] * (totv[i] / d_new) + dvec[i] / d_new
                else:
                    x[i] = xp[i]
                totv[i] = d_new
                dv[t, i] = dvec[i]
                tv[t, i] = d_new
                if d_new > top:
                    top = d_new
            de[t] = dmax
            to[t] = top
    return preds_a, rl_a, de_a, to_a, et_a, nu_a, dv_a, tv_a


def run_hedge(double[:, ::1] losses, double q, bint pivot_zero):
    cdef Py_ssize_t T = losses.shape[0], N = losses.shape[1], t, i, count
    preds_a = np.empty((T, N)); rl_a = np.empty(T); de_a = np.empty(T)
    to_a = np.empty(T); et_a = np.empty(T)
    nu_a = np.zeros(T, dtype=np.uint8)
    m_a = np.empty(T)
    xp_a = np.empty(N); x_a = np.full(N, 1.0 / N)
    cdef double[:, ::1] preds = preds_a
    cdef double[::1] rl = rl_a, de = de_a, to = to_a, et = et_a, mv = m_a, xp = xp_a, x = x_a
    cdef double d_prev = 0.0, bar, m, mn, delta, eta, shift, z, d_new, w, uni = 1.0 / N
    with nogil:
        for t in range(T):
            et[t] = q / d_prev if d_prev > 0.0 else INFINITY
            bar = 0.0
            for i in range(N):
                preds[t, i] = x[i]
                bar += x[i] * losses[t, i]
            rl[t] = bar
            m = 0.0 if pivot_zero else bar
            mv[t] = m
            if d_prev == 0.0:
                mn = losses[t, 0]
                for i in range(1, N):
                    if losses[t, i] < mn:
                        mn = losses[t, i]
                delta = bar - mn
                if delta == 0.0:
                    for i in range(N):
                        xp[i] = x[i]
                else:
                    count = 0
                    for i in range(N):
                        if losses[t, i] == mn:
                            count += 1
                    for i in range(N):
                        xp[i] = 1.0 / count if losses[t, i] == mn else 0.0
            else:
                eta = q / d_prev
                shift = -INFINITY
                for i in range(N):
                    xp[i] = eta * (m - losses[t, i])
                    if xp[i] > shift:
                        shift = xp[i]
                z = 0.0
                for i in range(N):
                    xp[i] = x[i] * exp(xp[i] - shift)
                    z += xp[i]
                delta = (shift + log(z)) / eta + bar - m
                if delta < 0.0:
                    delta = 0.0
                for i in range(N):
                    xp[i] /= z
            d_new = d_prev + delta
            if d_new > 0.0:
                w = d_prev / d_new
                for i in range(N):
                    x[i] = xp[i] * w + (delta / d_new) * uni
            else:
                for i in range(N):
                    x[i] = xp[i]
            de[t] = delta
            to[t] = d_new
            d_prev = d_new
    return preds_a, rl_a, de_a, to_a, et_a, nu_a, m_a


def run_softbayes(double[:, ::1] prices, double q):
    cdef Py_ssize_t T = prices.shape[0], N = prices.shape[1], t, i
    preds_a = np.empty((T, N)); rl_a = np.empty(T); de_a = np.empty(T)
    to_a = np.empty(T); et_a = np.empty(T)
    nu_a = np.zeros(T, dtype=np.uint8)
    xp_a = np.empty(N); x_a = np.full(N, 1.0 / N)
    cdef double[:, ::1] preds = preds_a
    cdef double[::1] rl = rl_a, de = de_a, to = to_a, et = et_a, xp = xp_a, x = x_a
    cdef double d_prev = 2.0 * q, bar, eta, ratio, delta, cand, d_new, w, uni = 1.0 / N
    cdef Py_ssize_t bad_round = 0
    with nogil:
        for t in range(T):
            et[t] = q / d_prev
            bar = 0.0
            for i in range(N):
                preds[t, i] = x[i]
                bar += x[i] * prices[t, i]
            if bar <= 0.0:
                bad_round = t + 1
                break
            rl[t] = -log(bar)
            eta = q / d_prev
            delta = 0.0
            for i in range(N):
                ratio = prices[t, i] / bar
                xp[i] = x[i] * (1.0 - eta + eta * ratio)
                cand = log1p((eta / (1.0 - eta)) * ratio)
                if cand > delta:
                    delta = cand
            d_new = d_prev + delta
            w = d_prev / d_new
            for i in range(N):
                x[i] = xp[i] * w + (delta / d_new) * uni
            de[t] = delta
            to[t] = d_new
            d_prev = d_new
    if bad_round:
        raise ValueError(f"mixture price must be positive (round {bad_round})")
    return preds_a, rl_a, de_a, to_a, et_a, nu_a
