# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled per-round loops; mirrors fesl.backends.pyloops exactly.

Same entry points, same argument order, same return structure. Kept in
lockstep with the pure backend: any semantic change lands in both files.
"""

import numpy as np

from libc.math cimport exp, log1p, sqrt

NAME = "compiled"

LOGISTIC, SQUARE = 0, 1

cdef double LN2 = 0.6931471805599453


cdef inline double _loss(int kind, double f, double y) nogil:
    cdef double z, d
    if kind == 0:
        z = -y * f
        if z > 0:
            return (z + log1p(exp(-z))) / LN2
        return log1p(exp(z)) / LN2
    d = y - f
    return d * d


cdef inline double _dloss(int kind, double f, double y) nogil:
    cdef double z, e, sig
    if kind == 0:
        z = -y * f
        if z >= 0:
            sig = 1.0 / (1.0 + exp(-z))
        else:
            e = exp(z)
            sig = e / (1.0 + e)
        return (-y / LN2) * sig
    return 2.0 * (f - y)


cdef inline double _clip01(double v) nogil:
    if v > 1.0:
        return 1.0
    if v < 0.0:
        return 0.0
    return v


cdef inline double _dot(double[::1] a, double[::1] b) nogil:
    cdef Py_ssize_t j
    cdef double s = 0.0
    for j in range(a.shape[0]):
        s += a[j] * b[j]
    return s


cdef inline void _step(double[::1] w, double[::1] x, double scale,
                       double radius) nogil:
    cdef Py_ssize_t j
    cdef double nrm = 0.0, shrink
    for j in range(w.shape[0]):
        w[j] -= scale * x[j]
        nrm += w[j] * w[j]
    nrm = sqrt(nrm)
    if nrm > radius:
        shrink = radius / nrm
        for j in range(w.shape[0]):
            w[j] *= shrink


def ogd_loop(X, y, w0, step_scale, radius, kind):
    """Projected OGD over the rows of X with step 1/(c*sqrt(t))."""
    cdef double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    w_arr = np.array(w0, dtype=np.float64, copy=True)
    cdef double[::1] w = w_arr
    cdef Py_ssize_t n = Xv.shape[0], t
    preds_arr = np.empty(n)
    losses_arr = np.empty(n)
    cdef double[::1] preds = preds_arr
    cdef double[::1] losses = losses_arr
    cdef double c = step_scale, R = radius, f, tau
    cdef int k = kind
    with nogil:
        for t in range(n):
            f = _dot(w, Xv[t])
            preds[t] = f
            losses[t] = _loss(k, f, yv[t])
            tau = 1.0 / (c * sqrt(t + 1.0))
            _step(w, Xv[t], tau * _dloss(k, f, yv[t]), R)
    return w_arr, preds_arr, losses_arr


def combine_loop(X1, X2, y, w1_0, w2_0, step_scale, radius, kind, rate, clip):
    """Both base learners plus the weighted-average ensemble."""
    cdef double[:, ::1] X1v = np.ascontiguousarray(X1, dtype=np.float64)
    cdef double[:, ::1] X2v = np.ascontiguousarray(X2, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    w1_arr = np.array(w1_0, dtype=np.float64, copy=True)
    w2_arr = np.array(w2_0, dtype=np.float64, copy=True)
    cdef double[::1] w1 = w1_arr
    cdef double[::1] w2 = w2_arr
    cdef Py_ssize_t n = X1v.shape[0], t
    out = {key: np.empty(n) for key in
           ("f1", "f2", "pred", "loss_raw", "loss1_raw", "loss2_raw", "alpha1")}
    cdef double[::1] f1s = out["f1"]
    cdef double[::1] f2s = out["f2"]
    cdef double[::1] preds = out["pred"]
    cdef double[::1] lraw = out["loss_raw"]
    cdef double[::1] l1raw = out["loss1_raw"]
    cdef double[::1] l2raw = out["loss2_raw"]
    cdef double[::1] alphas = out["alpha1"]
    cdef double c = step_scale, R = radius, eta = rate
    cdef int k = kind
    cdef bint do_clip = clip
    cdef double a1 = 0.5, a2 = 0.5
    cdef double f1, f2, p, yt, l1, l2, l1u, l2u, m, v1, v2, total, tau
    with nogil:
        for t in range(n):
            yt = yv[t]
            f1 = _dot(w1, X1v[t])
            f2 = _dot(w2, X2v[t])
            p = a1 * f1 + a2 * f2
            l1 = _loss(k, f1, yt)
            l2 = _loss(k, f2, yt)
            f1s[t] = f1
            f2s[t] = f2
            preds[t] = p
            lraw[t] = _loss(k, p, yt)
            l1raw[t] = l1
            l2raw[t] = l2
            alphas[t] = a1
            l1u = _clip01(l1) if do_clip else l1
            l2u = _clip01(l2) if do_clip else l2
            m = l1u if l1u < l2u else l2u
            v1 = a1 * exp(-eta * (l1u - m))
            v2 = a2 * exp(-eta * (l2u - m))
            total = v1 + v2
            a1 = v1 / total
            a2 = v2 / total
            tau = 1.0 / (c * sqrt(t + 1.0))
            _step(w1, X1v[t], tau * _dloss(k, f1, yt), R)
            _step(w2, X2v[t], tau * _dloss(k, f2, yt), R)
    out["w1"], out["w2"] = w1_arr, w2_arr
    return out


def select_loop(X1, X2, y, w1_0, w2_0, step_scale, radius, kind, rate, share,
                uniforms, clip):
    """Both base learners plus the fixed-share selection ensemble."""
    cdef double[:, ::1] X1v = np.ascontiguousarray(X1, dtype=np.float64)
    cdef double[:, ::1] X2v = np.ascontiguousarray(X2, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef double[::1] uv = np.ascontiguousarray(uniforms, dtype=np.float64)
    w1_arr = np.array(w1_0, dtype=np.float64, copy=True)
    w2_arr = np.array(w2_0, dtype=np.float64, copy=True)
    cdef double[::1] w1 = w1_arr
    cdef double[::1] w2 = w2_arr
    cdef Py_ssize_t n = X1v.shape[0], t
    out = {key: np.empty(n) for key in
           ("f1", "f2", "pred", "loss_raw", "loss1_raw", "loss2_raw", "alpha1")}
    choice_arr = np.empty(n, dtype=np.int64)
    cdef double[::1] f1s = out["f1"]
    cdef double[::1] f2s = out["f2"]
    cdef double[::1] preds = out["pred"]
    cdef double[::1] lraw = out["loss_raw"]
    cdef double[::1] l1raw = out["loss1_raw"]
    cdef double[::1] l2raw = out["loss2_raw"]
    cdef double[::1] alphas = out["alpha1"]
    cdef long long[::1] choices = choice_arr
    cdef double c = step_scale, R = radius, eta = rate, delta = share
    cdef int k = kind
    cdef bint do_clip = clip
    cdef double a1 = 0.5, a2 = 0.5
    cdef double f1, f2, p, yt, l1, l2, l1u, l2u, m, v1, v2, pool, r1, r2, total, tau
    cdef int pick
    with nogil:
        for t in range(n):
            yt = yv[t]
            f1 = _dot(w1, X1v[t])
            f2 = _dot(w2, X2v[t])
            pick = 1 if uv[t] < a1 / (a1 + a2) else 2
            p = f1 if pick == 1 else f2
            l1 = _loss(k, f1, yt)
            l2 = _loss(k, f2, yt)
            f1s[t] = f1
            f2s[t] = f2
            preds[t] = p
            lraw[t] = _loss(k, p, yt)
            l1raw[t] = l1
            l2raw[t] = l2
            alphas[t] = a1
            choices[t] = pick
            l1u = _clip01(l1) if do_clip else l1
            l2u = _clip01(l2) if do_clip else l2
            m = l1u if l1u < l2u else l2u
            v1 = a1 * exp(-eta * (l1u - m))
            v2 = a2 * exp(-eta * (l2u - m))
            pool = v1 + v2
            r1 = delta * pool / 2.0 + (1.0 - delta) * v1
            r2 = delta * pool / 2.0 + (1.0 - delta) * v2
            total = r1 + r2
            a1 = r1 / total
            a2 = r2 / total
            tau = 1.0 / (c * sqrt(t + 1.0))
            _step(w1, X1v[t], tau * _dloss(k, f1, yt), R)
            _step(w2, X2v[t], tau * _dloss(k, f2, yt), R)
    out["choice"] = choice_arr
    out["w1"], out["w2"] = w1_arr, w2_arr
    return out
