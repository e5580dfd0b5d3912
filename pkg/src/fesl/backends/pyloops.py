"""Pure NumPy implementation of the per-round hot loops.

This is the fallback backend selected when the compiled accelerator is
unavailable; it is the behavioral reference the accelerator is tested
against. Scalar loss math mirrors the compiled code branch for branch so
the two backends agree to rounding.

Loss kinds are passed as integer codes: 0 logistic, 1 square.
"""

from __future__ import annotations

import math

import numpy as np

NAME = "python"

LOGISTIC, SQUARE = 0, 1
_LN2 = math.log(2.0)


def _loss(kind: int, f: float, y: float) -> float:
    if kind == LOGISTIC:
        z = -y * f
        if z > 0:
            return (z + math.log1p(math.exp(-z))) / _LN2
        return math.log1p(math.exp(z)) / _LN2
    d = y - f
    return d * d


def _dloss(kind: int, f: float, y: float) -> float:
    if kind == LOGISTIC:
        z = -y * f
        if z >= 0:
            sig = 1.0 / (1.0 + math.exp(-z))
        else:
            e = math.exp(z)
            sig = e / (1.0 + e)
        return (-y / _LN2) * sig
    return 2.0 * (f - y)


def _clip01(v: float) -> float:
    return 1.0 if v > 1.0 else (0.0 if v < 0.0 else v)


def _step(w: np.ndarray, x: np.ndarray, scale: float, radius: float) -> None:
    """In-place projected gradient step: w <- proj(w - scale * x)."""
    w -= scale * x
    nrm = math.sqrt(float(np.dot(w, w)))
    if nrm > radius:
        w *= radius / nrm


def ogd_loop(X, y, w0, step_scale, radius, kind):
    """Projected OGD over the rows of X with step 1/(c*sqrt(t)).

    Returns (w_final, predictions, raw_losses).
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    w = np.array(w0, dtype=np.float64, copy=True)
    n = X.shape[0]
    preds = np.empty(n)
    losses = np.empty(n)
    for t in range(n):
        x = X[t]
        f = float(np.dot(w, x))
        preds[t] = f
        losses[t] = _loss(kind, f, y[t])
        tau = 1.0 / (step_scale * math.sqrt(t + 1.0))
        _step(w, x, tau * _dloss(kind, f, y[t]), radius)
    return w, preds, losses


def combine_loop(X1, X2, y, w1_0, w2_0, step_scale, radius, kind, rate, clip):
    """Run both base learners and the weighted-average ensemble.

    X1 carries the recovered old-space rows, X2 the new-space rows. Weight
    updates consume the base losses, clipped to [0, 1] when ``clip`` is
    set. Returns a dict of per-round arrays plus the final weight vectors;
    ``alpha1`` is the first model's weight as used for that round's
    prediction.
    """
    X1 = np.ascontiguousarray(X1, dtype=np.float64)
    X2 = np.ascontiguousarray(X2, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    w1 = np.array(w1_0, dtype=np.float64, copy=True)
    w2 = np.array(w2_0, dtype=np.float64, copy=True)
    n = X1.shape[0]
    out = {k: np.empty(n) for k in
           ("f1", "f2", "pred", "loss_raw", "loss1_raw", "loss2_raw", "alpha1")}
    a1, a2 = 0.5, 0.5
    for t in range(n):
        x1, x2, yt = X1[t], X2[t], y[t]
        f1 = float(np.dot(w1, x1))
        f2 = float(np.dot(w2, x2))
        p = a1 * f1 + a2 * f2
        l1 = _loss(kind, f1, yt)
        l2 = _loss(kind, f2, yt)
        out["f1"][t] = f1
        out["f2"][t] = f2
        out["pred"][t] = p
        out["loss_raw"][t] = _loss(kind, p, yt)
        out["loss1_raw"][t] = l1
        out["loss2_raw"][t] = l2
        out["alpha1"][t] = a1
        l1u = _clip01(l1) if clip else l1
        l2u = _clip01(l2) if clip else l2
        m = l1u if l1u < l2u else l2u
        v1 = a1 * math.exp(-rate * (l1u - m))
        v2 = a2 * math.exp(-rate * (l2u - m))
        total = v1 + v2
        a1, a2 = v1 / total, v2 / total
        tau = 1.0 / (step_scale * math.sqrt(t + 1.0))
        _step(w1, x1, tau * _dloss(kind, f1, yt), radius)
        _step(w2, x2, tau * _dloss(kind, f2, yt), radius)
    out["w1"], out["w2"] = w1, w2
    return out


def select_loop(X1, X2, y, w1_0, w2_0, step_scale, radius, kind, rate, share,
                uniforms, clip):
    """Run both base learners and the fixed-share selection ensemble.

    ``uniforms`` supplies one pre-drawn U(0,1) variate per round; round t
    picks model 1 iff ``uniforms[t] < alpha1/(alpha1+alpha2)``. Returns
    the same arrays as :func:`combine_loop` plus an integer ``choice``
    array (1-based).
    """
    X1 = np.ascontiguousarray(X1, dtype=np.float64)
    X2 = np.ascontiguousarray(X2, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    uniforms = np.ascontiguousarray(uniforms, dtype=np.float64)
    w1 = np.array(w1_0, dtype=np.float64, copy=True)
    w2 = np.array(w2_0, dtype=np.float64, copy=True)
    n = X1.shape[0]
    out = {k: np.empty(n) for k in
           ("f1", "f2", "pred", "loss_raw", "loss1_raw", "loss2_raw", "alpha1")}
    choice = np.empty(n, dtype=np.int64)
    a1, a2 = 0.5, 0.5
    for t in range(n):
        x1, x2, yt = X1[t], X2[t], y[t]
        f1 = float(np.dot(w1, x1))
        f2 = float(np.dot(w2, x2))
        pick = 1 if uniforms[t] < a1 / (a1 + a2) else 2
        p = f1 if pick == 1 else f2
        l1 = _loss(kind, f1, yt)
        l2 = _loss(kind, f2, yt)
        out["f1"][t] = f1
        out["f2"][t] = f2
        out["pred"][t] = p
        out["loss_raw"][t] = _loss(kind, p, yt)
        out["loss1_raw"][t] = l1
        out["loss2_raw"][t] = l2
        out["alpha1"][t] = a1
        choice[t] = pick
        l1u = _clip01(l1) if clip else l1
        l2u = _clip01(l2) if clip else l2
        m = l1u if l1u < l2u else l2u
        v1 = a1 * math.exp(-rate * (l1u - m))
        v2 = a2 * math.exp(-rate * (l2u - m))
        pool = v1 + v2
        r1 = share * pool / 2.0 + (1.0 - share) * v1
        r2 = share * pool / 2.0 + (1.0 - share) * v2
        total = r1 + r2
        a1, a2 = r1 / total, r2 / total
        tau = 1.0 / (step_scale * math.sqrt(t + 1.0))
        _step(w1, x1, tau * _dloss(kind, f1, yt), radius)
        _step(w2, x2, tau * _dloss(kind, f2, yt), radius)
    out["choice"] = choice
    out["w1"], out["w2"] = w1, w2
    return out
