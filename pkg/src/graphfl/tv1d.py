"""Exact weighted 1D fused lasso in linear time, plus an optimality oracle.

solve_tv1d minimizes

    sum_r w_r * (y_r - z_r)^2  +  sum_r |z_{r+1} - z_r|

by forward piecewise-quadratic message passing with interval clipping and a
backward recovery sweep. The message derivative is piecewise linear and
nondecreasing; it is kept as a deque of knots where each knot stores the
(slope, intercept) change applied when crossing it left to right. Clipping the
derivative to [-1, 1] trims the deque from both ends and records the two clip
points used by the backward pass. Everything is O(m) amortized: each knot is
created once and consumed at most once.

The edge penalty is fixed at 1; callers fold their regularization strength
into w (see the z-update in solver.py). w may be a scalar or a per-position
vector, which is what the per-slack penalty variant feeds in.

verify_tv1d_kkt is the independent check: stationarity forces the edge
subgradients by forward substitution, so optimality is exactly "the forced
subgradients are feasible". The prefix sums run in extended precision so the
oracle's own roundoff stays well below the 1e-8 tolerance it certifies.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .errors import LengthMismatch

__all__ = ["solve_tv1d", "verify_tv1d_kkt", "tv1d_objective"]


@njit(cache=True, nogil=True)
def _dp_span(y, w, z, s, e, x, a, b, tm, tp):
    """Solve one span y[s:e] with weights w[s:e] into z[s:e].

    x, a, b are knot scratch of length >= 2*(e-s); tm, tp of length >= e-s-1.
    Derivative lines are affine pieces d(t) = a*t + b; the deque occupies
    x[l..r] and (afirst, bfirst) / (alast, blast) are the lines left of x[l]
    and right of x[r].
    """
    n = e - s
    if n == 1:
        z[s] = y[s]
        return
    ad = 2.0 * w[s]
    bd = -2.0 * w[s] * y[s]
    tm[0] = (-1.0 - bd) / ad
    tp[0] = (1.0 - bd) / ad
    l = n - 1
    r = n
    x[l] = tm[0]
    a[l] = ad
    b[l] = bd + 1.0
    x[r] = tp[0]
    a[r] = -ad
    b[r] = 1.0 - bd
    ad = 2.0 * w[s + 1]
    bd = -2.0 * w[s + 1] * y[s + 1]
    afirst = ad
    bfirst = bd - 1.0
    alast = ad
    blast = bd + 1.0
    for k in range(1, n - 1):
        # clip from the left: find where the derivative reaches -1
        alo = afirst
        blo = bfirst
        lo = l
        while lo <= r and alo * x[lo] + blo < -1.0:
            alo += a[lo]
            blo += b[lo]
            lo += 1
        tmk = (-1.0 - blo) / alo
        tm[k] = tmk
        # clip from the right: find where it reaches +1
        ahi = alast
        bhi = blast
        hi = r
        while hi >= lo and ahi * x[hi] + bhi > 1.0:
            ahi -= a[hi]
            bhi -= b[hi]
            hi -= 1
        tpk = (1.0 - bhi) / ahi
        tp[k] = tpk
        l = lo - 1
        x[l] = tmk
        a[l] = alo
        b[l] = blo + 1.0
        r = hi + 1
        x[r] = tpk
        a[r] = -ahi
        b[r] = 1.0 - bhi
        ad = 2.0 * w[s + k + 1]
        bd = -2.0 * w[s + k + 1] * y[s + k + 1]
        afirst = ad
        bfirst = bd - 1.0
        alast = ad
        blast = bd + 1.0
    # last position: unclipped root of the final derivative
    alo = afirst
    blo = bfirst
    lo = l
    while lo <= r and alo * x[lo] + blo < 0.0:
        alo += a[lo]
        blo += b[lo]
        lo += 1
    z[s + n - 1] = -blo / alo
    for k in range(n - 2, -1, -1):
        zk = z[s + k + 1]
        if zk > tp[k]:
            zk = tp[k]
        elif zk < tm[k]:
            zk = tm[k]
        z[s + k] = zk


@njit(cache=True, nogil=True)
def _dp_spans(y, w, starts, stops, z):
    """Run _dp_span over every [starts[i], stops[i]) span, sharing scratch."""
    nmax = 1
    for i in range(starts.size):
        ln = stops[i] - starts[i]
        if ln > nmax:
            nmax = ln
    x = np.empty(2 * nmax)
    a = np.empty(2 * nmax)
    b = np.empty(2 * nmax)
    tm = np.empty(nmax)
    tp = np.empty(nmax)
    for i in range(starts.size):
        _dp_span(y, w, z, starts[i], stops[i], x, a, b, tm, tp)


def _as_weights(w, m: int) -> np.ndarray:
    w_arr = np.asarray(w, dtype=np.float64)
    if w_arr.ndim == 0:
        w_arr = np.full(m, float(w_arr))
    elif w_arr.shape != (m,):
        raise LengthMismatch(f"w has shape {w_arr.shape}, expected scalar or ({m},)")
    if not np.all(np.isfinite(w_arr)) or np.any(w_arr <= 0.0):
        raise ValueError("weights must be finite and > 0")
    return w_arr


def solve_tv1d(y_tilde, w) -> np.ndarray:
    """Minimize sum w_r (y_r - z_r)^2 + sum |z_{r+1} - z_r| exactly.

    Parameters
    ----------
    y_tilde : array_like
        Per-position targets, length >= 1 (length 0 returns empty).
    w : float or array_like
        Positive data-term weight, scalar or one value per position.
    """
    y = np.ascontiguousarray(y_tilde, dtype=np.float64)
    if y.ndim != 1:
        raise ValueError(f"y_tilde must be 1-D, got shape {y.shape}")
    if y.size == 0:
        return y.copy()
    if not np.all(np.isfinite(y)):
        raise ValueError("y_tilde must be finite")
    w_arr = _as_weights(w, y.size)
    z = np.empty_like(y)
    starts = np.zeros(1, dtype=np.int64)
    stops = np.full(1, y.size, dtype=np.int64)
    _dp_spans(y, w_arr, starts, stops, z)
    return z


def tv1d_objective(y_tilde, w, z) -> float:
    y = np.asarray(y_tilde, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    w_arr = _as_weights(w, y.size)
    return float(np.sum(w_arr * (y - z) ** 2) + np.sum(np.abs(np.diff(z))))


def verify_tv1d_kkt(y_tilde, w, z, tol: float = 1e-8) -> bool:
    """True iff z satisfies the fused-lasso optimality conditions within tol.

    Stationarity 2w_r(z_r - y_r) + s_{r-1} - s_r = 0 with boundary s = 0
    forces the edge subgradients by forward substitution,
    s_r = s_{r-1} + 2w_r(z_r - y_r). z is optimal iff every forced s_r lies in
    [-1, 1], equals sign(z_{r+1} - z_r) where that difference is nonzero, and
    the final boundary value returns to 0. Differences with |d| <= tol count
    as fused; all interval checks are slackened by tol. The prefix sum runs in
    long double so the check's own accumulation error is negligible.
    """
    y = np.asarray(y_tilde, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if y.ndim != 1 or z.ndim != 1:
        raise ValueError("y_tilde and z must be 1-D")
    if y.size != z.size:
        raise LengthMismatch(f"z has length {z.size}, y_tilde has {y.size}")
    if y.size == 0:
        return True
    w_arr = _as_weights(w, y.size)
    if y.size == 1:
        return abs(2.0 * w_arr[0] * (z[0] - y[0])) <= tol
    ld = np.longdouble
    terms = 2.0 * w_arr.astype(ld) * (z.astype(ld) - y.astype(ld))
    s = np.cumsum(terms)
    if abs(float(s[-1])) > tol:
        return False
    edge_s = s[:-1].astype(np.float64)
    if np.any(edge_s > 1.0 + tol) or np.any(edge_s < -1.0 - tol):
        return False
    d = np.diff(z)
    rising = d > tol
    falling = d < -tol
    if np.any(np.abs(edge_s[rising] - 1.0) > tol):
        return False
    if np.any(np.abs(edge_s[falling] + 1.0) > tol):
        return False
    return True
