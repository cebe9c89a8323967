"""Tensor tanh-sinh quadrature for the (u, v) double integrals behind the kernels.

All kernels reduce to integrals of the form

    int int (1-u^2)^(A-1/2) (1-v^2)^(B-1/2) g(u, v) (1-z)^(-k) du dv

whose integrand concentrates at the corner ``u = v = 1`` as ``theta -> varphi``
and whose magnitude overflows for large ``A + B``.  Both issues are handled by
(i) the tanh-sinh map, which clusters nodes double-exponentially at both ends
and absorbs the algebraic endpoint factors, and (ii) evaluating every term in
log space against a common shift.  ``1 - z`` is assembled as
``2 sin^2((theta-varphi)/4) + s (1-u) + c (1-v)`` so nodes next to the corner
keep full relative accuracy.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

N_MOMENTS = 5
# moments, in order:
#   0: int W (1-z)^-(K-1)
#   1: int W d_theta(1-z) (1-z)^-K
#   2: int W d_varphi(1-z) (1-z)^-K
#   3: int W d_theta [d_theta(1-z) (1-z)^-K]
#   4: int W d_varphi[d_theta(1-z) (1-z)^-K]
# with W = (1-u^2)^(A-1/2) (1-v^2)^(B-1/2) and K = A + B + 2.

LOG_HALF_PI = math.log(0.5 * math.pi)
LOG2 = math.log(2.0)


@njit(cache=True)
def _softplus(x):
    if x > 0:
        return x + math.log1p(math.exp(-x))
    return math.log1p(math.exp(x))


@njit(cache=True)
def de_nodes(h, tmax):
    """Nodes of the tanh-sinh rule on [-1, 1] with step ``h``.

    Returns ``u``, ``log(1-u)``, ``log(1+u)`` and ``log(h du/dt)``.
    """
    n = int(math.ceil(tmax / h))
    m = 2 * n + 1
    u = np.empty(m)
    l1m = np.empty(m)
    l1p = np.empty(m)
    lw = np.empty(m)
    for i in range(m):
        t = (i - n) * h
        q = 0.5 * math.pi * math.sinh(t)
        u[i] = math.tanh(q)
        l1m[i] = LOG2 - _softplus(2.0 * q)
        l1p[i] = LOG2 - _softplus(-2.0 * q)
        aq = abs(q)
        log_sech = LOG2 - aq - math.log1p(math.exp(-2.0 * aq))
        lw[i] = math.log(h) + LOG_HALF_PI + math.log(math.cosh(t)) + 2.0 * log_sech
    return u, l1m, l1p, lw


@njit(cache=True)
def _accumulate(A, B, theta, phi, h, n, fresh, prune, out, absout, shift):
    """Add one refinement level to the running sums.

    Node indices run over ``-n..n`` with step ``h``; unless ``fresh``, only
    nodes with an odd index in some coordinate are new (the rest were summed
    at step ``2h`` and the caller has already rescaled by 1/4).  Terms whose
    a-priori bound is below ``shift - prune`` are skipped.  Sums are kept
    relative to ``exp(shift)``, rescaled online; the final shift is returned.
    """
    K = A + B + 2.0
    uu, u1m, u1p, uw = de_nodes(h, n * h)
    m = uu.shape[0]
    lu = np.empty(m)
    omu = np.empty(m)
    lv = np.empty(m)
    omv = np.empty(m)
    lu_max = -np.inf
    lv_max = -np.inf
    for i in range(m):
        lu[i] = (A - 0.5) * (u1m[i] + u1p[i]) + uw[i]
        lv[i] = (B - 0.5) * (u1m[i] + u1p[i]) + uw[i]
        omu[i] = math.exp(u1m[i])
        omv[i] = omu[i]
        lu_max = max(lu_max, lu[i])
        lv_max = max(lv_max, lv[i])

    st, ct = math.sin(0.5 * theta), math.cos(0.5 * theta)
    sp, cp = math.sin(0.5 * phi), math.cos(0.5 * phi)
    s = st * sp
    c = ct * cp
    delta = 2.0 * math.sin(0.25 * (theta - phi)) ** 2
    d0 = 0.5 * math.sin(0.5 * (theta - phi))
    cu = 0.5 * ct * sp
    cv = 0.5 * st * cp
    km1 = K - 1.0

    col_bound = np.empty(m)
    for k in range(m):
        col_bound[k] = lv[k] + lu_max - km1 * math.log(delta + c * omv[k])

    for i in range(m):
        row_bound = lu[i] + lv_max - km1 * math.log(delta + s * omu[i])
        if row_bound < shift - prune:
            continue
        odd_i = (i - n) % 2 != 0
        ui = uu[i]
        oi = omu[i]
        for k in range(m):
            if not fresh and not odd_i and (k - n) % 2 == 0:
                continue
            if col_bound[k] < shift - prune:
                continue
            w = delta + s * oi + c * omv[k]
            val = lu[i] + lv[k] - km1 * math.log(w)
            if val < shift - prune:
                continue
            if val > shift:
                sc = math.exp(shift - val)
                for r in range(N_MOMENTS):
                    out[r] *= sc
                    absout[r] *= sc
                shift = val
            e = math.exp(val - shift)
            inv = 1.0 / w
            e1 = e * inv
            e2 = e1 * inv
            ok = omv[k]
            dth = d0 + oi * cu - ok * cv
            dph = -d0 + oi * cv - ok * cu
            z = 1.0 - w
            dthph = -0.25 * (ui * c + uu[k] * s)
            t3a = e1 * 0.25 * z
            t3b = K * e2 * dth * dth
            t4a = e1 * dthph
            t4b = K * e2 * dth * dph
            out[0] += e
            out[1] += e1 * dth
            out[2] += e1 * dph
            out[3] += t3a - t3b
            out[4] += t4a - t4b
            absout[0] += e
            absout[1] += abs(e1 * dth)
            absout[2] += abs(e1 * dph)
            absout[3] += abs(t3a) + abs(t3b)
            absout[4] += abs(t4a) + abs(t4b)
    return shift


@njit(cache=True)
def kernel_moments_batch(A, B, thetas, phis, h0, max_level, tol, tmax, prune=50.0):
    """Adaptive moments for a batch of (theta, varphi) pairs at fixed (A, B).

    The step is halved from ``h0`` (nested: old nodes are reused) until every
    moment changes by less than ``tol`` relative, measured against
    ``max(|m|, 1e-6 * sum|terms|)``, or ``max_level`` halvings were spent.
    Returns ``(moments, shifts, levels, rel_change)``; the true moment is
    ``moments[p, r] * exp(shifts[p])``.
    """
    npts = thetas.shape[0]
    moments = np.empty((npts, N_MOMENTS))
    shifts = np.empty(npts)
    levels = np.empty(npts, dtype=np.int64)
    changes = np.empty(npts)
    cur = np.zeros(N_MOMENTS)
    cur_abs = np.zeros(N_MOMENTS)
    prev = np.empty(N_MOMENTS)
    n0 = int(math.ceil(tmax / h0))
    for p in range(npts):
        for r in range(N_MOMENTS):
            cur[r] = 0.0
            cur_abs[r] = 0.0
        h = h0
        n = n0
        shift = _accumulate(A, B, thetas[p], phis[p], h, n, True, np.inf, cur, cur_abs, -np.inf)
        level = 0
        change = np.inf
        while True:
            for r in range(N_MOMENTS):
                prev[r] = cur[r]
                cur[r] *= 0.25
                cur_abs[r] *= 0.25
            prev_shift = shift
            level += 1
            h *= 0.5
            n *= 2
            shift = _accumulate(A, B, thetas[p], phis[p], h, n, False, prune, cur, cur_abs, shift)
            scale = math.exp(prev_shift - shift)
            change = 0.0
            for r in range(N_MOMENTS):
                ref = max(abs(cur[r]), 1e-6 * cur_abs[r])
                if ref > 0.0:
                    d = abs(cur[r] - prev[r] * scale) / ref
                    if d > change:
                        change = d
            if change < tol or level >= max_level:
                break
        for r in range(N_MOMENTS):
            moments[p, r] = cur[r]
        shifts[p] = shift
        levels[p] = level
        changes[p] = change
    return moments, shifts, levels, changes


def truncation_radius(exponent: float) -> float:
    """Half-width ``tmax`` of the tanh-sinh window for an endpoint factor ``(1-u)^exponent``.

    Chosen so the neglected end mass is below ``exp(-45)`` even when the
    ``(1-z)^-K`` factor peaks at distance ``~1e-13`` from the corner.
    """
    e = max(exponent + 1.0, 1e-3)
    return max(3.0, math.log((2.0 / math.pi) * (45.0 / e + 30.0)))
