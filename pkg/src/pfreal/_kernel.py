"""Compiled predictor-corrector path tracking.

A homotopy is handed over as flat arrays: term ``k`` of polynomial ``i``
(``ptr[i] <= k < ptr[i+1]``) has coefficient ``a[k] + t*b[k]`` and exponent row
``exps[k]``.  ``t`` is complex so the Cauchy endgame can circle the origin.
"""

import math

import numpy as np
from numba import njit

OK = 0
FINITE = 1
DIVERGED = 2
FAILED = 3

# slots of the float parameter vector
P_STEP_INIT = 0
P_STEP_MIN = 1
P_STEP_MAX = 2
P_TOL = 3
P_MAXIT = 4
P_RADIUS = 5
P_T_EG = 6
P_T_MIN = 7
P_MAX_STEPS = 8
P_TRACK_TOL = 9
N_PARAMS = 10

CAUCHY_SAMPLES = 16
CAUCHY_MAX_CYCLE = 8
SINGULAR_COND = 1e12


@njit(cache=True)
def _norm(x):
    s = 0.0
    for v in x:
        s += v.real * v.real + v.imag * v.imag
    return math.sqrt(s)


@njit(cache=True)
def _dist(x, y):
    s = 0.0
    for i in range(x.shape[0]):
        d = x[i] - y[i]
        s += d.real * d.real + d.imag * d.imag
    return math.sqrt(s)


@njit(cache=True)
def _solve(A, rhs, out):
    """Gaussian elimination with partial pivoting; False if numerically singular."""
    n = A.shape[0]
    M = A.copy()
    r = rhs.copy()
    scale = 0.0
    for i in range(n):
        for j in range(n):
            v = abs(M[i, j])
            if v > scale:
                scale = v
    if scale == 0.0:
        return False
    for c in range(n):
        p = c
        best = abs(M[c, c])
        for i in range(c + 1, n):
            v = abs(M[i, c])
            if v > best:
                best = v
                p = i
        if best <= 1e-300 or best < 1e-15 * scale:
            return False
        if p != c:
            for j in range(n):
                tmp = M[c, j]
                M[c, j] = M[p, j]
                M[p, j] = tmp
            tmp = r[c]
            r[c] = r[p]
            r[p] = tmp
        piv = M[c, c]
        for i in range(c + 1, n):
            f = M[i, c] / piv
            if f != 0:
                for j in range(c, n):
                    M[i, j] -= f * M[c, j]
                r[i] -= f * r[c]
    for i in range(n - 1, -1, -1):
        s = r[i]
        for j in range(i + 1, n):
            s -= M[i, j] * out[j]
        out[i] = s / M[i, i]
    return True


@njit(cache=True)
def _evaluate(a, b, exps, ptr, x, t, H, J, Ht):
    n = x.shape[0]
    for i in range(n):
        H[i] = 0.0
        Ht[i] = 0.0
        for j in range(n):
            J[i, j] = 0.0
        for k in range(ptr[i], ptr[i + 1]):
            m = 1.0 + 0.0j
            for j in range(n):
                e = exps[k, j]
                for _ in range(e):
                    m *= x[j]
            c = a[k] + t * b[k]
            H[i] += c * m
            Ht[i] += b[k] * m
            for j in range(n):
                e = exps[k, j]
                if e == 0:
                    continue
                d = 1.0 + 0.0j
                for l in range(n):
                    el = exps[k, l]
                    if l == j:
                        el -= 1
                    for _ in range(el):
                        d *= x[l]
                J[i, j] += c * e * d


@njit(cache=True)
def _residual(a, b, exps, ptr, x, t):
    n = x.shape[0]
    H = np.empty(n, np.complex128)
    J = np.empty((n, n), np.complex128)
    Ht = np.empty(n, np.complex128)
    _evaluate(a, b, exps, ptr, x, t, H, J, Ht)
    r = 0.0
    for v in H:
        if abs(v) > r:
            r = abs(v)
    return r


@njit(cache=True)
def _backward_error(a, b, exps, ptr, x, t):
    """Max over equations of |f_i(x)| / sum_k |c_k| max(1, |x|)^deg_k."""
    n = x.shape[0]
    nx = max(1.0, _norm(x))
    worst = 0.0
    for i in range(n):
        f = 0.0 + 0.0j
        w = 0.0
        for k in range(ptr[i], ptr[i + 1]):
            m = 1.0 + 0.0j
            deg = 0
            for j in range(n):
                deg += exps[k, j]
                for _ in range(exps[k, j]):
                    m *= x[j]
            c = a[k] + t * b[k]
            f += c * m
            w += abs(c) * nx**deg
        r = abs(f) / w if w > 0 else abs(f)
        if r > worst:
            worst = r
    return worst


@njit(cache=True)
def _newton(a, b, exps, ptr, x, t, maxit, tol):
    """Newton at fixed t, in place.  Returns (converged, last step norm)."""
    n = x.shape[0]
    H = np.empty(n, np.complex128)
    J = np.empty((n, n), np.complex128)
    Ht = np.empty(n, np.complex128)
    dx = np.empty(n, np.complex128)
    last = np.inf
    for _ in range(maxit):
        _evaluate(a, b, exps, ptr, x, t, H, J, Ht)
        if not _solve(J, -H, dx):
            return False, last
        for i in range(n):
            x[i] += dx[i]
        last = _norm(dx)
        if last <= tol * (1.0 + _norm(x)):
            return True, last
    return False, last


@njit(cache=True)
def _velocity(a, b, exps, ptr, x, t, dt, out):
    n = x.shape[0]
    H = np.empty(n, np.complex128)
    J = np.empty((n, n), np.complex128)
    Ht = np.empty(n, np.complex128)
    _evaluate(a, b, exps, ptr, x, t, H, J, Ht)
    for i in range(n):
        Ht[i] = -Ht[i] * dt
    return _solve(J, Ht, out)


@njit(cache=True)
def _track_segment(a, b, exps, ptr, x, t0, t1, h, hmin, hmax, tol, maxit, radius, max_steps):
    """Track x from t0 to t1 along the straight segment, in place.

    Returns (code, step size to carry on, steps taken).  The step is measured
    in the segment's own [0, 1] parameter.
    """
    n = x.shape[0]
    dt = t1 - t0
    s = 0.0
    successes = 0
    steps = 0
    k1 = np.empty(n, np.complex128)
    k2 = np.empty(n, np.complex128)
    k3 = np.empty(n, np.complex128)
    k4 = np.empty(n, np.complex128)
    xs = np.empty(n, np.complex128)
    xp = np.empty(n, np.complex128)
    while s < 1.0:
        if steps >= max_steps:
            return FAILED, h, steps
        steps += 1
        hs = min(h, 1.0 - s)
        last = hs == 1.0 - s
        t = t0 + s * dt
        ok = _velocity(a, b, exps, ptr, x, t, dt, k1)
        if ok:
            for i in range(n):
                xs[i] = x[i] + 0.5 * hs * k1[i]
            ok = _velocity(a, b, exps, ptr, xs, t + 0.5 * hs * dt, dt, k2)
        if ok:
            for i in range(n):
                xs[i] = x[i] + 0.5 * hs * k2[i]
            ok = _velocity(a, b, exps, ptr, xs, t + 0.5 * hs * dt, dt, k3)
        if ok:
            for i in range(n):
                xs[i] = x[i] + hs * k3[i]
            ok = _velocity(a, b, exps, ptr, xs, t + hs * dt, dt, k4)
        if ok:
            for i in range(n):
                xp[i] = x[i] + hs / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            tn = t1 if last else t0 + (s + hs) * dt
            for i in range(n):
                xs[i] = xp[i]
            ok, _ = _newton(a, b, exps, ptr, xp, tn, maxit, tol)
            # a corrector that moves the point a lot has likely found another path
            if ok and _dist(xp, xs) > 0.1 * _dist(xs, x) + tol * (1.0 + _norm(x)):
                ok = False
        if ok:
            s = 1.0 if last else s + hs
            for i in range(n):
                x[i] = xp[i]
            successes += 1
            if successes >= 5:
                h = min(1.5 * h, hmax)
                successes = 0
            if _norm(x) > radius:
                return DIVERGED, h, steps
        else:
            h *= 0.5
            successes = 0
            if h < hmin:
                return FAILED, h, steps
    return OK, h, steps


@njit(cache=True)
def _condition(a, b, exps, ptr, x, t):
    n = x.shape[0]
    H = np.empty(n, np.complex128)
    J = np.empty((n, n), np.complex128)
    Ht = np.empty(n, np.complex128)
    _evaluate(a, b, exps, ptr, x, t, H, J, Ht)
    nx = max(1.0, _norm(x))
    w = np.zeros(n)
    for i in range(n):
        for k in range(ptr[i], ptr[i + 1]):
            deg = 0
            for j in range(n):
                deg += exps[k, j]
            w[i] += abs(a[k] + t * b[k]) * nx ** max(deg - 1, 0)
    return scaled_condition(J, w)


@njit(cache=True)
def condition_at(c, exps, ptr, x):
    """Scaled condition number of the Jacobian of the target system at x."""
    return _condition(c, np.zeros_like(c), exps, ptr, x, 0.0j)


@njit(cache=True)
def scaled_condition(J, w):
    """Condition number of J with row i divided by the coefficient scale w[i].

    Scaling by coefficient size rather than by the row norm keeps a row that
    is small because x sits on a singular point small.
    """
    n = J.shape[0]
    S = np.empty_like(J)
    for i in range(n):
        if w[i] == 0.0:
            return np.inf
        for j in range(n):
            S[i, j] = J[i, j] / w[i]
    return np.linalg.cond(S)


@njit(cache=True)
def _cauchy(a, b, exps, ptr, x, t, hmin, tol, maxit, radius, max_steps):
    """Cauchy loop endgame around |t| = t.  Returns (ok, estimate, cycle, steps)."""
    n = x.shape[0]
    start = x.copy()
    acc = np.zeros(n, np.complex128)
    y = x.copy()
    steps = 0
    h = 1.0
    count = 0
    for c in range(1, CAUCHY_MAX_CYCLE + 1):
        for j in range(CAUCHY_SAMPLES):
            ta = t * np.exp(2j * np.pi * j / CAUCHY_SAMPLES)
            tb = t * np.exp(2j * np.pi * (j + 1) / CAUCHY_SAMPLES)
            code, h, st = _track_segment(a, b, exps, ptr, y, ta, tb, h, hmin, 1.0, tol, maxit, radius, max_steps)
            steps += st
            if code != OK:
                return False, start, c, steps
            for i in range(n):
                acc[i] += y[i]
            count += 1
        if _dist(y, start) <= 1e-6 * (1.0 + _norm(start)):
            est = np.empty(n, np.complex128)
            for i in range(n):
                est[i] = acc[i] / count
            return True, est, c, steps
    return False, start, CAUCHY_MAX_CYCLE, steps


@njit(cache=True)
def track_path(a, b, exps, ptr, x0, params):
    """Track one path from t=1 to t=0.

    Returns (status, endpoint, last t, steps, residual, cycle number).  The
    residual is the backward error of the endpoint at t=0.  A cycle
    number above one marks an endpoint resolved by the Cauchy endgame.
    """
    x = x0.astype(np.complex128)
    hmin = params[P_STEP_MIN]
    hmax = params[P_STEP_MAX]
    tol = params[P_TRACK_TOL]
    end_tol = params[P_TOL]
    maxit = int(params[P_MAXIT])
    radius = params[P_RADIUS]
    t_eg = params[P_T_EG]
    t_min = params[P_T_MIN]
    max_steps = int(params[P_MAX_STEPS])

    t = 1.0 + 0.0j
    # near infinity the Jacobian degenerates; a step failure far out on a
    # growing path is read as divergence rather than a tracking failure
    far = math.sqrt(radius)
    code, h, steps = _track_segment(
        a, b, exps, ptr, x, t, t_eg + 0.0j, params[P_STEP_INIT], hmin, hmax, tol, maxit, radius, max_steps
    )
    if code == DIVERGED or (code == FAILED and _norm(x) > far):
        return DIVERGED, x, t_eg, steps, np.inf, 0
    if code == FAILED:
        return FAILED, x, t_eg, steps, np.inf, 0

    # endgame: geometric sequence of t values toward 0
    t = t_eg + 0.0j
    prev = x.copy()
    d_prev = np.inf
    hnode = 0.5
    decreasing = 0
    xe = np.empty_like(x)
    xe_prev = np.empty_like(x)
    have_prev = False
    cauchy_t = 1e-4
    while True:
        grow = _norm(x) > 10.0 and _norm(x) > 1.5 * _norm(prev)
        ratio = 0.25 if grow else 0.5
        tn = t * ratio
        for i in range(x.shape[0]):
            prev[i] = x[i]
        code, hnode, st = _track_segment(
            a, b, exps, ptr, x, t, tn, hnode, hmin, 1.0, tol, maxit, radius, max_steps - steps
        )
        steps += st
        t = tn
        if code == DIVERGED or (code == FAILED and _norm(x) > far and _norm(x) >= _norm(prev)):
            return DIVERGED, x, t.real, steps, np.inf, 0
        if code == FAILED:
            return FAILED, x, t.real, steps, np.inf, 0
        d = _dist(x, prev)
        settling = d_prev < np.inf and (d < 0.75 * d_prev or d <= 1e-14 * (1.0 + _norm(x)))
        decreasing = decreasing + 1 if d < d_prev else 0
        d_prev = d

        for i in range(x.shape[0]):
            xe[i] = x[i]
        conv = False
        if settling:
            conv, _ = _newton(a, b, exps, ptr, xe, 0.0j, 12, end_tol)
        # the t=0 Newton limit must sit near the linear extrapolation of the
        # last two nodes, and limits from two consecutive nodes must agree; a
        # path still curving past a neighbouring root fails one or the other
        q = ratio / (1.0 - ratio)
        ext = 0.0
        for i in range(x.shape[0]):
            ext += abs(xe[i] - x[i] - q * (x[i] - prev[i])) ** 2
        close = conv and math.sqrt(ext) <= 0.5 * d + 1e-12 * (1.0 + _norm(x))
        if close and have_prev and _dist(xe, xe_prev) <= 1e-8 * (1.0 + _norm(xe)):
            if _condition(a, b, exps, ptr, xe, 0.0j) < SINGULAR_COND:
                res = _backward_error(a, b, exps, ptr, xe, 0.0j)
                if res < end_tol:
                    return FINITE, xe, 0.0, steps, res, 1
        have_prev = close
        if close:
            for i in range(x.shape[0]):
                xe_prev[i] = xe[i]

        if decreasing >= 3 and abs(t) < cauchy_t:
            ok, est, cyc, st = _cauchy(a, b, exps, ptr, x, t, hmin, tol, maxit, radius, max_steps)
            steps += st
            if ok:
                for i in range(x.shape[0]):
                    xe[i] = est[i]
                # singular endpoints converge only linearly; a few steps help the estimate
                _newton(a, b, exps, ptr, xe, 0.0j, 3, 1e-13)
                if _dist(xe, est) > 1e-4 * (1.0 + _norm(est)):
                    for i in range(x.shape[0]):
                        xe[i] = est[i]
                res = _backward_error(a, b, exps, ptr, xe, 0.0j)
                if res < end_tol:
                    return FINITE, xe, 0.0, steps, res, cyc
            # not resolved yet: keep following the path and try again much closer to 0
            cauchy_t = abs(t) * 1e-2

        if abs(t) < t_min:
            if _norm(x) > 1e3 and decreasing == 0:
                return DIVERGED, x, t.real, steps, np.inf, 0
            return FAILED, x, t.real, steps, np.inf, 0
        if steps >= max_steps:
            return FAILED, x, t.real, steps, np.inf, 0


@njit(cache=True)
def track_many(a, b, exps, ptr, starts, params):
    m, n = starts.shape
    status = np.empty(m, np.int64)
    ends = np.empty((m, n), np.complex128)
    last_t = np.empty(m)
    steps = np.empty(m, np.int64)
    residual = np.empty(m)
    cycle = np.empty(m, np.int64)
    for p in range(m):
        s, x, t, st, r, c = track_path(a, b, exps, ptr, starts[p], params)
        status[p] = s
        ends[p] = x
        last_t[p] = t
        steps[p] = st
        residual[p] = r
        cycle[p] = c
    return status, ends, last_t, steps, residual, cycle


@njit(cache=True)
def newton_many(a, b, exps, ptr, points, t, maxit, tol):
    m = points.shape[0]
    out = points.copy()
    conv = np.empty(m, np.bool_)
    res = np.empty(m)
    for p in range(m):
        x = out[p]
        c, _ = _newton(a, b, exps, ptr, x, t, maxit, tol)
        conv[p] = c
        res[p] = _residual(a, b, exps, ptr, x, t)
    return out, conv, res
