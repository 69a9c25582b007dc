"""Compiled kernel for the quasiparticle tunneling-rate integral.

Everything here works in reduced units: energies in units of the gap
``Delta`` and temperature as ``t = k_B T / Delta``.  The integral computed is

    I(e) = int dx n_S(x) [1 - f(x)] f(x - e)

with ``n_S`` the Dynes density of states and ``f`` the Fermi function at
reduced temperature ``t``.  Integration is global-adaptive Gauss-Kronrod
(G10/K21): the panel with the largest error estimate is bisected until the
summed estimate meets the tolerance.  Panels within ``_PEAK_HALF`` of a gap
edge are integrated in a sinh-stretched coordinate.
"""

import cmath
import math

import numpy as np
from numba import njit

# Gauss-Kronrod 21-point nodes on [-1, 1] (non-negative half, descending).
_XK = np.array([
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
])
_WK = np.array([
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077958109831074,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
# 10-point Gauss weights, aligned with the odd-indexed Kronrod nodes.
_WG = np.array([
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

STATUS_OK = 0
STATUS_MAX_SUBDIVISIONS = 1
STATUS_ROUNDOFF = 2

_EXP_CLIP = 700.0
# half-width of the substituted region around each gap edge
_PEAK_HALF = 0.5


@njit(cache=True, nogil=True)
def dynes_reduced(u, gamma):
    z = complex(u, gamma)
    # sqrt(z-1)*sqrt(z+1) is the branch of sqrt(z^2-1) analytic in Im z > 0
    return abs((z / (cmath.sqrt(z - 1.0) * cmath.sqrt(z + 1.0))).real)


@njit(cache=True, nogil=True)
def _fermi(x, t):
    a = x / t
    if a > _EXP_CLIP:
        return 0.0
    if a < -_EXP_CLIP:
        return 1.0
    return 1.0 / (1.0 + math.exp(a))


@njit(cache=True, nogil=True)
def _integrand(x, e, gamma, t):
    if t == 0.0:
        # step occupations: caller restricts the domain to [0, e]
        return dynes_reduced(x, gamma)
    return dynes_reduced(x, gamma) * _fermi(-x, t) * _fermi(x - e, t)


@njit(cache=True, nogil=True)
def _point(s, kind, e, gamma, t):
    """Integrand in panel coordinate ``s``, including the Jacobian.

    ``kind`` 0 is the identity map; ``kind`` +-1 uses ``x = +-1 + gamma sinh(s)``,
    which spreads the Dynes peak at the gap edge over an O(1) range.
    """
    if kind == 0:
        return _integrand(s, e, gamma, t)
    return _integrand(kind + gamma * math.sinh(s), e, gamma, t) * gamma * math.cosh(s)


@njit(cache=True, nogil=True)
def _gk21(a, b, kind, e, gamma, t):
    c = 0.5 * (a + b)
    hw = 0.5 * (b - a)
    fv = np.empty(21)
    fv[10] = _point(c, kind, e, gamma, t)
    for j in range(10):
        dx = hw * _XK[j]
        fv[j] = _point(c - dx, kind, e, gamma, t)
        fv[20 - j] = _point(c + dx, kind, e, gamma, t)
    res_k = _WK[10] * fv[10]
    res_g = 0.0
    res_abs = _WK[10] * abs(fv[10])
    for j in range(10):
        pair = fv[j] + fv[20 - j]
        res_k += _WK[j] * pair
        res_abs += _WK[j] * (abs(fv[j]) + abs(fv[20 - j]))
        if j % 2 == 1:
            res_g += _WG[j // 2] * pair
    mean = 0.5 * res_k
    res_asc = _WK[10] * abs(fv[10] - mean)
    for j in range(10):
        res_asc += _WK[j] * (abs(fv[j] - mean) + abs(fv[20 - j] - mean))
    hw = abs(hw)
    err = abs((res_k - res_g) * hw)
    res_asc *= hw
    # QUADPACK error scaling
    if res_asc != 0.0 and err != 0.0:
        err = res_asc * min(1.0, (200.0 * err / res_asc) ** 1.5)
    res_abs *= hw
    if res_abs > 1e-290:
        err = max(50.0 * 2.22e-16 * res_abs, err)
    return res_k * hw, err


@njit(cache=True, nogil=True)
def _panel_kind(x0, x1):
    if x0 >= 1.0 - _PEAK_HALF and x1 <= 1.0 + _PEAK_HALF:
        return 1
    if x0 >= -1.0 - _PEAK_HALF and x1 <= -1.0 + _PEAK_HALF:
        return -1
    return 0


@njit(cache=True, nogil=True)
def _to_panel(x, kind, gamma):
    if kind == 0:
        return x
    return math.asinh((x - kind) / gamma)


@njit(cache=True, nogil=True)
def integrate_reduced(e, gamma, t, window_kt, rel_tol, abs_tol, max_sub):
    """Adaptive integral for one reduced energy ``e``.

    Returns ``(value, error_estimate, status)``.
    """
    if t == 0.0:
        if e <= 0.0:
            return 0.0, 0.0, STATUS_OK
        lo = 0.0
        hi = e
        cand = np.array([lo, -1.5, -0.5, 0.5, 1.5, -1.0, 1.0, hi])
        tail = 0.0
    else:
        half = abs(e) + window_kt * t + 10.0
        lo = -half
        hi = half
        wt = window_kt * t
        cand = np.array([lo, -1.5, -1.0, -0.5, 0.5, 1.0, 1.5, -wt, 0.0, wt, e - wt, e, e + wt, hi])
        tail = t * (_integrand(lo, e, gamma, t) + _integrand(hi, e, gamma, t))

    cand = np.sort(cand)
    a = np.empty(max_sub)
    b = np.empty(max_sub)
    kinds = np.empty(max_sub, dtype=np.int64)
    val = np.empty(max_sub)
    err = np.empty(max_sub)
    n = 0
    prev = lo
    for x in cand:
        if x <= prev or x > hi:
            continue
        if n == max_sub:
            break
        k = _panel_kind(prev, x)
        kinds[n] = k
        a[n] = _to_panel(prev, k, gamma)
        b[n] = _to_panel(x, k, gamma)
        val[n], err[n] = _gk21(a[n], b[n], k, e, gamma, t)
        n += 1
        prev = x

    while True:
        total = 0.0
        total_err = tail
        worst = 0
        for i in range(n):
            total += val[i]
            total_err += err[i]
            if err[i] > err[worst]:
                worst = i
        if total_err <= max(abs_tol, rel_tol * abs(total)):
            return total, total_err, STATUS_OK
        if n >= max_sub:
            return total, total_err, STATUS_MAX_SUBDIVISIONS
        mid = 0.5 * (a[worst] + b[worst])
        if not (a[worst] < mid < b[worst]):
            return total, total_err, STATUS_ROUNDOFF
        right = b[worst]
        b[worst] = mid
        k = kinds[worst]
        val[worst], err[worst] = _gk21(a[worst], mid, k, e, gamma, t)
        kinds[n] = k
        a[n] = mid
        b[n] = right
        val[n], err[n] = _gk21(mid, right, k, e, gamma, t)
        n += 1


@njit(cache=True, nogil=True)
def integrate_many(energies, gamma, t, window_kt, rel_tol, abs_tol, max_sub):
    m = energies.shape[0]
    out = np.empty(m)
    errs = np.empty(m)
    status = np.zeros(m, dtype=np.int64)
    for i in range(m):
        out[i], errs[i], status[i] = integrate_reduced(
            energies[i], gamma, t, window_kt, rel_tol, abs_tol, max_sub
        )
    return out, errs, status
