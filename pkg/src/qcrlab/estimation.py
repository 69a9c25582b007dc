"""Bounded nonlinear least squares and the junction IV fitter."""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import jv
from scipy.stats import norm

from .constants import R_K, e, hbar
from .errors import DataOutOfRange, FitDiverged, ValidationError
from .junction import DEFAULT_QUAD, JunctionParams, forward_rate_many
from .photon_assisted import DEFAULT_TAIL_TOL, iv_curve, pat_weights, sideband_order

_MICRO = 1e-6


@dataclass
class FitResult:
    """Outcome of a least-squares fit.

    ``params`` and ``sigma`` map parameter names to best-fit values and
    1-sigma uncertainties.  ``sigma`` is ``inf`` for every parameter when the
    Jacobian at the optimum is rank deficient (``singular_jacobian``).
    """

    params: dict
    sigma: dict
    residual_norm: float
    converged: bool
    iterations: int
    nfev: int = 0
    singular_jacobian: bool = False
    covariance: np.ndarray = field(default=None, repr=False)
    message: str = ""
    history: list = field(default_factory=list, repr=False)  # residual norm per accepted step

    def interval(self, name, level=0.6827):
        """Two-sided confidence interval for ``name`` at the given coverage."""
        z = norm.ppf(0.5 + level / 2.0)
        v, s = self.params[name], self.sigma[name]
        return v - z * s, v + z * s

    def covers(self, name, truth, level=0.6827):
        lo, hi = self.interval(name, level)
        return lo <= truth <= hi


def _finite_difference_jacobian(fun, x, r0, lower, upper, rel_step):
    J = np.empty((r0.size, x.size))
    nfev = 0
    for i in range(x.size):
        step = rel_step * (abs(x[i]) if x[i] != 0 else 1.0)
        xp = x.copy()
        xm = x.copy()
        xp[i] += step
        xm[i] -= step
        if xp[i] > upper[i]:
            xp[i] = x[i]
        if xm[i] < lower[i]:
            xm[i] = x[i]
        rp = r0 if xp[i] == x[i] else fun(xp)
        rm = r0 if xm[i] == x[i] else fun(xm)
        nfev += (xp[i] != x[i]) + (xm[i] != x[i])
        J[:, i] = (rp - rm) / (xp[i] - xm[i])
    return J, nfev


def nls_minimize(residual, x0, bounds=None, names=None, jac=None, ftol=1e-12,
                 xtol=1e-12, gtol=1e-14, max_iter=200, rel_step=1e-6,
                 raise_on_failure=True):
    """Minimize ``sum(residual(x)**2)`` within box bounds (Levenberg-Marquardt).

    Each iteration first tries the Gauss-Newton step and raises the damping
    only when the cost fails to drop, so the cost never increases across
    accepted steps.  Parameters at a bound whose gradient points outward are
    frozen for that iteration.  Uncertainties come from
    ``s^2 (J^T J)^-1`` with ``s^2 = |r|^2 / (N - p)``.

    Raises
    ------
    FitDiverged
        If ``max_iter`` iterations pass without convergence (unless
        ``raise_on_failure`` is false, in which case the result carries
        ``converged=False``).
    """
    x = np.array(x0, dtype=float)
    p = x.size
    if bounds is None:
        lower, upper = np.full(p, -np.inf), np.full(p, np.inf)
    else:
        lower = np.broadcast_to(np.asarray(bounds[0], dtype=float), (p,)).copy()
        upper = np.broadcast_to(np.asarray(bounds[1], dtype=float), (p,)).copy()
    if np.any(x < lower) or np.any(x > upper):
        raise ValidationError("initial guess lies outside the bounds")
    if names is None:
        names = tuple(f"x{i}" for i in range(p))

    def fun(v):
        return np.asarray(residual(v), dtype=float).ravel()

    def jacobian(v, rv):
        if jac is not None:
            return np.atleast_2d(np.asarray(jac(v), dtype=float)), 0
        return _finite_difference_jacobian(fun, v, rv, lower, upper, rel_step)

    r = fun(x)
    nfev = 1
    cost = 0.5 * r @ r
    lam = 0.0
    converged = cost == 0.0
    message = "zero residual" if converged else ""
    iterations = 0
    history = [float(np.sqrt(2.0 * cost))]

    while not converged and iterations < max_iter:
        J, n = jacobian(x, r)
        nfev += n
        g = J.T @ r
        free = ~(((x <= lower) & (g > 0)) | ((x >= upper) & (g < 0)))
        if np.max(np.abs(g[free]), initial=0.0) <= gtol * max(1.0, cost):
            converged, message = True, "gradient below tolerance"
            break
        A = J[:, free].T @ J[:, free]
        diag = np.maximum(np.diag(A), 1e-300 + 1e-12 * np.max(np.diag(A), initial=0.0))
        while True:
            step = np.zeros(p)
            try:
                step[free] = np.linalg.solve(A + lam * np.diag(diag), -g[free])
            except np.linalg.LinAlgError:
                step[free] = -np.linalg.lstsq(A + lam * np.diag(diag), g[free], rcond=None)[0]
            x_new = np.clip(x + step, lower, upper)
            dx = x_new - x
            small_step = np.linalg.norm(dx) <= xtol * (np.linalg.norm(x) + xtol)
            r_new = fun(x_new)
            nfev += 1
            cost_new = 0.5 * r_new @ r_new
            if cost_new < cost:
                break
            if small_step:
                converged, message = True, "no further decrease possible"
                break
            lam = max(lam * 4.0, 1e-3)
        if converged:
            break
        iterations += 1
        reduction = cost - cost_new
        x, r, cost = x_new, r_new, cost_new
        history.append(float(np.sqrt(2.0 * cost)))
        lam = 0.0 if lam < 1e-6 else lam / 4.0
        if cost == 0.0:
            converged, message = True, "zero residual"
        elif reduction <= ftol * cost_new:
            converged, message = True, "relative cost reduction below tolerance"
        elif small_step:
            converged, message = True, "step below tolerance"

    J, n = jacobian(x, r)
    nfev += n
    dof = r.size - p
    s2 = 2.0 * cost / dof if dof > 0 else math.nan
    JTJ = J.T @ J
    singular = np.linalg.matrix_rank(J) < p
    if singular:
        cov = np.full((p, p), np.inf)
    else:
        cov = s2 * np.linalg.inv(JTJ)
    sigma = np.sqrt(np.abs(np.diag(cov)))
    result = FitResult(
        params=dict(zip(names, x.tolist())),
        sigma=dict(zip(names, sigma.tolist())),
        residual_norm=float(np.sqrt(2.0 * cost)),
        converged=bool(converged),
        iterations=iterations,
        nfev=nfev,
        singular_jacobian=bool(singular),
        covariance=cov,
        message=message or f"maximum of {max_iter} iterations reached",
        history=history,
    )
    if not converged and raise_on_failure:
        raise FitDiverged(f"no convergence after {max_iter} iterations", result)
    return result


@dataclass(frozen=True)
class IvDataset:
    """Measured current-voltage curve.

    ``sigma`` (A), when given, weights the residuals.  ``P_N`` (W) and
    ``omega_ac`` (rad/s) describe the noise drive, if any.
    """

    v_dc: np.ndarray
    current: np.ndarray
    sigma: np.ndarray = None
    P_N: float = None
    omega_ac: float = None

    def __post_init__(self):
        v = np.asarray(self.v_dc, dtype=float)
        i = np.asarray(self.current, dtype=float)
        if v.ndim != 1 or v.shape != i.shape:
            raise ValidationError("v_dc and current must be 1-D arrays of equal length")
        if v.size < 20:
            raise ValidationError("an IV dataset needs at least 20 points")
        if np.any(np.diff(v) < 0):
            raise ValidationError("v_dc must be sorted")
        object.__setattr__(self, "v_dc", v)
        object.__setattr__(self, "current", i)
        if self.sigma is not None:
            s = np.broadcast_to(np.asarray(self.sigma, dtype=float), v.shape).copy()
            if np.any(s <= 0):
                raise ValidationError("sigma must be positive")
            object.__setattr__(self, "sigma", s)


# Internal coordinates: delta in ueV, log10 gamma_D, log10 R_T, T_qp in mK, V_ac in uV.
_IV_PARAMS = ("delta", "gamma_D", "R_T", "T_qp", "V_ac")
_IV_BOUNDS = {
    "delta": (50.0, 400.0),
    "gamma_D": (-6.0, -0.5),
    "R_T": (2.0, 8.0),
    "T_qp": (10.0, 500.0),
    "V_ac": (0.0, 2000.0),
}


def _to_internal(name, value):
    if name == "delta":
        return value / (e * _MICRO)
    if name in ("gamma_D", "R_T"):
        return math.log10(value)
    if name == "T_qp":
        return value * 1e3
    return value / _MICRO


def _from_internal(name, value):
    if name == "delta":
        return value * e * _MICRO
    if name in ("gamma_D", "R_T"):
        return 10.0 ** value
    if name == "T_qp":
        return value * 1e-3
    return value * _MICRO


def _sigma_from_internal(name, value, sigma):
    if name in ("gamma_D", "R_T"):
        return _from_internal(name, value) * math.log(10.0) * sigma
    return abs(_from_internal(name, sigma) - _from_internal(name, 0.0))


def spread_starts(lower, upper, n):
    """Deterministic, space-filling starting points inside a box."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    golden = (math.sqrt(5.0) - 1.0) / 2.0
    pts = []
    for j in range(n):
        frac = ((j + 0.5) / n + golden * np.arange(lower.size)) % 1.0
        pts.append(lower + (upper - lower) * (0.1 + 0.8 * frac))
    return pts


class _FixedJunctionIV:
    """IV model for a fixed junction, caching sideband rates across ``V_ac``.

    With the junction and ``omega_ac`` fixed the tunneling energies
    ``+-eV + k hbar omega`` do not depend on the amplitude, so each order is
    integrated once.  Sidebands are selected exactly as in
    :func:`~qcrlab.photon_assisted.iv_curve`.
    """

    def __init__(self, v_dc, omega_ac, junction, quad, tail_tol):
        self.v = np.asarray(v_dc, dtype=float)
        self.quantum = hbar * omega_ac
        self.junction = junction
        self.quad = quad
        self.tail_tol = tail_tol
        self.prefactor = -e * (R_K / junction.R_T)
        self._rates = {}

    def _order(self, k):
        if k not in self._rates:
            shift = k * self.quantum
            self._rates[k] = forward_rate_many(
                np.stack([-e * self.v + shift, e * self.v + shift]), self.junction, self.quad)
        return self._rates[k]

    def _sum(self, orders, weights):
        total = np.zeros((2, self.v.size))
        for k, w in zip(orders.tolist(), weights.tolist()):
            total += w * self._order(k)
        return total

    def __call__(self, V_ac):
        if V_ac <= 0:
            F = self._order(0)
            return self.prefactor * (F[0] - F[1])
        x = e * V_ac / self.quantum
        pw = pat_weights(x, self.tail_tol)
        total = self._sum(pw.orders, pw.weights)
        floor = max(float(total.min()), self.quad.abs_tol)
        K = sideband_order(x, pw.max_order, e * float(np.max(np.abs(self.v))), self.quantum,
                           self.junction, floor, self.tail_tol)
        if K > pw.max_order:
            k = np.arange(pw.max_order + 1, K + 1)
            extra = np.concatenate([-k[::-1], k])
            total = total + self._sum(extra, jv(extra, x) ** 2)
        return self.prefactor * (total[0] - total[1])


def fit_iv_curve(data, init, mode="dc_only", fixed=(), V_ac_init=None, omega_ac=None,
                 quad=DEFAULT_QUAD, n_starts=5, tail_tol=DEFAULT_TAIL_TOL, max_iter=100):
    """Fit junction parameters to an IV curve.

    Parameters
    ----------
    data
        :class:`IvDataset`.
    init
        :class:`~qcrlab.junction.JunctionParams` used as the first start and
        as the value of every parameter listed in ``fixed``.
    mode
        ``"dc_only"`` fits ``delta, gamma_D, R_T, T_qp`` with no ac drive;
        ``"noise_driven"`` also fits the ac amplitude ``V_ac`` at angular
        frequency ``omega_ac`` (taken from ``data`` if not given).
    fixed
        Names from ``delta, gamma_D, R_T, T_qp, V_ac`` held at their initial
        values.

    Returns
    -------
    FitResult
        ``params`` in SI units (J, -, ohm, K, V).  Fixed parameters are
        reported with zero uncertainty.

    Raises
    ------
    DataOutOfRange
        If no data point lies above the fitted gap, leaving it unidentified.
    """
    if mode not in ("dc_only", "noise_driven"):
        raise ValidationError(f"mode must be 'dc_only' or 'noise_driven', got {mode!r}")
    names = list(_IV_PARAMS[:4])
    start = {"delta": init.delta, "gamma_D": init.gamma_D, "R_T": init.R_T, "T_qp": init.T_qp}
    if mode == "noise_driven":
        omega_ac = omega_ac if omega_ac is not None else data.omega_ac
        if not omega_ac or omega_ac <= 0:
            raise ValidationError("noise_driven mode needs a positive omega_ac")
        if V_ac_init is None:
            if data.P_N is None:
                raise ValidationError("noise_driven mode needs V_ac_init or data.P_N")
            from .photon_assisted import vac_from_power
            V_ac_init = vac_from_power(data.P_N, 50.0)
        names.append("V_ac")
        start["V_ac"] = V_ac_init
    unknown = set(fixed) - set(names)
    if unknown:
        raise ValidationError(f"cannot fix unknown parameters {sorted(unknown)}")
    free = [n for n in names if n not in fixed]
    if not free:
        raise ValidationError("every parameter is fixed; nothing to fit")

    fit_quad = quad.tightened(10.0)
    scale = data.sigma if data.sigma is not None else np.max(np.abs(data.current))
    values = {n: _to_internal(n, start[n]) for n in names}
    lower = np.array([_IV_BOUNDS[n][0] for n in free])
    upper = np.array([_IV_BOUNDS[n][1] for n in free])
    x_init = np.clip([values[n] for n in free], lower, upper)

    cached = None
    if mode == "noise_driven" and free == ["V_ac"]:
        cached = _FixedJunctionIV(data.v_dc, omega_ac, init, fit_quad, tail_tol)

    def unpack(x):
        v = dict(values)
        v.update(zip(free, x))
        return {n: _from_internal(n, v[n]) for n in names}

    def residual(x):
        p = unpack(x)
        if cached is not None:
            model = cached(p["V_ac"])
        else:
            junction = JunctionParams(p["delta"], p["gamma_D"], p["R_T"], p["T_qp"])
            V_ac = p.get("V_ac", 0.0)
            model = iv_curve(data.v_dc, V_ac, omega_ac or 0.0, junction, fit_quad, tail_tol)
        return (model - data.current) / scale

    starts = [x_init] + spread_starts(lower, upper, max(n_starts - 1, 0))
    best = None
    failures = []
    for x0 in starts[: max(n_starts, 1)]:
        try:
            res = nls_minimize(residual, x0, bounds=(lower, upper), names=free,
                               max_iter=max_iter)
        except FitDiverged as exc:
            failures.append(exc)
            continue
        if best is None or res.residual_norm < best.residual_norm:
            best = res
    if best is None:
        raise FitDiverged("every start of the IV fit failed to converge",
                          failures[-1].result if failures else None)

    internal = dict(values)
    internal.update(best.params)
    params = {n: _from_internal(n, internal[n]) for n in names}
    sigma = {n: 0.0 for n in names}
    for n in free:
        sigma[n] = _sigma_from_internal(n, internal[n], best.sigma[n])
    if e * np.max(np.abs(data.v_dc)) <= params["delta"]:
        raise DataOutOfRange(
            "all bias points lie below the fitted gap; delta is not identifiable"
        )
    best.params = params
    best.sigma = sigma
    if data.sigma is None:
        best.residual_norm *= float(scale)
    return best


def junction_from_fit(result):
    p = result.params
    return JunctionParams(p["delta"], p["gamma_D"], p["R_T"], p["T_qp"])
