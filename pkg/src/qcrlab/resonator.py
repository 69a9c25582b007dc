"""Resonator observables set by the QCR: decay rate, bath temperature, populations.

Rates are in s^-1, which is the same number as the angular rate in rad/s
used for the coupling constants (a coupling quoted as ``gamma/2pi = 1.1 MHz``
is stored as ``2pi * 1.1e6``).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .constants import hbar, k_B
from .errors import DivisionDegenerate, NoRootInBracket, ValidationError
from .junction import DEFAULT_QUAD
from .photon_assisted import DEFAULT_TAIL_TOL, DriveCondition, transition_rate


@dataclass(frozen=True)
class ResonatorParams:
    """Resonator mode coupled to the QCR and to a QCR-independent bath.

    Parameters
    ----------
    omega_R
        Mode angular frequency (rad/s).
    gamma_dr, gamma_0
        Coupling rates to the driveline and to excess loss channels (rad/s).
    rho
        Dimensionless coupling of the mode to the junction; sets the
        single-photon matrix elements.
    n_c
        Mean occupation of the QCR-independent bath.
    n_max
        Fock-space truncation.
    """

    omega_R: float
    gamma_dr: float
    gamma_0: float
    rho: float = 1e-3
    n_c: float = 0.0
    n_max: int = 9

    def __post_init__(self):
        problems = []
        if not self.omega_R > 0:
            problems.append("omega_R must be positive")
        if not (self.gamma_dr >= 0 and self.gamma_0 >= 0):
            problems.append("coupling rates must be non-negative")
        if not 0 < self.rho < 1:
            problems.append("rho must lie in (0, 1)")
        if not self.n_c >= 0:
            problems.append("n_c must be non-negative")
        if int(self.n_max) < 5:
            problems.append("n_max must be at least 5")
        if problems:
            raise ValidationError("; ".join(problems))

    @property
    def gamma_c(self):
        """QCR-independent decay rate ``gamma_dr + gamma_0``."""
        return self.gamma_dr + self.gamma_0

    def replace(self, **changes):
        fields = dict(omega_R=self.omega_R, gamma_dr=self.gamma_dr, gamma_0=self.gamma_0,
                      rho=self.rho, n_c=self.n_c, n_max=self.n_max)
        fields.update(changes)
        return ResonatorParams(**fields)


def matrix_element_sq(m, m_prime, rho):
    """Squared junction matrix element between Fock states (leading order in rho).

    1 on the diagonal, ``m * rho`` for emission ``m -> m-1`` and
    ``(m+1) * rho`` for absorption ``m -> m+1``.  Multi-photon elements
    vanish in this model.
    """
    if m == m_prime:
        return 1.0
    if m_prime == m - 1:
        return m * rho
    if m_prime == m + 1:
        return (m + 1) * rho
    return 0.0


@dataclass(frozen=True)
class QcrTemperature:
    """Effective QCR bath temperature with its regime tag.

    ``tag`` is ``"positive"`` (ordinary, including 0 K for a perfect
    absorber), ``"infinite"`` (balanced rates), ``"negative"`` (population
    inversion) or ``"undefined"`` (no transitions at all).
    """

    kelvin: float
    tag: str

    @property
    def is_finite_positive(self):
        return self.tag == "positive"


@dataclass(frozen=True)
class QcrRates:
    """Photon absorption and emission rates of the QCR summed over bias polarity.

    ``down = sum_tau Gamma_10(tau V)``, ``up = sum_tau Gamma_01(tau V)``.
    """

    down: float
    up: float
    omega_R: float

    @property
    def gamma(self):
        return self.down - self.up

    @property
    def gamma_hz(self):
        return self.gamma / (2 * math.pi)

    @property
    def negative_damping(self):
        return self.gamma < 0

    @property
    def temperature(self):
        quantum = hbar * self.omega_R / k_B
        if self.down == 0 and self.up == 0:
            return QcrTemperature(math.nan, "undefined")
        if self.up == 0:
            return QcrTemperature(0.0, "positive")
        ratio = self.down / self.up
        if ratio == 1:
            return QcrTemperature(math.inf, "infinite")
        T = quantum / math.log(ratio)
        return QcrTemperature(T, "positive" if T > 0 else "negative")

    @property
    def population(self):
        """Bose occupation of the QCR bath; ``inf`` for infinite temperature."""
        temp = self.temperature
        if temp.tag == "undefined":
            return math.nan
        if temp.kelvin == 0:
            return 0.0
        if temp.tag == "infinite":
            return math.inf
        # 1/(exp(hbar w / k T) - 1) == up / (down - up), also for T < 0
        return self.up / (self.down - self.up)


def qcr_rates(drive, junction, resonator, quad=DEFAULT_QUAD, tail_tol=DEFAULT_TAIL_TOL):
    down = up = 0.0
    for d in (drive, drive.reversed()):
        down += transition_rate(1, 0, "forward", d, junction, resonator, quad, tail_tol)
        up += transition_rate(0, 1, "forward", d, junction, resonator, quad, tail_tol)
    return QcrRates(down=down, up=up, omega_R=resonator.omega_R)


def gamma_qcr(drive, junction, resonator, quad=DEFAULT_QUAD, tail_tol=DEFAULT_TAIL_TOL):
    """QCR-induced decay rate (s^-1, i.e. rad/s).

    ``sum_{tau=+-1} [Gamma_10(tau V) - Gamma_01(tau V)]``.  A negative value
    signals gain; use :func:`qcr_rates` for the ``negative_damping`` flag.
    """
    return qcr_rates(drive, junction, resonator, quad, tail_tol).gamma


def t_qcr(drive, junction, resonator, quad=DEFAULT_QUAD, tail_tol=DEFAULT_TAIL_TOL):
    """Effective temperature of the QCR bath as a :class:`QcrTemperature`."""
    return qcr_rates(drive, junction, resonator, quad, tail_tol).temperature


def bose_occupation(T, omega):
    """Bose-Einstein occupation at temperature ``T`` (K) and angular frequency ``omega``."""
    T = np.asarray(T, dtype=float)
    if np.any(T <= 0):
        raise ValidationError("temperature must be positive")
    out = 1.0 / np.expm1(hbar * omega / (k_B * T))
    return out if out.ndim else float(out)


def temp_from_occupation(n_bar, omega):
    """Temperature (K) whose Bose occupation at ``omega`` equals ``n_bar``."""
    n_bar = np.asarray(n_bar, dtype=float)
    if np.any(n_bar <= 0):
        raise ValidationError("occupation must be positive")
    out = hbar * omega / (k_B * np.log1p(1.0 / n_bar))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class SteadyState:
    """Thermal steady state of the resonator between the QCR and the other bath."""

    n_bar: float
    rates: QcrRates
    gamma_c: float
    n_c: float

    @property
    def gamma_qcr(self):
        return self.rates.gamma

    @property
    def n_qcr(self):
        return self.rates.population

    @property
    def t_qcr(self):
        return self.rates.temperature

    @property
    def t_eff(self):
        """Effective mode temperature (K) from ``n_bar``."""
        if self.n_bar <= 0:
            return 0.0
        return temp_from_occupation(self.n_bar, self.rates.omega_R)


def mix_populations(n_qcr, gamma_qcr_value, n_c, gamma_c):
    """Rate-weighted mean of two bath populations."""
    total = gamma_qcr_value + gamma_c
    if not total > 0:
        raise DivisionDegenerate("total decay rate must be positive")
    if gamma_qcr_value == 0:
        return float(n_c)
    return (n_qcr * gamma_qcr_value + n_c * gamma_c) / total


def steady_state_population(drive, junction, resonator, quad=DEFAULT_QUAD,
                            tail_tol=DEFAULT_TAIL_TOL):
    """Mean photon number of the undriven resonator, returned as :class:`SteadyState`."""
    rates = qcr_rates(drive, junction, resonator, quad, tail_tol)
    n_bar = mix_populations(rates.population, rates.gamma, resonator.n_c, resonator.gamma_c)
    return SteadyState(n_bar=float(n_bar), rates=rates, gamma_c=resonator.gamma_c,
                       n_c=resonator.n_c)


def reflection_coefficient(gamma_qcr_value, resonator):
    """Voltage reflection coefficient of the resonator seen from its driveline."""
    loss = gamma_qcr_value + resonator.gamma_0
    return (resonator.gamma_dr - loss) / (resonator.gamma_dr + loss)


def population_from_rate(P_in, gamma_qcr_value, resonator):
    """Coherent-drive photon number from the power balance at a given ``gamma_QCR``.

    ``n = P_in (1 - |r|^2) / [hbar omega_R (gamma_QCR + gamma_0)]``.
    """
    if P_in < 0:
        raise ValidationError("P_in must be non-negative")
    loss = gamma_qcr_value + resonator.gamma_0
    if loss == 0:
        raise DivisionDegenerate("gamma_QCR + gamma_0 vanishes; photon number is unbounded")
    r = reflection_coefficient(gamma_qcr_value, resonator)
    return P_in * (1.0 - r * r) / (hbar * resonator.omega_R * loss)


def coherent_population(P_in, drive, junction, resonator, quad=DEFAULT_QUAD,
                        tail_tol=DEFAULT_TAIL_TOL):
    """Mean photon number of a resonator driven on resonance with power ``P_in`` (W)."""
    g = gamma_qcr(drive, junction, resonator, quad, tail_tol)
    return population_from_rate(P_in, g, resonator)


def infer_gamma_from_population(n_obs, P_in, resonator):
    """Total decay rate (rad/s) implied by an observed coherent photon number.

    Solves the power balance for ``gamma_QCR >= 0`` by bracketed root finding
    and returns ``gamma_QCR + gamma_dr + gamma_0``.

    Raises
    ------
    NoRootInBracket
        If ``n_obs`` exceeds the photon number reachable at zero QCR damping.
    """
    if not n_obs > 0:
        raise ValidationError("observed photon number must be positive")

    def mismatch(g):
        return population_from_rate(P_in, g, resonator) - n_obs

    f0 = mismatch(0.0)
    if abs(f0) <= 1e-12 * n_obs:
        return resonator.gamma_c
    if f0 < 0:
        raise NoRootInBracket(
            f"n_obs = {n_obs:g} exceeds the zero-damping maximum {n_obs + f0:g}"
        )
    hi = max(resonator.gamma_c, 1.0)
    while mismatch(hi) > 0:
        hi *= 4.0
        if hi > 1e30:
            raise NoRootInBracket("could not bracket the decay rate")
    g = brentq(mismatch, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    return g + resonator.gamma_c
