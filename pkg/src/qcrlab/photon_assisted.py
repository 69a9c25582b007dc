"""Photon-assisted tunneling through an ac-driven NIS junction.

The junction sees ``V(t) = V_dc + V_ac cos(omega_ac t)``.  Each tunneling
channel splits into sidebands ``k hbar omega_ac`` weighted by ``J_k(x)**2``
with ``x = e V_ac / (hbar omega_ac)`` (Tien-Gordon).  A noise drive is
replaced by a single tone at the noise center frequency.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import jv

from .constants import R_K, e, h, hbar, k_B
from .errors import ValidationError
from .junction import DEFAULT_QUAD, forward_rate_many

DEFAULT_TAIL_TOL = 1e-9


@dataclass(frozen=True)
class DriveCondition:
    """Bias across the junction: dc voltage plus one ac tone.

    Voltages in V, ``omega_ac`` in rad/s.
    """

    V_dc: float = 0.0
    V_ac: float = 0.0
    omega_ac: float = 0.0

    def __post_init__(self):
        if not self.V_ac >= 0:
            raise ValidationError(f"V_ac must be non-negative, got {self.V_ac!r}")
        if self.V_ac > 0 and not self.omega_ac > 0:
            raise ValidationError("omega_ac must be positive when V_ac > 0")

    @classmethod
    def from_noise_power(cls, V_dc, P_N, Z_0, omega_ac):
        """Drive for incident noise power ``P_N`` (W) on a line of impedance ``Z_0``."""
        return cls(V_dc=V_dc, V_ac=vac_from_power(P_N, Z_0), omega_ac=omega_ac)

    @property
    def bessel_argument(self):
        if self.V_ac == 0:
            return 0.0
        return e * self.V_ac / (hbar * self.omega_ac)

    def reversed(self):
        """The drive with the dc polarity inverted."""
        return DriveCondition(V_dc=-self.V_dc, V_ac=self.V_ac, omega_ac=self.omega_ac)


@dataclass(frozen=True)
class PatWeights:
    """Truncated photon-assisted sideband weights ``J_k(x)**2``, ``|k| <= K``."""

    orders: np.ndarray
    weights: np.ndarray
    x: float

    @property
    def max_order(self):
        return int(self.orders.max())

    @property
    def terms(self):
        return list(zip(self.orders.tolist(), self.weights.tolist()))

    @property
    def total(self):
        return float(self.weights.sum())


def dbm_to_watt(p_dbm):
    return 1e-3 * 10.0 ** (np.asarray(p_dbm, dtype=float) / 10.0)


def watt_to_dbm(p_w):
    return 10.0 * np.log10(np.asarray(p_w, dtype=float) / 1e-3)


def vac_from_power(P_N, Z_0):
    """ac amplitude at the junction for incident power ``P_N`` (W).

    ``V_ac = 2 sqrt(2 P_N Z_0)``; the factor 2 is the voltage transmission
    coefficient of a strongly mismatched line-junction interface.
    """
    P_N = np.asarray(P_N, dtype=float)
    if np.any(P_N < 0):
        raise ValidationError("noise power must be non-negative")
    if not Z_0 > 0:
        raise ValidationError("Z_0 must be positive")
    out = 2.0 * np.sqrt(2.0 * P_N * Z_0)
    return out if out.ndim else float(out)


def power_from_vac(V_ac, Z_0):
    """Inverse of :func:`vac_from_power`."""
    out = np.asarray(V_ac, dtype=float) ** 2 / (8.0 * Z_0)
    return out if out.ndim else float(out)


def pat_weights(x, tail_tol=DEFAULT_TAIL_TOL):
    """Sideband weights for Bessel argument ``x``.

    Keeps the smallest ``K`` with ``1 - sum_{|k|<=K} J_k(x)**2 < tail_tol``.
    The neglected mass is summed directly from the tail so that it is not
    lost to cancellation.
    """
    if not x >= 0:
        raise ValidationError(f"Bessel argument must be non-negative, got {x!r}")
    if not 0 < tail_tol <= 1e-6:
        raise ValidationError(f"tail_tol must lie in (0, 1e-6], got {tail_tol!r}")
    if x == 0:
        return PatWeights(np.array([0]), np.array([1.0]), 0.0)
    # J_k(x) decays faster than exponentially once k exceeds x
    k_hi = int(np.ceil(x + 12.0 * np.cbrt(x) + 30.0))
    k = np.arange(k_hi + 1)
    j2 = jv(k, x) ** 2
    # tails[K] = 2 * sum_{k > K} J_k^2
    tails = 2.0 * np.concatenate([np.cumsum(j2[::-1])[::-1][1:], [0.0]])
    K = int(np.argmax(tails < tail_tol))
    orders = np.arange(-K, K + 1)
    weights = j2[np.abs(orders)]
    return PatWeights(orders, weights, float(x))


def _rate_bound(E, junction):
    """Upper bound on ``F(E)`` (s^-1), loose but valid for any temperature."""
    return (np.maximum(E, 0.0) + 2.0 * junction.delta + 10.0 * k_B * junction.T_qp) / h


def sideband_order(x, K0, max_offset, quantum, junction, floor, tail_tol):
    """Smallest ``K >= K0`` whose dropped sidebands change a rate by < ``tail_tol``.

    :func:`pat_weights` bounds the dropped weight, but far sidebands sit at
    high energies where ``F`` is large.  Here the dropped contribution
    ``sum_{|k|>K} J_k^2 F(E_k)`` is bounded with :func:`_rate_bound` and
    compared with ``tail_tol * floor``, ``floor`` being the smallest rate of
    interest.
    """
    if x == 0:
        return 0
    k_hi = max(K0, int(np.ceil(x + 12.0 * np.cbrt(x) + 30.0)))
    k = np.arange(K0 + 1, k_hi + 1)
    bound = jv(k, x) ** 2 * _rate_bound(max_offset + k * quantum, junction)
    # dropped[i]: bound on everything beyond order K0 + i
    dropped = 2.0 * np.concatenate([np.cumsum(bound[::-1])[::-1], [0.0]])
    return K0 + int(np.argmax(dropped < tail_tol * floor))


def _sideband_sum(offsets, drive, junction, quad, tail_tol):
    """``sum_k J_k^2 F(offset + k hbar omega_ac)`` for each offset (J)."""
    offsets = np.asarray(offsets, dtype=float)
    x = drive.bessel_argument
    pw = pat_weights(x, tail_tol)
    quantum = hbar * drive.omega_ac if drive.V_ac > 0 else 0.0
    F = forward_rate_many(offsets[..., None] + pw.orders * quantum, junction, quad)
    total = F @ pw.weights
    K0 = pw.max_order
    floor = max(float(np.min(total)), quad.abs_tol)
    K = sideband_order(x, K0, float(np.max(np.abs(offsets))), quantum, junction, floor, tail_tol)
    if K > K0:
        k = np.arange(K0 + 1, K + 1)
        extra = np.concatenate([-k[::-1], k])
        F = forward_rate_many(offsets[..., None] + extra * quantum, junction, quad)
        total = total + F @ (jv(extra, x) ** 2)
    return total


def transition_rate(m, m_prime, direction, drive, junction, resonator,
                    quad=DEFAULT_QUAD, tail_tol=DEFAULT_TAIL_TOL):
    """Resonator Fock transition rate ``m -> m_prime`` in s^-1.

    ``direction`` is ``"forward"`` or ``"backward"``; backward tunneling is the
    forward rate at reversed bias.
    """
    from .resonator import matrix_element_sq

    if m < 0 or m_prime < 0:
        raise ValidationError("Fock indices must be non-negative")
    if direction == "backward":
        drive = drive.reversed()
    elif direction != "forward":
        raise ValidationError(f"direction must be 'forward' or 'backward', got {direction!r}")
    m2 = matrix_element_sq(m, m_prime, resonator.rho)
    if m2 == 0:
        return 0.0
    offset = -e * drive.V_dc + hbar * resonator.omega_R * (m - m_prime)
    rate = _sideband_sum(offset, drive, junction, quad, tail_tol)
    return float(m2 * (R_K / junction.R_T) * rate)


def iv_curve(V_dc, V_ac, omega_ac, junction, quad=DEFAULT_QUAD, tail_tol=DEFAULT_TAIL_TOL):
    """Tunneling current (A) for an array of dc biases at fixed ac drive.

    ``I = -e [Gamma_00(V) - Gamma_00(-V)]`` with the elastic matrix element
    set to one.
    """
    V = np.asarray(V_dc, dtype=float)
    drive = DriveCondition(0.0, V_ac, omega_ac)
    both = _sideband_sum(np.stack([-e * V, e * V]), drive, junction, quad, tail_tol)
    current = -e * (R_K / junction.R_T) * (both[0] - both[1])
    return current if current.ndim else float(current)


def tunneling_current(drive, junction, quad=DEFAULT_QUAD, tail_tol=DEFAULT_TAIL_TOL):
    """Tunneling current (A) for a single :class:`DriveCondition`."""
    return float(iv_curve(drive.V_dc, drive.V_ac, drive.omega_ac, junction, quad, tail_tol))
