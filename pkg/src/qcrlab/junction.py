"""NIS junction: Dynes density of states, Fermi occupations and tunneling rates.

Public functions take and return SI quantities.  Internally, energies are
scaled by the gap and temperatures by ``Delta / k_B`` before they reach the
compiled integrator in :mod:`qcrlab._quadrature`.
"""

from dataclasses import dataclass

import numpy as np

from . import _quadrature
from .constants import R_K, e, eV, h, k_B
from .errors import QuadratureNotConverged, ValidationError


@dataclass(frozen=True)
class JunctionParams:
    """Parameters of a single NIS tunnel junction.

    Parameters
    ----------
    delta
        Superconducting gap in J.  Use :meth:`from_ev` to pass it in eV.
    gamma_D
        Dynes broadening parameter (dimensionless).
    R_T
        Tunneling resistance in ohm.
    T_qp
        Quasiparticle temperature in K, shared by both electrodes.
        ``T_qp = 0`` selects step-function occupations.
    """

    delta: float
    gamma_D: float
    R_T: float
    T_qp: float

    def __post_init__(self):
        if not self.delta > 0:
            raise ValidationError(f"delta must be positive, got {self.delta!r}")
        if not self.gamma_D > 0:
            raise ValidationError(f"gamma_D must be positive, got {self.gamma_D!r}")
        if not self.R_T > 0:
            raise ValidationError(f"R_T must be positive, got {self.R_T!r}")
        if not self.T_qp >= 0:
            raise ValidationError(f"T_qp must be non-negative, got {self.T_qp!r}")

    @classmethod
    def from_ev(cls, delta_ev, gamma_D, R_T, T_qp):
        return cls(delta=delta_ev * eV, gamma_D=gamma_D, R_T=R_T, T_qp=T_qp)

    @property
    def delta_ev(self):
        return self.delta / eV

    @property
    def reduced_temperature(self):
        """``k_B T_qp / Delta``."""
        return k_B * self.T_qp / self.delta

    def replace(self, **changes):
        fields = dict(delta=self.delta, gamma_D=self.gamma_D, R_T=self.R_T, T_qp=self.T_qp)
        fields.update(changes)
        return JunctionParams(**fields)


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances for the tunneling-rate integral.

    ``abs_tol`` is in s^-1.  The integration window extends ``window_kT``
    thermal energies beyond each Fermi edge.
    """

    rel_tol: float = 1e-8
    abs_tol: float = 1e-3
    window_kT: float = 40.0
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not 0 < self.rel_tol <= 1e-3:
            raise ValidationError(f"rel_tol must lie in (0, 1e-3], got {self.rel_tol!r}")
        if not self.abs_tol > 0:
            raise ValidationError(f"abs_tol must be positive, got {self.abs_tol!r}")
        if not self.window_kT >= 10:
            raise ValidationError(f"window_kT must be >= 10, got {self.window_kT!r}")
        if int(self.max_subdivisions) < 16:
            raise ValidationError("max_subdivisions must be at least 16")

    def tightened(self, factor=10.0):
        """Copy with both tolerances divided by ``factor``."""
        return QuadratureConfig(
            rel_tol=self.rel_tol / factor,
            abs_tol=self.abs_tol / factor,
            window_kT=self.window_kT,
            max_subdivisions=self.max_subdivisions * 2,
        )


DEFAULT_QUAD = QuadratureConfig()


def dynes_dos(eps, junction):
    """Normalized Dynes density of states ``n_S(eps)``.

    ``eps`` is an energy in J (scalar or array).  The result is even in
    ``eps``, tends to 1 far from the gap and equals
    ``gamma_D / sqrt(1 + gamma_D**2)`` at the Fermi level.
    """
    u = np.asarray(eps, dtype=float) / junction.delta
    z = u + 1j * junction.gamma_D
    out = np.abs((z / (np.sqrt(z - 1.0) * np.sqrt(z + 1.0))).real)
    return out if out.ndim else float(out)


def fermi_occupation(E, T):
    """Fermi-Dirac occupation of energy ``E`` (J) at temperature ``T`` (K).

    At ``T = 0`` this is a step: 1 below zero, 1/2 at zero, 0 above.
    """
    E = np.asarray(E, dtype=float)
    if T < 0:
        raise ValidationError("temperature must be non-negative")
    if T == 0:
        out = np.where(E < 0, 1.0, np.where(E > 0, 0.0, 0.5))
    else:
        # 1/(exp(x)+1) written as 0.5*(1 - tanh(x/2)) cannot overflow
        out = 0.5 * (1.0 - np.tanh(E / (2.0 * k_B * T)))
    return out if out.ndim else float(out)


def forward_rate_many(energies, junction, quad=DEFAULT_QUAD):
    """Vectorized forward tunneling rate ``F(E)`` in s^-1.

    ``F(E) = (1/h) int d eps n_S(eps) [1 - f_S(eps)] f_N(eps - E)``, evaluated
    by adaptive quadrature for every energy in ``energies`` (J).

    Raises
    ------
    QuadratureNotConverged
        If any integral fails to reach the requested tolerance within
        ``quad.max_subdivisions`` panels.
    """
    energies = np.asarray(energies, dtype=float)
    shape = energies.shape
    scale = junction.delta / h
    reduced = np.ascontiguousarray(energies.ravel() / junction.delta)
    values, errors, status = _quadrature.integrate_many(
        reduced,
        float(junction.gamma_D),
        float(junction.reduced_temperature),
        float(quad.window_kT),
        float(quad.rel_tol),
        float(quad.abs_tol / scale),
        int(quad.max_subdivisions),
    )
    if np.any(status != _quadrature.STATUS_OK):
        bad = int(np.flatnonzero(status)[0])
        raise QuadratureNotConverged(
            f"tunneling integral at E = {energies.ravel()[bad]:.6e} J did not converge "
            f"(estimated error {errors[bad] * scale:.3e} s^-1, rel_tol={quad.rel_tol:g})"
        )
    return (values * scale).reshape(shape)


def forward_rate(E, junction, quad=DEFAULT_QUAD):
    """Forward tunneling rate ``F(E)`` in s^-1 for a single energy ``E`` (J)."""
    return float(forward_rate_many(np.array([E], dtype=float), junction, quad)[0])


def elastic_dc_current(V_dc, junction, quad=DEFAULT_QUAD):
    """Elastic NIS current (A) under a pure dc bias ``V_dc`` (V).

    ``I = -e (R_K / R_T) [F(-e V) - F(e V)]``; odd in ``V_dc`` by
    construction and exactly zero at zero bias.
    """
    V = np.asarray(V_dc, dtype=float)
    energies = np.stack([-e * V, e * V])
    F = forward_rate_many(energies, junction, quad)
    current = -e * (R_K / junction.R_T) * (F[0] - F[1])
    return current if current.ndim else float(current)
