"""Physical constants (CODATA values via :mod:`scipy.constants`)."""

from dataclasses import dataclass

from scipy import constants as _sc


@dataclass(frozen=True)
class PhysicalConstants:
    e: float = _sc.e
    h: float = _sc.h
    hbar: float = _sc.hbar
    k_B: float = _sc.k
    R_K: float = _sc.h / _sc.e**2


CONST = PhysicalConstants()

e = CONST.e
h = CONST.h
hbar = CONST.hbar
k_B = CONST.k_B
R_K = CONST.R_K

#: 1 eV in joules
eV = _sc.electron_volt
