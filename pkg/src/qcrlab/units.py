"""Parsing of quantities written with explicit unit suffixes, e.g. ``203 ueV``."""

import math
import re

from .constants import eV, h
from .errors import ValidationError

_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?|[-+]?inf"
_QUANTITY = re.compile(rf"^\s*({_NUMBER})\s*([^\s\d].*?)?\s*$")

# unit -> (kind, factor to SI)
_UNITS = {
    "Hz": ("frequency", 1.0),
    "kHz": ("frequency", 1e3),
    "MHz": ("frequency", 1e6),
    "GHz": ("frequency", 1e9),
    "J": ("energy", 1.0),
    "eV": ("energy", eV),
    "meV": ("energy", 1e-3 * eV),
    "ueV": ("energy", 1e-6 * eV),
    "µeV": ("energy", 1e-6 * eV),
    "μeV": ("energy", 1e-6 * eV),
    "Ohm": ("resistance", 1.0),
    "ohm": ("resistance", 1.0),
    "Ω": ("resistance", 1.0),
    "kOhm": ("resistance", 1e3),
    "kohm": ("resistance", 1e3),
    "kΩ": ("resistance", 1e3),
    "MOhm": ("resistance", 1e6),
    "F": ("capacitance", 1.0),
    "pF": ("capacitance", 1e-12),
    "fF": ("capacitance", 1e-15),
    "aF": ("capacitance", 1e-18),
    "K": ("temperature", 1.0),
    "mK": ("temperature", 1e-3),
    "uK": ("temperature", 1e-6),
    "V": ("voltage", 1.0),
    "mV": ("voltage", 1e-3),
    "uV": ("voltage", 1e-6),
    "µV": ("voltage", 1e-6),
    "μV": ("voltage", 1e-6),
    "nV": ("voltage", 1e-9),
    "W": ("power", 1.0),
    "mW": ("power", 1e-3),
    "uW": ("power", 1e-6),
    "nW": ("power", 1e-9),
    "pW": ("power", 1e-12),
    "fW": ("power", 1e-15),
    "aW": ("power", 1e-18),
    "dBm": ("power", None),
}


def split_quantity(text):
    """Return ``(number, unit)``; ``unit`` is ``""`` for a bare number."""
    if isinstance(text, bool):
        raise ValidationError(f"expected a quantity, got {text!r}")
    if isinstance(text, (int, float)):
        return float(text), ""
    m = _QUANTITY.match(str(text))
    if not m:
        raise ValidationError(f"cannot parse quantity {text!r}")
    return float(m.group(1)), (m.group(2) or "")


def parse_quantity(text, kind):
    """Parse ``text`` as a quantity of ``kind`` and return its SI value.

    Frequencies are returned in Hz (cycles per second).  Powers accept
    ``dBm``.  A ``kind`` of ``"energy_or_frequency"`` also accepts a
    frequency and converts it with Planck's constant.  ``"dimensionless"``
    requires a bare number; every other kind requires a unit.
    """
    value, unit = split_quantity(text)
    if kind == "dimensionless":
        if unit:
            raise ValidationError(f"{text!r}: expected a dimensionless number")
        return value
    if not unit:
        raise ValidationError(f"{text!r}: a unit is required for a {kind}")
    if unit not in _UNITS:
        raise ValidationError(f"{text!r}: unknown unit {unit!r}")
    unit_kind, factor = _UNITS[unit]
    if kind == "energy_or_frequency":
        if unit_kind == "frequency":
            return value * factor * h
        kind = "energy"
    if unit_kind != kind:
        raise ValidationError(f"{text!r}: expected a {kind}, got a {unit_kind}")
    if unit == "dBm":
        return 1e-3 * 10.0 ** (value / 10.0)
    return value * factor


def format_quantity(value, unit):
    """Inverse of :func:`parse_quantity` for a unit with a linear factor."""
    factor = _UNITS[unit][1]
    scaled = value / factor
    if math.isfinite(scaled) and scaled == int(scaled) and abs(scaled) < 1e15:
        return f"{int(scaled)} {unit}"
    return f"{scaled!r} {unit}"
