"""Device configuration: a flat ``key: value unit`` document.

Frequency-like entries (``omega_*``, ``gamma_dr``, ``gamma_0``, ``chi_*``,
``g_*``, ``alpha``) are written as ``omega / 2pi`` in Hz-based units and kept
in Hz here; the model objects built from a config receive rad/s.
"""

import hashlib
import math
from dataclasses import asdict, dataclass, fields, replace
from importlib import resources

import yaml

from .errors import ConfigInvalid, ValidationError
from .junction import JunctionParams
from .resonator import ResonatorParams
from .units import format_quantity, parse_quantity

# field -> (kind, SI unit used when writing)
FIELD_UNITS = {
    "omega_R": ("frequency", "Hz"),
    "omega_Q": ("frequency", "Hz"),
    "omega_RO": ("frequency", "Hz"),
    "alpha": ("frequency", "Hz"),
    "chi_R": ("frequency", "Hz"),
    "chi_RO": ("frequency", "Hz"),
    "g_R": ("frequency", "Hz"),
    "g_RO": ("frequency", "Hz"),
    "delta": ("energy_or_frequency", "J"),
    "gamma_dr": ("frequency", "Hz"),
    "gamma_0": ("frequency", "Hz"),
    "gamma_D": ("dimensionless", None),
    "R_T": ("resistance", "Ohm"),
    "C_NIS": ("capacitance", "F"),
    "Z_0": ("resistance", "Ohm"),
    "omega_N_AFM": ("frequency", "Hz"),
    "omega_N_VFM": ("frequency", "Hz"),
    "rho": ("dimensionless", None),
    "n_c": ("dimensionless", None),
    "T_qp": ("temperature", "K"),
    "n_max": ("count", None),
}


@dataclass(frozen=True)
class DeviceConfig:
    """Sample and setup parameters in SI units (frequencies as omega/2pi in Hz).

    ``omega_Q``, ``omega_RO``, ``alpha``, ``chi_RO``, ``g_R``, ``g_RO`` and
    ``C_NIS`` are carried along but not used by the models.
    """

    omega_R: float
    omega_Q: float
    omega_RO: float
    alpha: float
    chi_R: float
    chi_RO: float
    g_R: float
    g_RO: float
    delta: float
    gamma_dr: float
    gamma_0: float
    gamma_D: float
    R_T: float
    C_NIS: float
    Z_0: float
    omega_N_AFM: float
    omega_N_VFM: float
    rho: float
    n_c: float
    T_qp: float
    n_max: int

    def junction(self):
        return JunctionParams(self.delta, self.gamma_D, self.R_T, self.T_qp)

    def resonator(self):
        two_pi = 2.0 * math.pi
        return ResonatorParams(
            omega_R=two_pi * self.omega_R,
            gamma_dr=two_pi * self.gamma_dr,
            gamma_0=two_pi * self.gamma_0,
            rho=self.rho,
            n_c=self.n_c,
            n_max=self.n_max,
        )

    def with_values(self, **changes):
        cfg = replace(self, **changes)
        cfg.validate()
        return cfg

    def validate(self):
        errors = {}
        positive = ("omega_R", "delta", "R_T", "Z_0", "gamma_D", "omega_N_AFM", "omega_N_VFM")
        for name in positive:
            if not getattr(self, name) > 0:
                errors[name] = "must be positive"
        for name in ("gamma_dr", "gamma_0", "n_c", "T_qp", "C_NIS"):
            if not getattr(self, name) >= 0:
                errors[name] = "must be non-negative"
        if not 0 < self.rho < 1:
            errors["rho"] = "must lie in (0, 1)"
        if self.n_max < 5:
            errors["n_max"] = "must be at least 5"
        if errors:
            raise ConfigInvalid(errors)

    def to_text(self):
        """Serialize in base SI units; :func:`loads` reproduces the config exactly."""
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            kind, unit = FIELD_UNITS[f.name]
            if unit is None:
                lines.append(f"{f.name}: {value!r}")
            else:
                lines.append(f"{f.name}: {format_quantity(value, unit)}")
        return "\n".join(lines) + "\n"

    def digest(self):
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()


def parse_field(name, raw):
    """Parse one config entry to its stored SI value."""
    if name not in FIELD_UNITS:
        raise ConfigInvalid({name: "unknown key"})
    kind, _ = FIELD_UNITS[name]
    try:
        if kind == "count":
            if isinstance(raw, bool) or not isinstance(raw, int):
                if isinstance(raw, str) and raw.strip().isdigit():
                    return int(raw.strip())
                raise ValidationError(f"{raw!r}: expected an integer count")
            return raw
        return parse_quantity(raw, kind)
    except ValidationError as exc:
        raise ConfigInvalid({name: str(exc)}) from None


def from_mapping(mapping, base=None):
    """Build a config from a ``{key: raw value}`` mapping.

    Keys missing from ``mapping`` are taken from ``base`` (if given);
    otherwise every field is required.
    """
    if not isinstance(mapping, dict):
        raise ConfigInvalid("config document must be a mapping of key: value entries")
    errors = {}
    values = asdict(base) if base is not None else {}
    for key, raw in mapping.items():
        try:
            values[str(key)] = parse_field(str(key), raw)
        except ConfigInvalid as exc:
            errors.update(exc.errors)
    for f in fields(DeviceConfig):
        if f.name not in values and f.name not in errors:
            errors[f.name] = "missing"
    if errors:
        raise ConfigInvalid(errors)
    cfg = DeviceConfig(**values)
    cfg.validate()
    return cfg


def loads(text, base=None):
    try:
        mapping = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigInvalid(f"not a key-value document: {exc}") from None
    return from_mapping(mapping or {}, base)


def load(path, base=None):
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read(), base)


def default_config():
    """The bundled configuration of the measured device."""
    text = resources.files("qcrlab.data").joinpath("default.yaml").read_text(encoding="utf-8")
    return loads(text)
