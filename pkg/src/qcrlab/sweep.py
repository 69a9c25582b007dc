"""Parameter sweeps over bias, noise power or coherent probe power.

A sweep evaluates the model at evenly spaced points of one variable and
returns a table with one row per point.  Points are independent and are
evaluated on a thread pool (the quadrature kernel releases the GIL); rows
are always assembled in input order, so the table does not depend on the
number of workers.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .junction import DEFAULT_QUAD
from .photon_assisted import DEFAULT_TAIL_TOL, DriveCondition, dbm_to_watt, tunneling_current
from .resonator import mix_populations, population_from_rate, qcr_rates, temp_from_occupation

# variable -> (column name, unit of start/stop)
VARIABLES = {
    "v_dc": ("v_dc_V", "V"),
    "p_noise": ("p_noise_dBm", "dBm"),
    "p_in": ("p_in_dBm", "dBm"),
}
OUTPUTS = ("current_A", "gamma_qcr_hz", "t_qcr_K", "t_qcr_tag", "n_bar", "t_eff_mK",
           "n_coherent")
DEFAULT_OUTPUTS = ("current_A", "gamma_qcr_hz", "t_qcr_K", "t_qcr_tag", "n_bar", "t_eff_mK")
# drive quantities that may be held fixed, in SI units (V, W, rad/s, W)
FIXED_KEYS = ("V_dc", "P_N", "omega_ac", "P_in")


@dataclass(frozen=True)
class SweepSpec:
    """One-dimensional sweep.

    ``start`` and ``stop`` are in V for ``v_dc`` and in dBm for the two
    power variables (points are evenly spaced in those units).  ``fixed``
    holds drive values in SI units; missing entries default to zero bias,
    zero noise, the config's first noise-source frequency and zero probe
    power.
    """

    variable: str
    start: float
    stop: float
    points: int
    fixed: dict = field(default_factory=dict)
    outputs: tuple = DEFAULT_OUTPUTS

    def __post_init__(self):
        if self.variable not in VARIABLES:
            raise ValidationError(
                f"unknown sweep variable {self.variable!r}; expected one of {sorted(VARIABLES)}"
            )
        if int(self.points) != self.points or self.points < 2:
            raise ValidationError("a sweep needs at least 2 points")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ValidationError("sweep limits must be finite")
        if not self.start < self.stop:
            raise ValidationError("sweep start must be below stop")
        unknown = set(self.fixed) - set(FIXED_KEYS)
        if unknown:
            raise ValidationError(f"unknown fixed drive keys {sorted(unknown)}")
        bad = [o for o in self.outputs if o not in OUTPUTS]
        if bad or not self.outputs:
            raise ValidationError(f"unknown outputs {bad}; expected a subset of {OUTPUTS}")
        object.__setattr__(self, "points", int(self.points))
        object.__setattr__(self, "outputs", tuple(self.outputs))

    @property
    def values(self):
        return np.linspace(self.start, self.stop, self.points)

    @property
    def column(self):
        return VARIABLES[self.variable][0]


@dataclass
class SweepTable:
    columns: list
    rows: list
    meta: dict

    def column(self, name):
        j = self.columns.index(name)
        return np.array([row[j] for row in self.rows])


def thread_count():
    """Worker count from ``QCRLAB_THREADS`` (default: available CPUs)."""
    raw = os.environ.get("QCRLAB_THREADS")
    if raw is None or not raw.strip():
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"QCRLAB_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValidationError(f"QCRLAB_THREADS must be a positive integer, got {raw!r}")
    return n


def _drive_values(config, spec, x):
    fixed = {"V_dc": 0.0, "P_N": 0.0, "omega_ac": 2 * math.pi * config.omega_N_AFM, "P_in": 0.0}
    fixed.update(spec.fixed)
    if spec.variable == "v_dc":
        fixed["V_dc"] = x
    elif spec.variable == "p_noise":
        fixed["P_N"] = dbm_to_watt(x)
    else:
        fixed["P_in"] = dbm_to_watt(x)
    return fixed


def evaluate_point(config, spec, x, quad=DEFAULT_QUAD, tail_tol=DEFAULT_TAIL_TOL):
    """Model observables at one sweep value, as a dict keyed by output name."""
    vals = _drive_values(config, spec, x)
    junction = config.junction()
    resonator = config.resonator()
    drive = DriveCondition.from_noise_power(vals["V_dc"], vals["P_N"], config.Z_0,
                                            vals["omega_ac"])
    out = {}
    if "current_A" in spec.outputs:
        out["current_A"] = tunneling_current(drive, junction, quad, tail_tol)
    if set(spec.outputs) - {"current_A"}:
        rates = qcr_rates(drive, junction, resonator, quad, tail_tol)
        temp = rates.temperature
        n_bar = mix_populations(rates.population, rates.gamma, resonator.n_c,
                                resonator.gamma_c)
        out["gamma_qcr_hz"] = rates.gamma_hz
        out["t_qcr_K"] = temp.kelvin
        out["t_qcr_tag"] = temp.tag
        out["n_bar"] = n_bar
        out["t_eff_mK"] = 1e3 * temp_from_occupation(n_bar, resonator.omega_R) if n_bar > 0 else 0.0
        if "n_coherent" in spec.outputs:
            out["n_coherent"] = population_from_rate(vals["P_in"], rates.gamma, resonator)
    return out


def run_sweep(config, spec, quad=DEFAULT_QUAD, tail_tol=DEFAULT_TAIL_TOL, command=None,
              threads=None):
    """Evaluate ``spec`` for ``config`` and return a :class:`SweepTable`.

    The metadata records the tool version, the config digest, the sweep
    definition and, if given, the invoking command line.
    """
    from . import __version__

    config.validate()
    xs = spec.values
    workers = threads if threads is not None else thread_count()

    def task(x):
        return evaluate_point(config, spec, float(x), quad, tail_tol)

    if workers <= 1 or len(xs) == 1:
        results = [task(x) for x in xs]
    else:
        with ThreadPoolExecutor(max_workers=min(workers, len(xs))) as pool:
            results = list(pool.map(task, xs))

    columns = [spec.column, *spec.outputs]
    rows = [[float(x), *(res[o] for o in spec.outputs)] for x, res in zip(xs, results)]
    meta = {
        "tool": f"qcrlab {__version__}",
        "config_sha256": config.digest(),
        "sweep": f"{spec.variable}:{spec.start!r}:{spec.stop!r}:{spec.points} "
                 f"({VARIABLES[spec.variable][1]})",
        "fixed": ", ".join(f"{k}={v!r}" for k, v in sorted(spec.fixed.items())) or "none",
        "quadrature_rel_tol": repr(quad.rel_tol),
    }
    if command is not None:
        meta["command"] = command
    return SweepTable(columns, rows, meta)
