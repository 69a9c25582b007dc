"""Command-line interface.

Exit status is 0 on success, 1 for invalid input (bad units, unknown keys,
malformed files, usage errors) and 2 when a numerical procedure fails.
"""

import argparse
import math
import re
import shlex
import sys

import numpy as np

from . import __version__
from .config import FIELD_UNITS, default_config, from_mapping, load
from .constants import eV, h, hbar, k_B
from .errors import NumericalError, ValidationError
from .estimation import fit_iv_curve
from .io import format_table, read_iv, read_spectrum, write_spectrum, write_text
from .junction import DEFAULT_QUAD, QuadratureConfig
from .photon_assisted import power_from_vac, vac_from_power, watt_to_dbm
from .resonator import bose_occupation, temp_from_occupation
from .spectroscopy import (
    FAMILIES,
    PeakModel,
    SpectrumTrace,
    default_grid,
    distribution,
    fit_population,
    synthesize_spectrum,
)
from .sweep import DEFAULT_OUTPUTS, OUTPUTS, SweepSpec, run_sweep
from .units import parse_quantity, split_quantity

_NEGATIVE_QUANTITY = re.compile(r"^-(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?\s*[^\W\d_]*$")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NUMERICAL = 2

# drive keys accepted by --fix, with the quantity kind of their value
_DRIVE_KINDS = {"V_dc": "voltage", "P_N": "power", "omega_ac": "frequency", "P_in": "power"}


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # let negative quantities such as "-70dBm" pass as positional values
        self._negative_number_matcher = _NEGATIVE_QUANTITY

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _common(p):
    p.add_argument("--config", metavar="PATH", help="device config (default: bundled)")
    p.add_argument("--output", "-o", metavar="PATH", default="-",
                   help="output file, '-' for standard output (default)")
    p.add_argument("--fix", metavar="KEY=VALUE", action="append", default=[],
                   help="override a config entry or set a drive value (V_dc, P_N, "
                        "omega_ac, P_in); values need units")
    p.add_argument("--tol", metavar="REL", type=float, default=None,
                   help="relative tolerance of the rate integrals")


def build_parser():
    parser = _Parser(prog="qcrlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qcrlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("iv", help="current-voltage curve")
    _common(p)
    p.add_argument("--sweep", metavar="v_dc:START:STOP:N", default="v_dc:0V:400uV:201")

    p = sub.add_parser("sweep", help="model observables along one variable")
    _common(p)
    p.add_argument("--sweep", metavar="VAR:START:STOP:N", required=True,
                   help="VAR is v_dc, p_noise or p_in; limits need units")
    p.add_argument("--outputs", default=",".join(DEFAULT_OUTPUTS),
                   help=f"comma-separated subset of {','.join(OUTPUTS)}")

    p = sub.add_parser("fit-iv", help="fit junction parameters to an IV csv")
    _common(p)
    p.add_argument("data", help="csv with columns v_dc_volts,current_amps")
    p.add_argument("--mode", choices=("dc_only", "noise_driven"), default="dc_only")
    p.add_argument("--hold", action="append", default=[],
                   choices=("delta", "gamma_D", "R_T", "T_qp", "V_ac"),
                   help="keep a parameter at its config value")
    p.add_argument("--starts", type=int, default=5, help="number of multistart points")
    p.add_argument("--noise-sigma", type=float, default=None,
                   help="relative current uncertainty used to weight residuals")

    p = sub.add_parser("fit-spectrum", help="fit a thermal or Poisson population to a spectrum")
    _common(p)
    p.add_argument("data", help="csv with columns detuning_hz,magnitude")
    p.add_argument("--family", choices=FAMILIES, default="thermal")
    p.add_argument("--spacing", help="peak spacing (default 2 chi_R)")
    p.add_argument("--linewidth", default="0.5 MHz", help="peak FWHM (default 0.5 MHz)")

    p = sub.add_parser("synth-spectrum", help="synthesize a qubit spectrum")
    _common(p)
    p.add_argument("--family", choices=FAMILIES, default="thermal")
    p.add_argument("--n-bar", type=float, required=True)
    p.add_argument("--spacing", help="peak spacing (default 2 chi_R)")
    p.add_argument("--linewidth", default="0.5 MHz", help="peak FWHM (default 0.5 MHz)")
    p.add_argument("--noise", type=float, default=0.0,
                   help="gaussian noise, as a fraction of the trace maximum")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("convert", help="unit conversions: n<->T, dBm<->W, P_N<->V_ac")
    _common(p)
    p.add_argument("quantity", help="bare occupation number, temperature, power or voltage")
    p.add_argument("--freq", help="mode frequency for n<->T (default omega_R)")
    return parser


def _split_fix(items):
    pairs = []
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ValidationError(f"--fix expects KEY=VALUE, got {item!r}")
        pairs.append((key.strip(), value.strip()))
    return pairs


def resolve_inputs(args):
    """Config with ``--fix`` overrides applied, plus fixed drive values in SI units."""
    config = load(args.config) if args.config else default_config()
    overrides, drive = {}, {}
    for key, value in _split_fix(args.fix):
        if key in FIELD_UNITS:
            overrides[key] = value
        elif key in _DRIVE_KINDS:
            x = parse_quantity(value, _DRIVE_KINDS[key])
            drive[key] = 2 * math.pi * x if key == "omega_ac" else x
        else:
            raise ValidationError(f"--fix: unknown key {key!r}")
    if overrides:
        config = from_mapping(overrides, base=config)
    return config, drive


def _quad(args):
    if args.tol is None:
        return DEFAULT_QUAD
    return QuadratureConfig(rel_tol=args.tol)


def parse_sweep(text):
    """``VAR:START:STOP:N`` with units on the limits."""
    parts = text.split(":")
    if len(parts) != 4:
        raise ValidationError(f"--sweep expects VAR:START:STOP:N, got {text!r}")
    var, start, stop, n = (s.strip() for s in parts)
    try:
        points = int(n)
    except ValueError:
        raise ValidationError(f"--sweep point count must be an integer, got {n!r}") from None
    if var == "v_dc":
        lo, hi = parse_quantity(start, "voltage"), parse_quantity(stop, "voltage")
    elif var in ("p_noise", "p_in"):
        lo, hi = _power_dbm(start), _power_dbm(stop)
    else:
        raise ValidationError(f"unknown sweep variable {var!r}; expected v_dc, p_noise or p_in")
    return var, lo, hi, points


def _power_dbm(text):
    value, unit = split_quantity(text)
    if unit == "dBm":
        return value
    watts = parse_quantity(text, "power")
    if not watts > 0:
        raise ValidationError(f"{text!r}: a swept power must be positive")
    return watt_to_dbm(watts)


def _command_line(argv):
    return "qcrlab " + shlex.join(argv)


def _cmd_sweep(args, argv, outputs):
    config, drive = resolve_inputs(args)
    var, lo, hi, n = parse_sweep(args.sweep)
    spec = SweepSpec(var, lo, hi, n, fixed=drive, outputs=outputs)
    table = run_sweep(config, spec, quad=_quad(args), command=_command_line(argv))
    write_text(format_table(table.columns, table.rows, table.meta), args.output)


def cmd_iv(args, argv):
    if not args.sweep.startswith("v_dc:"):
        raise ValidationError("iv sweeps v_dc; use the sweep command for other variables")
    _cmd_sweep(args, argv, ("current_A",))


def cmd_sweep(args, argv):
    outputs = tuple(o.strip() for o in args.outputs.split(",") if o.strip())
    _cmd_sweep(args, argv, outputs)


_PARAM_UNITS = {"delta": "J", "gamma_D": "1", "R_T": "Ohm", "T_qp": "K", "V_ac": "V"}


def cmd_fit_iv(args, argv):
    config, drive = resolve_inputs(args)
    meta = {}
    if args.mode == "noise_driven":
        meta["P_N"] = drive.get("P_N")
        meta["omega_ac"] = drive.get("omega_ac", 2 * math.pi * config.omega_N_AFM)
    data = read_iv(args.data, **meta)
    if args.noise_sigma is not None:
        if not args.noise_sigma > 0:
            raise ValidationError("--noise-sigma must be positive")
        sigma = args.noise_sigma * np.maximum(np.abs(data.current), 1e-3 * np.abs(data.current).max())
        data = read_iv(args.data, sigma=sigma, **meta)
    V_ac_init = None
    if args.mode == "noise_driven" and data.P_N is not None:
        V_ac_init = vac_from_power(data.P_N, config.Z_0)
    result = fit_iv_curve(data, config.junction(), mode=args.mode, fixed=tuple(args.hold),
                          V_ac_init=V_ac_init, quad=_quad(args), n_starts=args.starts)
    rows = [(name, result.params[name], result.sigma[name], _PARAM_UNITS[name])
            for name in result.params]
    ueV = 1e-6 * eV
    rows.append(("delta_ueV", result.params["delta"] / ueV, result.sigma["delta"] / ueV, "ueV"))
    info = {
        "tool": f"qcrlab {__version__}",
        "config_sha256": config.digest(),
        "command": _command_line(argv),
        "converged": str(result.converged).lower(),
        "residual_norm": f"{result.residual_norm:.12g}",
        "iterations": result.iterations,
    }
    write_text(format_table(("parameter", "value", "sigma", "unit"), rows, info), args.output)


def _peak_model(args, config):
    spacing = (parse_quantity(args.spacing, "frequency") if args.spacing
               else 2.0 * config.chi_R)
    width = parse_quantity(args.linewidth, "frequency")
    return PeakModel(spacing=spacing, linewidths=width)


def cmd_fit_spectrum(args, argv):
    config, _ = resolve_inputs(args)
    trace = read_spectrum(args.data)
    peaks = _peak_model(args, config)
    result = fit_population(trace, args.family, peaks=peaks, n_max=config.n_max)
    rows = [(name, result.params[name], result.sigma[name]) for name in result.params]
    n_bar, s_n = result.params["n_bar"], result.sigma["n_bar"]
    omega_R = 2 * math.pi * config.omega_R
    if n_bar > 0:
        T = temp_from_occupation(n_bar, omega_R)
        # dT/dn from T = hbar w / (k ln(1 + 1/n))
        dT = T * T * k_B / (hbar * omega_R) / (n_bar * (n_bar + 1.0))
        rows.append(("t_eff_K", T, dT * s_n))
    info = {
        "tool": f"qcrlab {__version__}",
        "config_sha256": config.digest(),
        "command": _command_line(argv),
        "family": args.family,
        "converged": str(result.converged).lower(),
        "residual_norm": f"{result.residual_norm:.12g}",
    }
    write_text(format_table(("parameter", "value", "sigma"), rows, info), args.output)


def cmd_synth_spectrum(args, argv):
    config, _ = resolve_inputs(args)
    if not args.noise >= 0:
        raise ValidationError("--noise must be non-negative")
    peaks = _peak_model(args, config)
    dist = distribution(args.family, args.n_bar, config.n_max)
    trace = synthesize_spectrum(dist, peaks, default_grid(peaks, config.n_max))
    if args.noise > 0:
        rng = np.random.default_rng(args.seed)
        noisy = trace.magnitude + args.noise * trace.magnitude.max() * rng.standard_normal(
            trace.magnitude.size)
        trace = SpectrumTrace(trace.detuning, noisy)
    info = {
        "tool": f"qcrlab {__version__}",
        "command": _command_line(argv),
        "family": args.family,
        "n_bar": repr(args.n_bar),
    }
    write_spectrum(trace, args.output, info)


def cmd_convert(args, argv):
    config, _ = resolve_inputs(args)
    value, unit = split_quantity(args.quantity)
    freq = parse_quantity(args.freq, "frequency") if args.freq else config.omega_R
    omega = 2 * math.pi * freq
    rows = []
    if not unit:
        rows.append(("n_bar", value, "1"))
        rows.append(("temperature", temp_from_occupation(value, omega), "K"))
    else:
        kind = _kind_of(args.quantity)
        if kind == "temperature":
            T = parse_quantity(args.quantity, "temperature")
            rows.append(("temperature", T, "K"))
            rows.append(("n_bar", bose_occupation(T, omega), "1"))
        elif kind == "power":
            P = parse_quantity(args.quantity, "power")
            rows.append(("power", P, "W"))
            rows.append(("power_dBm", watt_to_dbm(P) if P > 0 else -math.inf, "dBm"))
            rows.append(("V_ac", vac_from_power(P, config.Z_0), "V"))
        elif kind == "voltage":
            V = parse_quantity(args.quantity, "voltage")
            P = power_from_vac(V, config.Z_0)
            rows.append(("V_ac", V, "V"))
            rows.append(("power", P, "W"))
            rows.append(("power_dBm", watt_to_dbm(P) if P > 0 else -math.inf, "dBm"))
        elif kind == "frequency":
            f = parse_quantity(args.quantity, "frequency")
            rows.append(("frequency", f, "Hz"))
            rows.append(("energy", h * f, "J"))
            rows.append(("temperature_equivalent", h * f / k_B, "K"))
        else:
            raise ValidationError(f"cannot convert a {kind}")
    write_text(format_table(("quantity", "value", "unit"), rows), args.output)


def _kind_of(text):
    for kind in ("temperature", "power", "voltage", "frequency", "energy"):
        try:
            parse_quantity(text, kind)
        except ValidationError:
            continue
        return kind
    # reproduce the parser's own message for unknown units
    parse_quantity(text, "temperature")


COMMANDS = {
    "iv": cmd_iv,
    "sweep": cmd_sweep,
    "fit-iv": cmd_fit_iv,
    "fit-spectrum": cmd_fit_spectrum,
    "synth-spectrum": cmd_synth_spectrum,
    "convert": cmd_convert,
}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args, argv)
    except ValidationError as exc:
        print(f"qcrlab: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"qcrlab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"qcrlab: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
