import io
import math

import numpy as np
import pytest

from qcrlab import ConfigInvalid, ValidationError
from qcrlab.config import FIELD_UNITS, DeviceConfig, default_config, load, loads
from qcrlab.constants import eV, h
from qcrlab.io import (
    IV_COLUMNS,
    format_table,
    format_value,
    read_columns,
    read_iv,
    read_spectrum,
    write_iv,
    write_spectrum,
)
from qcrlab.spectroscopy import SpectrumTrace
from qcrlab.units import format_quantity, parse_quantity, split_quantity


class TestUnits:
    @pytest.mark.parametrize(
        "text, kind, value",
        [
            ("203 ueV", "energy", 203e-6 * eV),
            ("203µeV", "energy", 203e-6 * eV),
            ("4.671 GHz", "frequency", 4.671e9),
            ("29.4 kOhm", "resistance", 29.4e3),
            ("0.54 fF", "capacitance", 0.54e-15),
            ("60 mK", "temperature", 0.06),
            ("-70 dBm", "power", 1e-10),
            ("400uV", "voltage", 4e-4),
            ("1.5e-3", "dimensionless", 1.5e-3),
        ],
    )
    def test_parse(self, text, kind, value):
        assert parse_quantity(text, kind) == pytest.approx(value, rel=1e-12)

    @pytest.mark.parametrize(
        "text, kind",
        [("203", "energy"), ("203 furlongs", "energy"), ("203 GHz", "energy"),
         ("1 mK", "dimensionless"), ("fast", "voltage"), ("", "voltage")],
    )
    def test_reject(self, text, kind):
        with pytest.raises(ValidationError):
            parse_quantity(text, kind)

    def test_energy_or_frequency(self):
        assert parse_quantity("10 GHz", "energy_or_frequency") == pytest.approx(h * 1e10)
        assert parse_quantity("1 meV", "energy_or_frequency") == pytest.approx(1e-3 * eV)

    def test_split(self):
        assert split_quantity("-70dBm") == (-70.0, "dBm")
        assert split_quantity("0.92") == (0.92, "")
        assert split_quantity(3) == (3.0, "")
        with pytest.raises(ValidationError):
            split_quantity(True)

    def test_format_round_trip(self):
        for value, unit in [(3.25e-23, "J"), (29400.0, "Ohm"), (4.671e9, "Hz"), (0.06, "K")]:
            kind = {"J": "energy", "Ohm": "resistance", "Hz": "frequency", "K": "temperature"}[unit]
            assert parse_quantity(format_quantity(value, unit), kind) == value


class TestDeviceConfig:
    def test_bundled_values(self, config):
        assert config.omega_R == pytest.approx(4.671e9)
        assert config.delta == pytest.approx(203e-6 * eV)
        assert config.gamma_D == 1.96e-3
        assert config.R_T == pytest.approx(29.4e3)
        assert config.gamma_dr + config.gamma_0 == pytest.approx(2.4e6)
        assert config.n_c == 0.92 and config.T_qp == pytest.approx(0.06)
        assert 1e-4 <= config.rho <= 1e-1
        # model-unused entries are stored as well
        assert config.g_RO == pytest.approx(169e6) and config.C_NIS == pytest.approx(0.54e-15)

    def test_model_objects(self, config):
        r = config.resonator()
        assert r.omega_R == pytest.approx(2 * math.pi * 4.671e9)
        assert r.gamma_c == pytest.approx(2 * math.pi * 2.4e6)
        assert config.junction().delta == config.delta

    def test_round_trip(self, config):
        again = loads(config.to_text())
        assert again == config
        assert again.digest() == config.digest()

    def test_file_round_trip(self, config, tmp_path):
        path = tmp_path / "device.yaml"
        path.write_text(config.to_text(), encoding="utf-8")
        assert load(path) == config

    def test_digest_is_stable(self, config):
        assert config.digest() == "51178e85ff2558677aeba7afc7868309fe1c0d571a168169bed454bf3d10855a"

    def test_partial_override(self, config):
        cfg = loads("rho: 0.001\nT_qp: 248 mK\n", base=config)
        assert cfg.rho == 0.001 and cfg.T_qp == pytest.approx(0.248)
        assert cfg.R_T == config.R_T

    def test_delta_as_frequency(self, config):
        cfg = loads("delta: 49.08 GHz\n", base=config)
        assert cfg.delta == pytest.approx(h * 49.08e9)

    @pytest.mark.parametrize(
        "text, field",
        [
            ("colour: 3 GHz\n", "colour"),
            ("R_T: 29.4\n", "R_T"),
            ("R_T: 29.4 GHz\n", "R_T"),
            ("rho: 1.5\n", "rho"),
            ("gamma_D: 2 mK\n", "gamma_D"),
            ("n_max: 3\n", "n_max"),
            ("n_max: 9.5\n", "n_max"),
            ("T_qp: -1 K\n", "T_qp"),
        ],
    )
    def test_field_errors(self, config, text, field):
        with pytest.raises(ConfigInvalid) as info:
            loads(text, base=config)
        assert field in info.value.errors

    def test_missing_fields(self):
        with pytest.raises(ConfigInvalid) as info:
            loads("omega_R: 4.671 GHz\n")
        assert info.value.errors["delta"] == "missing"
        assert "omega_R" not in info.value.errors

    def test_errors_are_collected(self, config):
        with pytest.raises(ConfigInvalid) as info:
            loads("R_T: 1\nZ_0: 50 GHz\n", base=config)
        assert set(info.value.errors) == {"R_T", "Z_0"}

    def test_not_a_mapping(self):
        with pytest.raises(ConfigInvalid):
            loads("- a\n- b\n")
        with pytest.raises(ConfigInvalid):
            loads("key: [unclosed\n")

    def test_every_field_has_a_unit_entry(self):
        assert set(FIELD_UNITS) == {f for f in DeviceConfig.__dataclass_fields__}

    def test_with_values(self, config):
        assert config.with_values(rho=0.05).rho == 0.05
        with pytest.raises(ConfigInvalid):
            config.with_values(rho=0.0)

    def test_default_is_fresh(self):
        assert default_config() == default_config()


class TestCsv:
    def test_format_value(self):
        assert format_value(-0.0) == "0"
        assert format_value(1 / 3) == "0.333333333333"
        assert format_value(7) == "7"
        assert format_value(np.int64(7)) == "7"
        assert format_value("positive") == "positive"

    def test_table(self):
        text = format_table(("a", "b"), [(1.0, "x")], {"tool": "qcrlab"})
        assert text == "# tool: qcrlab\na,b\n1,x\n"

    def test_read_skips_comments_and_blanks(self):
        src = io.StringIO("# meta\n\nv_dc_volts,current_amps\n1e-4,2e-9\n# mid\n2e-4,4e-9\n")
        v, i = read_columns(src, IV_COLUMNS)
        np.testing.assert_array_equal(v, [1e-4, 2e-4])
        np.testing.assert_array_equal(i, [2e-9, 4e-9])

    @pytest.mark.parametrize(
        "text",
        ["", "voltage,current\n1,2\n", "v_dc_volts,current_amps\n1,2,3\n",
         "v_dc_volts,current_amps\n1,abc\n", "v_dc_volts,current_amps\n"],
    )
    def test_read_errors(self, text):
        with pytest.raises(ValidationError):
            read_columns(io.StringIO(text), IV_COLUMNS)

    def test_spectrum_round_trip(self, tmp_path):
        x = np.linspace(-40e6, 2e6, 50)
        trace = SpectrumTrace(x, np.sin(x / 1e7))
        path = tmp_path / "s.csv"
        write_spectrum(trace, path, {"family": "thermal"})
        back = read_spectrum(path)
        np.testing.assert_allclose(back.detuning, trace.detuning, rtol=1e-11)
        np.testing.assert_allclose(back.magnitude, trace.magnitude, rtol=1e-11, atol=1e-300)

    def test_iv_round_trip(self, tmp_path):
        v = np.linspace(-4e-4, 4e-4, 25)
        path = tmp_path / "iv.csv"
        write_iv(v, v / 29.4e3, path)
        data = read_iv(path, omega_ac=1.0)
        np.testing.assert_allclose(data.current, v / 29.4e3, rtol=1e-11)
        assert data.omega_ac == 1.0
