"""
Tester för config-modulen.
"""

import os
import shutil
import tempfile
import unittest

from eelab.config import build_config, config_lines, environment_overrides, load_config
from eelab.errors import ConfigError


class TestConfig(unittest.TestCase):
    """Testfall för inläsning och validering av konfigurationen."""

    def setUp(self):
        """Förbered en temporär katalog med en experimentfil."""
        self.temp_dir = tempfile.mkdtemp()
        self.path = os.path.join(self.temp_dir, "free1d.env")
        with open(self.path, "w", encoding="utf-8") as f:
            f.write("# Fri gas i en dimension\n")
            f.write("MODE=sweep-free\n")
            f.write("DIMENSION=1\n")
            f.write("FERMI_ENERGY=1.0\n")
            f.write("L_VALUES=25,50,100\n")
            f.write("LATTICE__SPACING=0.2\n")

    def tearDown(self):
        """Rensa upp temporära kataloger."""
        shutil.rmtree(self.temp_dir)

    def test_load_file(self):
        config = load_config(self.path, environ={})
        self.assertEqual(config.mode, "sweep-free")
        self.assertEqual(config.l_values, [25.0, 50.0, 100.0])
        self.assertEqual(config.lattice.spacing, 0.2)
        self.assertEqual(config.domain_shape, "interval")
        self.assertEqual(config.resolution, 4.0)

    def test_precedence(self):
        """Kommandoraden går före miljön som går före filen."""
        environ = {"EELAB_FERMI_ENERGY": "2.0", "EELAB_SEED": "9", "OTHER": "x"}
        config = load_config(self.path, {"SEED": 3}, environ=environ)
        self.assertEqual(config.fermi_energy, 2.0)
        self.assertEqual(config.seed, 3)

    def test_environment_filter(self):
        overrides = environment_overrides({"EELAB_LATTICE__SPACING": "0.1", "EELAB_UNKNOWN": "1"})
        self.assertEqual(overrides, {"LATTICE__SPACING": "0.1"})

    def test_missing_file(self):
        with self.assertRaises(ConfigError) as ctx:
            load_config(os.path.join(self.temp_dir, "missing.env"), environ={})
        self.assertEqual(ctx.exception.field, "config")

    def test_missing_fermi_energy(self):
        with self.assertRaises(ConfigError) as ctx:
            build_config({"MODE": "sweep-free", "L_VALUES": "25,50"})
        self.assertEqual(ctx.exception.field, "fermi_energy")

    def test_missing_l_values(self):
        with self.assertRaises(ConfigError) as ctx:
            build_config({"MODE": "sweep-perturbed", "FERMI_ENERGY": "1"})
        self.assertEqual(ctx.exception.field, "l_values")

    def test_invalid_fields(self):
        cases = {
            "mode": {"MODE": "train"},
            "l_values": {"MODE": "sweep-free", "FERMI_ENERGY": "1", "L_VALUES": "50,25"},
            "lattice.buffer_ratio": {"MODE": "verify-inequalities", "LATTICE__BUFFER_RATIO": "1.5"},
            "lattice.schatten_s": {"MODE": "verify-inequalities", "LATTICE__SCHATTEN_S": "0.5"},
            "green.z_values": {"MODE": "green-decay", "GREEN__Z_VALUES": "1-1j"},
            "green.eta_values": {"MODE": "green-decay", "GREEN__ETA_VALUES": "0,1"},
            "riesz.random_size": {"MODE": "riesz-check", "RIESZ__RANDOM_SIZE": "3"},
            "riesz.lattice_sites": {"MODE": "riesz-check", "RIESZ__LATTICE_SITES": "41"},
            "dimension": {"MODE": "sweep-perturbed", "FERMI_ENERGY": "1", "L_VALUES": "5", "DIMENSION": "3"},
            "fit.input": {"MODE": "fit"},
            "shape": {"MODE": "verify-inequalities", "SHAPE": "triangle"},
        }
        for field, values in cases.items():
            with self.assertRaises(ConfigError, msg=field) as ctx:
                build_config(values)
            self.assertEqual(ctx.exception.field, field)

    def test_unknown_section_key(self):
        with self.assertRaises(ConfigError) as ctx:
            build_config({"MODE": "riesz-check", "RIESZ__NODES": "5"})
        self.assertEqual(ctx.exception.field, "riesz.nodes")

    def test_green_points(self):
        config = build_config({"MODE": "green-decay", "GREEN__Z_VALUES": "1+1j, 2j"})
        self.assertEqual(config.green.points, [1 + 1j, 2j])

    def test_config_lines_round_trip(self):
        """Den utskrivna konfigurationen kan läsas in igen till samma modell."""
        config = load_config(self.path, environ={})
        lines = config_lines(config)
        self.assertIn("MODE=sweep-free", lines)
        self.assertIn("LATTICE__SPACING=0.2", lines)
        values = dict(line.split("=", 1) for line in lines)
        self.assertEqual(build_config(values), config)


if __name__ == "__main__":
    unittest.main()
