"""
Tester för free_kernel-modulen.
"""

import math
import unittest

import numpy as np
from scipy import integrate

from eelab.errors import DomainError, PreconditionError
from eelab.free_kernel import (
    EnergyParams, fermi_kernel_free, fermi_kernel_radial, green_free, green_radial,
    imag_sqrt_identity, principal_sqrt, resolvent_residual, verify_green_decay, weyl_density,
)


class TestFermiKernel(unittest.TestCase):
    """Testfall för den fria projektionskärnan."""

    def test_energy_params(self):
        E = EnergyParams(4.0)
        self.assertEqual(E.momentum, 2.0)
        self.assertAlmostEqual(E.wavelength, math.pi)
        with self.assertRaises(DomainError):
            EnergyParams(0.0)

    def test_diagonal_is_weyl_density(self):
        """K(x, x) är Weyltätheten i alla dimensioner."""
        for d in (1, 2, 3):
            self.assertAlmostEqual(fermi_kernel_radial(0.0, 2.0, d), weyl_density(2.0, d), places=14)
        self.assertAlmostEqual(weyl_density(1.0, 1), 1.0 / math.pi)
        self.assertAlmostEqual(weyl_density(1.0, 3), 1.0 / (6.0 * math.pi ** 2))

    def test_one_dimensional_closed_form(self):
        r = np.linspace(0.5, 20.0, 40)
        np.testing.assert_allclose(fermi_kernel_radial(r, 1.0, 1), np.sin(r) / (math.pi * r), rtol=1e-13)

    def test_series_matches_bessel_at_threshold(self):
        """Potensserien och Besselformen möts utan hopp."""
        for d in (2, 3):
            below = fermi_kernel_radial(0.999e-3, 1.0, d)
            above = fermi_kernel_radial(1.001e-3, 1.0, d)
            self.assertAlmostEqual(below, above, delta=1e-8)

    def test_symmetry(self):
        x = np.array([0.3, -1.2])
        y = np.array([2.0, 0.5])
        self.assertEqual(fermi_kernel_free(x, y, 1.5, 2), fermi_kernel_free(y, x, 1.5, 2))

    def test_reproducing_property_1d(self):
        """∫ K(0, y) K(y, 0) dy = K(0, 0) för en projektion."""
        value, _ = integrate.quad(lambda y: fermi_kernel_radial(abs(y), 1.0, 1) ** 2,
                                  -2000.0, 2000.0, limit=4000)
        self.assertAlmostEqual(value, 1.0 / math.pi, delta=1e-3)

    def test_rejects_bad_input(self):
        with self.assertRaises(DomainError):
            fermi_kernel_radial(1.0, 1.0, 4)
        with self.assertRaises(DomainError):
            fermi_kernel_radial(-1.0, 1.0, 1)
        with self.assertRaises(DomainError):
            fermi_kernel_free([0.0, 0.0], [1.0], 1.0, 2)


class TestGreenFunction(unittest.TestCase):
    """Testfall för den fria Greenfunktionen."""

    def test_principal_sqrt(self):
        for z in (1 + 1j, 1j, -4 + 0.1j, 2 - 3j):
            k = principal_sqrt(z)
            self.assertGreater(k.imag, 0.0)
            self.assertAlmostEqual(abs(k * k - z), 0.0, places=12)
        with self.assertRaises(DomainError):
            principal_sqrt(2.0)

    def test_closed_forms(self):
        z = 1 + 1j
        k = principal_sqrt(z)
        self.assertAlmostEqual(abs(green_radial(2.0, z, 1) - 1j / (2 * k) * np.exp(2j * k)), 0.0, places=14)
        self.assertAlmostEqual(abs(green_radial(2.0, z, 3) - np.exp(2j * k) / (8 * math.pi)), 0.0, places=14)

    def test_singular_at_origin(self):
        with self.assertRaises(DomainError):
            green_radial(0.0, 1j, 3)
        self.assertTrue(np.isfinite(green_radial(0.0, 1j, 1)))

    def test_green_free_symmetric(self):
        x = [0.0, 1.0, 2.0]
        y = [1.0, -1.0, 0.5]
        self.assertEqual(green_free(x, y, 2 + 1j, 3), green_free(y, x, 2 + 1j, 3))

    def test_resolvent_property(self):
        """∫ G₀ (-Δ - z)φ = φ(0) för en Gaussisk φ."""
        for d in (1, 2, 3):
            self.assertLess(resolvent_residual(1 + 1j, d), 1e-6, msg=f"d={d}")

    def test_imag_sqrt_identity(self):
        for E in (0.5, 1.0, 7.0):
            for eta in (1e-6, 1e-2, 1.0, 10.0):
                lhs, rhs = imag_sqrt_identity(E, eta)
                self.assertAlmostEqual(lhs, rhs, delta=1e-12 * max(1.0, lhs))

    def test_decay_rate(self):
        """Den anpassade avtagandehastigheten är |Im √z| i d = 1 och 3."""
        for d in (1, 3):
            for z in (1 + 1j, 1j, 4 + 0.5j):
                report = verify_green_decay(z, d)
                self.assertLess(report.relative_rate_error, 1e-3, msg=f"d={d} z={z}")
                self.assertAlmostEqual(report.fitted_power, (d - 1) / 2.0, delta=1e-3)

    def test_decay_two_dimensions(self):
        report = verify_green_decay(1 + 1j, 2)
        self.assertLess(report.relative_rate_error, 1e-2)
        self.assertEqual(report.to_dict()["dimension"], 2)

    def test_decay_needs_enough_separations(self):
        with self.assertRaises(PreconditionError):
            verify_green_decay(1 + 1j, 1, separations=[5.0, 6.0, 7.0])


if __name__ == "__main__":
    unittest.main()
