"""
Tester för restricted_projection-modulen.
"""

import math
import unittest

import numpy as np

from eelab.errors import DomainError, SamplingError, SpectrumExcursionError
from eelab.restricted_projection import (
    DomainSpec, KernelOperator, SpectrumReport, assemble_free_restriction, build_grid, check_symmetric,
    entanglement_entropy, purity_defect, run_free_point, sandwich_upper, spectrum01,
)


class TestDomainSpec(unittest.TestCase):
    """Testfall för domänbeskrivningen."""

    def test_volumes(self):
        self.assertEqual(DomainSpec(1, "interval", 3.0).volume, 6.0)
        self.assertEqual(DomainSpec(2, "box", 2.0).volume, 16.0)
        self.assertAlmostEqual(DomainSpec(2, "disc", 2.0).volume, 4.0 * math.pi)
        self.assertEqual(DomainSpec(1, "interval", 1.0).surface_measure, 2.0)
        self.assertEqual(DomainSpec(3, "box", 1.0).surface_measure, 24.0)

    def test_invalid_domains(self):
        with self.assertRaises(DomainError):
            DomainSpec(2, "interval", 1.0)
        with self.assertRaises(DomainError):
            DomainSpec(3, "disc", 1.0)
        with self.assertRaises(DomainError):
            DomainSpec(1, "interval", 0.0)
        with self.assertRaises(DomainError):
            DomainSpec(2, "triangle", 1.0)

    def test_contains(self):
        disc = DomainSpec(2, "disc", 1.0)
        inside = disc.contains(np.array([[0.5, 0.5], [1.0, 0.0], [0.8, 0.8]]))
        self.assertEqual(inside.tolist(), [True, True, False])


class TestQuadrature(unittest.TestCase):
    """Testfall för kvadraturnäten."""

    def test_weights_sum_to_volume(self):
        for domain in (DomainSpec(1, "interval", 5.0), DomainSpec(2, "box", 2.0), DomainSpec(2, "disc", 3.0)):
            grid = build_grid(domain, 4.0)
            self.assertAlmostEqual(float(np.sum(grid.weights)), domain.volume, places=10)
            self.assertTrue(np.all(grid.weights > 0))
            self.assertTrue(np.all(domain.contains(grid.nodes)))


class TestFreeRestriction(unittest.TestCase):
    """Testfall för den begränsade fria projektionen."""

    def setUp(self):
        """Förbered ett kort intervall."""
        self.domain = DomainSpec(1, "interval", 5.0)

    def test_matrix_properties(self):
        op = assemble_free_restriction(self.domain, 1.0, 4.0)
        self.assertEqual(op.provenance, "free-continuum")
        check_symmetric(op.matrix)
        with self.assertRaises(ValueError):
            op.matrix[0, 0] = 1.0
        # tr(1_Λ P 1_Λ) = K(0,0)|Λ|
        self.assertAlmostEqual(float(np.trace(op.matrix)), 10.0 / math.pi, places=10)

    def test_caller_matrix_stays_writable(self):
        matrix = np.eye(3)
        op = KernelOperator(matrix, "lattice")
        self.assertTrue(matrix.flags.writeable)
        self.assertFalse(op.matrix.flags.writeable)
        matrix[0, 0] = 2.0
        self.assertEqual(op.matrix[0, 0], 2.0)

    def test_threads_do_not_change_result(self):
        one = assemble_free_restriction(self.domain, 1.0, 4.0)
        many = assemble_free_restriction(self.domain, 1.0, 4.0, workers=3)
        np.testing.assert_array_equal(one.matrix, many.matrix)

    def test_sampling_error(self):
        with self.assertRaises(SamplingError):
            assemble_free_restriction(self.domain, 1.0, 0.5)

    def test_spectrum_in_unit_interval(self):
        spectrum = spectrum01(assemble_free_restriction(self.domain, 1.0, 4.0))
        self.assertTrue(np.all(spectrum.eigenvalues >= 0.0))
        self.assertTrue(np.all(spectrum.eigenvalues <= 1.0))
        self.assertTrue(np.all(np.diff(spectrum.eigenvalues) <= 0.0))

    def test_entropy_sandwich(self):
        """Σg ≤ S ≤ Σ -3g log₂ g."""
        spectrum = spectrum01(assemble_free_restriction(self.domain, 1.0, 4.0))
        S = entanglement_entropy(spectrum)
        self.assertGreater(S, 0.0)
        self.assertLessEqual(purity_defect(spectrum), S + 1e-12)
        self.assertLessEqual(S, sandwich_upper(spectrum) + 1e-12)
        self.assertAlmostEqual(entanglement_entropy(spectrum, base=math.e), S * math.log(2.0), places=10)

    def test_entropy_grows_with_scale(self):
        small = run_free_point(DomainSpec(1, "interval", 5.0), 1.0, 4.0)
        large = run_free_point(DomainSpec(1, "interval", 20.0), 1.0, 4.0)
        self.assertGreater(large["S"], small["S"])
        self.assertGreaterEqual(large["n_nodes"], small["n_nodes"])

    def test_resolution_convergence(self):
        """Dubblad upplösning ändrar S med mindre än 1 %."""
        for domain in (DomainSpec(1, "interval", 5.0), DomainSpec(2, "disc", 1.5)):
            coarse = run_free_point(domain, 1.0, 4.0)
            fine = run_free_point(domain, 1.0, 8.0)
            self.assertGreater(fine["n_nodes"], coarse["n_nodes"])
            self.assertLess(abs(fine["S"] - coarse["S"]) / fine["S"], 0.01, msg=domain.shape)

    def test_disc_point(self):
        record = run_free_point(DomainSpec(2, "disc", 2.0), 1.0, 4.0)
        self.assertEqual(record["shape"], "disc")
        self.assertGreater(record["S"], 0.0)


class TestSpectrumReport(unittest.TestCase):
    """Testfall för spektrumvalideringen."""

    def test_clipping(self):
        spectrum = SpectrumReport.from_values([1.0 + 1e-9, 0.5, -1e-9])
        self.assertEqual(spectrum.clipped_count, 2)
        self.assertEqual(spectrum.eigenvalues.tolist(), [1.0, 0.5, 0.0])

    def test_excursion(self):
        with self.assertRaises(SpectrumExcursionError):
            SpectrumReport.from_values([1.1, 0.5])

    def test_empty(self):
        spectrum = spectrum01(np.empty((0, 0)))
        self.assertEqual(entanglement_entropy(spectrum), 0.0)

    def test_asymmetric_matrix(self):
        with self.assertRaises(DomainError):
            spectrum01(np.array([[0.5, 0.1], [0.0, 0.5]]))


if __name__ == "__main__":
    unittest.main()
