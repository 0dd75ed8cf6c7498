# test_spectra.py - Tests for Gram matrices and empirical spectra
"""
Unit tests for eigenvalue computation, Stieltjes transforms and histograms.
"""

import unittest
import sys
import os
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

import numpy as np

from spectral_law.errors import BadRange, DimensionMismatch, LowerHalfPlane, NotSymmetric, SpecInvariantViolated
from spectral_law.spectra import (
    ESD, DataMatrix, eigenvalues_symmetric, empirical_stieltjes, esd, esd_of,
    gram_covariance, histogram
)


class TestDataMatrix(unittest.TestCase):
    def test_gram_covariance(self):
        """Test S = X X^T / n"""
        X = DataMatrix([[1.0, 2.0], [3.0, 4.0]])
        np.testing.assert_allclose(gram_covariance(X), [[2.5, 5.5], [5.5, 12.5]])

    def test_custom_divisor(self):
        """Test a Gram divisor other than n"""
        X = DataMatrix([[1.0, 2.0], [3.0, 4.0]], gram_divisor=1.0)
        self.assertEqual(X.divisor, 1.0)
        np.testing.assert_allclose(gram_covariance(X), [[5.0, 11.0], [11.0, 25.0]])

    def test_rejects_bad_entries(self):
        """Test shape and finiteness checks"""
        with self.assertRaises(DimensionMismatch):
            DataMatrix([1.0, 2.0])
        with self.assertRaises(SpecInvariantViolated):
            DataMatrix([[1.0, np.nan]])


class TestEigenvalues(unittest.TestCase):
    def test_sorted_spectrum(self):
        """Test eigenvalues of a diagonal matrix come back ascending"""
        np.testing.assert_allclose(eigenvalues_symmetric(np.diag([3.0, 1.0, 2.0])), [1.0, 2.0, 3.0])

    def test_rejects_non_symmetric(self):
        """Test the symmetry and squareness checks"""
        with self.assertRaises(NotSymmetric):
            eigenvalues_symmetric([[1.0, 2.0], [0.0, 1.0]])
        with self.assertRaises(NotSymmetric):
            eigenvalues_symmetric(np.ones((2, 3)))

    def test_clamps_round_off(self):
        """Test that round-off eigenvalues of either sign become exact zeros"""
        e = esd(np.diag([-1e-12, 1e-12, 1.0]))
        np.testing.assert_array_equal(e.eigenvalues, [0.0, 0.0, 1.0])
        self.assertEqual(e.p, 3)

    def test_esd_of_rank_deficient_matrix(self):
        """Test that p > n leaves exactly p - n zero eigenvalues"""
        rng = np.random.default_rng(3)
        e = esd_of(DataMatrix(rng.standard_normal((6, 2))))
        self.assertEqual(e.n, 2)
        np.testing.assert_array_equal(e.eigenvalues[:4], np.zeros(4))
        self.assertTrue(np.all(e.eigenvalues[4:] > 0))

    def test_wide_zero_block(self):
        """Test the zero block of a 600 x 300 Gaussian matrix"""
        rng = np.random.default_rng(1)
        e = esd_of(DataMatrix(rng.standard_normal((600, 300))))
        self.assertEqual(int(np.sum(e.eigenvalues == 0.0)), 300)
        self.assertEqual(float(e.distribution().cdf(0.0)), 0.5)
        self.assertEqual(float(e.distribution().cdf_left(0.0)), 0.0)

    def test_trace_and_frobenius(self):
        """Test that the eigenvalues reproduce tr S and ||S||_F^2"""
        rng = np.random.default_rng(5)
        X = DataMatrix(rng.standard_normal((30, 50)))
        S = gram_covariance(X)
        e = esd_of(X)
        self.assertAlmostEqual(float(e.eigenvalues.sum()), float(np.trace(S)), places=9)
        self.assertAlmostEqual(float(np.sum(e.eigenvalues ** 2)), float(np.sum(S ** 2)), places=8)
        self.assertTrue(np.all(e.eigenvalues >= 0))

    def test_column_permutation_invariance(self):
        """Test that shuffling the observations leaves the spectrum unchanged"""
        rng = np.random.default_rng(7)
        entries = rng.standard_normal((40, 60))
        first = esd_of(DataMatrix(entries))
        second = esd_of(DataMatrix(entries[:, rng.permutation(60)]))
        np.testing.assert_allclose(first.eigenvalues, second.eigenvalues, atol=1e-10)


class TestESD(unittest.TestCase):
    def setUp(self):
        self.e = ESD(np.array([0.5, 1.5, 1.5, 3.5]), 4, 8)

    def test_statistics(self):
        """Test the largest eigenvalue and the mean"""
        self.assertEqual(self.e.lambda_max, 3.5)
        self.assertAlmostEqual(self.e.mean(), 1.75)

    def test_stieltjes(self):
        """Test the empirical Stieltjes transform"""
        z = 1.0 + 1.0j
        expected = np.mean(1.0 / (self.e.eigenvalues - z))
        self.assertAlmostEqual(empirical_stieltjes(self.e, z), expected)
        with self.assertRaises(LowerHalfPlane):
            empirical_stieltjes(self.e, 1.0)

    def test_histogram_heights(self):
        """Test that heights are normalized by the total eigenvalue count"""
        edges, heights = histogram(self.e, 2, (0.0, 2.0))
        np.testing.assert_allclose(edges, [0.0, 1.0, 2.0])
        np.testing.assert_allclose(heights, [0.25, 0.5])
        self.assertAlmostEqual(float(np.sum(heights * np.diff(edges))), 0.75)
        with self.assertRaises(BadRange):
            histogram(self.e, 2, (1.0, 1.0))

    def test_dictionary_form(self):
        """Test conversion to and from plain dictionaries"""
        restored = ESD.from_dict(self.e.to_dict())
        np.testing.assert_array_equal(restored.eigenvalues, self.e.eigenvalues)
        self.assertEqual((restored.p, restored.n), (4, 8))


if __name__ == '__main__':
    unittest.main()
