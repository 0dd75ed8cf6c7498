# test_measures.py - Tests for probability measures and distances
"""
Unit tests for discrete measures, quantiles and distribution distances.
"""

import unittest
import sys
import os
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

import numpy as np

from spectral_law.errors import (
    EmptyMeasure, MeasureError, NegativeWeight, NonFiniteIntegrand, OutOfRange, WeightSumMismatch
)
from spectral_law.measures import (
    DiscreteMeasure, EmpiricalDistribution, PiecewiseLinearCDF, QuantileFunction,
    empirical_measure, integrate, kolmogorov_distance, make_discrete, point_mass,
    quantile, quantiles, uniform_measure, vector_empirical_measure, wasserstein1
)


class TestDiscreteMeasure(unittest.TestCase):
    def setUp(self):
        self.measure = make_discrete([1.0, 2.0, 3.0], [0.2, 0.3, 0.5])

    def test_make_discrete_normalizes(self):
        """Test that weights within input tolerance are renormalized exactly"""
        m = make_discrete([0.0, 1.0], [0.5, 0.5 + 1e-10])
        self.assertAlmostEqual(m.weights.sum(), 1.0, places=14)

    def test_rejects_bad_weights(self):
        """Test the weight invariants"""
        with self.assertRaises(WeightSumMismatch):
            make_discrete([1.0, 2.0], [0.5, 0.6])
        with self.assertRaises(NegativeWeight):
            make_discrete([1.0, 2.0], [1.5, -0.5])
        with self.assertRaises(EmptyMeasure):
            make_discrete([], [])

    def test_errors_are_measure_errors(self):
        """Test that measure failures map to the model exit code"""
        with self.assertRaises(MeasureError) as context:
            make_discrete([1.0], [2.0])
        self.assertEqual(context.exception.exit_code, 3)

    def test_arrays_are_read_only(self):
        """Test that measures can be shared safely"""
        with self.assertRaises(ValueError):
            self.measure.weights[0] = 1.0

    def test_cdf_and_mean(self):
        """Test the right-continuous distribution function"""
        np.testing.assert_allclose(self.measure.cdf([0.5, 1.0, 2.5, 3.0]), [0.0, 0.2, 0.5, 1.0])
        self.assertAlmostEqual(self.measure.mean(), 0.2 + 0.6 + 1.5)

    def test_dictionary_form(self):
        """Test conversion to and from plain dictionaries"""
        restored = DiscreteMeasure.from_dict(self.measure.to_dict())
        np.testing.assert_array_equal(restored.atoms, self.measure.atoms)
        np.testing.assert_allclose(restored.weights, self.measure.weights)

    def test_point_mass_and_vectors(self):
        """Test point masses and vector-valued atoms"""
        self.assertEqual(point_mass(1.0).size, 1)
        m = vector_empirical_measure([[1.0, 0.5], [1.0, 0.5], [2.0, 0.0]])
        self.assertEqual(m.dim, 2)
        self.assertEqual(m.size, 2)
        np.testing.assert_allclose(np.sort(m.weights), [1 / 3, 2 / 3])


class TestQuantiles(unittest.TestCase):
    def setUp(self):
        self.measure = make_discrete([1.0, 2.0, 3.0], [0.2, 0.3, 0.5])

    def test_left_continuous_inverse(self):
        """Test quantiles at and just past the jumps of the CDF"""
        self.assertEqual(quantile(self.measure, 0.2), 1.0)
        self.assertEqual(quantile(self.measure, 0.21), 2.0)
        self.assertEqual(quantile(self.measure, 0.5), 2.0)
        self.assertEqual(quantile(self.measure, 0.51), 3.0)

    def test_levels_outside_unit_interval(self):
        """Test that quantile levels must lie strictly inside (0, 1)"""
        with self.assertRaises(OutOfRange):
            quantiles(self.measure, [0.0, 0.5])
        with self.assertRaises(OutOfRange):
            quantile(self.measure, 1.0)

    def test_quantile_function_midpoints(self):
        """Test the midpoint sampling of a quantile function"""
        q = QuantileFunction.from_measure(self.measure, 10)
        np.testing.assert_array_equal(q.values, [1, 1, 2, 2, 2, 3, 3, 3, 3, 3])
        np.testing.assert_allclose(q.grid[:2], [0.05, 0.15])
        self.assertEqual(quantile(q, 0.55), 3.0)

    def test_empirical_quantiles(self):
        """Test quantiles of a sample"""
        sample = EmpiricalDistribution.of([4.0, 1.0, 3.0, 2.0])
        self.assertEqual(quantile(sample, 0.25), 1.0)
        self.assertEqual(quantile(sample, 0.3), 2.0)


class TestConstructors(unittest.TestCase):
    def test_empirical_measure_merges_repeats(self):
        """Test that repeated values become one atom"""
        m = empirical_measure([2.0, 1.0, 1.0])
        np.testing.assert_array_equal(m.values(), [1.0, 2.0])
        np.testing.assert_allclose(m.weights, [2 / 3, 1 / 3])

    def test_uniform_midpoints(self):
        """Test the midpoint discretization of a uniform law"""
        m = uniform_measure(4)
        np.testing.assert_allclose(m.values(), [0.125, 0.375, 0.625, 0.875])
        m = uniform_measure(4, 0.0, 2.0 * np.pi)
        self.assertAlmostEqual(m.mean(), np.pi)
        with self.assertRaises(OutOfRange):
            uniform_measure(1)

    def test_integrate(self):
        """Test integration against a measure"""
        m = make_discrete([1.0, 3.0], [0.5, 0.5])
        self.assertAlmostEqual(integrate(m, lambda a: a ** 2), 5.0)
        with self.assertRaises(NonFiniteIntegrand):
            integrate(m, lambda a: np.inf if a > 2 else a)


class TestDistances(unittest.TestCase):
    def setUp(self):
        self.uniform = PiecewiseLinearCDF([0.0, 1.0], [0.0, 1.0])

    def test_identical_distributions(self):
        """Test that a distribution is at distance zero from itself"""
        sample = EmpiricalDistribution.of([0.0, 1.0, 1.0, 2.0])
        self.assertEqual(kolmogorov_distance(sample, sample), 0.0)
        self.assertEqual(wasserstein1(sample, sample), 0.0)

    def test_point_masses(self):
        """Test distances between two point masses"""
        left = EmpiricalDistribution.of([0.0])
        right = EmpiricalDistribution.of([1.0])
        self.assertAlmostEqual(kolmogorov_distance(left, right), 1.0)
        self.assertAlmostEqual(wasserstein1(left, right), 1.0)

    def test_uniform_against_point(self):
        """Test distances between a continuous CDF and a step CDF"""
        point = EmpiricalDistribution.of([0.5])
        self.assertAlmostEqual(kolmogorov_distance(self.uniform, point), 0.5)
        self.assertAlmostEqual(wasserstein1(self.uniform, point), 0.25)

    def test_atom_at_zero(self):
        """Test a CDF whose mass partly sits at zero"""
        F = PiecewiseLinearCDF([0.0, 1.0], [0.0, 0.5], atom=0.5)
        self.assertAlmostEqual(float(F.cdf(0.0)), 0.5)
        self.assertAlmostEqual(float(F.cdf_left(0.0)), 0.0)
        zeros = EmpiricalDistribution.of([0.0, 0.0])
        self.assertAlmostEqual(kolmogorov_distance(F, zeros), 0.5)

    def test_ppf(self):
        """Test the generalized inverse of a piecewise linear CDF"""
        np.testing.assert_allclose(self.uniform.ppf([0.25, 0.5]), [0.25, 0.5])


if __name__ == '__main__':
    unittest.main()
