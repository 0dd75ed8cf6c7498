# test_compare.py - Tests for empirical versus limiting comparisons
"""
Unit tests for single comparisons, seed batches and histogram overlays.
"""

import unittest
import sys
import os
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

import numpy as np

from spectral_law.compare import BatchResult, ComparisonReport, batch_compare, compare, overlay, simulate_spectra
from spectral_law.data_manager import load_template
from spectral_law.errors import EmptySeeds
from spectral_law.kernel import SolverConfig, ZGrid, cdf_from_density
from spectral_law.measures import kolmogorov_distance
from spectral_law.models import IidCovarianceSpec, MatrixARSpec
from spectral_law.spectra import ESD
from spectral_law.theory import problem_for, solve_lsd


class TestCompare(unittest.TestCase):
    def setUp(self):
        self.spec = IidCovarianceSpec(sigma_eigs={'atoms': [1.0], 'weights': [1.0]})
        self.dims = (200, 400)
        self.z = ZGrid.linspace(0.0, 4.0, 200, 0.02)
        self.cfg = SolverConfig(tol=1e-10, max_iter=5000)

    def test_identity_law_agreement(self):
        """Test that a simulated identity-covariance spectrum is close to its limit"""
        result = batch_compare(self.spec, self.dims, [1, 2], self.z, self.cfg)
        self.assertIsInstance(result, BatchResult)
        self.assertEqual(len(result.reports), 2)
        for report in result.reports:
            self.assertLess(report.ks, 0.1)
            self.assertLess(report.w1, 0.1)
            self.assertLess(report.moment_gap, 0.05)
            self.assertEqual(report.metadata['family'], 'iid_covariance')
            self.assertEqual((report.metadata['p'], report.metadata['n']), self.dims)
        self.assertEqual([report.metadata['seed'] for report in result.reports], [1, 2])

    def test_summary(self):
        """Test the median and max summary rows"""
        result = batch_compare(self.spec, self.dims, [1, 2, 3], self.z, self.cfg)
        summary = result.summary
        ks = [report.ks for report in result.reports]
        self.assertAlmostEqual(summary['ks_median'], float(np.median(ks)))
        self.assertAlmostEqual(summary['ks_max'], max(ks))
        rows = result.summary_rows()
        self.assertEqual(len(rows), 5)
        self.assertEqual([row['seed'] for row in rows[-2:]], ['median', 'max'])

    def test_report_serialization(self):
        """Test that reports serialize to JSON-ready dictionaries"""
        prob = problem_for(self.spec, 50, 100)
        _, density = solve_lsd(prob, self.z, self.cfg)
        e = simulate_spectra(self.spec, (50, 100), 5)[None]
        report = compare(e, density, prob, {'seed': 5})
        data = report.to_dict()
        self.assertEqual(set(data), {'ks', 'w1', 'moment_gap', 'converged_fraction', 'metadata'})
        self.assertEqual(data['metadata']['seed'], 5)
        restored = ComparisonReport.from_dict(data)
        self.assertEqual(restored.ks, report.ks)

    def test_empty_seeds(self):
        """Test that a batch needs at least one seed"""
        with self.assertRaises(EmptySeeds):
            batch_compare(self.spec, self.dims, [], self.z, self.cfg)

    def test_overlay(self):
        """Test the histogram overlay on shared bin centres"""
        prob = problem_for(self.spec, 50, 100)
        _, density = solve_lsd(prob, self.z, self.cfg)
        e = ESD(np.array([0.5, 1.0, 1.5, 2.0]), 4, 8)
        plot = overlay(e, density, bins=8, range=(0.0, 4.0))
        self.assertEqual(len(plot.rows()), 8)
        np.testing.assert_allclose(plot.x[:2], [0.25, 0.75])
        self.assertTrue(np.all(plot.theory_density >= 0))
        self.assertAlmostEqual(float(np.sum(plot.hist_density * 0.5)), 1.0)


class TestMatrixARBatch(unittest.TestCase):
    def test_reports_per_observation_time(self):
        """Test that each seed yields one report per observation time"""
        spec = MatrixARSpec(a_eigs={'atoms': [0.5], 'weights': [1.0]},
                            b_diag={'atoms': [0.5], 'weights': [1.0]}, burn_in=50)
        z = ZGrid.linspace(0.0, 4.0, 200, 0.02)
        result = batch_compare(spec, (40, 80), [1, 2], z, SolverConfig(tol=1e-10, max_iter=5000),
                               times=[1, 3])
        keys = [(report.metadata['seed'], report.metadata['t']) for report in result.reports]
        self.assertEqual(keys, [(1, 1), (1, 3), (2, 1), (2, 3)])
        self.assertEqual(len(result.spectra), 4)
        self.assertEqual([row['t'] for row in result.summary_rows()[:2]], [1, 3])


class TestZeroAtom(unittest.TestCase):
    def setUp(self):
        self.spec = IidCovarianceSpec(sigma_eigs={'atoms': [1.0], 'weights': [1.0]})

    def test_wide_matrix(self):
        """Test that the p - n zero eigenvalues of a 600 x 300 matrix match the atom of the law"""
        config = load_template('mp_wide')
        result = batch_compare(config.model, config.dims.shape, [1], config.zgrid.grid(),
                               config.solver.solver_config())
        self.assertGreaterEqual(result.density.atom_at_zero, 0.5)
        self.assertLess(result.density.atom_at_zero, 0.52)
        self.assertEqual(int(np.sum(result.spectra[0].eigenvalues == 0.0)), 300)
        self.assertLess(result.reports[0].ks, 0.06)

    def test_square_matrix(self):
        """Test agreement at p = n, where the law has no atom but a singular density at zero"""
        z = ZGrid.linspace(0.0, 5.0, 800, 0.01)
        result = batch_compare(self.spec, (400, 400), [1, 2], z, SolverConfig())
        self.assertLess(result.density.atom_at_zero, 0.06)
        for report in result.reports:
            self.assertLess(report.ks, 0.06)

    def test_square_matrix_small_eta(self):
        """Test that a small offset keeps the mass in band and the agreement at p = n"""
        z = ZGrid.linspace(0.0, 5.0, 800, 1e-3)
        result = batch_compare(self.spec, (400, 400), [1], z, SolverConfig())
        self.assertLess(result.reports[0].ks, 0.06)


class TestTemplateAgreement(unittest.TestCase):
    """Each family at p = 400, c = 0.5 against its solved law"""

    def _median_ks(self, name, dims=(400, 800), seeds=(1, 2)):
        config = load_template(name)
        result = batch_compare(config.model, dims, list(seeds), config.zgrid.grid(),
                               config.solver.solver_config(), quad_points=config.solver.quad_points)
        return result.summary['ks_median']

    def test_separable(self):
        """Test the weighted sample covariance"""
        self.assertLessEqual(self._median_ks('separable_demo'), 0.06)

    def test_variance_profile(self):
        """Test the profile 1 + s t"""
        self.assertLessEqual(self._median_ks('variance_profile'), 0.06)

    def test_linear_process(self):
        """Test independent AR(1) rows"""
        self.assertLessEqual(self._median_ks('linear_ar1'), 0.06)

    def test_diffusion_rcv(self):
        """Test the realized covariance with a volatility step"""
        self.assertLessEqual(self._median_ks('rcv_step'), 0.06)

    def test_finite_mixture(self):
        """Test the two-population mixture"""
        self.assertLessEqual(self._median_ks('mixture_two'), 0.06)


class TestMatrixARStationarity(unittest.TestCase):
    def test_observation_times_agree(self):
        """Test that the 400 x 600 matrix AR spectrum matches the law at every observation time"""
        config = load_template('mar_demo')
        result = batch_compare(config.model, config.dims.shape, config.seeds, config.zgrid.grid(),
                               config.solver.solver_config(), times=config.observation_times)
        self.assertEqual([report.metadata['t'] for report in result.reports], [1, 5, 10, 15])
        for report in result.reports:
            self.assertLessEqual(report.ks, 0.06)

        distributions = [e.distribution() for e in result.spectra]
        for i, first in enumerate(distributions):
            for second in distributions[i + 1:]:
                self.assertLessEqual(kolmogorov_distance(first, second), 0.04)


class TestInverseSampling(unittest.TestCase):
    def test_ppf_draws_follow_the_law(self):
        """Test that values drawn through the solved quantile function reproduce the law"""
        spec = IidCovarianceSpec(sigma_eigs={'atoms': [1.0], 'weights': [1.0]})
        prob = problem_for(spec, 200, 400)
        _, density = solve_lsd(prob, ZGrid.linspace(0.0, 4.0, 400, 0.01))
        theoretical = cdf_from_density(density)
        levels = np.random.default_rng(11).uniform(size=4000)
        draws = ESD(np.sort(theoretical.ppf(levels)), 4000, 8000)
        self.assertLess(kolmogorov_distance(draws.distribution(), theoretical), 0.03)


if __name__ == '__main__':
    unittest.main()
