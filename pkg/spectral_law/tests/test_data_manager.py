# test_data_manager.py - Tests for configurations and result files
"""
Unit tests for experiment configuration parsing, templates and the
DataManager result writers.
"""

import unittest
import sys
import os
import json
import shutil
import tempfile
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

import numpy as np

from spectral_law import __version__
from spectral_law.config import AVAILABLE_TEMPLATES
from spectral_law.data_manager import (
    DataManager, config_hash, list_templates, load_config, load_esd, load_template
)
from spectral_law.errors import ConfigError
from spectral_law.experiment import parse_config
from spectral_law.models import MatrixARSpec


def small_config(**overrides):
    data = {
        'model': {'family': 'iid_covariance', 'sigma_eigs': {'atoms': [1.0], 'weights': [1.0]}},
        'dims': {'p': 40, 'n': 80},
        'zgrid': {'x_min': 0.0, 'x_max': 4.0, 'count': 120, 'eta': 0.02},
        'solver': {'tol': 1e-10, 'max_iter': 3000},
        'seeds': [1]
    }
    data.update(overrides)
    return data


class TestExperimentConfig(unittest.TestCase):
    def test_defaults(self):
        """Test that omitted sections take their defaults"""
        config = parse_config({'model': {'family': 'iid_covariance', 'sigma_eigs': [1.0]}, 'dims': {'p': 1, 'n': 2}})
        self.assertEqual(config.seeds, [42])
        self.assertEqual(config.bins, 60)
        self.assertEqual(config.zgrid.count, 800)
        self.assertEqual(config.dims.shape, (1, 2))

    def test_axis_names(self):
        """Test that each axis is named exactly once"""
        config = parse_config(small_config(dims={'m': 4, 'T': 6}))
        self.assertEqual(config.dims.shape, (4, 6))
        with self.assertRaises(ConfigError):
            parse_config(small_config(dims={'p': 4, 'm': 4, 'n': 6}))
        with self.assertRaises(ConfigError):
            parse_config(small_config(dims={'p': 4}))

    def test_rejects_bad_values(self):
        """Test seeds, grid ordering and unknown keys"""
        with self.assertRaises(ConfigError):
            parse_config(small_config(seeds=[-1]))
        with self.assertRaises(ConfigError):
            parse_config(small_config(seeds=[]))
        with self.assertRaises(ConfigError):
            parse_config(small_config(zgrid={'x_min': 2.0, 'x_max': 1.0}))
        with self.assertRaises(ConfigError):
            parse_config(small_config(solver={'damping': 1.5}))
        with self.assertRaises(ConfigError):
            parse_config(small_config(plot=True))
        with self.assertRaises(ConfigError):
            parse_config([1, 2])

    def test_observation_times(self):
        """Test that observation times apply to the matrix AR family only"""
        config = parse_config(small_config(
            model={'family': 'matrix_ar', 'a_eigs': [0.5] * 4, 'b_diag': [0.5] * 6},
            dims={'m': 4, 'n': 6, 't': [5, 1, 5]}
        ))
        self.assertIsInstance(config.model, MatrixARSpec)
        self.assertEqual(config.observation_times, [1, 5])
        self.assertIsNone(parse_config(small_config(dims={'p': 4, 'n': 6, 't': [1]})).observation_times)

    def test_solver_settings(self):
        """Test conversion to the solver's own settings"""
        config = parse_config(small_config())
        cfg = config.solver.solver_config(tol=1e-8, workers=2)
        self.assertEqual(cfg.tol, 1e-8)
        self.assertEqual(cfg.max_iter, 3000)
        self.assertEqual(cfg.workers, 2)
        grid = config.zgrid.grid(eta=0.5)
        self.assertEqual(grid.eta, 0.5)
        self.assertEqual(len(grid), 120)


class TestTemplates(unittest.TestCase):
    def test_every_template_loads(self):
        """Test that the shipped templates are valid configurations"""
        self.assertEqual(list_templates(), sorted(AVAILABLE_TEMPLATES))
        for name in AVAILABLE_TEMPLATES:
            config = load_template(name)
            config.model.check(*config.dims.shape)

    def test_matrix_ar_template(self):
        """Test the matrix AR demonstration template"""
        config = load_template('mar_demo')
        self.assertEqual(config.dims.shape, (400, 600))
        self.assertEqual(config.observation_times, [1, 5, 10, 15])
        a, b = config.model.coefficients(400, 600)
        self.assertEqual(sorted(set(a.tolist())), [0.5, 0.6, 0.7])
        self.assertEqual(int(np.sum(a == 0.7)), 200)

    def test_unknown_template(self):
        """Test that an unknown template name is a configuration error"""
        with self.assertRaises(ConfigError) as context:
            load_template('no_such_template')
        self.assertIn('mp_identity', str(context.exception))


class TestFiles(unittest.TestCase):
    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def _write(self, name, text):
        path = os.path.join(self.temp_dir, name)
        with open(path, 'w') as f:
            f.write(text)
        return path

    def test_load_config(self):
        """Test reading configurations from disk"""
        path = self._write('exp.json', json.dumps(small_config()))
        self.assertEqual(load_config(path).dims.shape, (40, 80))
        with self.assertRaises(ConfigError):
            load_config(self._write('bad.json', '{"model": '))
        with self.assertRaises(ConfigError):
            load_config(os.path.join(self.temp_dir, 'missing.json'))

    def test_config_hash(self):
        """Test that the hash depends on content, not key order or formatting"""
        first = parse_config(small_config())
        reordered = parse_config(json.loads(json.dumps(small_config(), indent=4, sort_keys=True)))
        other = parse_config(small_config(seeds=[2]))
        self.assertEqual(config_hash(first), config_hash(reordered))
        self.assertNotEqual(config_hash(first), config_hash(other))
        self.assertEqual(len(config_hash(first)), 64)

    def test_eigenvalue_files(self):
        """Test the provenance line and reading eigenvalues back"""
        manager = DataManager(self.temp_dir, 'abc123')
        path = manager.write_esd(np.array([0.5, 0.25, 1.0]), seed=3, t=2)
        self.assertTrue(path.endswith('esd_seed3_t2.csv'))
        with open(path) as f:
            self.assertEqual(f.readline().strip(), f"# spectral-law {__version__} config=abc123")
        np.testing.assert_allclose(load_esd(path), [0.25, 0.5, 1.0])

    def test_load_esd_rejects_other_tables(self):
        """Test that only eigenvalue tables are read as spectra"""
        manager = DataManager(self.temp_dir, 'abc123')
        path = manager.write_csv('other', ['x', 'rho'], [(0.0, 1.0)])
        with self.assertRaises(ConfigError):
            load_esd(path)

    def test_json_sidecar(self):
        """Test that JSON documents carry the version and configuration hash"""
        manager = DataManager(self.temp_dir, 'abc123')
        paths = manager.write_density(np.array([0.0, 1.0]), np.array([0.1, 0.2]), {'eta': 0.01})
        with open(paths[1]) as f:
            sidecar = json.load(f)
        self.assertEqual(sidecar['version'], __version__)
        self.assertEqual(sidecar['config_hash'], 'abc123')
        self.assertEqual(sidecar['eta'], 0.01)

    def test_summary_table(self):
        """Test that missing observation times are written as empty cells"""
        manager = DataManager(self.temp_dir, 'abc123')
        path = manager.write_summary([{'seed': 1, 't': None, 'ks': 0.1, 'w1': 0.2, 'moment_gap': 0.0}])
        with open(path) as f:
            lines = f.read().splitlines()
        self.assertEqual(lines[1], 'seed,t,ks,w1,moment_gap')
        self.assertEqual(lines[2], '1,,0.1,0.2,0.0')


if __name__ == '__main__':
    unittest.main()
