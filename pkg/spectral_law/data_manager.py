# data_manager.py - Configuration loading and result files
"""
Loading of experiment configurations and templates, and writing of result
files. Every CSV starts with a provenance comment line and every JSON document
carries the tool version and configuration hash. Nothing time-dependent is
written, so rerunning a configuration reproduces its files byte for byte.
"""

import csv
import hashlib
import json
import logging
import os
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from . import __version__
from .config import AVAILABLE_TEMPLATES, DATA_PATHS, FILE_EXTENSIONS
from .errors import ConfigError
from .experiment import ExperimentConfig, parse_config

logger = logging.getLogger(__name__)

PACKAGE_DIR = os.path.dirname(os.path.abspath(__file__))
TEMPLATES_DIR = os.path.join(PACKAGE_DIR, DATA_PATHS['templates'])


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, separators=(',', ':'))


def config_hash(config: ExperimentConfig) -> str:
    """sha256 of the canonical JSON of a validated configuration"""
    return hashlib.sha256(canonical_json(config.model_dump(mode='json')).encode('utf-8')).hexdigest()


def load_config(path: str) -> ExperimentConfig:
    """Read and validate a configuration document"""
    try:
        with open(path, 'r') as f:
            data = json.load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return parse_config(data)


def template_path(name: str) -> str:
    return os.path.join(TEMPLATES_DIR, f"{name}{FILE_EXTENSIONS['template']}")


def list_templates() -> List[str]:
    """Templates shipped with the package"""
    try:
        files = os.listdir(TEMPLATES_DIR)
    except OSError:
        return []
    suffix = FILE_EXTENSIONS['template']
    return sorted(f[:-len(suffix)] for f in files if f.endswith(suffix))


def load_template(name: str) -> ExperimentConfig:
    """Load a shipped experiment template by name"""
    path = template_path(name)
    if not os.path.exists(path):
        raise ConfigError(f"unknown template '{name}'; available: {', '.join(AVAILABLE_TEMPLATES)}")
    return load_config(path)


def load_esd(path: str) -> np.ndarray:
    """Sorted eigenvalues from an eigenvalue CSV written by DataManager"""
    values = []
    with open(path, 'r', newline='') as f:
        rows = csv.reader(line for line in f if not line.startswith('#'))
        header = next(rows, None)
        if header != ['value']:
            raise ConfigError(f"{path} is not an eigenvalue file (header {header})")
        for row in rows:
            if row:
                values.append(float(row[0]))
    return np.sort(np.asarray(values, dtype=float))


def _stem(prefix: str, seed: Optional[int] = None, t: Optional[int] = None) -> str:
    stem = prefix if seed is None else f"{prefix}_seed{seed}"
    return stem if t is None else f"{stem}_t{t}"


class DataManager:
    """
    Writes the result files of one experiment into an output directory.

    Handles:
    - Eigenvalue, density, overlay and summary CSV tables
    - JSON sidecars and comparison reports
    - Provenance headers (tool version and configuration hash)
    """

    def __init__(self, output_dir: str = DATA_PATHS['outputs'], config_digest: str = '',
                 version: str = __version__):
        self.output_dir = output_dir
        self.config_digest = config_digest
        self.version = version
        os.makedirs(self.output_dir, exist_ok=True)

    @property
    def provenance(self) -> str:
        return f"# spectral-law {self.version} config={self.config_digest}"

    def path(self, filename: str) -> str:
        return os.path.join(self.output_dir, filename)

    def write_csv(self, stem: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
        """Write a table with the provenance line first"""
        path = self.path(f"{stem}{FILE_EXTENSIONS['table']}")
        with open(path, 'w', newline='') as f:
            f.write(self.provenance + '\n')
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(header)
            for row in rows:
                writer.writerow(['' if value is None else value for value in row])
        logger.debug("wrote %s", path)
        return path

    def write_json(self, stem: str, data: Dict[str, Any]) -> str:
        """Write a JSON document with the version and configuration hash embedded"""
        path = self.path(f"{stem}{FILE_EXTENSIONS['sidecar']}")
        document = dict(data)
        document['version'] = self.version
        document['config_hash'] = self.config_digest
        with open(path, 'w') as f:
            json.dump(document, f, indent=2, sort_keys=True)
            f.write('\n')
        logger.debug("wrote %s", path)
        return path

    def write_esd(self, eigenvalues: np.ndarray, seed: Optional[int] = None, t: Optional[int] = None) -> str:
        return self.write_csv(_stem('esd', seed, t), ['value'], ([float(v)] for v in eigenvalues))

    def write_density(self, x: np.ndarray, rho: np.ndarray, sidecar: Dict[str, Any]) -> List[str]:
        table = self.write_csv('density', ['x', 'rho'], zip(map(float, x), map(float, rho)))
        return [table, self.write_json('density', sidecar)]

    def write_report(self, report: Dict[str, Any], seed: int, t: Optional[int] = None) -> str:
        return self.write_json(_stem('report', seed, t), report)

    def write_overlay(self, rows: Iterable[Sequence[float]], seed: int, t: Optional[int] = None) -> str:
        return self.write_csv(_stem('overlay', seed, t), ['x', 'hist_density', 'theory_density'], rows)

    def write_summary(self, rows: List[Dict[str, Any]]) -> str:
        header = ['seed', 't', 'ks', 'w1', 'moment_gap']
        return self.write_csv('summary', header, ([row.get(key) for key in header] for row in rows))
