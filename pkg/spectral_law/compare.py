# compare.py - Agreement between empirical spectra and solved limiting laws
"""
Distances between an ESD and a solved density, single runs and seed batches.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from dataclasses_json import dataclass_json

from .config import HISTOGRAM_DEFAULTS
from .errors import EmptySeeds
from .kernel import DensityCurve, KernelField, SolverConfig, ZGrid, cdf_from_density
from .measures import PiecewiseLinearCDF, kolmogorov_distance, wasserstein1
from .simulate import simulate_observations
from .spectra import ESD, esd_of, histogram
from .theory import LsdProblem, solve_spec

logger = logging.getLogger(__name__)


@dataclass_json
@dataclass
class ComparisonReport:
    """Kolmogorov and Wasserstein distances plus the first-moment gap of one ESD"""
    ks: float
    w1: float
    moment_gap: float
    converged_fraction: float
    metadata: Dict[str, Any] = field(default_factory=dict)


def compare(e: ESD, d: DensityCurve, prob: LsdProblem, metadata: Optional[Dict[str, Any]] = None,
            cdf: Optional[PiecewiseLinearCDF] = None) -> ComparisonReport:
    """
    Compare an ESD with a solved density on the full measure, zero atom included.

    Args:
        e: Empirical spectral distribution
        d: Solved density of the limiting law
        prob: The problem d was solved from; supplies the first moment
        metadata: Extra entries for the report (seed, observation time)
        cdf: Distribution function of d, when already computed

    Returns:
        ComparisonReport
    """
    theoretical = cdf if cdf is not None else cdf_from_density(d)
    empirical = e.distribution()
    details = {
        'p': e.p,
        'n': e.n,
        'c': prob.c,
        'eta': d.eta,
        'quad_points': prob.quad_points,
        'atom_at_zero': d.atom_at_zero,
        'family': prob.family
    }
    details.update(metadata or {})
    return ComparisonReport(
        ks=kolmogorov_distance(empirical, theoretical),
        w1=wasserstein1(empirical, theoretical),
        moment_gap=abs(e.mean() - prob.first_moment()),
        converged_fraction=d.converged_fraction,
        metadata=details
    )


SUMMARY_METRICS = ('ks', 'w1', 'moment_gap')


@dataclass
class BatchResult:
    """One solved law compared with the spectra of many seeds"""
    problem: LsdProblem
    kernel_field: KernelField
    density: DensityCurve
    reports: List[ComparisonReport]
    spectra: List[ESD] = field(default_factory=list)

    @property
    def summary(self) -> Dict[str, float]:
        summary = {}
        for metric in SUMMARY_METRICS:
            values = np.array([getattr(report, metric) for report in self.reports])
            summary[f'{metric}_median'] = float(np.median(values))
            summary[f'{metric}_max'] = float(np.max(values))
        return summary

    def summary_rows(self) -> List[Dict[str, Any]]:
        """One row per report followed by the median and max rows"""
        rows = []
        for report in self.reports:
            row = {'seed': report.metadata.get('seed'), 't': report.metadata.get('t')}
            row.update({metric: getattr(report, metric) for metric in SUMMARY_METRICS})
            rows.append(row)
        summary = self.summary
        for statistic in ('median', 'max'):
            row = {'seed': statistic, 't': None}
            row.update({metric: summary[f'{metric}_{statistic}'] for metric in SUMMARY_METRICS})
            rows.append(row)
        return rows


def simulate_spectra(spec, dims: Tuple[int, int], seed: int, times: Optional[Sequence[int]] = None,
                     workers: int = 1) -> Dict[Optional[int], ESD]:
    """ESD of each observation of one seeded simulation, keyed by observation time"""
    p, n = dims
    matrices = simulate_observations(spec, p, n, seed, times, workers)
    return {t: esd_of(X) for t, X in matrices.items()}


def batch_compare(spec, dims: Tuple[int, int], seeds: Sequence[int], z: ZGrid,
                  cfg: Optional[SolverConfig] = None, times: Optional[Sequence[int]] = None,
                  quad_points: Optional[int] = None, workers: int = 1) -> BatchResult:
    """
    Solve the limiting law once and compare it with one simulation per seed.

    Reports are ordered by seed, then by observation time.
    """
    seeds = list(seeds)
    if not seeds:
        raise EmptySeeds("batch comparison needs at least one seed")
    p, n = dims
    prob, solved, density = solve_spec(spec, p, n, z, cfg, quad_points)
    theoretical = cdf_from_density(density)

    def run(seed):
        return seed, simulate_spectra(spec, dims, seed, times)

    if workers > 1 and len(seeds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            spectra = list(pool.map(run, seeds))
    else:
        spectra = [run(seed) for seed in seeds]

    reports, observed = [], []
    for seed, by_time in spectra:
        for t in sorted(by_time, key=lambda key: -1 if key is None else key):
            metadata = {'seed': seed} if t is None else {'seed': seed, 't': t}
            reports.append(compare(by_time[t], density, prob, metadata, theoretical))
            observed.append(by_time[t])
    logger.info("compared %d spectra; median ks %.4f", len(reports),
                float(np.median([report.ks for report in reports])))
    return BatchResult(problem=prob, kernel_field=solved, density=density, reports=reports, spectra=observed)


@dataclass
class Overlay:
    """Histogram heights and theoretical density on the same bin centres"""
    x: np.ndarray
    hist_density: np.ndarray
    theory_density: np.ndarray

    def rows(self) -> List[Tuple[float, float, float]]:
        return list(zip(self.x.tolist(), self.hist_density.tolist(), self.theory_density.tolist()))


def overlay(e: ESD, d: DensityCurve, bins: int = HISTOGRAM_DEFAULTS['bins'],
            range: Optional[Tuple[float, float]] = None) -> Overlay:
    """Plot-ready histogram of e next to the normalized continuous density of d"""
    if range is None:
        range = (float(d.x[0]), float(d.x[-1]))
    edges, heights = histogram(e, bins, range)
    centres = (edges[:-1] + edges[1:]) / 2.0
    continuous = d.continuous_part() / max(d.mass(), np.finfo(float).tiny)
    theory = np.interp(centres, d.x, continuous, left=0.0, right=0.0)
    return Overlay(x=centres, hist_density=heights, theory_density=theory)
