# measures.py - Probability measures and distribution arithmetic
"""
Discrete, empirical and quantile representations of probability measures.

Every law the solver consumes (the coordinate law G, the column law H and the
midpoint discretizations of uniform laws) is a DiscreteMeasure. Empirical
spectra and solved densities are compared through their distribution
functions with kolmogorov_distance and wasserstein1.

All measure objects are immutable: their arrays are flagged read-only and can
be shared between worker threads.
"""

import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, Protocol, Sequence, Union

import numpy as np

from .config import TOLERANCES
from .errors import (
    DimensionMismatch, EmptyMeasure, NegativeWeight, NonFiniteAtom,
    NonFiniteIntegrand, OutOfRange, WeightSumMismatch
)

logger = logging.getLogger(__name__)


def _frozen(values: np.ndarray) -> np.ndarray:
    values.setflags(write=False)
    return values


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """
    Finite probability measure with atoms in R^d.

    atoms has shape (N, d); weights has shape (N,) and sums to 1 within 1e-12.
    """
    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        atoms = np.array(self.atoms, dtype=float)
        if atoms.ndim == 1:
            atoms = atoms.reshape(-1, 1)
        weights = np.array(self.weights, dtype=float).reshape(-1)

        if atoms.ndim != 2:
            raise DimensionMismatch(f"atoms must be vectors of a common dimension, got shape {atoms.shape}")
        if len(weights) == 0 or atoms.shape[0] == 0:
            raise EmptyMeasure("measure needs at least one atom")
        if atoms.shape[0] != len(weights):
            raise DimensionMismatch(f"{atoms.shape[0]} atoms but {len(weights)} weights")
        if not np.all(np.isfinite(atoms)):
            raise NonFiniteAtom("atoms must be finite")
        if not np.all(np.isfinite(weights)):
            raise WeightSumMismatch("weights must be finite")
        if np.any(weights < 0):
            raise NegativeWeight(f"negative weight {weights.min()}")
        total = weights.sum()
        if abs(total - 1.0) > TOLERANCES['weight_sum']:
            raise WeightSumMismatch(f"weights sum to {total!r}, expected 1")

        object.__setattr__(self, 'atoms', _frozen(atoms))
        object.__setattr__(self, 'weights', _frozen(weights))

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def dim(self) -> int:
        return self.atoms.shape[1]

    @property
    def is_scalar(self) -> bool:
        return self.dim == 1

    def values(self) -> np.ndarray:
        """Atoms of a scalar measure as a flat array"""
        if not self.is_scalar:
            raise DimensionMismatch(f"measure has {self.dim}-dimensional atoms")
        return self.atoms[:, 0]

    def cdf(self, x) -> np.ndarray:
        """Right-continuous distribution function of a scalar measure"""
        order = np.argsort(self.values(), kind='stable')
        sorted_atoms = self.values()[order]
        cumulative = np.concatenate(([0.0], np.cumsum(self.weights[order])))
        index = np.searchsorted(sorted_atoms, np.asarray(x, dtype=float), side='right')
        return np.minimum(cumulative[index], 1.0)

    def mean(self) -> float:
        return float(self.weights @ self.values())

    def permuted(self, order: Sequence[int]) -> 'DiscreteMeasure':
        order = np.asarray(order)
        return DiscreteMeasure(self.atoms[order], self.weights[order])

    def to_dict(self) -> Dict[str, Any]:
        return {
            'atoms': self.atoms.tolist(),
            'weights': self.weights.tolist()
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'DiscreteMeasure':
        return make_discrete(data['atoms'], data['weights'])


@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    """Uniform law on a sorted sample, viewed through its step CDF"""
    samples: np.ndarray

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float).reshape(-1)
        if len(samples) == 0:
            raise EmptyMeasure("empirical distribution needs at least one sample")
        if np.any(np.diff(samples) < 0):
            raise OutOfRange("samples must be sorted in nondecreasing order")
        object.__setattr__(self, 'samples', _frozen(samples))

    @classmethod
    def of(cls, values) -> 'EmpiricalDistribution':
        return cls(np.sort(np.asarray(values, dtype=float).reshape(-1)))

    @property
    def size(self) -> int:
        return len(self.samples)

    def breakpoints(self) -> np.ndarray:
        return np.unique(self.samples)

    def cdf(self, x) -> np.ndarray:
        return np.searchsorted(self.samples, np.asarray(x, dtype=float), side='right') / self.size

    def cdf_left(self, x) -> np.ndarray:
        return np.searchsorted(self.samples, np.asarray(x, dtype=float), side='left') / self.size


@dataclass(frozen=True, eq=False)
class QuantileFunction:
    """
    Quantile function sampled at the midpoints s_j = (j - 1/2)/Q.

    It stands for the law putting mass 1/Q on each sampled value.
    """
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1)
        if len(values) < 2:
            raise OutOfRange("a quantile function needs Q >= 2 samples")
        if np.any(np.diff(values) < 0):
            raise OutOfRange("quantile values must be nondecreasing")
        object.__setattr__(self, 'values', _frozen(values))

    @property
    def size(self) -> int:
        return len(self.values)

    @property
    def grid(self) -> np.ndarray:
        return (np.arange(1, self.size + 1) - 0.5) / self.size

    @classmethod
    def from_measure(cls, measure: Union[DiscreteMeasure, EmpiricalDistribution], Q: int) -> 'QuantileFunction':
        s = (np.arange(1, Q + 1) - 0.5) / Q
        return cls(quantiles(measure, s))

    def to_dict(self) -> Dict[str, Any]:
        return {'quantiles': self.values.tolist()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'QuantileFunction':
        return cls(data['quantiles'])


class DistributionFunction(Protocol):
    """Anything kolmogorov_distance and wasserstein1 can compare"""

    def breakpoints(self) -> np.ndarray: ...

    def cdf(self, x) -> np.ndarray: ...

    def cdf_left(self, x) -> np.ndarray: ...


@dataclass(frozen=True, eq=False)
class PiecewiseLinearCDF:
    """
    Distribution function made of an atom at zero and a continuous part.

    continuous holds the nondecreasing accumulated continuous mass at each knot,
    starting at 0; atom + continuous[-1] equals 1.
    """
    knots: np.ndarray
    continuous: np.ndarray
    atom: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, 'knots', _frozen(np.array(self.knots, dtype=float)))
        object.__setattr__(self, 'continuous', _frozen(np.array(self.continuous, dtype=float)))

    def breakpoints(self) -> np.ndarray:
        if self.atom > 0:
            return np.union1d(self.knots, [0.0])
        return self.knots

    def _continuous_at(self, x) -> np.ndarray:
        return np.interp(x, self.knots, self.continuous, left=0.0, right=self.continuous[-1])

    def cdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.atom * (x >= 0) + self._continuous_at(x)

    def cdf_left(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.atom * (x > 0) + self._continuous_at(x)

    def ppf(self, u) -> np.ndarray:
        """Generalized inverse inf{x : F(x) >= u}"""
        points = self.breakpoints()
        xs = np.repeat(points, 2)
        levels = np.empty_like(xs)
        levels[0::2] = self.cdf_left(points)
        levels[1::2] = self.cdf(points)

        u = np.clip(np.asarray(u, dtype=float), 0.0, levels[-1])
        index = np.clip(np.searchsorted(levels, u, side='left'), 1, len(xs) - 1)
        lo, hi = levels[index - 1], levels[index]
        rise = hi - lo
        fraction = np.where(rise > 0, (u - lo) / np.where(rise > 0, rise, 1.0), 1.0)
        result = xs[index - 1] + fraction * (xs[index] - xs[index - 1])
        return np.where(u <= levels[0], xs[0], result)


Distribution = Union[DiscreteMeasure, EmpiricalDistribution, QuantileFunction]


def make_discrete(atoms, weights) -> DiscreteMeasure:
    """Build a measure from human-written atoms and weights, renormalizing the weights"""
    weights = np.asarray(weights, dtype=float).reshape(-1)
    try:
        atoms = np.asarray(atoms, dtype=float)
    except ValueError as exc:
        raise DimensionMismatch(f"atoms must share a common dimension: {exc}") from exc

    if len(weights) == 0 or atoms.size == 0:
        raise EmptyMeasure("measure needs at least one atom")
    if len(atoms) != len(weights):
        raise DimensionMismatch(f"{len(atoms)} atoms but {len(weights)} weights")
    if np.any(weights < 0):
        raise NegativeWeight(f"negative weight {weights.min()}")

    total = weights.sum()
    if not np.isfinite(total) or abs(total - 1.0) > TOLERANCES['weight_input']:
        raise WeightSumMismatch(f"weights sum to {total!r}, expected 1 within {TOLERANCES['weight_input']}")
    return DiscreteMeasure(atoms, weights / total)


def point_mass(x) -> DiscreteMeasure:
    return DiscreteMeasure(np.atleast_1d(np.asarray(x, dtype=float)).reshape(1, -1), [1.0])


def empirical_measure(values) -> DiscreteMeasure:
    """Empirical law of a list of reals with repeated values merged into single atoms"""
    values = np.asarray(values, dtype=float).reshape(-1)
    if len(values) == 0:
        raise EmptyMeasure("empirical measure of an empty list")
    atoms, counts = np.unique(values, return_counts=True)
    return DiscreteMeasure(atoms, counts / counts.sum())


def vector_empirical_measure(vectors) -> DiscreteMeasure:
    """Empirical law of the rows of a 2-D array, merging identical rows"""
    vectors = np.asarray(vectors, dtype=float)
    if vectors.ndim != 2 or vectors.shape[0] == 0:
        raise EmptyMeasure("vector empirical measure needs a non-empty 2-D array")
    atoms, counts = np.unique(vectors, axis=0, return_counts=True)
    return DiscreteMeasure(atoms, counts / counts.sum())


def uniform_measure(Q: int, lo: float = 0.0, hi: float = 1.0) -> DiscreteMeasure:
    """Midpoint-rule discretization of U(lo, hi) with Q atoms"""
    if Q < 2:
        raise OutOfRange(f"need Q >= 2 atoms, got {Q}")
    atoms = lo + (hi - lo) * (np.arange(1, Q + 1) - 0.5) / Q
    return DiscreteMeasure(atoms, np.full(Q, 1.0 / Q))


def discretize_uniform(Q: int) -> DiscreteMeasure:
    return uniform_measure(Q, 0.0, 1.0)


def quantiles(m: Distribution, s) -> np.ndarray:
    """Vectorized left-continuous generalized inverse inf{u : F(u) >= s}"""
    s = np.asarray(s, dtype=float)
    if np.any((s <= 0) | (s >= 1)) or np.any(~np.isfinite(s)):
        raise OutOfRange("quantile levels must lie strictly inside (0, 1)")

    if isinstance(m, QuantileFunction):
        sorted_values = m.values
        cumulative = np.arange(1, m.size + 1) / m.size
    elif isinstance(m, EmpiricalDistribution):
        sorted_values = m.samples
        cumulative = np.arange(1, m.size + 1) / m.size
    else:
        order = np.argsort(m.values(), kind='stable')
        sorted_values = m.values()[order]
        cumulative = np.cumsum(m.weights[order])

    index = np.searchsorted(cumulative, s - TOLERANCES['quantile'], side='left')
    return sorted_values[np.minimum(index, len(sorted_values) - 1)]


def quantile(m: Distribution, s: float) -> float:
    return float(quantiles(m, s))


def integrate(m: DiscreteMeasure, phi: Callable[[Any], complex]) -> complex:
    """Sum of weights times phi at each atom; scalar measures pass floats to phi"""
    if m.is_scalar:
        values = [phi(float(a)) for a in m.values()]
    else:
        values = [phi(a) for a in m.atoms]
    values = np.asarray(values, dtype=complex)
    if not np.all(np.isfinite(values)):
        raise NonFiniteIntegrand("integrand is not finite at every atom")
    return complex(m.weights @ values)


def _evaluation_points(F: DistributionFunction, Gd: DistributionFunction) -> np.ndarray:
    return np.union1d(F.breakpoints(), Gd.breakpoints())


def kolmogorov_distance(F: DistributionFunction, Gd: DistributionFunction) -> float:
    """Sup distance between two distribution functions, right and left limits included"""
    points = _evaluation_points(F, Gd)
    right = np.abs(F.cdf(points) - Gd.cdf(points))
    left = np.abs(F.cdf_left(points) - Gd.cdf_left(points))
    return float(max(right.max(), left.max()))


def wasserstein1(F: DistributionFunction, Gd: DistributionFunction) -> float:
    """Area between two distribution functions, integrated exactly piece by piece"""
    points = _evaluation_points(F, Gd)
    if len(points) < 2:
        return 0.0
    start = (F.cdf(points) - Gd.cdf(points))[:-1]
    end = (F.cdf_left(points) - Gd.cdf_left(points))[1:]
    width = np.diff(points)

    same_sign = start * end >= 0
    magnitude = np.abs(start) + np.abs(end)
    crossing = np.divide(start ** 2 + end ** 2, 2.0 * magnitude,
                         out=np.zeros_like(magnitude), where=magnitude > 0)
    area = np.where(same_sign, 0.5 * magnitude, crossing) * width
    return float(area.sum())
