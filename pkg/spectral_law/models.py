# models.py - Model specifications for the seven matrix families
"""
Pydantic specifications of the simulatable matrix families.

A model block in an experiment configuration is one of seven variants selected
by its ``family`` tag. Schema problems (unknown keys, wrong types, bad profile
expressions) surface as ConfigError while parsing; invariants that depend on
the dimensions (list lengths, stationarity, partitions) are enforced by
``check(p, n)`` and raise ModelError subclasses.
"""

import logging
from abc import abstractmethod
from typing import Annotated, Any, Dict, List, Literal, Optional, Union

import numpy as np
from pydantic import (
    BaseModel, ConfigDict, Field, TypeAdapter, ValidationError,
    field_validator, model_validator
)
from scipy import integrate

from .config import SIMULATION_DEFAULTS, TOLERANCES
from .errors import (
    BadPartition, ConfigError, DimensionMismatch, NonFiniteProfile,
    NotStationary, SpecInvariantViolated
)
from .expressions import Expression
from .measures import DiscreteMeasure, make_discrete, quantiles

logger = logging.getLogger(__name__)


class EigenBlock(BaseModel):
    """Compact eigenvalue list: atoms with weights, expanded by midpoint quantiles"""
    model_config = ConfigDict(extra='forbid', frozen=True)

    atoms: List[float] = Field(min_length=1)
    weights: List[float] = Field(min_length=1)

    def measure(self) -> DiscreteMeasure:
        return make_discrete(self.atoms, self.weights)

    def expand(self, length: int) -> np.ndarray:
        s = (np.arange(1, length + 1) - 0.5) / length
        return quantiles(self.measure(), s)


EigenList = Union[List[float], EigenBlock]


def eigen_values(values: EigenList, length: int, name: str) -> np.ndarray:
    """Realize an eigenvalue list of the required length"""
    if isinstance(values, EigenBlock):
        return values.expand(length)
    array = np.asarray(values, dtype=float)
    if len(array) != length:
        raise DimensionMismatch(f"{name} has {len(array)} entries, expected {length}")
    return array


def _require_nonnegative(values: np.ndarray, name: str):
    if not np.all(np.isfinite(values)):
        raise SpecInvariantViolated(f"{name} must be finite")
    if np.any(values < 0):
        raise SpecInvariantViolated(f"{name} must be nonnegative, found {values.min()}")


def _parse_profile(text: str) -> str:
    Expression(text)
    return text


class ModelSpecBase(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)

    def check(self, p: int, n: int) -> None:
        """Raise a ModelError when the spec is inconsistent with a p x n matrix"""
        if p < 1 or n < 1:
            raise DimensionMismatch(f"dimensions must be positive, got p={p}, n={n}")

    @abstractmethod
    def column_eigenvalues(self, p: int, n: int) -> np.ndarray:
        """p x n table of the eigenvalue of each column covariance at each coordinate"""


class IidCovarianceSpec(ModelSpecBase):
    """Sample covariance of i.i.d. columns with population eigenvalues sigma_eigs"""
    family: Literal['iid_covariance'] = 'iid_covariance'
    sigma_eigs: EigenList

    def eigenvalues(self, p: int) -> np.ndarray:
        return eigen_values(self.sigma_eigs, p, 'sigma_eigs')

    def check(self, p, n):
        super().check(p, n)
        _require_nonnegative(self.eigenvalues(p), 'sigma_eigs')

    def column_eigenvalues(self, p, n):
        return np.repeat(self.eigenvalues(p)[:, None], n, axis=1)


class SeparableSpec(ModelSpecBase):
    """Weighted sample covariance: column i is sqrt(b_i) A^(1/2) z_i"""
    family: Literal['separable'] = 'separable'
    a_eigs: EigenList
    b_weights: EigenList

    def check(self, p, n):
        super().check(p, n)
        _require_nonnegative(eigen_values(self.a_eigs, p, 'a_eigs'), 'a_eigs')
        _require_nonnegative(eigen_values(self.b_weights, n, 'b_weights'), 'b_weights')

    def column_eigenvalues(self, p, n):
        return np.outer(eigen_values(self.a_eigs, p, 'a_eigs'), eigen_values(self.b_weights, n, 'b_weights'))


class VarianceProfileSpec(ModelSpecBase):
    """Gram matrix with entry standard deviations sigma(i/p, j/n)"""
    family: Literal['variance_profile'] = 'variance_profile'
    profile: str

    @field_validator('profile')
    @classmethod
    def validate_profile(cls, value: str) -> str:
        return _parse_profile(value)

    def expression(self) -> Expression:
        return Expression(self.profile)

    def grid_values(self, p: int, n: int) -> np.ndarray:
        s = np.arange(1, p + 1) / p
        t = np.arange(1, n + 1) / n
        values = np.array(self.expression()(s[:, None], t[None, :]))
        if not np.all(np.isfinite(values)):
            raise NonFiniteProfile(f"profile {self.profile!r} is not finite on the {p} x {n} grid")
        return values

    def check(self, p, n):
        super().check(p, n)
        self.grid_values(p, n)

    def column_eigenvalues(self, p, n):
        return self.grid_values(p, n) ** 2


class LinearProcessSpec(ModelSpecBase):
    """
    p independent linear processes X_{l,t} = sum_j psi_j(l) Z_{l,t-j}.

    Coefficients come from exactly one of: a table psi (rows are lags
    j = 0..J, columns are coordinates), a row psi_row shared by every
    coordinate, or the AR(1) shorthand ar1_phi with psi_j = phi^j.
    """
    family: Literal['linear_process'] = 'linear_process'
    psi: Optional[List[List[float]]] = None
    psi_row: Optional[List[float]] = None
    ar1_phi: Optional[float] = None
    burn_in: Optional[int] = Field(default=None, ge=0)

    @model_validator(mode='after')
    def one_coefficient_source(self):
        given = [name for name in ('psi', 'psi_row', 'ar1_phi') if getattr(self, name) is not None]
        if len(given) != 1:
            raise ValueError(f"give exactly one of psi, psi_row, ar1_phi (got {given or 'none'})")
        return self

    def lags(self) -> int:
        if self.burn_in is not None:
            return self.burn_in
        if self.psi is not None:
            return len(self.psi) - 1
        if self.psi_row is not None:
            return len(self.psi_row) - 1
        return SIMULATION_DEFAULTS['linear_burn_in']

    def coefficient_table(self, p: int) -> np.ndarray:
        """(J+1) x p table of psi_j(l), padded with zeros or truncated at lag J"""
        J = self.lags()
        if self.ar1_phi is not None:
            table = np.repeat((self.ar1_phi ** np.arange(J + 1))[:, None], p, axis=1)
        else:
            raw = np.asarray(self.psi if self.psi is not None else [[v] for v in self.psi_row], dtype=float)
            if raw.ndim != 2 or raw.shape[0] < 1:
                raise DimensionMismatch("psi must be a non-empty table of lags by coordinates")
            if raw.shape[1] == 1:
                raw = np.repeat(raw, p, axis=1)
            if raw.shape[1] != p:
                raise DimensionMismatch(f"psi has {raw.shape[1]} coordinate columns, expected {p}")
            table = np.zeros((J + 1, p))
            rows = min(J + 1, raw.shape[0])
            table[:rows] = raw[:rows]
        if not np.all(np.isfinite(table)):
            raise SpecInvariantViolated("psi coefficients must be finite")
        return table

    def tail_bound(self) -> float:
        """Sum of |psi_j| beyond the truncation lag"""
        if self.ar1_phi is not None:
            phi = abs(self.ar1_phi)
            return phi ** (self.lags() + 1) / (1.0 - phi)
        return 0.0

    def check(self, p, n):
        super().check(p, n)
        if self.ar1_phi is not None and abs(self.ar1_phi) >= 1:
            raise NotStationary(f"AR(1) coefficient {self.ar1_phi} is not summable")
        self.coefficient_table(p)

    def column_eigenvalues(self, p, n):
        variances = np.sum(self.coefficient_table(p) ** 2, axis=0)
        return np.repeat(variances[:, None], n, axis=1)


class DiffusionRCVSpec(ModelSpecBase):
    """Realized covariance of a diffusion with volatility gamma(s, r) observed at times tau"""
    family: Literal['diffusion_rcv'] = 'diffusion_rcv'
    gamma: str
    times: Optional[List[float]] = None
    drift_bound: float = Field(default=0.0, ge=0.0)

    @field_validator('gamma')
    @classmethod
    def validate_gamma(cls, value: str) -> str:
        return _parse_profile(value)

    def expression(self) -> Expression:
        return Expression(self.gamma)

    def partition(self, n: int) -> np.ndarray:
        if self.times is None:
            return np.linspace(0.0, 1.0, n + 1)
        return validate_partition(self.times, n)

    def check(self, p, n):
        super().check(p, n)
        rcv_weights(self.expression(), self.partition(n), p, n)

    def column_eigenvalues(self, p, n):
        return rcv_weights(self.expression(), self.partition(n), p, n)


class MatrixARSpec(ModelSpecBase):
    """Matrix AR(1) X_t = A X_{t-1} B' + Z_t with diagonal A and B"""
    family: Literal['matrix_ar'] = 'matrix_ar'
    a_eigs: EigenList
    b_diag: EigenList
    t: int = Field(default=1, ge=1)
    burn_in: int = Field(default=SIMULATION_DEFAULTS['matrix_ar_burn_in'], ge=0)

    def coefficients(self, m: int, n: int):
        return eigen_values(self.a_eigs, m, 'a_eigs'), eigen_values(self.b_diag, n, 'b_diag')

    def check(self, p, n):
        super().check(p, n)
        a, b = self.coefficients(p, n)
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise SpecInvariantViolated("AR coefficients must be finite")
        rate = float(np.max(np.abs(a)) * np.max(np.abs(b)))
        if rate >= 1:
            raise NotStationary(f"max|a| * max|b| = {rate:.4f} must be below 1")

    def column_eigenvalues(self, p, n, t: Optional[int] = None):
        a, b = self.coefficients(p, n)
        rho = np.outer(a ** 2, b ** 2)
        steps = self.burn_in + (self.t if t is None else t)
        return (1.0 - rho ** steps) / (1.0 - rho)


class FiniteMixtureSpec(ModelSpecBase):
    """
    Columns drawn from a finite mixture mu_I + Sigma_I^(1/2) z with P(I = i) = eta_i.

    Component eigenvalue lists share the common eigenbasis and are listed in
    ascending order.
    """
    family: Literal['finite_mixture'] = 'finite_mixture'
    eta: List[float] = Field(min_length=1)
    component_eigs: List[EigenList] = Field(min_length=1)
    means: Optional[List[List[float]]] = None

    def components(self, p: int) -> np.ndarray:
        return np.array([eigen_values(eigs, p, f'component_eigs[{i}]')
                         for i, eigs in enumerate(self.component_eigs)])

    def mean_vectors(self, p: int) -> np.ndarray:
        if self.means is None:
            return np.zeros((len(self.eta), p))
        means = np.asarray(self.means, dtype=float)
        if means.shape != (len(self.eta), p):
            raise DimensionMismatch(f"means must be {len(self.eta)} vectors of length {p}")
        if not np.all(np.isfinite(means)):
            raise SpecInvariantViolated("means must be finite")
        return means

    def check(self, p, n):
        super().check(p, n)
        eta = np.asarray(self.eta, dtype=float)
        if len(self.component_eigs) != len(eta):
            raise SpecInvariantViolated(f"{len(eta)} mixture weights but {len(self.component_eigs)} components")
        if np.any(eta < 0) or not np.isfinite(eta.sum()) or abs(eta.sum() - 1.0) > TOLERANCES['weight_input']:
            raise SpecInvariantViolated("eta must be a probability vector")
        components = self.components(p)
        _require_nonnegative(components, 'component_eigs')
        if np.any(np.diff(components, axis=1) < 0):
            raise SpecInvariantViolated("component eigenvalues must be listed in ascending order")
        self.mean_vectors(p)

    def column_eigenvalues(self, p, n):
        expected = np.asarray(self.eta, dtype=float) @ self.components(p)
        return np.repeat(expected[:, None], n, axis=1)


ModelSpec = Annotated[
    Union[
        IidCovarianceSpec, SeparableSpec, VarianceProfileSpec, LinearProcessSpec,
        DiffusionRCVSpec, MatrixARSpec, FiniteMixtureSpec
    ],
    Field(discriminator='family')
]

MODEL_CLASSES = [
    IidCovarianceSpec, SeparableSpec, VarianceProfileSpec, LinearProcessSpec,
    DiffusionRCVSpec, MatrixARSpec, FiniteMixtureSpec
]

_MODEL_ADAPTER = TypeAdapter(ModelSpec)


def describe_validation_error(error: ValidationError) -> str:
    """One line per problem, each naming the offending key path"""
    lines = []
    for item in error.errors():
        location = '.'.join(str(part) for part in item['loc']) or '<root>'
        lines.append(f"{location}: {item['msg']}")
    return '; '.join(lines)


def parse_model(data: Dict[str, Any]):
    """Validate a model block into one of the seven ModelSpec variants"""
    try:
        return _MODEL_ADAPTER.validate_python(data)
    except ValidationError as exc:
        raise ConfigError(f"invalid model block: {describe_validation_error(exc)}") from exc


def catalog() -> List[Dict[str, Any]]:
    """Static catalog of the families with their required and optional parameters"""
    entries = []
    for model in MODEL_CLASSES:
        fields = {name: info for name, info in model.model_fields.items() if name != 'family'}
        entries.append({
            'family': model.model_fields['family'].default,
            'model': model.__name__,
            'description': (model.__doc__ or '').strip().splitlines()[0],
            'required': [name for name, info in fields.items() if info.is_required()],
            'optional': [name for name, info in fields.items() if not info.is_required()]
        })
    return entries


def rcv_weights(gamma: Expression, times: np.ndarray, p: int, n: int,
                nodes: int = SIMULATION_DEFAULTS['simpson_nodes']) -> np.ndarray:
    """
    Integrated volatility weights w[l, i] = n * int_{tau_{i-1}}^{tau_i} gamma(l/p, t)^2 dt.

    Composite Simpson quadrature with a fixed number of nodes per interval.
    """
    durations = np.diff(times)
    fractions = np.linspace(0.0, 1.0, nodes)
    t_nodes = times[:-1, None] + durations[:, None] * fractions[None, :]
    s = np.arange(1, p + 1) / p

    values = np.asarray(gamma(s[:, None, None], t_nodes[None, :, :]), dtype=float) ** 2
    if not np.all(np.isfinite(values)):
        raise NonFiniteProfile(f"volatility {gamma.text!r} is not finite on the observation grid")
    spacing = durations / (nodes - 1)
    return n * integrate.simpson(values, dx=1.0, axis=-1) * spacing[None, :]


def validate_partition(times, n: int) -> np.ndarray:
    """Observation times tau_0..tau_n: nondecreasing, from 0 to 1"""
    times = np.asarray(times, dtype=float).reshape(-1)
    tolerance = TOLERANCES['partition']
    if len(times) != n + 1:
        raise BadPartition(f"{len(times)} observation times for n={n} increments, expected {n + 1}")
    if not np.all(np.isfinite(times)) or abs(times[0]) > tolerance or abs(times[-1] - 1.0) > tolerance:
        raise BadPartition("observation times must start at 0 and end at 1")
    if np.any(np.diff(times) < 0):
        raise BadPartition("observation times must be nondecreasing")
    return times


def column_covariance_eigenvalues(spec: ModelSpecBase, p: int, n: int) -> np.ndarray:
    """
    Closed-form p x n table lambda[l, i]: eigenvalue l of the covariance of column i.

    The mean of the table is the expected normalized trace (1/p) tr S_n.
    """
    spec.check(p, n)
    return np.asarray(spec.column_eigenvalues(p, n), dtype=float)
