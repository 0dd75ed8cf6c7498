# experiment.py - Experiment configuration documents
"""
Pydantic schema of an experiment configuration.

Unknown keys are rejected everywhere, so a misspelled parameter fails loudly
instead of silently falling back to a default.
"""

from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .config import DEFAULT_SEED, DISCRETIZATION, HISTOGRAM_DEFAULTS, SOLVER_DEFAULTS, ZGRID_DEFAULTS
from .errors import ConfigError
from .kernel import SolverConfig, ZGrid
from .models import MatrixARSpec, ModelSpec, describe_validation_error

MAX_SEED = 2 ** 64


class Dimensions(BaseModel):
    """
    Matrix shape. Rows are p (or m for the matrix AR family); columns are n
    (or T for the linear process). t lists matrix AR observation times.
    """
    model_config = ConfigDict(extra='forbid', frozen=True)

    p: Optional[int] = Field(default=None, ge=1)
    m: Optional[int] = Field(default=None, ge=1)
    n: Optional[int] = Field(default=None, ge=1)
    T: Optional[int] = Field(default=None, ge=1)
    t: Optional[List[int]] = None

    @model_validator(mode='after')
    def one_name_per_axis(self):
        if (self.p is None) == (self.m is None):
            raise ValueError("give exactly one of p, m")
        if (self.n is None) == (self.T is None):
            raise ValueError("give exactly one of n, T")
        if self.t is not None and (not self.t or min(self.t) < 1):
            raise ValueError("observation times t must be a non-empty list of integers >= 1")
        return self

    @property
    def shape(self) -> Tuple[int, int]:
        rows = self.p if self.p is not None else self.m
        columns = self.n if self.n is not None else self.T
        return rows, columns


class ZGridSettings(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)

    x_min: float = ZGRID_DEFAULTS['x_min']
    x_max: float = ZGRID_DEFAULTS['x_max']
    count: int = Field(default=ZGRID_DEFAULTS['count'], ge=2)
    eta: float = Field(default=ZGRID_DEFAULTS['eta'], gt=0)

    @model_validator(mode='after')
    def ordered_range(self):
        if not self.x_min < self.x_max:
            raise ValueError(f"x_min must be below x_max, got [{self.x_min}, {self.x_max}]")
        return self

    def grid(self, eta: Optional[float] = None) -> ZGrid:
        return ZGrid.linspace(self.x_min, self.x_max, self.count, self.eta if eta is None else eta)


class SolverSettings(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)

    tol: float = Field(default=SOLVER_DEFAULTS['tol'], gt=0)
    max_iter: int = Field(default=SOLVER_DEFAULTS['max_iter'], ge=1)
    damping: float = Field(default=SOLVER_DEFAULTS['damping'], gt=0, le=1)
    warm_start: bool = SOLVER_DEFAULTS['warm_start']
    chunk_size: Optional[int] = Field(default=SOLVER_DEFAULTS['chunk_size'], ge=1)
    quad_points: int = Field(default=DISCRETIZATION['quad_points'], ge=2)

    def solver_config(self, tol: Optional[float] = None, workers: int = 1) -> SolverConfig:
        return SolverConfig(
            tol=self.tol if tol is None else tol,
            max_iter=self.max_iter,
            damping=self.damping,
            warm_start=self.warm_start,
            chunk_size=self.chunk_size,
            workers=workers
        )


class ExperimentConfig(BaseModel):
    """A complete experiment: model, dimensions, evaluation grid, solver and seeds"""
    model_config = ConfigDict(extra='forbid', frozen=True)

    name: str = ''
    description: str = ''
    model: ModelSpec
    dims: Dimensions
    zgrid: ZGridSettings = ZGridSettings()
    solver: SolverSettings = SolverSettings()
    seeds: List[int] = Field(default_factory=lambda: [DEFAULT_SEED], min_length=1)
    bins: int = Field(default=HISTOGRAM_DEFAULTS['bins'], ge=1)
    outputs: str = 'output'

    @field_validator('seeds')
    @classmethod
    def unsigned_seeds(cls, seeds: List[int]) -> List[int]:
        for seed in seeds:
            if not 0 <= seed < MAX_SEED:
                raise ValueError(f"seed {seed} is not an unsigned 64-bit integer")
        return seeds

    @property
    def observation_times(self) -> Optional[List[int]]:
        """Matrix AR observation times requested in dims.t"""
        if isinstance(self.model, MatrixARSpec) and self.dims.t:
            return sorted(set(self.dims.t))
        return None


def parse_config(data) -> ExperimentConfig:
    """Validate a configuration document, naming the offending key path on failure"""
    if not isinstance(data, dict):
        raise ConfigError("configuration document must be a JSON object")
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"invalid configuration: {describe_validation_error(exc)}") from exc
