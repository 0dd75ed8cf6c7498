# errors.py - Exception hierarchy
"""
Semantic exceptions raised across the engine.

Every exception carries the command line exit code it maps to, so the CLI can
translate failures without inspecting messages:

    2  configuration could not be parsed or validated
    3  a model, measure or link violates its invariants
    4  the solver could not produce a usable result
"""


class SpectralLawError(Exception):
    """Base class for all engine errors"""
    exit_code = 1


# Configuration

class ConfigError(SpectralLawError, ValueError):
    """Configuration document is malformed or fails schema validation"""
    exit_code = 2


class ExpressionError(ConfigError):
    """Profile expression uses syntax outside the supported language"""


class EmptySeeds(ConfigError):
    """A batch was requested with no seeds"""


# Measures

class MeasureError(SpectralLawError, ValueError):
    exit_code = 3


class EmptyMeasure(MeasureError):
    pass


class NegativeWeight(MeasureError):
    pass


class WeightSumMismatch(MeasureError):
    pass


class OutOfRange(MeasureError):
    pass


class NonFiniteAtom(MeasureError):
    pass


class NonFiniteIntegrand(SpectralLawError, FloatingPointError):
    exit_code = 3


# Spectra

class SpectraError(SpectralLawError):
    exit_code = 3


class NotSymmetric(SpectraError, ValueError):
    pass


class LowerHalfPlane(SpectraError, ValueError):
    pass


class BadRange(SpectraError, ValueError):
    pass


class NoConvergence(SpectraError, ArithmeticError):
    exit_code = 4


# Models and links

class ModelError(SpectralLawError, ValueError):
    exit_code = 3


class DimensionMismatch(ModelError):
    pass


class SpecInvariantViolated(ModelError):
    pass


class NonFiniteProfile(ModelError):
    pass


class BadPartition(ModelError):
    pass


class NotStationary(ModelError):
    pass


class BadLink(ModelError):
    """Link function is negative or non-finite on an atom pair"""


# Solver

class SolverError(SpectralLawError):
    exit_code = 4


class NothingConverged(SolverError):
    pass


class MassOutOfBand(SolverError):
    """Density plus atom mass falls outside the accepted band"""


class GridMismatch(SolverError, ValueError):
    pass
