"""Exception hierarchy.

The CLI maps these onto exit codes: input/output problems exit 1,
numerical failures exit 2, configuration problems exit 3.
"""


class LoewnerFitError(Exception):
    """Base class for all library errors."""


class DataFormatError(LoewnerFitError, ValueError):
    """A sample or model file could not be parsed."""


class ConfigError(LoewnerFitError, ValueError):
    """Invalid options or incompatible arguments."""


class PartitionError(ConfigError):
    """The sample set cannot be split as requested."""


class NumericalError(LoewnerFitError, ArithmeticError):
    """Base class for failures of the numerical algorithms."""


class AssemblyError(NumericalError):
    """A left and a right interpolation point coincide."""


class SingularPencilError(NumericalError):
    """The Loewner pencil is singular; use ``reduce`` instead."""


class DegenerateDataError(NumericalError):
    """All singular values are below the absolute floor."""


class EvaluationError(NumericalError):
    """A model was evaluated at (or numerically on) one of its poles."""

    def __init__(self, msg, s=None):
        super().__init__(msg)
        self.s = s


class IllPosedDirectionsError(NumericalError):
    """Tangential direction matrices are rank deficient."""


class ImproperModelError(NumericalError):
    """Barycentric weights sum to zero; growth at infinity is super-linear."""
