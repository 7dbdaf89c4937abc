"""Error kinds raised by the numerical layers.

Library code raises these; scans, certificates and the CLI catch them, log
them and either record the failure or map it to an exit code.
"""


class WavemapError(Exception):
    """Base class for every failure raised by wavemap."""


class DomainError(WavemapError, ValueError):
    """An argument lies outside the domain of the operation."""


class SingularPointError(DomainError):
    """Evaluation requested at a singular point of the pencil (rho = 0 or 1)."""


class SeriesRadiusError(DomainError):
    """Series evaluated outside its validity radius."""


class LogBranchError(WavemapError):
    """Integer indicial gap: the analytic branch at rho = 1 is ambiguous."""


class RecurrenceError(WavemapError):
    """The Frobenius recurrence hit a vanishing indicial factor."""


class QuadratureError(WavemapError):
    """Adaptive quadrature did not reach the requested tolerance."""


class IntegrationError(WavemapError):
    """The ODE integrator failed (typically step underflow)."""


class RootCountError(WavemapError):
    """A function expected to change sign exactly once did not."""


class ArgumentJumpError(WavemapError):
    """Phase increment along a contour stayed above pi/2 after refinement."""


class ContractionNotFound(WavemapError):
    """No tested radius made the fixed-point map a contraction."""


class PicardDivergenceError(WavemapError):
    """Successive Picard differences grew for too many iterations."""


class ConfigError(WavemapError):
    """Invalid run configuration; carries every problem found."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
