"""
Errors Module - Domain exceptions shared by every service

Each exception carries the process exit code the CLI reports for it, so the
command layer can turn any service failure into a stable exit status.
"""

EXIT_OK = 0
EXIT_EMPTY = 2
EXIT_EXPECTATION_DIFF = 3
EXIT_CODE_CONSTRUCTION = 4
EXIT_USAGE = 64
EXIT_DOMAIN = 65
EXIT_INPUT = 66


class LatticeToolError(Exception):
    """Base class for all domain errors raised by the services."""

    exit_code = EXIT_DOMAIN


class UsageFailure(LatticeToolError):
    exit_code = EXIT_USAGE


class InputFileError(LatticeToolError):
    exit_code = EXIT_INPUT


class DegenerateLattice(LatticeToolError):
    """Basis or coefficient matrix is singular."""


class UnsupportedDimension(LatticeToolError):
    """Dimension outside the tabulated Hermite constants (1..8)."""


class NotASublattice(LatticeToolError):
    pass


class NotInLattice(LatticeToolError):
    pass


class NotOrthogonal(LatticeToolError):
    pass


class NotWellRounded(LatticeToolError):
    pass


class HermiteViolation(LatticeToolError):
    """A well-rounded lattice whose lambda1 falls outside the Hermite interval."""


class RadiusTooSmall(LatticeToolError):
    pass


class EnumerationTooLarge(LatticeToolError):
    """A ball enumeration would visit more points than the configured cap."""


class BoundsExceeded(LatticeToolError):
    pass


class ZeroGenerator(LatticeToolError):
    pass


class GridMismatch(LatticeToolError):
    pass


class EmptyCoset(LatticeToolError):
    """A coset label has no representative in the finite codebook."""

    exit_code = EXIT_CODE_CONSTRUCTION

    def __init__(self, label, message=None):
        self.label = tuple(int(r) for r in label)
        super().__init__(message or f"coset {self.label} has no representative in the codebook")
