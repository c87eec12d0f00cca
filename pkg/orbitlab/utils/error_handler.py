"""Centralized error handling for orbitlab."""

import logging
import sys
import traceback
from typing import Optional

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ASSERTION = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3

class OrbitLabError(Exception):
    """Base exception for orbitlab errors."""

    exit_code = EXIT_NUMERIC

    def __init__(self, message: str, user_message: Optional[str] = None):
        """
        Initialize error.

        Args:
            message: Technical error message for logging
            user_message: Guidance shown on the command line
        """
        super().__init__(message)
        self.message = message
        self.user_message = user_message or "The computation failed."

class ValidationError(OrbitLabError):
    """Invalid input parameters."""

    exit_code = EXIT_USAGE

    def __init__(self, message: str, user_message: Optional[str] = None):
        super().__init__(
            message,
            user_message or f"Invalid input: {message}"
        )

class ConfigParseError(ValidationError):
    """Unreadable or ill-formed run configuration."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(
            f"{message}{where}",
            f"Could not parse the run configuration{where}: {message}"
        )

class UnknownIdError(ValidationError):
    """Unknown example or sequence identifier."""

    def __init__(self, message: str, user_message: Optional[str] = None):
        super().__init__(
            message,
            user_message or f"{message}. Run `list` to see the accepted identifiers."
        )

class AssertionFailure(OrbitLabError):
    """An embedded reproduction check did not hold."""

    exit_code = EXIT_ASSERTION

    def __init__(self, message: str, user_message: Optional[str] = None):
        super().__init__(
            message,
            user_message or f"Check failed: {message}. The report was still written."
        )

class NumericError(OrbitLabError):
    """Numerical failure in a geometric or dynamical computation."""

    def __init__(self, message: str, user_message: Optional[str] = None):
        super().__init__(
            message,
            user_message or f"Numerical failure: {message}"
        )

class PoleError(NumericError):
    """Evaluation at (or numerically at) a pole of a Möbius map."""

class OutsideDomainError(NumericError):
    """Point outside the domain a quantity is defined on."""

class BoundaryProximityError(OutsideDomainError):
    """Image point fell outside the codomain within tolerance."""

class BranchError(NumericError):
    """Inverse branch evaluation across a slit."""

class ArcConstraintError(ValidationError):
    """Arc parameter outside the admissible range."""

class OrbitOverflowError(NumericError):
    """Interior orbit left the representable range without a log-scale rule."""

class PrecisionExhaustedError(NumericError):
    """Tracked boundary error exceeded the alarm threshold."""

    def __init__(self, message: str, user_message: Optional[str] = None):
        super().__init__(
            message,
            user_message or "Precision exhausted. Raise the precision override or shorten the horizon."
        )

class UnknownBoundaryExtensionError(NumericError):
    """Map has no known continuous boundary action."""

class NonCirclePreservingError(NumericError):
    """Map does not preserve the unit circle."""

class NonConvergenceError(NumericError):
    """Monte Carlo walks failed to terminate within the configured caps."""

class DegenerateFitError(NumericError):
    """Regression input carries no usable signal."""

class DerivativeUnavailableError(NumericError):
    """A step map was supplied without a derivative."""

class DWUndefinedError(NumericError):
    """Interior orbits do not converge to the boundary, so the DW set is undefined."""

class LedgerMissingError(ValidationError):
    """Sequence carries no escape interval ledger."""

class SignLossError(NumericError):
    """Boundary coordinate left the tracked half-line."""

class ExcludedPointError(ValidationError):
    """Boundary point excluded from the requested identity."""

class ErrorHandler:
    """Centralized error handler for command-line entry points."""

    @staticmethod
    def exit_code_for(error: Exception) -> int:
        """Map an exception to a process exit status."""
        if isinstance(error, OrbitLabError):
            return error.exit_code
        return EXIT_NUMERIC

    @staticmethod
    def handle_command_error(command: str, error: Exception) -> int:
        """
        Handle errors raised by a CLI subcommand.

        Args:
            command: Subcommand name
            error: Exception that occurred

        Returns:
            Exit status for the process
        """
        logger.error(f"Command error in {command}: {error}")
        logger.debug(traceback.format_exc())

        if isinstance(error, OrbitLabError):
            user_message = error.user_message
        else:
            user_message = f"An unexpected error occurred: {error}"

        print(f"Error: {user_message}", file=sys.stderr)
        return ErrorHandler.exit_code_for(error)

    @staticmethod
    def log_error(error: Exception, context: str = "") -> None:
        """
        Log error with context.

        Args:
            error: Exception to log
            context: Additional context information
        """
        context_str = f" in {context}" if context else ""
        logger.error(f"Error{context_str}: {error}")
        logger.error(traceback.format_exc())


# Global error handler instance
error_handler = ErrorHandler()
