#!/usr/bin/env python3
"""
Custom Exceptions for the Ratio CUSUM Toolkit

This module defines the exceptions raised by the statistics, simulation,
generation and command-line layers.

Key Features:
- Hierarchical exception structure rooted at RatioCusumError
- Parameter problems (ValidationError) separated from data problems (DataError)
- The command line maps the two branches to exit codes 1 and 2
"""

# ============================================
# BASE EXCEPTIONS
# ============================================

class RatioCusumError(Exception):
    """
    Base exception for the toolkit

    This is the parent class for all toolkit exceptions,
    allowing for easy catch-all error handling when needed.
    """
    pass


class ValidationError(RatioCusumError):
    """
    Exception for invalid parameters

    Raised when caller-supplied parameters (trim fraction, model
    parameters, statistic labels, settings) violate their constraints.
    """
    pass


class DataError(RatioCusumError):
    """
    Exception for unusable data or artifacts

    Raised when a series, a persisted table or a computation on the
    data cannot produce a result.
    """
    pass


# ============================================
# PARAMETER ERRORS
# ============================================

class InvalidTrimFraction(ValidationError):
    """Trim fraction outside the open interval (0, 1/2)"""
    pass


class InvalidSpec(ValidationError):
    """
    Generator or change specification violates its invariants

    Covers non-stationary AR(1)/GARCH(1,1) parameters, linear-process
    coefficients summing to zero and change points outside 1..n-1.
    """
    pass


class InvalidKind(ValidationError):
    """Unknown statistic family, functional or label"""
    pass


class ConfigError(ValidationError):
    """Environment setting that cannot be parsed"""
    pass


class UsageError(ValidationError):
    """Command-line usage error"""
    pass


# ============================================
# DATA ERRORS
# ============================================

class EmptyRange(DataError):
    """The trimmed range of candidate change points is empty"""
    pass


class AllDegenerate(DataError):
    """
    Every candidate change point gives 0/0

    Happens for constant series (all centered sums vanish).
    """
    pass


class ZeroVariance(DataError):
    """Long-run variance estimate is zero"""
    pass


class ParseError(DataError):
    """
    Input file line that is not a number

    Attributes:
        line: 1-based line number of the offending line
    """

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class TooShort(DataError):
    """Series with fewer than two observations"""
    pass


class VersionMismatch(DataError):
    """Persisted table written with an unsupported format version"""
    pass


class CorruptTable(DataError):
    """Persisted table that fails its invariants after loading"""
    pass


class KindMismatch(DataError):
    """Critical values built for a different statistic or trim fraction"""
    pass


class TableNotFound(DataError):
    """No table with the requested provenance in the repository"""
    pass
