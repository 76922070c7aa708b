"""
Error hierarchy for the FDF toolkit
Every failure raised by the library derives from FdfError so callers
(and the CLI exit-code mapping) can catch one base class
"""


class FdfError(Exception):
    """Base class for all toolkit errors"""
    pass


class DimensionError(FdfError):
    """Array shapes or grids do not match"""
    pass


class InsufficientDataError(FdfError):
    """Too few curves (or observations) for the requested operation"""
    pass


class DomainError(FdfError):
    """Argument outside the function domain, e.g. s outside [0, 1]"""
    pass


class ParameterError(FdfError):
    """Invalid tuning parameter"""
    pass


class LagRangeError(ParameterError):
    """Lag |h| >= N"""
    pass


class BandwidthError(ParameterError):
    """Bandwidth b >= N"""
    pass


class ConditioningError(FdfError):
    """Rank-deficient or ill-conditioned linear algebra"""
    pass


class UnderdeterminedFitError(ConditioningError):
    """Fewer observation points than basis functions"""
    pass


class IllConditionedInverseError(ConditioningError):
    """Truncated inverse requested on a (near) zero eigenvalue"""
    pass


class NumericError(FdfError):
    """Non-finite values in an intermediate result"""
    pass


class DegenerateCovarianceError(FdfError):
    """Covariance operator has no eigenvalue above the zero threshold"""
    pass


class InputError(FdfError):
    """Problems with user-supplied files (CLI exit code 2)"""
    pass


class ParseError(InputError):
    """Malformed input file"""

    def __init__(self, message: str, row: int = None, column: int = None):
        location = ""
        if row is not None:
            location = f" (row {row}" + (f", column {column})" if column is not None else ")")
        super().__init__(f"{message}{location}")
        self.row = row
        self.column = column


class SchemaError(InputError):
    """Input file parses but has the wrong columns/header"""
    pass
