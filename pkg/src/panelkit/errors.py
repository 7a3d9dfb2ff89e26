"""Exception hierarchy.

Every error raised by the library derives from :class:`PanelkitError`.  The
two intermediate classes decide the CLI exit code: :class:`DataError` (2)
covers problems with the input data or names, :class:`NumericError` (3)
covers estimation failures.
"""


class PanelkitError(Exception):
    """Base class for all library errors."""

    exit_code = 3


class ConfigError(PanelkitError):
    """Invalid pipeline configuration; ``field`` names the offending key."""

    exit_code = 1

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class DataError(PanelkitError):
    exit_code = 2


class NumericError(PanelkitError):
    exit_code = 3


# -- ingestion / registry -------------------------------------------------

class DuplicateKey(DataError):
    def __init__(self, country, year):
        self.country = country
        self.year = year
        super().__init__(f"duplicate country-year key ({country}, {year})")


class MissingColumn(DataError):
    def __init__(self, column):
        self.column = column
        super().__init__(f"column {column!r} not found in CSV header")


class ParseError(DataError):
    def __init__(self, row, column, value):
        self.row = row
        self.column = column
        self.value = value
        super().__init__(f"row {row}, column {column!r}: cannot parse {value!r} as a number")


class UnknownVariable(DataError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"unknown variable {name!r}")


class NameCollision(DataError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"variable {name!r} is already registered")


class EmptyDesign(DataError):
    pass


class UnknownYear(DataError):
    def __init__(self, year):
        self.year = year
        super().__init__(f"year {year} not present in series")


# -- numerics ---------------------------------------------------------------

class ZeroVariance(NumericError):
    def __init__(self, name=None):
        self.name = name
        where = f" in {name!r}" if name is not None else ""
        super().__init__(f"zero variance{where}")


class TooShort(NumericError):
    pass


class InsufficientRows(NumericError):
    pass


class RankDeficient(NumericError):
    """Design matrix is not of full column rank.

    ``columns`` lists the names involved in at least one exact linear
    dependency.
    """

    def __init__(self, columns):
        self.columns = list(columns)
        super().__init__("design is rank deficient; dependent columns: " + ", ".join(self.columns))


class ConstantWithinGroups(NumericError):
    def __init__(self, columns):
        self.columns = list(columns)
        super().__init__("regressor(s) constant within every group: " + ", ".join(self.columns))


class SingleGroup(NumericError):
    pass


class FoldTooSmall(NumericError):
    pass


class ComponentOutOfRange(NumericError):
    pass
