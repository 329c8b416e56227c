"""Exception hierarchy shared by all clinlab modules."""


class ClinlabError(Exception):
    """Base class for all errors raised by this package."""


# --- tabular data ---------------------------------------------------------

class SchemaError(ClinlabError):
    """Invalid schema definition (duplicate names, bad kind/field combos)."""


class MissingColumn(ClinlabError):
    def __init__(self, column: str):
        super().__init__(f"column {column!r} not found")
        self.column = column


class DuplicateColumn(ClinlabError):
    def __init__(self, column: str):
        super().__init__(f"column {column!r} appears more than once in the header")
        self.column = column


class BadCell(ClinlabError):
    """A CSV cell that cannot be parsed as the declared kind and is not a sentinel."""

    def __init__(self, row: int, column: str, raw: str):
        super().__init__(f"row {row}, column {column!r}: cannot parse {raw!r}")
        self.row = row
        self.column = column
        self.raw = raw


class EmptyFile(ClinlabError):
    pass


class DegenerateBinning(ClinlabError):
    """Quartile binning impossible: too few distinct values or collapsed cut points."""


class IncompleteData(ClinlabError):
    """An operation requiring complete data met missing cells."""


class ConstantColumn(ClinlabError):
    def __init__(self, column: str):
        super().__init__(f"continuous column {column!r} is constant (sd = 0)")
        self.column = column


class SingleCategory(ClinlabError):
    def __init__(self, column: str):
        super().__init__(f"categorical column {column!r} has fewer than 2 observed categories")
        self.column = column


class UnknownCategory(ClinlabError):
    def __init__(self, column: str, value: str, row: int | None = None):
        where = f"row {row}, " if row is not None else ""
        super().__init__(f"{where}column {column!r}: unknown category {value!r}")
        self.column = column
        self.value = value
        self.row = row


class ValueOutOfRange(ClinlabError):
    def __init__(self, column: str, value: float):
        super().__init__(f"column {column!r}: value {value!r} outside declared range")
        self.column = column
        self.value = value


class UncleanedSentinels(ClinlabError):
    """Dataset still carries raw sentinel cells; run clean_sentinels first."""


# --- cohort ----------------------------------------------------------------

class CriterionError(ClinlabError):
    """Criterion references an unknown column or a type-incompatible predicate."""


# --- statistics ------------------------------------------------------------

class EmptySample(ClinlabError):
    pass


class UndersizedSample(ClinlabError):
    pass


class DegenerateVariance(ClinlabError):
    pass


class DegenerateMargin(ClinlabError):
    """Contingency table with a zero row or column margin."""


class UndefinedMetric(ClinlabError):
    """Confusion-matrix ratio with an empty class margin."""


# --- clustering ------------------------------------------------------------

class ClusteringError(ClinlabError):
    pass


# --- bayesian networks -----------------------------------------------------

class CycleError(ClinlabError):
    pass


class SearchConfigError(ClinlabError):
    """Contradictory edge constraints or required edges forming a cycle."""


class TooManyVariables(ClinlabError):
    """Exhaustive DAG enumeration requested on more than 4 variables."""


class ContinuousVariable(ClinlabError):
    def __init__(self, column: str):
        super().__init__(f"column {column!r} is continuous; bin it before network analysis")
        self.column = column


class ZeroProbabilityEvidence(ClinlabError):
    pass


# --- svm ---------------------------------------------------------------

class SingleClassData(ClinlabError):
    pass


class DimensionMismatch(ClinlabError):
    pass


class FoldError(ClinlabError):
    """Stratified folds impossible: a class is smaller than k."""


class GridError(ClinlabError):
    """Every grid cell failed to train."""


# --- synthetic cohort --------------------------------------------------

class GeneratorConfigError(ClinlabError):
    pass


class InfeasibleImplant(ClinlabError):
    """No conditional distribution mixes back to the requested marginal."""


# --- config files --------------------------------------------------------

class ConfigError(ClinlabError):
    """Unreadable or structurally invalid JSON config file."""


# --- model registry / service ------------------------------------------

class MissingVariable(ClinlabError):
    def __init__(self, variable: str):
        super().__init__(f"variable {variable!r} is missing or unknown")
        self.variable = variable


class FingerprintMismatch(ClinlabError):
    """Artifact schema fingerprint does not match its schema section."""


class UnsupportedFormatVersion(ClinlabError):
    def __init__(self, version: str):
        super().__init__(f"unknown artifact format version {version!r}")
        self.version = version


class ArtifactError(ClinlabError):
    pass
