"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: DataError -> 3, ModelError -> 4,
anything unexpected -> 5. Usage errors exit 2 via argparse.
"""


class FusionError(Exception):
    """Base class for all errors raised by this package."""


class DataError(FusionError):
    """Bad or inconsistent input data (records, labels, tables)."""


class ModelError(FusionError):
    """Invalid network structure, CPTs, or query."""


# network construction / lookup

class DuplicateNode(ModelError):
    pass


class DuplicateEdge(ModelError):
    pass


class CycleDetected(ModelError):
    pass


class CptMismatch(ModelError):
    pass


class UnknownNode(ModelError):
    pass


class UnknownState(ModelError):
    pass


class IncompleteParentConfig(ModelError):
    pass


class IncompleteAssignment(ModelError):
    pass


# parameter learning

class UnknownStateValue(DataError):
    pass


class EmptyTrainingTable(DataError):
    pass


class StructureMismatch(ModelError):
    pass


# inference

class InconsistentEvidence(ModelError):
    pass


class QueryBoundInEvidence(ModelError):
    pass


# influence analysis

class NoSuchArc(ModelError):
    pass


# data pipeline / evaluation

class EmptyInput(DataError):
    pass


class LengthMismatch(DataError):
    pass


class UnknownSourceLabel(DataError):
    pass


class MissingFallbackPrediction(DataError):
    pass


class MissingProbabilities(DataError):
    pass


class DegenerateMarginals(DataError):
    pass


class UnknownCorpusState(DataError):
    pass


class EmptyModelList(ModelError):
    pass
