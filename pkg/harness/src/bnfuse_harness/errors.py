class HarnessError(Exception):
    """Base class for harness errors."""


class ConfigError(HarnessError):
    """Invalid or incomplete harness configuration."""


class ModelResolutionFailure(HarnessError):
    """A configured model could not be loaded from the hub."""


class LabelVocabularyMismatch(HarnessError):
    """A model or dataset emitted a label outside its declared vocabulary."""
