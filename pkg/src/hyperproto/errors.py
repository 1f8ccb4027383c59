"""Exception hierarchy shared by the library and the command line."""


class HyperprotoError(Exception):
    """Base class for all errors raised by hyperproto."""


class DomainError(HyperprotoError, ValueError):
    """An argument lies outside the domain of the operation."""


class RunError(HyperprotoError, RuntimeError):
    """An iterative procedure produced a non-finite value."""

    def __init__(self, message, epoch=None, batch=None):
        super().__init__(message)
        self.epoch = epoch
        self.batch = batch


class LoadError(HyperprotoError, ValueError):
    """A file exists but its contents are invalid."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ParseError(LoadError):
    """A cell could not be parsed as a number."""


class RaggedRowError(LoadError):
    """A row has a different number of fields than the header."""


class MissingLabelError(LoadError):
    """A dataset file has neither a ``class`` nor a ``target`` column."""


class HeaderMismatchError(LoadError):
    """Declared counts disagree with the file contents."""


class DuplicateNameError(LoadError):
    """A class name occurs more than once."""


class ZeroVectorError(LoadError):
    """A vector that must be normalizable has zero norm."""


class NormError(LoadError):
    """A prototype row is not unit norm."""
