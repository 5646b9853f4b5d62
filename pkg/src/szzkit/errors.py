"""Exception hierarchy shared across the package."""


class SZZError(Exception):
    """Base class for all errors raised by szzkit."""


class RepoError(SZZError):
    """Problems reading the repository (maps to CLI exit code 2)."""


class NotARepository(RepoError):
    pass


class UnknownRef(RepoError):
    pass


class AmbiguousPrefix(RepoError):
    pass


class BinaryFile(RepoError):
    pass


class FileAbsent(RepoError):
    pass


class LineOutOfRange(RepoError):
    pass


class MalformedDiff(SZZError):
    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class DataError(SZZError):
    """Bad dataset or configuration input (exit code 2)."""


class MisalignedDataset(DataError):
    pass


class MissingRepository(DataError):
    pass


class ProviderError(SZZError):
    """LLM provider failed after retries (exit code 3)."""


class LlmUnavailable(ProviderError):
    """The provider kept failing at the transport level after all retries."""


class CassetteMiss(ProviderError):
    pass


class ResponderUnset(ProviderError):
    pass


class LlmOutputError(SZZError):
    """An LLM answer could not be parsed into the expected structure."""
