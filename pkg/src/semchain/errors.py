"""Exception hierarchy shared across the package."""


class SemchainError(Exception):
    """Base class for all package errors."""


# ingest
class EmptyPayload(SemchainError):
    pass


class InvalidChunkSize(SemchainError):
    pass


class DecodeError(SemchainError):
    pass


class DecompressError(SemchainError):
    pass


# chainsim
class OversizedChunk(SemchainError):
    pass


class DuplicateAsset(SemchainError):
    pass


class MissingTx(SemchainError):
    pass


class ZeroDivisor(SemchainError):
    pass


class ZeroSize(SemchainError):
    pass


# semantics
class DegenerateEmbedding(SemchainError):
    pass


class NoSeeds(SemchainError):
    pass


class EmptyList(SemchainError):
    pass


class BackendError(SemchainError):
    """Wraps a backend failure; carries the seed that was being processed."""

    def __init__(self, message, seed=None):
        super().__init__(message)
        self.seed = seed


# backends (mock + remote)
class EmptyPrompt(SemchainError):
    pass


class RemoteTimeout(SemchainError):
    pass


class ProtocolError(SemchainError):
    pass


class ServerError(SemchainError):
    pass


# cli
class MissingPair(SemchainError):
    pass


class SchemaMismatch(SemchainError):
    pass
