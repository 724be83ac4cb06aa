"""Exception hierarchy shared by all modules."""


class MillerLatentError(Exception):
    """Base class for every error raised by this package."""


class ZeroIndex(MillerLatentError, ValueError):
    pass


class AllParallel(MillerLatentError, ValueError):
    pass


class NonRationalIntercepts(MillerLatentError, ValueError):
    pass


class NotationError(MillerLatentError, ValueError):
    """Raised when an index string such as ``"(1-10)"`` cannot be parsed."""


class EmptySlice(MillerLatentError, ValueError):
    pass


class NotCoplanar(MillerLatentError, ValueError):
    pass


class DegeneratePolygon(MillerLatentError, ValueError):
    pass


class DegenerateCloud(MillerLatentError, ValueError):
    pass


class MeshFormatError(MillerLatentError, ValueError):
    pass


class IoFailure(MillerLatentError, OSError):
    pass


class IncompatibleSampleTask(MillerLatentError, ValueError):
    pass


class EndpointUnreachable(MillerLatentError, ConnectionError):
    pass


class CredentialMissing(MillerLatentError, KeyError):
    pass


class EmptyResults(MillerLatentError, ValueError):
    pass
