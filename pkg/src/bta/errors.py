"""Exception hierarchy shared across the toolkit."""


class BtaError(Exception):
    """Base class for every error raised by this package."""


class InvalidDigest(BtaError, ValueError):
    pass


# merkle
class PushOnClosedTree(BtaError):
    pass


class CloseEmptyTree(BtaError):
    pass


class CloseOnClosedTree(BtaError):
    pass


# proof codec
class MalformedProof(BtaError, ValueError):
    pass


class UnsupportedVersion(MalformedProof):
    pass


class ProofMismatch(BtaError):
    pass


class UnsupportedAnchorType(BtaError):
    pass


class UnknownChain(BtaError, KeyError):
    pass


# payloads
class EmptyHostname(BtaError, ValueError):
    pass


class PayloadTooLarge(BtaError, ValueError):
    pass


class NotOpReturn(BtaError, ValueError):
    pass


class UnrecognizedLayout(BtaError, ValueError):
    pass


# simulated chains
class InsufficientFee(BtaError):
    pass


class ClockWentBackwards(BtaError):
    pass


class UnknownTransaction(BtaError, KeyError):
    pass


# verification
class IndexOutOfRange(BtaError, ValueError):
    pass


class ChainMismatch(BtaError):
    pass


# engine / cluster
class EmptyFrame(BtaError):
    pass


class NoRoute(BtaError):
    pass


class AllNodesDead(BtaError):
    pass


class ScenarioError(BtaError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
