"""Exception hierarchy shared by every module."""

from __future__ import annotations


class ErgodicError(Exception):
    """Base class for all library errors."""


class AlgebraError(ErgodicError, ValueError):
    """An element, block list or shape does not conform to an algebra."""


class NotHermitianError(AlgebraError):
    pass


class NotProjectionError(AlgebraError):
    pass


class StateError(ErgodicError, ValueError):
    """A functional fails to be a state (not positive or not normalized)."""


class ZeroProbabilityError(StateError):
    """Conditioning on an outcome whose probability vanishes."""


class HypothesisError(ErgodicError):
    """A numerical hypothesis of a theorem does not hold.

    ``code`` is a short machine-readable tag such as ``"not-unital"``,
    ``"not-contractive"`` or ``"ill-defined"``.
    """

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.detail = message


class CertificateError(ErgodicError):
    """A certificate failed its own re-verification."""
