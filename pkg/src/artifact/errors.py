"""Exception types shared across the package.

The CLI maps these onto exit codes: ``DomainError`` -> 1,
``VerificationError`` -> 2.
"""

from __future__ import annotations


class ArtifactError(Exception):
    """Base class for all package errors."""


class DomainError(ArtifactError, ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class ResourceCapError(ArtifactError):
    """A configured size cap was exceeded.

    ``largest_n`` reports the largest argument that would have been served.
    """

    def __init__(self, message: str, largest_n: int):
        super().__init__(message)
        self.largest_n = largest_n


class VerificationError(ArtifactError):
    """An internal cross-check between independent routes failed."""


class SnapError(VerificationError):
    """A numerically evaluated multiplier is not close to a 48th root of unity."""


class CacheError(ArtifactError):
    """A cache file is malformed or its checksum does not match."""
