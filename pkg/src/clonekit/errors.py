"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes, so library code should raise the most
specific class that applies rather than bare ValueError/KeyError.
"""


class ClonekitError(Exception):
    """Base class for all errors raised by this package."""


class ArgumentError(ClonekitError, ValueError):
    """A caller passed structurally invalid input (bad arity, domain
    mismatch, out-of-range index, ...)."""


class LookupKeyError(ClonekitError, KeyError):
    """An unknown catalog key, condition name, or relation name."""

    def __str__(self) -> str:  # KeyError quotes its payload; keep it readable
        return self.args[0] if self.args else ""


class InputFormatError(ClonekitError, ValueError):
    """A file or text payload failed to parse; the message carries the
    position (JSON path / line info) of the offending entry."""


class CapabilityError(ClonekitError):
    """The request is beyond a documented bound (domain size, arity,
    search budget) rather than malformed."""


class VerificationError(ClonekitError):
    """A certificate, fixture, or re-check failed verification."""


class OutOfScopeError(ClonekitError):
    """The input falls outside the supported fragment (e.g. the classifier's
    quasi-Mal'cev precondition failed).  Mapped to its own exit code."""
