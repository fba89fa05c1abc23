"""Exception taxonomy shared across the package.

Exit-code mapping used by the CLI: domain errors -> 1, usage errors -> 2,
resource-cap errors -> 3.
"""


class FactoriaError(Exception):
    """Base class for all library errors."""


class DomainError(FactoriaError):
    """An argument lies outside the mathematical domain of the operation."""


class NoRootError(DomainError):
    """The equation P(s) = target has no root on the admissible interval.

    Carries the supremum of P found while searching, when known.
    """

    def __init__(self, message, supremum=None):
        super().__init__(message)
        self.supremum = supremum


class PrecisionUnattainableError(FactoriaError):
    """The adaptive evaluation scheme cannot certify the requested digits."""


class ResourceCapError(FactoriaError):
    """A configured memory or output-size cap would be exceeded."""


class CountOverflowError(ResourceCapError):
    """Exact counts exceed the configured integer width policy."""


class UsageError(FactoriaError):
    """Malformed CLI arguments or spec strings."""
