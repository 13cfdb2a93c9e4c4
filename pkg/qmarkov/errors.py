"""Exception hierarchy for the qmarkov toolkit.

Library code raises these; only the CLI turns them into exit codes.
"""


class QMarkovError(ValueError):
    """Base class for every toolkit error."""


class SupportCollisionError(QMarkovError):
    """Two states that should live on disjoint sites share a site."""


class DomainError(QMarkovError):
    """Site sets outside a state's support, or overlapping where they must be disjoint."""


class InvalidStateError(QMarkovError):
    """A matrix violates the density-operator tolerances beyond repair."""


class ExtensionDomainError(QMarkovError):
    """A recovery map was applied to a state it cannot act on."""


class MalformedStringError(QMarkovError):
    """A marginal string is not well-formed, or cannot be parsed."""


class MissingMarginalError(QMarkovError):
    """A symbol references a cluster that has no stored or derivable marginal."""


class LayoutError(QMarkovError):
    """Operation does not support the geometry layout (or input is too large)."""


class FileFormatError(QMarkovError):
    """An on-disk marginal-set or state file could not be parsed."""
