"""Exception types shared across the package.

Every validation problem raises a subclass of :class:`ValidationError` so the
command line layer can map it to a single exit code.  Failure to converge is
deliberately not an exception: rank routines return the last iterate with a
``converged`` flag instead.
"""


class MultirankError(Exception):
    """Base class for all package errors."""


class ValidationError(MultirankError):
    """Invalid input data, parameters, or configuration."""


# --- network construction ---------------------------------------------------

class DuplicateNodeIdError(ValidationError):
    """A node id is reused across layers or across node roles."""


class EdgeEndpointMissingError(ValidationError):
    """An edge references a specific node that was never declared."""


class NonPositiveWeightError(ValidationError):
    """Edge weights must be strictly positive."""


class NegativeStickinessError(ValidationError):
    """The inter-layer coupling weight must be non-negative."""


class EmptyNetworkError(ValidationError):
    """An operation that needs at least one node got an empty network."""


# --- rank computation -------------------------------------------------------

class EmptySourceSetError(ValidationError):
    """A personalized run needs at least one source node."""


class SourceNotCommonNodeError(ValidationError):
    """Influence sources must be common (shared) nodes of the network."""


class NotStochasticError(ValidationError):
    """A matrix passed as a transition matrix has columns not summing to 1."""


# --- tabular ingestion ------------------------------------------------------

class MissingColumnError(ValidationError):
    """A required column is absent from a delimited input."""


class BadDateError(ValidationError):
    """A date cell is malformed or dates are mutually inconsistent."""


class MalformedRowError(ValidationError):
    """A row has the wrong shape or an unparseable non-date cell."""


class AreaDistrictConflictError(ValidationError):
    """The same area is claimed by two different districts."""


# --- feature extraction -----------------------------------------------------

class BorrowerNotInTailError(ValidationError):
    """Feature rows exist only for borrowers originating in the scoring tail."""


class MissingScenarioRunError(ValidationError):
    """Score features need rank results for every requested scenario."""


class DegenerateLabelsError(ValidationError):
    """AUC is undefined when only one label class is present."""


# --- pipeline ---------------------------------------------------------------

class SpanTooShortError(ValidationError):
    """The records cover fewer months than one window."""


class InvalidConfigError(ValidationError):
    """A configuration value is out of range or unknown."""
