"""Exception hierarchy shared across the package."""


class MumfordError(Exception):
    """Base class for all package errors."""


# ---- field arithmetic ----

class ParamsMismatch(MumfordError):
    """Operands live over different field parameters."""


class DivisionByZeroToPrecision(MumfordError):
    """Divisor is indistinguishable from zero at its stored precision."""


class PrecisionError(MumfordError):
    """A quantity is needed beyond the precision the inputs can support."""


class ExtensionRequired(MumfordError):
    """The requested operation has no answer over the current field.

    Carries the minimal extra ramification e2 and residue degree f2 so the
    caller can extend and retry.
    """

    def __init__(self, e2: int, f2: int, message: str = ""):
        self.e2 = e2
        self.f2 = f2
        super().__init__(message or f"needs extension e'={e2}, f'={f2}")


# ---- tree ----

class InsufficientPrecision(MumfordError):
    """A vertex center is not known modulo pi^level."""


class CoincidentEnds(MumfordError):
    """Distinct boundary points were required."""


class NotParabolic(MumfordError):
    """Matrix is not parabolic of order p."""


class MirrorsIntersect(MumfordError):
    """The fixed-vertex trees of the two generators share a vertex."""


class DuplicatePoints(MumfordError):
    """A point list that must be pairwise distinct is not."""


# ---- groups ----

class SearchRadiusExceeded(MumfordError):
    """Folding detection hit the configured search radius."""


class PreconditionViolated(MumfordError):
    """An input fails the documented valuation preconditions."""


class AssertionFailed(MumfordError):
    """A checked valuation identity fails; carries a witness."""

    def __init__(self, message: str, witness=None):
        self.witness = witness
        super().__init__(message)


# ---- criterion ----

class GenusTooSmall(MumfordError):
    """(p-1)(r-1) < 2; the curve is rational or elliptic."""


class DuplicateBranchPoints(MumfordError):
    """Branch points must be pairwise distinct."""


class InfinityBranchPoint(MumfordError):
    """Branch points must be finite in the chosen coordinate."""


class BranchPointSentToInfinity(MumfordError):
    """The coordinate change maps some branch point to infinity."""


# ---- covering ----

class CriterionViolated(MumfordError):
    """The strict product-gap criterion fails for some pair; carries it."""

    def __init__(self, pair, message: str = ""):
        self.pair = pair
        super().__init__(message or f"criterion fails at pair {pair}")


class MultipleMinimizers(MumfordError):
    """The distance minimizer among relevant branch points is not unique."""


class RadiusNotInValueGroup(MumfordError):
    """A radius exponent falls outside the working value group."""


class BranchPointInsidePiece(MumfordError):
    """A partial-fraction term has its pole on the piece, so its
    supremum norm is +infinity."""


class NotCovering(MumfordError):
    """The candidate pieces miss a point; carries a witness tuple."""

    def __init__(self, witness, message: str = ""):
        self.witness = witness
        super().__init__(message or f"uncovered valuation profile: {witness}")


# ---- theta ----

class PrecisionExhausted(MumfordError):
    """Working precision ran out during a theta product."""


class PoleAtOrbitPoint(MumfordError):
    """Evaluation point collides with an orbit point of u up to precision."""


class RadiusViolation(MumfordError):
    """Expansion radius is not strictly inside the pole-free disk."""


class NotNormalForm(MumfordError):
    """Group data is not in the rigid normal form this routine expects."""


class NonNegativeEtaValuation(MumfordError):
    """The translation parameter eta must have strictly negative valuation."""


# ---- serialization / CLI ----

class SchemaError(MumfordError):
    """Input JSON does not match the documented schema."""
