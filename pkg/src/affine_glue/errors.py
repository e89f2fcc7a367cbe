"""Exception hierarchy shared by every layer of the package."""


class AffineGlueError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(AffineGlueError, ValueError):
    pass


class ParameterOutOfRange(AffineGlueError, ValueError):
    pass


class NotOnPath(AffineGlueError, ValueError):
    pass


class NoCrossing(AffineGlueError, ValueError):
    """The first-crossing precondition failed; upstream normalization is broken."""


class EmptySingularSet(AffineGlueError, ValueError):
    pass


class UnknownPoint(AffineGlueError, KeyError):
    pass


class IndexOutOfRange(AffineGlueError, ValueError):
    pass


class MalformedPath(AffineGlueError, ValueError):
    pass


class ValidationError(AffineGlueError):
    def __init__(self, report):
        self.report = report
        first = report.violations[0] if report.violations else None
        super().__init__(f"invalid space: {first.message}" if first else "invalid space")


class CriterionRejected(AffineGlueError):
    def __init__(self, report):
        self.report = report
        where = ", ".join(f"{pid}: {msg}" for pid, msg in report.witnesses[:3])
        super().__init__(f"affineness criterion rejected ({where})")


class MappingDomainMismatch(AffineGlueError, ValueError):
    pass


class ArcMeetsCoreInteriorly(AffineGlueError, ValueError):
    pass


class MalformedArc(AffineGlueError, ValueError):
    pass


class ScheduleTooCoarse(AffineGlueError):
    pass


class ParseError(AffineGlueError, ValueError):
    def __init__(self, message, path=""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
