"""Exception types shared across the package."""


class CyberAdequacyError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(CyberAdequacyError, ValueError):
    """An input violates one of the documented invariants."""


class DomainError(ValidationError):
    """A numeric parameter lies outside its allowed range."""


class ParseError(CyberAdequacyError, ValueError):
    """A text input could not be parsed.

    :param message: what went wrong
    :param line: 1-based line number, when known
    :param field: name of the offending field, when known
    """

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


# attack graph construction / queries
class DuplicateNode(ValidationError):
    pass


class DuplicateEdge(ValidationError):
    pass


class DanglingEdge(ValidationError):
    pass


class CycleDetected(ValidationError):
    pass


class EmptyPath(ValidationError):
    pass


class NotARoot(ValidationError):
    pass


class MissingEdge(ValidationError):
    pass


class UnknownTarget(ValidationError):
    pass


class UnreachableTargetWarning(UserWarning):
    """No root-to-target path exists; the disruption probability is 0."""


# load data
class WrongLength(ValidationError):
    def __init__(self, found, expected=8760):
        self.found = found
        self.expected = expected
        super().__init__(f"expected {expected} hourly values, found {found}")


class NegativeLoad(ValidationError):
    def __init__(self, hour, value=None):
        self.hour = hour
        self.value = value
        super().__init__(f"negative load {value!r} at hour {hour}")


class FleetTooLarge(ValidationError):
    pass


class MissingArtifact(CyberAdequacyError, LookupError):
    """A report bundle lacks the artifact a figure needs."""


class ScenarioError(ValidationError):
    """A scenario file failed to parse or validate.

    The message always names the file, and the section/field when known.
    """

    def __init__(self, path, message, section=None, field=None):
        self.path = str(path)
        self.section = section
        self.field = field
        loc = [self.path]
        if section:
            loc.append(f"[{section}]")
        if field:
            loc.append(field)
        super().__init__(f"{' '.join(loc)}: {message}")
