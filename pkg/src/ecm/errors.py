"""Exception types shared across the toolkit."""


class EcmError(Exception):
    """Base class for all toolkit errors."""


class ParseError(EcmError):
    """Malformed manifest syntax."""

    def __init__(self, message, line=None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


class SchemaError(EcmError):
    """A required manifest section or field is missing or ill-typed."""

    def __init__(self, path, message=""):
        self.path = path
        super().__init__(f"{path}: {message}" if message else path)


class PredicateError(EcmError):
    """Unparseable predicate text."""


class UnitError(EcmError):
    """Unknown or incompatible unit symbol."""


class ChainTooShort(EcmError):
    """Composition chains need at least two modules."""


class ModuleMismatch(EcmError):
    """Delta or upgrade requested between different module ids."""


class VersionOrderError(EcmError):
    """New version does not sort after the old one."""


class ChannelSkipError(EcmError):
    """Promotion attempted across non-adjacent release channels."""


class DeprecationWindowError(EcmError):
    """Removal attempted before the deprecation notice window elapsed."""


class DuplicateRelease(EcmError):
    """A (module_id, version) entry already exists in the registry."""


class IncompleteForChannel(EcmError):
    """Contract completeness insufficient for the requested channel."""


class UnknownFamily(EcmError):
    """Registry query referenced an unindexed family."""


class UnknownModule(EcmError):
    """Registry query referenced an unknown module id."""


class GateFailure(EcmError):
    """Promotion blocked by one or more release gates."""

    def __init__(self, failed_gates):
        self.failed_gates = list(failed_gates)
        super().__init__("failed gates: " + ", ".join(self.failed_gates))


class FixtureCorrupt(EcmError):
    """Benchmark fixture failed an integrity check."""


class EmptyFamily(EcmError):
    """A chain template slot has no candidate modules."""
