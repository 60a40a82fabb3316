"""Exception hierarchy shared by the library and the command line."""


class PmcsError(Exception):
    """Base class for all errors raised by prefmcs."""


class IllFormedKbError(PmcsError, ValueError):
    """A knowledge base mentions an atom outside its context's signature."""


class ModelError(PmcsError, ValueError):
    """A system violates a structural invariant (dangling reference, duplicate id, ...)."""


class AlignmentError(PmcsError, ValueError):
    """A belief state does not line up with the contexts of a system."""


class UnknownRuleError(PmcsError, KeyError):
    def __init__(self, ids):
        self.ids = sorted(ids)
        super().__init__(f"unknown bridge rule id(s): {', '.join(self.ids)}")

    def __str__(self):
        return self.args[0]


class CapacityError(PmcsError, RuntimeError):
    """An enumeration would exceed the configured caps."""


class CompatibilityError(PmcsError, ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"bridge rules incompatible with the stratification: {lines}")


class DomainError(PmcsError, ValueError):
    """An analysis is undefined for the given system (e.g. c-variants of a consistent system)."""
