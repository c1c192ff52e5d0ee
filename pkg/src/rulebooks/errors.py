"""Exception hierarchy shared by every module."""


class RulebookError(ValueError):
    """Base class for all errors raised by this package."""


class UnknownIdError(RulebookError, KeyError):
    def __init__(self, ident, where="preorder"):
        self.ident = ident
        super().__init__(f"unknown id {ident!r} in {where}")

    def __str__(self):
        return self.args[0]


class ProfileError(RulebookError):
    """A violation profile does not cover the rulebook's rules."""


class EvaluationError(RulebookError):
    """A rule's violation function failed on a realization."""

    def __init__(self, message, rule=None, realization=None):
        super().__init__(message)
        self.rule = rule
        self.realization = realization


class NotAChainError(RulebookError):
    pass


class OperationError(RulebookError):
    """A rulebook manipulation was rejected (precondition not met)."""


class TransportError(RulebookError):
    """Rule ids of two rulebooks cannot be matched for certification."""


class GeometryError(RulebookError):
    pass
