"""Exception hierarchy shared by every module."""


class ContextuaError(Exception):
    """Base class for all library errors."""


class InternalError(ContextuaError):
    """A postcondition that should be impossible to violate was violated."""


# semirings and distributions
class NotNormalized(ContextuaError, ValueError):
    pass


class EmptySupport(ContextuaError, ValueError):
    pass


class ZeroTotal(ContextuaError, ValueError):
    pass


class NotNormalizable(ContextuaError, TypeError):
    pass


class UndefinedKernel(ContextuaError, KeyError):
    pass


# trees, posets, presheaves
class InvalidTree(ContextuaError, ValueError):
    pass


class NotComparable(ContextuaError, ValueError):
    pass


class NotAFibration(ContextuaError, ValueError):
    pass


class NotAnEmbedding(ContextuaError, ValueError):
    pass


class InvalidProjection(ContextuaError, ValueError):
    pass


# weighted relations
class Mismatch(ContextuaError, ValueError):
    pass


class InvalidRelation(ContextuaError, ValueError):
    pass


class NotSynchronized(ContextuaError, ValueError):
    pass


class MissingWeights(ContextuaError, ValueError):
    pass


# scenarios
class SchemaError(ContextuaError, ValueError):
    pass


class NotAFactorization(ContextuaError, ValueError):
    pass


class SignallingInput(ContextuaError, ValueError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NotASection(ContextuaError, ValueError):
    pass


class NotAWitness(ContextuaError, ValueError):
    pass


class NegativeWeight(InternalError):
    pass


# logic
class FormulaSyntaxError(ContextuaError, ValueError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownLabel(ContextuaError, KeyError):
    pass


class UnknownLetter(ContextuaError, KeyError):
    pass


class NotLegal(ContextuaError, ValueError):
    pass


class HypothesisViolated(ContextuaError, ValueError):
    pass


def ensure(condition, message, exc=InternalError):
    """Raise ``exc(message)`` unless ``condition`` holds (never stripped by -O)."""
    if not condition:
        raise exc(message)
