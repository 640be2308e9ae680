"""Exception hierarchy shared by every hyrep module."""


class HyrepError(Exception):
    """Base class for all errors raised by hyrep."""


class FormulaError(HyrepError):
    pass


class ParseError(FormulaError):
    def __init__(self, message, position=None, text=None):
        self.position = position
        self.text = text
        if position is not None:
            message = f"{message} at offset {position}"
        super().__init__(message)


class UnboundVariable(FormulaError):
    def __init__(self, var):
        self.var = var
        super().__init__(f"trace variable {var!r} is not bound by the quantifier prefix")


class DuplicateVariable(FormulaError):
    def __init__(self, var):
        self.var = var
        super().__init__(f"trace variable {var!r} is quantified more than once")


class StructureError(HyrepError):
    pass


class MissingInit(StructureError):
    pass


class UnknownState(StructureError):
    def __init__(self, state):
        self.state = state
        super().__init__(f"unknown state {state!r}")


class DeadlockState(StructureError):
    def __init__(self, state):
        self.state = state
        super().__init__(f"state {state!r} has no outgoing transition")


class WouldDeadlock(StructureError):
    def __init__(self, state):
        self.state = state
        super().__init__(f"repair leaves state {state!r} without a successor")


class NotAcyclic(StructureError):
    pass


class EvaluationError(HyrepError):
    pass


class EmptyTraceSet(EvaluationError):
    def __init__(self):
        super().__init__("cannot evaluate a sentence over an empty trace set")


class StrategyMismatch(HyrepError):
    pass


class TooLarge(HyrepError):
    pass


class TooManyVariables(TooLarge):
    pass


class UnsupportedShape(HyrepError):
    pass
