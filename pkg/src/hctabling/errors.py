"""Exceptions raised while loading or running programs."""


class EngineError(Exception):
    pass


class UndefinedPredicate(EngineError):
    def __init__(self, name, arity):
        super().__init__(f"undefined predicate {name}/{arity}")
        self.name = name
        self.arity = arity


class InstantiationError(EngineError):
    pass


class ArithmeticTypeError(EngineError):
    pass
