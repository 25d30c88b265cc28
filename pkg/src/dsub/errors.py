class InputError(ValueError):
    """Malformed user input: bad syntax, unbound variables, ill-formed contexts."""


class ParseError(InputError):
    def __init__(self, message: str, pos: int, text: str = ""):
        self.pos = pos
        self.text = text
        super().__init__(f"{message} at position {pos}")


class UnboundVariableError(InputError):
    pass


class LabelError(InputError):
    pass


class MappingError(InputError):
    """The F<: -> D<: mapping was applied outside its domain."""
