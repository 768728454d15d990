from __future__ import annotations


class SplError(Exception):
    """Base class for all tool-chain errors (input errors, exit code 2)."""


class FMLSyntaxError(SplError):
    def __init__(self, message: str, line: int = 0, col: int = 0, file: str = ""):
        self.line, self.col, self.file = line, col, file
        where = f"{file}:" if file else ""
        super().__init__(f"{where}{line}:{col}: {message}")


class DuplicateNameError(SplError):
    pass


class ManifestError(SplError):
    pass


class FeatureModelError(SplError):
    pass


class CompositionError(SplError):
    pass


class WeaveError(SplError):
    pass


class EncodingError(SplError):
    pass


class ExecutionError(SplError):
    """A run-time fault in the checked program (null dereference, bad operand)."""


class ReplayDivergence(SplError):
    pass
