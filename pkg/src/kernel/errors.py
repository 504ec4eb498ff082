from typing import Optional


class KernelError(Exception):
    """Base class for every error raised by the kernel.

    `code` is the stable diagnostic code, `rule` the name of the construction or
    equivalence rule that failed (empty when not rule specific).
    """

    code = "E-KERNEL"

    def __init__(self, message: str, rule: str = "", detail: Optional[dict] = None):
        super().__init__(message)
        self.message = message
        self.rule = rule
        self.detail = detail or {}

    def to_record(self) -> dict:
        return {
            "code": self.code,
            "rule": self.rule,
            "message": self.message,
            **({"detail": self.detail} if self.detail else {}),
        }

    def __str__(self) -> str:
        prefix = f"[{self.code}]"
        if self.rule:
            prefix += f" {self.rule}:"
        return f"{prefix} {self.message}"


class StepError(KernelError):
    code = "E-STEP"


class SideConditionError(KernelError):
    code = "E-SIDE"


class MissingWitnessError(KernelError):
    code = "E-WITNESS"


class ShapeError(KernelError):
    code = "E-SHAPE"


class EnumerationLimitError(KernelError):
    code = "E-LIMIT"


class ModelError(KernelError):
    code = "E-MODEL"


class SoundnessError(KernelError):
    code = "E-SOUND"


class UnsupportedConstructionError(KernelError):
    code = "E-UNSUPPORTED"


class ParseError(KernelError):
    code = "E-PARSE"

    def __init__(self, message: str, line: int = 0, column: int = 0, rule: str = ""):
        super().__init__(message, rule=rule, detail={"line": line, "column": column})
        self.line = line
        self.column = column


DIAGNOSTIC_CODES = {
    cls.code: cls
    for cls in (
        KernelError, StepError, SideConditionError, MissingWitnessError, ShapeError,
        EnumerationLimitError, ModelError, SoundnessError,
        UnsupportedConstructionError, ParseError,
    )
}
