from enum import Enum, IntEnum, unique, auto


@unique
class Method(Enum):
    """Probe distributions. Values are the CLI spellings."""
    HUTCHINSON = "hutchinson"
    GAUSSIAN = "gaussian"
    UNIT_WITH_REPLACEMENT = "unit"
    UNIT_WITHOUT_REPLACEMENT = "unit-noreplace"

    @property
    def is_unit(self) -> bool:
        return self in (Method.UNIT_WITH_REPLACEMENT, Method.UNIT_WITHOUT_REPLACEMENT)

    @property
    def label(self) -> str:
        return _LABELS[self]

    @classmethod
    def parse(cls, text: str) -> "Method":
        text = text.strip().lower()
        for method in cls:
            if text in (method.value, method.name.lower()):
                return method
        raise ValueError(f"Unknown method '{text}'. Expected one of: "
                         f"{', '.join(m.value for m in cls)}")


_LABELS = {
    Method.HUTCHINSON: "Hutchinson",
    Method.GAUSSIAN: "Gaussian",
    Method.UNIT_WITH_REPLACEMENT: "With Rep.",
    Method.UNIT_WITHOUT_REPLACEMENT: "Without Rep.",
}


@unique
class OperatorKind(Enum):
    DENSE = auto()
    DIAGONAL = auto()
    SPARSE_COO = auto()
    RANK_ONE_DECAY = auto()
    GRAM_PRODUCT = auto()
    SCALED_PROJECTION = auto()
    COMPOSITE = auto()


@unique
class ExitCode(IntEnum):
    OK = 0
    CENSORED = 1
    USAGE = 2
    NUMERIC = 3
