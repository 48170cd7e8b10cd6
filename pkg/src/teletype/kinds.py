"""Closed vocabularies shared by every stage of the pipeline."""

from __future__ import annotations

import enum


class Mode(enum.Enum):
    NOCHECK = "nocheck"
    NONSTRICT = "nonstrict"
    STRICT = "strict"

    @property
    def rank(self) -> int:
        return _MODE_RANK[self]

    def __lt__(self, other):
        if not isinstance(other, Mode):
            return NotImplemented
        return self.rank < other.rank

    @classmethod
    def ordered(cls) -> list["Mode"]:
        return [cls.NOCHECK, cls.NONSTRICT, cls.STRICT]


_MODE_RANK = {Mode.NOCHECK: 0, Mode.NONSTRICT: 1, Mode.STRICT: 2}


class Reason(enum.Enum):
    KEYSTROKE = "keystroke"
    MODULE_SWITCH = "module_switch"


class ErrorKind(enum.Enum):
    """Error labels an analysis may report.

    The set is closed at 35 tags so a record never carries more than 70
    edit-range counters. Tags the analyzer cannot name are held by
    ``Reserved01`` .. ``Reserved07``.
    """

    TypeMismatch = "TypeMismatch"
    SyntaxError = "SyntaxError"
    UnknownProperty = "UnknownProperty"
    OnlyTablesCanHaveMethods = "OnlyTablesCanHaveMethods"
    CannotExtendTable = "CannotExtendTable"
    TypesAreUnrelated = "TypesAreUnrelated"
    CountMismatch = "CountMismatch"
    IncorrectGenericParamCount = "IncorrectGenericParamCount"
    CodeTooComplex = "CodeTooComplex"
    GenericError = "GenericError"
    ExtraInformation = "ExtraInformation"
    CannotCallNonFunction = "CannotCallNonFunction"
    CannotInferBinaryOperation = "CannotInferBinaryOperation"
    DuplicateTypeDefinition = "DuplicateTypeDefinition"
    FunctionDoesNotTakeSelf = "FunctionDoesNotTakeSelf"
    FunctionExitsWithoutReturning = "FunctionExitsWithoutReturning"
    IllegalRequire = "IllegalRequire"
    MissingProperties = "MissingProperties"
    ModuleHasCyclicDependency = "ModuleHasCyclicDependency"
    NotATable = "NotATable"
    OccursCheckFailed = "OccursCheckFailed"
    OptionalValueAccess = "OptionalValueAccess"
    UnknownPropButFoundLikeProp = "UnknownPropButFoundLikeProp"
    UnknownRequire = "UnknownRequire"
    UnknownSymbol = "UnknownSymbol"
    MissingUnionProperty = "MissingUnionProperty"
    NormalizationTooComplex = "NormalizationTooComplex"
    UnificationTooComplex = "UnificationTooComplex"
    Reserved01 = "Reserved01"
    Reserved02 = "Reserved02"
    Reserved03 = "Reserved03"
    Reserved04 = "Reserved04"
    Reserved05 = "Reserved05"
    Reserved06 = "Reserved06"
    Reserved07 = "Reserved07"

    @classmethod
    def lookup(cls, label: str) -> "ErrorKind":
        """Resolve a tag, accepting the alternate spellings found in published tables."""
        label = _ALIASES.get(label, label)
        return cls(label)

    @property
    def too_complex(self) -> bool:
        return self in TOO_COMPLEX_KINDS


_ALIASES = {
    "UnknownPropButGotLikeProp": "UnknownPropButFoundLikeProp",
    "GenericExtraInformation": "ExtraInformation",
    "IncorrectGenericParameterCount": "IncorrectGenericParamCount",
    "FunctionExitsWithoutReturn": "FunctionExitsWithoutReturning",
}

TOO_COMPLEX_KINDS = frozenset(
    {ErrorKind.CodeTooComplex, ErrorKind.NormalizationTooComplex, ErrorKind.UnificationTooComplex}
)

KIND_COUNT = len(ErrorKind)
