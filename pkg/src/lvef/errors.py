"""Exception hierarchy.

Everything raised on bad input derives from :class:`LvefError`, so callers
(the CLI in particular) can separate data problems from programming errors.
"""


class LvefError(Exception):
    """Base class for all data/contract errors raised by this package."""


# ingestion
class MissingColumn(LvefError):
    def __init__(self, name):
        super().__init__(f"missing required column {name!r}")
        self.name = name


class MalformedRow(LvefError):
    def __init__(self, line, reason):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class EmptyGroup(LvefError):
    pass


class MissingFrame(LvefError):
    def __init__(self, index):
        super().__init__(f"missing mask frame {index}")
        self.index = index


class DimensionMismatch(LvefError):
    pass


class NotPgm(LvefError):
    pass


# geometry
class DegenerateTrace(LvefError):
    pass


class OutOfBounds(LvefError):
    pass


# cycles / refinement / pipeline
class NoCycles(LvefError):
    pass


class InvalidCycle(LvefError):
    pass


class ZeroLength(LvefError):
    pass


class NonPositiveEdv(LvefError):
    pass


# length model
class InsufficientData(LvefError):
    pass


class NonFiniteInput(LvefError):
    pass


class SingularDesign(LvefError):
    pass


class UntrainedModel(LvefError):
    pass


class VersionMismatch(LvefError):
    pass


class CorruptModel(LvefError):
    pass


# statistics
class FlatTarget(LvefError):
    pass


class ZeroVariance(LvefError):
    pass


class TooFewSamples(LvefError):
    pass


class DegenerateDifferences(LvefError):
    pass


class SingleClass(LvefError):
    pass


class SingleClassResample(LvefError):
    pass


class LengthMismatch(LvefError):
    pass
