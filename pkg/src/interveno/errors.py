"""Exception types shared across the engine."""


class IntervenoError(Exception):
    """Base class for all engine errors."""


# ingest
class MalformedCsv(IntervenoError):
    pass


class BadDate(IntervenoError):
    pass


class NonNumericCell(IntervenoError):
    pass


class RegionMismatch(IntervenoError):
    pass


class AllMissingColumn(IntervenoError):
    pass


# features
class UnknownColumn(IntervenoError):
    pass


class TooShortSeries(IntervenoError):
    pass


class InvalidLagSpec(IntervenoError):
    pass


# models
class SingularSystem(IntervenoError):
    pass


class SchemaMismatch(IntervenoError):
    pass


# backtest
class ZeroVariance(IntervenoError):
    pass


class FutureArtifact(IntervenoError):
    pass


# simulate
class InsufficientHistory(IntervenoError):
    pass


class ZeroDenominator(IntervenoError):
    pass


class EmptySearchSpace(IntervenoError):
    pass


class InvalidScenario(IntervenoError):
    pass


# explain
class UnknownDate(IntervenoError):
    pass


class EmptyExplanation(IntervenoError):
    pass


# service
class UnknownRegion(IntervenoError):
    pass


class TrainingInProgress(IntervenoError):
    pass


# persistence
class VersionError(IntervenoError):
    pass


class ParseError(IntervenoError):
    pass


class IoError(IntervenoError):
    pass


class ConfigError(IntervenoError):
    pass
