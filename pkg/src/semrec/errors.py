"""Exception hierarchy shared across the engine."""

from __future__ import annotations


class SemrecError(Exception):
    """Base class for every error raised by semrec."""


class ParseError(SemrecError):
    """A line of an input file could not be parsed."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = ""
        if source:
            where += f"{source}:"
        if line is not None:
            where += f"line {line}: "
        elif where:
            where += " "
        super().__init__(f"{where}{message}")


class ValidationError(ParseError):
    """A record parsed fine but violates a store invariant (scale, attribute range)."""


class ConfigError(SemrecError):
    """Invalid or inconsistent configuration."""


class LookupFailure(SemrecError, KeyError):
    """Unknown user or item."""

    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else ""


class UnannotatedItemError(LookupFailure):
    """Item has no concept annotation in the catalog."""

    def __init__(self, item: str):
        self.item = item
        super().__init__(f"item {item!r} has no concept annotations")


class GraphError(SemrecError):
    """Graph statistic undefined for the given graph."""


class EmptyNeighborhoodError(SemrecError):
    """No user has rated the product, so no CF neighborhood exists."""


class NoOverlapError(SemrecError):
    """Predictions and held-out actuals share no (user, item) pair."""
