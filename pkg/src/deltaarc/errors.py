from __future__ import annotations


class DeltaArcError(Exception):
    """Base class for all errors raised by this package."""


class UnknownComponentType(DeltaArcError, LookupError):
    def __init__(self, name: str):
        super().__init__(f"unknown component type {name!r}")
        self.name = name


class AmbiguousComponentType(UnknownComponentType):
    def __init__(self, name: str, candidates):
        DeltaArcError.__init__(self, f"ambiguous component type {name!r}: {', '.join(sorted(candidates))}")
        self.name = name
        self.candidates = sorted(candidates)


class UnknownFeature(DeltaArcError, LookupError):
    def __init__(self, name: str):
        super().__init__(f"unknown feature {name!r}")
        self.name = name


class InvalidConfiguration(DeltaArcError, ValueError):
    pass


class EnumerationCapExceeded(DeltaArcError):
    pass


class FactorialCapExceeded(DeltaArcError):
    pass


class CyclicDeltaOrder(DeltaArcError):
    def __init__(self, cycle: list[str]):
        super().__init__("cyclic delta order: " + " -> ".join(cycle))
        self.cycle = cycle


class ParseError(DeltaArcError):
    """Raised by the parsers; ``diagnostics`` holds every problem found."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(d.format() for d in self.diagnostics))
