"""Exception types shared across the package."""


class RingDefinitionError(ValueError):
    """A ring or guard specification is geometrically invalid."""


class DeploymentRangeError(ValueError):
    """A deployment angle or target radius lies outside the achievable band.

    ``band`` carries the achievable (low, high) interval so callers can
    report it to the user or over the wire.
    """

    def __init__(self, message: str, band: tuple[float, float] | None = None):
        super().__init__(message)
        self.band = band


class ScenarioValidationError(ValueError):
    """A scenario document failed validation. ``problems`` lists each offending field."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid scenario: " + "; ".join(self.problems))
