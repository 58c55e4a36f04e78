"""Exception types shared across the package."""


class DomainError(ValueError):
    """A numerical input lies outside the domain of a formula (e.g. v >= c)."""


class EmptyTallyError(DomainError):
    """An estimate was requested from a tally with no post-selected events."""


class DegenerateGeometryError(DomainError):
    """The wind has no usable projection onto the lab horizontal plane."""


class ConfigError(ValueError):
    """A campaign configuration failed validation.

    ``field`` is the dotted path of the offending entry, e.g. ``"wind.speed"``.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
