"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid or inconsistent scheme, experiment or alphabet configuration."""


class DecodeError(ValueError):
    """A vector is not a member of the signal set it is being decoded against."""


class EnumerationLimitError(RuntimeError):
    """Signal-set enumeration would exceed the configured cap."""

    def __init__(self, size: int, cap: int):
        self.size = size
        self.cap = cap
        super().__init__(
            f"signal set has {size} members, above the enumeration cap of {cap}; "
            "use a sparse-recovery detector (alg1-*) instead"
        )
