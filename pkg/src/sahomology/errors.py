class IllConditioned(Exception):
    """The condition estimate exceeded the cap (the input is ill-posed or nearly so)."""

    def __init__(self, cap: float, lower_bound: float, level: int):
        self.cap = cap
        self.lower_bound = lower_bound
        self.level = level
        super().__init__(f"condition number exceeds cap {cap:g} (observed {lower_bound:g} at level {level})")


class ResourceExceeded(Exception):
    """A grid or complex would exceed the configured budget."""

    def __init__(self, message: str, required_level: int | None = None, required_points: int | None = None):
        self.required_level = required_level
        self.required_points = required_points
        super().__init__(message)
