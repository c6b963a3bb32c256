"""Error types shared across modules."""


class TruncationError(ValueError):
    """A series or functional is not known far enough for the requested result."""


class CutoffError(ValueError):
    """A dual functional was evaluated outside its exact range.

    ``needed`` is the energy that would have been required, when known.
    """

    def __init__(self, message: str, needed: int | None = None):
        super().__init__(message)
        self.needed = needed
