"""Error type shared by all simulator modules."""


class SimError(Exception):
    """Contract violation carrying a stable machine-readable code.

    `code` is an identifier such as NON_POWER_OF_TWO or UNCACHEABLE_REF so
    callers (and tests) can dispatch without parsing the message text.
    """

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
