class ToyError(ValueError):
    """Toolkit error with a stable "<module>.<what>" code."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code

    def __str__(self) -> str:
        return f"[{self.code}] {super().__str__()}"
