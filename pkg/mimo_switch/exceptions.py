from pathlib import Path


class SwitchSimError(Exception):
    pass

class ConfigurationError(SwitchSimError):
    pass

class DimensionError(SwitchSimError):
    pass

class NumericalError(SwitchSimError):
    pass

class InvariantError(SwitchSimError):
    pass

class OutputError(SwitchSimError):
    def __init__(self, path: Path | str, reason: str):
        self.path = path
        self.reason = reason
        super().__init__(f"Cannot write output '{path}': {reason}")
