"""Exception hierarchy. Everything user-facing derives from TrainkitError."""


class TrainkitError(Exception):
    pass


class ConfigError(TrainkitError):
    """Bad run configuration: unusable values, unknown keys, missing paths."""


class DataError(TrainkitError):
    """Unreadable or malformed image/mask data."""


class PairingError(TrainkitError):
    """Image and mask directories do not describe the same set of stems."""


class CheckpointError(TrainkitError):
    """Missing, corrupt, or incompatible model checkpoint."""
