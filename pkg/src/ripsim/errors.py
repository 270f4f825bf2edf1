"""Exception hierarchy."""


class RipsimError(Exception):
    """Base class for all library errors."""


class ModelError(RipsimError):
    """Invalid spin-system or rate specification."""


class DimensionError(ModelError):
    """Hilbert-space dimension exceeds the configured cap."""


class StepSizeError(RipsimError):
    """Integration step violates the stability guard or jump-probability bound."""


class ConfigError(RipsimError):
    """Scenario configuration is malformed.

    ``path`` locates the offending key, e.g. ``model.nuclei[0].A_mT``.
    """

    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}" if path else message)
