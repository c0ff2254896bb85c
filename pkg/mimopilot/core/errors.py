class MimoPilotError(ValueError):
    def __init__(self, message):
        self.message = message
        super().__init__(self.message)


class ScenarioError(MimoPilotError):
    pass


class AssignmentError(MimoPilotError):
    pass


class ConfigError(MimoPilotError):
    pass


class ClusteringError(MimoPilotError):
    pass


class InsufficientSamplesError(MimoPilotError):
    pass


class InfeasibleSearchError(MimoPilotError):
    def __init__(self, message, space_size=None, limit=None):
        self.space_size = space_size
        self.limit = limit
        super().__init__(message)
