"""Exception hierarchy; ``exit_code`` is what the CLI returns for each class."""


class PolyblockError(Exception):
    exit_code = 1


class ConfigurationError(PolyblockError, ValueError):
    exit_code = 2


class InvalidOrderError(ConfigurationError):
    pass


class UnsupportedOrderingError(ConfigurationError):
    pass


class StructuralError(ConfigurationError):
    pass


class NumericalConstructionError(PolyblockError):
    exit_code = 3


class PoisednessError(NumericalConstructionError):
    def __init__(self, message, output_index=None, conditions=None):
        if output_index is not None:
            message = f"output {output_index}: {message}"
        super().__init__(message)
        self.output_index = output_index
        self.conditions = conditions


class SingularFitError(PoisednessError):
    pass


class ConsistencyError(NumericalConstructionError):
    pass


class AmplificationPoleError(NumericalConstructionError):
    pass


class RootFinderError(NumericalConstructionError):
    def __init__(self, message, iterations):
        super().__init__(f"{message} after {iterations} iterations")
        self.iterations = iterations


class IntegrationError(PolyblockError):
    exit_code = 4


class BlowUpError(IntegrationError):
    pass


class NewtonError(IntegrationError):
    def __init__(self, message, residuals=()):
        super().__init__(message)
        self.residuals = list(residuals)


class AnalyticityError(IntegrationError):
    pass
