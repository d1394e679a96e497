class SeverityLabError(Exception):
    pass


class InvalidParameters(SeverityLabError, ValueError):
    pass


class DomainError(SeverityLabError, ValueError):
    pass


class NoEndemicEquilibrium(SeverityLabError):
    pass


class DegenerateTheta(SeverityLabError):
    pass


class UnsupportedRegime(SeverityLabError):
    pass


class NotInAttractingRegion(SeverityLabError):
    pass


class NoEpidemicOrbit(SeverityLabError):
    pass


class NotApplicable(SeverityLabError):
    pass


class ScenarioError(SeverityLabError):
    pass


class NumericalError(SeverityLabError):
    pass


class StiffnessSuspected(NumericalError):
    pass


class ExitNotDetected(NumericalError):
    pass


class RootNotBracketed(NumericalError):
    pass


class TimescaleSeparationWarning(UserWarning):
    pass
