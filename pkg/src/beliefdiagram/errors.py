"""Exception hierarchy shared by every module of the package."""


class BeliefDiagramError(Exception):
    """Base class for domain errors (CLI exit status 1)."""


class CycleError(BeliefDiagramError):
    pass


class UnknownNodeError(BeliefDiagramError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class AlreadyObservedError(BeliefDiagramError):
    pass


class OutcomeOutOfRangeError(BeliefDiagramError):
    pass


class NotAbsorbedError(BeliefDiagramError):
    pass


class NotAnEvidenceArcError(BeliefDiagramError):
    pass


class PathExistsError(BeliefDiagramError):
    """Another directed path joins the two ends of an arc being reversed."""


class InvalidOrderingError(BeliefDiagramError):
    pass


class ImpossibleEvidenceError(BeliefDiagramError):
    """The observed evidence has probability zero."""


class NotSinglyConnectedError(BeliefDiagramError):
    pass


class EvidenceNotPropagatedError(BeliefDiagramError):
    pass


class NotAForestError(BeliefDiagramError):
    pass


class StateSpaceTooLargeError(BeliefDiagramError):
    pass


class EmptyQueueError(BeliefDiagramError):
    pass


class ParseError(BeliefDiagramError):
    """Raised with one or more positioned diagnostics."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))
