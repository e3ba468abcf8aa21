"""Exception types. ``exit_code`` is what the CLI returns for each family."""


class IGSError(Exception):
    exit_code = 1


class ValidationError(IGSError):
    exit_code = 2


class ResourceLimit(IGSError):
    exit_code = 3


class NumericalError(IGSError):
    exit_code = 4


# graph-core
class SelfLoop(ValidationError):
    def __init__(self, arc):
        self.witness = arc
        super().__init__(f"self-loop at arc {arc}")


class MultiEdge(ValidationError):
    def __init__(self, arc, other):
        self.witness = (arc, other)
        super().__init__(f"arcs {arc} and {other} join the same node pair")


class Disconnected(ValidationError):
    def __init__(self, node):
        self.witness = node
        super().__init__(f"node {node} is not reachable from node 0 in the underlying graph")


class BadColorIndex(ValidationError):
    def __init__(self, arc, num_colors):
        self.witness = arc
        super().__init__(f"arc {arc} has a color outside 1..{num_colors}")


class UnknownNode(ValidationError):
    def __init__(self, node):
        self.witness = node
        super().__init__(f"unknown node {node}")


# igs-engine
class BadProbabilityVector(ValidationError):
    pass


class RuleTooShort(ValidationError):
    pass


class ColorArityMismatch(ValidationError):
    pass


class InvalidRuleGraph(ValidationError):
    def __init__(self, color, variant, cause):
        self.cause = cause
        super().__init__(f"rule graph for color {color} variant {variant}: {cause}")


class ParseError(ValidationError):
    pass


# spectral / lyapunov
class NotDeterministic(ValidationError):
    pass


class PathExplosion(ResourceLimit):
    pass


class TooLarge(ResourceLimit):
    pass


class TooManySets(ResourceLimit):
    pass


class NotConverged(NumericalError):
    pass


class NonPrimitiveInput(NumericalError):
    pass


class NonPrimitiveMember(NumericalError):
    def __init__(self, matrix, provenance=None):
        self.matrix = matrix
        self.provenance = provenance
        msg = f"matrix {matrix} is not primitive"
        if provenance is not None:
            msg += f" (path choice {provenance})"
        super().__init__(msg)


class NotPrimitiveSystem(NumericalError):
    pass


# boxcover
class DegenerateRange(NumericalError):
    pass


class TooSmall(ValidationError):
    pass
