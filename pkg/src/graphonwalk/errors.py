"""Exception hierarchy shared by all graphonwalk modules."""


class GraphonWalkError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(GraphonWalkError, ValueError):
    """A configuration record or CLI argument could not be parsed or validated."""


class RangeError(GraphonWalkError, ValueError):
    """Graphon or adjacency values fall outside [0, 1]."""


class IncompatibleResolution(GraphonWalkError, ValueError):
    """Two discretizations cannot be aligned (the coarse size does not divide the fine one)."""


class HypothesisViolation(GraphonWalkError):
    """A structural hypothesis (connectivity, degree lower bound) does not hold."""


class DegreeTooSmall(HypothesisViolation):
    def __init__(self, min_value, c_min):
        self.min_value = float(min_value)
        self.c_min = float(c_min)
        super().__init__(
            f"degree function minimum {self.min_value:.6g} is below c_min={self.c_min:.6g}"
        )


class IsolatedNode(HypothesisViolation):
    def __init__(self, node):
        self.node = int(node)
        super().__init__(f"node {self.node} has zero strength")


class ZeroGap(HypothesisViolation):
    def __init__(self, lambda2):
        self.lambda2 = float(lambda2)
        super().__init__(
            f"second eigenvalue {self.lambda2:.3g} is numerically zero; "
            "the graphon looks disconnected"
        )
