"""Exception hierarchy."""


class NetReconError(Exception):
    """Base class for all package errors."""


class ParameterError(NetReconError, ValueError):
    pass


class SimulationBlowup(NetReconError):
    def __init__(self, time, bound):
        super().__init__(f"state left |x| <= {bound:g} at t = {time:.6g}")
        self.time = time
        self.bound = bound


class InsufficientData(NetReconError):
    pass


class EvaluationError(NetReconError):
    def __init__(self, sample, message="non-finite regressor value"):
        super().__init__(f"{message} at sample {sample}")
        self.sample = sample


class DataInconsistent(NetReconError):
    """The model class cannot explain the data within tolerance."""

    def __init__(self, node, residual, tol):
        super().__init__(
            f"node {node}: data-fit residual {residual:.3g} exceeds consistency tolerance {tol:.3g}"
        )
        self.node = node
        self.residual = residual


class ScaleError(NetReconError):
    pass


class PreconditionError(NetReconError):
    pass


class ParseError(NetReconError):
    def __init__(self, message, line=None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line
