"""Exception types raised by the library."""


class ShapeError(ValueError):
    """A weight matrix, bias or input vector has the wrong shape."""


class CompositionError(ValueError):
    """Two networks cannot be composed because their interfaces differ."""


class ParallelizationError(ValueError):
    """Networks cannot be stacked in parallel."""


class ExtensionError(ValueError):
    """A network cannot be extended to the requested length."""


class GridError(ValueError):
    """An interpolation grid is malformed."""


class PipelineError(ValueError):
    """A pipeline description violates an ordering rule."""


class ContainmentError(ValueError):
    """The output box of one approximant is not inside the input box of the next."""
